"""Syndrome-trellis codec: minimal-cost embedding and syndrome extraction.

The parity-check matrix H (m x n) is built by diagonal placement of a
small h x w binary sub-matrix: the n columns are partitioned into m
balanced blocks (block b spans columns floor(n*b/m) .. floor(n*(b+1)/m)),
the t-th column of block b is the (t mod w)-th sub-matrix column placed
starting at row b, clipped at row m.  ``stc_embed`` finds, over all stego
vectors y with H.y = message (GF(2)), the one minimizing the total cost of
positions where y differs from the cover, via a Viterbi pass over the
2^h-state syndrome register.

``embed_image`` composes the practical pipeline: probability map -> costs,
STC over the permuted LSB plane, then ternary +-1 modulation of the
selected flips.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import cost as cost_mod
from .errors import InfeasibleError
from .validation import check_bits, check_image, check_probability_map, \
    check_same_shape

DEFAULT_CONSTRAINT_HEIGHT = 7

_SUBMATRIX_SEED = 0x5354C0DE


@dataclass(frozen=True)
class StcParams:
    """Trellis sub-matrix and declared message length."""

    sub_matrix: np.ndarray  # h x w uint8
    message_length: int

    def __post_init__(self):
        h_hat = np.asarray(self.sub_matrix, dtype=np.uint8)
        if h_hat.ndim != 2:
            raise ValueError("sub_matrix must be 2-D")
        h, w = h_hat.shape
        if not 2 <= h <= 12:
            raise ValueError("constraint height must lie in [2, 12]")
        if w < 1:
            raise ValueError("sub_matrix width must be at least 1")
        if not np.isin(h_hat, (0, 1)).all():
            raise ValueError("sub_matrix must be binary")
        if not h_hat[0].any() or not h_hat[-1].any():
            raise ValueError("first and last sub_matrix rows must not be all-zero")
        if self.message_length < 1:
            raise ValueError("message_length must be positive")
        object.__setattr__(self, "sub_matrix", h_hat)

    @property
    def height(self) -> int:
        return self.sub_matrix.shape[0]

    @property
    def width(self) -> int:
        return self.sub_matrix.shape[1]


# Column values (bit k = row k) selected by offline Monte-Carlo search for
# low coding loss on the constant-cost profile.  Everything else falls back
# to a constrained deterministic draw.
_GOOD_COLUMNS = {
    (7, 2): (97, 43),
    (7, 4): (38, 122, 47, 43),
    (7, 8): (100, 78, 49, 114, 77, 59, 93, 45),
    (8, 4): (241, 85, 235, 158),
    (9, 4): (497, 341, 491, 158),
    (10, 2): (493, 523),
    (10, 4): (1009, 853, 491, 670),
    (10, 8): (964, 883, 817, 741, 801, 565, 205, 723),
    (11, 4): (1379, 1811, 1057, 1421),
    (12, 2): (3883, 3511),
    (12, 4): (841, 3025, 2125, 3241),
    (12, 8): (3704, 4018, 2973, 283, 1511, 2103, 2655, 657),
}


def _columns_to_matrix(cols, h):
    m = np.zeros((h, len(cols)), dtype=np.uint8)
    for j, value in enumerate(cols):
        for k in range(h):
            m[k, j] = (value >> k) & 1
    return m


def make_sub_matrix(h: int, w: int) -> np.ndarray:
    """Deterministic h x w binary sub-matrix for the trellis.

    Uses a curated column table where one exists for (h, w); otherwise
    draws nonzero, pairwise-distinct (when possible) columns from a
    fixed-seed generator, rejecting draws whose first or last row is
    all-zero, so every build agrees bit for bit.
    """
    if not 2 <= h <= 12:
        raise ValueError("constraint height must lie in [2, 12]")
    if w < 1:
        raise ValueError("width must be at least 1")
    if (h, w) in _GOOD_COLUMNS:
        return _columns_to_matrix(_GOOD_COLUMNS[(h, w)], h)
    rng = np.random.default_rng(_SUBMATRIX_SEED)
    values = []
    seen = set()
    while len(values) < w:
        v = int(rng.integers(1, 2**h))
        if v in seen and len(seen) < 2**h - 1:
            continue
        seen.add(v)
        values.append(v)
    if not any(v & 1 for v in values):
        values[0] |= 1
    if not any(v >> (h - 1) for v in values):
        values[-1] |= 1 << (h - 1)
    return _columns_to_matrix(values, h)


def default_params(n: int, message_length: int, h: int = DEFAULT_CONSTRAINT_HEIGHT):
    """Params with sub-matrix width floor(n / message_length)."""
    if message_length < 1 or message_length > n:
        raise ValueError("message length must lie in [1, n]")
    return StcParams(make_sub_matrix(h, n // message_length), message_length)


def _block_lengths(n: int, m: int) -> np.ndarray:
    starts = (np.arange(m + 1) * n) // m
    return np.diff(starts).astype(np.int64)


def _column_values(params: StcParams, n: int) -> np.ndarray:
    """Masked syndrome-register value of every H column, in column order."""
    m = params.message_length
    h, w = params.height, params.width
    weights = 1 << np.arange(h, dtype=np.int64)
    col_vals = (params.sub_matrix.astype(np.int64) * weights[:, None]).sum(axis=0)
    out = np.empty(n, dtype=np.int64)
    i = 0
    for b, wb in enumerate(_block_lengths(n, m)):
        mask = (1 << min(h, m - b)) - 1
        for t in range(wb):
            out[i] = col_vals[t % w] & mask
            i += 1
    return out


def build_parity_check(params: StcParams, n: int) -> np.ndarray:
    """Dense m x n parity-check matrix (intended for small n: docs, oracles)."""
    m = params.message_length
    h, w = params.height, params.width
    H = np.zeros((m, n), dtype=np.uint8)
    i = 0
    for b, wb in enumerate(_block_lengths(n, m)):
        for t in range(wb):
            rows = min(h, m - b)
            H[b : b + rows, i] = params.sub_matrix[:rows, t % w]
            i += 1
    return H


@njit(cache=True)
def _viterbi(cols, x, costs, msg, block_len, h):  # pragma: no cover - jitted
    nstates = 1 << h
    n = x.shape[0]
    m = msg.shape[0]
    wght = np.full(nstates, np.inf)
    wght[0] = 0.0
    new = np.empty(nstates)
    choices = np.zeros((n, nstates), dtype=np.uint8)
    i = 0
    for b in range(m):
        for _t in range(block_len[b]):
            col = cols[i]
            rho = costs[i]
            xi = x[i]
            c_zero = rho if xi == 1 else 0.0
            c_one = rho if xi == 0 else 0.0
            for s in range(nstates):
                a0 = wght[s] + c_zero
                a1 = wght[s ^ col] + c_one
                # ties break toward keeping the cover bit
                if a1 < a0 or (a1 == a0 and xi == 1):
                    new[s] = a1
                    choices[i, s] = 1
                else:
                    new[s] = a0
                    choices[i, s] = 0
            wght, new = new, wght
            i += 1
        bit = msg[b]
        half = nstates >> 1
        for s in range(half):
            new[s] = wght[2 * s + bit]
        for s in range(half, nstates):
            new[s] = np.inf
        wght, new = new, wght
    total = wght[0]
    y = np.zeros(n, dtype=np.uint8)
    if not np.isfinite(total):
        return total, y
    s = 0
    i = n - 1
    for b in range(m - 1, -1, -1):
        s = (s << 1) | msg[b]
        for _t in range(block_len[b]):
            yi = choices[i, s]
            y[i] = yi
            if yi == 1:
                s ^= cols[i]
            i -= 1
    return total, y


def stc_embed(cover_bits, costs, message, params: StcParams):
    """Minimal-distortion stego bits with H.y = message; wet costs block flips.

    Returns ``(stego_bits, total_cost)``.
    """
    x = check_bits(cover_bits, "cover_bits")
    msg = check_bits(message, "message")
    n = x.size
    m = msg.size
    if m != params.message_length:
        raise ValueError("message length does not match params")
    if m > n:
        raise InfeasibleError("message longer than cover")
    if params.width != max(1, n // m):
        raise ValueError(
            f"sub_matrix width {params.width} inconsistent with n//m = {n // m}"
        )
    rho = np.asarray(costs, dtype=np.float64).ravel()
    if rho.size != n:
        raise ValueError("costs length must match cover length")
    if rho.min() < 0.0:
        raise ValueError("costs must be nonnegative")
    rho = np.where(cost_mod.is_wet(rho), np.inf, rho)
    cols = _column_values(params, n)
    block_len = _block_lengths(n, m)
    total, y = _viterbi(
        cols, x, rho, msg.astype(np.int64), block_len, params.height
    )
    if not np.isfinite(total):
        raise InfeasibleError("no syndrome-satisfying path (wet pixels block all routes)")
    return y, float(total)


def stc_extract(stego_bits, params: StcParams):
    """Syndrome H.y over GF(2), recovering the embedded message."""
    y = check_bits(stego_bits, "stego_bits")
    n = y.size
    m = params.message_length
    if m > n or params.width != max(1, n // m):
        raise ValueError("stego length inconsistent with params")
    cols = _column_values(params, n)
    block_len = _block_lengths(n, m)
    out = np.empty(m, dtype=np.uint8)
    reg = 0
    i = 0
    for b in range(m):
        for _t in range(block_len[b]):
            if y[i]:
                reg ^= int(cols[i])
            i += 1
        out[b] = reg & 1
        reg >>= 1
    return out


def scan_order(width: int, height: int, order: str = "interleaved", seed: int = 0):
    """Deterministic pixel-index permutation for the trellis scan."""
    n = width * height
    if order == "row_major":
        return np.arange(n, dtype=np.int64)
    if order == "interleaved":
        return np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0]).permutation(n)
    raise ValueError(f"unknown scan order {order!r}")


def embed_image(cover, pmap, message, h: int = DEFAULT_CONSTRAINT_HEIGHT,
                seed: int = 0, order: str = "interleaved"):
    """Practical embedding: pmap -> costs -> STC on the LSB plane -> +-1 changes.

    Every flipped pixel changes by exactly one intensity step; the change
    sign is a seeded uniform draw, forced at saturation (0 -> +1, 255 -> -1).
    """
    cover = check_image(cover)
    pmap = check_probability_map(pmap)
    check_same_shape(cover, pmap, "cover", "pmap")
    msg = check_bits(message, "message")
    n = cover.size
    if msg.size < 1 or msg.size > n:
        raise InfeasibleError("message length must lie in [1, cover size]")
    perm = scan_order(cover.shape[1], cover.shape[0], order, seed)
    rho = cost_mod.prob_to_cost(pmap).ravel()[perm]
    x = (cover.ravel()[perm] & 1).astype(np.uint8)
    params = default_params(n, msg.size, h)
    y, _total = stc_embed(x, rho, msg, params)

    flips = np.nonzero(y != x)[0]
    pixel_idx = perm[flips]
    signs = np.where(
        np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1]).random(
            flips.size
        )
        < 0.5,
        -1,
        1,
    ).astype(np.int16)
    flat = cover.ravel().astype(np.int16)
    signs[flat[pixel_idx] == 0] = 1
    signs[flat[pixel_idx] == 255] = -1
    flat[pixel_idx] += signs
    return flat.astype(np.uint8).reshape(cover.shape)


def extract_image(stego, message_length: int, h: int = DEFAULT_CONSTRAINT_HEIGHT,
                  seed: int = 0, order: str = "interleaved"):
    """Recover the message from a stego image's LSB plane."""
    stego = check_image(stego)
    n = stego.size
    perm = scan_order(stego.shape[1], stego.shape[0], order, seed)
    y = (stego.ravel()[perm] & 1).astype(np.uint8)
    params = default_params(n, message_length, h)
    return stc_extract(y, params)
