"""Embedding simulators: the staircase sampler and its smooth tanh surrogate.

The staircase simulator turns a change probability p and a uniform draw n
into a ternary modification in {-1, 0, +1}.  The tanh surrogate

    m' = -0.5*tanh(lam*(p - 2n)) + 0.5*tanh(lam*(p - 2*(1 - n)))

approaches the staircase as ``lam`` grows and has a usable derivative in p
everywhere, which is what gradient-based distortion learning needs.
"""

import numpy as np

from .validation import as_raster, check_image, check_probability_map, \
    check_same_shape, check_unit_open

DEFAULT_LAMBDA = 1000.0

# p up to 0.6 is accepted by the scalar simulators so the published
# staircase/tanh comparison curves (drawn at p = 0.6) can be reproduced;
# full-map operations keep the 0.5 cap.
_P_SCALAR_MAX = 0.6


def random_field(shape, seed):
    """Seeded uniform [0, 1) raster used as the simulator's noise source."""
    return np.random.default_rng(seed).random(shape)


def _check_pn(p, n, p_max):
    p = np.asarray(p, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    if p.min() < 0.0 or p.max() > p_max:
        raise ValueError(f"p must lie in [0, {p_max}]")
    if n.min() < 0.0 or n.max() >= 1.0:
        raise ValueError("n must lie in [0, 1)")
    return p, n


def staircase_simulate(p, n):
    """Ternary staircase sampler: -1 if n < p/2, +1 if n > 1 - p/2, else 0.

    Ties at the stair edges classify as 0 (strict inequalities).
    """
    p, n = _check_pn(p, n, _P_SCALAR_MAX)
    if p.ndim == 0 and n.ndim == 0:
        if n < p / 2.0:
            return -1
        if n > 1.0 - p / 2.0:
            return 1
        return 0
    out = np.zeros(np.broadcast(p, n).shape, dtype=np.int8)
    out[np.broadcast_to(n < p / 2.0, out.shape)] = -1
    out[np.broadcast_to(n > 1.0 - p / 2.0, out.shape)] = 1
    return out


def tanh_simulate(p, n, lam=DEFAULT_LAMBDA):
    """Smooth surrogate of the staircase sampler, output in [-1, 1]."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam <= 0):
        raise ValueError("lam must be positive")
    p, n = _check_pn(p, n, _P_SCALAR_MAX)
    out = -0.5 * np.tanh(lam * (p - 2.0 * n)) + 0.5 * np.tanh(
        lam * (p - 2.0 * (1.0 - n))
    )
    return float(out) if out.ndim == 0 else out


def _sech2(x):
    # 4*e^(-2|x|) / (1 + e^(-2|x|))^2, overflow-free for any x
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def tanh_simulate_grad(p, n, lam=DEFAULT_LAMBDA):
    """Analytic derivative of ``tanh_simulate`` with respect to p."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam <= 0):
        raise ValueError("lam must be positive")
    p, n = _check_pn(p, n, _P_SCALAR_MAX)
    out = -0.5 * lam * _sech2(lam * (p - 2.0 * n)) + 0.5 * lam * _sech2(
        lam * (p - 2.0 * (1.0 - n))
    )
    return float(out) if out.ndim == 0 else out


def simulate_map(pmap, noise, mode="staircase", lam=DEFAULT_LAMBDA):
    """Apply the selected simulator element-wise over a probability map.

    Returns an int8 map in {-1, 0, +1} for ``staircase`` and a float64
    raster in [-1, 1] for ``tanh``.
    """
    pmap = check_probability_map(pmap)
    noise = check_unit_open(noise)
    check_same_shape(pmap, noise, "pmap", "noise")
    if mode == "staircase":
        return staircase_simulate(pmap, noise)
    if mode == "tanh":
        return tanh_simulate(pmap, noise, lam)
    raise ValueError(f"unknown simulator mode {mode!r}")


def apply_modification(cover, mods):
    """Add a ternary modification map to a cover image.

    Saturated pixels flip the change sign (255 with +1 gives 254, 0 with -1
    gives 1) so the LSB still flips and the result stays a valid image.
    """
    cover = check_image(cover)
    mods = np.asarray(mods)
    check_same_shape(cover, mods, "cover", "mods")
    if not np.isin(mods, (-1, 0, 1)).all():
        raise ValueError("modification map must contain only -1, 0, +1")
    m = mods.astype(np.int16)
    m[(cover == 255) & (m == 1)] = -1
    m[(cover == 0) & (m == -1)] = 1
    return (cover.astype(np.int16) + m).astype(np.uint8)
