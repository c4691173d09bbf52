"""The 30 SRM-style high-pass filter kernels and residual convolution.

Kernel classes and normalization divisors:

  * 8 first-order differences (neighbor minus center), divisor 1
  * 4 second-order differences [1, -2, 1], divisor 2
  * 8 third-order differences [1, -3, 3, -1], divisor 3
  * SQUARE 3x3 (the KB kernel, divisor 4) and SQUARE 5x5 (divisor 12)
  * 4 EDGE 3x3 orientations (divisor 4) and 4 EDGE 5x5 (divisor 12)

Every kernel is stored as an integer numerator matrix centered in a 5x5
zero frame plus its divisor, so the bank stays exactly rational.  Residual
convolution is "same"-size 2-D cross-correlation with mirror (symmetric)
padding, accumulated in double precision; the numerator is correlated
first and the divisor applied once at the end, which keeps integer inputs
bit-exactly reproducible.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate2d

from .validation import as_raster

KERNEL_SIZE = 5
BANK_SIZE = 30


@dataclass(frozen=True)
class Kernel:
    name: str
    numerator: np.ndarray  # 5x5 int64
    divisor: int

    @property
    def coefficients(self):
        return self.numerator / self.divisor


def _framed(entries, divisor, name):
    """Place (dy, dx, value) entries into a centered 5x5 integer frame."""
    num = np.zeros((KERNEL_SIZE, KERNEL_SIZE), dtype=np.int64)
    c = KERNEL_SIZE // 2
    for dy, dx, v in entries:
        num[c + dy, c + dx] = v
    return Kernel(name, num, divisor)


def _embed(matrix, divisor, name):
    m = np.asarray(matrix, dtype=np.int64)
    num = np.zeros((KERNEL_SIZE, KERNEL_SIZE), dtype=np.int64)
    r0 = (KERNEL_SIZE - m.shape[0]) // 2
    c0 = (KERNEL_SIZE - m.shape[1]) // 2
    num[r0 : r0 + m.shape[0], c0 : c0 + m.shape[1]] = m
    return Kernel(name, num, divisor)


_DIRS8 = [(0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)]
_DIRS4 = [(0, 1), (1, 0), (1, 1), (1, -1)]

_SQUARE3 = [[-1, 2, -1], [2, -4, 2], [-1, 2, -1]]
_SQUARE5 = [
    [-1, 2, -2, 2, -1],
    [2, -6, 8, -6, 2],
    [-2, 8, -12, 8, -2],
    [2, -6, 8, -6, 2],
    [-1, 2, -2, 2, -1],
]
_EDGE3 = [[-1, 2, -1], [2, -4, 2], [0, 0, 0]]
_EDGE5 = [
    [-1, 2, -2, 2, -1],
    [2, -6, 8, -6, 2],
    [-2, 8, -12, 8, -2],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
]


def _build_bank():
    kernels = []
    for dy, dx in _DIRS8:
        kernels.append(
            _framed([(0, 0, -1), (dy, dx, 1)], 1, f"first_order_{dy}_{dx}")
        )
    for dy, dx in _DIRS4:
        kernels.append(
            _framed(
                [(-dy, -dx, 1), (0, 0, -2), (dy, dx, 1)], 2, f"second_order_{dy}_{dx}"
            )
        )
    for dy, dx in _DIRS8:
        kernels.append(
            _framed(
                [(-dy, -dx, 1), (0, 0, -3), (dy, dx, 3), (2 * dy, 2 * dx, -1)],
                3,
                f"third_order_{dy}_{dx}",
            )
        )
    kernels.append(_embed(_SQUARE3, 4, "square_3x3"))
    kernels.append(_embed(_SQUARE5, 12, "square_5x5"))
    for k in range(4):
        kernels.append(_embed(np.rot90(np.asarray(_EDGE3), k), 4, f"edge_3x3_rot{k}"))
    for k in range(4):
        kernels.append(_embed(np.rot90(np.asarray(_EDGE5), k), 12, f"edge_5x5_rot{k}"))
    assert len(kernels) == BANK_SIZE
    return tuple(kernels)


_BANK = _build_bank()


def filter_bank():
    """The fixed 30-kernel high-pass bank (each numerator sums to zero)."""
    return _BANK


def _correlate_bank(x, absolute):
    x = as_raster(x)
    if x.shape[0] < KERNEL_SIZE or x.shape[1] < KERNEL_SIZE:
        raise ValueError(f"input must be at least {KERNEL_SIZE}x{KERNEL_SIZE}")
    out = np.empty((BANK_SIZE, x.shape[0], x.shape[1]), dtype=np.float64)
    for i, k in enumerate(_BANK):
        num = np.abs(k.numerator) if absolute else k.numerator
        out[i] = correlate2d(x, num.astype(np.float64), mode="same", boundary="symm")
        out[i] /= k.divisor
    return out


def residuals(img):
    """High-pass residual stack: 30 same-size planes, mirror padding."""
    return _correlate_bank(img, absolute=False)


def sca_residuals(pmap):
    """Selection-channel stack: correlation with the absolute-valued kernels."""
    return _correlate_bank(pmap, absolute=True)


def export_kernel_table() -> str:
    """Plain-text kernel table (numerators + divisor) for other components.

    One block per kernel: a header line ``kernel <index> <name> divisor=<d>``
    followed by five rows of five integers, blank-line separated.
    """
    lines = []
    for i, k in enumerate(_BANK):
        lines.append(f"kernel {i} {k.name} divisor={k.divisor}")
        for row in k.numerator:
            lines.append(" ".join(str(int(v)) for v in row))
        lines.append("")
    return "\n".join(lines)
