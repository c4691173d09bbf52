"""Ternary capacity math and the adversarial loss functions.

A change probability p splits symmetrically into (p/2, p/2, 1-p) over
{+1, -1, 0}; the per-pixel ternary entropy of that split, summed over the
raster, is the capacity C that the generator's payload term drives toward
H*W*Q.
"""

import math
from dataclasses import dataclass

import numpy as np

from .validation import check_probability_map

LOG2_3 = math.log2(3.0)

_LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class EmbeddingConfig:
    """Raster dimensions and target payload in bits per pixel."""

    height: int
    width: int
    payload: float

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("height and width must be positive")
        if not 0.0 < self.payload <= 1.5:
            raise ValueError("payload must lie in (0, 1.5] bpp")

    @property
    def target_bits(self) -> float:
        return self.payload * self.height * self.width


@dataclass(frozen=True)
class LossConfig:
    """Weights of the adversarial and payload terms of the generator loss."""

    alpha: float = 1.0
    beta: float = 1e-7

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


@dataclass(frozen=True)
class CapacityReport:
    total_bits: float
    per_pixel: np.ndarray


def split_probability(p):
    """Split a change probability into (p_plus, p_minus, p_zero)."""
    p = np.asarray(p, dtype=np.float64)
    if p.min() < 0.0 or p.max() > 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    half = p / 2.0
    if p.ndim == 0:
        return float(half), float(half), float(1.0 - p)
    return half, half.copy(), 1.0 - p


def ternary_entropy(p):
    """Ternary entropy H3(p) in bits, with the 0*log2(0) = 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    if p.min() < 0.0 or p.max() > 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    out = np.zeros_like(p)
    pos = p > 1e-300  # entropy of subnormal p is below double resolution anyway
    pp = p[pos]
    out[pos] = -pp * np.log2(pp / 2.0) - (1.0 - pp) * np.log2(1.0 - pp)
    return float(out[0]) if scalar else out


def capacity(pmap) -> CapacityReport:
    """Total ternary entropy of a probability map, compensated summation."""
    pmap = check_probability_map(pmap)
    per_pixel = ternary_entropy(pmap)
    total = math.fsum(per_pixel.ravel())
    return CapacityReport(total_bits=total, per_pixel=per_pixel)


def discriminator_loss(softmax_outputs, label) -> float:
    """Cross-entropy of a two-class softmax against a cover/stego label.

    Natural-log cross-entropy with outputs clamped to [1e-12, 1] before the
    log; ``label`` selects the one-hot truth, index 0 = cover, 1 = stego.
    """
    y = np.asarray(softmax_outputs, dtype=np.float64)
    if y.shape != (2,):
        raise ValueError("softmax_outputs must be a pair")
    if y.min() < 0.0 or abs(y.sum() - 1.0) > 1e-6:
        raise ValueError("softmax_outputs must be a probability distribution")
    try:
        idx = {"cover": 0, "stego": 1}[label]
    except KeyError:
        raise ValueError(f"label must be 'cover' or 'stego', got {label!r}") from None
    return float(-math.log(min(max(y[idx], _LOG_CLAMP), 1.0)))


def generator_loss(l_d, cap, cfg: EmbeddingConfig, w: LossConfig = LossConfig()):
    """Generator objective: -alpha*l_D + beta*(C - H*W*Q)^2."""
    total = cap.total_bits if isinstance(cap, CapacityReport) else float(cap)
    return -w.alpha * l_d + w.beta * (total - cfg.target_bits) ** 2
