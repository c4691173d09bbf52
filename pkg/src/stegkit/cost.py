"""Probability-to-cost conversion and payload calibration.

rho = ln(1/p - 2) maps small change probabilities to large costs; its
algebraic inverse is p = 1/(e^rho + 2).  Probabilities above 1/3 would
produce negative costs, which a practical trellis codec cannot consume, so
they clamp to 0 by default ("free" pixels).  Probabilities at or below
1e-10 become wet pixels (cost 1e13) that must never be modified.

``calibrate_payload`` finds the Gibbs parameter mu such that the ternary
capacity of p(mu) = e^(-mu*rho) / (1 + 2*e^(-mu*rho)) hits an exact bit
target, by bisection.
"""

import math

import numpy as np

from .errors import InfeasibleError
from .io import WET_COST
from .rate_loss import LOG2_3, EmbeddingConfig, ternary_entropy
from .validation import as_raster

WET_PROBABILITY = 1e-10

_MAX_BISECTION_STEPS = 200
_REL_TOL = 1e-6


def prob_to_cost(p, clamp_negative=True):
    """Convert change probabilities in [0, 0.5] to embedding costs.

    p <= 1e-10 yields the wet sentinel 1e13; p > 1/3 yields a negative raw
    cost which is clamped to 0 unless ``clamp_negative`` is False (the
    unclamped values are only useful for analysis, not for coding).
    """
    p = np.asarray(p, dtype=np.float64)
    if p.min() < 0.0 or p.max() > 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    scalar = p.ndim == 0
    p = np.atleast_1d(p).copy()
    wet = p <= WET_PROBABILITY
    p[wet] = 0.25  # placeholder, overwritten below
    with np.errstate(divide="ignore"):  # p = 0.5 gives -inf before clamping
        rho = np.log(1.0 / p - 2.0)
    if clamp_negative:
        np.clip(rho, 0.0, None, out=rho)
    rho[wet] = WET_COST
    return float(rho[0]) if scalar else rho


def cost_to_prob(rho):
    """Invert ``prob_to_cost`` on the unclamped branch: p = 1/(e^rho + 2)."""
    rho = np.asarray(rho, dtype=np.float64)
    if rho.min() < 0.0:
        raise ValueError("rho must be nonnegative")
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    p = 1.0 / (np.exp(np.minimum(rho, 700.0)) + 2.0)  # avoid overflow at the wet sentinel
    p[is_wet(rho)] = 0.0
    return float(p[0]) if scalar else p


def is_wet(costs):
    return np.asarray(costs) >= 1e12


def _gibbs_probability(costs, mu, wet):
    e = np.exp(-mu * costs)
    p = e / (1.0 + 2.0 * e)
    p[wet] = 0.0
    return p


def _capacity_bits(p):
    return math.fsum(ternary_entropy(p).ravel())


def calibrate_payload(costs, cfg: EmbeddingConfig, mu_lo=1e-6, mu_hi=1e3):
    """Find the probability map whose capacity equals cfg.target_bits.

    Returns p(mu) under the ternary Gibbs form, with wet pixels fixed at 0.
    The bisection bracket expands geometrically when the target is not
    bracketed; convergence is to relative 1e-6 in bits.
    """
    costs = as_raster(costs, "costs")
    if costs.min() < 0.0:
        raise ValueError("costs must be nonnegative")
    if costs.shape != (cfg.height, cfg.width):
        raise ValueError("cost map shape does not match config")
    wet = is_wet(costs)
    n_dry = int((~wet).sum())
    if n_dry == 0:
        raise InfeasibleError("all pixels are wet")
    target = cfg.target_bits
    max_bits = n_dry * LOG2_3  # mu -> 0 limit: every dry pixel at p = 1/3
    if target > max_bits * (1.0 - 1e-12):
        raise InfeasibleError(
            f"infeasible payload: {target:.1f} bits exceeds achievable {max_bits:.1f} bits"
        )

    # capacity(mu) is decreasing: expand until cap(mu_lo) >= target >= cap(mu_hi)
    for _ in range(64):
        if _capacity_bits(_gibbs_probability(costs, mu_lo, wet)) >= target:
            break
        mu_lo /= 8.0
    else:
        raise InfeasibleError("could not bracket payload from below")
    for _ in range(64):
        if _capacity_bits(_gibbs_probability(costs, mu_hi, wet)) <= target:
            break
        mu_hi *= 8.0
    else:
        raise InfeasibleError("could not bracket payload from above")

    for _ in range(_MAX_BISECTION_STEPS):
        mu = 0.5 * (mu_lo + mu_hi)
        p = _gibbs_probability(costs, mu, wet)
        cap = _capacity_bits(p)
        if abs(cap - target) <= _REL_TOL * target:
            return p
        if cap > target:
            mu_lo = mu
        else:
            mu_hi = mu
    raise InfeasibleError("payload calibration did not converge")
