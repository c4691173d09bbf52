"""Input validation helpers shared by all modules and the estimator API."""

import numpy as np


def as_raster(x, name="array"):
    """Coerce to a 2-D float64 array without copying when possible."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {a.shape}")
    return a


def check_image(img, name="image"):
    """Validate a grayscale image raster: 2-D, integer intensities in [0, 255]."""
    a = np.asarray(img)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.dtype != np.uint8:
        if not np.issubdtype(a.dtype, np.integer):
            raise ValueError(f"{name} must have integer dtype, got {a.dtype}")
        if a.min() < 0 or a.max() > 255:
            raise ValueError(f"{name} intensities must lie in [0, 255]")
        a = a.astype(np.uint8)
    return a


def check_probability_map(pmap, name="pmap", p_max=0.5, tol=0.0):
    """Validate an embedding-change probability raster with values in [0, p_max]."""
    a = as_raster(pmap, name)
    lo, hi = a.min(), a.max()
    if lo < -tol or hi > p_max + tol:
        raise ValueError(
            f"{name} values must lie in [0, {p_max}], got range [{lo}, {hi}]"
        )
    if tol:
        a = np.clip(a, 0.0, p_max)
    return a


def check_unit_open(noise, name="noise"):
    """Validate a uniform random field with values in [0, 1)."""
    a = as_raster(noise, name)
    if a.min() < 0.0 or a.max() >= 1.0:
        raise ValueError(f"{name} values must lie in [0, 1)")
    return a


def check_same_shape(a, b, name_a="first", name_b="second"):
    if a.shape != b.shape:
        raise ValueError(
            f"{name_a} shape {a.shape} does not match {name_b} shape {b.shape}"
        )


def check_bits(bits, name="bits"):
    """Validate a 1-D vector of 0/1 values, returned as uint8."""
    a = np.asarray(bits)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {a.shape}")
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return a.astype(np.uint8)
