"""Differentiable embedding simulator layer.

Given a probability map p in [0, 0.5] and uniform noise n in (0, 1), the
hard sampler outputs -1 / 0 / +1 on the staircase n < p/2 / middle /
n > 1 - p/2.  The smooth surrogate used during training replaces the
staircase with scaled tanh terms so gradients flow into the generator:

    m = -0.5 * tanh(lam * (p - 2n)) + 0.5 * tanh(lam * (p - 2(1 - n)))
"""

import torch
from torch import nn

DEFAULT_LAMBDA = 1000.0


def tanh_modification(p, n, lam=DEFAULT_LAMBDA):
    """Smooth ternary modification in [-1, 1]; differentiable in p."""
    return -0.5 * torch.tanh(lam * (p - 2.0 * n)) + 0.5 * torch.tanh(
        lam * (p - 2.0 * (1.0 - n))
    )


class TanhSimulator(nn.Module):
    """Samples noise once per call and applies the smooth modification."""

    def __init__(self, lam=DEFAULT_LAMBDA):
        super().__init__()
        self.lam = lam

    def forward(self, p, generator=None):
        n = torch.rand(
            p.shape, dtype=p.dtype, device=p.device, generator=generator
        )
        return tanh_modification(p, n, self.lam)
