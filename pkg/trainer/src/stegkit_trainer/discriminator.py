"""Steganalytic discriminator with a fixed high-pass front end.

The first layer is a frozen bank of 5x5 high-pass kernels loaded from the
plain-text table exported by the embedding toolkit (``stegkit kernels``),
followed by an absolute-value activation.  With selection-channel
awareness enabled, the probability map is filtered by the same bank with
absolute-valued coefficients and added element-wise to the image residual
planes before the trainable body.  The body follows the familiar
steganalysis-CNN pattern: small convolution groups with batch
normalization, spatial pooling, global average pooling and a two-class
softmax head.
"""

import numpy as np
import torch
from torch import nn

from .formats import parse_kernel_table


def _bank_conv(kernels, absolute):
    weight = np.stack([np.abs(k) if absolute else k for _, k in kernels])
    conv = nn.Conv2d(
        1, len(kernels), 5, padding=2, padding_mode="reflect", bias=False
    )
    conv.weight.data = torch.from_numpy(weight[:, None, :, :]).float()
    conv.weight.requires_grad_(False)
    return conv


class _Group(nn.Module):
    def __init__(self, c_in, c_out, kernel, pool):
        super().__init__()
        self.conv = nn.Conv2d(c_in, c_out, kernel, padding=kernel // 2)
        self.bn = nn.BatchNorm2d(c_out)
        self.pool = nn.AvgPool2d(2) if pool else nn.Identity()

    def forward(self, x):
        return self.pool(torch.relu(self.bn(self.conv(x))))


class Discriminator(nn.Module):
    """(image, probability map?) -> two-class softmax (cover, stego)."""

    def __init__(self, kernel_table: str, sca: bool = False):
        super().__init__()
        kernels = parse_kernel_table(kernel_table)
        self.sca = sca
        self.hpf = _bank_conv(kernels, absolute=False)
        self.sca_hpf = _bank_conv(kernels, absolute=True) if sca else None
        planes = len(kernels)
        self.body = nn.Sequential(
            _Group(planes, 8, 5, pool=True),
            _Group(8, 16, 5, pool=True),
            _Group(16, 32, 1, pool=True),
            _Group(32, 64, 1, pool=False),
        )
        self.head = nn.Linear(64, 2)

    def forward(self, image, pmap=None):
        x = torch.abs(self.hpf(image))
        if self.sca:
            if pmap is None:
                raise ValueError("selection-channel mode requires a probability map")
            x = x + self.sca_hpf(pmap)
        x = self.body(x)
        x = x.mean(dim=(2, 3))
        return torch.softmax(self.head(x), dim=1)


def build_discriminator(kernel_table: str, sca: bool = False) -> Discriminator:
    return Discriminator(kernel_table, sca=sca)
