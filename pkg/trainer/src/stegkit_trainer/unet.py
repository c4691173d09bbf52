"""U-Net generator translating a cover image into a probability map.

The reference configuration (512x512 input) is an eight-level
encoder/decoder: contracting groups are 3x3 stride-2 convolutions with
batch normalization and Leaky-ReLU, expanding groups are 5x5 stride-2
transposed convolutions with batch normalization and ReLU, and every
decoder level except the last concatenates the mirrored encoder output.
The head is ReLU(sigmoid(x) - 0.5), bounding outputs to [0, 0.5].

For toy inputs the depth shrinks so the bottleneck stays at least 1x1,
preserving the mirror-concatenation pattern at reduced scale.
"""

from dataclasses import dataclass, field

import torch
from torch import nn

_FULL_CHANNELS = (16, 32, 64, 128, 128, 128, 128, 128)


@dataclass
class GeneratorConfig:
    """Input size and per-layer channel plan for the generator."""

    height: int = 512
    width: int = 512
    leaky_slope: float = 0.2
    channels: tuple = field(default=None)

    def __post_init__(self):
        if self.height < 4 or self.width < 4:
            raise ValueError("input must be at least 4x4")
        depth = 0
        size = min(self.height, self.width)
        while depth < len(_FULL_CHANNELS) and size % 2 == 0 and size // 2 >= 1:
            size //= 2
            depth += 1
        if depth < 2:
            raise ValueError("input size must allow at least two halvings")
        if self.height % (1 << depth) or self.width % (1 << depth):
            raise ValueError(
                f"input {self.height}x{self.width} is not divisible by 2^{depth}"
            )
        if self.channels is None:
            self.channels = _FULL_CHANNELS[:depth]
        if len(self.channels) != depth:
            raise ValueError("channel plan length must match the halving depth")

    @property
    def depth(self) -> int:
        return len(self.channels)


class _Down(nn.Module):
    def __init__(self, c_in, c_out, slope):
        super().__init__()
        self.conv = nn.Conv2d(c_in, c_out, 3, stride=2, padding=1)
        self.bn = nn.BatchNorm2d(c_out)
        self.act = nn.LeakyReLU(slope)

    def forward(self, x):
        return self.act(self.bn(self.conv(x)))


class _Up(nn.Module):
    def __init__(self, c_in, c_out):
        super().__init__()
        self.deconv = nn.ConvTranspose2d(
            c_in, c_out, 5, stride=2, padding=2, output_padding=1
        )
        self.bn = nn.BatchNorm2d(c_out)
        self.act = nn.ReLU()

    def forward(self, x):
        return self.act(self.bn(self.deconv(x)))


class Generator(nn.Module):
    """Image (N, 1, H, W) in [0, 1] -> probability map (N, 1, H, W) in [0, 0.5]."""

    def __init__(self, cfg: GeneratorConfig):
        super().__init__()
        self.cfg = cfg
        chans = cfg.channels
        depth = cfg.depth
        downs = []
        c_prev = 1
        for c in chans:
            downs.append(_Down(c_prev, c, cfg.leaky_slope))
            c_prev = c
        self.downs = nn.ModuleList(downs)
        ups = []
        c_prev = chans[-1]
        for k in range(depth):
            c_out = chans[depth - 2 - k] if k < depth - 1 else 1
            ups.append(_Up(c_prev, c_out))
            # all decoder levels except the last concatenate the mirror
            c_prev = c_out + (chans[depth - 2 - k] if k < depth - 1 else 0)
        self.ups = nn.ModuleList(ups)

    def forward(self, x):
        skips = []
        for down in self.downs:
            x = down(x)
            skips.append(x)
        for k, up in enumerate(self.ups):
            x = up(x)
            if k < len(self.ups) - 1:
                x = torch.cat([x, skips[len(self.ups) - 2 - k]], dim=1)
        return torch.relu(torch.sigmoid(x) - 0.5)

    def layer_shapes(self, batch=1):
        """Output shape (C, H, W) of every layer group for a forward pass."""
        shapes = []
        was_training = self.training
        self.eval()
        with torch.no_grad():
            x = torch.zeros(batch, 1, self.cfg.height, self.cfg.width)
            skips = []
            for down in self.downs:
                x = down(x)
                skips.append(x)
                shapes.append(tuple(x.shape[1:]))
            for k, up in enumerate(self.ups):
                x = up(x)
                if k < len(self.ups) - 1:
                    x = torch.cat([x, skips[len(self.ups) - 2 - k]], dim=1)
                shapes.append(tuple(x.shape[1:]))
            x = torch.relu(torch.sigmoid(x) - 0.5)
            shapes.append(tuple(x.shape[1:]))
        if was_training:
            self.train()
        return shapes


def build_generator(cfg: GeneratorConfig) -> Generator:
    return Generator(cfg)
