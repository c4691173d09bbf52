"""Alternating adversarial training loop and inference entry points.

Each iteration runs the five pipeline steps: (1) the generator translates
covers into probability maps, (2) the simulator layer samples smooth
ternary modifications, (3) stego images are formed by adding the
modifications to the covers, (4) the discriminator scores covers and
stegos, (5) discriminator and generator parameters are updated
alternately.  The discriminator minimizes two-class cross-entropy; the
generator minimizes  -alpha * l_D + beta * (C - H*W*Q)^2  where C is the
ternary capacity of the emitted probability map.

The full-scale reference setting uses beta = 1e-7 on 512x512 covers.  On
toy rasters the squared payload gap shrinks with (H*W)^2, so ``scaled
beta`` rescales it by (512*512 / (H*W))^2 to keep the payload term's
weight comparable.
"""

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from . import formats
from .discriminator import build_discriminator
from .simulator_layer import DEFAULT_LAMBDA, TanhSimulator
from .unet import GeneratorConfig, build_generator

log = logging.getLogger("stegkit_trainer")

_REFERENCE_PIXELS = 512 * 512


@dataclass
class TrainConfig:
    """Optimizer and loss settings for a training run."""

    learning_rate: float = 1e-4
    iterations: int = 2000
    batch_pairs: int = 8
    payload: float = 0.4
    alpha: float = 1.0
    beta: float = 1e-7
    scale_beta: bool = True
    lam: float = DEFAULT_LAMBDA
    sca: bool = True
    seed: int = 0
    checkpoint_every: int = 500

    def __post_init__(self):
        for name in ("learning_rate", "iterations", "batch_pairs", "payload",
                     "alpha", "lam"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    def effective_beta(self, height, width):
        if not self.scale_beta:
            return self.beta
        return self.beta * (_REFERENCE_PIXELS / (height * width)) ** 2


def ternary_capacity(pmap: torch.Tensor) -> torch.Tensor:
    """Differentiable per-image capacity sum(H3(p)) in bits, shape (N,)."""
    p = pmap.clamp(1e-12, 0.5)
    ent = -p * torch.log2(p / 2.0) - (1.0 - p) * torch.log2(1.0 - p)
    ent = torch.where(pmap > 0, ent, torch.zeros_like(ent))
    return ent.sum(dim=(1, 2, 3))


def discriminator_loss(scores: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Cross-entropy of softmax scores against 0 (cover) / 1 (stego) labels."""
    picked = scores.gather(1, labels[:, None]).clamp_min(1e-12)
    return -torch.log(picked).mean()


def save_checkpoint(path, generator, discriminator, iteration):
    """Write-then-rename so a crash never leaves a torn checkpoint."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(
        {
            "iteration": iteration,
            "generator_config": generator.cfg,
            "generator": generator.state_dict(),
            "discriminator": discriminator.state_dict(),
        },
        tmp,
    )
    os.replace(tmp, path)


def train(covers, cfg: TrainConfig, kernel_table: str, out_dir,
          callback=None):
    """Run the alternating loop over a stack of uint8 covers (N, H, W).

    Writes per-checkpoint weights and final probability maps (one PMAP per
    distinct cover) under ``out_dir``; returns the generator and a history
    of (iteration, l_d, l_g, capacity) tuples.
    """
    covers = np.asarray(covers)
    if covers.ndim != 3:
        raise ValueError("covers must be a (N, H, W) stack")
    n_covers, height, width = covers.shape
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(cfg.seed)
    gen_cfg = GeneratorConfig(height, width)
    generator = build_generator(gen_cfg)
    discriminator = build_discriminator(kernel_table, sca=cfg.sca)
    simulator = TanhSimulator(cfg.lam)
    opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.learning_rate)
    opt_d = torch.optim.Adam(
        [p for p in discriminator.parameters() if p.requires_grad],
        lr=cfg.learning_rate,
    )
    beta = cfg.effective_beta(height, width)
    target_bits = cfg.payload * height * width
    rng = np.random.default_rng(cfg.seed)
    noise_gen = torch.Generator().manual_seed(cfg.seed)

    cover_tensor = torch.from_numpy(covers.astype(np.float32))[:, None]
    labels = torch.cat(
        [torch.zeros(cfg.batch_pairs, dtype=torch.long),
         torch.ones(cfg.batch_pairs, dtype=torch.long)]
    )
    history = []
    for it in range(1, cfg.iterations + 1):
        idx = rng.integers(0, n_covers, cfg.batch_pairs)
        batch = cover_tensor[idx]

        # steps 1-3: probability map -> modifications -> stego
        pmap = generator(batch / 255.0)
        mods = simulator(pmap, generator=noise_gen)
        stego = batch + mods

        # step 4/5a: discriminator update on detached stegos
        opt_d.zero_grad()
        scores = discriminator(
            torch.cat([batch, stego.detach()]),
            torch.cat([pmap.detach(), pmap.detach()]) if cfg.sca else None,
        )
        l_d = discriminator_loss(scores, labels)
        l_d.backward()
        opt_d.step()

        # step 5b: generator update through the discriminator
        opt_g.zero_grad()
        scores = discriminator(
            torch.cat([batch, stego]),
            torch.cat([pmap, pmap]) if cfg.sca else None,
        )
        l_d_for_g = discriminator_loss(scores, labels)
        cap = ternary_capacity(pmap)
        l_g = -cfg.alpha * l_d_for_g + beta * ((cap - target_bits) ** 2).mean()
        l_g.backward()
        opt_g.step()

        cap_mean = float(cap.detach().mean())
        l_d_val, l_g_val = float(l_d.detach()), float(l_g.detach())
        if not (math.isfinite(l_d_val) and math.isfinite(l_g_val)):
            raise RuntimeError(
                f"training diverged at iteration {it}: "
                f"l_d={l_d_val}, l_g={l_g_val}, capacity={cap_mean}"
            )
        history.append((it, l_d_val, l_g_val, cap_mean))
        log.info("iter=%d l_d=%.6f l_g=%.6f capacity=%.2f",
                 it, l_d_val, l_g_val, cap_mean)
        if callback is not None and callback(it, l_d_val, l_g_val, cap_mean,
                                             pmap.detach()):
            break
        if it % cfg.checkpoint_every == 0 or it == cfg.iterations:
            save_checkpoint(out_dir / "checkpoint.pt", generator,
                            discriminator, it)

    save_checkpoint(out_dir / "checkpoint.pt", generator, discriminator,
                    history[-1][0] if history else 0)
    generator.eval()
    with torch.no_grad():
        for i in range(n_covers):
            pm = generator(cover_tensor[i : i + 1] / 255.0)[0, 0].numpy()
            (out_dir / f"cover_{i:04d}.pmap").write_bytes(
                formats.write_pmap(pm.astype(np.float64))
            )
    return generator, history


def infer(checkpoint_path, cover: np.ndarray) -> np.ndarray:
    """Probability map for one uint8 cover using saved generator weights."""
    state = torch.load(checkpoint_path, weights_only=False)
    generator = build_generator(state["generator_config"])
    generator.load_state_dict(state["generator"])
    generator.eval()
    x = torch.from_numpy(np.asarray(cover, dtype=np.float32))[None, None] / 255.0
    with torch.no_grad():
        return generator(x)[0, 0].numpy()


def _load_covers(paths):
    return np.stack([formats.read_pgm(Path(p).read_bytes()) for p in paths])


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = argparse.ArgumentParser(prog="stegkit-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run the adversarial loop on PGM covers")
    p.add_argument("covers", nargs="+")
    p.add_argument("--kernel-table", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--payload", type=float, default=0.4)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-sca", action="store_true")

    p = sub.add_parser("infer", help="probability map from a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("cover")
    p.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    if args.command == "train":
        cfg = TrainConfig(
            payload=args.payload,
            iterations=args.iterations,
            seed=args.seed,
            sca=not args.no_sca,
        )
        table = Path(args.kernel_table).read_text(encoding="utf-8")
        train(_load_covers(args.covers), cfg, table, args.out_dir)
        return 0
    pmap = infer(args.checkpoint, formats.read_pgm(Path(args.cover).read_bytes()))
    Path(args.out).write_bytes(formats.write_pmap(pmap.astype(np.float64)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
