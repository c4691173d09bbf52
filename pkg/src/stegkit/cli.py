"""Command-line surface: simulate, calibrate, embed, extract, analyze, kernels.

Every command that writes an output also writes ``<output>.manifest``, a
flat UTF-8 key=value file recording the command, inputs, seed and
parameters; re-running with the same manifest values reproduces outputs
byte-for-byte.  Exit codes: 0 success, 1 I/O or format error,
2 infeasible/validation error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, cost, rate_loss, simulator, srm, stc
from .errors import FormatError, InfeasibleError
from . import io as kio


def write_manifest(path, entries):
    lines = [f"{k}={v}" for k, v in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path):
    entries = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        entries[key] = value
    return entries


def _base_manifest(command, args_dict):
    entries = {"command": command, "version": __version__}
    entries.update(args_dict)
    return entries


def _load_message(path):
    """Message bits from a raw .bits file or a PGM thresholded at 128."""
    data = Path(path).read_bytes()
    if data.startswith(b"P5"):
        img = kio.read_pgm(data)
        return (img >= 128).astype(np.uint8).ravel(), img.shape
    return kio.read_bits(data), None


def cmd_simulate(args):
    cover = kio.read_pgm(Path(args.cover).read_bytes())
    pmap = kio.read_pmap(Path(args.pmap).read_bytes()).astype(np.float64)
    noise = simulator.random_field(cover.shape, args.seed)
    mods = simulator.simulate_map(pmap, noise, args.mode, args.lam)
    if args.mode == "tanh":
        stego = simulator.apply_modification(
            cover, np.rint(mods).astype(np.int8)
        )
    else:
        stego = simulator.apply_modification(cover, mods)
    Path(args.out).write_bytes(kio.write_pgm(stego))
    if args.modmap:
        Path(args.modmap).write_bytes(kio.write_mmap(mods))
    cap = rate_loss.capacity(pmap)
    write_manifest(
        str(args.out) + ".manifest",
        _base_manifest(
            "simulate",
            {
                "cover": args.cover,
                "pmap": args.pmap,
                "out": args.out,
                "seed": args.seed,
                "mode": args.mode,
                "lambda": args.lam,
                "capacity_bits": repr(cap.total_bits),
                "payload_bpp": repr(cap.total_bits / cover.size),
            },
        ),
    )
    return 0


def cmd_calibrate(args):
    costs = kio.read_cmap(Path(args.costs).read_bytes()).astype(np.float64)
    cfg = rate_loss.EmbeddingConfig(costs.shape[0], costs.shape[1], args.payload)
    pmap = cost.calibrate_payload(costs, cfg)
    Path(args.out).write_bytes(kio.write_pmap(pmap))
    write_manifest(
        str(args.out) + ".manifest",
        _base_manifest(
            "calibrate",
            {"costs": args.costs, "out": args.out, "payload_bpp": args.payload},
        ),
    )
    return 0


def cmd_embed(args):
    cover = kio.read_pgm(Path(args.cover).read_bytes())
    pmap = kio.read_pmap(Path(args.pmap).read_bytes()).astype(np.float64)
    message, msg_shape = _load_message(args.message)
    if args.payload is not None:
        want = int(round(args.payload * cover.size))
        if want != message.size:
            raise InfeasibleError(
                f"--payload {args.payload} implies {want} bits, message has {message.size}"
            )
    stego = stc.embed_image(
        cover, pmap, message, h=args.height, seed=args.seed, order=args.order
    )
    Path(args.out).write_bytes(kio.write_pgm(stego))
    entries = {
        "cover": args.cover,
        "pmap": args.pmap,
        "message": args.message,
        "out": args.out,
        "seed": args.seed,
        "order": args.order,
        "constraint_height": args.height,
        "message_length": message.size,
    }
    if msg_shape is not None:
        entries["message_height"], entries["message_width"] = msg_shape
    write_manifest(str(args.out) + ".manifest", _base_manifest("embed", entries))
    return 0


def cmd_extract(args):
    stego = kio.read_pgm(Path(args.stego).read_bytes())
    manifest = read_manifest(args.manifest)
    message = stc.extract_image(
        stego,
        int(manifest["message_length"]),
        h=int(manifest["constraint_height"]),
        seed=int(manifest["seed"]),
        order=manifest["order"],
    )
    out = Path(args.out)
    if "message_height" in manifest and out.suffix == ".pgm":
        shape = (int(manifest["message_height"]), int(manifest["message_width"]))
        out.write_bytes(kio.write_pgm((message.reshape(shape) * 255).astype(np.uint8)))
    else:
        out.write_bytes(kio.write_bits(message))
    return 0


def cmd_analyze(args):
    data = Path(args.input).read_bytes()
    report = {}
    if data.startswith(b"P5"):
        img = kio.read_pgm(data)
        stack = srm.residuals(img)
        report["type"] = "image"
        report["width"], report["height"] = img.shape[1], img.shape[0]
        for kernel, plane in zip(srm.filter_bank(), stack):
            report[f"residual_energy.{kernel.name}"] = repr(float(np.mean(plane**2)))
    elif data.startswith(kio.PMAP_MAGIC):
        pmap = kio.read_pmap(data).astype(np.float64)
        cap = rate_loss.capacity(pmap)
        costs = cost.prob_to_cost(pmap)
        dry = costs[~cost.is_wet(costs)]
        report["type"] = "pmap"
        report["width"], report["height"] = pmap.shape[1], pmap.shape[0]
        report["capacity_bits"] = repr(cap.total_bits)
        report["payload_bpp"] = repr(cap.total_bits / pmap.size)
        report["cost_min"] = repr(float(dry.min())) if dry.size else "nan"
        report["cost_max"] = repr(float(dry.max())) if dry.size else "nan"
        report["cost_mean"] = repr(float(dry.mean())) if dry.size else "nan"
        report["wet_count"] = int(cost.is_wet(costs).sum())
        hist, edges = np.histogram(pmap, bins=10, range=(0.0, 0.5))
        for count, lo, hi in zip(hist, edges[:-1], edges[1:]):
            report[f"change_rate_hist.{lo:.2f}-{hi:.2f}"] = int(count)
    elif data.startswith(kio.CMAP_MAGIC):
        costs = kio.read_cmap(data).astype(np.float64)
        dry = costs[~cost.is_wet(costs)]
        report["type"] = "cmap"
        report["width"], report["height"] = costs.shape[1], costs.shape[0]
        report["cost_min"] = repr(float(dry.min())) if dry.size else "nan"
        report["cost_max"] = repr(float(dry.max())) if dry.size else "nan"
        report["cost_mean"] = repr(float(dry.mean())) if dry.size else "nan"
        report["wet_count"] = int(cost.is_wet(costs).sum())
    else:
        raise FormatError("input is neither P5 PGM, PMAP, nor CMAP")
    text = "\n".join(f"{k}={v}" for k, v in report.items())
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_kernels(args):
    table = srm.export_kernel_table()
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    else:
        print(table, end="")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="stegkit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a stego image from a probability map")
    p.add_argument("cover")
    p.add_argument("pmap")
    p.add_argument("--out", required=True)
    p.add_argument("--modmap", help="also write the modification map (MMAP)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("staircase", "tanh"), default="staircase")
    p.add_argument("--lambda", dest="lam", type=float, default=simulator.DEFAULT_LAMBDA)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="cost map -> probability map at a payload")
    p.add_argument("costs")
    p.add_argument("--payload", type=float, required=True, help="bits per pixel")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("embed", help="STC-embed a message into a cover")
    p.add_argument("cover")
    p.add_argument("pmap")
    p.add_argument("message", help=".bits file or binary PGM (threshold 128)")
    p.add_argument("--out", required=True)
    p.add_argument("--payload", type=float, help="expected bpp, cross-checked")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", choices=("row_major", "interleaved"), default="interleaved")
    p.add_argument("--height", type=int, default=stc.DEFAULT_CONSTRAINT_HEIGHT)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover a message from a stego image")
    p.add_argument("stego")
    p.add_argument("manifest", help="manifest written by the embed command")
    p.add_argument("--out", required=True, help=".bits output, or .pgm if embedded from one")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="report capacity/cost/residual statistics")
    p.add_argument("input", help="PGM image, PMAP, or CMAP file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("kernels", help="export the SRM kernel table as text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernels)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InfeasibleError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
