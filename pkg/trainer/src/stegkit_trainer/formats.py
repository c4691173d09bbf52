"""Exchange-format readers and writers shared with the embedding toolkit.

The trainer talks to the embedding side only through files: P5 PGM covers
in, PMAP probability maps out, plus the plain-text high-pass kernel table
exported by ``stegkit kernels``.  The codecs here are implemented against
the format descriptions, not against the other package, so each side can
evolve independently as long as the bytes keep matching.
"""

import re
import struct

import numpy as np

PMAP_MAGIC = b"PMAP"
_HEADER = struct.Struct("<4sIII")

_PGM_HEADER = re.compile(
    rb"^P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s"
)


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a binary (P5) PGM with maxval 255 into a uint8 raster."""
    match = _PGM_HEADER.match(data)
    if not match:
        raise ValueError("not a binary PGM (P5) stream")
    width, height, maxval = (int(g) for g in match.groups())
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    pixels = data[match.end():]
    if len(pixels) != width * height:
        raise ValueError("pixel payload length does not match header")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


def write_pmap(pmap: np.ndarray) -> bytes:
    """Encode a probability map (values in [0, 0.5]) as a PMAP container."""
    pmap = np.asarray(pmap, dtype=np.float64)
    if pmap.ndim != 2:
        raise ValueError("probability map must be 2-D")
    if pmap.min() < -1e-6 or pmap.max() > 0.5 + 1e-6:
        raise ValueError("probability values must lie in [0, 0.5]")
    height, width = pmap.shape
    body = np.clip(pmap, 0.0, 0.5).astype("<f4").tobytes()
    return _HEADER.pack(PMAP_MAGIC, 1, width, height) + body


def read_pmap(data: bytes) -> np.ndarray:
    """Decode a PMAP container into a float32 map."""
    if len(data) < _HEADER.size:
        raise ValueError("truncated PMAP container")
    magic, version, width, height = _HEADER.unpack_from(data)
    if magic != PMAP_MAGIC:
        raise ValueError("bad PMAP magic")
    if version != 1:
        raise ValueError(f"unsupported PMAP version {version}")
    count = width * height
    if len(data) != _HEADER.size + 4 * count:
        raise ValueError("PMAP payload length does not match header")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size, count=count)
    return values.reshape(height, width)


def parse_kernel_table(text: str):
    """Parse the exported high-pass kernel table.

    The table is a sequence of blocks::

        kernel <index> <name> divisor=<d>
        <5 rows of 5 space-separated integers>

    Returns a list of ``(name, coefficients)`` with coefficients already
    divided by the divisor, as float64 5x5 arrays.
    """
    kernels = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    i = 0
    while i < len(lines):
        head = lines[i].split()
        if len(head) != 4 or head[0] != "kernel" or not head[3].startswith("divisor="):
            raise ValueError(f"malformed kernel header: {lines[i]!r}")
        name = head[2]
        divisor = float(head[3].split("=", 1)[1])
        rows = [[int(v) for v in lines[i + 1 + r].split()] for r in range(5)]
        numerator = np.array(rows, dtype=np.float64)
        if numerator.shape != (5, 5):
            raise ValueError(f"kernel {name} is not 5x5")
        kernels.append((name, numerator / divisor))
        i += 6
    if not kernels:
        raise ValueError("empty kernel table")
    return kernels
