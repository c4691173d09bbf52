"""Readers and writers for the on-disk exchange formats.

Formats:
  * binary P5 PGM with maxval 255 (cover/stego images, binary messages)
  * PMAP container: ``b"PMAP"``, version u32=1, width u32, height u32,
    then width*height little-endian binary32 values, row-major.  No
    padding, no checksum.  CMAP uses the same layout with magic
    ``b"CMAP"`` and nonnegative values (wet sentinel 1e13); MMAP holds
    modification maps with values in [-1, 1].
  * raw bit files: u64 LE bit count, then the bits packed MSB-first.
"""

import re
import struct

import numpy as np

from .errors import FormatError

WET_COST = 1.0e13
# float32 storage wobbles the sentinel; anything this large reads back as wet
_WET_READ_THRESHOLD = 1.0e12

PMAP_MAGIC = b"PMAP"
CMAP_MAGIC = b"CMAP"
MMAP_MAGIC = b"MMAP"

_HEADER = struct.Struct("<4sIII")


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a binary P5 PGM with maxval 255 into a uint8 (H, W) array."""
    if not data.startswith(b"P5"):
        raise FormatError("not a binary P5 PGM")
    # header: magic, width, height, maxval; '#' comments allowed between tokens
    pos = 2
    fields = []
    while len(fields) < 3:
        m = re.compile(rb"(?:\s+|#[^\n]*\n)*(\d+)").match(data, pos)
        if m is None:
            raise FormatError("malformed PGM header")
        fields.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, only 255 accepted")
    if width < 1 or height < 1:
        raise FormatError("PGM dimensions must be positive")
    if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n":
        raise FormatError("missing whitespace after PGM maxval")
    pos += 1
    raster = data[pos:]
    if len(raster) != width * height:
        raise FormatError(
            f"PGM payload has {len(raster)} bytes, expected {width * height}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def write_pgm(img) -> bytes:
    """Encode a uint8 (H, W) array as canonical binary P5, maxval 255."""
    from .validation import check_image

    img = check_image(img)
    height, width = img.shape
    return b"P5\n%d %d\n255\n" % (width, height) + img.tobytes()


def _read_container(data: bytes, magic: bytes):
    if len(data) < _HEADER.size:
        raise FormatError("container shorter than header")
    got_magic, version, width, height = _HEADER.unpack_from(data)
    if got_magic != magic:
        raise FormatError(f"bad magic {got_magic!r}, expected {magic!r}")
    if version != 1:
        raise FormatError(f"unsupported container version {version}")
    if width < 1 or height < 1:
        raise FormatError("container dimensions must be positive")
    count = width * height
    if count > (1 << 32):
        raise FormatError("container dimensions overflow")
    expected = _HEADER.size + 4 * count
    if len(data) != expected:
        raise FormatError(f"container has {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size, count=count)
    return values.reshape(height, width).copy()


def _write_container(values, magic: bytes) -> bytes:
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 2:
        raise ValueError("raster must be 2-D")
    height, width = values.shape
    return _HEADER.pack(magic, 1, width, height) + values.tobytes()


def read_pmap(data: bytes) -> np.ndarray:
    """Decode a PMAP container; values validated against [0, 0.5] (tol 1e-6)."""
    values = _read_container(data, PMAP_MAGIC)
    if values.min() < -1e-6 or values.max() > 0.5 + 1e-6:
        raise FormatError("probability map value outside [0, 0.5]")
    np.clip(values, 0.0, 0.5, out=values)
    return values


def write_pmap(pmap) -> bytes:
    pmap = np.asarray(pmap, dtype=np.float64)
    if pmap.min() < -1e-6 or pmap.max() > 0.5 + 1e-6:
        raise FormatError("probability map value outside [0, 0.5]")
    return _write_container(np.clip(pmap, 0.0, 0.5), PMAP_MAGIC)


def read_cmap(data: bytes) -> np.ndarray:
    """Decode a CMAP container of nonnegative costs; wet values normalized to 1e13."""
    values = _read_container(data, CMAP_MAGIC)
    if values.min() < -1e-6:
        raise FormatError("cost map contains negative values")
    np.clip(values, 0.0, None, out=values)
    values[values >= _WET_READ_THRESHOLD] = WET_COST
    return values


def write_cmap(costs) -> bytes:
    costs = np.asarray(costs, dtype=np.float64)
    if costs.min() < -1e-6:
        raise FormatError("cost map contains negative values")
    costs = np.clip(costs, 0.0, None)
    costs = np.where(costs >= _WET_READ_THRESHOLD, WET_COST, costs)
    return _write_container(costs, CMAP_MAGIC)


def read_mmap(data: bytes) -> np.ndarray:
    """Decode an MMAP container (modification map, values in [-1, 1])."""
    values = _read_container(data, MMAP_MAGIC)
    if values.min() < -1.0 - 1e-6 or values.max() > 1.0 + 1e-6:
        raise FormatError("modification map value outside [-1, 1]")
    return values


def write_mmap(mods) -> bytes:
    mods = np.asarray(mods, dtype=np.float64)
    if mods.min() < -1.0 - 1e-6 or mods.max() > 1.0 + 1e-6:
        raise FormatError("modification map value outside [-1, 1]")
    return _write_container(mods, MMAP_MAGIC)


def read_bits(data: bytes) -> np.ndarray:
    """Decode a raw bit file: u64 LE length prefix, MSB-first packed bits."""
    if len(data) < 8:
        raise FormatError("bit file shorter than length prefix")
    (nbits,) = struct.unpack_from("<Q", data)
    nbytes = (nbits + 7) // 8
    if len(data) != 8 + nbytes:
        raise FormatError(f"bit file has {len(data) - 8} payload bytes, expected {nbytes}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8, offset=8))
    if bits[nbits:].any():
        raise FormatError("nonzero padding bits after declared length")
    return bits[:nbits]


def write_bits(bits) -> bytes:
    from .validation import check_bits

    bits = check_bits(bits)
    return struct.pack("<Q", bits.size) + np.packbits(bits).tobytes()
