"""DNA sequences to fixed-side grayscale images, and back.

The side is computed once per batch from the longest sequence: the smallest
perfect square not smaller than that length. Pixels fill row-major with one
palette intensity per symbol; the tail beyond the sequence stays black, so
shorter sequences end in a black padding region. Rendering is exactly
invertible while the palette keeps its intensities distinct and nonzero.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dna import Alphabet, DnaSequence, DEFAULT_ALPHABET
from .errors import (
    InvalidLength,
    IoFailure,
    SequenceTooLong,
    UnknownSymbol,
    UnmappableIntensity,
)

PADDING_INTENSITY = 0


@dataclass(frozen=True)
class Palette:
    """Symbol-to-intensity mapping; padding is always intensity 0."""

    intensities: tuple[tuple[str, int], ...]  # (symbol, intensity 1..255)
    padding_intensity: int = PADDING_INTENSITY

    def __post_init__(self):
        values = [v for _, v in self.intensities]
        if any(not (1 <= v <= 255) for v in values):
            raise ValueError("symbol intensities must be in 1..255 (0 is padding)")
        if len(set(values)) != len(values):
            raise ValueError("symbol intensities must be pairwise distinct")
        if self.padding_intensity != PADDING_INTENSITY:
            raise ValueError("padding intensity is fixed at 0")

    @classmethod
    def for_alphabet(cls, alphabet: Alphabet) -> "Palette":
        """Evenly spaced nonzero grays, brightest for the first symbol."""
        k = len(alphabet)
        if k > 128:
            raise ValueError("more symbols than distinguishable gray levels")
        vals = [round(255 * (k - i) / k) for i in range(k)]
        return cls(tuple((sym, v) for (sym, _), v in zip(alphabet.symbols, vals)))

    def as_dict(self) -> dict[str, int]:
        return dict(self.intensities)

    def lookup_table(self) -> np.ndarray:
        """256-entry LUT from symbol ordinal to intensity (0 where unmapped)."""
        lut = np.zeros(256, dtype=np.uint8)
        for sym, val in self.intensities:
            lut[ord(sym)] = val
        return lut


#: Palette for the default A/C/T alphabet: A=255, C=170, T=85.
DEFAULT_PALETTE = Palette.for_alphabet(DEFAULT_ALPHABET)


@dataclass
class DnaImage:
    """side x side grid of 8-bit intensities plus the source length."""

    side: int
    pixels: np.ndarray  # uint8, shape (side, side)
    source_len: int

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.side, self.side):
            raise ValueError(
                f"pixel grid {self.pixels.shape} does not match side {self.side}"
            )
        if not (0 <= self.source_len <= self.side * self.side):
            raise ValueError("source_len outside 0..side^2")


def image_side(n_max: int) -> int:
    """Side of the square image for a batch whose longest sequence is n_max.

    Equal to sqrt(n_max) when n_max is a perfect square, else the root of
    the smallest perfect square strictly greater than n_max. Both cases
    coincide with ceil(sqrt(n_max)).
    """
    if n_max < 1:
        raise InvalidLength(f"maximum sequence length must be >= 1, got {n_max}")
    return math.isqrt(n_max - 1) + 1


def render_sequence(seq: DnaSequence, side: int, palette: Palette = DEFAULT_PALETTE) -> DnaImage:
    """Fill a side x side image row-major with palette intensities.

    Pixels past the sequence end stay at the padding intensity (black).
    """
    n = len(seq)
    if n > side * side:
        raise SequenceTooLong(
            f"sequence '{seq.account_id}' has {n} symbols, image holds {side * side}"
        )
    codes = np.frombuffer(seq.chars.encode("ascii"), dtype=np.uint8)
    known = palette.lookup_table()
    mapped = known[codes]
    missing = (mapped == 0)
    if missing.any():
        pos = int(np.argmax(missing))
        raise UnknownSymbol(
            f"symbol {seq.chars[pos]!r} at position {pos} has no palette entry"
        )
    flat = np.full(side * side, PADDING_INTENSITY, dtype=np.uint8)
    flat[:n] = mapped
    return DnaImage(side=side, pixels=flat.reshape(side, side), source_len=n)


def decode_image(image: DnaImage, palette: Palette = DEFAULT_PALETTE,
                 account_id: str = "", alphabet_id: str = "") -> DnaSequence:
    """Invert a rendered image back to its DNA sequence.

    Reads the first ``source_len`` row-major pixels through the inverted
    palette; distinct nonzero intensities make the inversion exact.
    """
    flat = image.pixels.reshape(-1)[: image.source_len]
    inverse = np.zeros(256, dtype=np.uint16)  # 0 marks unmapped
    for sym, val in palette.intensities:
        inverse[val] = ord(sym)
    decoded = inverse[flat]
    bad = (decoded == 0)
    if bad.any():
        pos = int(np.argmax(bad))
        raise UnmappableIntensity(
            f"pixel {pos} has intensity {int(flat[pos])} outside the palette"
        )
    chars = decoded.astype(np.uint8).tobytes().decode("ascii")
    return DnaSequence(account_id, chars, alphabet_id)


# ---------------------------------------------------------------------------
# File output. PGM (binary P5) is the bit-exact reference format; PNG is a
# minimal 8-bit grayscale writer kept deterministic for reproducible runs.
# ---------------------------------------------------------------------------

def pgm_bytes(image: DnaImage) -> bytes:
    header = f"P5 {image.side} {image.side} 255\n".encode("ascii")
    return header + image.pixels.tobytes()


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(payload, zlib.crc32(tag))
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def png_bytes(image: DnaImage) -> bytes:
    """8-bit grayscale PNG (color type 0, filter 0 rows, fixed zlib level)."""
    side = image.side
    ihdr = struct.pack(">IIBBBBB", side, side, 8, 0, 0, 0, 0)
    raw = b"".join(b"\x00" + row.tobytes() for row in image.pixels)
    idat = zlib.compress(raw, 6)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", idat)
        + _png_chunk(b"IEND", b"")
    )


def write_image(image: DnaImage, destination, fmt: str = "pgm") -> bytes:
    """Write an image file and return the exact bytes written."""
    if fmt == "pgm":
        payload = pgm_bytes(image)
    elif fmt == "png":
        payload = png_bytes(image)
    else:
        raise ValueError(f"unsupported image format '{fmt}'")
    path = Path(destination)
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    return payload


def read_pgm(source) -> np.ndarray:
    """Read a binary P5 PGM written by this module back into a pixel grid."""
    path = Path(source)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    # Header: magic, width, height, maxval as whitespace-separated tokens.
    fields = []
    pos = 0
    while len(fields) < 4 and pos < len(blob):
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    if len(fields) != 4 or fields[0] != b"P5":
        raise IoFailure(path, ValueError("not a binary P5 PGM"))
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise IoFailure(path, ValueError(f"unsupported maxval {maxval}"))
    pos += 1  # single whitespace byte before the raster
    raster = np.frombuffer(blob, dtype=np.uint8, count=width * height, offset=pos)
    return raster.reshape(height, width).copy()


def _unfilter_png_rows(raw: bytes, width: int, height: int) -> np.ndarray:
    """Undo per-row PNG filtering for 8-bit grayscale (1 byte per pixel)."""
    stride = width + 1
    out = np.zeros((height, width), dtype=np.uint8)
    for r in range(height):
        row = bytearray(raw[r * stride + 1 : (r + 1) * stride])
        ftype = raw[r * stride]
        above = out[r - 1] if r > 0 else np.zeros(width, dtype=np.uint8)
        if ftype == 0:
            pass
        elif ftype == 1:  # Sub
            for c in range(1, width):
                row[c] = (row[c] + row[c - 1]) & 0xFF
        elif ftype == 2:  # Up
            for c in range(width):
                row[c] = (row[c] + above[c]) & 0xFF
        elif ftype == 3:  # Average
            for c in range(width):
                left = row[c - 1] if c > 0 else 0
                row[c] = (row[c] + (left + int(above[c])) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            for c in range(width):
                left = row[c - 1] if c > 0 else 0
                up = int(above[c])
                ul = int(above[c - 1]) if c > 0 else 0
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                if pa <= pb and pa <= pc:
                    pred = left
                elif pb <= pc:
                    pred = up
                else:
                    pred = ul
                row[c] = (row[c] + pred) & 0xFF
        else:
            raise ValueError(f"unknown PNG filter type {ftype}")
        out[r] = np.frombuffer(bytes(row), dtype=np.uint8)
    return out


def read_png(source) -> np.ndarray:
    """Read an 8-bit grayscale non-interlaced PNG into a pixel grid."""
    path = Path(source)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    try:
        if blob[:8] != b"\x89PNG\r\n\x1a\n":
            raise ValueError("not a PNG file")
        pos = 8
        width = height = 0
        idat = b""
        while pos + 8 <= len(blob):
            (length,) = struct.unpack_from(">I", blob, pos)
            tag = blob[pos + 4 : pos + 8]
            payload = blob[pos + 8 : pos + 8 + length]
            pos += 12 + length
            if tag == b"IHDR":
                width, height, depth, color, _, _, interlace = struct.unpack(
                    ">IIBBBBB", payload)
                if depth != 8 or color != 0:
                    raise ValueError("only 8-bit grayscale PNGs are supported")
                if interlace != 0:
                    raise ValueError("interlaced PNGs are not supported")
            elif tag == b"IDAT":
                idat += payload
            elif tag == b"IEND":
                break
        raw = zlib.decompress(idat)
        if len(raw) != (width + 1) * height:
            raise ValueError("PNG raster size mismatch")
        return _unfilter_png_rows(raw, width, height)
    except (ValueError, zlib.error) as exc:
        raise IoFailure(path, exc) from exc


def read_image(source, fmt: str = "") -> np.ndarray:
    """Read a PGM or PNG pixel grid; format inferred from the suffix."""
    path = Path(source)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "pgm":
        return read_pgm(path)
    if fmt == "png":
        return read_png(path)
    raise ValueError(f"unsupported image format '{fmt}'")
