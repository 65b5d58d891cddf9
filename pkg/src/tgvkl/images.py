"""Grayscale image container and file I/O (PGM, grayscale PNG, raw CSV).

Convention used throughout the package: pixel grids are stored as 2-D
float64 arrays of shape (n1, n2) and vectorized row-major, i.e. pixel
(i, j) maps to flat index i * n2 + j.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ImageIOError(Exception):
    """Base class for image file failures."""


class MalformedHeaderError(ImageIOError):
    pass


class UnsupportedBitDepthError(ImageIOError):
    pass


class TruncatedPayloadError(ImageIOError):
    pass


def pixel_index(i: int, j: int, n2: int) -> int:
    """Flat row-major index of pixel (i, j) on a grid with n2 columns."""
    return i * n2 + j


@dataclass(frozen=True)
class Image:
    """2-D non-negative real pixel grid, immutable after construction."""

    n1: int
    n2: int
    pixels: np.ndarray  # flat, length n1 * n2, row-major

    def __post_init__(self):
        if self.n1 <= 0 or self.n2 <= 0:
            raise ValueError("image dimensions must be positive")
        if self.pixels.shape != (self.n1 * self.n2,):
            raise ValueError(
                f"expected {self.n1 * self.n2} pixels, got {self.pixels.shape}"
            )
        self.pixels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    def as_array(self) -> np.ndarray:
        """Read-only 2-D view of shape (n1, n2)."""
        return self.pixels.reshape(self.n1, self.n2)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Image":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(arr.shape[0], arr.shape[1], arr.reshape(-1).copy())


_PGM_TOKEN = re.compile(rb"^\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read whitespace/comment separated header tokens, return tokens + offset."""
    tokens = []
    pos = 0
    for _ in range(count):
        m = _PGM_TOKEN.match(data[pos:])
        if m is None:
            raise MalformedHeaderError("incomplete PGM header")
        tokens.append(m.group(1))
        pos += m.end()
    return tokens, pos


def read_image(path) -> Image:
    """Read an 8- or 16-bit grayscale image (PGM P2/P5 or PNG).

    Pixel values are returned as floats in [0, maxval]; no rescaling is done.
    """
    path = Path(path)
    if not path.exists():
        raise ImageIOError(f"no such file: {path}")
    data = path.read_bytes()
    if data[:2] in (b"P2", b"P5"):
        return _read_pgm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    raise MalformedHeaderError(f"unrecognized image format in {path}")


def _read_pgm(data: bytes) -> Image:
    tokens, pos = _read_pgm_tokens(data, 4)
    magic = tokens[0]
    try:
        n2, n1, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise MalformedHeaderError(f"non-numeric PGM header field: {exc}") from exc
    if n1 <= 0 or n2 <= 0:
        raise MalformedHeaderError("non-positive PGM dimensions")
    if not 0 < maxval <= 65535:
        raise UnsupportedBitDepthError(f"unsupported PGM maxval {maxval}")
    n = n1 * n2
    if magic == b"P2":
        values = data[pos:].split()
        if len(values) < n:
            raise TruncatedPayloadError(
                f"expected {n} ASCII samples, found {len(values)}"
            )
        try:
            pixels = np.array([int(v) for v in values[:n]], dtype=np.float64)
        except ValueError as exc:
            raise TruncatedPayloadError(f"non-numeric PGM sample: {exc}") from exc
    else:
        # single whitespace byte separates header and binary payload
        payload = data[pos + 1:]
        width = 2 if maxval > 255 else 1
        if len(payload) < n * width:
            raise TruncatedPayloadError(
                f"expected {n * width} payload bytes, found {len(payload)}"
            )
        dtype = ">u2" if width == 2 else "u1"
        pixels = np.frombuffer(payload[: n * width], dtype=dtype).astype(np.float64)
    if pixels.min() < 0 or pixels.max() > maxval:
        raise MalformedHeaderError("PGM sample out of [0, maxval] range")
    return Image(n1, n2, pixels)


def _read_png(path: Path) -> Image:
    from PIL import Image as PILImage

    with PILImage.open(path) as img:
        if img.mode not in ("L", "I;16", "I"):
            raise UnsupportedBitDepthError(f"unsupported PNG mode {img.mode}")
        arr = np.asarray(img, dtype=np.float64)
    return Image.from_array(arr)


def write_image(img: Image, path, fmt: str = "pgm-binary", maxval: int = 255,
                sidecar: bool = False) -> None:
    """Write an image, affinely mapping its values onto [0, maxval].

    The mapping is v -> round((v - lo) / (hi - lo) * maxval) with lo/hi the
    image extrema (identity on a constant image). With ``sidecar=True`` the
    (lo, hi, maxval) triple is written next to the file so the mapping can
    be undone; use CSV output for loss-free round trips.
    """
    path = Path(path)
    arr = img.as_array()
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot write non-finite pixel values")
    lo, hi = float(arr.min()), float(arr.max())
    if hi > lo:
        quantized = np.rint((arr - lo) / (hi - lo) * maxval)
    else:
        quantized = np.clip(np.rint(arr), 0, maxval)
        lo, hi = 0.0, float(maxval)
    quantized = quantized.astype(np.uint16 if maxval > 255 else np.uint8)
    try:
        if fmt == "pgm-ascii":
            lines = [f"P2\n{img.n2} {img.n1}\n{maxval}\n"]
            lines += [" ".join(str(v) for v in row) + "\n" for row in quantized]
            path.write_text("".join(lines))
        elif fmt == "pgm-binary":
            header = f"P5\n{img.n2} {img.n1}\n{maxval}\n".encode()
            payload = quantized.astype(">u2" if maxval > 255 else "u1").tobytes()
            path.write_bytes(header + payload)
        elif fmt == "png":
            from PIL import Image as PILImage

            if maxval > 255:
                PILImage.fromarray(quantized.astype(np.uint16), mode="I;16").save(path)
            else:
                PILImage.fromarray(quantized.astype(np.uint8), mode="L").save(path)
        else:
            raise ValueError(f"unknown format {fmt!r}")
        if sidecar:
            Path(str(path) + ".map").write_text(f"lo={lo!r} hi={hi!r} maxval={maxval}\n")
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def write_csv(img: Image, path) -> None:
    """Write raw real pixel values, one CSV line per image row, LF line ends."""
    arr = img.as_array()
    try:
        with open(path, "w", newline="\n") as fh:
            for row in arr:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> Image:
    """Read an image written by :func:`write_csv`."""
    try:
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rows.append([float(v) for v in line.split(",")])
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ImageIOError(f"bad CSV value in {path}: {exc}") from exc
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ImageIOError(f"ragged or empty CSV in {path}")
    return Image.from_array(np.array(rows, dtype=np.float64))
