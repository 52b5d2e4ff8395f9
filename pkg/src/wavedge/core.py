"""Numeric containers, raster I/O and cross-section extraction.

Signals and images are plain float64 numpy arrays. ``as_signal`` and
``as_image`` validate and return read-only copies so results can be shared
between threads without defensive copying.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "as_signal",
    "as_image",
    "ScaleSchedule",
    "load_raster",
    "write_raster",
    "extract_row",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def as_signal(samples) -> np.ndarray:
    """Validate a 1-D signal (length >= 4, finite) and return a read-only copy."""
    a = np.asarray(samples, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {a.shape}")
    if a.size < 4:
        raise ValueError(f"signal needs at least 4 samples, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ValueError("signal contains non-finite values")
    return _frozen(a)


def as_image(pixels) -> np.ndarray:
    """Validate a 2-D image (at least 4x4, finite) and return a read-only copy."""
    a = np.asarray(pixels, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {a.shape}")
    if a.shape[0] < 4 or a.shape[1] < 4:
        raise ValueError(f"image must be at least 4x4, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("image contains non-finite values")
    return _frozen(a)


@dataclass(frozen=True)
class ScaleSchedule:
    """Strictly decreasing list of analysis scales, coarse first.

    ``kind`` is ``"dyadic"`` (each scale twice the next) or
    ``"sigma-adjusted"``, where the effective scales sqrt(s**2 + sigma**2)
    are dyadic instead. Arbitrary decreasing lists use ``kind="custom"``.
    """

    scales: tuple[float, ...]
    kind: str = "custom"
    sigma: float = 0.0

    def __post_init__(self):
        s = tuple(float(v) for v in self.scales)
        object.__setattr__(self, "scales", s)
        if len(s) == 0:
            raise ValueError("schedule needs at least one scale")
        if any(v <= 0 or not math.isfinite(v) for v in s):
            raise ValueError("scales must be positive and finite")
        if any(a <= b for a, b in zip(s, s[1:])):
            raise ValueError("scales must be strictly decreasing")
        if self.kind == "dyadic":
            for a, b in zip(s, s[1:]):
                if not math.isclose(a, 2 * b, rel_tol=1e-9):
                    raise ValueError("dyadic schedule requires s[j] = 2 s[j+1]")
        elif self.kind == "sigma-adjusted":
            if self.sigma < 0:
                raise ValueError("sigma must be non-negative")
            for a, b in zip(s, s[1:]):
                ea = math.hypot(a, self.sigma)
                eb = math.hypot(b, self.sigma)
                if not math.isclose(ea, 2 * eb, rel_tol=1e-9):
                    raise ValueError("sigma-adjusted schedule requires dyadic effective scales")
        elif self.kind != "custom":
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    @classmethod
    def dyadic(cls, finest: float, count: int) -> "ScaleSchedule":
        """``count`` dyadic scales with the given finest scale, e.g. (4, 4) -> 32,16,8,4."""
        return cls(tuple(finest * 2.0 ** j for j in reversed(range(count))), kind="dyadic")

    @classmethod
    def sigma_adjusted(cls, finest: float, count: int, sigma: float) -> "ScaleSchedule":
        """Scales whose Gaussian-smoothed effective widths are dyadic."""
        eff0 = math.hypot(finest, sigma)
        scales = []
        for j in reversed(range(count)):
            eff = eff0 * 2.0 ** j
            scales.append(math.sqrt(eff * eff - sigma * sigma))
        return cls(tuple(scales), kind="sigma-adjusted", sigma=sigma)

    @classmethod
    def parse(cls, text: str | Sequence[float]) -> "ScaleSchedule":
        """Build from ``"32,16,8,4"`` or a sequence; detects dyadic spacing."""
        if isinstance(text, str):
            values = [float(t) for t in text.replace(" ", "").split(",") if t]
        else:
            values = [float(t) for t in text]
        values = sorted(values, reverse=True)
        dyadic = len(values) > 1 and all(
            math.isclose(a, 2 * b, rel_tol=1e-9) for a, b in zip(values, values[1:])
        )
        return cls(tuple(values), kind="dyadic" if dyadic else "custom")

    @property
    def finest(self) -> float:
        return self.scales[-1]

    @property
    def coarsest(self) -> float:
        return self.scales[0]

    def pairs(self):
        """Consecutive (coarse, fine) scale pairs."""
        return list(zip(self.scales, self.scales[1:]))

    def __iter__(self):
        return iter(self.scales)

    def __len__(self):
        return len(self.scales)


# ---------------------------------------------------------------------------
# Raster I/O


def _read_pnm_tokens(data: bytes, count: int, start: int = 2):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise ValueError("truncated PGM header")
        if data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    # exactly one whitespace byte separates the header from the raster
    return tokens, i + 1


def _load_pgm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise ValueError(f"unsupported PNM variant {magic!r}; expected grayscale P5/P2")
    tokens, offset = _read_pnm_tokens(data, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ValueError("malformed PGM header") from exc
    if width <= 0 or height <= 0:
        raise ValueError("zero-sized image")
    if not 0 < maxval < 65536:
        raise ValueError(f"invalid maxval {maxval}")
    count = width * height
    if magic == b"P2":
        values = np.array(data[offset - 1 :].split(), dtype=np.int64)
        if values.size < count:
            raise ValueError("truncated PGM raster")
        raw = values[:count]
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        nbytes = count * dtype.itemsize
        if len(data) - offset < nbytes:
            raise ValueError("truncated PGM raster")
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    pixels = raw.reshape(height, width).astype(np.float64) / maxval
    return np.clip(pixels, 0.0, 1.0)


def _load_png(path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise ValueError("PNG input requires Pillow (pip install wavedge[png])") from exc
    with Image.open(path) as im:
        if im.mode in ("L", "P"):
            a = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
        elif im.mode in ("I;16", "I;16B", "I;16L", "I"):
            a = np.asarray(im, dtype=np.float64) / 65535.0
        else:
            raise ValueError(f"unsupported PNG mode {im.mode!r}; grayscale only")
    if a.size == 0:
        raise ValueError("zero-sized image")
    return np.clip(a, 0.0, 1.0)


def load_raster(path) -> np.ndarray:
    """Load an 8/16-bit grayscale PGM (or PNG) as a read-only image in [0, 1]."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(b"\x89PNG"):
        pixels = _load_png(path)
    elif head[:1] == b"P":
        with open(path, "rb") as fh:
            pixels = _load_pgm(fh.read())
    else:
        raise ValueError(f"{path}: not a PGM or PNG file")
    a = np.array(pixels, dtype=np.float64)
    a.setflags(write=False)
    return a


def quantize(img) -> np.ndarray:
    """Clamp to [0, 1] and quantize to bytes with round-half-up."""
    a = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(a * 255.0 + 0.5).astype(np.uint8)


def write_raster(img, path) -> None:
    """Write an image as 8-bit binary PGM (P5)."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("write_raster expects a non-empty 2-D image")
    if not np.all(np.isfinite(a)):
        raise ValueError("image contains non-finite values")
    rows, cols = a.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    with open(os.fspath(path), "wb") as fh:
        fh.write(header)
        fh.write(quantize(a).tobytes())


def extract_row(img, r: int) -> np.ndarray:
    """Row ``r`` of an image as a 1-D signal."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("extract_row expects a 2-D image")
    if not 0 <= r < a.shape[0]:
        raise IndexError(f"row {r} out of range for image with {a.shape[0]} rows")
    return as_signal(a[r])
