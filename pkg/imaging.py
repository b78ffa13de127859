# -*- coding: utf-8 -*-
"""
Imaging
=======

Grayscale rasters for the VPR pipelines:

- GrayImage: immutable luminance raster, values in [0, 1]
- Resolution: square target size; CANONICAL_LADDER holds 16x16 .. 1024x1024
- load_image / save_image: PNG and JPEG through OpenCV
- resize: area averaging when shrinking, bilinear when enlarging
- synth_image: deterministic test patterns
"""
import os
from dataclasses import dataclass

import cv2
import numpy as np

from bench_config import BenchConfig
from vpr_errors import ConfigError, ImageFormatError, ImageIoError

# Rec.601 luma weights, applied to channel values normalized to [0, 1]
LUMA_R = 0.299
LUMA_G = 0.587
LUMA_B = 0.114


@dataclass(frozen=True, eq=False)
class GrayImage:
    """
    Owned luminance raster.

    pixels is a read-only (height, width) float64 array, row-major, every
    value in [0, 1].
    """
    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ImageFormatError(f"expected a non-empty 2-D raster, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ImageFormatError("pixel values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ImageFormatError(f"pixel values must lie in [0, 1], got [{arr.min()}, {arr.max()}]")
        arr.setflags(write=False)
        object.__setattr__(self, 'pixels', arr)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def mean(self) -> float:
        return float(self.pixels.mean())

    def as_uint8(self) -> np.ndarray:
        """8-bit intensities (0..255), as used by the segment test and entropy stage."""
        return np.rint(self.pixels * 255.0).astype(np.uint8)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height}, mean={self.mean():.3f})"


@dataclass(frozen=True, order=True)
class Resolution:
    """Square target resolution, side x side pixels."""
    side: int

    def __post_init__(self):
        if int(self.side) != self.side or self.side < 1:
            raise ConfigError(f"resolution side must be a positive integer, got {self.side!r}")

    @property
    def label(self) -> str:
        return f"{self.side}x{self.side}"

    @classmethod
    def parse(cls, text: str) -> 'Resolution':
        """Accepts '64' or '64x64'."""
        text = str(text).strip().lower()
        parts = text.split('x')
        try:
            if len(parts) == 1:
                return cls(int(parts[0]))
            if len(parts) == 2 and parts[0] == parts[1]:
                return cls(int(parts[0]))
        except ValueError:
            pass
        raise ConfigError(f"invalid resolution {text!r} (expected <side> or <side>x<side>)")


CANONICAL_LADDER = tuple(Resolution(side) for side in BenchConfig.CANONICAL_SIDES)


def parse_resolutions(text: str) -> list:
    """Comma separated list of resolutions, e.g. '16,32,64' or '64x64,128x128'."""
    items = [item for item in str(text).split(',') if item.strip()]
    if not items:
        raise ConfigError("empty resolution list")
    return [Resolution.parse(item) for item in items]


# ==================== File I/O ====================

def load_image(path: str) -> GrayImage:
    """
    Load a PNG or JPEG file as a luminance image.

    Color inputs are converted with Y = 0.299 R + 0.587 G + 0.114 B on channel
    values normalized to [0, 1]; alpha is ignored.
    """
    if not os.path.isfile(path) or not os.access(path, os.R_OK):
        raise ImageIoError(f"cannot read image file: {path}")
    try:
        data = np.fromfile(path, dtype=np.uint8)
    except OSError as e:
        raise ImageIoError(f"cannot read image file {path}: {e}") from e
    if data.size == 0:
        raise ImageFormatError(f"empty image file: {path}")

    try:
        raw = cv2.imdecode(data, cv2.IMREAD_UNCHANGED)
    except cv2.error as e:
        raise ImageFormatError(f"cannot decode {path}: {e}") from e
    if raw is None:
        raise ImageFormatError(f"cannot decode {path}")

    return GrayImage(_to_luminance(raw))


def _to_luminance(raw: np.ndarray) -> np.ndarray:
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        scale = 1.0
    values = raw.astype(np.float64) / scale

    if values.ndim == 2:
        gray = values
    elif values.shape[2] in (1, 2):  # gray, gray + alpha
        gray = values[:, :, 0]
    else:
        # OpenCV channel order is B, G, R (, A)
        gray = LUMA_R * values[:, :, 2] + LUMA_G * values[:, :, 1] + LUMA_B * values[:, :, 0]
    return np.clip(gray, 0.0, 1.0)


def save_image(image: GrayImage, path: str):
    """Write an 8-bit image; the format follows the file extension (PNG by default)."""
    ext = os.path.splitext(path)[1].lower() or '.png'
    if ext not in ('.png', '.jpg', '.jpeg'):
        raise ConfigError(f"unsupported image extension: {ext}")
    ok, buf = cv2.imencode(ext, image.as_uint8())
    if not ok:
        raise ImageFormatError(f"cannot encode image as {ext}")
    try:
        with open(path, 'wb') as f:
            f.write(buf.tobytes())
    except OSError as e:
        raise ImageIoError(f"cannot write {path}: {e}") from e


# ==================== Resizing ====================

def _interpolation(n_in: int, n_out: int) -> int:
    return cv2.INTER_AREA if n_out < n_in else cv2.INTER_LINEAR


def resize_array(pixels: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resample a (h, w) array to (height, width); see resize()."""
    h, w = pixels.shape
    if (h, w) == (height, width):
        return pixels

    # resample the offset from one reference pixel so constants come back exactly
    base = pixels.flat[0]
    out = np.ascontiguousarray(pixels - base, dtype=np.float64)
    if _interpolation(w, width) == _interpolation(h, height):
        out = cv2.resize(out, (width, height), interpolation=_interpolation(w, width))
    else:
        # one axis shrinks, the other grows
        if w != width:
            out = cv2.resize(out, (width, h), interpolation=_interpolation(w, width))
        if h != height:
            out = cv2.resize(out, (width, height), interpolation=_interpolation(h, height))
    return np.clip(out.reshape(height, width) + base, 0.0, 1.0)


def resize(image: GrayImage, target: Resolution) -> GrayImage:
    """
    Resize to target.side x target.side; aspect ratio is not preserved.

    Each axis is resampled on its own: area averaging when it shrinks,
    bilinear interpolation when it grows. An image already at the target size
    is returned unchanged, so resizing twice to the same target is a no-op.
    """
    if image.width == target.side and image.height == target.side:
        return image
    return GrayImage(resize_array(image.pixels, target.side, target.side))


# ==================== Synthetic images ====================

SYNTH_KINDS = ('constant', 'vertical-edge', 'checkerboard', 'seeded-noise', 'scene')


def synth_image(kind: str, side: int, seed: int = 0) -> GrayImage:
    """
    Deterministic test pattern for fixed (kind, side, seed).

    constant       all pixels 0.5
    vertical-edge  left half 0.0, right half 1.0
    checkerboard   8x8 grid of side//8 squares; the outer ring is mid-grey so the
                   inner 6x6 board has L- and T-corners, not only X-junctions
    seeded-noise   uniform noise from the seed
    scene          structured scene (shading, rectangles, grain); the same seed
                   draws the same layout at every side
    """
    if side < 1:
        raise ConfigError(f"side must be >= 1, got {side}")

    if kind == 'constant':
        pixels = np.full((side, side), 0.5)
    elif kind == 'vertical-edge':
        pixels = np.zeros((side, side))
        pixels[:, side // 2:] = 1.0
    elif kind == 'checkerboard':
        pixels = _checkerboard(side)
    elif kind == 'seeded-noise':
        pixels = np.random.default_rng(seed).random((side, side))
    elif kind == 'scene':
        pixels = _scene(side, seed)
    else:
        raise ConfigError(f"unknown synthetic image kind {kind!r}; choose from {', '.join(SYNTH_KINDS)}")
    return GrayImage(pixels)


def _checkerboard(side: int) -> np.ndarray:
    square = max(1, side // 8)
    cells = np.arange(side) // square
    cy, cx = np.meshgrid(cells, cells, indexing='ij')
    board = ((cx + cy) % 2 == 0).astype(np.float64)
    frame = (cx == 0) | (cy == 0) | (cx >= 7) | (cy >= 7)
    board[frame] = 0.5
    return board


def _scene(side: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)

    # low- and mid-frequency shading, drawn on fixed grids then resampled
    coarse = rng.random((6, 6))
    texture = rng.random((48, 48))
    canvas = 0.35 * resize_array(coarse, side, side) + 0.25 * resize_array(texture, side, side)

    # rectangles in normalized coordinates
    centres = (np.arange(side, dtype=np.float64) + 0.5) / side
    yy, xx = np.meshgrid(centres, centres, indexing='ij')
    for x0, y0, w, h, level in rng.random((14, 5)):
        x0, y0 = 0.9 * x0, 0.9 * y0
        w, h = 0.05 + 0.3 * w, 0.05 + 0.3 * h
        mask = (xx >= x0) & (xx < x0 + w) & (yy >= y0) & (yy < y0 + h)
        canvas[mask] = 0.5 * canvas[mask] + 0.5 * level

    # sensor-like grain, seeded per side
    grain = np.random.default_rng([seed, side]).normal(0.0, 0.02, (side, side))
    return np.clip(canvas + grain, 0.0, 1.0)


def perturb_brightness(image: GrayImage, gain: float, offset: float) -> GrayImage:
    """Global gain/offset change, clipped to [0, 1]."""
    return GrayImage(np.clip(image.pixels * gain + offset, 0.0, 1.0))
