# -*- coding: utf-8 -*-
"""
HOG
===

Cell-wise histograms of unsigned gradient orientation with block L2
normalization. The orientation histogram stage is shared with CoHOG.
"""
import numpy as np

from imaging import GrayImage
from vpr_errors import ImageTooSmall

from .base import DenseDescriptor, HogParams


def gradients(pixels: np.ndarray):
    """Centered [-1, 0, +1] differences with replicated borders -> (magnitude, angle in degrees [0, 180))."""
    padded = np.pad(pixels, 1, mode='edge')
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    magnitude = np.hypot(gx, gy)
    angle = np.mod(np.degrees(np.arctan2(gy, gx)), 180.0)
    angle[angle >= 180.0] = 0.0  # mod can round up to 180
    return magnitude, angle


def orientation_histograms(pixels: np.ndarray, cell_side: int, bins: int) -> np.ndarray:
    """
    (rows, cols, bins) gradient histograms over non-overlapping cells.

    Bin k is centred on k * 180/bins degrees; each pixel splits its magnitude
    linearly between the two nearest bin centres, wrapping at 180.
    Pixels beyond the last whole cell are ignored.
    """
    magnitude, angle = gradients(pixels)
    rows = pixels.shape[0] // cell_side
    cols = pixels.shape[1] // cell_side
    magnitude = magnitude[:rows * cell_side, :cols * cell_side]
    angle = angle[:rows * cell_side, :cols * cell_side]

    position = angle / (180.0 / bins)
    lower = np.floor(position).astype(np.intp)
    frac = position - lower
    lower %= bins
    upper = (lower + 1) % bins

    cell_row = np.arange(rows * cell_side) // cell_side
    cell_col = np.arange(cols * cell_side) // cell_side
    cell_index = (cell_row[:, None] * cols + cell_col[None, :]) * bins

    size = rows * cols * bins
    hist = np.bincount((cell_index + lower).ravel(), weights=(magnitude * (1.0 - frac)).ravel(), minlength=size)
    hist += np.bincount((cell_index + upper).ravel(), weights=(magnitude * frac).ravel(), minlength=size)
    return hist.reshape(rows, cols, bins)


def encode_hog(image: GrayImage, params: HogParams = HogParams()) -> DenseDescriptor:
    """
    Dense HOG vector.

    Blocks of block_side px are tiled with stride block_side and each block's
    concatenated cell histograms is divided by sqrt(||v||^2 + epsilon^2).
    With block_side == cell_side the length is (W // cell) * (H // cell) * bins.
    """
    minimum = max(params.cell_side, params.block_side)
    if image.width < minimum or image.height < minimum:
        raise ImageTooSmall('hog', image.width, image.height, minimum)

    hist = orientation_histograms(image.pixels, params.cell_side, params.bins)

    per_block = params.block_side // params.cell_side
    block_rows = hist.shape[0] // per_block
    block_cols = hist.shape[1] // per_block
    blocks = (hist[:block_rows * per_block, :block_cols * per_block]
              .reshape(block_rows, per_block, block_cols, per_block, params.bins)
              .transpose(0, 2, 1, 3, 4)
              .reshape(block_rows * block_cols, per_block * per_block * params.bins))

    norms = np.sqrt(np.sum(blocks * blocks, axis=1, keepdims=True) + params.epsilon ** 2)
    return DenseDescriptor('hog', (blocks / norms).ravel())
