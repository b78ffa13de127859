# -*- coding: utf-8 -*-
"""
CoHOG
=====

Regional descriptor: pick information-rich patches by Shannon entropy of
their 8-bit intensities, then describe each picked patch with its cell
gradient histograms.
"""
import numpy as np

from imaging import GrayImage, Resolution, resize
from vpr_errors import ImageTooSmall

from .base import CohogParams, RegionalDescriptor
from .hog import orientation_histograms

GRAY_LEVELS = 256


def patch_entropy(levels: np.ndarray, patch_side: int) -> np.ndarray:
    """(rows, cols) Shannon entropy in bits of each non-overlapping patch of a uint8 image."""
    rows = levels.shape[0] // patch_side
    cols = levels.shape[1] // patch_side
    patches = (levels[:rows * patch_side, :cols * patch_side]
               .reshape(rows, patch_side, cols, patch_side)
               .transpose(0, 2, 1, 3)
               .reshape(rows * cols, patch_side * patch_side))

    offsets = np.arange(rows * cols, dtype=np.intp)[:, None] * GRAY_LEVELS
    counts = np.bincount((offsets + patches).ravel(), minlength=rows * cols * GRAY_LEVELS)
    p = counts.reshape(rows * cols, GRAY_LEVELS) / float(patch_side * patch_side)

    log_p = np.zeros_like(p)
    np.log2(p, out=log_p, where=p > 0)
    return (-(p * log_p).sum(axis=1)).reshape(rows, cols)


def select_regions(entropy: np.ndarray, threshold_bits: float) -> np.ndarray:
    """Flat patch indices with entropy >= threshold; the single best patch if none qualifies."""
    selected = np.flatnonzero(entropy.ravel() >= threshold_bits)
    if selected.size == 0:
        selected = np.array([int(np.argmax(entropy))], dtype=np.intp)
    return selected


def encode_cohog(image: GrayImage, params: CohogParams = CohogParams()) -> RegionalDescriptor:
    """
    Regional descriptor over the patch grid.

    Each region vector is the concatenation of the cell histograms inside the
    patch, L2-normalized; a patch without any gradient gets the uniform unit
    vector. Region centres are (x, y) pixel coordinates of the patch centre.
    """
    if params.internal_side is not None:
        image = resize(image, Resolution(params.internal_side))

    ps = params.patch_side
    if image.width < ps or image.height < ps:
        raise ImageTooSmall('cohog', image.width, image.height, ps)

    entropy = patch_entropy(image.as_uint8(), ps)
    cols = entropy.shape[1]
    selected = select_regions(entropy, params.entropy_threshold * params.max_entropy)

    hist = orientation_histograms(image.pixels, params.cell_side, params.bins)
    per_patch = ps // params.cell_side
    region_rows = selected // cols
    region_cols = selected % cols

    vectors = np.empty((selected.size, per_patch * per_patch * params.bins), dtype=np.float64)
    for i, (r, c) in enumerate(zip(region_rows, region_cols)):
        vectors[i] = hist[r * per_patch:(r + 1) * per_patch, c * per_patch:(c + 1) * per_patch].ravel()

    norms = np.linalg.norm(vectors, axis=1)
    flat = norms == 0
    vectors[flat] = 1.0 / np.sqrt(vectors.shape[1])
    norms[flat] = 1.0
    vectors /= norms[:, None]

    centers = np.column_stack([region_cols * ps + ps / 2.0, region_rows * ps + ps / 2.0])
    return RegionalDescriptor('cohog', centers, vectors)
