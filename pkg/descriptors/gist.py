# -*- coding: utf-8 -*-
"""
GIST
====

Spatial envelope descriptor: energy of a multi-scale, multi-orientation Gabor
bank, averaged over a grid x grid partition of the image.

The bank is built in the frequency domain at the padded image size, so the
descriptor length never depends on the input resolution while the encoding
cost grows with it.
"""
from functools import lru_cache

import numpy as np
from numpy.fft import fft2, fftfreq, ifft2

from imaging import GrayImage
from vpr_errors import ImageTooSmall

from .base import DenseDescriptor, GistParams

MIN_SIDE = 8

# Gabor shape constants
RADIAL_BANDWIDTH = 0.35
PEAK_FREQUENCY = 0.3        # cycles/pixel at the finest scale
SCALE_STEP = 1.85

PREFILTER_PAD = 5
CONTRAST_FLOOR = 0.2


@lru_cache(maxsize=8)
def _frequency_grid(rows: int, cols: int):
    """Radial frequency (cycles/pixel) and angle maps in FFT layout."""
    fy = fftfreq(rows)[:, None]
    fx = fftfreq(cols)[None, :]
    radius = np.sqrt(fx * fx + fy * fy)
    angle = np.arctan2(fy, fx)
    radius.setflags(write=False)
    angle.setflags(write=False)
    return radius, angle


def gabor_filter(rows: int, cols: int, scale: int, orientation: int, orientations: int) -> np.ndarray:
    """Transfer function of one filter of the bank, DC term zeroed."""
    radius, angle = _frequency_grid(rows, cols)
    peak = PEAK_FREQUENCY / SCALE_STEP ** scale
    angular = 16.0 * orientations ** 2 / 32.0 ** 2

    rotated = np.mod(angle + np.pi * orientation / orientations + np.pi, 2.0 * np.pi) - np.pi
    transfer = np.exp(-10.0 * RADIAL_BANDWIDTH * (radius / peak - 1.0) ** 2
                      - 2.0 * angular * np.pi * rotated ** 2)
    transfer[0, 0] = 0.0
    return transfer


def prefilter(pixels: np.ndarray, cycles: float) -> np.ndarray:
    """Whitening followed by local contrast normalization."""
    rows, cols = pixels.shape
    padded = np.pad(pixels, PREFILTER_PAD, mode='symmetric')
    # even sizes keep the Gaussian centred
    padded = np.pad(padded, ((0, padded.shape[0] % 2), (0, padded.shape[1] % 2)), mode='symmetric')

    sigma = cycles / np.sqrt(np.log(2.0))
    fy = fftfreq(padded.shape[0], d=1.0 / padded.shape[0])[:, None]
    fx = fftfreq(padded.shape[1], d=1.0 / padded.shape[1])[None, :]
    lowpass = np.exp(-(fx * fx + fy * fy) / sigma ** 2)

    whitened = padded - np.real(ifft2(fft2(padded) * lowpass))
    local_std = np.sqrt(np.abs(ifft2(fft2(whitened * whitened) * lowpass)))
    normalized = whitened / (CONTRAST_FLOOR + local_std)
    return normalized[PREFILTER_PAD:PREFILTER_PAD + rows, PREFILTER_PAD:PREFILTER_PAD + cols]


def grid_average(response: np.ndarray, grid: int) -> np.ndarray:
    """Mean over a grid x grid partition; block edges follow fix(linspace(0, n, grid + 1))."""
    row_edges = np.linspace(0, response.shape[0], grid + 1).astype(np.intp)
    col_edges = np.linspace(0, response.shape[1], grid + 1).astype(np.intp)
    sums = np.add.reduceat(np.add.reduceat(response, row_edges[:-1], axis=0), col_edges[:-1], axis=1)
    counts = np.outer(np.diff(row_edges), np.diff(col_edges))
    return sums / counts


def encode_gist(image: GrayImage, params: GistParams = GistParams()) -> DenseDescriptor:
    minimum = max(MIN_SIDE, params.grid)
    if image.width < minimum or image.height < minimum:
        raise ImageTooSmall('gist', image.width, image.height, minimum)

    pixels = image.pixels * 255.0
    pixels = pixels - pixels.mean()
    filtered = prefilter(pixels, params.prefilter_cycles)

    be = params.boundary
    spectrum = fft2(np.pad(filtered, be, mode='symmetric'))
    rows, cols = spectrum.shape

    per_filter = params.grid * params.grid
    gist = np.empty(params.length, dtype=np.float64)
    k = 0
    for scale in range(params.scales):
        for orientation in range(params.orientations):
            transfer = gabor_filter(rows, cols, scale, orientation, params.orientations)
            response = np.abs(ifft2(spectrum * transfer))[be:rows - be, be:cols - be]
            # filter-major; grid cells in column-major order
            gist[k:k + per_filter] = grid_average(response, params.grid).ravel(order='F')
            k += per_filter

    return DenseDescriptor('gist', gist)
