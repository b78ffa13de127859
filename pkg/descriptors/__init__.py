# -*- coding: utf-8 -*-
"""
VPR Descriptors
===============

The four handcrafted place-recognition encoders.

This package provides:
- encode_hog: dense histogram-of-oriented-gradients vector
- encode_gist: dense Gabor-energy scene vector, fixed length
- encode_cohog: entropy-selected regions, each with a local HOG vector
- encode_orb: oriented FAST keypoints with 256-bit binary strings
- codec: binary and JSON serialization

Usage:
    from descriptors import encode, HogParams
    from descriptors.codec import save_descriptor, load_descriptor
"""

from .base import (
    DescriptorKind, DenseDescriptor, RegionalDescriptor, KeypointDescriptor, Descriptor,
    HogParams, GistParams, CohogParams, OrbParams, EncoderParams, parse_overrides,
)
from .hog import encode_hog
from .gist import encode_gist
from .cohog import encode_cohog
from .orb import encode_orb, count_keypoints

from bench_config import BenchConfig
from vpr_errors import ConfigError

ENCODERS = {
    'hog': encode_hog,
    'gist': encode_gist,
    'cohog': encode_cohog,
    'orb': encode_orb,
}


def encode(image, technique: str, params=None):
    """Encode with the named technique; params defaults to that technique's defaults."""
    if technique not in ENCODERS:
        raise ConfigError(f"unknown technique {technique!r}; choose from {', '.join(BenchConfig.TECHNIQUES)}")
    if params is None:
        params = EncoderParams().for_technique(technique)
    return ENCODERS[technique](image, params)


__all__ = [
    'DescriptorKind',
    'DenseDescriptor',
    'RegionalDescriptor',
    'KeypointDescriptor',
    'Descriptor',
    'HogParams',
    'GistParams',
    'CohogParams',
    'OrbParams',
    'EncoderParams',
    'parse_overrides',
    'encode_hog',
    'encode_gist',
    'encode_cohog',
    'encode_orb',
    'count_keypoints',
    'encode',
    'ENCODERS',
]

__version__ = '1.0.0'
