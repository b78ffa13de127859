# -*- coding: utf-8 -*-
"""
Descriptor types and encoder parameters
=======================================

Three descriptor shapes:

- DenseDescriptor: one real vector (HOG, GIST)
- RegionalDescriptor: region centres plus one vector per region (CoHOG)
- KeypointDescriptor: keypoint locations, orientations and 256-bit strings (ORB)

Parameter objects are frozen and validated on construction.
"""
import dataclasses
import typing
from dataclasses import dataclass, field
from typing import ClassVar, Mapping, Optional, Sequence

import numpy as np

from vpr_errors import ConfigError, DescriptorFormatError

ORB_BITS = 256
ORB_BYTES = ORB_BITS // 8


class DescriptorKind:
    """Kind tags; also used in the binary and JSON encodings."""
    DENSE = 'dense'
    REGIONAL = 'regional'
    KEYPOINTS = 'keypoints'

    ALL = (DENSE, REGIONAL, KEYPOINTS)


def _frozen_array(values, dtype, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        raise DescriptorFormatError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if arr.dtype.kind == 'f' and not np.all(np.isfinite(arr)):
        raise DescriptorFormatError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


# ==================== Descriptors ====================

@dataclass(frozen=True, eq=False)
class DenseDescriptor:
    technique: str
    vector: np.ndarray

    kind: ClassVar[str] = DescriptorKind.DENSE

    def __post_init__(self):
        object.__setattr__(self, 'vector', _frozen_array(self.vector, np.float64, 1, 'vector'))

    def __len__(self):
        return int(self.vector.shape[0])

    def __eq__(self, other):
        if not isinstance(other, DenseDescriptor):
            return NotImplemented
        return self.technique == other.technique and np.array_equal(self.vector, other.vector)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RegionalDescriptor:
    """
    centers: (R, 2) float64 pixel coordinates (x, y) of each region centre
    vectors: (R, D) float64, one row per region
    """
    technique: str
    centers: np.ndarray
    vectors: np.ndarray

    kind: ClassVar[str] = DescriptorKind.REGIONAL

    def __post_init__(self):
        centers = _frozen_array(self.centers, np.float64, 2, 'centers')
        vectors = _frozen_array(self.vectors, np.float64, 2, 'vectors')
        if centers.shape[1] != 2:
            raise DescriptorFormatError(f"centers must have 2 columns, got {centers.shape[1]}")
        if centers.shape[0] != vectors.shape[0]:
            raise DescriptorFormatError(
                f"{centers.shape[0]} region centres but {vectors.shape[0]} region vectors")
        object.__setattr__(self, 'centers', centers)
        object.__setattr__(self, 'vectors', vectors)

    def __len__(self):
        return int(self.vectors.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __eq__(self, other):
        if not isinstance(other, RegionalDescriptor):
            return NotImplemented
        return (self.technique == other.technique
                and np.array_equal(self.centers, other.centers)
                and np.array_equal(self.vectors, other.vectors))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class KeypointDescriptor:
    """
    locations:    (K, 2) float64 sub-pixel (x, y) in base-image coordinates
    orientations: (K,) float64 radians
    bits:         (K, 32) uint8, 256 bits per keypoint
    """
    technique: str
    locations: np.ndarray
    orientations: np.ndarray
    bits: np.ndarray

    kind: ClassVar[str] = DescriptorKind.KEYPOINTS

    def __post_init__(self):
        locations = _frozen_array(self.locations, np.float64, 2, 'locations')
        orientations = _frozen_array(self.orientations, np.float64, 1, 'orientations')
        bits = _frozen_array(self.bits, np.uint8, 2, 'bits')
        if locations.shape[1] != 2:
            raise DescriptorFormatError(f"locations must have 2 columns, got {locations.shape[1]}")
        if bits.shape[1] != ORB_BYTES:
            raise DescriptorFormatError(f"each bit string must be {ORB_BYTES} bytes, got {bits.shape[1]}")
        if not (locations.shape[0] == orientations.shape[0] == bits.shape[0]):
            raise DescriptorFormatError("locations, orientations and bits disagree on keypoint count")
        object.__setattr__(self, 'locations', locations)
        object.__setattr__(self, 'orientations', orientations)
        object.__setattr__(self, 'bits', bits)

    def __len__(self):
        return int(self.bits.shape[0])

    def __eq__(self, other):
        if not isinstance(other, KeypointDescriptor):
            return NotImplemented
        return (self.technique == other.technique
                and np.array_equal(self.locations, other.locations)
                and np.array_equal(self.orientations, other.orientations)
                and np.array_equal(self.bits, other.bits))

    __hash__ = None


Descriptor = typing.Union[DenseDescriptor, RegionalDescriptor, KeypointDescriptor]


# ==================== Parameters ====================

def parse_overrides(items: Optional[Sequence[str]]) -> dict:
    """['cell_side=8', 'bins=12'] -> {'cell_side': '8', 'bins': '12'}"""
    overrides = {}
    for item in items or ():
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def _coerce(text: str, hint, name: str):
    optional = typing.get_origin(hint) is typing.Union and type(None) in typing.get_args(hint)
    if optional:
        if text.lower() in ('', 'none', 'native'):
            return None
        hint = next(arg for arg in typing.get_args(hint) if arg is not type(None))
    try:
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {text!r}") from None
    return text


class ParamsMixin:
    """key=value overrides for frozen parameter dataclasses."""

    def with_overrides(self, overrides: Mapping[str, str]):
        if not overrides:
            return self
        hints = typing.get_type_hints(type(self))
        names = {f.name for f in dataclasses.fields(self)}
        changes = {}
        for key, text in overrides.items():
            if key not in names:
                raise ConfigError(
                    f"unknown parameter {key!r} for {type(self).__name__} "
                    f"(known: {', '.join(sorted(names))})")
            changes[key] = _coerce(str(text), hints[key], key)
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class HogParams(ParamsMixin):
    cell_side: int = 16
    block_side: int = 16
    bins: int = 9
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.cell_side < 2:
            raise ConfigError(f"cell_side must be >= 2, got {self.cell_side}")
        if self.block_side < self.cell_side or self.block_side % self.cell_side:
            raise ConfigError(f"block_side ({self.block_side}) must be a multiple of cell_side ({self.cell_side})")
        if self.bins < 2:
            raise ConfigError(f"bins must be >= 2, got {self.bins}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class GistParams(ParamsMixin):
    scales: int = 4
    orientations: int = 8
    grid: int = 4
    prefilter_cycles: float = 4.0
    boundary: int = 32

    def __post_init__(self):
        for name in ('scales', 'orientations', 'grid'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.prefilter_cycles > 0:
            raise ConfigError(f"prefilter_cycles must be positive, got {self.prefilter_cycles}")
        if self.boundary < 0:
            raise ConfigError(f"boundary must be >= 0, got {self.boundary}")

    @property
    def length(self) -> int:
        return self.grid * self.grid * self.scales * self.orientations


@dataclass(frozen=True)
class CohogParams(ParamsMixin):
    """entropy_threshold is a fraction of the maximum attainable patch entropy."""
    internal_side: Optional[int] = None
    cell_side: int = 16
    bins: int = 8
    entropy_threshold: float = 0.4
    patch_side: int = 16

    def __post_init__(self):
        if self.internal_side is not None and self.internal_side < 1:
            raise ConfigError(f"internal_side must be >= 1, got {self.internal_side}")
        if self.cell_side < 2:
            raise ConfigError(f"cell_side must be >= 2, got {self.cell_side}")
        if self.bins < 2:
            raise ConfigError(f"bins must be >= 2, got {self.bins}")
        if not 0.0 <= self.entropy_threshold <= 1.0:
            raise ConfigError(f"entropy_threshold must lie in [0, 1], got {self.entropy_threshold}")
        if self.patch_side < self.cell_side or self.patch_side % self.cell_side:
            raise ConfigError(f"patch_side ({self.patch_side}) must be a multiple of cell_side ({self.cell_side})")

    @property
    def max_entropy(self) -> float:
        return float(np.log2(min(256, self.patch_side * self.patch_side)))


@dataclass(frozen=True)
class OrbParams(ParamsMixin):
    max_features: int = 500
    fast_threshold: int = 20
    pyramid_levels: int = 8
    scale_factor: float = 1.2
    patch_side: int = 31

    def __post_init__(self):
        if self.max_features < 1:
            raise ConfigError(f"max_features must be >= 1, got {self.max_features}")
        if not 0 <= self.fast_threshold <= 255:
            raise ConfigError(f"fast_threshold must lie in [0, 255], got {self.fast_threshold}")
        if self.pyramid_levels < 1:
            raise ConfigError(f"pyramid_levels must be >= 1, got {self.pyramid_levels}")
        if not self.scale_factor > 1.0:
            raise ConfigError(f"scale_factor must be > 1, got {self.scale_factor}")
        if self.patch_side < 3 or self.patch_side % 2 == 0:
            raise ConfigError(f"patch_side must be odd and >= 3, got {self.patch_side}")


@dataclass(frozen=True)
class EncoderParams:
    """One parameter object per technique; what the harness passes around."""
    hog: HogParams = field(default_factory=HogParams)
    gist: GistParams = field(default_factory=GistParams)
    cohog: CohogParams = field(default_factory=CohogParams)
    orb: OrbParams = field(default_factory=OrbParams)

    def for_technique(self, technique: str):
        try:
            return getattr(self, technique)
        except AttributeError:
            raise ConfigError(f"unknown technique {technique!r}") from None
