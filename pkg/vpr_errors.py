# -*- coding: utf-8 -*-
"""
vprkit 错误类型
===============

All failures raised by vprkit derive from VprError so the CLI can map them to
exit codes in one place. Validation failures also derive from ValueError.

NoKeypoints is special: the ORB encoder raises it, but the evaluation layer
treats it as a recorded outcome, never as a reason to stop a sweep.
"""


class VprError(Exception):
    """Base class for every vprkit error."""


# ==================== Imaging ====================

class ImageIoError(VprError, IOError):
    """Image file missing or unreadable."""


class ImageFormatError(VprError, ValueError):
    """Image bytes could not be decoded, or pixel data is invalid."""


class ImageTooSmall(VprError, ValueError):
    """Image is smaller than the encoder's minimum working size."""

    def __init__(self, technique: str, width: int, height: int, minimum: int):
        self.technique = technique
        self.width = width
        self.height = height
        self.minimum = minimum
        super().__init__(f"{technique} needs at least {minimum}x{minimum} px, got {width}x{height}")


# ==================== Descriptors ====================

class NoKeypoints(VprError):
    """No keypoint survived detection (or the image is smaller than the patch)."""

    def __init__(self, reason: str = "no keypoints detected"):
        self.reason = reason
        super().__init__(reason)


class DescriptorFormatError(VprError, ValueError):
    """Serialized descriptor is malformed or of an unknown version."""


# ==================== Matching ====================

class DimensionMismatch(VprError, ValueError):
    """Vectors being compared have different lengths."""


class EmptyDescriptor(VprError, ValueError):
    """A regional or keypoint descriptor has no entries."""


class KindMismatch(VprError, ValueError):
    """Query and reference descriptors are of different kinds."""


class EmptyMap(VprError, ValueError):
    """Retrieval was asked to search an empty reference map."""


# ==================== Datasets ====================

class LayoutError(VprError, ValueError):
    """Dataset directory is missing query/, reference/ or ground_truth.csv."""


class GroundTruthError(VprError, ValueError):
    """ground_truth.csv is malformed, incomplete or out of range."""


# ==================== Evaluation / config ====================

class EmptyGroup(VprError, ValueError):
    """Weighted averaging was asked to average nothing."""


class ZeroTime(VprError, ValueError):
    """Trade-off ratio requested for a record with no measured time."""


class ConfigError(VprError, ValueError):
    """Invalid parameter value or flag combination."""
