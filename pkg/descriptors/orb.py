# -*- coding: utf-8 -*-
"""
ORB
===

Oriented FAST corners with rotated BRIEF bit strings, via OpenCV.

FAST-9 detection runs on a scale pyramid, corners are ranked by Harris
response, orientation comes from the intensity centroid, and each keypoint
gets 256 point-pair comparisons (OpenCV's compiled-in pattern).
"""
import cv2
import numpy as np

from imaging import GrayImage
from vpr_errors import NoKeypoints

from .base import KeypointDescriptor, OrbParams


def create_detector(params: OrbParams):
    return cv2.ORB_create(
        nfeatures=params.max_features,
        scaleFactor=params.scale_factor,
        nlevels=params.pyramid_levels,
        edgeThreshold=params.patch_side,
        firstLevel=0,
        WTA_K=2,
        scoreType=cv2.ORB_HARRIS_SCORE,
        patchSize=params.patch_side,
        fastThreshold=params.fast_threshold,
    )


def encode_orb(image: GrayImage, params: OrbParams = OrbParams()) -> KeypointDescriptor:
    """
    Raises NoKeypoints when either side is below patch_side or no corner
    survives detection. Callers in the benchmark treat that as an outcome.
    """
    ps = params.patch_side
    if image.width < ps or image.height < ps:
        raise NoKeypoints(f"image {image.width}x{image.height} is smaller than the {ps}px patch")

    keypoints, bits = create_detector(params).detectAndCompute(image.as_uint8(), None)
    if bits is None or len(keypoints) == 0:
        raise NoKeypoints()

    locations = np.array([kp.pt for kp in keypoints], dtype=np.float64)
    orientations = np.radians(np.array([kp.angle for kp in keypoints], dtype=np.float64))
    return KeypointDescriptor('orb', locations, orientations, bits)


def count_keypoints(image: GrayImage, params: OrbParams = OrbParams()) -> int:
    """Number of keypoints encode_orb would return; 0 where it raises NoKeypoints."""
    try:
        return len(encode_orb(image, params))
    except NoKeypoints:
        return 0
