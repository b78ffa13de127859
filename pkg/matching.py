# -*- coding: utf-8 -*-
"""
Matching
========

Similarity rules per descriptor kind and best-match retrieval over a map.

- dense (HOG, GIST): cosine similarity
- regional (CoHOG): mean over query regions of the best cosine against any reference region
- keypoints (ORB): mutual nearest neighbours under Hamming distance, good pairs / smaller set size
"""
import csv
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from bench_config import BenchConfig
from descriptors import DenseDescriptor, DescriptorKind, KeypointDescriptor, RegionalDescriptor
from vpr_errors import DimensionMismatch, EmptyDescriptor, EmptyMap, ImageIoError, KindMismatch

NORM_GUARD = 1e-12


@dataclass(frozen=True, eq=False)
class MatchResult:
    best_index: int
    score: float
    per_reference_scores: Optional[np.ndarray] = None


# ==================== Similarity rules ====================

def cosine_similarity(a, b) -> float:
    """a.b / (|a| |b|); 0 when either norm is below 1e-12."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare vectors of length {a.size} and {b.size}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a < NORM_GUARD or norm_b < NORM_GUARD:
        return 0.0
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def _unit_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    return np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms >= NORM_GUARD)


def match_cohog(query: RegionalDescriptor, reference: RegionalDescriptor) -> float:
    """Mean over query regions of the maximum cosine similarity to any reference region."""
    if len(query) == 0 or len(reference) == 0:
        raise EmptyDescriptor("regional descriptor has no regions")
    if query.dimension != reference.dimension:
        raise DimensionMismatch(
            f"region vectors of length {query.dimension} and {reference.dimension}")
    similarities = _unit_rows(query.vectors) @ _unit_rows(reference.vectors).T
    return float(np.clip(similarities.max(axis=1).mean(), -1.0, 1.0))


# bits set in every byte value
_POPCOUNT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(axis=1).astype(np.uint8)


def hamming_table(query_bits: np.ndarray, reference_bits: np.ndarray) -> np.ndarray:
    """(|query|, |reference|) Hamming distances between packed bit strings."""
    return _POPCOUNT[query_bits[:, None, :] ^ reference_bits[None, :, :]].sum(axis=2, dtype=np.int32)


def _assign(candidates: List[np.ndarray], n_reference: int) -> int:
    """Size of a maximum one-to-one assignment of query rows to candidate reference columns."""
    owner = [-1] * n_reference

    def place(q, seen):
        for r in candidates[q]:
            if r in seen:
                continue
            seen.add(r)
            if owner[r] < 0 or place(owner[r], seen):
                owner[r] = q
                return True
        return False

    return sum(1 for q in range(len(candidates)) if len(candidates[q]) and place(q, set()))


def match_orb(query: KeypointDescriptor, reference: KeypointDescriptor,
              hamming_threshold: int = BenchConfig.ORB_HAMMING_THRESHOLD) -> float:
    """
    Mutual nearest-neighbour pairs with distance <= threshold, over min(|query|, |reference|).

    A pair (i, j) is mutual when d(i, j) is both the minimum of row i and of
    column j. Ties are kept, and each keypoint is used at most once, so repeated
    bit strings still pair up at distance 0.
    """
    if len(query) == 0 or len(reference) == 0:
        raise EmptyDescriptor("keypoint descriptor has no keypoints")
    distances = hamming_table(query.bits, reference.bits)
    mutual = ((distances == distances.min(axis=1, keepdims=True))
              & (distances == distances.min(axis=0, keepdims=True))
              & (distances <= hamming_threshold))
    good = _assign([np.flatnonzero(row) for row in mutual], len(reference))
    return good / min(len(query), len(reference))


def similarity(query, reference, hamming_threshold: int = BenchConfig.ORB_HAMMING_THRESHOLD) -> float:
    """Kind-appropriate similarity; higher is more similar."""
    if query.kind != reference.kind:
        raise KindMismatch(f"cannot match a {query.kind} descriptor against a {reference.kind} one")
    if query.kind == DescriptorKind.DENSE:
        return cosine_similarity(query.vector, reference.vector)
    if query.kind == DescriptorKind.REGIONAL:
        return match_cohog(query, reference)
    return match_orb(query, reference, hamming_threshold)


# ==================== Retrieval ====================

def retrieve(query, references: Sequence, hamming_threshold: int = BenchConfig.ORB_HAMMING_THRESHOLD,
             keep_scores: bool = True) -> MatchResult:
    """
    Score the query against every reference and return the best one.

    Ties go to the lowest reference index.
    """
    if len(references) == 0:
        raise EmptyMap("reference map is empty")
    for index, reference in enumerate(references):
        if reference.kind != query.kind:
            raise KindMismatch(
                f"reference {index} is a {reference.kind} descriptor, query is {query.kind}")

    scores = np.fromiter((similarity(query, reference, hamming_threshold) for reference in references),
                         dtype=np.float64, count=len(references))
    best = int(np.argmax(scores))
    return MatchResult(best, float(scores[best]), scores if keep_scores else None)


def write_scores_csv(result: MatchResult, path: str, reference_names: Optional[Sequence[str]] = None):
    """One row per reference: index, name, score, best flag."""
    if result.per_reference_scores is None:
        raise ValueError("match result was created without per-reference scores")
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['reference_index', 'reference', 'score', 'best'])
            for index, score in enumerate(result.per_reference_scores):
                name = reference_names[index] if reference_names is not None else ''
                writer.writerow([index, name, repr(float(score)), int(index == result.best_index)])
    except OSError as e:
        raise ImageIoError(f"cannot write {path}: {e}") from e
