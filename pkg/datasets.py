# -*- coding: utf-8 -*-
"""
Datasets
========

Dataset layout on disk:

    <root>/query/            query images (PNG/JPEG)
    <root>/reference/        reference (map) images
    <root>/ground_truth.csv  query_index,ref_index[;ref_index]*

Images are indexed in byte-wise lexicographic filename order.
"""
import csv
import os
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import cv2
import numpy as np

from bench_config import BenchConfig, log
from imaging import GrayImage, Resolution, load_image, perturb_brightness, resize, save_image, synth_image
from vpr_errors import ConfigError, GroundTruthError, ImageIoError, LayoutError

QUERY_DIR = 'query'
REFERENCE_DIR = 'reference'
GROUND_TRUTH_FILE = 'ground_truth.csv'
IMAGE_EXTENSIONS = ('.png', '.jpg', '.jpeg')

# reference perturbation ranges for synthetic datasets
SYNTH_GAIN_RANGE = (0.85, 1.15)
SYNTH_OFFSET_RANGE = (-0.05, 0.05)


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    query_paths: Tuple[str, ...]
    reference_paths: Tuple[str, ...]
    ground_truth: Dict[int, FrozenSet[int]]

    @property
    def n_query(self) -> int:
        return len(self.query_paths)

    @property
    def n_reference(self) -> int:
        return len(self.reference_paths)

    def validate(self):
        """Every query has >= 1 correct reference and all indices are in range."""
        for q in range(self.n_query):
            refs = self.ground_truth.get(q)
            if not refs:
                raise GroundTruthError(f"{self.name}: no ground-truth entry for query {q}")
            bad = sorted(r for r in refs if not 0 <= r < self.n_reference)
            if bad:
                raise GroundTruthError(
                    f"{self.name}: query {q} references {bad}, but the map has {self.n_reference} images")
        extra = sorted(q for q in self.ground_truth if not 0 <= q < self.n_query)
        if extra:
            raise GroundTruthError(f"{self.name}: ground truth names unknown queries {extra}")

    def is_correct(self, query_index: int, retrieved_index: int, tolerance: int = BenchConfig.GT_TOLERANCE) -> bool:
        return any(abs(retrieved_index - r) <= tolerance for r in self.ground_truth[query_index])


# ==================== Loading ====================

def list_images(directory: str) -> List[str]:
    names = [name for name in os.listdir(directory)
             if name.lower().endswith(IMAGE_EXTENSIONS) and os.path.isfile(os.path.join(directory, name))]
    names.sort(key=lambda name: name.encode('utf-8', 'surrogateescape'))
    return [os.path.join(directory, name) for name in names]


def _parse_index(text: str, what: str, line_no: int) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise GroundTruthError(f"line {line_no}: invalid {what} {text.strip()!r}") from None


def parse_ground_truth(path: str) -> Dict[int, FrozenSet[int]]:
    """
    Rows are query_index,ref_index[;ref_index]*. A non-numeric first row is
    taken as a header. Blank lines are skipped; duplicate query rows are errors.
    """
    try:
        with open(path, 'r', encoding='utf-8-sig', newline='') as f:
            rows = list(csv.reader(f))
    except (OSError, UnicodeDecodeError) as e:
        raise GroundTruthError(f"cannot read {path}: {e}") from e

    ground_truth = {}
    first = True
    for line_no, row in enumerate(rows, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if first:
            first = False
            if not row[0].strip().lstrip('-').isdigit():
                continue
        if len(row) != 2:
            raise GroundTruthError(f"line {line_no}: expected 2 fields, got {len(row)}")
        query = _parse_index(row[0], 'query index', line_no)
        refs = [item for item in row[1].split(';') if item.strip()]
        if not refs:
            raise GroundTruthError(f"line {line_no}: query {query} has no reference indices")
        if query in ground_truth:
            raise GroundTruthError(f"line {line_no}: duplicate row for query {query}")
        ground_truth[query] = frozenset(_parse_index(r, 'reference index', line_no) for r in refs)
    return ground_truth


def load_manifest(root: str, name: Optional[str] = None) -> DatasetManifest:
    query_dir = os.path.join(root, QUERY_DIR)
    reference_dir = os.path.join(root, REFERENCE_DIR)
    gt_path = os.path.join(root, GROUND_TRUTH_FILE)
    for path, is_dir in ((query_dir, True), (reference_dir, True), (gt_path, False)):
        exists = os.path.isdir(path) if is_dir else os.path.isfile(path)
        if not exists:
            raise LayoutError(f"dataset {root!r} is missing {os.path.basename(path)}{'/' if is_dir else ''}")

    query_paths = tuple(list_images(query_dir))
    reference_paths = tuple(list_images(reference_dir))
    if not query_paths:
        raise LayoutError(f"no query images in {query_dir}")
    if not reference_paths:
        raise LayoutError(f"no reference images in {reference_dir}")

    manifest = DatasetManifest(
        name=name or os.path.basename(os.path.normpath(root)),
        query_paths=query_paths,
        reference_paths=reference_paths,
        ground_truth=parse_ground_truth(gt_path),
    )
    manifest.validate()
    log("Datasets", f"Loaded {manifest.name}: {manifest.n_query} queries, {manifest.n_reference} references")
    return manifest


def load_images(paths: Sequence[str], resolution: Optional[Resolution] = None) -> List[GrayImage]:
    images = [load_image(path) for path in paths]
    if resolution is not None:
        images = [resize(image, resolution) for image in images]
    return images


# ==================== Writing ====================

def write_ground_truth(path: str, ground_truth: Dict[int, FrozenSet[int]]):
    try:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            for query in sorted(ground_truth):
                writer.writerow([query, ';'.join(str(r) for r in sorted(ground_truth[query]))])
    except OSError as e:
        raise ImageIoError(f"cannot write {path}: {e}") from e


def _prepare_output(root: str, expected: Dict[str, List[str]]):
    """Create query/ and reference/; refuse to mix with unrelated images already there."""
    for sub, names in expected.items():
        directory = os.path.join(root, sub)
        os.makedirs(directory, exist_ok=True)
        stray = sorted(set(os.path.basename(p) for p in list_images(directory)) - set(names))
        if stray:
            raise LayoutError(f"{directory} already holds other images (e.g. {stray[0]})")


def synth_dataset(out_root: str, n: int = BenchConfig.SYNTH_N, side: int = BenchConfig.SYNTH_SIDE,
                  seed: int = BenchConfig.SYNTH_SEED, distractors: int = BenchConfig.SYNTH_DISTRACTORS,
                  perturb: bool = True) -> DatasetManifest:
    """
    Materialize a synthetic dataset and return its manifest.

    Queries are structured scenes; reference i re-renders scene i with a mild
    gain/offset change (skipped when perturb is False, giving byte-identical
    pairs), followed by `distractors` unrelated scenes. Ground truth is the
    identity on the first n references.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if distractors < 0:
        raise ConfigError(f"distractors must be >= 0, got {distractors}")
    if side < 1:
        raise ConfigError(f"side must be >= 1, got {side}")

    rng = np.random.default_rng(seed)
    scene_seeds = rng.integers(0, 2 ** 31 - 1, size=n + distractors)
    gains = rng.uniform(*SYNTH_GAIN_RANGE, size=n)
    offsets = rng.uniform(*SYNTH_OFFSET_RANGE, size=n)

    query_names = [f"q_{i:04d}.png" for i in range(n)]
    reference_names = [f"r_{i:04d}.png" for i in range(n + distractors)]
    _prepare_output(out_root, {QUERY_DIR: query_names, REFERENCE_DIR: reference_names})

    for i in range(n):
        scene = synth_image('scene', side, int(scene_seeds[i]))
        save_image(scene, os.path.join(out_root, QUERY_DIR, query_names[i]))
        reference = perturb_brightness(scene, gains[i], offsets[i]) if perturb else scene
        save_image(reference, os.path.join(out_root, REFERENCE_DIR, reference_names[i]))
    for i in range(n, n + distractors):
        scene = synth_image('scene', side, int(scene_seeds[i]))
        save_image(scene, os.path.join(out_root, REFERENCE_DIR, reference_names[i]))

    write_ground_truth(os.path.join(out_root, GROUND_TRUTH_FILE), {i: frozenset([i]) for i in range(n)})
    log("Datasets", f"Synthesized {n} queries + {n + distractors} references ({side}x{side}, seed {seed}) in {out_root}")
    return load_manifest(out_root)


def export_resized(manifest: DatasetManifest, resolution: Resolution, out_root: str) -> DatasetManifest:
    """Write a PNG copy of the dataset at one resolution, same ordering and ground truth."""
    plan = {}
    for sub, paths in ((QUERY_DIR, manifest.query_paths), (REFERENCE_DIR, manifest.reference_paths)):
        # index prefix keeps the original ordering after the extension change
        plan[sub] = [(path, f"{i:06d}_{os.path.splitext(os.path.basename(path))[0]}.png")
                     for i, path in enumerate(paths)]
    _prepare_output(out_root, {sub: [name for _, name in items] for sub, items in plan.items()})

    for sub, items in plan.items():
        for path, name in items:
            save_image(resize(load_image(path), resolution), os.path.join(out_root, sub, name))
    write_ground_truth(os.path.join(out_root, GROUND_TRUTH_FILE), manifest.ground_truth)
    log("Datasets", f"Exported {manifest.name} at {resolution.label} to {out_root}")
    return load_manifest(out_root, name=f"{manifest.name}@{resolution.label}")


def dataset_footprint(manifest: DatasetManifest, resolution: Resolution) -> int:
    """Bytes the dataset occupies with every image resized and PNG-encoded."""
    total = 0
    for path in manifest.query_paths + manifest.reference_paths:
        ok, buf = cv2.imencode('.png', resize(load_image(path), resolution).as_uint8())
        if not ok:
            raise ImageIoError(f"cannot encode {path} as PNG")
        total += int(buf.size)
    return total
