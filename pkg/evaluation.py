# -*- coding: utf-8 -*-
"""
Evaluation
==========

Benchmark engine for the place-recognition pipelines.

- accuracy = N_c / N_q (a query is correct when its best match is in the ground-truth set)
- t_vpr = t_e + t_m, with t_e the mean encode time per query image and t_m the
  mean time to match one query against the whole map
- ratio = accuracy / t_vpr (1/seconds)

An encoder that cannot describe an image (no keypoints, image below the
encoder's minimum) is an outcome, not a failure: such queries count as
incorrect, and a cell where every query failed is marked
technique-inapplicable.
"""
import csv
import io
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import cv2

from bench_config import BenchConfig, UserPreferences, log
from datasets import DatasetManifest, load_images
from descriptors import EncoderParams, OrbParams, count_keypoints, encode
from imaging import CANONICAL_LADDER, GrayImage, Resolution, resize
from matching import retrieve
from vpr_errors import ConfigError, EmptyGroup, GroundTruthError, ImageTooSmall, NoKeypoints, ZeroTime

IDENTITY_TOLERANCE = 1e-12

# timed sections never overlap, whatever the worker count
_TIMING_LOCK = threading.Lock()


class RecordStatus:
    OK = 'ok'
    INAPPLICABLE = 'technique-inapplicable'

    ALL = (OK, INAPPLICABLE)


@dataclass(frozen=True)
class TimingSample:
    """Seconds. t_vpr = t_e + t_m."""
    t_e: float
    t_m: float
    t_vpr: float

    def __post_init__(self):
        if self.t_e < 0 or self.t_m < 0 or self.t_vpr < 0:
            raise ValueError(f"negative timing: {self}")
        if abs(self.t_vpr - (self.t_e + self.t_m)) > IDENTITY_TOLERANCE:
            raise ValueError(f"t_vpr {self.t_vpr} != t_e {self.t_e} + t_m {self.t_m}")

    @classmethod
    def of(cls, t_e: float, t_m: float) -> 'TimingSample':
        return cls(t_e, t_m, t_e + t_m)


@dataclass(frozen=True)
class BenchmarkRecord:
    technique: str
    dataset: str
    resolution: Resolution
    accuracy: float
    n_correct: int
    n_query: int
    timing: TimingSample
    ratio: float
    status: str = RecordStatus.OK
    n_inapplicable: int = 0
    map_encode_s: float = 0.0

    def __post_init__(self):
        if self.status not in RecordStatus.ALL:
            raise ValueError(f"unknown status {self.status!r}")
        if self.n_query < 1 or not 0 <= self.n_correct <= self.n_query:
            raise ValueError(f"invalid counts {self.n_correct}/{self.n_query}")
        if abs(self.accuracy - self.n_correct / self.n_query) > IDENTITY_TOLERANCE:
            raise ValueError(f"accuracy {self.accuracy} != {self.n_correct}/{self.n_query}")

    @property
    def encode_ms(self) -> float:
        return self.timing.t_e * 1000.0

    @property
    def match_ms(self) -> float:
        return self.timing.t_m * 1000.0

    @property
    def vpr_ms(self) -> float:
        return self.timing.t_vpr * 1000.0

    @property
    def map_encode_ms(self) -> float:
        return self.map_encode_s * 1000.0


@dataclass(frozen=True)
class SweepConfig:
    resolutions: Tuple[Resolution, ...] = CANONICAL_LADDER
    techniques: Tuple[str, ...] = BenchConfig.TECHNIQUES
    timing_repetitions: int = BenchConfig.TIMING_REPETITIONS
    output: Optional[str] = None
    params: EncoderParams = field(default_factory=EncoderParams)
    hamming_threshold: int = BenchConfig.ORB_HAMMING_THRESHOLD
    gt_tolerance: int = BenchConfig.GT_TOLERANCE
    jobs: int = BenchConfig.DEFAULT_JOBS

    def __post_init__(self):
        object.__setattr__(self, 'resolutions', tuple(self.resolutions))
        object.__setattr__(self, 'techniques', tuple(self.techniques))
        if not self.resolutions:
            raise ConfigError("no resolutions to sweep")
        if not self.techniques:
            raise ConfigError("no techniques to sweep")
        unknown = [t for t in self.techniques if t not in BenchConfig.TECHNIQUES]
        if unknown:
            raise ConfigError(f"unknown technique(s) {', '.join(unknown)}; choose from {', '.join(BenchConfig.TECHNIQUES)}")
        if len(set(self.techniques)) != len(self.techniques):
            raise ConfigError("duplicate technique in sweep")
        if self.timing_repetitions < 1:
            raise ConfigError(f"timing_repetitions must be >= 1, got {self.timing_repetitions}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.gt_tolerance < 0:
            raise ConfigError(f"gt_tolerance must be >= 0, got {self.gt_tolerance}")

    @classmethod
    def from_preferences(cls, **overrides) -> 'SweepConfig':
        """Defaults from the saved preferences, then explicit overrides."""
        values = dict(
            resolutions=tuple(Resolution(int(side)) for side in UserPreferences.get('resolutions')),
            techniques=tuple(UserPreferences.get('techniques')),
            timing_repetitions=int(UserPreferences.get('timing_repetitions')),
            hamming_threshold=int(UserPreferences.get('orb_hamming_threshold')),
            gt_tolerance=int(UserPreferences.get('gt_tolerance')),
            jobs=int(UserPreferences.get('jobs')),
        )
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


# ==================== Metrics ====================

def tradeoff_ratio(record: BenchmarkRecord) -> float:
    """accuracy / t_vpr in 1/seconds; 0 whenever accuracy is 0."""
    return _ratio(record.accuracy, record.timing.t_vpr)


def _ratio(accuracy: float, t_vpr: float) -> float:
    if accuracy == 0:
        return 0.0
    if t_vpr <= 0:
        raise ZeroTime("trade-off ratio needs a positive VPR time")
    return accuracy / t_vpr


def weighted_average_accuracy(records: Iterable[BenchmarkRecord]) -> Dict[Tuple[str, Resolution], float]:
    """Per (technique, resolution): sum(accuracy_d * N_q,d) / sum(N_q,d) over datasets d."""
    sums = {}
    for record in records:
        key = (record.technique, record.resolution)
        weighted, total = sums.get(key, (0.0, 0))
        sums[key] = (weighted + record.accuracy * record.n_query, total + record.n_query)
    if not sums:
        raise EmptyGroup("no records to average")
    return {key: weighted / total for key, (weighted, total) in sums.items()}


@dataclass(frozen=True)
class PeakResolutions:
    technique: str
    accuracy_resolution: Resolution
    accuracy: float
    ratio_resolution: Optional[Resolution]
    ratio: float


def peak_resolutions(records: Sequence[BenchmarkRecord]) -> Dict[str, PeakResolutions]:
    """
    Per technique, the resolution with the highest weighted accuracy and the one
    with the highest mean trade-off ratio (ties go to the lower resolution).
    """
    accuracy = weighted_average_accuracy(records)
    ratios = {}
    for record in records:
        if record.status == RecordStatus.OK:
            ratios.setdefault((record.technique, record.resolution), []).append(record.ratio)

    peaks = {}
    for technique in dict.fromkeys(r.technique for r in records):
        candidates = sorted(res for (t, res) in accuracy if t == technique)
        best_acc = max(candidates, key=lambda res: (accuracy[(technique, res)], -res.side))
        ratio_candidates = sorted(res for (t, res) in ratios if t == technique)
        best_ratio = None
        best_ratio_value = 0.0
        if ratio_candidates:
            means = {res: statistics.fmean(ratios[(technique, res)]) for res in ratio_candidates}
            best_ratio = max(ratio_candidates, key=lambda res: (means[res], -res.side))
            best_ratio_value = means[best_ratio]
        peaks[technique] = PeakResolutions(technique, best_acc, accuracy[(technique, best_acc)],
                                           best_ratio, best_ratio_value)
    return peaks


# ==================== Evaluation ====================

def load_originals(manifest: DatasetManifest) -> Tuple[List[GrayImage], List[GrayImage]]:
    """Decode every query and reference image of a dataset at its stored size."""
    return load_images(manifest.query_paths), load_images(manifest.reference_paths)


def _try_encode(image: GrayImage, technique: str, params):
    try:
        return encode(image, technique, params)
    except (NoKeypoints, ImageTooSmall):
        return None


def _run_once(queries, references, technique, params, hamming_threshold):
    """One timed pass: encode the map, encode every query, match every encoded query."""
    with _TIMING_LOCK:
        # single-threaded OpenCV while timing; the caller's setting is restored
        previous_threads = cv2.getNumThreads()
        cv2.setNumThreads(1)
        try:
            return _timed_pass(queries, references, technique, params, hamming_threshold)
        finally:
            cv2.setNumThreads(previous_threads)


def _timed_pass(queries, references, technique, params, hamming_threshold):
    start = time.perf_counter()
    encoded_map = [_try_encode(image, technique, params) for image in references]
    map_encode_s = time.perf_counter() - start

    kept = [i for i, d in enumerate(encoded_map) if d is not None]
    reference_descriptors = [encoded_map[i] for i in kept]

    encode_times = []
    query_descriptors = []
    for image in queries:
        start = time.perf_counter()
        descriptor = _try_encode(image, technique, params)
        encode_times.append(time.perf_counter() - start)
        query_descriptors.append(descriptor)

    match_times = []
    best = [None] * len(queries)
    if reference_descriptors:
        for q, descriptor in enumerate(query_descriptors):
            if descriptor is None:
                continue
            start = time.perf_counter()
            result = retrieve(descriptor, reference_descriptors, hamming_threshold, keep_scores=False)
            match_times.append(time.perf_counter() - start)
            best[q] = kept[result.best_index]

    t_e = statistics.fmean(encode_times)
    t_m = statistics.fmean(match_times) if match_times else 0.0
    return best, t_e, t_m, map_encode_s, sum(d is None for d in query_descriptors), len(kept)


def evaluate(manifest: DatasetManifest, technique: str, resolution: Resolution, params=None,
             repetitions: int = 1, hamming_threshold: int = BenchConfig.ORB_HAMMING_THRESHOLD,
             tolerance: int = BenchConfig.GT_TOLERANCE,
             originals: Optional[Tuple[Sequence[GrayImage], Sequence[GrayImage]]] = None) -> BenchmarkRecord:
    """
    One (technique, dataset, resolution) measurement.

    Images are resized outside the timed section. Each repetition re-encodes
    and re-matches; reported times are medians across repetitions.
    `originals` may carry already loaded (queries, references) to skip disk reads.
    """
    if repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {repetitions}")
    if params is None:
        params = EncoderParams().for_technique(technique)

    if originals is None:
        originals = load_originals(manifest)
    queries = [resize(image, resolution) for image in originals[0]]
    references = [resize(image, resolution) for image in originals[1]]
    if len(queries) != manifest.n_query or len(references) != manifest.n_reference:
        raise GroundTruthError(f"{manifest.name}: image lists do not match the manifest")

    runs = [_run_once(queries, references, technique, params, hamming_threshold) for _ in range(repetitions)]
    best, _, _, _, n_failed, n_map = runs[0]

    n_correct = sum(1 for q, b in enumerate(best) if b is not None and manifest.is_correct(q, b, tolerance))
    n_query = manifest.n_query
    accuracy = n_correct / n_query
    timing = TimingSample.of(statistics.median(run[1] for run in runs),
                             statistics.median(run[2] for run in runs))
    applicable = n_map > 0 and n_failed < n_query
    status = RecordStatus.OK if applicable else RecordStatus.INAPPLICABLE

    record = BenchmarkRecord(
        technique=technique,
        dataset=manifest.name,
        resolution=resolution,
        accuracy=accuracy,
        n_correct=n_correct,
        n_query=n_query,
        timing=timing,
        ratio=_ratio(accuracy, timing.t_vpr),
        status=status,
        n_inapplicable=n_failed,
        map_encode_s=statistics.median(run[3] for run in runs),
    )
    log("Evaluation", f"{technique:<5} {manifest.name} {resolution.label:>9}: "
                      f"accuracy {accuracy:.3f} ({n_correct}/{n_query}), "
                      f"t_vpr {record.vpr_ms:.3f} ms, map {record.map_encode_ms:.1f} ms, {status}"
                      + (f", {n_failed} queries not encodable" if n_failed else ""))
    return record


def sweep(manifest: DatasetManifest, config: SweepConfig,
          originals: Optional[Tuple[Sequence[GrayImage], Sequence[GrayImage]]] = None) -> List[BenchmarkRecord]:
    """
    techniques x resolutions, technique-major then ascending resolution.

    `originals` may carry already decoded (queries, references); otherwise
    every image is read before the first cell runs.

    With config.jobs > 1 cells run on a thread pool; timed sections still
    run one at a time and the output order does not change.
    """
    if originals is None:
        originals = load_originals(manifest)
    cells = [(technique, resolution)
             for technique in config.techniques
             for resolution in sorted(config.resolutions)]
    log("Sweep", f"{manifest.name}: {len(cells)} cells, {config.timing_repetitions} repetitions, {config.jobs} job(s)")

    def run(cell):
        technique, resolution = cell
        return evaluate(manifest, technique, resolution, config.params.for_technique(technique),
                        config.timing_repetitions, config.hamming_threshold, config.gt_tolerance, originals)

    if config.jobs == 1:
        return [run(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(run, cells))


def keypoint_census(images: Sequence[GrayImage], resolutions: Sequence[Resolution],
                    params: OrbParams = OrbParams()) -> Dict[Resolution, Tuple[int, ...]]:
    """ORB keypoint count of every image at every resolution; 0 where none can be found."""
    return {resolution: tuple(count_keypoints(resize(image, resolution), params) for image in images)
            for resolution in sorted(resolutions)}


# ==================== CSV ====================

def record_row(record: BenchmarkRecord) -> List[str]:
    return [
        record.technique,
        record.dataset,
        record.resolution.label,
        BenchConfig.ACCURACY_FORMAT.format(record.accuracy),
        str(record.n_correct),
        str(record.n_query),
        BenchConfig.TIME_MS_FORMAT.format(record.encode_ms),
        BenchConfig.TIME_MS_FORMAT.format(record.match_ms),
        BenchConfig.TIME_MS_FORMAT.format(record.vpr_ms),
        BenchConfig.RATIO_FORMAT.format(record.ratio),
        record.status,
    ]


def format_records_csv(records: Iterable[BenchmarkRecord], header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    if header:
        writer.writerow(BenchConfig.CSV_HEADER)
    for record in records:
        writer.writerow(record_row(record))
    return buf.getvalue()


def write_records_csv(records: Iterable[BenchmarkRecord], path: str):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        f.write(format_records_csv(records))
    log("Evaluation", f"Wrote {path}")


def read_records_csv(path: str) -> List[BenchmarkRecord]:
    """Inverse of write_records_csv; accuracy is recomputed from the counts."""
    try:
        with open(path, 'r', encoding='utf-8-sig', newline='') as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    if not rows or tuple(rows[0]) != BenchConfig.CSV_HEADER:
        raise ConfigError(f"{path}: not a benchmark CSV (unexpected header)")

    records = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(BenchConfig.CSV_HEADER):
            raise ConfigError(f"{path}:{line_no}: expected {len(BenchConfig.CSV_HEADER)} fields, got {len(row)}")
        try:
            values = dict(zip(BenchConfig.CSV_HEADER, row))
            n_correct = int(values['n_correct'])
            n_query = int(values['n_query'])
            records.append(BenchmarkRecord(
                technique=values['technique'],
                dataset=values['dataset'],
                resolution=Resolution.parse(values['resolution']),
                accuracy=n_correct / n_query,
                n_correct=n_correct,
                n_query=n_query,
                timing=TimingSample.of(float(values['encode_ms']) / 1000.0, float(values['match_ms']) / 1000.0),
                ratio=float(values['ratio']),
                status=values['status'],
            ))
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"{path}:{line_no}: {e}") from e
    return records
