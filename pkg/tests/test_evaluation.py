import os
import tempfile
import unittest

import cv2
import numpy as np

from datasets import DatasetManifest, load_images, synth_dataset
from descriptors import encode
from evaluation import (IDENTITY_TOLERANCE, BenchmarkRecord, RecordStatus, SweepConfig, TimingSample, evaluate,
                        format_records_csv, keypoint_census, load_originals, peak_resolutions, read_records_csv,
                        sweep, tradeoff_ratio, weighted_average_accuracy, write_records_csv)
from imaging import CANONICAL_LADDER, Resolution, perturb_brightness, synth_image
from matching import similarity
from vpr_errors import ConfigError, EmptyGroup, NoKeypoints, ImageTooSmall, ZeroTime

SLOW = os.environ.get("VPRKIT_SLOW_TESTS") == "1"


def make_record(technique="hog", dataset="synth", side=64, n_correct=3, n_query=4, t_e=0.0015, t_m=0.0005,
                status=RecordStatus.OK):
    timing = TimingSample.of(t_e, t_m)
    accuracy = n_correct / n_query
    ratio = accuracy / timing.t_vpr if accuracy else 0.0
    return BenchmarkRecord(technique, dataset, Resolution(side), accuracy, n_correct, n_query, timing, ratio,
                           status)


def oracle_correct(manifest, technique, queries, references):
    """Independent re-count: encode everything, score every pair, take the first maximum."""
    def try_encode(image):
        try:
            return encode(image, technique)
        except (NoKeypoints, ImageTooSmall):
            return None

    encoded_refs = [try_encode(image) for image in references]
    correct = 0
    for q, image in enumerate(queries):
        descriptor = try_encode(image)
        if descriptor is None or all(r is None for r in encoded_refs):
            continue
        scores = [similarity(descriptor, r) if r is not None else -np.inf for r in encoded_refs]
        if int(np.argmax(scores)) in manifest.ground_truth[q]:
            correct += 1
    return correct


class EvaluateOracleTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.manifest = synth_dataset(os.path.join(cls.tmp.name, "oracle"), n=20, side=128, seed=42, distractors=3)
        cls.queries = load_images(cls.manifest.query_paths)
        cls.references = load_images(cls.manifest.reference_paths)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_accuracy_matches_independent_count(self):
        for technique in ("hog", "gist", "cohog", "orb"):
            record = evaluate(self.manifest, technique, Resolution(128),
                              originals=(self.queries, self.references))
            expected = oracle_correct(self.manifest, technique, self.queries, self.references)

            self.assertEqual(expected, record.n_correct, technique)
            self.assertEqual(20, record.n_query)
            self.assertAlmostEqual(expected / 20, record.accuracy, delta=1e-12)

    def test_timing_identity(self):
        record = evaluate(self.manifest, "hog", Resolution(64), repetitions=3,
                          originals=(self.queries, self.references))
        self.assertEqual(record.timing.t_e + record.timing.t_m, record.timing.t_vpr)
        self.assertAlmostEqual(record.encode_ms + record.match_ms, record.vpr_ms, delta=1e-9)
        self.assertGreater(record.timing.t_vpr, 0.0)
        self.assertAlmostEqual(record.accuracy / record.timing.t_vpr, record.ratio, delta=1e-9)

    def test_loads_images_when_not_given(self):
        record = evaluate(self.manifest, "hog", Resolution(32))
        self.assertEqual("oracle", record.dataset)
        self.assertEqual(Resolution(32), record.resolution)

    def test_restores_opencv_thread_count(self):
        previous = cv2.getNumThreads()
        self.addCleanup(cv2.setNumThreads, previous)
        cv2.setNumThreads(2)
        expected = cv2.getNumThreads()

        evaluate(self.manifest, "hog", Resolution(32), originals=(self.queries, self.references))

        self.assertEqual(expected, cv2.getNumThreads())

    def test_invalid_repetitions(self):
        with self.assertRaises(ConfigError):
            evaluate(self.manifest, "hog", Resolution(32), repetitions=0,
                     originals=(self.queries, self.references))


class SelfMatchTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.manifest = synth_dataset(os.path.join(cls.tmp.name, "same"), n=4, side=256, seed=11, perturb=False)
        cls.originals = (load_images(cls.manifest.query_paths), load_images(cls.manifest.reference_paths))

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_identical_pairs_are_found(self):
        for technique in ("hog", "gist", "cohog"):
            for side in (64, 128):
                record = evaluate(self.manifest, technique, Resolution(side), originals=self.originals)
                self.assertEqual(1.0, record.accuracy, f"{technique} at {side}")

        record = evaluate(self.manifest, "orb", Resolution(256), originals=self.originals)
        self.assertEqual(1.0, record.accuracy)
        self.assertEqual(RecordStatus.OK, record.status)

    def test_orb_inapplicable_at_small_sides(self):
        for side in (16, 32):
            record = evaluate(self.manifest, "orb", Resolution(side), originals=self.originals)

            self.assertEqual(RecordStatus.INAPPLICABLE, record.status)
            self.assertEqual(0.0, record.accuracy)
            self.assertEqual(0.0, record.ratio)
            self.assertEqual(4, record.n_inapplicable)


@unittest.skipUnless(SLOW, "set VPRKIT_SLOW_TESTS=1 to run the full-ladder checks")
class FullLadderTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.manifest = synth_dataset(os.path.join(cls.tmp.name, "ladder"), n=10, side=1024, seed=21,
                                     distractors=0, perturb=False)
        cls.originals = load_originals(cls.manifest)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_identical_pairs_are_found_at_every_resolution_from_64(self):
        for technique in ("hog", "gist", "cohog"):
            for resolution in CANONICAL_LADDER[2:]:
                record = evaluate(self.manifest, technique, resolution, originals=self.originals)
                self.assertEqual(1.0, record.accuracy, f"{technique} at {resolution.label}")

        for resolution in CANONICAL_LADDER[4:]:
            record = evaluate(self.manifest, "orb", resolution, originals=self.originals)
            self.assertEqual(1.0, record.accuracy, f"orb at {resolution.label}")

    def test_every_record_of_a_full_sweep_keeps_the_timing_identity(self):
        records = sweep(self.manifest, SweepConfig(timing_repetitions=1), self.originals)

        self.assertEqual(28, len(records))
        for record in records:
            timing = record.timing
            self.assertLessEqual(abs(timing.t_vpr - (timing.t_e + timing.t_m)), IDENTITY_TOLERANCE)


class PermutationTests(unittest.TestCase):
    def test_reordering_references_keeps_accuracy(self):
        references = [synth_image("scene", 256, 300 + i) for i in range(6)]
        queries = [perturb_brightness(references[i], 0.9, 0.03) for i in range(4)]
        order = [3, 5, 0, 4, 1, 2]
        position = {old: new for new, old in enumerate(order)}

        manifest = DatasetManifest("perm", tuple(f"q{i}" for i in range(4)), tuple(f"r{i}" for i in range(6)),
                                   {i: frozenset([i]) for i in range(4)})
        shuffled = DatasetManifest("perm", manifest.query_paths, manifest.reference_paths,
                                   {i: frozenset([position[i]]) for i in range(4)})

        for technique in ("hog", "gist", "cohog"):
            before = evaluate(manifest, technique, Resolution(64), originals=(queries, references))
            after = evaluate(shuffled, technique, Resolution(64),
                             originals=(queries, [references[i] for i in order]))
            self.assertEqual(before.n_correct, after.n_correct, technique)


class MapRemappingTests(unittest.TestCase):
    def test_failed_references_are_skipped_without_shifting_indices(self):
        s1 = synth_image("scene", 256, 1)
        s2 = synth_image("scene", 256, 2)
        flat = synth_image("constant", 256)
        manifest = DatasetManifest("mem", ("q0", "q1", "q2"), ("r0", "r1", "r2"),
                                   {0: frozenset([1]), 1: frozenset([2]), 2: frozenset([0])})

        record = evaluate(manifest, "orb", Resolution(256), originals=([s1, s2, flat], [flat, s1, s2]))

        self.assertEqual(2, record.n_correct)
        self.assertEqual(1, record.n_inapplicable)
        self.assertEqual(RecordStatus.OK, record.status)

    def test_image_list_must_match_manifest(self):
        manifest = DatasetManifest("mem", ("q0",), ("r0",), {0: frozenset([0])})
        image = synth_image("scene", 64, 1)
        with self.assertRaises(ValueError):
            evaluate(manifest, "hog", Resolution(64), originals=([image, image], [image]))


class SweepTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.manifest = synth_dataset(os.path.join(cls.tmp.name, "sweep"), n=3, side=64, seed=4)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_technique_major_ascending_resolution(self):
        config = SweepConfig(resolutions=(Resolution(64), Resolution(16), Resolution(32)),
                             techniques=("hog", "cohog"), timing_repetitions=1)

        records = sweep(self.manifest, config)

        self.assertEqual([("hog", 16), ("hog", 32), ("hog", 64), ("cohog", 16), ("cohog", 32), ("cohog", 64)],
                         [(r.technique, r.resolution.side) for r in records])

    def test_parallel_jobs_give_same_results(self):
        base = dict(resolutions=(Resolution(16), Resolution(64)), techniques=("hog", "gist", "orb"),
                    timing_repetitions=1)
        serial = sweep(self.manifest, SweepConfig(**base))
        parallel = sweep(self.manifest, SweepConfig(jobs=2, **base))

        self.assertEqual([(r.technique, r.resolution, r.n_correct, r.status) for r in serial],
                         [(r.technique, r.resolution, r.n_correct, r.status) for r in parallel])

    def test_uses_given_images(self):
        images = [synth_image("scene", 64, 1), synth_image("scene", 64, 2)]
        manifest = DatasetManifest("mem", ("missing/q0.png", "missing/q1.png"),
                                   ("missing/r0.png", "missing/r1.png"), {0: frozenset([0]), 1: frozenset([1])})
        config = SweepConfig(resolutions=(Resolution(32),), techniques=("hog",), timing_repetitions=1)

        records = sweep(manifest, config, (images, images))

        self.assertEqual(2, records[0].n_correct)

    def test_config_validation(self):
        with self.assertRaises(ConfigError):
            SweepConfig(techniques=("hog", "sift"))
        with self.assertRaises(ConfigError):
            SweepConfig(techniques=("hog", "hog"))
        with self.assertRaises(ConfigError):
            SweepConfig(resolutions=())
        with self.assertRaises(ConfigError):
            SweepConfig(jobs=0)
        with self.assertRaises(ConfigError):
            SweepConfig(timing_repetitions=0)


class MetricTests(unittest.TestCase):
    def test_weighted_accuracy(self):
        records = [make_record(dataset="a", n_correct=100, n_query=100),
                   make_record(dataset="b", n_correct=0, n_query=300)]
        self.assertAlmostEqual(0.25, weighted_average_accuracy(records)[("hog", Resolution(64))], delta=1e-12)

    def test_weighted_accuracy_needs_records(self):
        with self.assertRaises(EmptyGroup):
            weighted_average_accuracy([])

    def test_ratio(self):
        self.assertAlmostEqual(2.0, tradeoff_ratio(make_record(n_correct=1, n_query=2, t_e=0.2, t_m=0.05)))
        self.assertEqual(0.0, tradeoff_ratio(make_record(n_correct=0, n_query=2, t_e=0.0, t_m=0.0)))
        with self.assertRaises(ZeroTime):
            tradeoff_ratio(BenchmarkRecord("hog", "d", Resolution(16), 0.5, 1, 2, TimingSample.of(0.0, 0.0), 0.0))

    def test_record_invariants(self):
        with self.assertRaises(ValueError):
            BenchmarkRecord("hog", "d", Resolution(16), 0.4, 1, 2, TimingSample.of(0.1, 0.1), 1.0)
        with self.assertRaises(ValueError):
            TimingSample(0.1, 0.1, 0.3)

    def test_peaks(self):
        records = [make_record(side=16, n_correct=2, n_query=4, t_e=0.04, t_m=0.01),
                   make_record(side=32, n_correct=3, n_query=4, t_e=0.1, t_m=0.05),
                   make_record(side=64, n_correct=3, n_query=4, t_e=0.5, t_m=0.25)]

        peak = peak_resolutions(records)["hog"]

        self.assertEqual(Resolution(32), peak.accuracy_resolution)
        self.assertAlmostEqual(0.75, peak.accuracy)
        self.assertEqual(Resolution(16), peak.ratio_resolution)
        self.assertAlmostEqual(10.0, peak.ratio)

    def test_keypoint_census(self):
        images = [synth_image("constant", 64), synth_image("checkerboard", 256)]

        census = keypoint_census(images, [Resolution(256), Resolution(16)])

        self.assertEqual([Resolution(16), Resolution(256)], list(census))
        self.assertEqual((0, 0), census[Resolution(16)])
        self.assertEqual(0, census[Resolution(256)][0])
        self.assertGreaterEqual(census[Resolution(256)][1], 1)


class RecordsCsvTests(unittest.TestCase):
    def test_format(self):
        text = format_records_csv([make_record()])
        self.assertEqual(
            "technique,dataset,resolution,accuracy,n_correct,n_query,encode_ms,match_ms,vpr_ms,ratio,status\n"
            "hog,synth,64x64,0.750,3,4,1.500,0.500,2.000,375.0000,ok\n", text)

    def test_inapplicable_row(self):
        record = make_record(technique="orb", side=16, n_correct=0, status=RecordStatus.INAPPLICABLE)
        row = format_records_csv([record], header=False).strip().split(",")
        self.assertEqual(["orb", "synth", "16x16", "0.000", "0", "4"], row[:6])
        self.assertEqual(["0.0000", "technique-inapplicable"], row[-2:])

    def test_round_trip(self):
        records = [make_record(), make_record(technique="gist", side=128, n_correct=4)]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "results.csv")
            write_records_csv(records, path)
            loaded = read_records_csv(path)

        self.assertEqual([(r.technique, r.dataset, r.resolution, r.n_correct, r.n_query, r.status) for r in records],
                         [(r.technique, r.dataset, r.resolution, r.n_correct, r.n_query, r.status) for r in loaded])
        self.assertAlmostEqual(2.0, loaded[0].vpr_ms, delta=1e-9)

    def test_rejects_foreign_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "other.csv")
            with open(path, "w", encoding="utf-8") as f:
                f.write("a,b\n1,2\n")
            with self.assertRaises(ConfigError):
                read_records_csv(path)


if __name__ == "__main__":
    unittest.main()
