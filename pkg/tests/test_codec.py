import os
import struct
import tempfile
import unittest

import numpy as np

from descriptors import DenseDescriptor, KeypointDescriptor, RegionalDescriptor, encode_hog
from descriptors.codec import (MAGIC, from_bytes, from_json, load_descriptor, save_descriptor, to_bytes,
                               to_json)
from imaging import synth_image
from vpr_errors import DescriptorFormatError, ImageIoError


def sample_descriptors():
    rng = np.random.default_rng(3)
    return [
        DenseDescriptor("gist", rng.random(512)),
        RegionalDescriptor("cohog", [[8.0, 8.0], [24.0, 40.0]], rng.random((2, 8))),
        KeypointDescriptor("orb", rng.random((3, 2)) * 100, rng.random(3) * 6.0,
                           rng.integers(0, 256, size=(3, 32), dtype=np.uint8)),
    ]


class BinaryCodecTests(unittest.TestCase):
    def test_round_trip_every_kind(self):
        for descriptor in sample_descriptors():
            self.assertEqual(descriptor, from_bytes(to_bytes(descriptor)), descriptor.kind)

    def test_header(self):
        data = to_bytes(sample_descriptors()[0])
        self.assertEqual(MAGIC, data[:4])
        self.assertEqual(1, struct.unpack("<H", data[4:6])[0])

    def test_bad_magic(self):
        data = bytearray(to_bytes(sample_descriptors()[0]))
        data[0:4] = b"XXXX"
        with self.assertRaises(DescriptorFormatError):
            from_bytes(bytes(data))

    def test_bad_version(self):
        data = bytearray(to_bytes(sample_descriptors()[0]))
        data[4:6] = struct.pack("<H", 99)
        with self.assertRaises(DescriptorFormatError):
            from_bytes(bytes(data))

    def test_truncated(self):
        data = to_bytes(sample_descriptors()[1])
        for cut in (3, 9, len(data) - 1):
            with self.assertRaises(DescriptorFormatError):
                from_bytes(data[:cut])

    def test_trailing_bytes(self):
        with self.assertRaises(DescriptorFormatError):
            from_bytes(to_bytes(sample_descriptors()[2]) + b"\x00")

    def test_unknown_kind_code(self):
        data = bytearray(to_bytes(sample_descriptors()[0]))
        data[6] = 7
        with self.assertRaises(DescriptorFormatError):
            from_bytes(bytes(data))


class JsonCodecTests(unittest.TestCase):
    def test_round_trip_every_kind(self):
        for descriptor in sample_descriptors():
            self.assertEqual(descriptor, from_json(to_json(descriptor)), descriptor.kind)

    def test_malformed(self):
        for text in ("not json", '{"format": "other"}',
                     '{"format": "vprkit-descriptor", "version": 1, "kind": "dense"}',
                     '{"format": "vprkit-descriptor", "version": 1, "kind": "blob", "technique": "hog"}'):
            with self.assertRaises(DescriptorFormatError):
                from_json(text)


class DescriptorFileTests(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_hog_file_size(self):
        path = os.path.join(self.tmp.name, "q.vprd")
        descriptor = encode_hog(synth_image("scene", 64, 1))
        save_descriptor(descriptor, path)

        self.assertEqual(8 + 4 + 144 * 8, os.path.getsize(path))
        self.assertEqual(descriptor, load_descriptor(path))

    def test_json_by_extension(self):
        path = os.path.join(self.tmp.name, "q.json")
        descriptor = sample_descriptors()[1]
        save_descriptor(descriptor, path)

        with open(path, "r", encoding="utf-8") as f:
            self.assertTrue(f.read().startswith("{"))
        self.assertEqual(descriptor, load_descriptor(path))

    def test_missing_file(self):
        with self.assertRaises(ImageIoError):
            load_descriptor(os.path.join(self.tmp.name, "missing.vprd"))


if __name__ == "__main__":
    unittest.main()
