import os
import tempfile
import unittest

import cv2
import numpy as np

from imaging import (CANONICAL_LADDER, GrayImage, Resolution, load_image, parse_resolutions, resize,
                     save_image, synth_image)
from vpr_errors import ConfigError, ImageFormatError, ImageIoError


class GrayImageTests(unittest.TestCase):
    def test_pixels_are_read_only_copy(self):
        source = np.full((3, 4), 0.25)
        image = GrayImage(source)
        source[0, 0] = 0.9

        self.assertEqual(0.25, image.pixels[0, 0])
        self.assertEqual((4, 3), (image.width, image.height))
        with self.assertRaises(ValueError):
            image.pixels[0, 0] = 1.0

    def test_rejects_out_of_range_and_non_finite(self):
        with self.assertRaises(ImageFormatError):
            GrayImage(np.array([[0.0, 1.5]]))
        with self.assertRaises(ImageFormatError):
            GrayImage(np.array([[0.0, np.nan]]))
        with self.assertRaises(ImageFormatError):
            GrayImage(np.zeros((0, 4)))

    def test_as_uint8_rounds(self):
        image = GrayImage(np.array([[0.0, 0.5, 1.0]]))
        self.assertEqual([0, 128, 255], image.as_uint8().ravel().tolist())


class ResolutionTests(unittest.TestCase):
    def test_canonical_ladder(self):
        self.assertEqual([16, 32, 64, 128, 256, 512, 1024], [r.side for r in CANONICAL_LADDER])
        self.assertEqual("64x64", Resolution(64).label)

    def test_parse_forms(self):
        self.assertEqual(Resolution(64), Resolution.parse("64"))
        self.assertEqual(Resolution(64), Resolution.parse("64x64"))
        self.assertEqual([Resolution(16), Resolution(32)], parse_resolutions("16, 32x32"))
        for bad in ("64x32", "zero", "0", "-4", ""):
            with self.assertRaises(ConfigError):
                Resolution.parse(bad)


class LoadImageTests(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_white_png_maps_to_one(self):
        path = self._path("white.png")
        cv2.imwrite(path, np.full((2, 2, 3), 255, dtype=np.uint8))

        image = load_image(path)

        self.assertEqual((2, 2), (image.width, image.height))
        np.testing.assert_array_equal(np.ones((2, 2)), image.pixels)

    def test_red_pixel_uses_luma_weights(self):
        path = self._path("red.png")
        bgr = np.zeros((1, 1, 3), dtype=np.uint8)
        bgr[0, 0, 2] = 255
        cv2.imwrite(path, bgr)

        self.assertAlmostEqual(0.299, load_image(path).pixels[0, 0], delta=1e-6)

    def test_bgra_alpha_is_ignored(self):
        path = self._path("rgba.png")
        bgra = np.zeros((1, 1, 4), dtype=np.uint8)
        bgra[0, 0] = (255, 0, 0, 10)  # blue, mostly transparent
        cv2.imwrite(path, bgra)

        self.assertAlmostEqual(0.114, load_image(path).pixels[0, 0], delta=1e-6)

    def test_sixteen_bit_gray(self):
        path = self._path("deep.png")
        cv2.imwrite(path, np.full((2, 3), 65535, dtype=np.uint16))
        np.testing.assert_array_equal(np.ones((2, 3)), load_image(path).pixels)

    def test_truncated_file_is_format_error(self):
        good = self._path("good.png")
        cv2.imwrite(good, np.full((32, 32), 100, dtype=np.uint8))
        with open(good, "rb") as f:
            head = f.read(20)
        bad = self._path("truncated.png")
        with open(bad, "wb") as f:
            f.write(head)

        with self.assertRaises(ImageFormatError):
            load_image(bad)

    def test_missing_file_is_io_error(self):
        with self.assertRaises(ImageIoError):
            load_image(self._path("nope.png"))

    def test_save_load_round_trip_within_one_level(self):
        image = synth_image("seeded-noise", 24, 3)
        path = self._path("noise.png")
        save_image(image, path)

        loaded = load_image(path)

        self.assertLessEqual(np.max(np.abs(loaded.pixels - image.pixels)), 1.0 / 255.0)

    def test_non_ascii_path(self):
        path = self._path("图像.png")
        save_image(synth_image("vertical-edge", 8), path)
        self.assertEqual(1.0, load_image(path).pixels[0, 7])


class ResizeTests(unittest.TestCase):
    def test_constant_preserved_exactly(self):
        constant = GrayImage(np.full((4, 4), 0.5))
        np.testing.assert_array_equal(np.full((2, 2), 0.5), resize(constant, Resolution(2)).pixels)

        odd = GrayImage(np.full((5, 3), 0.37))
        for side in (1, 4, 7, 64):
            out = resize(odd, Resolution(side))
            self.assertTrue(np.all(out.pixels == 0.37), side)

    def test_area_average_of_four_pixels(self):
        image = GrayImage(np.array([[0.0, 0.0], [1.0, 1.0]]))
        self.assertAlmostEqual(0.5, resize(image, Resolution(1)).pixels[0, 0], delta=1e-6)

    def test_bilinear_enlarge_uses_half_pixel_centres(self):
        image = GrayImage(np.array([[0.0, 1.0], [0.0, 1.0]]))
        out = resize(image, Resolution(4))
        np.testing.assert_allclose([0.0, 0.25, 0.75, 1.0], out.pixels[0], atol=1e-6)

    def test_downscale_matches_block_mean(self):
        image = synth_image("scene", 512, 11)
        out = resize(image, Resolution(16))

        oracle = image.pixels.reshape(16, 32, 16, 32).mean(axis=(1, 3))

        np.testing.assert_allclose(oracle, out.pixels, atol=1e-6)
        self.assertLess(abs(out.mean() - image.mean()), 0.05)

    def test_idempotent_at_fixed_target(self):
        image = synth_image("seeded-noise", 100, 5)
        once = resize(image, Resolution(64))
        twice = resize(once, Resolution(64))
        np.testing.assert_array_equal(once.pixels, twice.pixels)

    def test_shrinks_one_axis_while_growing_the_other(self):
        row = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 0.2, 0.4]
        image = GrayImage(np.array([row, row]))

        out = resize(image, Resolution(4))

        np.testing.assert_allclose(np.tile([0.1, 0.5, 0.9, 0.3], (4, 1)), out.pixels, atol=1e-6)

    def test_non_square_input_becomes_square(self):
        image = GrayImage(np.random.default_rng(0).random((30, 50)))
        out = resize(image, Resolution(40))
        self.assertEqual((40, 40), (out.width, out.height))


class SynthImageTests(unittest.TestCase):
    def test_constant(self):
        np.testing.assert_array_equal(np.full((16, 16), 0.5), synth_image("constant", 16, 9).pixels)

    def test_vertical_edge(self):
        pixels = synth_image("vertical-edge", 16).pixels
        self.assertTrue(np.all(pixels[:, :8] == 0.0))
        self.assertTrue(np.all(pixels[:, 8:] == 1.0))

    def test_seeded_noise_is_deterministic(self):
        a = synth_image("seeded-noise", 8, 7)
        b = synth_image("seeded-noise", 8, 7)
        c = synth_image("seeded-noise", 8, 8)
        np.testing.assert_array_equal(a.pixels, b.pixels)
        self.assertFalse(np.array_equal(a.pixels, c.pixels))

    def test_checkerboard_has_grey_frame(self):
        pixels = synth_image("checkerboard", 256).pixels
        self.assertEqual(0.5, pixels[0, 0])
        self.assertEqual(0.5, pixels[250, 100])
        self.assertEqual(1.0, pixels[40, 40])
        self.assertEqual(0.0, pixels[40, 72])

    def test_scene_is_deterministic_and_in_range(self):
        a = synth_image("scene", 96, 4)
        b = synth_image("scene", 96, 4)
        np.testing.assert_array_equal(a.pixels, b.pixels)
        self.assertGreater(a.pixels.std(), 0.05)

    def test_unknown_kind(self):
        with self.assertRaises(ConfigError):
            synth_image("stripes", 16)


if __name__ == "__main__":
    unittest.main()
