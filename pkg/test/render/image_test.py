#!/usr/bin/env python3

import tempfile
import unittest
from pathlib import Path

import numpy as np
from PIL import Image

from render.image import ImageBuffer, ImageSpec, Palette, ppm_bytes, read_ppm, write_png, write_ppm
from util.errors import InvalidParams, OutputError


class TestPpm(unittest.TestCase):
    def test_single_white_pixel(self):
        data = ppm_bytes(ImageBuffer.blank(1, 1, (255, 255, 255)))
        self.assertEqual(data, bytes.fromhex("50 36 0A 31 20 31 0A 32 35 35 0A FF FF FF"))

    def test_row_major(self):
        pixels = np.array([[[255, 0, 0], [0, 0, 255]]], dtype=np.uint8)
        self.assertEqual(ppm_bytes(ImageBuffer(2, 1, pixels)), b"P6\n2 1\n255\n\xff\x00\x00\x00\x00\xff")

    def test_file_round_trip(self):
        rng = np.random.default_rng(5)
        buf = ImageBuffer(4, 3, rng.integers(0, 256, (3, 4, 3), dtype=np.uint8))
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "fig.ppm"
            write_ppm(buf, path)
            back = read_ppm(path)
        self.assertEqual((back.width, back.height), (4, 3))
        self.assertTrue(np.array_equal(back.pixels, buf.pixels))

    def test_bad_files(self):
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "bad.ppm"
            path.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
            with self.assertRaises(OutputError):
                read_ppm(path)
            path.write_bytes(b"P6\n2 2\n255\n\x00\x00\x00")
            with self.assertRaises(OutputError):
                read_ppm(path)
            with self.assertRaises(OutputError):
                write_ppm(ImageBuffer.blank(1, 1), Path(d) / "missing" / "fig.ppm")

    def test_png(self):
        buf = ImageBuffer.blank(3, 2, (1, 2, 3))
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "fig.png"
            write_png(buf, path)
            with Image.open(path) as im:
                self.assertEqual(im.size, (3, 2))
                self.assertTrue(np.array_equal(np.asarray(im.convert("RGB")), buf.pixels))

    def test_shape_mismatch(self):
        with self.assertRaises(InvalidParams):
            ImageBuffer(2, 2, np.zeros((1, 2, 3), dtype=np.uint8))


class TestImageSpec(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(InvalidParams):
            ImageSpec((-1.0, 1.0, -1.0, 1.0), 0, 4)
        with self.assertRaises(InvalidParams):
            ImageSpec((1.0, 1.0, -1.0, 1.0), 4, 4)
        with self.assertRaises(InvalidParams):
            ImageSpec((-1.0, 1.0, -1.0, 1.0), 4, 4, max_iter=0)

    def test_from_params(self):
        img = ImageSpec.from_params(width=8, height=4, max_iter=None)
        self.assertEqual((img.width, img.height, img.max_iter), (8, 4, 200))
        self.assertEqual(img.window, (-2.0, 2.0, -2.0, 2.0))
        self.assertEqual(img.pixel_size, (0.5, 1.0))


class TestPalette(unittest.TestCase):
    def test_escape_gradient(self):
        p = Palette()
        colours = p.escape(np.array([0.0, 1.0, 2.0]))
        self.assertEqual(tuple(colours[0]), p.escape_light)
        self.assertEqual(tuple(colours[1]), p.escape_dark)
        self.assertEqual(tuple(colours[2]), p.escape_dark)

    def test_basin_shades_cycle(self):
        p = Palette()
        self.assertEqual(p.basin(len(p.basin_shades)), p.basin(0))

    def test_config(self):
        self.assertEqual(Palette.from_params().error, (255, 0, 0))


if __name__ == "__main__":
    unittest.main()
