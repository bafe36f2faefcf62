"""Test for spreadcore.output module."""
import os
import tempfile
import unittest

import numpy as np

from spreadcore.exceptions import InvalidInvocation
from spreadcore.fronts import LevelTrack
from spreadcore.output import (
    OutputDirectory,
    plot_front,
    write_csv,
    write_level_tracks,
    write_text,
)


class OutputTestCase(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.target = os.path.join(self.directory.name, "run")

    def tearDown(self):
        self.directory.cleanup()


class OutputDirectoryTest(OutputTestCase):
    def test_publish(self):
        with OutputDirectory(self.target) as out:
            staged = out.path("report.txt")
            write_text(staged, "done\n")
            self.assertFalse(os.path.exists(self.target))
        with open(os.path.join(self.target, "report.txt"), newline="") as stream:
            self.assertEqual("done\n", stream.read())
        self.assertEqual(["run"], os.listdir(self.directory.name))

    def test_discard_on_error(self):
        with self.assertRaises(ValueError):
            with OutputDirectory(self.target) as out:
                write_text(out.path("partial.txt"), "half")
                raise ValueError("stop")
        self.assertEqual([], os.listdir(self.directory.name))

    def test_existing_target(self):
        os.mkdir(self.target)
        with self.assertRaises(InvalidInvocation):
            with OutputDirectory(self.target):
                pass
        with OutputDirectory(self.target, force=True) as out:
            write_text(out.path("new.txt"), "")
        self.assertEqual(["new.txt"], os.listdir(self.target))

    def test_path__not_open(self):
        with self.assertRaises(InvalidInvocation):
            OutputDirectory(self.target).path("x.csv")


class WriteCsvTest(OutputTestCase):
    def test_write_csv(self):
        path = os.path.join(self.directory.name, "values.csv")
        write_csv(
            path,
            "demo",
            ("key", "value"),
            [("ratio", 0.1), ("flag", np.bool_(False)), ("empty", None), ("n", 3)],
        )
        with open(path, newline="") as stream:
            self.assertEqual(
                "# spreadcore demo schema=1\nkey,value\nratio,0.1\nflag,false\n"
                "empty,\nn,3\n",
                stream.read(),
            )

    def test_write_level_tracks__skips_missing_positions(self):
        track = LevelTrack(
            level=0.5,
            times=np.array([0.0, 1.0]),
            positions=np.array([np.nan, 2.5]),
            slope=1.0,
            intercept=1.5,
            r2=1.0,
        )
        path = os.path.join(self.directory.name, "levels.csv")
        write_level_tracks(path, [track])
        with open(path) as stream:
            lines = stream.read().splitlines()
        self.assertEqual(["level,t,position", "0.5,1.0,2.5"], lines[1:])


class PlotFrontTest(OutputTestCase):
    def test_plot_front(self):
        times = np.arange(0.0, 21.0)
        tracks = [
            LevelTrack(
                level=level,
                times=times,
                positions=1.1 * times + offset,
                slope=1.1,
                intercept=offset,
                r2=1.0,
            )
            for level, offset in ((0.99, -3.0), (0.01, 3.0))
        ]
        path = os.path.join(self.directory.name, "front.svg")
        plot_front(path, tracks, 1.147)
        with open(path) as stream:
            text = stream.read()
        self.assertIn("<svg", text)
        self.assertIn("linear speed 1.1470", text)
