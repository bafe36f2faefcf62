"""CSV and SVG emission into atomically published output directories."""
import csv
import logging
import os
import shutil
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .const import CSV_SCHEMA_VERSION  # noqa: E402
from .exceptions import InvalidInvocation  # noqa: E402
from .util import format_value  # noqa: E402

log = logging.getLogger(__package__)

SPEED_HEADER = ("mu", "lambda", "ratio")
TRAJECTORY_HEADER = ("t", "x", "u", "v_transformed", "v_original")
LEVEL_HEADER = ("level", "t", "position")
ORBIT_HEADER = ("species", "t", "x", "value")
SWEEP_HEADER = ("value", "c_star", "mu_star", "verdict", "error")
REPORT_HEADER = ("key", "value")


class OutputDirectory(object):
    """A directory that appears under its final name only once complete."""

    def __init__(self, target, force=False):
        """Initialize the output directory.

        :param target: The final directory path.
        :param force: (Optional) Replace an existing directory. (Default: False)

        """
        self.target = os.path.abspath(target)
        self.force = force
        self._staging = None

    def __enter__(self):
        """Create the staging directory next to the target."""
        if os.path.exists(self.target) and not self.force:
            raise InvalidInvocation(
                f"{self.target} exists; pass --force to replace it"
            )
        parent = os.path.dirname(self.target)
        os.makedirs(parent, exist_ok=True)
        name = os.path.basename(self.target)
        self._staging = tempfile.mkdtemp(prefix=f".{name}-", dir=parent)
        return self

    def __exit__(self, exc_type, *_args):
        """Publish the staging directory, or discard it on error."""
        if exc_type is not None:
            shutil.rmtree(self._staging, ignore_errors=True)
            return
        if os.path.exists(self.target):
            shutil.rmtree(self.target)
        os.rename(self._staging, self.target)
        log.info(f"Wrote {self.target}")

    def path(self, name):
        """Return the staging path of file ``name``."""
        if self._staging is None:
            raise InvalidInvocation("output directory is not open")
        return os.path.join(self._staging, name)


def write_csv(path, kind, header, rows):
    """Write a versioned CSV file.

    The first line is ``# spreadcore <kind> schema=<n>``, the second the
    header; every value goes through :func:`.format_value`.

    """
    with open(path, "w", newline="") as stream:
        stream.write(f"# spreadcore {kind} schema={CSV_SCHEMA_VERSION}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])


def write_speed_samples(path, result):
    """Write the ``(mu, lambda, ratio)`` samples of a :class:`.SpeedResult`."""
    write_csv(path, "speed", SPEED_HEADER, result.rows())


def write_trajectory(path, rows):
    """Write front trajectory rows."""
    write_csv(path, "trajectory", TRAJECTORY_HEADER, rows)


def write_level_tracks(path, tracks):
    """Write the positions of every :class:`.LevelTrack`."""
    rows = [row for track in tracks for row in track.rows()]
    write_csv(path, "levels", LEVEL_HEADER, rows)


def write_orbits(path, h, orbits):
    """Write ``(species, t, x, value)`` rows of the periodic orbits.

    :param orbits: Mapping of species index to :class:`.PeriodicOrbit`.

    """
    rows = []
    for species, orbit in sorted(orbits.items()):
        nt, nx = orbit.values.shape
        for k in range(nt):
            for j in range(nx):
                rows.append(
                    [species, h.T * k / nt, h.p * j / nx, float(orbit.values[k, j])]
                )
    write_csv(path, "orbits", ORBIT_HEADER, rows)


def write_sweep(path, rows):
    """Write sweep rows."""
    write_csv(path, "sweep", SWEEP_HEADER, rows)


def write_report(path, kind, rows):
    """Write ``(key, value)`` report rows."""
    write_csv(path, kind, REPORT_HEADER, rows)


def write_text(path, text):
    """Write a plain-text report with LF line endings."""
    with open(path, "w", newline="") as stream:
        stream.write(text)


def plot_front(path, tracks, c_bar=None):
    """Write an SVG of front positions over time.

    Each level track is drawn with its fitted line over the fit window; the
    linear speed ``c_bar`` is drawn as a reference line through the middle of
    the first fit.

    """
    figure, axes = plt.subplots(figsize=(8, 6))
    try:
        for track in tracks:
            axes.plot(track.times, track.positions, label=f"level {track.level}")
            window = track.times[track.times >= 0.5 * track.times[-1]]
            axes.plot(
                window,
                track.slope * window + track.intercept,
                linestyle="--",
                label=f"fit {track.level}: slope {track.slope:.4f}",
            )
        if c_bar is not None and tracks:
            track = tracks[0]
            middle = 0.75 * track.times[-1]
            anchor = track.slope * middle + track.intercept
            times = np.asarray(track.times)
            axes.plot(
                times,
                anchor + c_bar * (times - middle),
                color="black",
                linestyle=":",
                label=f"linear speed {c_bar:.4f}",
            )
        axes.set_xlabel("t")
        axes.set_ylabel("front position (x . xi)")
        axes.legend(loc="upper left")
        with plt.rc_context({"svg.hashsalt": "spreadcore"}):
            figure.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(figure)
