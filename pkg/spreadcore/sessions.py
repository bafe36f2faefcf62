"""Provides the high-level interface to one habitat configuration."""
import logging
from dataclasses import dataclass, field

from .const import DEFAULT_JOBS, LEVEL_HIGH, LEVEL_LOW
from .determinacy import check_HL, determinacy_verdict
from .discretize import CellGrid, LineGrid, sample_kernel
from .evolve import TimeGrid
from .exceptions import (
    ExtinctionDetected,
    HB1Violated,
    InvalidInvocation,
    NoConvergence,
    PoorFit,
    TaskException,
)
from .fronts import (
    behind_front_gap,
    estimate_interval,
    make_front,
    run_front,
    track_levels,
    trajectory_rows,
)
from .habitat import bounds, check_primed_hypotheses, load_config
from .pool import WorkerPool
from .spectral import (
    StabilityReport,
    check_HB1_HB2,
    growth_table,
    periodic_attractor,
    principal_spectrum_point,
    spectrum_point_value,
)
from .speeds import linear_speed, supersolution_C0

log = logging.getLogger(__package__)

EFFECTIVE_COEFFICIENTS = (
    "a1",
    "a2",
    "a1-c1v",
    "a2-b2u",
    "a2-2c2v",
    "a1-2b1u",
)


@dataclass(frozen=True, eq=False)
class CheckReport(object):
    """Bound-based, pointwise and spectral hypothesis verdicts."""

    primed: object
    stability: object
    hl: dict
    errors: dict = field(default_factory=dict)

    @property
    def passed(self):
        """Return ``True`` when (HB1) and both linear (HB2) verdicts hold."""
        return self.stability.hb1 and self.stability.hb2

    def rows(self):
        """Return ``(key, value)`` pairs for reports."""
        rows = [("hb0", True)]
        for name, verdict in self.primed.as_dict().items():
            rows.extend(
                [(name, verdict), (f"{name}_slack", self.primed.slacks[name])]
            )
        rows.extend(self.stability.rows())
        for name, check in self.hl.items():
            rows.extend([(name, check.holds), (f"{name}_slack", check.slack)])
        rows.extend(
            (f"error_{name}", message) for name, message in self.errors.items()
        )
        rows.append(("passed", self.passed))
        return rows


@dataclass(eq=False)
class FrontRun(object):
    """A front simulation with its level tracks and speed estimate."""

    speed: object
    init: object
    trajectory: object
    tracks: list
    interval: object = None
    behind_gap: float = None
    errors: dict = field(default_factory=dict)

    def rows(self):
        """Return ``(key, value)`` pairs for reports."""
        rows = [("c_bar_inf", self.speed.c_star), ("mu_star", self.speed.mu_star)]
        rows.extend(
            (f"slope_{track.level}", track.slope) for track in self.tracks
        )
        if self.interval is not None:
            rows.extend(self.interval.rows())
        rows.append(("behind_front_gap", self.behind_gap))
        rows.extend((f"error_{name}", message) for name, message in self.errors.items())
        return rows


class Session(object):
    """The high-level interface to one habitat configuration."""

    def __init__(self, config, pool=None):
        """Prepare the grids of ``config``.

        :param config: A loaded :class:`.Config`.
        :param pool: (Optional) The :class:`.WorkerPool` for mu grids.
            (Default: an inline pool)

        """
        self.config = config
        self.habitat = config.habitat
        self.settings = config.settings
        self.time_grid = TimeGrid(self.habitat.T, self.settings.nt)
        self.cell = CellGrid(self.habitat.p, self.settings.nx)
        self.kernel = sample_kernel(self.habitat.kernel, self.cell.dx)
        self._pool = pool or WorkerPool(1)
        self._orbits = {}
        self._speeds = {}

    def __enter__(self):
        """Allow this object to be used as a context manager."""
        return self

    def __exit__(self, *_args):
        """Allow this object to be used as a context manager."""
        self.close()

    def close(self):
        """Close the worker pool."""
        self._pool.close()

    def orbit(self, species):
        """Return the cached periodic orbit of ``species``."""
        if species not in self._orbits:
            self._orbits[species] = periodic_attractor(
                self.habitat, species, self.time_grid, self.cell, self.kernel
            )
        return self._orbits[species]

    def steady(self):
        """Return both periodic orbits keyed by species."""
        return {1: self.orbit(1), 2: self.orbit(2)}

    def effective_coefficient(self, coefficient):
        """Return the growth table of a named combination or an expression.

        :param coefficient: One of :data:`EFFECTIVE_COEFFICIENTS`, a coefficient
            name or expression text in the habitat's variables.

        """
        h, grid, cell = self.habitat, self.time_grid, self.cell
        if coefficient not in EFFECTIVE_COEFFICIENTS:
            return growth_table(h, coefficient, grid, cell)

        def table(name):
            return h.evaluate(name, grid.times, cell.nodes)

        if coefficient in ("a1", "a2"):
            return table(coefficient)
        if coefficient == "a1-c1v":
            return table("a1") - table("c1") * self.orbit(2).values
        if coefficient == "a2-b2u":
            return table("a2") - table("b2") * self.orbit(1).values
        if coefficient == "a2-2c2v":
            return table("a2") - 2 * table("c2") * self.orbit(2).values
        return table("a1") - 2 * table("b1") * self.orbit(1).values

    def principal_point(self, xi, mu, coefficient="a1"):
        """Return the :class:`.SpectralResult` of ``coefficient`` at ``(xi, mu)``."""
        return principal_spectrum_point(
            self.habitat,
            xi,
            mu,
            self.effective_coefficient(coefficient),
            self.time_grid,
            self.cell,
            self.kernel,
        )

    def check(self):
        """Return the :class:`CheckReport` of the habitat."""
        settings = self.settings
        samples = self.habitat.sample(settings.check_nt, settings.check_nx)
        primed = check_primed_hypotheses(
            bounds(self.habitat, settings.check_nt, settings.check_nx), samples
        )
        errors, orbits = {}, {}
        for species, name in ((1, "u_star"), (2, "v_star")):
            try:
                orbits[name] = self.orbit(species)
            except (ExtinctionDetected, HB1Violated, NoConvergence) as exc:
                log.warning(f"Check step {name} failed: {exc}")
                errors[name] = f"{type(exc).__name__}: {exc}"
        if errors:
            lambdas = {
                f"lambda_{name}": spectrum_point_value(
                    self.habitat, 1, 0.0, name, self.time_grid, self.cell, self.kernel
                )
                for name in ("a1", "a2")
            }
            stability = StabilityReport(**lambdas)
            return CheckReport(primed=primed, stability=stability, hl={}, errors=errors)
        u_star, v_star = orbits["u_star"], orbits["v_star"]
        stability = check_HB1_HB2(
            self.habitat,
            self.time_grid,
            self.cell,
            self.kernel,
            u_star=u_star,
            v_star=v_star,
            samples=settings.samples,
            seed=settings.seed,
        )
        hl = {
            f"hl{which}": check_HL(self.habitat, u_star, v_star, which)
            for which in (0, 1, 2)
        }
        return CheckReport(primed=primed, stability=stability, hl=hl, errors=errors)

    def speed(self, xi=1):
        """Return the cached linear :class:`.SpeedResult` in direction ``xi``."""
        if xi not in (1, -1):
            raise InvalidInvocation(f"direction must be +1 or -1, not {xi}")
        if xi not in self._speeds:
            self._speeds[xi] = linear_speed(
                self.habitat,
                xi,
                self.time_grid,
                self.cell,
                self.orbit(2),
                self.kernel,
                self._pool.map,
            )
        return self._speeds[xi]

    def supersolution_bound(self, xi=1):
        """Return the super-solution speed bound ``C0`` in direction ``xi``."""
        return supersolution_C0(
            self.habitat,
            xi,
            self.time_grid,
            self.cell,
            self.orbit(1),
            self.orbit(2),
            self.kernel,
        )

    def front(self, xi=1, t_end=None, s0=None, delta=None):
        """Return a :class:`FrontRun` in direction ``xi``.

        :param t_end: (Optional) Run length. (Default: settings ``t_end``)
        :param s0: (Optional) Interface location. (Default: settings)
        :param delta: (Optional) Depression below the orbits. (Default: settings)

        """
        settings = self.settings
        t_end = settings.t_end if t_end is None else t_end
        u_star, v_star = self.orbit(1), self.orbit(2)
        speed = self.speed(xi)
        init = make_front(
            self.habitat,
            xi,
            LineGrid(self.cell, settings.L),
            u_star,
            v_star,
            s0=settings.interface if s0 is None else s0,
            delta=settings.delta if delta is None else delta,
        )
        trajectory = run_front(
            self.habitat,
            xi,
            init,
            t_end,
            self.time_grid,
            self.cell,
            u_star,
            v_star,
            speed.c_star,
            self.kernel,
            settings.stride,
        )
        run = FrontRun(
            speed=speed,
            init=init,
            trajectory=trajectory,
            tracks=track_levels(trajectory, u_star, (LEVEL_HIGH, 0.5, LEVEL_LOW)),
            behind_gap=behind_front_gap(trajectory, u_star, v_star),
        )
        try:
            run.interval = estimate_interval(trajectory, u_star)
        except PoorFit as exc:
            run.errors["interval"] = str(exc)
        return run

    def trajectory_rows(self, run):
        """Return the CSV rows of a :class:`FrontRun`."""
        return trajectory_rows(run.trajectory, self.orbit(2), self.settings.dump_stride)

    def determinacy(self, xi=1, run_fronts=True):
        """Return the :class:`.DeterminacyReport` in direction ``xi``."""
        return determinacy_verdict(
            self.habitat,
            xi,
            self.time_grid,
            self.cell,
            self.settings,
            self.kernel,
            self._pool.map,
            u_star=self.orbit(1),
            v_star=self.orbit(2),
            run_fronts=run_fronts,
        )


def session(config, jobs=DEFAULT_JOBS):
    """Return a :class:`Session` with a :class:`.WorkerPool` of ``jobs`` workers."""
    return Session(config, pool=WorkerPool(jobs))


def _sweep_task(task):
    config_text, overrides, parameter, value, xi = task
    config = load_config(config_text, list(overrides) + [f"{parameter}={value!r}"])
    with Session(config) as inline:
        speed = inline.speed(xi)
        verdict = inline.determinacy(xi, run_fronts=False).verdict
    return [value, speed.c_star, speed.mu_star, verdict, ""]


async def sweep(config_text, parameter, values, jobs=DEFAULT_JOBS, overrides=(), xi=1):
    """Return one ``(value, c_star, mu_star, verdict, error)`` row per value.

    Rows are sorted by value; a value whose computation failed keeps its row
    with an empty result and the error in the last column.

    :param config_text: The habitat config the sweep starts from.
    :param parameter: A ``[params]`` name or ``section.key`` to vary.
    :param values: The parameter values.
    :param jobs: (Optional) Number of worker processes.
    :param overrides: (Optional) Further overrides applied to every value.

    """
    values = sorted(float(value) for value in values)
    tasks = [(config_text, tuple(overrides), parameter, value, xi) for value in values]
    async with WorkerPool(jobs) as pool:
        results = await pool.gather(_sweep_task, tasks)
    rows = []
    for value, result in zip(values, results):
        if isinstance(result, TaskException):
            original = result.original_exception
            error = f"{type(original).__name__}: {original}"
            rows.append([value, None, None, None, error])
        else:
            rows.append(result)
    log.info(f"Swept {parameter} over {len(values)} values")
    return rows
