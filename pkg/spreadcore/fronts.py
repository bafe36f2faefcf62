"""Front-like initial data, line simulations and level tracking.

Fronts are simulated in the cooperative coordinates ``(u, w)``, ``w = v* - v``,
on the line ``y = x xi``. Behind the front the state approaches
``(u*, v*)``; ahead of it, ``(0, 0)``.

"""
import logging
from dataclasses import dataclass

import numpy as np

from .const import (
    BEHIND_FROM,
    BEHIND_POSITION,
    BOUNDARY_NODES,
    FRONT_CUTOFF,
    FRONT_MARGIN,
    LEVEL_HIGH,
    LEVEL_LOW,
    MIN_R2,
    MIN_SNAPSHOTS,
)
from .discretize import sample_kernel
from .evolve import LineDomain, OrbitPad, ZeroPad, make_form, simulate
from .exceptions import (
    DomainTooSmall,
    FrontHitBoundary,
    InvalidInvocation,
    LevelNotBracketed,
    PoorFit,
)
from .spectral import PeriodicOrbit

log = logging.getLogger(__package__)


def eta(s):
    """Return the smooth step ``(1 + tanh(s / 2)) / 2``."""
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(s, dtype=float)))


@dataclass(frozen=True, eq=False)
class FrontInit(object):
    """Initial fields ``(u0, w0)`` on a line, high behind ``s0`` and zero ahead."""

    u: np.ndarray
    w: np.ndarray
    line: object
    xi: int
    s0: float
    delta: float
    sharpness: float

    @property
    def state(self):
        """Return the fields as a simulation state."""
        return (self.u, self.w)


def make_front(h, xi, line, u_star, v_star, s0=None, delta=0.5, sharpness=1.0):
    """Return a :class:`FrontInit` with its interface at ``y = s0``.

    ``u0 = (1 - delta) u*(0, x) (1 - eta((y - s0) / sharpness))``, set to zero
    from ``y = s0 + FRONT_CUTOFF`` on, and ``w0`` likewise with ``v*``.

    :param h: The :class:`.HabitatSpec`.
    :param xi: Direction, ``+1`` or ``-1``.
    :param line: The :class:`.LineGrid`.
    :param u_star: First-species :class:`.PeriodicOrbit`.
    :param v_star: Second-species :class:`.PeriodicOrbit`.
    :param s0: (Optional) Interface location. (Default: ``-L / 2``)
    :param delta: (Optional) Depression below the orbits, in ``(0, 1)``.
    :param sharpness: (Optional) Width of the transition.

    """
    s0 = -line.L / 2.0 if s0 is None else float(s0)
    if not 0 < delta < 1:
        raise InvalidInvocation(f"delta must lie in (0, 1), not {delta}")
    if not sharpness > 0:
        raise InvalidInvocation(f"sharpness must be positive, not {sharpness}")
    if abs(s0) + FRONT_CUTOFF >= line.L:
        raise DomainTooSmall(f"interface {s0} is within {FRONT_CUTOFF} of the line end")
    y = line.nodes
    index = line.cell_index(xi)
    profile = 1.0 - eta((y - s0) / sharpness)
    profile[y >= s0 + FRONT_CUTOFF] = 0.0
    u0 = (1.0 - delta) * u_star.values[0][index] * profile
    w0 = (1.0 - delta) * v_star.values[0][index] * profile
    behind = y <= s0 - FRONT_CUTOFF
    for name, field, orbit in (("u", u0, u_star), ("w", w0, v_star)):
        top = (1.0 - delta) * orbit.values[0][index]
        if field.min() < 0 or np.any(field > top) or not field[behind].min() > 0:
            raise InvalidInvocation(f"front profile of {name} is not a front")
    return FrontInit(
        u=u0, w=w0, line=line, xi=xi, s0=s0, delta=delta, sharpness=sharpness
    )


def level_position(nodes, ratio, level):
    """Return the last crossing of ``level`` by ``ratio``, linearly interpolated.

    Returns ``None`` when ``ratio`` never reaches ``level`` or still exceeds
    it at the last node.

    """
    above = np.flatnonzero(ratio >= level)
    if above.size == 0 or above[-1] == ratio.size - 1:
        return None
    i = above[-1]
    fraction = (ratio[i] - level) / (ratio[i] - ratio[i + 1])
    return float(nodes[i] + fraction * (nodes[i + 1] - nodes[i]))


class _BoundaryWatch(object):
    """Stop a front run whose leading edge reaches the right end of the line."""

    def __init__(self, domain, u_star, dt):
        self.domain = domain
        self.u_star = u_star
        self.dt = dt
        line = domain.line
        self.limit = line.L - (domain.kernel.spec.radius + BOUNDARY_NODES * line.dx)

    def __call__(self, time, state):
        n = int(round(time / self.dt))
        ceiling = self.domain.lift(self.u_star.values[n % self.u_star.nt])
        position = level_position(self.domain.line.nodes, state[0] / ceiling, LEVEL_LOW)
        if position is not None and position >= self.limit:
            raise FrontHitBoundary(time, position, self.limit)


def run_front(
    h,
    xi,
    init,
    t_end,
    time_grid,
    cell,
    u_star,
    v_star,
    c_estimate,
    kernel=None,
    stride=1,
):
    """Return the cooperative :class:`.Trajectory` from ``init``.

    The left end of the line is padded with ``(u*, v*)``, the right end with
    zeros. A state is recorded every ``stride`` periods.

    :param c_estimate: Expected front speed; the line must hold the front
        for the whole run at ``c_estimate + FRONT_MARGIN``.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    line = init.line
    needed = (c_estimate + FRONT_MARGIN) * t_end + FRONT_CUTOFF
    if line.L - init.s0 < needed:
        raise DomainTooSmall(
            f"the front needs L - s0 >= {needed:.4g}, have {line.L - init.s0:.4g}"
        )
    form = make_form("cooperative", h, time_grid, cell, u_star=u_star, v_star=v_star)
    domain = LineDomain(kernel, line, xi)
    log.info(f"Front run xi={xi} on {line.size} nodes to t={t_end}")
    return simulate(
        form,
        init.state,
        t_end,
        stride=stride * time_grid.nt,
        domain=domain,
        pads=(OrbitPad(u_star, v_star), ZeroPad()),
        observer=_BoundaryWatch(domain, u_star, time_grid.dt),
    )


def transform_consistency(
    h, xi, init, t_end, time_grid, cell, u_star, v_star, kernel=None
):
    """Return the largest gap between cooperative and competitive runs from ``init``.

    The competitive run starts from ``(u0, v* - w0)`` with pads ``(u*, 0)`` on
    the left and ``(0, v*)`` on the right; its states are mapped back to
    ``(u, v* - v)`` before comparing.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    domain = LineDomain(kernel, init.line, xi)
    zero = PeriodicOrbit(values=np.zeros_like(u_star.values), T=u_star.T)
    cooperative = simulate(
        make_form("cooperative", h, time_grid, cell, u_star=u_star, v_star=v_star),
        init.state,
        t_end,
        domain=domain,
        pads=(OrbitPad(u_star, v_star), ZeroPad()),
    )
    v0 = domain.lift(v_star.values[0]) - init.w
    competitive = simulate(
        make_form("competitive", h, time_grid, cell, u_star=u_star, v_star=v_star),
        (init.u, v0),
        t_end,
        domain=domain,
        pads=(OrbitPad(u_star, zero), OrbitPad(zero, v_star)),
    )
    gap = 0.0
    for n, first, second in zip(
        cooperative.steps, cooperative.states, competitive.states
    ):
        v_base = domain.lift(v_star.values[n % v_star.nt])
        gap = max(
            gap,
            float(np.abs(first[0] - second[0]).max()),
            float(np.abs(first[1] - (v_base - second[1])).max()),
        )
    return gap


@dataclass(frozen=True, eq=False)
class LevelTrack(object):
    """Positions of one relative level over time and their linear fit."""

    level: float
    times: np.ndarray
    positions: np.ndarray
    slope: float
    intercept: float
    r2: float

    def rows(self):
        """Return ``(level, t, position)`` rows."""
        return [
            [self.level, float(t), float(x)]
            for t, x in zip(self.times, self.positions)
            if not np.isnan(x)
        ]


def _fit(times, positions):
    slope, intercept = np.polyfit(times, positions, 1)
    residual = positions - (slope * times + intercept)
    total = float(np.sum((positions - positions.mean()) ** 2))
    r2 = 1.0 if total == 0 else 1.0 - float(np.sum(residual ** 2)) / total
    return float(slope), float(intercept), r2


def track_levels(traj, u_star, levels):
    """Return a :class:`LevelTrack` for every level of ``u / u*``.

    Positions are fitted by least squares over the second half of the run.
    Before that window a level that is not attained yet is recorded as NaN.

    """
    if len(traj.states) < MIN_SNAPSHOTS:
        raise InvalidInvocation(
            f"level tracking needs {MIN_SNAPSHOTS} snapshots, have {len(traj.states)}"
        )
    domain = traj.domain
    nodes = domain.line.nodes
    t_end = traj.times[-1]
    ratios = [
        state[0] / domain.lift(u_star.values[n % u_star.nt])
        for n, state in zip(traj.steps, traj.states)
    ]
    window = traj.times >= 0.5 * t_end
    tracks = []
    for level in levels:
        positions = []
        for time, ratio, fitted in zip(traj.times, ratios, window):
            position = level_position(nodes, ratio, level)
            if position is None:
                if fitted:
                    raise LevelNotBracketed(level, time)
                position = np.nan
            positions.append(position)
        positions = np.array(positions)
        slope, intercept, r2 = _fit(traj.times[window], positions[window])
        log.debug(f"Level {level}: slope {slope!r}, r2 {r2!r}")
        tracks.append(
            LevelTrack(
                level=level,
                times=traj.times,
                positions=positions,
                slope=slope,
                intercept=intercept,
                r2=r2,
            )
        )
    return tracks


@dataclass(frozen=True, eq=False)
class SpeedIntervalEstimate(object):
    """Empirical speed interval over the tested family of initial data."""

    high: LevelTrack
    low: LevelTrack

    @property
    def c_low_hat(self):
        """Return the speed of the level close to ``u*``."""
        return self.high.slope

    @property
    def c_high_hat(self):
        """Return the speed of the level close to zero."""
        return self.low.slope

    def rows(self):
        """Return ``(key, value)`` pairs for reports."""
        return [
            ("c_low_hat (empirical over tested family)", self.c_low_hat),
            ("c_low_hat_r2", self.high.r2),
            ("c_high_hat (empirical over tested family)", self.c_high_hat),
            ("c_high_hat_r2", self.low.r2),
        ]


def estimate_interval(traj, u_star, min_r2=MIN_R2):
    """Return the :class:`SpeedIntervalEstimate` of a front run.

    :raises: :class:`.PoorFit` when either level track fits a line with
        ``r2 < min_r2``.

    """
    high, low = track_levels(traj, u_star, (LEVEL_HIGH, LEVEL_LOW))
    for track in (high, low):
        if track.r2 < min_r2:
            raise PoorFit(track)
    estimate = SpeedIntervalEstimate(high=high, low=low)
    if estimate.c_low_hat > estimate.c_high_hat:
        log.warning(
            f"c_low_hat {estimate.c_low_hat!r} exceeds"
            f" c_high_hat {estimate.c_high_hat!r}"
        )
    log.info(f"Empirical speeds [{estimate.c_low_hat!r}, {estimate.c_high_hat!r}]")
    return estimate


def behind_front_gap(
    traj, u_star, v_star, position=BEHIND_POSITION, t_from=BEHIND_FROM
):
    """Return the largest distance to ``(u*, v*)`` at one node behind the front.

    :param position: Node location as a fraction of ``L``.
    :param t_from: Start of the window as a fraction of the run length.

    """
    domain = traj.domain
    line = domain.line
    node = int(np.argmin(np.abs(line.nodes - position * line.L)))
    cell_node = domain.index[node]
    gap = 0.0
    for time, n, state in zip(traj.times, traj.steps, traj.states):
        if time < t_from * traj.times[-1]:
            continue
        k = n % u_star.nt
        gap = max(
            gap,
            abs(state[0][node] - u_star.values[k][cell_node]),
            abs(state[1][node] - v_star.values[k][cell_node]),
        )
    return float(gap)


def trajectory_rows(traj, v_star, dump_stride=1):
    """Return ``(t, x, u, v_transformed, v_original)`` rows of a front run.

    ``x`` is the physical position ``xi y`` of every ``dump_stride``-th node.

    """
    domain = traj.domain
    nodes = domain.line.nodes[::dump_stride]
    rows = []
    for time, n, (u, w) in zip(traj.times, traj.steps, traj.states):
        v_base = domain.lift(v_star.values[n % v_star.nt])
        original = (v_base - w)[::dump_stride]
        for x, u_value, w_value, v_value in zip(
            nodes, u[::dump_stride], w[::dump_stride], original
        ):
            rows.append(
                [
                    float(time),
                    float(domain.xi * x),
                    float(u_value),
                    float(w_value),
                    float(v_value),
                ]
            )
    return rows
