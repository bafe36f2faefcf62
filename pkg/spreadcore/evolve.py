"""Order-preserving forward Euler time stepping.

Five system forms share one stepper:

``single1`` / ``single2``
    ``u_t = K u - u + u (a1 - b1 u)`` and ``v_t = K v - v + v (a2 - c2 v)``.
``competitive``
    The competition system in ``(u, v)``.
``cooperative``
    The same system in ``(u, w)`` with ``w = v* - v``; the state is kept in
    ``0 <= u <= u*``, ``0 <= w <= v*``.
``linear``
    ``u_t = K_{xi,mu} u - u + a u`` with a twisted kernel.

Coefficients are tabulated at the left endpoint of each step on the period
cell and lifted onto a line through the node-to-cell index map.

"""
import logging
from dataclasses import dataclass

import numpy as np

from .const import CLAMP_LIMIT, CLAMP_SLACK, STEP_SAFETY
from .discretize import cell_operator_matrix, convolve_line, wrap_to_cell
from .exceptions import (
    InvalidInvocation,
    InvariantRegionExit,
    NonFiniteState,
    StepSizeTooLarge,
)
from .habitat import COEFFICIENT_NAMES

log = logging.getLogger(__package__)

FORMS = ("single1", "single2", "competitive", "cooperative", "linear")
_PAIR_FORMS = ("competitive", "cooperative")


@dataclass(frozen=True)
class TimeGrid(object):
    """``nt`` forward Euler steps per time period ``T``."""

    T: float
    nt: int

    def __post_init__(self):
        """Validate the step count."""
        if self.nt < 1 or not self.T > 0:
            raise InvalidInvocation(f"invalid time grid T={self.T}, nt={self.nt}")

    @property
    def dt(self):
        """Return the step size."""
        return self.T / self.nt

    @property
    def times(self):
        """Return the step start times within one period."""
        return self.dt * np.arange(self.nt)

    def steps(self, t_end):
        """Return the number of steps that reach ``t_end``."""
        steps = int(round(t_end / self.dt))
        if steps <= 0 or abs(steps * self.dt - t_end) > 1e-9 * max(1.0, t_end):
            raise InvalidInvocation(f"t_end={t_end} is not a positive multiple of dt")
        return steps


@dataclass(frozen=True, eq=False)
class SystemForm(object):
    """A system tag with coefficient tables on the (time x cell) grid."""

    tag: str
    habitat: object
    time_grid: TimeGrid
    coefficients: dict
    u_star: object = None
    v_star: object = None
    a_field: np.ndarray = None

    @property
    def components(self):
        """Return the number of state components."""
        return 2 if self.tag in _PAIR_FORMS else 1

    def reaction_bound(self):
        """Return a bound on the reaction Jacobian entries on the invariant region."""
        c = {name: np.abs(table).max() for name, table in self.coefficients.items()}
        if self.tag == "linear":
            return float(np.abs(self.a_field).max())
        u_max = self.u_star.values.max() if self.u_star is not None else c["a1"] / (
            self.coefficients["b1"].min()
        )
        v_max = self.v_star.values.max() if self.v_star is not None else c["a2"] / (
            self.coefficients["c2"].min()
        )
        if self.tag == "single1":
            return float(c["a1"] + 2 * c["b1"] * u_max)
        if self.tag == "single2":
            return float(c["a2"] + 2 * c["c2"] * v_max)
        f_u = c["a1"] + 2 * c["b1"] * u_max + c["c1"] * v_max
        f_v = c["c1"] * u_max
        g_u = c["b2"] * v_max
        g_v = c["a2"] + 4 * c["c2"] * v_max + c["b2"] * u_max
        return float(max(f_u, f_v, g_u, g_v))

    def max_step(self):
        """Return the largest order-preserving step."""
        return STEP_SAFETY / (1.0 + self.reaction_bound())


def make_form(tag, habitat, time_grid, cell, u_star=None, v_star=None, a_field=None):
    """Return a :class:`SystemForm` with coefficients tabulated on ``cell``.

    :param tag: One of :data:`FORMS`.
    :param habitat: The :class:`.HabitatSpec`.
    :param time_grid: The :class:`TimeGrid`.
    :param cell: The :class:`.CellGrid` the tables live on.
    :param u_star: (Optional) First-species periodic orbit, required by
        ``cooperative``.
    :param v_star: (Optional) Second-species periodic orbit, required by
        ``cooperative``.
    :param a_field: (Optional) ``(nt, nx)`` growth table, required by ``linear``.

    """
    if tag not in FORMS:
        raise InvalidInvocation(f"unknown system form {tag!r}")
    if tag == "cooperative" and (u_star is None or v_star is None):
        raise InvalidInvocation("the cooperative form needs both periodic orbits")
    if tag == "linear" and a_field is None:
        raise InvalidInvocation("the linear form needs a growth table")
    coefficients = {
        name: habitat.evaluate(name, time_grid.times, cell.nodes)
        for name in COEFFICIENT_NAMES
    }
    form = SystemForm(
        tag=tag,
        habitat=habitat,
        time_grid=time_grid,
        coefficients=coefficients,
        u_star=u_star,
        v_star=v_star,
        a_field=None if a_field is None else np.asarray(a_field, dtype=float),
    )
    if time_grid.dt > form.max_step():
        raise StepSizeTooLarge(time_grid.dt, form.max_step())
    return form


class ZeroPad(object):
    """Pad values of zero beyond an end of the line."""

    def value(self, domain, side, n, component):
        """Return zero."""
        return 0.0


class OrbitPad(object):
    """Pad values taken from periodic orbits, one orbit per component."""

    def __init__(self, *orbits):
        """Initialize the pad.

        :param orbits: :class:`.PeriodicOrbit` instances, one per component.

        """
        self.orbits = orbits

    def value(self, domain, side, n, component):
        """Return the orbit of ``component`` on the pad nodes at step ``n``."""
        orbit = self.orbits[component]
        return orbit.values[n % orbit.values.shape[0]][domain.pad_index(side)]


class CellDomain(object):
    """The period cell; fields are implicitly periodic."""

    def __init__(self, kernel, cell):
        """Prepare the circulant operator of ``kernel`` on ``cell``."""
        self.cell = cell
        self.kernel = wrap_to_cell(kernel, cell)
        self._matrix = cell_operator_matrix(self.kernel)
        self.size = cell.nx

    def convolve(self, f, n=None, component=None, pads=None):
        """Return the kernel applied to ``f``."""
        return self._matrix @ f

    def lift(self, row):
        """Return a cell row as seen by the domain nodes."""
        return row


class LineDomain(object):
    """The truncated line ``y in [-L, L]`` with ``x = xi y``."""

    def __init__(self, kernel, line, xi=1):
        """Prepare the node-to-cell maps of ``line`` for direction ``xi``."""
        if kernel.wrapped:
            raise InvalidInvocation("line domains need an unwrapped kernel")
        if xi not in (1, -1):
            raise InvalidInvocation(f"direction must be +1 or -1, not {xi}")
        self.line = line
        self.kernel = kernel
        self.xi = xi
        self.size = line.size
        self.index = line.cell_index(xi)
        reach = kernel.reach
        half = line.half_count
        self._pad_index = {
            "left": line.cell_index(xi, np.arange(-half - reach, -half)),
            "right": line.cell_index(xi, np.arange(half + 1, half + reach + 1)),
        }

    def pad_index(self, side):
        """Return the cell indices of the pad nodes on ``side``."""
        return self._pad_index[side]

    def convolve(self, f, n, component, pads):
        """Return the kernel applied to ``f`` using pad values at step ``n``."""
        left_pad, right_pad = pads
        left = left_pad.value(self, "left", n, component)
        right = right_pad.value(self, "right", n, component)
        return convolve_line(self.kernel, f, left, right)

    def lift(self, row):
        """Return a cell row as seen by the line nodes."""
        return row[self.index]


def _coefficients(form, domain, n):
    k = n % form.time_grid.nt
    return {name: domain.lift(table[k]) for name, table in form.coefficients.items()}


def _orbit(orbit, domain, n):
    return domain.lift(orbit.values[n % orbit.values.shape[0]])


def step(form, state, n, domain, pads=(ZeroPad(), ZeroPad())):
    """Advance ``state`` one Euler step from ``t = n dt``.

    :param form: The :class:`SystemForm`.
    :param state: Tuple of one or two fields.
    :param n: Step index; coefficients are taken at ``t = n dt``.
    :param domain: A :class:`CellDomain` or :class:`LineDomain`.
    :param pads: ``(left, right)`` pad sources, used on a line.

    Returns ``(next_state, clamp)`` where ``clamp`` is the largest distance a
    cooperative state was pulled back into its invariant region.

    """
    dt = form.time_grid.dt
    c = _coefficients(form, domain, n)
    spread = [domain.convolve(f, n, i, pads) - f for i, f in enumerate(state)]
    clamp = 0.0
    if form.tag == "single1":
        (u,) = state
        result = (u + dt * (spread[0] + u * (c["a1"] - c["b1"] * u)),)
    elif form.tag == "single2":
        (v,) = state
        result = (v + dt * (spread[0] + v * (c["a2"] - c["c2"] * v)),)
    elif form.tag == "linear":
        (u,) = state
        a = domain.lift(form.a_field[n % form.time_grid.nt])
        result = (u + dt * (spread[0] + a * u),)
    elif form.tag == "competitive":
        u, v = state
        f = u * (c["a1"] - c["b1"] * u - c["c1"] * v)
        g = v * (c["a2"] - c["b2"] * u - c["c2"] * v)
        result = (u + dt * (spread[0] + f), v + dt * (spread[1] + g))
    else:
        u, w = state
        v_star = _orbit(form.v_star, domain, n)
        f = u * (c["a1"] - c["b1"] * u - c["c1"] * (v_star - w))
        g = c["b2"] * (v_star - w) * u + w * (
            c["a2"] - 2 * c["c2"] * v_star + c["c2"] * w
        )
        result, clamp = _clamp(
            (u + dt * (spread[0] + f), w + dt * (spread[1] + g)),
            (_orbit(form.u_star, domain, n + 1), _orbit(form.v_star, domain, n + 1)),
            (n + 1) * dt,
        )
    for field in result:
        if not np.all(np.isfinite(field)):
            raise NonFiniteState((n + 1) * dt)
    return result, clamp


def _clamp(state, ceilings, time):
    excursion = 0.0
    for field, ceiling in zip(state, ceilings):
        excursion = max(
            excursion, float(np.max(-field)), float(np.max(field - ceiling))
        )
    if excursion > CLAMP_LIMIT:
        raise InvariantRegionExit(time, excursion)
    if excursion <= 0:
        return state, 0.0
    return tuple(np.clip(f, 0.0, top) for f, top in zip(state, ceilings)), excursion


@dataclass(frozen=True, eq=False)
class Trajectory(object):
    """Recorded states of a simulation."""

    times: np.ndarray
    steps: np.ndarray
    states: list
    max_clamp: float
    domain: object
    form: SystemForm

    @property
    def final(self):
        """Return the last recorded state."""
        return self.states[-1]


def simulate(form, init, t_end, stride=None, domain=None, pads=None, observer=None):
    """Return the :class:`Trajectory` of ``form`` from ``init`` up to ``t_end``.

    :param form: The :class:`SystemForm`.
    :param init: Tuple of one or two initial fields.
    :param t_end: Final time, a multiple of the step size.
    :param stride: (Optional) Steps between recorded states. (Default: one
        period)
    :param domain: A :class:`CellDomain` or :class:`LineDomain`.
    :param pads: (Optional) ``(left, right)`` pad sources. (Default: zeros)
    :param observer: (Optional) Callable ``observer(time, state)`` run on each
        recorded state; it may raise to stop the run.

    The initial and final states are always recorded.

    """
    if not t_end > 0:
        raise InvalidInvocation("t_end must be positive")
    if domain is None:
        raise InvalidInvocation("simulate needs a domain")
    state = tuple(np.array(field, dtype=float) for field in init)
    if len(state) != form.components:
        raise InvalidInvocation(f"{form.tag} needs {form.components} fields")
    pads = pads or (ZeroPad(), ZeroPad())
    stride = stride or form.time_grid.nt
    total = form.time_grid.steps(t_end)
    dt = form.time_grid.dt
    times, steps, states = [0.0], [0], [state]
    max_clamp = 0.0
    for n in range(total):
        state, clamp = step(form, state, n, domain, pads)
        max_clamp = max(max_clamp, clamp)
        if (n + 1) % stride == 0 or n + 1 == total:
            times.append((n + 1) * dt)
            steps.append(n + 1)
            states.append(state)
            if observer is not None:
                observer((n + 1) * dt, state)
    if max_clamp > CLAMP_SLACK:
        log.warning(f"Clamped {form.tag} state by up to {max_clamp:.3e}")
    log.debug(f"Simulated {form.tag} for {total} steps to t={t_end}")
    return Trajectory(
        times=np.array(times),
        steps=np.array(steps),
        states=states,
        max_clamp=max_clamp,
        domain=domain,
        form=form,
    )


def check_order_preservation(
    form, init_lo, init_hi, t_end, domain, pads=None, stride=1
):
    """Return the largest ``(lo - hi)+`` over the recorded states of two runs.

    :param init_lo: The lower initial state.
    :param init_hi: The upper initial state; must dominate ``init_lo``.

    """
    if form.tag not in ("single1", "single2", "cooperative", "linear"):
        raise InvalidInvocation(f"{form.tag} is not an order-preserving form")
    for lo, hi in zip(init_lo, init_hi):
        if np.any(np.asarray(lo) > np.asarray(hi)):
            raise InvalidInvocation("initial states are not ordered")
    low = simulate(form, init_lo, t_end, stride, domain, pads)
    high = simulate(form, init_hi, t_end, stride, domain, pads)
    violation = 0.0
    for state_lo, state_hi in zip(low.states, high.states):
        for lo, hi in zip(state_lo, state_hi):
            violation = max(violation, float(np.max(lo - hi)))
    return violation
