"""Linear spreading speeds and the super-solution speed bound."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .const import (
    BRACKET_EXPANSIONS,
    C0_CAP,
    C0_PHASES,
    C0_RESOLUTION,
    C0_TOL,
    FRONT_CUTOFF,
    GOLDEN_TOL,
    MU_GRID_EXPONENTS,
)
from .discretize import sample_kernel
from .exceptions import (
    HB1Violated,
    InvalidInvocation,
    NoInteriorMinimum,
    NotFoundBelowCap,
)
from .habitat import COEFFICIENT_NAMES
from .spectral import growth_table, periodic_attractor, spectrum_point_value

log = logging.getLogger(__package__)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2


class ExpansionStrategy(object):
    """An abstract class deciding how far a ``mu`` bracket may grow.

    Instances of this class are immutable.

    """

    def expand(self, exponents, side):
        """Return ``exponents`` extended on ``side`` (``"left"`` or ``"right"``)."""
        width = self._width
        if side == "left":
            return list(range(exponents[0] - width, exponents[0])) + exponents
        return exponents + list(range(exponents[-1] + 1, exponents[-1] + width + 1))


class FiniteExpansionStrategy(ExpansionStrategy):
    """An ``ExpansionStrategy`` that expands a bracket a finite number of times."""

    _width = 8

    def __init__(self, expansions=BRACKET_EXPANSIONS):
        """Initialize the strategy.

        :param expansions: Number of times the bracket may be widened.

        """
        self._expansions = expansions

    def consume_available_expansion(self):
        """Allow one fewer expansion."""
        return type(self)(self._expansions - 1)

    def should_expand_on_failure(self):
        """Return ``True`` if and only if the strategy will allow another expansion."""
        return self._expansions > 0


@dataclass(frozen=True)
class SpeedResult(object):
    """Minimum of ``lambda(mu) / mu`` over ``mu > 0``.

    ``samples`` holds every evaluated ``(mu, lambda, lambda / mu)`` triple,
    golden-section points included, sorted by ``mu``.

    """

    c_star: float
    mu_star: float
    samples: tuple
    bracket: tuple
    xi: int = 1

    def rows(self):
        """Return the samples as CSV rows."""
        return [list(sample) for sample in self.samples]


def _sample(task):
    h, xi, mu, table, time_grid, cell, kernel = task
    lam = spectrum_point_value(h, xi, mu, table, time_grid, cell, kernel)
    return (float(mu), lam, lam / mu)


def speed_profile(h, xi, a_field, mus, time_grid, cell, kernel=None, mapper=map):
    """Return ``(mu, lambda_0(xi, mu, a), lambda_0 / mu)`` for every ``mu``.

    :param mapper: (Optional) A ``map``-like callable used to evaluate the
        samples; order of the results follows ``mus``.

    """
    if xi not in (1, -1):
        raise InvalidInvocation(f"direction must be +1 or -1, not {xi}")
    if any(not mu > 0 for mu in mus):
        raise InvalidInvocation("speed samples need mu > 0")
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    table = growth_table(h, a_field, time_grid, cell)
    tasks = [(h, xi, mu, table, time_grid, cell, kernel) for mu in mus]
    return list(mapper(_sample, tasks))


def _golden_section(ratio, a, b, tol=GOLDEN_TOL):
    """Shrink ``[a, b]`` around the minimum of ``ratio`` to a relative width ``tol``."""
    h = b - a
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = ratio(c)
    yd = ratio(d)
    while b - a >= tol * 0.5 * (a + b):
        if yc < yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = ratio(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = ratio(d)
        log.debug(f"Golden section bracket [{a!r}, {b!r}]")
    return a, b


def minimize_ratio(
    h, xi, a_field, time_grid, cell, kernel=None, mapper=map, expansion_strategy=None
):
    """Return the :class:`SpeedResult` of ``inf_{mu > 0} lambda_0(xi, mu, a) / mu``.

    ``g(mu) = lambda / mu`` is sampled on ``mu0 2^k`` with ``mu0 = 1 / r0``.
    When the smallest sample sits at an end of the grid the grid is expanded
    on that side as far as ``expansion_strategy`` allows; the interior
    minimum is then refined by golden section.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    strategy = expansion_strategy or FiniteExpansionStrategy()
    table = growth_table(h, a_field, time_grid, cell)
    mu0 = 1.0 / h.kernel.radius
    exponents = list(MU_GRID_EXPONENTS)
    found = {}
    while True:
        missing = [k for k in exponents if k not in found]
        mus = [mu0 * 2.0 ** k for k in missing]
        profile = speed_profile(h, xi, table, mus, time_grid, cell, kernel, mapper)
        found.update(zip(missing, profile))
        samples = [found[k] for k in exponents]
        best = min(range(len(samples)), key=lambda i: samples[i][2])
        if 0 < best < len(samples) - 1:
            break
        if not strategy.should_expand_on_failure():
            raise NoInteriorMinimum(samples)
        side = "left" if best == 0 else "right"
        log.warning(f"Minimum of lambda/mu at the {side} end of the mu grid, expanding")
        exponents = strategy.expand(exponents, side)
        strategy = strategy.consume_available_expansion()

    refined = []

    def ratio(mu):
        sample = _sample((h, xi, mu, table, time_grid, cell, kernel))
        refined.append(sample)
        return sample[2]

    bracket = (samples[best - 1][0], samples[best + 1][0])
    _golden_section(ratio, *bracket)
    every = sorted(set(samples) | set(refined))
    mu_star, _, c_star = min(every, key=lambda sample: sample[2])
    log.info(f"c*(xi={xi}) = {c_star!r} at mu* = {mu_star!r}")
    return SpeedResult(
        c_star=c_star, mu_star=mu_star, samples=tuple(every), bracket=bracket, xi=xi
    )


def linear_speed(
    h, xi, time_grid, cell, v_star=None, kernel=None, mapper=map, **kwargs
):
    """Return the linear speed of the first species invading ``(0, v*)``.

    The growth rate is ``a1 - c1 v*``.

    :param v_star: (Optional) The second-species :class:`.PeriodicOrbit`;
        computed when omitted.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    v_star = v_star or periodic_attractor(h, 2, time_grid, cell, kernel)
    a1 = h.evaluate("a1", time_grid.times, cell.nodes)
    c1 = h.evaluate("c1", time_grid.times, cell.nodes)
    return minimize_ratio(
        h, xi, a1 - c1 * v_star.values, time_grid, cell, kernel, mapper, **kwargs
    )


def single_species_speed(
    h, xi, species, time_grid, cell, kernel=None, mapper=map, **kwargs
):
    """Return the spreading speed of one species alone; its damping never enters."""
    if species not in (1, 2):
        raise InvalidInvocation(f"species must be 1 or 2, not {species}")
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    growth = f"a{species}"
    lam = spectrum_point_value(h, xi, 0.0, growth, time_grid, cell, kernel)
    if lam <= 0:
        raise HB1Violated(species, lam)
    return minimize_ratio(h, xi, growth, time_grid, cell, kernel, mapper, **kwargs)


def _eta(s):
    return 0.5 * (1.0 + np.tanh(0.5 * s))


def supersolution_residual(
    h, xi, C, u_star, v_star, time_grid, cell, kernel=None, phase=0.0
):
    """Return the smallest residual of ``(u*(1 - eta), v*(1 - eta))`` over one period.

    The profile ``eta(y - phase - C t)`` is evaluated on the line ``y = x xi``
    near the moving interface, and the residual of each equation of the
    cooperative system is taken with the forward Euler stencil. A
    non-negative result means the profile is a discrete super-solution.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    weights = kernel.full_weights()
    reach = kernel.reach
    dx, dt, nt = cell.dx, time_grid.dt, time_grid.nt
    first = int(math.floor((phase - FRONT_CUTOFF) / dx)) - reach
    last = int(math.ceil((phase + C * h.T + FRONT_CUTOFF) / dx)) + reach
    offsets = np.arange(first, last + 1)
    y = offsets * dx
    index = np.mod(xi * offsets, cell.nx)
    inner = index[reach:-reach]
    tables = {
        name: h.evaluate(name, time_grid.times, cell.nodes)[:, inner]
        for name in COEFFICIENT_NAMES
    }
    worst = math.inf
    for k in range(nt):
        profile = 1.0 - _eta(y - phase - C * k * dt)
        following = 1.0 - _eta(y[reach:-reach] - phase - C * (k + 1) * dt)
        u_now = u_star.values[k][index] * profile
        w_now = v_star.values[k][index] * profile
        u_next = u_star.values[(k + 1) % nt][inner] * following
        w_next = v_star.values[(k + 1) % nt][inner] * following
        c = {name: table[k] for name, table in tables.items()}
        v_base = v_star.values[k][inner]
        u, w = u_now[reach:-reach], w_now[reach:-reach]
        f = u * (c["a1"] - c["b1"] * u - c["c1"] * (v_base - w))
        g = c["b2"] * (v_base - w) * u + w * (
            c["a2"] - 2 * c["c2"] * v_base + c["c2"] * w
        )
        spread_u = np.correlate(u_now, weights, mode="valid") - u
        spread_w = np.correlate(w_now, weights, mode="valid") - w
        residual_u = (u_next - u) / dt - spread_u - f
        residual_w = (w_next - w) / dt - spread_w - g
        worst = min(worst, float(residual_u.min()), float(residual_w.min()))
    return worst


def supersolution_C0(
    h,
    xi,
    time_grid,
    cell,
    u_star,
    v_star,
    kernel=None,
    tol=C0_TOL,
    cap=C0_CAP,
    resolution=C0_RESOLUTION,
):
    """Return the smallest speed ``C`` whose front profile is a super-solution.

    ``C`` is bisected on ``[0, cap]`` to ``resolution``; a candidate passes when
    :func:`supersolution_residual` is at least ``-tol`` for every interface
    phase ``j p / 8``.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    phases = [j * h.p / C0_PHASES for j in range(C0_PHASES)]

    def passes(C):
        worst = min(
            supersolution_residual(
                h, xi, C, u_star, v_star, time_grid, cell, kernel, phase
            )
            for phase in phases
        )
        log.debug(f"Super-solution residual at C={C!r}: {worst!r}")
        return worst >= -tol

    if not passes(cap):
        raise NotFoundBelowCap(cap)
    low, high = 0.0, float(cap)
    if passes(low):
        return low
    while high - low > resolution:
        middle = 0.5 * (low + high)
        if passes(middle):
            high = middle
        else:
            low = middle
    log.info(f"C0(xi={xi}) = {high!r}")
    return high
