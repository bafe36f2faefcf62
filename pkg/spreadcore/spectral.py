"""Principal spectrum points, periodic orbits and the nonhomogeneous solver.

The principal spectrum point of ``u_t = K_{xi,mu} u - u + a(t, x) u`` is the
exponential growth rate of its period map on the period cell. Each time step
of the map is the product ``D_k E D_k`` with

* ``E = expm(dt (W - sum(W) I))``, the spread over one step, and
* ``D_k = diag(exp(dt/2 (a(t_k) - max a)))``, half a step of growth,

which is positive, exact for growth rates that do not depend on ``x`` and
cannot overflow: the subtracted rate ``sum(W) - 1 + max a`` is added back to
the exponent afterwards.

"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import fft
from scipy.linalg import circulant

from .const import (
    EXTINCTION_LEVEL,
    HYPOTHESIS_TOLERANCE,
    MAX_ORBIT_PERIODS,
    MAX_SPECTRAL_PERIODS,
    RESIDUAL_TOL,
    SPECTRAL_TOL,
    STABILITY_GAP,
    STABILITY_PERIODS,
    TOL_ORBIT,
)
from .discretize import sample_kernel, twist, wrap_to_cell
from .evolve import CellDomain, make_form, simulate, step
from .exceptions import (
    ExtinctionDetected,
    HB1Violated,
    InvalidInvocation,
    NoConvergence,
    NonFiniteState,
    PreconditionLambdaNonnegative,
)
from .expr import Expr, parse
from .habitat import COEFFICIENT_NAMES, VARIABLES

log = logging.getLogger(__package__)


@dataclass(frozen=True, eq=False)
class PeriodicOrbit(object):
    """A T-periodic field sampled at the step start times of one period."""

    values: np.ndarray
    T: float
    drift: float = 0.0
    periods: int = 0

    @property
    def nt(self):
        """Return the number of samples per period."""
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralResult(object):
    """A principal spectrum point with its eigenfunction at ``t = 0``."""

    lam: float
    eigenfunction: np.ndarray
    iterations: int
    residual: float
    xi: int
    mu: float
    shift: float
    spread: np.ndarray
    growth: np.ndarray
    T: float


def growth_table(h, a_field, time_grid, cell):
    """Return ``a_field`` sampled at the step start times on ``cell``.

    :param a_field: A coefficient name, expression text, :class:`.Expr`,
        number, :class:`PeriodicOrbit` or ``(n, nx)`` array. Arrays sampled
        with a different number of times per period are interpolated
        linearly and periodically in time.

    """
    if isinstance(a_field, str):
        if a_field in COEFFICIENT_NAMES:
            a_field = h.coefficient(a_field)
        else:
            a_field = parse(a_field, set(VARIABLES) | set(h.params))
    if isinstance(a_field, Expr):
        return h.evaluate(a_field, time_grid.times, cell.nodes)
    if isinstance(a_field, PeriodicOrbit):
        a_field = a_field.values
    table = np.asarray(a_field, dtype=float)
    if table.ndim == 0:
        return np.full((time_grid.nt, cell.nx), float(table))
    if table.ndim != 2 or table.shape[1] != cell.nx:
        raise InvalidInvocation(
            f"growth table of shape {table.shape} does not fit the cell"
        )
    if table.shape[0] == time_grid.nt:
        return table
    position = np.arange(time_grid.nt) * table.shape[0] / time_grid.nt
    lower = np.floor(position).astype(int)
    fraction = (position - lower)[:, None]
    upper = np.mod(lower + 1, table.shape[0])
    return (1 - fraction) * table[lower % table.shape[0]] + fraction * table[upper]


def _spread_matrix(h, xi, mu, cell, kernel, dt):
    """Return ``expm(dt (W - sum(W) I))`` and ``sum(W)`` of the twisted kernel.

    The exponential is taken mode by mode on the circulant spectrum, whose
    real parts ``sum_m W_m (cos - 1)`` cannot round above zero however large
    the twist makes ``sum(W)``.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    twisted = wrap_to_cell(twist(kernel, xi, mu), cell)
    weights = twisted.weights
    nx = weights.size
    phase = 2 * np.pi * np.outer(np.arange(nx), np.arange(nx)) / nx
    decay = (weights * (np.cos(phase) - 1.0)).sum(axis=1)
    turn = (weights * np.sin(phase)).sum(axis=1)
    modes = np.exp(dt * decay) * np.exp(1j * dt * turn)
    row = np.clip(fft(modes).real / nx, 0.0, None)
    return circulant(row).T, twisted.total


def _step_matrices(spread, growth, dt):
    factors = np.exp(0.5 * dt * (growth - growth.max()))
    return [d[:, None] * spread * d[None, :] for d in factors]


def _period_map(spread, growth, dt):
    if np.all(growth == growth[0]):
        (single,) = _step_matrices(spread, growth[:1], dt)
        return np.linalg.matrix_power(single, growth.shape[0])
    monodromy = np.eye(spread.shape[0])
    for matrix in _step_matrices(spread, growth, dt):
        monodromy = matrix @ monodromy
    return monodromy


def principal_spectrum_point(
    h, xi, mu, a_field, time_grid, cell, kernel=None, max_periods=MAX_SPECTRAL_PERIODS
):
    """Return the :class:`SpectralResult` of ``K_{xi,mu} - I + a`` over one period.

    :param h: The :class:`.HabitatSpec` providing the kernel and periods.
    :param xi: Direction, ``+1`` or ``-1``.
    :param mu: Decay rate of the twist.
    :param a_field: The growth rate; see :func:`growth_table`.
    :param time_grid: The :class:`.TimeGrid`.
    :param cell: The :class:`.CellGrid`.
    :param kernel: (Optional) The untwisted kernel sampled on ``cell.dx``.
    :param max_periods: (Optional) Power iteration cap.

    Power iteration starts from ``1`` and renormalizes in the sup norm; it
    stops once two successive per-period growth estimates agree to
    ``SPECTRAL_TOL`` and the eigen-residual of the shifted map is below
    ``RESIDUAL_TOL``.

    """
    dt = time_grid.dt
    growth = growth_table(h, a_field, time_grid, cell)
    spread, total = _spread_matrix(h, xi, mu, cell, kernel, dt)
    shift = total - 1.0 + float(growth.max())
    monodromy = _period_map(spread, growth, dt)
    if not np.all(np.isfinite(monodromy)):
        raise NonFiniteState(time_grid.T)
    vector = np.ones(cell.nx)
    estimate = None
    for iteration in range(1, max_periods + 1):
        image = monodromy @ vector
        norm = image.max()
        if not norm > 0:
            raise NonFiniteState(iteration * time_grid.T)
        previous, estimate = estimate, math.log(norm) / time_grid.T
        vector = image / norm
        residual = float(np.abs(monodromy @ vector - norm * vector).max())
        if (
            previous is not None
            and abs(estimate - previous) < SPECTRAL_TOL
            and residual < RESIDUAL_TOL
        ):
            break
    else:
        raise NoConvergence("principal spectrum power iteration", max_periods)
    lam = shift + estimate
    log.debug(
        f"lambda_0(xi={xi}, mu={mu!r}) = {lam!r} after {iteration} periods,"
        f" residual {residual:.2e}"
    )
    return SpectralResult(
        lam=lam,
        eigenfunction=vector,
        iterations=iteration,
        residual=residual,
        xi=xi,
        mu=float(mu),
        shift=shift,
        spread=spread,
        growth=growth,
        T=time_grid.T,
    )


def spectrum_point_value(h, xi, mu, a_field, time_grid, cell, kernel=None):
    """Return only ``lambda_0`` of :func:`principal_spectrum_point`."""
    return principal_spectrum_point(h, xi, mu, a_field, time_grid, cell, kernel).lam


def principal_eigenfunction_course(result):
    """Return the principal eigenfunction over one period, scaled to max 1."""
    nt = result.growth.shape[0]
    dt = result.T / nt
    decay = math.exp(-(result.lam - result.shift) * dt)
    values = np.empty_like(result.growth)
    current = result.eigenfunction
    for k, matrix in enumerate(_step_matrices(result.spread, result.growth, dt)):
        values[k] = current
        current = decay * (matrix @ current)
    drift = float(np.abs(current - result.eigenfunction).max())
    return PeriodicOrbit(
        values=values / values.max(), T=result.T, drift=drift, periods=1
    )


def periodic_attractor(
    h,
    species,
    time_grid,
    cell,
    kernel=None,
    tol=TOL_ORBIT,
    max_periods=MAX_ORBIT_PERIODS,
):
    """Return the positive periodic orbit of a single-species equation.

    The orbit is the attracting periodic solution of the Euler scheme the
    simulations use, marched from the constant super-solution
    ``max a_k / min b_k`` (``max a_2 / min c_2`` for the second species).

    :param species: ``1`` or ``2``.

    """
    if species not in (1, 2):
        raise InvalidInvocation(f"species must be 1 or 2, not {species}")
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    growth = f"a{species}"
    lam = spectrum_point_value(h, 1, 0.0, growth, time_grid, cell, kernel)
    if lam <= 0:
        raise HB1Violated(species, lam)
    form = make_form(f"single{species}", h, time_grid, cell)
    domain = CellDomain(kernel, cell)
    damping = form.coefficients["b1" if species == 1 else "c2"]
    state = (np.full(cell.nx, form.coefficients[growth].max() / damping.min()),)
    values = np.empty((time_grid.nt, cell.nx))
    for period in range(1, max_periods + 1):
        start = state[0]
        for k in range(time_grid.nt):
            values[k] = state[0]
            state, _ = step(form, state, k, domain)
        drift = float(np.abs(state[0] - start).max())
        if state[0].max() < EXTINCTION_LEVEL:
            raise ExtinctionDetected(species)
        if drift < tol:
            break
    else:
        raise NoConvergence(f"species {species} periodic orbit", max_periods)
    log.info(
        f"Species {species} orbit in [{values.min()!r}, {values.max()!r}]"
        f" after {period} periods"
    )
    return PeriodicOrbit(values=values.copy(), T=h.T, drift=drift, periods=period)


def _midpoint_table(h, field, time_grid, cell):
    if isinstance(field, (str, Expr)):
        if isinstance(field, str) and field not in COEFFICIENT_NAMES:
            field = parse(field, set(VARIABLES) | set(h.params))
        expression = h.coefficient(field) if isinstance(field, str) else field
        return h.evaluate(expression, time_grid.times + 0.5 * time_grid.dt, cell.nodes)
    table = growth_table(h, field, time_grid, cell)
    return 0.5 * (table + np.roll(table, -1, axis=0))


def nonhomogeneous_periodic(
    h,
    xi,
    mu,
    a_field,
    h_field,
    time_grid,
    cell,
    kernel=None,
    tol=TOL_ORBIT,
    max_periods=MAX_ORBIT_PERIODS,
):
    """Return the periodic solution of ``w_t = K_{xi,mu} w - w + a w + h``.

    The homogeneous part is advanced with the period-map step propagators and
    the forcing integral over each step by Simpson's rule, marching from zero
    until the period-to-period drift is below ``tol``.

    :param a_field: Growth rate; see :func:`growth_table`.
    :param h_field: Forcing, in any form :func:`growth_table` accepts.
    :raises: :class:`.NoConvergence` when a non-negative, non-zero forcing
        yields a solution that is not positive.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    result = principal_spectrum_point(h, xi, mu, a_field, time_grid, cell, kernel)
    if result.lam >= 0:
        raise PreconditionLambdaNonnegative(result.lam)
    dt = time_grid.dt
    growth = result.growth
    half_spread, _ = _spread_matrix(h, xi, mu, cell, kernel, 0.5 * dt)
    scale = math.exp(result.shift * dt)
    half_scale = math.exp(result.shift * 0.5 * dt)
    full = [scale * matrix for matrix in _step_matrices(result.spread, growth, dt)]
    factors = np.exp(0.25 * dt * (growth - growth.max()))
    half = [half_scale * d[:, None] * half_spread * d[None, :] for d in factors]
    forcing = growth_table(h, h_field, time_grid, cell)
    forcing_mid = _midpoint_table(h, h_field, time_grid, cell)
    nt = time_grid.nt
    state = np.zeros(cell.nx)
    values = np.empty((nt, cell.nx))
    for period in range(1, max_periods + 1):
        start = state
        for k in range(nt):
            values[k] = state
            simpson = (
                full[k] @ forcing[k]
                + 4.0 * (half[k] @ forcing_mid[k])
                + forcing[(k + 1) % nt]
            )
            state = full[k] @ state + dt / 6.0 * simpson
        drift = float(np.abs(state - start).max())
        if drift < tol:
            break
    else:
        raise NoConvergence("nonhomogeneous periodic solution", max_periods)
    if np.all(forcing >= 0) and np.any(forcing > 0) and values.min() <= 0:
        raise NoConvergence("positive nonhomogeneous periodic solution", period)
    return PeriodicOrbit(values=values.copy(), T=h.T, drift=drift, periods=period)


@dataclass(frozen=True)
class StabilityReport(object):
    """Spectrum points at ``mu = 0`` behind (HB1) and (HB2)."""

    lambda_a1: float
    lambda_a2: float
    lambda_a1_c1v: float = None
    lambda_a2_b2u: float = None
    lambda_a1_2b1u: float = None
    sampled_gap: float = None

    @property
    def hb1(self):
        """Return ``True`` when both species persist alone."""
        return self.lambda_a1 > 0 and self.lambda_a2 > 0

    @property
    def invasion(self):
        """Return ``True`` when the first species invades ``(0, v*)``."""
        return self.lambda_a1_c1v is not None and self.lambda_a1_c1v > 0

    @property
    def marginal(self):
        """Return ``True`` when ``(u*, 0)`` is only neutrally stable."""
        return (
            self.lambda_a2_b2u is not None
            and abs(self.lambda_a2_b2u) <= HYPOTHESIS_TOLERANCE
        )

    @property
    def resistance(self):
        """Return ``True`` when the second species cannot invade ``(u*, 0)``."""
        return self.lambda_a2_b2u is not None and (
            self.lambda_a2_b2u < 0 or self.marginal
        )

    @property
    def hb2(self):
        """Return ``True`` when both linear (HB2) verdicts pass."""
        return self.invasion and self.resistance

    @property
    def sampled_stability(self):
        """Return the sampled global-stability verdict, or ``None`` when not run."""
        if self.sampled_gap is None:
            return None
        return self.sampled_gap < STABILITY_GAP

    def rows(self):
        """Return ``(key, value)`` pairs for reports."""
        return [
            ("lambda_0(a1)", self.lambda_a1),
            ("lambda_0(a2)", self.lambda_a2),
            ("lambda_0(a1-c1v*)", self.lambda_a1_c1v),
            ("lambda_0(a2-b2u*)", self.lambda_a2_b2u),
            ("lambda_0(a1-2b1u*)", self.lambda_a1_2b1u),
            ("hb1", self.hb1),
            ("hb2", self.hb2),
            ("hb2_marginal", self.marginal),
            ("global_stability_gap (sampled, not proven)", self.sampled_gap),
            ("global_stability (sampled, not proven)", self.sampled_stability),
        ]


def sample_global_stability(
    h, u_star, v_star, time_grid, cell, kernel=None, samples=4, seed=0,
    periods=STABILITY_PERIODS,
):
    """Return the largest distance to ``(u*, 0)`` after random competitive runs.

    Each run starts from random positive data on the cell; the distance is
    ``max(|u - u*|, |v|)`` after ``periods`` periods.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    form = make_form("competitive", h, time_grid, cell, u_star=u_star, v_star=v_star)
    domain = CellDomain(kernel, cell)
    generator = np.random.default_rng(seed)
    gap = 0.0
    for sample in range(samples):
        u0 = generator.uniform(0.05, 1.0, cell.nx) * u_star.values.max()
        v0 = generator.uniform(0.05, 1.0, cell.nx) * v_star.values.max()
        final = simulate(form, (u0, v0), periods * h.T, domain=domain).final
        distance = max(
            float(np.abs(final[0] - u_star.values[0]).max()), float(final[1].max())
        )
        log.debug(f"Global stability sample {sample}: distance {distance:.3e}")
        gap = max(gap, distance)
    return gap


def check_HB1_HB2(
    h, time_grid, cell, kernel=None, u_star=None, v_star=None, samples=0, seed=0
):
    """Return the :class:`StabilityReport` of ``h``.

    Computes ``lambda_0`` of ``a1``, ``a2``, ``a1 - c1 v*``, ``a2 - b2 u*`` and
    ``a1 - 2 b1 u*`` at ``mu = 0``; with ``samples > 0`` it also samples the
    global-stability clause of (HB2) from random initial data.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)

    def point(field):
        return spectrum_point_value(h, 1, 0.0, field, time_grid, cell, kernel)

    lambda_a1, lambda_a2 = point("a1"), point("a2")
    if lambda_a1 <= 0 or lambda_a2 <= 0:
        return StabilityReport(lambda_a1=lambda_a1, lambda_a2=lambda_a2)
    u_star = u_star or periodic_attractor(h, 1, time_grid, cell, kernel)
    v_star = v_star or periodic_attractor(h, 2, time_grid, cell, kernel)
    table = {
        name: h.evaluate(name, time_grid.times, cell.nodes)
        for name in COEFFICIENT_NAMES
    }
    report = StabilityReport(
        lambda_a1=lambda_a1,
        lambda_a2=lambda_a2,
        lambda_a1_c1v=point(table["a1"] - table["c1"] * v_star.values),
        lambda_a2_b2u=point(table["a2"] - table["b2"] * u_star.values),
        lambda_a1_2b1u=point(table["a1"] - 2 * table["b1"] * u_star.values),
        sampled_gap=sample_global_stability(
            h, u_star, v_star, time_grid, cell, kernel, samples, seed
        )
        if samples
        else None,
    )
    if report.marginal:
        log.warning(f"(u*, 0) is neutrally stable: lambda_0 = {report.lambda_a2_b2u!r}")
    log.info(f"HB1={report.hb1} HB2={report.hb2}")
    return report
