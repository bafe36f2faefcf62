"""Linear determinacy diagnostics.

The verdict is ``"determinate"`` only when (HB1), (HB2), (HL0), one of (HL1)
and (HL2), the negative shifted spectrum point of the second species and both
witness inequalities all hold on the computed orbits. Empirical front speeds
are reported next to it but never change it.

"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .const import HYPOTHESIS_TOLERANCE, REPORT_SCHEMA_VERSION
from .discretize import LineGrid, sample_kernel
from .exceptions import InvalidInvocation, Lemma41Fails, SpreadcoreException
from .fronts import behind_front_gap, estimate_interval, make_front, run_front
from .habitat import COEFFICIENT_NAMES
from .spectral import (
    check_HB1_HB2,
    nonhomogeneous_periodic,
    periodic_attractor,
    principal_eigenfunction_course,
    principal_spectrum_point,
)
from .speeds import linear_speed
from .util import format_value

log = logging.getLogger(__package__)


@dataclass(frozen=True)
class InequalityCheck(object):
    """Result of a pointwise inequality over the (time x cell) grid."""

    name: str
    holds: bool
    slack: float
    t: float
    x: float


def _orbit_tables(h, orbit):
    nt, nx = orbit.values.shape
    times = h.T * np.arange(nt) / nt
    nodes = h.p * np.arange(nx) / nx
    tables = {name: h.evaluate(name, times, nodes) for name in COEFFICIENT_NAMES}
    return tables, times, nodes


def _inequality(name, margins, times, nodes):
    """Return the :class:`InequalityCheck` of ``min(margins) >= 0``."""
    worst = None
    for margin in margins:
        margin = np.broadcast_to(margin, (times.size, nodes.size))
        i, j = np.unravel_index(np.argmin(margin), margin.shape)
        if worst is None or margin[i, j] < worst[0]:
            worst = (float(margin[i, j]), times[i], nodes[j])
    slack, t, x = worst
    return InequalityCheck(
        name=name,
        holds=slack >= -HYPOTHESIS_TOLERANCE,
        slack=slack,
        t=float(t),
        x=float(x),
    )


def check_HL(h, u_star, v_star, which):
    """Return the :class:`InequalityCheck` of (HL0), (HL1) or (HL2).

    :param which: ``0``, ``1`` or ``2``.

    """
    if which not in (0, 1, 2):
        raise InvalidInvocation(f"no hypothesis HL{which}")
    c, times, nodes = _orbit_tables(h, u_star)
    u, v = u_star.values, v_star.values
    if which == 0:
        margins = [c["b2"] * u - c["c2"] * v]
    else:
        base = c["a1"] - c["c1"] * v - c["a2"] + 2 * c["c2"] * v
        if which == 1:
            margins = [base - c["b2"] * v, c["b1"] - c["c1"], c["b2"] - c["c2"]]
        else:
            margins = [
                base - c["b2"] * v * c["c1"].max() / c["b1"].min(),
                base - c["b2"] * v * c["c2"].max() / c["b2"].min(),
            ]
    check = _inequality(f"hl{which}", margins, times, nodes)
    log.debug(f"HL{which}: {check.holds} (slack {check.slack!r})")
    return check


@dataclass(frozen=True, eq=False)
class Witness(object):
    """Eigenfunction and forced solution at ``mu*``."""

    u: object
    v: object
    lambda2: float
    lambda_xi: float
    mu: float


def witness_fields(
    h, xi, mu_star, time_grid, cell, u_star, v_star, kernel=None, lambda_xi=None
):
    """Return the :class:`Witness` at ``mu_star``.

    ``u`` is the principal eigenfunction course of the invasion linearization
    and ``v`` the periodic solution of the second-species equation forced by
    ``b2 v* u``, both scaled so ``max u = 1``.

    :raises: :class:`.Lemma41Fails` when the shifted second-species spectrum
        point is not negative.

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    tables, _, _ = _orbit_tables(h, u_star)
    invasion = principal_spectrum_point(
        h,
        xi,
        mu_star,
        tables["a1"] - tables["c1"] * v_star.values,
        time_grid,
        cell,
        kernel,
    )
    lambda_xi = invasion.lam if lambda_xi is None else lambda_xi
    shifted = tables["a2"] - 2 * tables["c2"] * v_star.values - lambda_xi
    lambda2 = principal_spectrum_point(
        h, xi, mu_star, shifted, time_grid, cell, kernel
    ).lam
    if lambda2 >= 0:
        raise Lemma41Fails(lambda2)
    course = principal_eigenfunction_course(invasion)
    forced = nonhomogeneous_periodic(
        h,
        xi,
        mu_star,
        shifted,
        tables["b2"] * v_star.values * course.values,
        time_grid,
        cell,
        kernel,
    )
    log.info(f"Witness at mu*={mu_star!r}: lambda2 = {lambda2!r}")
    return Witness(
        u=course, v=forced, lambda2=lambda2, lambda_xi=lambda_xi, mu=mu_star
    )


def check_lemma42(h, u_w, v_w):
    """Return the checks ``c1 v_w <= b1 u_w`` and ``c2 v_w <= b2 u_w``."""
    c, times, nodes = _orbit_tables(h, u_w)
    u, v = u_w.values, v_w.values
    return (
        _inequality("c1v<=b1u", [c["b1"] * u - c["c1"] * v], times, nodes),
        _inequality("c2v<=b2u", [c["b2"] * u - c["c2"] * v], times, nodes),
    )


@dataclass
class DeterminacyReport(object):
    """Every check behind a determinacy verdict for one direction."""

    xi: int
    stability: object = None
    hl: dict = field(default_factory=dict)
    speed: object = None
    witness: object = None
    lemma42: tuple = ()
    interval: object = None
    behind_gap: float = None
    errors: dict = field(default_factory=dict)

    @property
    def verdict(self):
        """Return ``"determinate"`` or ``"not established"``."""
        hl = {name: check.holds for name, check in self.hl.items()}
        passed = (
            self.stability is not None
            and self.stability.hb1
            and self.stability.hb2
            and hl.get("hl0", False)
            and (hl.get("hl1", False) or hl.get("hl2", False))
            and self.witness is not None
            and self.witness.lambda2 < 0
            and len(self.lemma42) == 2
            and all(check.holds for check in self.lemma42)
        )
        return "determinate" if passed else "not established"

    def gaps(self):
        """Return the relative gaps of the empirical speeds to the linear speed."""
        if self.interval is None or self.speed is None:
            return None, None
        c_bar = self.speed.c_star
        return (
            abs(self.interval.c_low_hat - c_bar) / abs(c_bar),
            abs(self.interval.c_high_hat - c_bar) / abs(c_bar),
        )

    def rows(self):
        """Return ``(key, value)`` pairs in a fixed order."""
        rows = [("schema", REPORT_SCHEMA_VERSION), ("xi", self.xi)]
        if self.stability is not None:
            rows.extend(self.stability.rows())
        for name in ("hl0", "hl1", "hl2"):
            if name in self.hl:
                check = self.hl[name]
                rows.extend(
                    [
                        (name, check.holds),
                        (f"{name}_slack", check.slack),
                        (f"{name}_at", f"t={check.t!r} x={check.x!r}"),
                    ]
                )
        if self.speed is not None:
            rows.extend(
                [("c_bar_inf", self.speed.c_star), ("mu_star", self.speed.mu_star)]
            )
        if self.witness is not None:
            rows.extend(
                [
                    ("lambda_xi(mu_star)", self.witness.lambda_xi),
                    ("lambda2", self.witness.lambda2),
                ]
            )
        for check in self.lemma42:
            rows.extend(
                [(check.name, check.holds), (f"{check.name}_slack", check.slack)]
            )
        if self.interval is not None:
            rows.extend(self.interval.rows())
            low_gap, high_gap = self.gaps()
            rows.extend([("gap_low", low_gap), ("gap_high", high_gap)])
        if self.behind_gap is not None:
            rows.append(("behind_front_gap", self.behind_gap))
        rows.extend(
            (f"error_{name}", message) for name, message in self.errors.items()
        )
        rows.append(("verdict", self.verdict))
        return rows

    def to_text(self):
        """Return the report as ``key: value`` lines."""
        lines = [f"spreadcore determinacy report (xi={self.xi:+d})"]
        for key, value in self.rows():
            lines.append(f"{key}: {format_value(value)}")
        return "\n".join(lines) + "\n"


def _attempt(report, name, function, *args, **kwargs):
    try:
        return function(*args, **kwargs)
    except SpreadcoreException as exc:
        log.warning(f"Determinacy step {name} failed: {exc}")
        report.errors[name] = f"{type(exc).__name__}: {exc}"
        return None


def determinacy_verdict(
    h,
    xi,
    time_grid,
    cell,
    settings,
    kernel=None,
    mapper=map,
    u_star=None,
    v_star=None,
    run_fronts=True,
):
    """Return the :class:`DeterminacyReport` of ``h`` in direction ``xi``.

    Failures of individual steps are recorded in ``report.errors`` and leave
    the later steps that need them out.

    :param settings: The :class:`.Settings` giving the line length, run time
        and front shape.
    :param run_fronts: (Optional) Run the front pipeline for the empirical
        speeds. (Default: ``True``)

    """
    kernel = kernel or sample_kernel(h.kernel, cell.dx)
    report = DeterminacyReport(xi=xi)
    orbits = {"u_star": u_star, "v_star": v_star}
    for species, name in ((1, "u_star"), (2, "v_star")):
        if orbits[name] is None:
            orbits[name] = _attempt(
                report, name, periodic_attractor, h, species, time_grid, cell, kernel
            )
    u_star, v_star = orbits["u_star"], orbits["v_star"]
    if u_star is None or v_star is None:
        return report
    report.stability = _attempt(
        report,
        "hb",
        check_HB1_HB2,
        h,
        time_grid,
        cell,
        kernel,
        u_star=u_star,
        v_star=v_star,
        samples=settings.samples,
        seed=settings.seed,
    )
    report.hl = {
        f"hl{which}": check_HL(h, u_star, v_star, which) for which in (0, 1, 2)
    }
    report.speed = _attempt(
        report, "speed", linear_speed, h, xi, time_grid, cell, v_star, kernel, mapper
    )
    if report.speed is None:
        return report
    report.witness = _attempt(
        report,
        "witness",
        witness_fields,
        h,
        xi,
        report.speed.mu_star,
        time_grid,
        cell,
        u_star,
        v_star,
        kernel,
    )
    if report.witness is not None:
        report.lemma42 = check_lemma42(h, report.witness.u, report.witness.v)
    if run_fronts:
        _run_fronts(report, h, xi, time_grid, cell, settings, kernel, u_star, v_star)
    log.info(f"Determinacy (xi={xi:+d}): {report.verdict}")
    return report


def _run_fronts(report, h, xi, time_grid, cell, settings, kernel, u_star, v_star):
    line = _attempt(report, "line", LineGrid, cell, settings.L)
    if line is None:
        return
    init = _attempt(
        report,
        "front",
        make_front,
        h,
        xi,
        line,
        u_star,
        v_star,
        s0=settings.interface,
        delta=settings.delta,
    )
    if init is None:
        return
    trajectory = _attempt(
        report,
        "front",
        run_front,
        h,
        xi,
        init,
        settings.t_end,
        time_grid,
        cell,
        u_star,
        v_star,
        report.speed.c_star,
        kernel,
        settings.stride,
    )
    if trajectory is None:
        return
    report.interval = _attempt(
        report, "interval", estimate_interval, trajectory, u_star
    )
    report.behind_gap = behind_front_gap(trajectory, u_star, v_star)
