"""Periodic habitats: coefficients, kernels, config files and bound hypotheses.

A habitat config is an INI file::

    [kernel]
    shape = uniform          ; uniform | triangle | cosine-bump
    radius = 1

    [coefficients]
    a1 = "2 + eps*sin(2*pi*t/T)*cos(2*pi*x/p)"
    b1 = "1"
    c1 = "0.5"
    a2 = "1"
    b2 = "1"
    c2 = "1"

    [periods]
    T = 1
    p = 1

    [params]
    eps = 0.3

    [grid]
    nt = 64                  ; time steps per period
    nx = 64                  ; nodes per spatial period
    check_nt = 64            ; hypothesis sampling grid
    check_nx = 64

    [run]
    L = 300                  ; line half-length, a multiple of p
    t_end = 200
    delta = 0.5
    s0 = -150                ; default -L/2
    stride = 1               ; periods per snapshot
    dump_stride = 8          ; nodes per trajectory CSV row
    seed = 0
    samples = 4              ; global-stability sample runs

``[kernel]``, ``[coefficients]`` and ``[periods]`` are required. Keys are case
sensitive and unknown sections or keys are rejected. Expressions may use ``t``,
``x``, ``T``, ``p``, ``pi`` and the ``[params]`` names.

"""
import configparser
import logging
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .const import (
    DEFAULT_NT,
    DEFAULT_NX,
    HYPOTHESIS_TOLERANCE,
    MIN_CELL_POINTS,
    MIN_CHECK_POINTS,
    PERIODICITY_TOL,
    STABILITY_SAMPLES,
)
from .exceptions import (
    ConfigError,
    ExpressionException,
    HypothesisHB0Violated,
    InvalidInvocation,
)
from .expr import CONSTANTS, FUNCTIONS, BinaryOp, Number, parse

log = logging.getLogger(__package__)

COEFFICIENT_NAMES = ("a1", "b1", "c1", "a2", "b2", "c2")
POSITIVE_COEFFICIENTS = ("b1", "c1", "b2", "c2")
VARIABLES = ("t", "x", "T", "p")
RESERVED_NAMES = frozenset(VARIABLES) | frozenset(CONSTANTS) | frozenset(FUNCTIONS)


def _uniform(z, radius):
    return np.full_like(z, 1.0 / (2.0 * radius))


def _triangle(z, radius):
    return (1.0 - np.abs(z) / radius) / radius


def _cosine_bump(z, radius):
    return (1.0 + np.cos(np.pi * z / radius)) / (2.0 * radius)


KERNEL_SHAPES = {
    "cosine-bump": _cosine_bump,
    "triangle": _triangle,
    "uniform": _uniform,
}


@dataclass(frozen=True)
class KernelSpec(object):
    """A built-in dispersal kernel supported on ``(-radius, radius)``."""

    shape: str = "uniform"
    radius: float = 1.0

    def __post_init__(self):
        """Validate the shape and radius."""
        if self.shape not in KERNEL_SHAPES:
            raise InvalidInvocation(f"unknown kernel shape {self.shape!r}")
        if not self.radius > 0:
            raise InvalidInvocation(f"kernel radius must be positive: {self.radius}")

    def density(self, z):
        """Return the kernel density at ``z``; zero outside the support."""
        z = np.asarray(z, dtype=float)
        inside = np.abs(z) < self.radius
        return np.where(inside, KERNEL_SHAPES[self.shape](z, self.radius), 0.0)


@dataclass(frozen=True)
class HabitatSpec(object):
    """Six (T, p)-periodic coefficients and a dispersal kernel."""

    a1: object
    b1: object
    c1: object
    a2: object
    b2: object
    c2: object
    T: float = 1.0
    p: float = 1.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    params: dict = field(default_factory=dict)

    def coefficient(self, name):
        """Return the expression of coefficient ``name``."""
        if name not in COEFFICIENT_NAMES:
            raise InvalidInvocation(f"unknown coefficient {name!r}")
        return getattr(self, name)

    def context(self, t, x):
        """Return the evaluation bindings at ``(t, x)``."""
        bindings = dict(self.params)
        bindings.update({"t": t, "x": x, "T": self.T, "p": self.p})
        return bindings

    def evaluate(self, expression, times, nodes):
        """Return ``expression`` sampled on ``times`` x ``nodes``.

        :param expression: A coefficient name or an expression tree.
        :param times: One-dimensional array of times.
        :param nodes: One-dimensional array of positions.

        """
        if isinstance(expression, str):
            expression = self.coefficient(expression)
        times = np.asarray(times, dtype=float)
        nodes = np.asarray(nodes, dtype=float)
        value = expression.evaluate(self.context(times[:, None], nodes[None, :]))
        return np.array(np.broadcast_to(value, (times.size, nodes.size)), dtype=float)

    def sample(self, nt, nx, time_offset=0.0):
        """Return every coefficient sampled on the ``nt`` x ``nx`` cell grid.

        :param nt: Samples per time period.
        :param nx: Samples per spatial period.
        :param time_offset: (Optional) Shift added to every sample time.

        """
        times, nodes = grid_points(self, nt, nx)
        return {
            name: self.evaluate(name, times + time_offset, nodes)
            for name in COEFFICIENT_NAMES
        }

    def is_space_free(self):
        """Return ``True`` when no coefficient depends on ``x``."""
        return not any(
            "x" in getattr(self, name).free_vars for name in COEFFICIENT_NAMES
        )

    def is_time_free(self):
        """Return ``True`` when no coefficient depends on ``t``."""
        return not any(
            "t" in getattr(self, name).free_vars for name in COEFFICIENT_NAMES
        )


@dataclass(frozen=True)
class Settings(object):
    """Grid and run parameters that travel with a habitat config."""

    nt: int = DEFAULT_NT
    nx: int = DEFAULT_NX
    check_nt: int = DEFAULT_NT
    check_nx: int = DEFAULT_NX
    L: float = 300.0
    t_end: float = 200.0
    delta: float = 0.5
    s0: float = None
    stride: int = 1
    dump_stride: int = 8
    seed: int = 0
    samples: int = STABILITY_SAMPLES

    @property
    def interface(self):
        """Return the initial interface location."""
        return -self.L / 2.0 if self.s0 is None else self.s0


@dataclass(frozen=True)
class Config(object):
    """A loaded habitat config."""

    habitat: HabitatSpec
    settings: Settings


@dataclass(frozen=True)
class CoefficientBounds(object):
    """Minima (``L``) and maxima (``M``) of each coefficient on a grid."""

    a1L: float
    a1M: float
    a2L: float
    a2M: float
    b1L: float
    b1M: float
    b2L: float
    b2M: float
    c1L: float
    c1M: float
    c2L: float
    c2M: float


@dataclass(frozen=True)
class PrimedHypotheses(object):
    """Verdicts of the bound-based sufficient conditions."""

    hb2_prime: bool
    hl0_prime: bool
    hl1_prime: bool
    hl2_prime: bool
    slacks: dict

    def as_dict(self):
        """Return the verdicts keyed by hypothesis name."""
        return {
            "hb2_prime": self.hb2_prime,
            "hl0_prime": self.hl0_prime,
            "hl1_prime": self.hl1_prime,
            "hl2_prime": self.hl2_prime,
        }


_SECTION_KEYS = {
    "coefficients": {name: str for name in COEFFICIENT_NAMES},
    "grid": {"nt": int, "nx": int, "check_nt": int, "check_nx": int},
    "kernel": {"shape": str, "radius": float},
    "periods": {"T": float, "p": float},
    "run": {
        "L": float,
        "t_end": float,
        "delta": float,
        "s0": float,
        "stride": int,
        "dump_stride": int,
        "seed": int,
        "samples": int,
    },
}
_REQUIRED = {
    "coefficients": COEFFICIENT_NAMES,
    "kernel": ("shape", "radius"),
    "periods": ("T", "p"),
}
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


def _unquote(value):
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def _convert(section, key, value, kind):
    try:
        return kind(_unquote(value))
    except ValueError:
        raise ConfigError(section, key, f"expected {kind.__name__}, got {value!r}")


def _parser(text):
    parser = configparser.ConfigParser(
        default_section="__no_defaults__",
        inline_comment_prefixes=(";", "#"),
        interpolation=None,
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(None, None, str(exc).splitlines()[0])
    return parser


def _apply_overrides(parser, overrides):
    for override in overrides:
        key, sep, value = override.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(None, None, f"override {override!r} is not key=value")
        section, dot, option = key.rpartition(".")
        if not dot:
            option = key
            section = "coefficients" if key in COEFFICIENT_NAMES else "params"
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, option, value.strip())
        log.debug(f"Override: [{section}] {option} = {value.strip()}")


def _read_params(parser):
    params = {}
    if not parser.has_section("params"):
        return params
    for key, value in parser.items("params"):
        if not _IDENTIFIER.match(key) or key in RESERVED_NAMES:
            raise ConfigError("params", key, "not a usable parameter name")
        params[key] = _convert("params", key, value, float)
    return params


def _read_values(parser, params):
    values = {}
    for section in parser.sections():
        if section == "params":
            continue
        if section not in _SECTION_KEYS:
            raise ConfigError(section, None, "unknown section")
        for key, value in parser.items(section):
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(section, key, "unknown key")
            kind = _SECTION_KEYS[section][key]
            values[section, key] = _convert(section, key, value, kind)
    for section, keys in _REQUIRED.items():
        for key in keys:
            if (section, key) not in values:
                raise ConfigError(section, key, "missing")
    names = set(VARIABLES) | set(params)
    for key in COEFFICIENT_NAMES:
        try:
            values["coefficients", key] = parse(values["coefficients", key], names)
        except ExpressionException as exc:
            raise ConfigError("coefficients", key, str(exc))
    return values


def _build_settings(values):
    settings = Settings(
        **{
            key: value
            for (section, key), value in values.items()
            if section in ("grid", "run")
        }
    )
    checks = (
        ("grid", "nt", settings.nt >= MIN_CHECK_POINTS),
        ("grid", "nx", settings.nx >= MIN_CELL_POINTS),
        ("grid", "check_nt", settings.check_nt >= MIN_CHECK_POINTS),
        ("grid", "check_nx", settings.check_nx >= MIN_CHECK_POINTS),
        ("run", "L", settings.L > 0),
        ("run", "t_end", settings.t_end > 0),
        ("run", "delta", 0 < settings.delta < 1),
        ("run", "stride", settings.stride >= 1),
        ("run", "dump_stride", settings.dump_stride >= 1),
        ("run", "samples", settings.samples >= 0),
    )
    for section, key, valid in checks:
        if not valid:
            raise ConfigError(section, key, f"invalid value {getattr(settings, key)!r}")
    return settings


def load_config(config_text, overrides=()):
    """Return the :class:`Config` described by ``config_text``.

    :param config_text: The INI text of a habitat config.
    :param overrides: (Optional) ``section.key=value`` strings applied before
        loading; a bare name addresses ``[coefficients]`` when it is a
        coefficient name and ``[params]`` otherwise.

    The coefficients are checked for positivity and periodicity on the
    ``check_nt`` x ``check_nx`` grid.

    """
    parser = _parser(config_text)
    _apply_overrides(parser, overrides)
    params = _read_params(parser)
    values = _read_values(parser, params)
    settings = _build_settings(values)
    try:
        kernel = KernelSpec(values["kernel", "shape"], values["kernel", "radius"])
    except InvalidInvocation as exc:
        raise ConfigError("kernel", None, str(exc))
    for key in ("T", "p"):
        if not values["periods", key] > 0:
            raise ConfigError("periods", key, "period must be positive")
    habitat = HabitatSpec(
        T=values["periods", "T"],
        p=values["periods", "p"],
        kernel=kernel,
        params=params,
        **{name: values["coefficients", name] for name in COEFFICIENT_NAMES},
    )
    verify_habitat(habitat, settings.check_nt, settings.check_nx)
    log.debug(f"Loaded habitat: {habitat}")
    return Config(habitat=habitat, settings=settings)


def load_habitat(config_text):
    """Return the :class:`HabitatSpec` described by ``config_text``."""
    return load_config(config_text).habitat


def grid_points(h, nt, nx):
    """Return the sample times ``iT/nt`` and positions ``jp/nx``."""
    if nt < MIN_CHECK_POINTS or nx < MIN_CHECK_POINTS:
        raise InvalidInvocation(f"sampling grid {nt}x{nx} is below {MIN_CHECK_POINTS}")
    return h.T * np.arange(nt) / nt, h.p * np.arange(nx) / nx


def verify_habitat(h, nt, nx):
    """Raise :class:`.HypothesisHB0Violated` unless ``h`` satisfies (HB0).

    Every coefficient must be finite and (T, p)-periodic on the sampling grid
    and ``b1, c1, b2, c2`` must be positive there.

    """
    times, nodes = grid_points(h, nt, nx)
    for name in COEFFICIENT_NAMES:
        try:
            base = h.evaluate(name, times, nodes)
            shifted_t = h.evaluate(name, times + h.T, nodes)
            shifted_x = h.evaluate(name, times, nodes + h.p)
        except ExpressionException as exc:
            raise ConfigError("coefficients", name, str(exc))
        for shifted in (shifted_t, shifted_x):
            gap = np.abs(shifted - base)
            if gap.max() > PERIODICITY_TOL:
                i, j = np.unravel_index(np.argmax(gap > PERIODICITY_TOL), gap.shape)
                raise HypothesisHB0Violated(
                    name, times[i], nodes[j], gap[i, j], reason="is not (T, p)-periodic"
                )
        if name in POSITIVE_COEFFICIENTS and base.min() <= 0:
            i, j = np.unravel_index(np.argmax(base <= 0), base.shape)
            raise HypothesisHB0Violated(name, times[i], nodes[j], base[i, j])


def bounds(h, nt, nx):
    """Return the :class:`CoefficientBounds` of ``h`` on the ``nt`` x ``nx`` grid."""
    samples = h.sample(nt, nx)
    values = {}
    for name in COEFFICIENT_NAMES:
        values[f"{name}L"] = float(samples[name].min())
        values[f"{name}M"] = float(samples[name].max())
    return CoefficientBounds(**values)


def check_primed_hypotheses(bd, samples=None):
    """Evaluate (HB2)', (HL0)', (HL1)' and (HL2)'.

    :param bd: The :class:`CoefficientBounds` of the habitat.
    :param samples: (Optional) Coefficient samples from :meth:`HabitatSpec.sample`
        on the grid ``bd`` was computed on. The pointwise forms are evaluated
        at every sample; without samples they fall back to their worst case
        over the bounds, which can only turn a pass into a failure.

    """
    u_low = bd.a1L / bd.b1M
    v_high = bd.a2M / bd.c2L
    v_low = bd.a2L / bd.c2M
    if samples is None:
        low = {name: getattr(bd, f"{name}L") for name in COEFFICIENT_NAMES}
        high = {name: getattr(bd, f"{name}M") for name in COEFFICIENT_NAMES}
    else:
        low = high = samples

    hb2 = (bd.a1L - bd.c1M * v_high, bd.a1L * bd.b2L / bd.b1M - bd.a2M)
    hl0 = np.min(low["b2"] * u_low - high["c2"] * v_high)
    base = low["a1"] - high["c1"] * v_high - high["a2"] + 2 * low["c2"] * v_low
    ordering = min(np.min(low["b1"] - high["c1"]), np.min(low["b2"] - high["c2"]))
    hl1 = min(np.min(base - high["b2"] * v_high), ordering)
    hl2 = min(
        np.min(base - high["b2"] * v_high * bd.c1M / bd.b1L),
        np.min(base - high["b2"] * v_high * bd.c2M / bd.b2L),
    )
    slacks = {
        "hb2_prime": float(min(hb2)),
        "hl0_prime": float(hl0),
        "hl1_prime": float(hl1),
        "hl2_prime": float(hl2),
    }
    return PrimedHypotheses(
        hb2_prime=bool(hb2[0] > 0 and hb2[1] >= -HYPOTHESIS_TOLERANCE),
        hl0_prime=bool(hl0 >= -HYPOTHESIS_TOLERANCE),
        hl1_prime=bool(hl1 >= -HYPOTHESIS_TOLERANCE),
        hl2_prime=bool(hl2 >= -HYPOTHESIS_TOLERANCE),
        slacks=slacks,
    )


def constant_reductions(a1, b1, c1, a2, b2, c2):
    """Return (HL0), (HL1), (HL2) for positive constant coefficients.

    With constants ``u* = a1/b1`` and ``v* = a2/c2`` and each hypothesis reduces
    to a closed-form inequality between the six numbers.

    """
    tolerance = HYPOTHESIS_TOLERANCE
    return {
        "hl0": a1 / a2 >= b1 / b2 - tolerance,
        "hl1": a1 + a2 - a2 * c1 / c2 - a2 * b2 / c2 >= -tolerance
        and b1 >= c1
        and b2 >= c2,
        "hl2": a1 + a2 - a2 * c1 / c2 - a2 * b2 * c1 / (b1 * c2) >= -tolerance
        and a1 - a2 * c1 / c2 >= -tolerance,
    }


def scaled_competition_habitat(r1, r2, alpha1, alpha2, kernel=None, T=1.0, p=1.0):
    """Return the constant habitat ``a1=b1=r1, c1=alpha1 r1, a2=c2=r2, b2=alpha2 r2``.

    :param r1: Growth rate of the first species.
    :param r2: Growth rate of the second species.
    :param alpha1: Competition strength of the second species on the first.
    :param alpha2: Competition strength of the first species on the second.

    """
    if not (r1 > 0 and r2 > 0 and alpha1 > 0 and alpha2 > 0):
        raise InvalidInvocation("rates and competition strengths must be positive")
    values = {
        "a1": r1,
        "b1": r1,
        "c1": alpha1 * r1,
        "a2": r2,
        "b2": alpha2 * r2,
        "c2": r2,
    }
    return HabitatSpec(
        T=T,
        p=p,
        kernel=kernel or KernelSpec(),
        **{name: Number(float(value)) for name, value in values.items()},
    )


def scaled_competition_reductions(r1, r2, alpha1, alpha2):
    """Return (HL1) and (HL2) of :func:`scaled_competition_habitat` in reduced form.

    Valid for ``alpha1 < 1 <= alpha2``, where (HL0) always holds.

    """
    if not alpha1 < 1 <= alpha2:
        raise InvalidInvocation("reduced forms need alpha1 < 1 <= alpha2")
    ratio = r1 / r2
    return {
        "hl0": True,
        "hl1": (alpha2 - 1) / (1 - alpha1) <= ratio + HYPOTHESIS_TOLERANCE,
        "hl2": (alpha1 * alpha2 - 1) / (1 - alpha1) <= ratio + HYPOTHESIS_TOLERANCE,
    }


def scaled(h, factor):
    """Return ``h`` with all six coefficients multiplied by ``factor``."""
    return replace(
        h,
        **{
            name: BinaryOp("*", Number(float(factor)), h.coefficient(name))
            for name in COEFFICIENT_NAMES
        },
    )


def describe(h):
    """Return a one-line summary of ``h``."""
    parts = [f"{name}={h.coefficient(name)}" for name in COEFFICIENT_NAMES]
    return (
        f"{' '.join(parts)} T={h.T!r} p={h.p!r} "
        f"kernel={h.kernel.shape}(r0={h.kernel.radius!r})"
    )

