"""Grids, kernel sampling and discrete convolution.

Node ``z_m = m dx`` with ``|z_m| < r0`` owns the cell ``[z_m - dx/2, z_m + dx/2]``
clipped to the kernel support; the two outermost nodes also own whatever is
left of the support beyond them. A weight is the integral of the (possibly
twisted) density over its node's cell, divided by the integral of the
untwisted density over the whole support, so the untwisted weights sum to one
and the twisted weights sum to the kernel moment.

"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .const import MIN_CELL_POINTS, QUADRATURE_POINTS
from .exceptions import GridTooCoarse, InvalidInvocation, NonFiniteWeight

log = logging.getLogger(__package__)

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(QUADRATURE_POINTS)


@dataclass(frozen=True)
class CellGrid(object):
    """``nx`` equally spaced nodes on one spatial period ``[0, p)``."""

    p: float
    nx: int

    def __post_init__(self):
        """Validate the grid size."""
        if self.nx < MIN_CELL_POINTS:
            raise InvalidInvocation(
                f"a period cell needs at least {MIN_CELL_POINTS} nodes"
            )
        if not self.p > 0:
            raise InvalidInvocation(f"period must be positive: {self.p}")

    @property
    def dx(self):
        """Return the node spacing."""
        return self.p / self.nx

    @property
    def nodes(self):
        """Return the node positions ``j dx``."""
        return self.dx * np.arange(self.nx)


@dataclass(frozen=True)
class LineGrid(object):
    """Nodes ``-L, ..., L`` with the spacing of ``cell``."""

    cell: CellGrid
    L: float

    def __post_init__(self):
        """Require ``L`` to be a positive multiple of the period."""
        periods = self.L / self.cell.p
        if self.L <= 0 or abs(periods - round(periods)) > 1e-9:
            raise InvalidInvocation(f"L={self.L} is not a multiple of p={self.cell.p}")

    @property
    def dx(self):
        """Return the node spacing."""
        return self.cell.dx

    @property
    def half_count(self):
        """Return the number of nodes on each side of the origin."""
        return int(round(self.L / self.cell.p)) * self.cell.nx

    @property
    def size(self):
        """Return the (odd) number of nodes."""
        return 2 * self.half_count + 1

    @property
    def nodes(self):
        """Return the node positions."""
        return self.dx * np.arange(-self.half_count, self.half_count + 1)

    def cell_index(self, xi=1, offsets=None):
        """Return the period-cell index of every node of the line ``y = x xi``.

        :param xi: Direction, ``+1`` or ``-1``; node ``y`` sits at ``x = xi y``.
        :param offsets: (Optional) Integer node offsets from the origin to map
            instead of the line nodes themselves.

        """
        if offsets is None:
            offsets = np.arange(-self.half_count, self.half_count + 1)
        return np.mod(xi * np.asarray(offsets), self.cell.nx)


@dataclass(frozen=True, eq=False)
class SampledKernel(object):
    """Convolution weights ``w_m`` at offsets ``m dx``."""

    spec: object
    dx: float
    offsets: np.ndarray
    weights: np.ndarray
    normalizer: float
    xi: int = 1
    mu: float = 0.0
    twisted: bool = False
    wrapped: bool = False

    @property
    def positions(self):
        """Return the offsets as distances."""
        return self.offsets * self.dx

    @property
    def reach(self):
        """Return the largest offset in nodes."""
        return int(np.max(np.abs(self.offsets)))

    @property
    def total(self):
        """Return the sum of the weights; the kernel moment when twisted."""
        return math.fsum(self.weights)

    def full_weights(self):
        """Return weights for offsets ``-reach..reach`` in order."""
        reach = self.reach
        weights = np.zeros(2 * reach + 1)
        weights[self.offsets + reach] = self.weights
        return weights


def _support_nodes(radius, dx):
    ratio = radius / dx
    if abs(ratio - round(ratio)) < 1e-9:
        return int(round(ratio)) - 1
    return int(math.floor(ratio))


def _integrate(density, lo, hi, s):
    if hi <= lo:
        return 0.0
    half = 0.5 * (hi - lo)
    z = lo + half * (_GAUSS_NODES + 1.0)
    with np.errstate(over="ignore"):
        return half * float(np.dot(_GAUSS_WEIGHTS, np.exp(-s * z) * density(z)))


def _cell_integrals(spec, dx, s):
    """Return the integrals of ``exp(-s z) kappa(z)`` over every node cell.

    Integrals for negative offsets use the evenness of the kernel and are
    computed from the mirrored positive cells with ``-s``, so mirror twists
    give mirror weights bit for bit.

    """
    radius = spec.radius
    reach = _support_nodes(radius, dx)
    positive = [0.0] * reach
    negative = [0.0] * reach
    for m in range(1, reach + 1):
        lo = (m - 0.5) * dx
        hi = radius if m == reach else min((m + 0.5) * dx, radius)
        positive[m - 1] = _integrate(spec.density, lo, hi, s)
        negative[m - 1] = _integrate(spec.density, lo, hi, -s)
    edge = radius if reach == 0 else min(0.5 * dx, radius)
    half = 0.5 * edge
    z = half * (_GAUSS_NODES + 1.0)
    with np.errstate(over="ignore"):
        centre = np.cosh(s * z) * spec.density(z)
        centre = 2.0 * half * float(np.dot(_GAUSS_WEIGHTS, centre))
    return negative[::-1] + [centre] + positive, reach


def sample_kernel(ks, dx):
    """Return the untwisted :class:`SampledKernel` of ``ks`` on spacing ``dx``.

    :param ks: The :class:`.KernelSpec`.
    :param dx: The node spacing; must be smaller than the kernel radius.

    """
    if not dx < ks.radius:
        raise GridTooCoarse(f"dx={dx} does not resolve kernel radius {ks.radius}")
    integrals, reach = _cell_integrals(ks, dx, 0.0)
    normalizer = math.fsum(integrals)
    weights = np.array(integrals) / normalizer
    log.debug(
        f"Sampled {ks.shape} kernel: {weights.size} weights, raw mass {normalizer!r}"
    )
    return SampledKernel(
        spec=ks,
        dx=dx,
        offsets=np.arange(-reach, reach + 1),
        weights=weights,
        normalizer=normalizer,
    )


def twist(k, xi, mu):
    """Return ``k`` with weights multiplied by ``exp(-mu z xi)``.

    The twisted weights are not renormalized; their sum is the kernel moment
    ``\\int exp(-mu z xi) kappa(z) dz`` to quadrature precision.

    :param k: An untwisted, unwrapped :class:`SampledKernel`.
    :param xi: Direction, ``+1`` or ``-1``.
    :param mu: Decay rate.

    """
    if k.twisted or k.wrapped:
        raise InvalidInvocation("twist needs an untwisted line kernel")
    if xi not in (1, -1):
        raise InvalidInvocation(f"direction must be +1 or -1, not {xi}")
    integrals, _ = _cell_integrals(k.spec, k.dx, mu * xi)
    weights = np.array(integrals) / k.normalizer
    if not np.all(np.isfinite(weights)):
        raise NonFiniteWeight(f"twist mu={mu} overflows on radius {k.spec.radius}")
    return replace(k, weights=weights, xi=xi, mu=float(mu), twisted=True)


def wrap_to_cell(k, grid):
    """Fold ``k`` onto the period cell.

    ``W_j`` sums the weights at every offset congruent to ``j`` modulo ``nx``.

    """
    if k.wrapped:
        return k
    folded = np.zeros(grid.nx)
    np.add.at(folded, np.mod(k.offsets, grid.nx), k.weights)
    return replace(k, offsets=np.arange(grid.nx), weights=folded, wrapped=True)


def cell_operator_matrix(k):
    """Return the dense circulant matrix of a wrapped kernel."""
    if not k.wrapped:
        raise InvalidInvocation("kernel is not wrapped onto a cell")
    nx = k.weights.size
    rows = np.arange(nx)[:, None]
    return k.weights[np.mod(np.arange(nx)[None, :] - rows, nx)]


def convolve_cell(k, f):
    """Return ``(K f)_i = sum_j W_j f_{i+j}`` on the period cell."""
    if not k.wrapped:
        raise InvalidInvocation("kernel is not wrapped onto a cell")
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != k.weights.size:
        raise InvalidInvocation(
            f"field has {f.shape[-1]} nodes, kernel {k.weights.size}"
        )
    result = np.zeros_like(f)
    for j in np.flatnonzero(k.weights):
        result += k.weights[j] * np.roll(f, -j, axis=-1)
    return result


def convolve_line(k, f, left_pad, right_pad):
    """Return ``(K f)_i = sum_m w_m f_{i+m}`` on a truncated line.

    :param k: An unwrapped kernel.
    :param f: Field on the line nodes.
    :param left_pad: Values at the ``reach`` nodes left of the line, ordered
        left to right, or a scalar.
    :param right_pad: Values at the ``reach`` nodes right of the line, or a
        scalar.

    """
    if k.wrapped:
        raise InvalidInvocation("line convolution needs an unwrapped kernel")
    reach = k.reach
    left = np.broadcast_to(np.asarray(left_pad, dtype=float), (reach,))
    right = np.broadcast_to(np.asarray(right_pad, dtype=float), (reach,))
    extended = np.concatenate((left, np.asarray(f, dtype=float), right))
    return np.correlate(extended, k.full_weights(), mode="valid")
