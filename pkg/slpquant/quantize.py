"""Cost distributions and cone valuations

For a region R and a random cost c the valuation is the pair ``(P(c in ri R), E[c | c in ri R])``. Dirac,
uniform-on-polytope and exponential-on-cone costs (and finite mixtures of them) are valued exactly from a
triangulation of ``R`` intersected with the support. Gaussian, uniform-ellipsoid and generic density costs
only have a weak valuation: the returned rationals are within ``eps`` of the true values.
"""

import functools
import logging
import math

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from scipy import special, stats

from . import lp
from .complexes import PolyComplex
from .polyhedron import HPolyhedron, PolyCone, VPolyhedron, contains_ri, ri_point, v_to_h
from .rational_linalg import (
    DimensionError,
    Matrix,
    Vec,
    add,
    det,
    dot,
    inverse,
    is_zero,
    scale,
    to_f64,
    to_rat,
    vec,
    zeros,
)
from .triangulate import (
    SimplexCell,
    centroid,
    local_coordinates,
    simplex_volume,
    triangulate_cone,
    triangulate_polytope,
)

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_EPS",
    "DEFAULT_HK_CONSTANT",
    "MAX_GRID_POINTS",
    "IntegrabilityError",
    "UnsupportedDistributionError",
    "NonConicRegionError",
    "Dirac",
    "UniformPolytope",
    "ExponentialCone",
    "Gaussian",
    "UniformEllipsoid",
    "Mixture",
    "DensityOracle",
    "CostDistribution",
    "ConeValuation",
    "exponential_orthants",
    "is_exact",
    "cone_valuation",
    "weak_cone_valuation",
    "valuation",
    "quantize_fan",
    "expected_cost",
    "sample",
    "check_support",
]

DEFAULT_EPS = Fraction(1, 10**6)
DEFAULT_HK_CONSTANT = Fraction(1)
MAX_GRID_POINTS = 10**7


class IntegrabilityError(ValueError):
    """Raised if theta is not in the interior of the polar of the support cone"""


class UnsupportedDistributionError(TypeError):
    """Raised if an operation is not available for the given distribution"""


class NonConicRegionError(ValueError):
    """Raised if an exponential valuation is asked on a region whose intersection with the support is not a cone"""


def _check_square_positive_definite(m: Matrix) -> None:
    if m.n_rows != m.n_cols:
        raise DimensionError(f"'m' must be square, got shape '{m.shape}'")
    if m != m.transpose():
        raise ValueError("'m' must be symmetric")
    for k in range(1, m.n_rows + 1):
        if det(Matrix(tuple(row[:k] for row in m.rows[:k]), k)) <= 0:
            raise ValueError("'m' must be positive definite")


@dataclass(frozen=True)
class Dirac:
    """Deterministic cost c"""

    c: Vec

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", vec(self.c))

    @property
    def dim(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class UniformPolytope:
    """Uniform cost on a polytope whose affine hull is {y_j = q_j, j in J}"""

    q: VPolyhedron

    def __post_init__(self) -> None:
        if self.q.is_empty() or not self.q.is_bounded():
            raise ValueError("Uniform costs need a nonempty bounded polytope")
        if self.volume <= 0:
            raise ValueError("Uniform costs need a polytope of positive volume")

    @classmethod
    def from_hrep(cls, p: HPolyhedron) -> "UniformPolytope":
        return cls(p.vrep)

    @property
    def dim(self) -> int:
        return self.q.dim

    @functools.cached_property
    def support(self) -> HPolyhedron:
        return v_to_h(self.q)

    @functools.cached_property
    def affine_dim(self) -> int:
        return len(local_coordinates(self.q.vertices))

    @functools.cached_property
    def volume(self) -> Fraction:
        return sum((simplex_volume(cell) for cell in triangulate_polytope(self.q)), Fraction(0))


@dataclass(frozen=True)
class ExponentialCone:
    """Cost with density proportional to exp(theta^T c) on a full-dimensional pointed cone k"""

    k: PolyCone
    theta: Vec

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", vec(self.theta))
        if len(self.theta) != self.k.dim:
            raise DimensionError(f"'theta' has '{len(self.theta)}' entries for a cone in dimension '{self.k.dim}'")
        if not self.k.is_pointed():
            raise ValueError("Exponential costs need a pointed cone")
        if not self.k.rays or len(local_coordinates((zeros(self.dim),) + tuple(self.k.rays))) != self.dim:
            raise ValueError("Exponential costs need a full-dimensional cone")
        for ray in self.k.rays:
            if -dot(self.theta, ray) <= 0:
                raise IntegrabilityError(f"'theta' is not negative on ray '{ray}' of the support cone")

    @property
    def dim(self) -> int:
        return self.k.dim

    @functools.cached_property
    def support(self) -> HPolyhedron:
        return self.k.as_polyhedron()

    @functools.cached_property
    def cells(self) -> List[SimplexCell]:
        return triangulate_cone(self.k)

    @functools.cached_property
    def total(self) -> Fraction:
        """Exponential valuation of the whole support cone"""
        return sum((_brion(cell, self.theta)[0] for cell in self.cells), Fraction(0))


@dataclass(frozen=True)
class Gaussian:
    """Centered Gaussian cost M z with z standard normal, i.e. covariance M^2"""

    m: Matrix

    def __post_init__(self) -> None:
        _check_square_positive_definite(self.m)

    @property
    def dim(self) -> int:
        return self.m.n_rows


@dataclass(frozen=True)
class UniformEllipsoid:
    """Uniform cost on the ellipsoid {M u : |u| <= 1}"""

    m: Matrix

    def __post_init__(self) -> None:
        _check_square_positive_definite(self.m)

    @property
    def dim(self) -> int:
        return self.m.n_rows


@dataclass(frozen=True)
class Mixture:
    """Finite mixture; ``weights`` are positive and sum to exactly one"""

    weights: Tuple[Fraction, ...]
    components: Tuple["CostDistribution", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", vec(self.weights))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.weights) != len(self.components) or not self.components:
            raise ValueError("Mixture needs one positive weight per component")
        if any(w <= 0 for w in self.weights) or sum(self.weights) != 1:
            raise ValueError(f"Mixture weights must be positive and sum to 1, got '{sum(self.weights)}'")
        if len({component.dim for component in self.components}) != 1:
            raise DimensionError("Mixture components live in different dimensions")

    @property
    def dim(self) -> int:
        return self.components[0].dim


@dataclass(frozen=True)
class DensityOracle:
    """Generic density accessed through a batched evaluator

    :param evaluate:       maps an (n, dim) float array to the n density values
    :param tail_radius:    maps eps to r with the weighted tail mass outside the box [-r, r]^dim at most eps
    :param dim:            dimension of the cost
    :param hk_constant:    Hardy-Krause variation constant used to size the integration grid
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    tail_radius: Callable[[Fraction], Fraction]
    dim: int
    hk_constant: Fraction = DEFAULT_HK_CONSTANT


CostDistribution = Union[Dirac, UniformPolytope, ExponentialCone, Gaussian, UniformEllipsoid, Mixture, DensityOracle]


@dataclass(frozen=True)
class ConeValuation:
    """Probability ``p`` of a region and conditional mean ``c``; ``eps`` is zero for exact valuations"""

    p: Fraction
    c: Vec
    eps: Fraction = field(default=Fraction(0))

    def __post_init__(self) -> None:
        if not 0 <= self.p <= 1:
            raise ValueError(f"'p' must lie in [0, 1], not '{self.p}'")
        if self.p == 0 and not is_zero(self.c):
            raise ValueError("Conditional mean of a region of probability zero must be zero")

    @classmethod
    def zero(cls, dim: int, eps: Fraction = Fraction(0)) -> "ConeValuation":
        return cls(Fraction(0), zeros(dim), eps)

    @property
    def is_exact(self) -> bool:
        return self.eps == 0

    @property
    def moment(self) -> Vec:
        """p * c"""
        return scale(self.p, self.c)


def exponential_orthants(theta: Fraction, dim: int) -> Mixture:
    """Equal mixture over the 2^dim orthants of exponential costs with density ~ exp(-theta |c|_1)"""
    theta = to_rat(theta)
    if theta <= 0:
        raise ValueError(f"'theta' must be positive, not '{theta}'")
    components = []
    for signs in _sign_patterns(dim):
        rays = [tuple(Fraction(s) if i == j else Fraction(0) for i in range(dim)) for j, s in enumerate(signs)]
        components.append(ExponentialCone(PolyCone.from_rays(rays, dim), tuple(-theta * s for s in signs)))
    weight = Fraction(1, len(components))
    return Mixture(tuple(weight for _ in components), tuple(components))


def _sign_patterns(dim: int) -> List[Tuple[int, ...]]:
    if dim == 0:
        return [()]
    return [(s,) + rest for s in (1, -1) for rest in _sign_patterns(dim - 1)]


def is_exact(dist: CostDistribution) -> bool:
    """True for the distributions valued exactly by :func:`cone_valuation`"""
    if isinstance(dist, Mixture):
        return all(is_exact(component) for component in dist.components)
    return isinstance(dist, (Dirac, UniformPolytope, ExponentialCone))


def _combine(parts: Sequence[Tuple[Fraction, ConeValuation]], dim: int) -> ConeValuation:
    p = sum((w * part.p for w, part in parts), Fraction(0))
    eps = max((part.eps for _, part in parts), default=Fraction(0))
    if p == 0:
        return ConeValuation.zero(dim, eps)
    moment = zeros(dim)
    for w, part in parts:
        moment = add(moment, scale(w, part.moment))
    return ConeValuation(min(p, Fraction(1)), scale(1 / p, moment), eps)


def _brion(cell: SimplexCell, theta: Vec) -> Tuple[Fraction, Vec]:
    """Exponential valuation |det R| prod 1/(-theta^T r) of a simplicial cone and its conditional mean"""
    rates = [-dot(theta, ray) for ray in cell.rays]
    phi = abs(det(Matrix(cell.rays, cell.ambient_dim)))
    mean = zeros(cell.ambient_dim)
    for rate, ray in zip(rates, cell.rays):
        phi /= rate
        mean = add(mean, scale(1 / rate, ray))
    return phi, mean


def _check_region(dist: CostDistribution, region: HPolyhedron) -> None:
    if region.dim != dist.dim:
        raise DimensionError(f"Region of dimension '{region.dim}' for a cost of dimension '{dist.dim}'")


def cone_valuation(dist: CostDistribution, region: HPolyhedron) -> ConeValuation:
    """Exact probability and conditional mean of a region

    :param dist:      Dirac, UniformPolytope, ExponentialCone or a Mixture of those
    :param region:    HPolyhedron in the cost space
    :return:          ConeValuation with eps = 0
    """
    _check_region(dist, region)
    m = dist.dim
    if isinstance(dist, Dirac):
        if contains_ri(region, dist.c):
            return ConeValuation(Fraction(1), dist.c)
        return ConeValuation.zero(m)
    if isinstance(dist, Mixture):
        return _combine([(w, cone_valuation(part, region)) for w, part in zip(dist.weights, dist.components)], m)
    if isinstance(dist, UniformPolytope):
        inter = region.intersect(dist.support)
        if inter.vrep.is_empty() or inter.affine_dim < dist.affine_dim:
            return ConeValuation.zero(m)
        if dist.affine_dim < m and not contains_ri(region, ri_point(inter)):
            # a flat support on the relative boundary belongs to a lower-dimensional cell
            return ConeValuation.zero(m)
        cells = triangulate_polytope(inter.vrep)
        volumes = [simplex_volume(cell) for cell in cells]
        moment = zeros(m)
        for volume, cell in zip(volumes, cells):
            moment = add(moment, scale(volume, centroid(cell)))
        total = sum(volumes, Fraction(0))
        return ConeValuation(total / dist.volume, scale(1 / total, moment))
    if isinstance(dist, ExponentialCone):
        inter = region.intersect(dist.support)
        if inter.vrep.is_empty() or inter.affine_dim < m:
            return ConeValuation.zero(m)
        if inter.vrep.vertices != (zeros(m),):
            raise NonConicRegionError("Region meets the exponential support in a set that is not a cone")
        phi = Fraction(0)
        moment = zeros(m)
        for cell in triangulate_cone(PolyCone.from_rays(inter.vrep.rays, m)):
            cell_phi, cell_mean = _brion(cell, dist.theta)
            phi += cell_phi
            moment = add(moment, scale(cell_phi, cell_mean))
        logger.debug(f"Exponential valuation '{phi}' of a region against '{dist.total}' for the support")
        return ConeValuation(phi / dist.total, scale(1 / phi, moment))
    raise UnsupportedDistributionError(
        f"No exact valuation for '{type(dist).__name__}' costs, use weak_cone_valuation instead"
    )


def _mp_to_rat(value, dps: int) -> Fraction:
    return Fraction(mpmath.nstr(value, dps))


def _float_to_rat(value: float) -> Fraction:
    return Fraction(repr(float(value)))


def _radial_mean(dist: Union[Gaussian, UniformEllipsoid], m: int):
    """E|u| for the rotation invariant law of u = M^-1 c"""
    if isinstance(dist, Gaussian):
        return mpmath.sqrt(2) * mpmath.gamma(mpmath.mpf(m + 1) / 2) / mpmath.gamma(mpmath.mpf(m) / 2)
    return mpmath.mpf(m) / (m + 1)


def _mpf(value: Fraction):
    return mpmath.mpf(value.numerator) / value.denominator


def _angle(direction: Vec):
    return mpmath.atan2(_mpf(direction[1]), _mpf(direction[0]))


def _rotational_valuation(dist: Union[Gaussian, UniformEllipsoid], region: HPolyhedron, eps: Fraction) -> ConeValuation:
    """Closed forms in dimension one and two for a cone region: angle fraction and arc centroid"""
    m = dist.dim
    vrep = region.vrep
    dps = max(15, int(math.ceil(-math.log10(float(eps)))) + 5)
    rays = set(vrep.rays)
    paired = {ray for ray in rays if tuple(-v for v in ray) in rays}
    with mpmath.workdps(dps):
        radial = _radial_mean(dist, m)
        if m == 1:
            if paired:
                return ConeValuation(Fraction(1), zeros(1), eps)
            (ray,) = rays
            mean = radial * _mpf(dist.m[0][0]) * (1 if ray[0] > 0 else -1)
            return ConeValuation(Fraction(1, 2), (_mp_to_rat(mean, dps),), eps)
        m_inv = inverse(dist.m)
        if len(paired) == 4:
            return ConeValuation(Fraction(1), zeros(2), eps)
        if paired:
            line = m_inv.apply(next(iter(paired)))
            (inside,) = [m_inv.apply(ray) for ray in rays - paired]
            centre = (-line[1], line[0])
            if dot(centre, inside) < 0:
                centre = (line[1], -line[0])
            a = _angle(centre) - mpmath.pi / 2
            b = a + mpmath.pi
        else:
            first, second = [m_inv.apply(ray) for ray in sorted(rays)]
            a = _angle(first)
            width = (_angle(second) - a) % (2 * mpmath.pi)
            if width > mpmath.pi:
                a = _angle(second)
                width = 2 * mpmath.pi - width
            b = a + width
        width = b - a
        u = (
            radial * (mpmath.sin(b) - mpmath.sin(a)) / width,
            radial * (mpmath.cos(a) - mpmath.cos(b)) / width,
        )
        c = tuple(_mpf(row[0]) * u[0] + _mpf(row[1]) * u[1] for row in dist.m.rows)
        return ConeValuation(_mp_to_rat(width / (2 * mpmath.pi), dps), tuple(_mp_to_rat(v, dps) for v in c), eps)


def _gaussian_density(dist: Gaussian) -> Callable[[np.ndarray], np.ndarray]:
    m = to_f64(dist.m)
    law = stats.multivariate_normal(mean=np.zeros(dist.dim), cov=m @ m.T)
    return lambda points: np.atleast_1d(law.pdf(points))


def _ellipsoid_density(dist: UniformEllipsoid) -> Callable[[np.ndarray], np.ndarray]:
    m = to_f64(dist.m)
    m_inv = np.linalg.inv(m)
    unit_ball = np.pi ** (dist.dim / 2) / special.gamma(dist.dim / 2 + 1)
    height = 1.0 / (unit_ball * abs(np.linalg.det(m)))

    def evaluate(points: np.ndarray) -> np.ndarray:
        inside = np.linalg.norm(points @ m_inv.T, axis=1) <= 1.0
        return np.where(inside, height, 0.0)

    return evaluate


def _tail_radius(dist: CostDistribution, eps: Fraction) -> Fraction:
    if isinstance(dist, DensityOracle):
        return to_rat(dist.tail_radius(eps))
    spread = float(np.linalg.norm(to_f64(dist.m), 2))
    if isinstance(dist, UniformEllipsoid):
        return _float_to_rat(spread)
    radius = stats.chi(df=dist.dim).isf(float(eps) / (4 * (1 + dist.dim))) + 1
    return _float_to_rat(radius * spread)


def _riemann_valuation(
    density: Callable[[np.ndarray], np.ndarray],
    region: HPolyhedron,
    radius: Fraction,
    eps: Fraction,
    hk_constant: Fraction,
) -> ConeValuation:
    """Midpoint Riemann sums of f and c f over the region clipped to the box [-radius, radius]^dim

    The grid is sized so that the Hardy-Krause bound hk * dim * width / n stays below eps / 2; the number of
    points is capped at MAX_GRID_POINTS and the achieved bound is reported in the returned eps.
    """
    m = region.dim
    width = 2 * float(radius)
    per_axis = max(1, int(math.ceil(float(hk_constant) * m * width / (float(eps) / 2))))
    cap = max(1, int(MAX_GRID_POINTS ** (1 / m)))
    if per_axis > cap:
        logger.warning(f"Riemann grid capped at '{cap}' points per axis instead of '{per_axis}'")
        per_axis = cap
    achieved = _float_to_rat(float(hk_constant) * m * width / per_axis) + eps / 2
    step = width / per_axis
    centers = -float(radius) + step * (np.arange(per_axis) + 0.5)
    if m > 1:
        rest = np.stack(np.meshgrid(*([centers] * (m - 1)), indexing="ij"), axis=-1).reshape(-1, m - 1)
    else:
        rest = np.empty((1, 0))
    a = to_f64(region.a).reshape(region.n_constraints, m)
    b = to_f64(region.b).reshape(region.n_constraints)
    mass = 0.0
    moment = np.zeros(m)
    for first in centers:
        points = np.column_stack([np.full(len(rest), first), rest])
        inside = np.all(points @ a.T <= b + 1e-12, axis=1)
        if not inside.any():
            continue
        weights = density(points[inside]) * step**m
        mass += weights.sum()
        moment += weights @ points[inside]
    logger.debug(f"Riemann sum over '{per_axis ** m}' grid points gave mass '{mass}'")
    p = min(max(_float_to_rat(mass), Fraction(0)), Fraction(1))
    if p == 0:
        return ConeValuation.zero(m, achieved)
    return ConeValuation(p, tuple(_float_to_rat(v / mass) for v in moment), achieved)


def weak_cone_valuation(
    dist: CostDistribution, region: HPolyhedron, eps: Union[Fraction, int, str] = DEFAULT_EPS
) -> ConeValuation:
    """Probability and conditional mean of a region within ``eps``

    Exact distributions are valued exactly. Gaussian and uniform-ellipsoid costs over cones in dimension one
    or two use closed forms; everything else goes through a Riemann sum over the tail box.

    :param dist:      any CostDistribution
    :param region:    HPolyhedron in the cost space
    :param eps:       positive rational accuracy
    :return:          ConeValuation carrying the achieved accuracy in ``eps``
    """
    eps = to_rat(eps)
    if eps <= 0:
        raise ValueError(f"'eps' must be positive, not '{eps}'")
    _check_region(dist, region)
    m = dist.dim
    if isinstance(dist, Mixture):
        parts = [(w, weak_cone_valuation(part, region, eps)) for w, part in zip(dist.weights, dist.components)]
        return _combine(parts, m)
    if is_exact(dist):
        return cone_valuation(dist, region)
    if region.vrep.is_empty() or region.affine_dim < m:
        return ConeValuation.zero(m, eps)
    if isinstance(dist, (Gaussian, UniformEllipsoid)):
        if m <= 2 and region.vrep.vertices == (zeros(m),):
            return _rotational_valuation(dist, region, eps)
        density = _gaussian_density(dist) if isinstance(dist, Gaussian) else _ellipsoid_density(dist)
        return _riemann_valuation(density, region, _tail_radius(dist, eps / 2), eps, DEFAULT_HK_CONSTANT)
    return _riemann_valuation(dist.evaluate, region, _tail_radius(dist, eps / 2), eps, dist.hk_constant)


def valuation(dist: CostDistribution, region: HPolyhedron, eps: Optional[Fraction] = None) -> ConeValuation:
    """Exact valuation when available, weak valuation at ``eps`` (default DEFAULT_EPS) otherwise"""
    if is_exact(dist):
        return cone_valuation(dist, region)
    return weak_cone_valuation(dist, region, DEFAULT_EPS if eps is None else eps)


def quantize_fan(
    dist: CostDistribution, fan: PolyComplex, eps: Optional[Fraction] = None
) -> List[Tuple[HPolyhedron, ConeValuation]]:
    """Valuations of all cells of a fan covering the cost space, cells of probability zero dropped"""
    result = []
    for cell in fan.cells:
        value = valuation(dist, cell, eps)
        if value.p > 0:
            result.append((cell, value))
    logger.debug(f"Quantized '{len(fan.cells)}' cells into '{len(result)}' atoms")
    return result


def expected_cost(dist: CostDistribution, eps: Optional[Fraction] = None) -> Vec:
    """E[c], the valuation of the whole cost space"""
    return valuation(dist, HPolyhedron.whole_space(dist.dim), eps).c


def sample(dist: CostDistribution, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draws costs as float64

    :param dist:    any CostDistribution except DensityOracle
    :param rng:     numpy Generator
    :param size:    number of draws, None for a single draw of shape (dim,)
    :return:        array of shape (dim,) or (size, dim)
    """
    n = 1 if size is None else size
    draws = _sample(dist, rng, n)
    return draws[0] if size is None else draws


def _sample(dist: CostDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    m = dist.dim
    if isinstance(dist, Dirac):
        return np.tile(to_f64(dist.c), (n, 1))
    if isinstance(dist, UniformPolytope):
        cells = triangulate_polytope(dist.q)
        weights = np.array([float(simplex_volume(cell)) for cell in cells])
        chosen = rng.choice(len(cells), size=n, p=weights / weights.sum())
        vertices = np.array([[to_f64(v) for v in cell.vertices] for cell in cells])
        barycentric = rng.dirichlet(np.ones(vertices.shape[1]), size=n)
        return np.einsum("nk,nkd->nd", barycentric, vertices[chosen])
    if isinstance(dist, ExponentialCone):
        phis = np.array([float(_brion(cell, dist.theta)[0]) for cell in dist.cells])
        chosen = rng.choice(len(dist.cells), size=n, p=phis / phis.sum())
        result = np.empty((n, m))
        for index, cell in enumerate(dist.cells):
            rows = np.flatnonzero(chosen == index)
            if not len(rows):
                continue
            rays = np.array([to_f64(ray) for ray in cell.rays])
            rates = np.array([float(-dot(dist.theta, ray)) for ray in cell.rays])
            result[rows] = rng.exponential(1 / rates, size=(len(rows), len(rates))) @ rays
        return result
    if isinstance(dist, Gaussian):
        return rng.standard_normal((n, m)) @ to_f64(dist.m).T
    if isinstance(dist, UniformEllipsoid):
        directions = rng.standard_normal((n, m))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = rng.random(n) ** (1 / m)
        return (directions * radii[:, None]) @ to_f64(dist.m).T
    if isinstance(dist, Mixture):
        weights = np.array([float(w) for w in dist.weights])
        chosen = rng.choice(len(dist.components), size=n, p=weights / weights.sum())
        result = np.empty((n, m))
        for index, component in enumerate(dist.components):
            rows = np.flatnonzero(chosen == index)
            if len(rows):
                result[rows] = _sample(component, rng, len(rows))
        return result
    raise UnsupportedDistributionError(f"Sampling is not available for '{type(dist).__name__}' costs")


def _in_negative_dual_cone(a: Matrix, y: Vec) -> bool:
    """y in -Cone(a^T), decided by feasibility of a^T lam = -y, lam >= 0"""
    q, m = a.shape
    if q == 0:
        return is_zero(y)
    at = a.transpose()
    rows = at.rows + at.negated().rows + Matrix.identity(q).negated().rows
    rhs = tuple(-v for v in y) + tuple(y) + zeros(q)
    return lp.is_feasible(Matrix(rows, q), rhs)


def check_support(dist: CostDistribution, a: Matrix) -> bool:
    """True iff the support of the cost lies in -Cone(a^T), a being the recourse matrix"""
    if a.n_cols != dist.dim:
        raise DimensionError(f"Recourse matrix with '{a.n_cols}' columns for a cost of dimension '{dist.dim}'")
    if isinstance(dist, Dirac):
        return _in_negative_dual_cone(a, dist.c)
    if isinstance(dist, UniformPolytope):
        return all(_in_negative_dual_cone(a, v) for v in dist.q.vertices)
    if isinstance(dist, ExponentialCone):
        return all(_in_negative_dual_cone(a, ray) for ray in dist.k.rays)
    if isinstance(dist, Mixture):
        return all(check_support(component, a) for component in dist.components)
    m = dist.dim
    units = [tuple(Fraction(s) if i == j else Fraction(0) for i in range(m)) for j in range(m) for s in (1, -1)]
    return all(_in_negative_dual_cone(a, unit) for unit in units)
