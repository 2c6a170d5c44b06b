"""Rational polyhedra in H- and V-representation

Conversion between the two representations is done by the double description method on the homogenized cone
(lexicographic insertion order, adjacency decided by a rank test). The V-representation of a polyhedron with
lineality lists a point of every minimal face (the vertices of ``P`` intersected with the orthogonal
complement of its lineality space) and the lineality directions as pairs of opposite rays, so the represented
set is always ``conv(vertices) + Cone(rays)``.

Rays are always stored canonically scaled (first nonzero coordinate equal to +1 or -1) and generators are
sorted lexicographically so every output is deterministic.
"""

import functools
import logging

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import lp
from .lp import FaceDesc
from .rational_linalg import (
    DimensionError,
    Matrix,
    Vec,
    add,
    canonical_ray,
    dot,
    inverse,
    is_zero,
    neg,
    nullspace,
    rank,
    rref_with_pivots,
    scale,
    sub,
    vec,
    zeros,
)

if TYPE_CHECKING:  # pragma: no cover
    from .complexes import Fan

logger = logging.getLogger(__name__)

__all__ = [
    "EmptyPolyhedronError",
    "InvalidFaceError",
    "FaceDesc",
    "HPolyhedron",
    "VPolyhedron",
    "PolyCone",
    "AffineHull",
    "cone_generators",
    "h_to_v",
    "v_to_h",
    "faces",
    "recession_cone",
    "polar",
    "normal_cone",
    "normal_fan",
    "fiber",
    "ri_point",
    "contains_ri",
    "affine_hull",
    "implicit_equalities",
    "projection",
    "is_subset",
    "same_set",
]


class EmptyPolyhedronError(ValueError):
    """Raised if an operation needs a nonempty polyhedron"""


class InvalidFaceError(ValueError):
    """Raised if a FaceDesc does not describe a face of the given polyhedron"""


@dataclass(frozen=True)
class HPolyhedron:
    """The set {x : a x <= b}

    Derived data (V-representation, canonical form) is computed lazily and cached on the instance.
    """

    a: Matrix
    b: Vec

    def __post_init__(self) -> None:
        if len(self.b) != self.a.n_rows:
            raise DimensionError(f"'b' has '{len(self.b)}' entries but 'a' has '{self.a.n_rows}' rows")
        if self.a.n_cols < 1:
            raise DimensionError("Polyhedron must live in dimension at least 1")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], rhs: Iterable, dim: Optional[int] = None) -> "HPolyhedron":
        return cls(Matrix.from_rows(rows, dim), vec(rhs))

    @classmethod
    def whole_space(cls, dim: int) -> "HPolyhedron":
        return cls(Matrix((), dim), ())

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "HPolyhedron":
        """Axis-aligned box [lower, upper]"""
        d = len(lower)
        rows = []
        rhs = []
        for j in range(d):
            rows.append(tuple(Fraction(int(i == j)) for i in range(d)))
            rhs.append(Fraction(upper[j]))
            rows.append(tuple(Fraction(-int(i == j)) for i in range(d)))
            rhs.append(-Fraction(lower[j]))
        return cls(Matrix(tuple(rows), d), tuple(rhs))

    @property
    def dim(self) -> int:
        """Ambient dimension"""
        return self.a.n_cols

    @property
    def n_constraints(self) -> int:
        return self.a.n_rows

    def __contains__(self, point: Sequence[Fraction]) -> bool:
        return all(dot(row, point) <= rhs for row, rhs in zip(self.a.rows, self.b))

    def intersect(self, other: "HPolyhedron") -> "HPolyhedron":
        return HPolyhedron(self.a.vstack(other.a), self.b + other.b)

    def with_equalities(self, indices: Iterable[int]) -> "HPolyhedron":
        """Adds the reversed inequalities of ``indices`` so that they hold with equality"""
        indices = list(indices)
        reversed_rows = tuple(neg(self.a[i]) for i in indices)
        return HPolyhedron(Matrix(self.a.rows + reversed_rows, self.dim), self.b + tuple(-self.b[i] for i in indices))

    def negated(self) -> "HPolyhedron":
        """The point reflection {-x : x in P}"""
        return HPolyhedron(self.a.negated(), self.b)

    def lift(self, before: int, after: int) -> "HPolyhedron":
        """Cylinder over P in a space with ``before`` leading and ``after`` trailing free coordinates"""
        rows = tuple(zeros(before) + row + zeros(after) for row in self.a.rows)
        return HPolyhedron(Matrix(rows, before + self.dim + after), self.b)

    def project(self, keep: Sequence[int]) -> "HPolyhedron":
        return projection(self, keep)

    def is_empty(self) -> bool:
        return not lp.is_feasible(self.a, self.b)

    @functools.cached_property
    def vrep(self) -> "VPolyhedron":
        return h_to_v(self)

    @functools.cached_property
    def canonical(self) -> "HPolyhedron":
        return _canonical_form(self)[0]

    @functools.cached_property
    def key(self) -> tuple:
        """Hashable identity of the point set: two polyhedra are equal as sets iff their keys are equal"""
        return _canonical_form(self)[1]

    @functools.cached_property
    def affine_dim(self) -> int:
        """Dimension of the affine hull, -1 for the empty set"""
        vrep = self.vrep
        if not vrep.vertices:
            return -1
        return _generator_dim(vrep.vertices, vrep.rays)


@dataclass(frozen=True)
class VPolyhedron:
    """The set conv(vertices) + Cone(rays)"""

    vertices: Tuple[Vec, ...]
    rays: Tuple[Vec, ...]
    dim: int

    def __post_init__(self) -> None:
        for point in self.vertices + self.rays:
            if len(point) != self.dim:
                raise DimensionError(f"Generator '{point}' does not live in dimension '{self.dim}'")
        if any(is_zero(ray) for ray in self.rays):
            raise ValueError("Rays must be nonzero")

    @classmethod
    def build(cls, vertices: Iterable[Sequence], rays: Iterable[Sequence], dim: int) -> "VPolyhedron":
        """Deduplicates, canonicalizes and sorts the generators"""
        unique_vertices = sorted({vec(v) for v in vertices})
        unique_rays = sorted({canonical_ray(vec(r)) for r in rays if not is_zero(vec(r))})
        return cls(tuple(unique_vertices), tuple(unique_rays), dim)

    def is_empty(self) -> bool:
        return not self.vertices

    def is_bounded(self) -> bool:
        return not self.rays


@dataclass(frozen=True)
class AffineHull:
    """Affine hull {x : equations x = rhs} with independent equations"""

    equations: Matrix
    rhs: Vec
    dim: int


@dataclass(frozen=True)
class PolyCone:
    """Polyhedral cone given as {x : h x <= 0} or as Cone(rays); the other form is computed on demand"""

    dim: int
    h: Optional[Matrix] = None
    given_rays: Optional[Tuple[Vec, ...]] = None

    def __post_init__(self) -> None:
        if self.h is None and self.given_rays is None:
            raise ValueError("PolyCone needs either inequalities or rays")

    @classmethod
    def from_h(cls, h: Matrix) -> "PolyCone":
        return cls(h.n_cols, h=h)

    @classmethod
    def from_rays(cls, rays: Iterable[Sequence], dim: int) -> "PolyCone":
        canonical = sorted({canonical_ray(vec(r)) for r in rays if not is_zero(vec(r))})
        return cls(dim, given_rays=tuple(canonical))

    @functools.cached_property
    def inequalities(self) -> Matrix:
        if self.h is not None:
            return self.h
        return v_to_h(VPolyhedron((zeros(self.dim),), self.given_rays, self.dim)).a

    @functools.cached_property
    def rays(self) -> Tuple[Vec, ...]:
        """Generators; when built from inequalities these are the extreme rays plus pairs of lineality rays"""
        if self.given_rays is not None:
            return self.given_rays
        return h_to_v(self.as_polyhedron()).rays

    @functools.cached_property
    def lineality(self) -> Tuple[Vec, ...]:
        return nullspace(self.inequalities)

    def is_pointed(self) -> bool:
        return not self.lineality

    def as_polyhedron(self) -> HPolyhedron:
        h = self.inequalities
        return HPolyhedron(h, zeros(h.n_rows))

    def __contains__(self, point: Sequence[Fraction]) -> bool:
        return all(dot(row, point) <= 0 for row in self.inequalities.rows)


def _independent_rows(rows: Sequence[Vec], n_cols: int, target: int) -> List[int]:
    """Greedily picks the first ``target`` linearly independent rows"""
    chosen: List[int] = []
    for i, row in enumerate(rows):
        if is_zero(row):
            continue
        candidate = Matrix(tuple(rows[j] for j in chosen) + (row,), n_cols)
        if rank(candidate) > len(chosen):
            chosen.append(i)
            if len(chosen) == target:
                break
    return chosen


def cone_generators(g: Matrix) -> Tuple[Tuple[Vec, ...], Tuple[Vec, ...]]:
    """Double description of the cone {y : g y <= 0}

    :param g:    constraint Matrix
    :return:     (extreme rays of the pointed part, basis of the lineality space)
    """
    k = g.n_cols
    lines = nullspace(g)
    rows = list(g.rows) + list(lines) + [neg(line) for line in lines]
    if len(lines) == k:
        return (), lines
    chosen = _independent_rows(rows, k, k)
    inv = inverse(Matrix(tuple(rows[i] for i in chosen), k))
    # each column of -inv is tight on all chosen rows but one
    rays: Dict[Vec, FrozenSet[int]] = {}
    for j in range(k):
        ray = canonical_ray(neg(inv.column(j)))
        rays[ray] = frozenset(chosen[i] for i in range(k) if i != j)
    chosen_set = set(chosen)
    for index, row in enumerate(rows):
        if index in chosen_set:
            continue
        values = {ray: dot(row, ray) for ray in rays}
        positive = [ray for ray, value in values.items() if value > 0]
        if not positive:
            rays = {ray: (zero | {index}) if values[ray] == 0 else zero for ray, zero in rays.items()}
            continue
        negative = [ray for ray, value in values.items() if value < 0]
        updated: Dict[Vec, FrozenSet[int]] = {}
        for ray, zero in rays.items():
            if values[ray] == 0:
                updated[ray] = zero | {index}
            elif values[ray] < 0:
                updated[ray] = zero
        for p in positive:
            for n in negative:
                common = rays[p] & rays[n]
                if len(common) < k - 2:
                    continue
                if rank(Matrix(tuple(rows[i] for i in sorted(common)), k)) != k - 2:
                    continue
                combined = canonical_ray(sub(scale(values[p], n), scale(values[n], p)))
                updated[combined] = updated.get(combined, frozenset()) | common | {index}
        rays = updated
    logger.debug(f"Double description produced '{len(rays)}' extreme rays and '{len(lines)}' lines")
    return tuple(sorted(rays)), lines


def h_to_v(p: HPolyhedron) -> VPolyhedron:
    """V-representation of an H-polyhedron (empty input gives an empty VPolyhedron)"""
    d = p.dim
    rows = tuple(tuple(row) + (-rhs,) for row, rhs in zip(p.a.rows, p.b)) + (zeros(d) + (Fraction(-1),),)
    rays, lines = cone_generators(Matrix(rows, d + 1))
    vertices = [scale(1 / ray[d], ray[:d]) for ray in rays if ray[d] > 0]
    if not vertices:
        return VPolyhedron((), (), d)
    directions = [ray[:d] for ray in rays if ray[d] == 0]
    for line in lines:
        directions.extend([line[:d], neg(line[:d])])
    return VPolyhedron.build(vertices, directions, d)


def v_to_h(p: VPolyhedron) -> HPolyhedron:
    """H-representation of conv(vertices) + Cone(rays), computed through the polar of the homogenized cone"""
    d = p.dim
    if not p.vertices:
        return HPolyhedron(Matrix((zeros(d),), d), (Fraction(-1),))
    rows = tuple(tuple(v) + (Fraction(1),) for v in p.vertices) + tuple(tuple(r) + (Fraction(0),) for r in p.rays)
    rays, lines = cone_generators(Matrix(rows, d + 1))
    inequalities: Dict[Tuple[Vec, Fraction], None] = {}
    for ray in rays:
        if not is_zero(ray[:d]):
            inequalities[(ray[:d], -ray[d])] = None
    for line in lines:
        if not is_zero(line[:d]):
            inequalities[(line[:d], -line[d])] = None
            inequalities[(neg(line[:d]), line[d])] = None
    ordered = sorted(inequalities)
    return HPolyhedron(Matrix(tuple(row for row, _ in ordered), d), tuple(rhs for _, rhs in ordered))


def _generator_dim(vertices: Sequence[Vec], rays: Sequence[Vec]) -> int:
    base = vertices[0]
    directions = [sub(v, base) for v in vertices[1:]] + list(rays)
    if not directions:
        return 0
    return rank(Matrix(tuple(directions), len(base)))


class _Incidence:
    """Tight-generator bookkeeping shared by face enumeration and canonical forms"""

    def __init__(self, p: HPolyhedron) -> None:
        self.p = p
        self.vrep = p.vrep
        self.tight_vertices = []
        self.tight_rays = []
        for row, rhs in zip(p.a.rows, p.b):
            self.tight_vertices.append(frozenset(i for i, v in enumerate(self.vrep.vertices) if dot(row, v) == rhs))
            self.tight_rays.append(frozenset(i for i, r in enumerate(self.vrep.rays) if dot(row, r) == 0))

    def active(self, vertices: FrozenSet[int], rays: FrozenSet[int]) -> Tuple[int, ...]:
        return tuple(
            i
            for i in range(self.p.n_constraints)
            if vertices <= self.tight_vertices[i] and rays <= self.tight_rays[i]
        )

    def generators(self, active: Iterable[int]) -> Tuple[FrozenSet[int], FrozenSet[int]]:
        vertices = frozenset(range(len(self.vrep.vertices)))
        rays = frozenset(range(len(self.vrep.rays)))
        for i in active:
            vertices &= self.tight_vertices[i]
            rays &= self.tight_rays[i]
        return vertices, rays

    def face_dim(self, active: Sequence[int]) -> int:
        return self.p.dim - rank(self.p.a.select_rows(active))


def faces(p: HPolyhedron) -> List[FaceDesc]:
    """All nonempty faces of p, including p itself, ordered by decreasing dimension then active set

    Breadth-first closure over active sets: a face with active set S yields, for every further inequality i,
    the face generated by the generators tight on S and i (if any vertex remains), whose maximal active set is
    read off the incidence table.
    """
    if p.vrep.is_empty():
        return []
    incidence = _Incidence(p)
    all_vertices = frozenset(range(len(p.vrep.vertices)))
    all_rays = frozenset(range(len(p.vrep.rays)))
    start = incidence.active(all_vertices, all_rays)
    seen = {start: (all_vertices, all_rays)}
    queue = [start]
    while queue:
        active = queue.pop(0)
        vertices, rays = seen[active]
        for i in range(p.n_constraints):
            if i in active:
                continue
            sub_vertices = vertices & incidence.tight_vertices[i]
            if not sub_vertices:
                continue
            sub_rays = rays & incidence.tight_rays[i]
            sub_active = incidence.active(sub_vertices, sub_rays)
            if sub_active not in seen:
                seen[sub_active] = (sub_vertices, sub_rays)
                queue.append(sub_active)
    result = [FaceDesc(active, incidence.face_dim(active)) for active in seen]
    result.sort(key=lambda face: (-face.dim, face.active_set))
    logger.debug(f"Enumerated '{len(result)}' faces")
    return result


def face_polyhedron(p: HPolyhedron, face: FaceDesc) -> HPolyhedron:
    """The face as an H-polyhedron in the ambient space of p"""
    return p.with_equalities(face.active_set)


def recession_cone(p: HPolyhedron) -> PolyCone:
    if p.vrep.is_empty():
        raise EmptyPolyhedronError("Recession cone of an empty polyhedron is not defined here")
    return PolyCone.from_h(p.a)


def polar(c: PolyCone) -> PolyCone:
    """Polar cone {y : y^T x <= 0 for all x in c}"""
    if c.given_rays is not None:
        return PolyCone.from_h(Matrix(c.given_rays, c.dim))
    return PolyCone.from_rays(c.h.rows, c.dim)


def normal_cone(p: HPolyhedron, f: FaceDesc) -> PolyCone:
    """Normal cone Cone(a_i : i in active set) of a face

    :param p:    HPolyhedron
    :param f:    FaceDesc whose active set is maximal for a nonempty face of p
    :return:     PolyCone in V-form
    """
    incidence = _Incidence(p)
    if any(i < 0 or i >= p.n_constraints for i in f.active_set):
        raise InvalidFaceError(f"Active set '{f.active_set}' refers to missing inequalities")
    vertices, rays = incidence.generators(f.active_set)
    if not vertices or incidence.active(vertices, rays) != tuple(sorted(f.active_set)):
        raise InvalidFaceError(f"Active set '{f.active_set}' is not the maximal active set of a face")
    return PolyCone.from_rays((p.a[i] for i in f.active_set), p.dim)


def normal_fan(p: HPolyhedron) -> "Fan":
    """Fan of the normal cones of all faces of p"""
    from .complexes import Fan

    if p.vrep.is_empty():
        raise EmptyPolyhedronError("Normal fan of an empty polyhedron is not defined")
    cones = [PolyCone.from_rays((p.a[i] for i in face.active_set), p.dim).as_polyhedron() for face in faces(p)]
    return Fan.from_cells(cones, p.dim)


def fiber(coupling: HPolyhedron, x0: Sequence[Fraction], keep: Optional[Sequence[int]] = None) -> HPolyhedron:
    """Slice of ``coupling`` with the coordinates ``keep`` fixed to ``x0``

    :param coupling:    HPolyhedron over (x, y)
    :param x0:          values of the fixed coordinates
    :param keep:        indices of the fixed coordinates, defaults to the first len(x0)
    :return:            HPolyhedron over the remaining coordinates (in their original order)
    """
    if keep is None:
        keep = range(len(x0))
    keep = list(keep)
    if len(keep) != len(x0):
        raise DimensionError(f"'x0' has '{len(x0)}' entries for '{len(keep)}' fixed coordinates")
    free = [j for j in range(coupling.dim) if j not in keep]
    fixed_part = coupling.a.select_columns(keep).apply(x0)
    return HPolyhedron(coupling.a.select_columns(free), sub(coupling.b, fixed_part))


def implicit_equalities(p: HPolyhedron) -> Tuple[int, ...]:
    tight = lp.implicit_equalities(p.a, p.b)
    if tight is None:
        raise EmptyPolyhedronError("Empty polyhedron has no implicit equalities")
    return tight


def affine_hull(p: HPolyhedron) -> AffineHull:
    """Independent equations of the affine hull, found from the implicit equalities"""
    tight = implicit_equalities(p)
    system = Matrix(tuple(tuple(p.a[i]) + (p.b[i],) for i in tight), p.dim + 1)
    reduced, pivots = rref_with_pivots(system)
    independent = reduced.rows[: len(pivots)]
    equations = Matrix(tuple(row[:-1] for row in independent), p.dim)
    return AffineHull(equations, tuple(row[-1] for row in independent), p.dim - len(pivots))


def ri_point(p: HPolyhedron) -> Vec:
    """Canonical rational point of the relative interior: barycenter of the vertices plus the sum of the rays"""
    vrep = p.vrep
    if vrep.is_empty():
        raise EmptyPolyhedronError("Empty polyhedron has no relative interior point")
    point = scale(Fraction(1, len(vrep.vertices)), functools.reduce(add, vrep.vertices))
    for ray in vrep.rays:
        point = add(point, ray)
    return point


def contains_ri(p: HPolyhedron, x: Sequence[Fraction]) -> bool:
    """Exact relative interior membership"""
    if x not in p:
        return False
    tight = set(implicit_equalities(p))
    return all(dot(p.a[i], x) < p.b[i] for i in range(p.n_constraints) if i not in tight)


def projection(p: HPolyhedron, keep: Sequence[int]) -> HPolyhedron:
    """Coordinate projection onto ``keep`` (in the given order), via the V-representation"""
    keep = list(keep)
    vrep = p.vrep
    projected = VPolyhedron.build(
        [tuple(v[j] for j in keep) for v in vrep.vertices],
        [tuple(r[j] for j in keep) for r in vrep.rays],
        len(keep),
    )
    return v_to_h(projected)


def is_subset(inner: HPolyhedron, outer: HPolyhedron) -> bool:
    """Exact inclusion test on the generators of ``inner``"""
    vrep = inner.vrep
    return all(v in outer for v in vrep.vertices) and all(
        dot(row, r) <= 0 for r in vrep.rays for row in outer.a.rows
    )


def same_set(p: HPolyhedron, q: HPolyhedron) -> bool:
    return p.key == q.key


def _reduce_row(row: Vec, rhs: Fraction, equations: Matrix, eq_rhs: Vec, pivots: Sequence[int]):
    for eq_row, eq_value, pivot in zip(equations.rows, eq_rhs, pivots):
        factor = row[pivot]
        if factor != 0:
            row = sub(row, scale(factor, eq_row))
            rhs = rhs - factor * eq_value
    return row, rhs


def _canonical_form(p: HPolyhedron) -> Tuple[HPolyhedron, tuple]:
    """Irredundant normalized H-form and the matching set key.

    Equations are the rref of the implicit equalities; facet inequalities are reduced modulo the equations and
    scaled so that their first nonzero coefficient is +1 or -1.
    """
    d = p.dim
    if p.vrep.is_empty():
        empty = HPolyhedron(Matrix((zeros(d),), d), (Fraction(-1),))
        return empty, ("empty", d)
    incidence = _Incidence(p)
    all_vertices = frozenset(range(len(p.vrep.vertices)))
    all_rays = frozenset(range(len(p.vrep.rays)))
    implicit = incidence.active(all_vertices, all_rays)
    system = Matrix(tuple(tuple(p.a[i]) + (p.b[i],) for i in implicit), d + 1)
    reduced, pivots = rref_with_pivots(system)
    equations = Matrix(tuple(row[:-1] for row in reduced.rows[: len(pivots)]), d)
    eq_rhs = tuple(row[-1] for row in reduced.rows[: len(pivots)])
    own_dim = d - len(pivots)
    facets = set()
    for i in range(p.n_constraints):
        if i in implicit:
            continue
        vertices = incidence.tight_vertices[i]
        if not vertices:
            continue
        active = incidence.active(vertices, incidence.tight_rays[i])
        if incidence.face_dim(active) != own_dim - 1:
            continue
        row, rhs = _reduce_row(tuple(p.a[i]), p.b[i], equations, eq_rhs, pivots)
        first = next(abs(v) for v in row if v != 0)
        facets.add((scale(1 / first, row), rhs / first))
    ordered = sorted(facets)
    rows = list(equations.rows) + [neg(row) for row in equations.rows] + [row for row, _ in ordered]
    rhs = list(eq_rhs) + [-v for v in eq_rhs] + [v for _, v in ordered]
    canonical = HPolyhedron(Matrix(tuple(rows), d), tuple(rhs))
    key = ("poly", d, tuple(zip(equations.rows, eq_rhs)), tuple(ordered))
    return canonical, key
