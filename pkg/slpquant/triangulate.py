"""Placing triangulations of polytopes and pointed cones, exact volumes and centroids"""

import itertools
import logging
import math

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .polyhedron import HPolyhedron, PolyCone, VPolyhedron, face_polyhedron, faces, v_to_h
from .rational_linalg import Matrix, Vec, add, dot, rank, rref_with_pivots, det, scale, sub, zeros

logger = logging.getLogger(__name__)

__all__ = [
    "IrrationalVolumeError",
    "NotPointedError",
    "SimplexCell",
    "triangulate_polytope",
    "triangulate_cone",
    "simplex_volume",
    "polytope_volume",
    "centroid",
    "polytope_centroid",
    "local_coordinates",
    "cells_intersect_properly",
]


class IrrationalVolumeError(ValueError):
    """Raised if a lower dimensional simplex does not span an axis-aligned affine subspace"""


class NotPointedError(ValueError):
    """Raised if a cone with a nontrivial lineality space is triangulated"""


@dataclass(frozen=True)
class SimplexCell:
    """Simplex conv(vertices) or simplicial cone Cone(rays)

    Exactly one of ``vertices`` and ``rays`` is used. The cone {0} is a cell without rays.
    """

    vertices: Tuple[Vec, ...] = ()
    rays: Tuple[Vec, ...] = ()
    ambient_dim: int = 0

    def __post_init__(self) -> None:
        if self.vertices and self.rays:
            raise ValueError("A cell is either a simplex or a simplicial cone")
        if self.vertices:
            base = self.vertices[0]
            differences = [sub(v, base) for v in self.vertices[1:]]
            if differences and rank(Matrix(tuple(differences), self.ambient_dim)) != len(differences):
                raise ValueError("Simplex vertices are not affinely independent")
        elif self.rays and rank(Matrix(self.rays, self.ambient_dim)) != len(self.rays):
            raise ValueError("Simplicial cone rays are not linearly independent")

    @property
    def is_cone(self) -> bool:
        return not self.vertices

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1 if self.vertices else len(self.rays)

    def as_polyhedron(self) -> HPolyhedron:
        if self.is_cone:
            return v_to_h(VPolyhedron((zeros(self.ambient_dim),), self.rays, self.ambient_dim))
        return v_to_h(VPolyhedron(self.vertices, (), self.ambient_dim))


def local_coordinates(points: Sequence[Vec]) -> Tuple[int, ...]:
    """Coordinates onto which the affine hull of ``points`` projects injectively

    :param points:    nonempty sequence of points
    :return:          pivot columns of the difference matrix, len = affine dimension
    """
    base = points[0]
    differences = [sub(p, base) for p in points[1:]]
    if not differences:
        return ()
    _, pivots = rref_with_pivots(Matrix(tuple(differences), len(base)))
    return pivots


def _orientation(facet: Sequence[Vec], point: Vec) -> int:
    base = facet[0]
    rows = tuple(sub(v, base) for v in facet[1:]) + (sub(point, base),)
    value = det(Matrix(rows, len(point)))
    return (value > 0) - (value < 0)


def _boundary(simplices: List[Tuple[int, ...]]) -> List[Tuple[Tuple[int, ...], int]]:
    """Facets lying in exactly one simplex, paired with the opposite vertex"""
    counts: Counter = Counter()
    owner = {}
    for simplex in simplices:
        for opposite in simplex:
            facet = tuple(i for i in simplex if i != opposite)
            counts[facet] += 1
            owner[facet] = opposite
    return [(facet, owner[facet]) for facet, count in counts.items() if count == 1]


def _place(points: Sequence[Vec]) -> List[Tuple[int, ...]]:
    """Placing triangulation of full-dimensional points, given in insertion order

    :param points:    points of R^k affinely spanning R^k
    :return:          simplices as sorted tuples of point indices
    """
    k = len(points[0])
    initial = [0]
    for index in range(1, len(points)):
        candidate = initial + [index]
        differences = tuple(sub(points[i], points[initial[0]]) for i in candidate[1:])
        if rank(Matrix(differences, k)) == len(candidate) - 1:
            initial = candidate
            if len(initial) == k + 1:
                break
    simplices = [tuple(initial)]
    for index in range(len(points)):
        if index in initial:
            continue
        point = points[index]
        added = []
        for facet, opposite in _boundary(simplices):
            facet_points = [points[i] for i in facet]
            side = _orientation(facet_points, point)
            if side != 0 and side == -_orientation(facet_points, points[opposite]):
                added.append(tuple(sorted(facet + (index,))))
        simplices.extend(added)
    return simplices


def _placing_cells(points: Sequence[Vec], order: Optional[Callable[[Vec], object]]) -> List[Tuple[Vec, ...]]:
    ordered = sorted(set(points), key=order) if order is not None else sorted(set(points))
    coordinates = local_coordinates(ordered)
    if not coordinates:
        return [(ordered[0],)]
    local = [tuple(p[j] for j in coordinates) for p in ordered]
    return [tuple(ordered[i] for i in simplex) for simplex in _place(local)]


def triangulate_polytope(
    p: Union[VPolyhedron, HPolyhedron], order: Optional[Callable[[Vec], object]] = None
) -> List[SimplexCell]:
    """Placing triangulation on the vertices of a polytope

    :param p:        bounded VPolyhedron (an HPolyhedron is converted)
    :param order:    sort key for the insertion order, lexicographic by default
    :return:         list of SimplexCell covering p
    """
    if isinstance(p, HPolyhedron):
        p = p.vrep
    if p.rays:
        raise ValueError("Polytope triangulation got an unbounded polyhedron, triangulate the cone instead")
    if p.is_empty():
        return []
    cells = [SimplexCell(vertices=vertices, ambient_dim=p.dim) for vertices in _placing_cells(p.vertices, order)]
    logger.debug(f"Triangulated polytope with '{len(p.vertices)}' vertices into '{len(cells)}' simplices")
    return cells


def triangulate_cone(k: PolyCone, order: Optional[Callable[[Vec], object]] = None) -> List[SimplexCell]:
    """Triangulation of a pointed cone into simplicial cones on its extreme rays

    The rays are scaled onto the hyperplane {x : w x = 1} with w = -sum of the inequality rows, which is
    positive on every nonzero point of a pointed cone, and the resulting point set is triangulated.

    :param k:        pointed PolyCone
    :param order:    sort key for the insertion order of the scaled rays
    :return:         list of SimplexCell with rays
    """
    if not k.is_pointed():
        raise NotPointedError(f"Cone has lineality space of dimension '{len(k.lineality)}'")
    rays = k.rays
    if not rays:
        return [SimplexCell(ambient_dim=k.dim)]
    w = zeros(k.dim)
    for row in k.inequalities.rows:
        w = sub(w, row)
    scaled = {scale(1 / dot(w, ray), ray): ray for ray in rays}
    cells = [
        SimplexCell(rays=tuple(scaled[point] for point in points), ambient_dim=k.dim)
        for points in _placing_cells(list(scaled), order)
    ]
    logger.debug(f"Triangulated cone with '{len(rays)}' rays into '{len(cells)}' simplicial cones")
    return cells


def simplex_volume(s: SimplexCell) -> Fraction:
    """Exact volume of a simplex in its own dimension

    :param s:    bounded SimplexCell whose affine hull is {y_j = q_j, j in J} when not full dimensional
    :return:     Fraction
    """
    if s.is_cone:
        raise ValueError("Simplicial cones have no finite volume")
    k = s.dim
    if k == 0:
        return Fraction(1)
    coordinates = local_coordinates(s.vertices)
    base = s.vertices[0]
    differences = [sub(v, base) for v in s.vertices[1:]]
    if k < s.ambient_dim:
        fixed = [j for j in range(s.ambient_dim) if j not in coordinates]
        if any(d[j] != 0 for d in differences for j in fixed):
            raise IrrationalVolumeError("Affine hull of the simplex is not axis aligned")
    local = Matrix(tuple(tuple(d[j] for j in coordinates) for d in differences), k)
    return abs(det(local)) / math.factorial(k)


def polytope_volume(p: Union[VPolyhedron, HPolyhedron]) -> Fraction:
    """Volume of a polytope in the dimension of its affine hull"""
    return sum((simplex_volume(cell) for cell in triangulate_polytope(p)), Fraction(0))


def centroid(s: SimplexCell) -> Vec:
    """Equibarycenter of the simplex vertices"""
    if s.is_cone:
        raise ValueError("Simplicial cones have no centroid")
    total = zeros(s.ambient_dim)
    for v in s.vertices:
        total = add(total, v)
    return scale(Fraction(1, len(s.vertices)), total)


def polytope_centroid(p: Union[VPolyhedron, HPolyhedron]) -> Vec:
    """Volume weighted average of the simplex centroids of a triangulation"""
    cells = triangulate_polytope(p)
    if not cells:
        raise ValueError("Empty polytope has no centroid")
    volumes = [simplex_volume(cell) for cell in cells]
    total = zeros(cells[0].ambient_dim)
    for volume, cell in zip(volumes, cells):
        total = add(total, scale(volume, centroid(cell)))
    return scale(1 / sum(volumes), total)


def cells_intersect_properly(cells: Sequence[SimplexCell]) -> bool:
    """Checks that every pairwise intersection of cells is a common face"""
    polyhedra = [cell.as_polyhedron() for cell in cells]
    face_keys = [{face_polyhedron(p, f).key for f in faces(p)} for p in polyhedra]
    for (i, p), (j, q) in itertools.combinations(enumerate(polyhedra), 2):
        common = p.intersect(q)
        if common.vrep.is_empty():
            continue
        if common.key not in face_keys[i] or common.key not in face_keys[j]:
            return False
    return True
