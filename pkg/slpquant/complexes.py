"""Polyhedral complexes, fans and chamber complexes

A :class:`PolyComplex` is a finite collection of polyhedra closed under taking nonempty faces. Cells are
identified by the canonical key of their point set, so two complexes are equal iff they have the same key set.
Chamber complexes are built along coordinate projections by refining the arrangement of all hyperplanes that
support projected faces and labelling every arrangement face with the intersection of the projections that
contain a witness point of it.
"""

import logging

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import lp
from .polyhedron import (
    EmptyPolyhedronError,
    HPolyhedron,
    contains_ri,
    face_polyhedron,
    faces,
    fiber,
    is_subset,
    normal_fan,
    projection,
    ri_point,
)
from .rational_linalg import Matrix, Vec, dot, is_zero, neg, scale, zeros

logger = logging.getLogger(__name__)

__all__ = [
    "SupportMismatchError",
    "PolyComplex",
    "Fan",
    "Chamber",
    "ChamberComplex",
    "close_under_faces",
    "intersect_complexes",
    "meet",
    "same_support",
    "refines",
    "chamber_complex",
    "fan_above",
    "split_complex",
]


class SupportMismatchError(ValueError):
    """Raised if the meet of two complexes with different supports is requested"""


def _sort_key(cell: HPolyhedron) -> tuple:
    return (cell.affine_dim, cell.key)


def close_under_faces(cells: Iterable[HPolyhedron]) -> List[HPolyhedron]:
    """Adds all nonempty faces of every cell and removes duplicate point sets"""
    unique: Dict[tuple, HPolyhedron] = {}
    for cell in cells:
        if cell.vrep.is_empty() or cell.key in unique:
            continue
        for face in faces(cell):
            sub_cell = face_polyhedron(cell, face)
            unique.setdefault(sub_cell.key, sub_cell)
    return sorted(unique.values(), key=_sort_key)


def _dedupe(cells: Iterable[HPolyhedron]) -> List[HPolyhedron]:
    unique: Dict[tuple, HPolyhedron] = {}
    for cell in cells:
        if not cell.vrep.is_empty():
            unique.setdefault(cell.key, cell)
    return sorted(unique.values(), key=_sort_key)


@dataclass(frozen=True)
class PolyComplex:
    """Finite polyhedral complex, cells sorted by dimension then canonical key"""

    cells: Tuple[HPolyhedron, ...]
    ambient_dim: int

    @classmethod
    def from_cells(cls, cells: Iterable[HPolyhedron], ambient_dim: int, close: bool = True) -> "PolyComplex":
        """Builds a complex from cells, closing the collection under faces unless told it already is

        :param cells:          iterable of HPolyhedron
        :param ambient_dim:    dimension of the ambient space
        :param close:          add all faces of the given cells
        :return:               PolyComplex
        """
        cells = list(cells)
        for cell in cells:
            if cell.dim != ambient_dim:
                raise ValueError(f"Cell of dimension '{cell.dim}' in a complex of dimension '{ambient_dim}'")
        ordered = close_under_faces(cells) if close else _dedupe(cells)
        return cls(tuple(ordered), ambient_dim)

    @classmethod
    def from_polyhedron(cls, p: HPolyhedron) -> "PolyComplex":
        """The face complex F(p)"""
        return cls.from_cells([p], p.dim)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def is_empty(self) -> bool:
        return not self.cells

    @property
    def keys(self) -> frozenset:
        return frozenset(cell.key for cell in self.cells)

    def same_cells(self, other: "PolyComplex") -> bool:
        return self.ambient_dim == other.ambient_dim and self.keys == other.keys

    def maximal_cells(self) -> List[HPolyhedron]:
        """Cells that are not a proper face of another cell"""
        result = []
        for cell in self.cells:
            if not any(
                other.affine_dim > cell.affine_dim and is_subset(cell, other) for other in self.cells if other is not cell
            ):
                result.append(cell)
        return result

    def cells_of_dim(self, dim: int) -> List[HPolyhedron]:
        return [cell for cell in self.cells if cell.affine_dim == dim]

    def locate(self, x: Sequence[Fraction]) -> Optional[HPolyhedron]:
        """The cell whose relative interior contains x, None outside the support"""
        for cell in self.cells:
            if contains_ri(cell, x):
                return cell
        return None

    def support_contains(self, x: Sequence[Fraction]) -> bool:
        return any(x in cell for cell in self.cells)


@dataclass(frozen=True)
class Fan(PolyComplex):
    """Polyhedral complex whose cells are cones"""

    def __post_init__(self) -> None:
        origin = zeros(self.ambient_dim)
        for cell in self.cells:
            if origin not in cell:
                raise ValueError("Every cell of a fan must contain the origin")

    def negated(self) -> "Fan":
        """The fan of the cones -N"""
        return Fan.from_cells([cell.negated() for cell in self.cells], self.ambient_dim, close=False)


@dataclass(frozen=True)
class Chamber:
    """Chamber of a projection: the cell, a rational relative interior witness and optionally the fan above it"""

    cell: HPolyhedron
    witness: Vec
    fan_above: Optional[Fan] = None


@dataclass(frozen=True)
class ChamberComplex(PolyComplex):
    """Chamber complex along a coordinate projection, keeping the witnesses of its chambers"""

    chambers: Tuple[Chamber, ...] = field(default=())
    keep: Tuple[int, ...] = field(default=())

    def maximal_chambers(self) -> List[Chamber]:
        maximal = {cell.key for cell in self.maximal_cells()}
        return [chamber for chamber in self.chambers if chamber.cell.key in maximal]

    def breakpoints(self) -> List[Fraction]:
        """Zero-dimensional chambers of a one-dimensional complex, sorted"""
        return sorted(chamber.witness[0] for chamber in self.chambers if chamber.cell.affine_dim == 0)


def intersect_complexes(c1: PolyComplex, c2: PolyComplex) -> PolyComplex:
    """All nonempty pairwise intersections of cells, a complex supported on the intersection of the supports"""
    if c1.ambient_dim != c2.ambient_dim:
        raise ValueError(f"Complexes live in dimensions '{c1.ambient_dim}' and '{c2.ambient_dim}'")
    cells = [x.intersect(y) for x in c1.cells for y in c2.cells]
    return PolyComplex.from_cells(cells, c1.ambient_dim, close=False)


def _strict_point(p: HPolyhedron, strict: Sequence[Tuple[Vec, Fraction]]) -> Optional[Vec]:
    """A point of p satisfying ``row x > rhs`` for every strict constraint, None if there is none"""
    d = p.dim
    if not strict:
        outcome = lp.solve_raw(p.a, p.b, zeros(d))
        return outcome.x if isinstance(outcome, lp.Optimal) else None
    rows = [tuple(row) + (Fraction(0),) for row in p.a.rows]
    rhs = list(p.b)
    for row, value in strict:
        rows.append(neg(row) + (Fraction(1),))
        rhs.append(-value)
    rows.append(zeros(d) + (Fraction(1),))
    rhs.append(Fraction(1))
    outcome = lp.solve_raw(Matrix(tuple(rows), d + 1), rhs, zeros(d) + (Fraction(1),), lp.Sense.MAX)
    if isinstance(outcome, lp.Optimal) and outcome.value > 0:
        return outcome.x[:d]
    return None


def _uncovered_point(cell: HPolyhedron, others: Sequence[HPolyhedron]) -> Optional[Vec]:
    """A point of ``cell`` outside every polyhedron of ``others``, None if ``cell`` is covered"""
    if any(is_subset(cell, other) for other in others):
        return None

    def search(strict: List[Tuple[Vec, Fraction]], remaining: Sequence[HPolyhedron]) -> Optional[Vec]:
        point = _strict_point(cell, strict)
        if point is None:
            return None
        for index, other in enumerate(remaining):
            if _strict_point(cell.intersect(other), strict) is None:
                continue
            for row, rhs in zip(other.a.rows, other.b):
                found = search(strict + [(row, rhs)], remaining[index + 1 :])
                if found is not None:
                    return found
            return None
        return point

    return search([], list(others))


def _support_within(c1: PolyComplex, c2: PolyComplex) -> bool:
    targets = c2.maximal_cells()
    return all(_uncovered_point(cell, targets) is None for cell in c1.maximal_cells())


def same_support(c1: PolyComplex, c2: PolyComplex) -> bool:
    """Exact set equality of the supports (unions of cells)"""
    if c1.ambient_dim != c2.ambient_dim:
        return False
    return _support_within(c1, c2) and _support_within(c2, c1)


def meet(c1: PolyComplex, c2: PolyComplex) -> PolyComplex:
    """Common refinement of two complexes with the same support

    :param c1:    PolyComplex
    :param c2:    PolyComplex over the same support
    :return:      PolyComplex of all nonempty pairwise intersections
    """
    if not same_support(c1, c2):
        raise SupportMismatchError("Meet needs two complexes with the same support")
    result = intersect_complexes(c1, c2)
    if isinstance(c1, Fan) and isinstance(c2, Fan):
        return Fan(result.cells, result.ambient_dim)
    return result


def refines(fine: PolyComplex, coarse: PolyComplex) -> bool:
    """True iff the supports agree and every cell of ``fine`` lies in a cell of ``coarse``"""
    if not same_support(fine, coarse):
        return False
    targets = coarse.maximal_cells()
    return all(any(is_subset(cell, target) for target in targets) for cell in fine.cells)


def _hyperplanes(cell: HPolyhedron) -> List[Tuple[Vec, Fraction]]:
    """Hyperplanes through the equations and facets of a polyhedron, normalized to a leading +1"""
    result = []
    for row, rhs in zip(cell.canonical.a.rows, cell.canonical.b):
        if is_zero(row):
            continue
        first = next(v for v in row if v != 0)
        result.append((scale(1 / first, row), rhs / first))
    return result


def _value_range(region: HPolyhedron, normal: Vec) -> Tuple[Optional[Fraction], Optional[Fraction]]:
    """Infimum and supremum of ``normal x`` over a polyhedron, None standing for an infinite bound"""
    vrep = region.vrep
    values = [dot(normal, v) for v in vrep.vertices]
    low: Optional[Fraction] = min(values)
    high: Optional[Fraction] = max(values)
    for ray in vrep.rays:
        slope = dot(normal, ray)
        if slope > 0:
            high = None
        elif slope < 0:
            low = None
    return low, high


def _with_row(region: HPolyhedron, row: Vec, rhs: Fraction) -> HPolyhedron:
    return HPolyhedron(Matrix(region.a.rows + (row,), region.dim), region.b + (rhs,))


def _arrangement_faces(dim: int, hyperplanes: Sequence[Tuple[Vec, Fraction]]) -> List[HPolyhedron]:
    """Closures of the relatively open faces of a hyperplane arrangement in R^dim"""
    regions = [HPolyhedron.whole_space(dim)]
    for normal, offset in hyperplanes:
        refined = []
        for region in regions:
            low, high = _value_range(region, normal)
            straddles = (low is None or low < offset) and (high is None or high > offset)
            if low is not None and low == high or not straddles:
                refined.append(region)
                continue
            refined.append(_with_row(region, normal, offset))
            refined.append(_with_row(_with_row(region, normal, offset), neg(normal), -offset))
            refined.append(_with_row(region, neg(normal), -offset))
        regions = refined
    return regions


def chamber_complex(source: Union[PolyComplex, HPolyhedron], keep: Sequence[int]) -> ChamberComplex:
    """Chamber complex of a polyhedron (or of a complex) along the coordinate projection onto ``keep``

    :param source:    HPolyhedron or PolyComplex in the full space
    :param keep:      indices of the coordinates kept by the projection
    :return:          ChamberComplex in R^len(keep)
    """
    keep = tuple(keep)
    if isinstance(source, HPolyhedron):
        if source.vrep.is_empty():
            return ChamberComplex((), len(keep), (), keep)
        cells = PolyComplex.from_polyhedron(source).cells
    else:
        cells = source.cells
    if not cells:
        return ChamberComplex((), len(keep), (), keep)
    logger.info(f"Computing chamber complex of '{len(cells)}' cells along coordinates '{keep}'")

    projected = _dedupe(projection(cell, keep) for cell in cells)
    hyperplanes = sorted({plane for cell in projected for plane in _hyperplanes(cell)})
    logger.debug(f"Arrangement of '{len(hyperplanes)}' hyperplanes over '{len(projected)}' projected faces")

    labels: Dict[tuple, HPolyhedron] = {}
    for region in _arrangement_faces(len(keep), hyperplanes):
        witness = ri_point(region)
        containing = [cell for cell in projected if witness in cell]
        if not containing:
            continue
        label = containing[0]
        for cell in containing[1:]:
            label = label.intersect(cell)
        labels.setdefault(label.key, label)

    cells_out = close_under_faces(labels.values())
    chambers = tuple(Chamber(cell, ri_point(cell)) for cell in cells_out)
    logger.info(f"Chamber complex has '{len(chambers)}' chambers")
    return ChamberComplex(tuple(cells_out), len(keep), chambers, keep)


def fan_above(source: HPolyhedron, chamber: Chamber, keep: Optional[Sequence[int]] = None) -> Fan:
    """Normal fan of the fiber of ``source`` over the witness of ``chamber``

    :param source:     HPolyhedron over (x, y)
    :param chamber:    Chamber of the projection onto x
    :param keep:       projected coordinates, defaults to the leading ones
    :return:           Fan in the y-space
    """
    slice_ = fiber(source, chamber.witness, keep)
    if slice_.vrep.is_empty():
        raise EmptyPolyhedronError(f"Fiber over witness '{chamber.witness}' is empty")
    return normal_fan(slice_)


def split_complex(c: PolyComplex, normal: Sequence[Fraction], offset: Fraction) -> PolyComplex:
    """Refines every cell of a complex by the hyperplane {x : normal x = offset}"""
    normal = tuple(Fraction(v) for v in normal)
    offset = Fraction(offset)
    pieces = []
    for cell in c.cells:
        below = _with_row(cell, normal, offset)
        above = _with_row(cell, neg(normal), -offset)
        pieces.extend([below, above, _with_row(below, neg(normal), -offset)])
    result = PolyComplex.from_cells(pieces, c.ambient_dim)
    if isinstance(c, Fan):
        return Fan(result.cells, result.ambient_dim)
    return result
