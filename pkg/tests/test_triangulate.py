"""Unit tests for all functions in triangulate.py file"""

from fractions import Fraction

import pytest

from slpquant.polyhedron import HPolyhedron, PolyCone, VPolyhedron
from slpquant.rational_linalg import vec
from slpquant.triangulate import (
    IrrationalVolumeError,
    NotPointedError,
    SimplexCell,
    cells_intersect_properly,
    centroid,
    local_coordinates,
    polytope_centroid,
    polytope_volume,
    simplex_volume,
    triangulate_cone,
    triangulate_polytope,
)


def polytope(*vertices):
    return VPolyhedron.build(vertices, (), len(vertices[0]))


class Test_triangulate_polytope:
    """Tests for function triangulate_polytope"""

    def test_square(self):
        cells = triangulate_polytope(polytope((0, 0), (1, 0), (0, 1), (1, 1)))
        assert len(cells) == 2
        assert all(cell.dim == 2 for cell in cells)
        assert cells_intersect_properly(cells)

    def test_cube(self):
        corners = [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
        cells = triangulate_polytope(polytope(*corners))
        assert sum(simplex_volume(cell) for cell in cells) == 1
        assert cells_intersect_properly(cells)

    def test_from_hrep(self):
        cells = triangulate_polytope(HPolyhedron.box([0, 0], [2, 1]))
        assert sum(simplex_volume(cell) for cell in cells) == 2

    def test_point(self):
        cells = triangulate_polytope(polytope((1, 2)))
        assert len(cells) == 1
        assert cells[0].dim == 0

    def test_unbounded(self):
        with pytest.raises(ValueError):
            triangulate_polytope(VPolyhedron.build([(0, 0)], [(1, 0)], 2))

    def test_empty(self):
        assert triangulate_polytope(HPolyhedron.from_rows([[1], [-1]], [0, -1])) == []

    def test_insertion_order_keeps_volume(self):
        diamond = polytope((-1, 0), (1, 0), (0, -1), (0, 1))
        reverse = triangulate_polytope(diamond, order=lambda v: tuple(-a for a in v))
        assert sum(simplex_volume(cell) for cell in reverse) == 2


class Test_triangulate_cone:
    """Tests for function triangulate_cone"""

    def test_orthant(self):
        cells = triangulate_cone(PolyCone.from_rays([(1, 0), (0, 1)], 2))
        assert len(cells) == 1
        assert set(cells[0].rays) == {vec([1, 0]), vec([0, 1])}

    def test_square_pyramid(self):
        cone = PolyCone.from_rays([(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)], 3)
        cells = triangulate_cone(cone)
        assert len(cells) == 2
        assert all(cell.is_cone and cell.dim == 3 for cell in cells)
        assert cells_intersect_properly(cells)

    def test_from_inequalities(self):
        # {x : x2 <= x1, -x2 <= x1}
        cone = PolyCone.from_h(HPolyhedron.from_rows([[-1, 1], [-1, -1]], [0, 0]).a)
        cells = triangulate_cone(cone)
        assert len(cells) == 1
        assert set(cells[0].rays) == {vec([1, 1]), vec([1, -1])}

    def test_half_plane_is_not_pointed(self):
        cone = PolyCone.from_h(HPolyhedron.from_rows([[0, -1]], [0]).a)
        with pytest.raises(NotPointedError):
            triangulate_cone(cone)

    def test_zero_cone(self):
        cone = PolyCone.from_h(HPolyhedron.from_rows([[1, 0], [-1, 0], [0, 1], [0, -1]], [0, 0, 0, 0]).a)
        cells = triangulate_cone(cone)
        assert len(cells) == 1
        assert cells[0].rays == ()


class Test_simplex_volume:
    """Tests for function simplex_volume"""

    @pytest.mark.parametrize(
        "vertices, expected",
        [
            (((0, 0), (2, 0), (1, 1)), Fraction(1)),
            (((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)), Fraction(1, 6)),
            (((0, 1), (2, 1)), Fraction(2)),
            (((3, "1/2"),), Fraction(1)),
        ],
    )
    def test_values(self, vertices, expected):
        cell = SimplexCell(vertices=tuple(vec(v) for v in vertices), ambient_dim=len(vertices[0]))
        assert simplex_volume(cell) == expected

    def test_slanted_segment(self):
        cell = SimplexCell(vertices=(vec([0, 0]), vec([1, 1])), ambient_dim=2)
        with pytest.raises(IrrationalVolumeError):
            simplex_volume(cell)

    def test_dependent_vertices(self):
        with pytest.raises(ValueError):
            SimplexCell(vertices=(vec([0, 0]), vec([1, 1]), vec([2, 2])), ambient_dim=2)

    def test_cone(self):
        with pytest.raises(ValueError):
            simplex_volume(SimplexCell(rays=(vec([1, 0]),), ambient_dim=2))


class Test_centroid:
    """Tests for functions centroid and polytope_centroid"""

    def test_simplex(self):
        cell = SimplexCell(vertices=(vec([0, 0]), vec([2, 0]), vec([1, 1])), ambient_dim=2)
        assert centroid(cell) == vec([1, "1/3"])

    def test_diamond(self):
        diamond = polytope((-1, 0), (1, 0), (0, -1), (0, 1))
        assert polytope_volume(diamond) == 2
        assert polytope_centroid(diamond) == vec([0, 0])

    def test_trapezoid(self):
        # conv{(0,0), (2,0), (1,1), (0,1)}: area 3/2, centroid (7/9, 4/9)
        trapezoid = polytope((0, 0), (2, 0), (1, 1), (0, 1))
        assert polytope_volume(trapezoid) == Fraction(3, 2)
        assert polytope_centroid(trapezoid) == vec(["7/9", "4/9"])


class Test_local_coordinates:
    """Tests for function local_coordinates"""

    def test_axis_aligned_face(self):
        assert local_coordinates([vec([0, 5, 0]), vec([1, 5, 0]), vec([0, 5, 1])]) == (0, 2)

    def test_single_point(self):
        assert local_coordinates([vec([1, 2])]) == ()
