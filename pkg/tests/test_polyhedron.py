"""Unit tests for all functions in polyhedron.py file"""

from fractions import Fraction

import numpy as np
import pytest

from slpquant.lp import FaceDesc
from slpquant.polyhedron import (
    EmptyPolyhedronError,
    HPolyhedron,
    InvalidFaceError,
    PolyCone,
    VPolyhedron,
    affine_hull,
    contains_ri,
    faces,
    fiber,
    h_to_v,
    normal_cone,
    normal_fan,
    polar,
    projection,
    recession_cone,
    ri_point,
    same_set,
    v_to_h,
)
from slpquant.rational_linalg import vec


def triangle():
    """conv{(0,0), (2,0), (1,1)}"""
    return HPolyhedron.from_rows([[0, -1], [1, 1], [-1, 1]], [0, 2, 0])


class Test_h_to_v:
    """Tests for function h_to_v"""

    def test_coupling_polyhedron(self, coupling_polyhedron):
        vrep = h_to_v(coupling_polyhedron)
        expected = {
            vec([0, -1, 0]),
            vec(["-1/2", "-1/2", "-1/2"]),
            vec([0, 0, -1]),
            vec([1, 1, 0]),
            vec(["1/2", "1/2", "1/2"]),
            vec([1, 0, 1]),
        }
        assert set(vrep.vertices) == expected
        assert vrep.rays == (vec([1, 0, 0]),)

    def test_triangle(self):
        assert set(h_to_v(triangle()).vertices) == {vec([0, 0]), vec([2, 0]), vec([1, 1])}

    def test_empty(self):
        vrep = h_to_v(HPolyhedron.from_rows([[1], [-1]], [0, -1]))
        assert vrep.is_empty()

    def test_lineality(self):
        # strip 0 <= y <= 1 in the plane
        vrep = h_to_v(HPolyhedron.from_rows([[0, 1], [0, -1]], [1, 0]))
        assert len(vrep.vertices) == 2
        assert set(vrep.rays) == {vec([1, 0]), vec([-1, 0])}

    def test_deterministic(self, coupling_polyhedron):
        assert h_to_v(coupling_polyhedron) == h_to_v(coupling_polyhedron)


class Test_v_to_h:
    """Tests for function v_to_h"""

    def test_round_trip_is_same_set(self, coupling_polyhedron):
        back = v_to_h(coupling_polyhedron.vrep)
        assert same_set(back, coupling_polyhedron)

    def test_segment_in_plane(self):
        segment = v_to_h(VPolyhedron.build([(0, 0), (1, 1)], (), 2))
        assert segment.affine_dim == 1
        assert vec(["1/2", "1/2"]) in segment
        assert vec([1, 0]) not in segment

    @pytest.mark.parametrize("seed", range(10))
    def test_random_generators(self, seed):
        rng = np.random.default_rng(seed)
        points = [tuple(int(v) for v in point) for point in rng.integers(-3, 4, size=(6, 3))]
        rays = [tuple(int(v) for v in ray) for ray in rng.integers(0, 3, size=(seed % 3, 3))]
        p = v_to_h(VPolyhedron.build(points, rays, 3))
        assert all(vec(point) in p for point in points)
        assert set(p.vrep.vertices) <= {vec(point) for point in points}
        assert same_set(v_to_h(h_to_v(p)), p)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_inequalities(self, seed):
        rng = np.random.default_rng(seed)
        rows = [[int(v) for v in row] for row in rng.integers(-3, 4, size=(7, 3))]
        p = HPolyhedron.from_rows(rows, [int(v) for v in rng.integers(0, 4, size=7)])
        assert same_set(v_to_h(h_to_v(p)), p)


class Test_faces:
    """Tests for function faces"""

    def test_coupling_face_count(self, coupling_polyhedron):
        all_faces = faces(coupling_polyhedron)
        by_dim = {}
        for face in all_faces:
            by_dim[face.dim] = by_dim.get(face.dim, 0) + 1
        assert by_dim == {0: 6, 1: 10, 2: 6, 3: 1}
        assert len(all_faces) == 23

    def test_triangle(self):
        all_faces = faces(triangle())
        assert [face.dim for face in all_faces] == [2, 1, 1, 1, 0, 0, 0]

    def test_empty(self):
        assert faces(HPolyhedron.from_rows([[1], [-1]], [0, -1])) == []


class Test_normal_cone:
    """Tests for function normal_cone"""

    def test_vertex(self):
        cone = normal_cone(triangle(), FaceDesc((0, 1), 0))
        assert set(cone.rays) == {vec([0, -1]), vec([1, 1])}

    def test_not_a_face(self):
        # no vertex is tight on all three rows
        with pytest.raises(InvalidFaceError):
            normal_cone(triangle(), FaceDesc((0, 1, 2), 0))
        with pytest.raises(InvalidFaceError):
            normal_cone(triangle(), FaceDesc((5,), 1))


class Test_normal_fan:
    """Tests for function normal_fan"""

    def test_diamond_fiber(self, coupling_polyhedron):
        diamond = fiber(coupling_polyhedron, vec([2]))
        fan = normal_fan(diamond)
        assert len(fan.cells_of_dim(2)) == 4
        assert len(fan.cells_of_dim(1)) == 4
        assert len(fan.cells_of_dim(0)) == 1

    def test_triangle_fiber(self, coupling_polyhedron):
        small = fiber(coupling_polyhedron, vec(["-1/4"]))
        assert len(normal_fan(small).cells_of_dim(2)) == 3

    def test_empty(self, coupling_polyhedron):
        with pytest.raises(EmptyPolyhedronError):
            normal_fan(fiber(coupling_polyhedron, vec([-1])))


class Test_fiber:
    """Tests for function fiber"""

    def test_slice(self, coupling_polyhedron):
        diamond = fiber(coupling_polyhedron, vec([2]))
        assert diamond.dim == 2
        assert set(diamond.vrep.vertices) == {vec([1, 0]), vec([-1, 0]), vec([0, 1]), vec([0, -1])}

    def test_other_coordinates(self):
        p = HPolyhedron.box([0, 0], [1, 2])
        column = fiber(p, vec(["1/2"]), [0])
        assert set(column.vrep.vertices) == {vec([0]), vec([2])}


class Test_cones:
    """Tests for functions recession_cone and polar"""

    def test_recession(self, coupling_polyhedron):
        cone = recession_cone(coupling_polyhedron)
        assert cone.rays == (vec([1, 0, 0]),)

    def test_polar_of_orthant(self):
        orthant = PolyCone.from_rays([(1, 0), (0, 1)], 2)
        assert set(polar(orthant).rays) == {vec([-1, 0]), vec([0, -1])}

    def test_recession_of_empty(self):
        with pytest.raises(EmptyPolyhedronError):
            recession_cone(HPolyhedron.from_rows([[1], [-1]], [0, -1]))


class Test_relative_interior:
    """Tests for functions ri_point, contains_ri and affine_hull"""

    def test_ri_point_of_triangle(self):
        point = ri_point(triangle())
        assert point == vec(["1", "1/3"])
        assert contains_ri(triangle(), point)
        assert not contains_ri(triangle(), vec([0, 0]))

    def test_segment(self):
        segment = v_to_h(VPolyhedron.build([(0, 0), (2, 2)], (), 2))
        hull = affine_hull(segment)
        assert hull.dim == 1
        assert contains_ri(segment, vec([1, 1]))
        assert not contains_ri(segment, vec([2, 2]))

    def test_empty(self):
        with pytest.raises(EmptyPolyhedronError):
            ri_point(HPolyhedron.from_rows([[1], [-1]], [0, -1]))


class Test_projection:
    """Tests for function projection"""

    def test_coupling_onto_x(self, coupling_polyhedron):
        shadow = projection(coupling_polyhedron, [0])
        assert vec(["-1/2"]) in shadow
        assert vec([100]) in shadow
        assert vec(["-3/4"]) not in shadow

    def test_canonical_key_ignores_redundancy(self):
        p = HPolyhedron.from_rows([[1], [-1], [2]], [1, 0, 5])
        assert same_set(p, HPolyhedron.box([0], [1]))
        assert p.affine_dim == 1
        assert HPolyhedron.from_rows([[1], [-1]], [0, 0]).affine_dim == 0
        assert HPolyhedron.from_rows([[1], [-1]], [0, -1]).affine_dim == -1
        assert Fraction(1, 2) == ri_point(p)[0]
