"""Unit tests for all functions in quantize.py file"""

import math

from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from slpquant.polyhedron import HPolyhedron, PolyCone, VPolyhedron, fiber, normal_fan
from slpquant.quantize import (
    ConeValuation,
    DensityOracle,
    Dirac,
    ExponentialCone,
    Gaussian,
    IntegrabilityError,
    Mixture,
    NonConicRegionError,
    UniformEllipsoid,
    UniformPolytope,
    UnsupportedDistributionError,
    check_support,
    cone_valuation,
    expected_cost,
    exponential_orthants,
    is_exact,
    quantize_fan,
    sample,
    valuation,
    weak_cone_valuation,
)
from slpquant.rational_linalg import DimensionError, Matrix, solve, vec

from .conftest import exact_costs, l1_ball, linf_ball, random_stage

SQRT_2_OVER_PI = math.sqrt(2 / math.pi)


def quadrant():
    """{y : y >= 0} in the plane"""
    return HPolyhedron.from_rows([[-1, 0], [0, -1]], [0, 0])


def skewed_exponential():
    """Independent exponential coordinates with rates 1 and 2"""
    return ExponentialCone(PolyCone.from_rays([(1, 0), (0, 1)], 2), (-1, -2))


def uniform_unit_interval():
    return DensityOracle(
        evaluate=lambda points: np.where((points[:, 0] >= 0) & (points[:, 0] <= 1), 1.0, 0.0),
        tail_radius=lambda eps: Fraction(1),
        dim=1,
    )


def axis_segment():
    """Uniform cost on the segment from (-1, 0) to (1, 0)"""
    return UniformPolytope(VPolyhedron.build([(-1, 0), (1, 0)], (), 2))


def counterclockwise_rays(rng):
    """Two independent integer rays, the second less than a half turn counterclockwise from the first"""
    while True:
        first, second = (tuple(int(v) for v in rng.integers(-3, 4, size=2)) for _ in range(2))
        turn = first[0] * second[1] - first[1] * second[0]
        if turn > 0:
            return first, second
        if turn < 0:
            return second, first


class Test_distributions:
    """Tests for the validation of cost distributions"""

    def test_unbounded_uniform(self):
        with pytest.raises(ValueError):
            UniformPolytope(VPolyhedron.build([(0, 0)], [(1, 0)], 2))

    def test_integrability(self):
        with pytest.raises(IntegrabilityError):
            ExponentialCone(PolyCone.from_rays([(1, 0), (0, 1)], 2), (1, -1))

    def test_exponential_needs_full_dimensional_cone(self):
        with pytest.raises(ValueError):
            ExponentialCone(PolyCone.from_rays([(1, 0)], 2), (-1, -1))

    @pytest.mark.parametrize("rows", [[[1, 2], [2, 1]], [[1, 1], [0, 1]], [[1, 0]]])
    def test_gaussian_matrix(self, rows):
        with pytest.raises(ValueError):
            Gaussian(Matrix.from_rows(rows))

    def test_mixture_weights(self):
        with pytest.raises(ValueError):
            Mixture((Fraction(1, 2), Fraction(1, 3)), (Dirac((0,)), Dirac((1,))))
        with pytest.raises(DimensionError):
            Mixture((Fraction(1, 2), Fraction(1, 2)), (Dirac((0,)), Dirac((1, 1))))

    def test_exponential_orthants(self):
        mixture = exponential_orthants(1, 2)
        assert len(mixture.components) == 4
        assert mixture.weights == (Fraction(1, 4),) * 4
        with pytest.raises(ValueError):
            exponential_orthants(0, 2)

    def test_is_exact(self):
        assert is_exact(exponential_orthants(2, 1))
        assert not is_exact(Mixture((Fraction(1, 2), Fraction(1, 2)), (Dirac((0,)), Gaussian(Matrix.identity(1)))))

    def test_cone_valuation_bounds(self):
        with pytest.raises(ValueError):
            ConeValuation(Fraction(2), vec([0]))
        with pytest.raises(ValueError):
            ConeValuation(Fraction(0), vec([1]))


class Test_cone_valuation:
    """Tests for function cone_valuation"""

    def test_dirac(self):
        assert cone_valuation(Dirac((1, 2)), quadrant()) == ConeValuation(Fraction(1), vec([1, 2]))
        on_boundary = cone_valuation(Dirac((0, 2)), quadrant())
        assert on_boundary.p == 0

    def test_uniform_square(self):
        value = cone_valuation(linf_ball(1), quadrant())
        assert value == ConeValuation(Fraction(1, 4), vec(["1/2", "1/2"]))

    def test_uniform_diamond(self):
        value = cone_valuation(l1_ball(1), quadrant())
        assert value.p == Fraction(1, 4)
        assert value.c == vec(["1/3", "1/3"])

    def test_uniform_whole_space(self):
        value = cone_valuation(l1_ball(2), HPolyhedron.whole_space(2))
        assert value.p == 1
        assert value.c == vec([0, 0])

    def test_uniform_on_segment(self):
        segment = UniformPolytope(VPolyhedron.build([(0, 0), (2, 0)], (), 2))
        right = HPolyhedron.from_rows([[-1, 0]], [-1])
        assert cone_valuation(segment, right) == ConeValuation(Fraction(1, 2), vec(["3/2", 0]))
        # the segment runs along the boundary of the quadrant
        assert cone_valuation(segment, quadrant()).p == 0
        ray = HPolyhedron.from_rows([[-1, 0], [0, 1], [0, -1]], [0, 0, 0])
        assert cone_valuation(segment, ray) == ConeValuation(Fraction(1), vec([1, 0]))

    def test_lower_dimensional_region_has_no_mass(self):
        ray = HPolyhedron.from_rows([[-1, 0], [0, 1], [0, -1]], [0, 0, 0])
        assert cone_valuation(linf_ball(1), ray).p == 0

    def test_exponential(self):
        # P(y2 < y1) = 2/3 for rates 1 and 2
        below_diagonal = HPolyhedron.from_rows([[-1, 1], [0, -1]], [0, 0])
        value = cone_valuation(skewed_exponential(), below_diagonal)
        assert value.p == Fraction(2, 3)
        assert value.c == vec(["4/3", "1/3"])

    def test_exponential_non_conic(self):
        shifted = HPolyhedron.from_rows([[-1, 0]], [-1])
        with pytest.raises(NonConicRegionError):
            cone_valuation(skewed_exponential(), shifted)

    def test_orthant_mixture(self):
        positive = HPolyhedron.from_rows([[-1]], [0])
        assert cone_valuation(exponential_orthants(1, 1), positive) == ConeValuation(Fraction(1, 2), vec([1]))

    def test_gaussian_is_not_exact(self):
        with pytest.raises(UnsupportedDistributionError):
            cone_valuation(Gaussian(Matrix.identity(2)), quadrant())

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            cone_valuation(Dirac((1, 2, 3)), quadrant())


class Test_weak_cone_valuation:
    """Tests for function weak_cone_valuation"""

    def test_gaussian_half_line(self):
        value = weak_cone_valuation(Gaussian(Matrix.identity(1)), HPolyhedron.from_rows([[-1]], [0]))
        assert value.p == Fraction(1, 2)
        assert abs(float(value.c[0]) - SQRT_2_OVER_PI) < 1e-9
        assert not value.is_exact

    def test_gaussian_quadrant(self):
        value = weak_cone_valuation(Gaussian(Matrix.from_rows([[2, 0], [0, 1]])), quadrant(), Fraction(1, 10**8))
        assert abs(float(value.p) - 0.25) < 1e-9
        assert abs(float(value.c[0]) - 2 * SQRT_2_OVER_PI) < 1e-8
        assert abs(float(value.c[1]) - SQRT_2_OVER_PI) < 1e-8

    def test_gaussian_half_plane(self):
        upper = HPolyhedron.from_rows([[0, -1]], [0])
        value = weak_cone_valuation(Gaussian(Matrix.identity(2)), upper)
        assert abs(float(value.p) - 0.5) < 1e-9
        assert abs(float(value.c[0])) < 1e-9
        assert abs(float(value.c[1]) - SQRT_2_OVER_PI) < 1e-8

    def test_ellipsoid_quadrant(self):
        value = weak_cone_valuation(UniformEllipsoid(Matrix.from_rows([[3, 0], [0, 3]])), quadrant())
        assert abs(float(value.p) - 0.25) < 1e-9
        assert abs(float(value.c[0]) - 4 / math.pi) < 1e-8

    def test_riemann_sum(self):
        upper_half = HPolyhedron.from_rows([[-1]], ["-1/2"])
        value = weak_cone_valuation(uniform_unit_interval(), upper_half, Fraction(1, 100))
        assert value.eps > 0
        assert abs(float(value.p) - 0.5) <= float(value.eps)
        assert abs(float(value.c[0]) - 0.75) <= float(value.eps)

    def test_exact_distribution_stays_exact(self):
        value = weak_cone_valuation(skewed_exponential(), quadrant(), Fraction(1, 10))
        assert value.is_exact
        assert value.p == 1

    def test_eps_must_be_positive(self):
        with pytest.raises(ValueError):
            weak_cone_valuation(Gaussian(Matrix.identity(1)), HPolyhedron.whole_space(1), 0)

    def test_capped_grid_reports_achieved_bound(self, monkeypatch):
        monkeypatch.setattr("slpquant.quantize.MAX_GRID_POINTS", 1000)
        octant = HPolyhedron.from_rows([[-1, 0, 0], [0, -1, 0], [0, 0, -1]], [0, 0, 0])
        value = weak_cone_valuation(Gaussian(Matrix.identity(3)), octant, Fraction(1, 100))
        assert value.eps > Fraction(1, 100)
        assert abs(float(value.p) - 0.125) <= float(value.eps)


class Test_exponential_integrals:
    """Exponential cone valuations against numerical integration in polar coordinates"""

    @pytest.mark.parametrize("seed", range(10))
    def test_random_cone(self, seed):
        rng = np.random.default_rng(seed)
        first, second = counterclockwise_rays(rng)
        rates = [int(v) for v in rng.integers(1, 4, size=2)]
        theta = solve(Matrix.from_rows([first, second]), vec([-rates[0], -rates[1]]))
        dist = ExponentialCone(PolyCone.from_rays([first, second], 2), theta)
        t = [float(v) for v in theta]

        def slope(phi):
            return t[0] * math.cos(phi) + t[1] * math.sin(phi)

        start = math.atan2(first[1], first[0])
        turn = first[0] * second[1] - first[1] * second[0]
        stop = start + math.atan2(turn, first[0] * second[0] + first[1] * second[1])
        mass = quad(lambda phi: 1 / slope(phi) ** 2, start, stop, epsabs=0, epsrel=1e-12)[0]
        moment = [
            quad(lambda phi, f=f: 2 * f(phi) / abs(slope(phi)) ** 3, start, stop, epsabs=0, epsrel=1e-12)[0]
            for f in (math.cos, math.sin)
        ]
        assert abs(float(dist.total) - mass) <= 1e-6 * mass
        mean = cone_valuation(dist, HPolyhedron.whole_space(2)).c
        scale = 1 + math.hypot(*moment) / mass
        for exact, numeric in zip(mean, moment):
            assert abs(float(exact) - numeric / mass) <= 1e-6 * scale


class Test_quantize_fan:
    """Tests for functions quantize_fan, valuation and expected_cost"""

    def test_diamond_fan(self, coupling_polyhedron):
        fan = normal_fan(fiber(coupling_polyhedron, vec([2])))
        atoms = quantize_fan(linf_ball(1), fan)
        assert len(atoms) == 4
        assert sum(value.p for _, value in atoms) == 1
        assert all(value.p == Fraction(1, 4) for _, value in atoms)
        moment = [sum(value.moment[i] for _, value in atoms) for i in range(2)]
        assert moment == [0, 0]

    def test_segment_on_fan_boundary(self, coupling_polyhedron):
        # one half of the segment lies on a ray of the fan, the other inside a two-dimensional cone
        fan = normal_fan(fiber(coupling_polyhedron, vec(["1/4"]))).negated()
        atoms = quantize_fan(axis_segment(), fan)
        assert [value.p for _, value in atoms] == [Fraction(1, 2), Fraction(1, 2)]
        assert {value.c for _, value in atoms} == {vec(["-1/2", 0]), vec(["1/2", 0])}

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(10))
    def test_random_fans(self, seed):
        fan = normal_fan(fiber(random_stage(seed).outcomes[0].coupling, vec([0]))).negated()
        for dist in exact_costs() + [axis_segment()]:
            atoms = quantize_fan(dist, fan)
            assert sum(value.p for _, value in atoms) == 1
            assert tuple(sum(value.moment[i] for _, value in atoms) for i in range(2)) == expected_cost(dist)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(5))
    def test_random_fans_gaussian(self, seed):
        fan = normal_fan(fiber(random_stage(seed).outcomes[0].coupling, vec([0]))).negated()
        atoms = quantize_fan(Gaussian(Matrix.identity(2)), fan, Fraction(1, 10**6))
        assert abs(float(sum(value.p for _, value in atoms)) - 1) <= len(fan) * 1e-6

    def test_valuation_dispatch(self):
        assert valuation(skewed_exponential(), quadrant()).is_exact
        assert not valuation(Gaussian(Matrix.identity(2)), quadrant()).is_exact

    def test_expected_cost(self):
        assert expected_cost(skewed_exponential()) == vec([1, "1/2"])
        assert expected_cost(exponential_orthants(3, 2)) == vec([0, 0])
        assert expected_cost(Dirac((5, -1))) == vec([5, -1])


class Test_sample:
    """Tests for function sample"""

    def test_uniform_within_support(self):
        draws = sample(l1_ball(1), np.random.default_rng(0), 2000)
        assert draws.shape == (2000, 2)
        assert np.all(np.abs(draws).sum(axis=1) <= 1 + 1e-12)

    def test_exponential_mean(self):
        draws = sample(skewed_exponential(), np.random.default_rng(1), 20000)
        assert np.allclose(draws.mean(axis=0), [1.0, 0.5], atol=0.05)

    def test_single_draw(self):
        assert sample(Gaussian(Matrix.identity(3)), np.random.default_rng(2)).shape == (3,)

    def test_oracle_cannot_be_sampled(self):
        with pytest.raises(UnsupportedDistributionError):
            sample(uniform_unit_interval(), np.random.default_rng(3), 5)


class Test_check_support:
    """Tests for function check_support"""

    def test_coupling_recourse_covers_plane(self, l1_stage):
        outcome = l1_stage.outcomes[0]
        assert check_support(outcome.cost, outcome.recourse)

    def test_negative_orthant(self):
        identity = Matrix.identity(2)
        assert check_support(Dirac((-1, -2)), identity)
        assert not check_support(Dirac((1, 0)), identity)
        assert not check_support(Gaussian(identity), identity)
