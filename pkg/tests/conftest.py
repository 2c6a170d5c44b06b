import os

from fractions import Fraction

import numpy as np
import pytest

from slpquant import (
    Dirac,
    ExponentialCone,
    FirstStage,
    Gaussian,
    HPolyhedron,
    Matrix,
    MultistageProblem,
    Outcome,
    PolyCone,
    StageData,
    UniformEllipsoid,
    UniformPolytope,
    VPolyhedron,
    exponential_orthants,
)

INSTANCES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "slpquant", "instances")

# recourse matrix, technology matrix and right-hand side of the one-dimensional coupling example
COUPLING_A = [[1, 1], [1, -1], [-1, 1], [-1, -1], [1, 0], [0, 1]]
COUPLING_B = [[0], [0], [0], [0], [-1], [-1]]
COUPLING_RHS = [1, 1, 1, 1, 0, 0]

# generated recourse polyhedra: the unit box in y plus two of the slanted rows, moving with x
BOX_ROWS = [[1, 0], [0, 1], [-1, 0], [0, -1]]
SLANTED_ROWS = [[1, 1], [1, -1], [-1, 1], [-1, -1], [1, 2], [2, -1], [-1, -2], [-2, 1]]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo and random-instance suites")


def l1_ball(radius=1):
    r = Fraction(radius)
    return UniformPolytope(VPolyhedron.build([(-r, 0), (r, 0), (0, -r), (0, r)], (), 2))


def linf_ball(radius=1):
    r = Fraction(radius)
    return UniformPolytope(VPolyhedron.build([(-r, -r), (-r, r), (r, -r), (r, r)], (), 2))


def coupling_stage(cost):
    outcome = Outcome(
        Matrix.from_rows(COUPLING_A),
        Matrix.from_rows(COUPLING_B),
        tuple(Fraction(v) for v in COUPLING_RHS),
        Fraction(1),
        cost,
    )
    return StageData((outcome,))


def coupling_data(cost):
    """JSON form of the coupling example with first stage -1/2 <= x <= 2"""
    return {
        "horizon": 2,
        "firstStage": {"c": ["0"], "A": [["1"], ["-1"]], "b": ["2", "1/2"]},
        "stages": [
            {
                "outcomes": [
                    {
                        "A": [[str(v) for v in row] for row in COUPLING_A],
                        "B": [[str(v) for v in row] for row in COUPLING_B],
                        "b": [str(v) for v in COUPLING_RHS],
                        "prob": "1",
                        "cost": cost,
                    }
                ]
            }
        ],
    }


def random_recourse(rng):
    """Recourse, technology and rhs of a generated outcome; y = 0 is strictly feasible for |x| < 1"""
    picked = rng.choice(len(SLANTED_ROWS), size=2, replace=False)
    recourse = BOX_ROWS + [SLANTED_ROWS[int(i)] for i in picked]
    technology = [[0]] * len(BOX_ROWS) + [[int(s)] for s in rng.choice([-1, 1], size=2)]
    rhs = [1] * len(BOX_ROWS) + [int(v) for v in rng.integers(1, 3, size=2)]
    return recourse, technology, rhs


def random_outcome(rng, cost, prob=1):
    recourse, technology, rhs = random_recourse(rng)
    return Outcome(
        Matrix.from_rows(recourse),
        Matrix.from_rows(technology),
        tuple(Fraction(v) for v in rhs),
        Fraction(prob),
        cost,
    )


def exact_costs():
    """Exact cost distributions in the plane, all admissible for generated recourse matrices"""
    triangle = UniformPolytope(VPolyhedron.build([(0, 0), (2, 0), (0, 1)], (), 2))
    wedge = ExponentialCone(PolyCone.from_rays([(1, 0), (1, 1)], 2), (-1, -1))
    return [l1_ball(), linf_ball(), triangle, exponential_orthants(Fraction(1), 2), wedge]


def random_stage(seed, cost=None):
    """Single outcome stage with one previous decision and two recourse variables"""
    costs = exact_costs()
    if cost is None:
        cost = costs[seed % len(costs)]
    return StageData((random_outcome(np.random.default_rng(seed), cost),))


def _probabilities(rng):
    return [[Fraction(1)], [Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 3), Fraction(2, 3)]][int(rng.integers(3))]


def _last_stage_outcome(rng, prob):
    """-1 <= x3 <= 1 and one row coupling x3 with x2; feasible at x3 = 0 for every x2 in the unit box"""
    sign = int(rng.choice([-1, 1]))
    coupling = [int(v) for v in rng.integers(-1, 2, size=2)]
    costs = [
        UniformPolytope(VPolyhedron.build([(-1,), (1,)], (), 1)),
        Dirac((-1,)),
        Dirac((Fraction(1, 2),)),
        ExponentialCone(PolyCone.from_rays([(1,)], 1), (-1,)),
    ]
    return Outcome(
        Matrix.from_rows([[1], [-1], [sign]]),
        Matrix.from_rows([[0, 0], [0, 0], coupling]),
        (Fraction(1), Fraction(1), Fraction(int(rng.integers(2, 4)))),
        prob,
        costs[int(rng.integers(len(costs)))],
    )


def random_three_stage(seed):
    """First stage on [-1, 1], a two-dimensional second stage and a one-dimensional third stage"""
    rng = np.random.default_rng(seed)
    costs = [l1_ball(), linf_ball(), exponential_orthants(Fraction(1), 2), Dirac((-1, Fraction(1, 2)))]
    second = StageData(
        tuple(random_outcome(rng, costs[int(rng.integers(len(costs)))], p) for p in _probabilities(rng))
    )
    third = StageData(tuple(_last_stage_outcome(rng, p) for p in _probabilities(rng)))
    first = FirstStage((int(rng.integers(-1, 2)),), Matrix.from_rows([[1], [-1]]), (1, 1))
    return MultistageProblem(first, (second, third))


@pytest.fixture
def coupling_polyhedron():
    """{(x, y) : A y + B x <= b} with x first"""
    rows = [tuple(b) + tuple(a) for a, b in zip(COUPLING_A, COUPLING_B)]
    return HPolyhedron.from_rows(rows, COUPLING_RHS)


@pytest.fixture
def l1_stage():
    return coupling_stage(l1_ball())


@pytest.fixture
def linf_stage():
    return coupling_stage(linf_ball())


@pytest.fixture
def exponential_stage():
    return coupling_stage(exponential_orthants(Fraction(1), 2))


@pytest.fixture
def gaussian_stage():
    return coupling_stage(Gaussian(Matrix.identity(2)))


@pytest.fixture
def l2_ball_stage():
    return coupling_stage(UniformEllipsoid(Matrix.identity(2)))


@pytest.fixture
def instance_path():
    def path(name):
        return os.path.join(INSTANCES_DIR, name)

    return path
