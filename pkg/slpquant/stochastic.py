"""Two-stage and multistage stochastic linear programs solved through exact cost quantization

A stage outcome is the data xi = (A, B, b) of the constraints ``A x_t + B x_{t-1} <= b`` together with its
probability and the distribution of the cost ``c_t``. For a fixed ``x_{t-1}`` the optimal face of the stage
problem only depends on the cone of the (negated) normal fan of the fiber containing the cost, so the expected
value is a finite sum of LP values at the conditional means of those cones.

Two-stage operations take the second stage as a :class:`StageData`. Multistage operations take a
:class:`MultistageProblem` and carry future value functions as cut lists (:class:`PolyhedralValueFunction`).
"""

import functools
import logging
import math

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import lp
from .complexes import (
    ChamberComplex,
    Fan,
    PolyComplex,
    chamber_complex,
    fan_above,
    intersect_complexes,
    meet,
)
from .polyhedron import HPolyhedron, fiber, normal_fan, projection, ri_point
from .quantize import (
    ConeValuation,
    CostDistribution,
    check_support,
    is_exact,
    sample,
    valuation,
)
from .rational_linalg import DimensionError, Matrix, Vec, add, dot, scale, sub, to_f64, to_rat, vec, zeros

logger = logging.getLogger(__name__)

__all__ = [
    "SupportAssumptionError",
    "InfeasibleProblemError",
    "Outcome",
    "StageData",
    "FirstStage",
    "MultistageProblem",
    "Cut",
    "PolyhedralValueFunction",
    "RecourseValue",
    "ApproxValue",
    "Separation",
    "FirstOrderValue",
    "StageQuantization",
    "ScenarioNode",
    "ExtensiveSolution",
    "MonteCarloEstimate",
    "stage_polyhedron",
    "recourse_value",
    "expected_value_at",
    "expected_value_on",
    "subgradient_at",
    "eval_or_separate",
    "build_affine_representation",
    "sample_value_function",
    "propagate_complexes",
    "quantize_stage",
    "backward_recursion",
    "nested_value",
    "build_scenario_tree",
    "solve_extensive",
    "mc_estimate",
]

INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
OPTIMAL = "optimal"

Value = Union[Fraction, float]


class SupportAssumptionError(ValueError):
    """Raised if the support of a stage cost is not contained in -Cone(A^T)"""


class InfeasibleProblemError(ValueError):
    """Raised if a problem has no feasible solution; ``farkas`` holds the certificate"""

    def __init__(self, message: str, farkas: Optional[Vec] = None) -> None:
        super().__init__(message)
        self.farkas = farkas


@dataclass(frozen=True)
class Outcome:
    """One realization xi = (A, B, b) of the stage constraints ``A x_t + B x_{t-1} <= b``

    :param recourse:      A, acting on the current decision
    :param technology:    B, acting on the previous decision
    :param rhs:           b
    :param prob:          probability of the outcome
    :param cost:          distribution of the stage cost, independent of xi's draw
    """

    recourse: Matrix
    technology: Matrix
    rhs: Vec
    prob: Fraction
    cost: CostDistribution

    def __post_init__(self) -> None:
        object.__setattr__(self, "rhs", vec(self.rhs))
        object.__setattr__(self, "prob", to_rat(self.prob))
        if self.recourse.n_rows != self.technology.n_rows or self.recourse.n_rows != len(self.rhs):
            raise DimensionError(
                f"Outcome has '{self.recourse.n_rows}' recourse rows, '{self.technology.n_rows}' technology rows "
                f"and '{len(self.rhs)}' right-hand sides"
            )
        if self.cost.dim != self.n:
            raise DimensionError(f"Cost of dimension '{self.cost.dim}' for '{self.n}' decision variables")

    @property
    def n_prev(self) -> int:
        return self.technology.n_cols

    @property
    def n(self) -> int:
        return self.recourse.n_cols

    @functools.cached_property
    def coupling(self) -> HPolyhedron:
        """{(x, y) : B x + A y <= b}"""
        return HPolyhedron(self.technology.hstack(self.recourse), self.rhs)


@dataclass(frozen=True)
class StageData:
    """Finitely many outcomes of one stage; probabilities are positive and sum to one"""

    outcomes: Tuple[Outcome, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if not self.outcomes:
            raise ValueError("A stage needs at least one outcome")
        probs = [outcome.prob for outcome in self.outcomes]
        if any(p <= 0 for p in probs) or sum(probs) != 1:
            raise ValueError(f"Outcome probabilities must be positive and sum to 1, got '{sum(probs)}'")
        if len({(outcome.n_prev, outcome.n) for outcome in self.outcomes}) != 1:
            raise DimensionError("Outcomes of a stage act on different dimensions")
        for index, outcome in enumerate(self.outcomes):
            if not check_support(outcome.cost, outcome.recourse):
                raise SupportAssumptionError(
                    f"Cost support of outcome '{index}' is not contained in -Cone(A^T) of its recourse matrix"
                )

    @property
    def n_prev(self) -> int:
        return self.outcomes[0].n_prev

    @property
    def n(self) -> int:
        return self.outcomes[0].n

    @property
    def keep(self) -> Tuple[int, ...]:
        """Coordinates of the previous decision inside the coupling space"""
        return tuple(range(self.n_prev))


@dataclass(frozen=True)
class FirstStage:
    """min c^T x  s.t.  a x <= b"""

    c: Vec
    a: Matrix
    b: Vec

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", vec(self.c))
        object.__setattr__(self, "b", vec(self.b))
        if len(self.c) != self.a.n_cols or len(self.b) != self.a.n_rows:
            raise DimensionError(f"First stage has cost '{len(self.c)}', matrix '{self.a.shape}', rhs '{len(self.b)}'")

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class MultistageProblem:
    """First stage and the stages t = 2..T, stage-wise independent"""

    first_stage: FirstStage
    stages: Tuple[StageData, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("A problem needs at least one random stage")
        n = self.first_stage.n
        for t, stage in enumerate(self.stages, start=2):
            if stage.n_prev != n:
                raise DimensionError(f"Stage '{t}' expects '{stage.n_prev}' previous decisions, got '{n}'")
            n = stage.n

    @property
    def horizon(self) -> int:
        return len(self.stages) + 1

    def stage(self, t: int) -> StageData:
        """Stage data for t = 2..T"""
        if not 2 <= t <= self.horizon:
            raise ValueError(f"'t' must lie in [2, {self.horizon}], not '{t}'")
        return self.stages[t - 2]


@dataclass(frozen=True)
class Cut:
    """Affine minorant alpha^T x + beta"""

    alpha: Vec
    beta: Fraction

    def __call__(self, x: Sequence[Fraction]) -> Fraction:
        return dot(self.alpha, x) + self.beta


@dataclass(frozen=True)
class PolyhedralValueFunction:
    """V(x) = max over cuts on ``domain`` and +inf outside; ``cells`` are the regions where V is affine"""

    cuts: Tuple[Cut, ...]
    domain: HPolyhedron
    cells: Optional[PolyComplex] = None
    eps: Fraction = field(default=Fraction(0))

    @classmethod
    def zero(cls, dim: int) -> "PolyhedralValueFunction":
        return cls((Cut(zeros(dim), Fraction(0)),), HPolyhedron.whole_space(dim))

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, x: Sequence[Fraction]) -> Value:
        if x not in self.domain:
            return math.inf
        return max(cut(x) for cut in self.cuts)

    def epigraph(self) -> HPolyhedron:
        """{(x, z) : z >= V(x)}"""
        d = self.dim
        rows = [tuple(cut.alpha) + (Fraction(-1),) for cut in self.cuts]
        rhs = [-cut.beta for cut in self.cuts]
        rows.extend(tuple(row) + (Fraction(0),) for row in self.domain.a.rows)
        rhs.extend(self.domain.b)
        return HPolyhedron(Matrix(tuple(rows), d + 1), tuple(rhs))


@dataclass(frozen=True)
class RecourseValue:
    """Optimal value of the recourse LP, +inf if infeasible and -inf if unbounded"""

    value: Value
    minimizer: Optional[Vec]
    status: str


@dataclass(frozen=True)
class ApproxValue:
    """Rational value within ``eps`` of the true one"""

    value: Fraction
    eps: Fraction


@dataclass(frozen=True)
class Separation:
    """Hyperplane {x : normal x = offset}; the domain lies in {normal x <= offset}, the query point strictly beyond"""

    normal: Vec
    offset: Fraction
    farkas: Vec


@dataclass(frozen=True)
class FirstOrderValue:
    value: Fraction
    subgradient: Vec
    eps: Fraction = field(default=Fraction(0))


@dataclass(frozen=True)
class StageQuantization:
    """Common fan of a stage outcome (in the lifted (x_t, z) space) and the cost-space regions with their valuations"""

    fan: Fan
    regions: Tuple[Tuple[HPolyhedron, ConeValuation], ...]
    lifted: bool = True


@dataclass(frozen=True)
class ScenarioNode:
    """Node of the quantized scenario tree

    :param label:        ((xi index, region index), ...) from the first random stage down to this node
    :param stage:        stage t of the decision taken at this node
    :param dim:          number of decision variables at this node
    :param outcome:      constraint outcome of the stage, None at the root
    :param cone:         cost region of the node, None at the root
    :param quantized:    valuation of the cost region
    :param children:     nodes of the next stage
    :param path_prob:    product of outcome probabilities and region probabilities along the label
    """

    label: Tuple[Tuple[int, int], ...]
    stage: int
    dim: int
    outcome: Optional[Outcome]
    cone: Optional[HPolyhedron]
    quantized: Optional[ConeValuation]
    children: Tuple["ScenarioNode", ...]
    path_prob: Fraction

    def walk(self):
        """Depth-first iteration over the subtree, parents before children"""
        yield self
        for child in self.children:
            yield from child.walk()

    @property
    def xi(self) -> Optional[int]:
        return self.label[-1][0] if self.label else None


@dataclass(frozen=True)
class ExtensiveSolution:
    value: Fraction
    policy: Dict[Tuple[Tuple[int, int], ...], Vec]


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_samples: int


def stage_polyhedron(outcome: Outcome, v_next: Optional[PolyhedralValueFunction] = None) -> HPolyhedron:
    """Coupling polyhedron over (x_{t-1}, x_t), or with a future value function its epigraph over (x_{t-1}, x_t, z)

    :param outcome:    stage Outcome
    :param v_next:     future value function on x_t, None for the plain coupling
    :return:           HPolyhedron
    """
    if v_next is None:
        return outcome.coupling
    if v_next.dim != outcome.n:
        raise DimensionError(f"Future value function on '{v_next.dim}' variables for a stage with '{outcome.n}'")
    n_prev = outcome.n_prev
    coupling = outcome.coupling.a
    rows = [tuple(row) + (Fraction(0),) for row in coupling.rows]
    rhs = list(outcome.rhs)
    epigraph = v_next.epigraph()
    rows.extend(zeros(n_prev) + tuple(row) for row in epigraph.a.rows)
    rhs.extend(epigraph.b)
    return HPolyhedron(Matrix(tuple(rows), n_prev + outcome.n + 1), tuple(rhs))


def _lifted_objective(c: Vec, lifted: bool) -> Vec:
    return tuple(c) + (Fraction(1),) if lifted else tuple(c)


def _cost_regions(fan: PolyComplex, lifted: bool) -> List[HPolyhedron]:
    """Cost-space regions of a negated normal fan; lifted cells are sliced at z = 1"""
    if not lifted:
        return list(fan.cells)
    last = fan.ambient_dim - 1
    regions: Dict[tuple, HPolyhedron] = {}
    for cell in fan.cells:
        region = fiber(cell, (Fraction(1),), (last,))
        if not region.vrep.is_empty():
            regions.setdefault(region.key, region)
    return list(regions.values())


def recourse_value(outcome: Outcome, x: Sequence[Fraction], c: Sequence[Fraction]) -> RecourseValue:
    """min c^T y  s.t.  A y <= b - B x

    :param outcome:    stage Outcome
    :param x:          previous decision
    :param c:          cost realization
    :return:           RecourseValue with status "infeasible", "unbounded" or "optimal"
    """
    slice_ = fiber(outcome.coupling, vec(x))
    result = lp.solve_raw(slice_.a, slice_.b, vec(c))
    if isinstance(result, lp.Infeasible):
        return RecourseValue(math.inf, None, INFEASIBLE)
    if isinstance(result, lp.Unbounded):
        return RecourseValue(-math.inf, None, UNBOUNDED)
    return RecourseValue(result.value, result.x, OPTIMAL)


@dataclass(frozen=True)
class _Evaluation:
    value: Value
    subgradient: Optional[Vec]
    eps: Fraction
    farkas: Optional[Vec] = None
    outcome: Optional[int] = None


def _outcome_terms(
    outcome: Outcome,
    x: Vec,
    v_next: Optional[PolyhedralValueFunction],
    regions: Optional[Sequence[Tuple[HPolyhedron, ConeValuation]]],
    eps: Optional[Fraction],
) -> Union[lp.Infeasible, Tuple[Fraction, Vec, Fraction]]:
    """Value, subgradient and error bound of one outcome at x, or the Farkas certificate of an empty fiber"""
    q = stage_polyhedron(outcome, v_next)
    lifted = v_next is not None
    slice_ = fiber(q, x)
    feasibility = lp.solve_raw(slice_.a, slice_.b, zeros(slice_.dim))
    if isinstance(feasibility, lp.Infeasible):
        return feasibility
    if regions is None:
        fan = normal_fan(slice_).negated()
        regions = [(region, valuation(outcome.cost, region, eps)) for region in _cost_regions(fan, lifted)]
    technology = q.a.select_columns(range(outcome.n_prev))
    value = Fraction(0)
    subgradient = zeros(outcome.n_prev)
    error = Fraction(0)
    for region, quantized in regions:
        if quantized.p == 0:
            continue
        result = lp.solve_raw(slice_.a, slice_.b, _lifted_objective(quantized.c, lifted))
        if not isinstance(result, lp.Optimal):
            raise SupportAssumptionError(
                f"Stage LP is '{type(result).__name__}' at the conditional mean of a cost region"
            )
        value += quantized.p * result.value
        subgradient = add(subgradient, scale(quantized.p, technology.transpose().apply(result.dual)))
        if quantized.eps:
            size = sum((abs(v) for v in result.x[: outcome.n]), Fraction(0))
            error += quantized.eps * (abs(result.value) + quantized.p * size)
    return value, subgradient, error


def _evaluate(
    stage: StageData,
    x: Sequence[Fraction],
    v_next: Optional[PolyhedralValueFunction] = None,
    quantized: Optional[Sequence[StageQuantization]] = None,
    eps: Optional[Fraction] = None,
) -> _Evaluation:
    x = vec(x)
    if len(x) != stage.n_prev:
        raise DimensionError(f"'x' has '{len(x)}' entries for a stage expecting '{stage.n_prev}'")
    value = Fraction(0)
    subgradient = zeros(stage.n_prev)
    error = Fraction(0)
    for index, outcome in enumerate(stage.outcomes):
        regions = quantized[index].regions if quantized is not None else None
        terms = _outcome_terms(outcome, x, v_next, regions, eps)
        if isinstance(terms, lp.Infeasible):
            return _Evaluation(math.inf, None, Fraction(0), terms.farkas, index)
        outcome_value, outcome_subgradient, outcome_error = terms
        value += outcome.prob * outcome_value
        subgradient = add(subgradient, scale(outcome.prob, outcome_subgradient))
        error += outcome.prob * outcome_error
    logger.debug(f"Expected value '{value}' at '{x}'")
    return _Evaluation(value, subgradient, error)


def expected_value_at(
    stage: StageData, x: Sequence[Fraction], eps: Optional[Fraction] = None
) -> Union[Value, ApproxValue]:
    """Expected recourse value V(x) = sum_xi p_xi sum_N p_N LP(c_N)

    :param stage:    second stage data
    :param x:        first-stage decision
    :param eps:      accuracy of the weak valuations (ignored for exact cost distributions)
    :return:         Fraction, +inf outside the domain, ApproxValue for weak distributions
    """
    evaluation = _evaluate(stage, x, eps=eps)
    if evaluation.value == math.inf or all(is_exact(outcome.cost) for outcome in stage.outcomes):
        return evaluation.value
    return ApproxValue(evaluation.value, evaluation.eps)


def expected_value_on(outcome: Outcome, x: Sequence[Fraction], regions: Sequence[HPolyhedron], eps=None) -> Value:
    """V(x | xi) computed on caller supplied cost regions, which must refine the negated normal fan at x"""
    x = vec(x)
    quantized = [(region, valuation(outcome.cost, region, eps)) for region in regions]
    terms = _outcome_terms(outcome, x, None, quantized, eps)
    if isinstance(terms, lp.Infeasible):
        return math.inf
    return terms[0]


def subgradient_at(stage: StageData, x: Sequence[Fraction], eps: Optional[Fraction] = None) -> Vec:
    """An element of the subdifferential of V at x: sum p_xi p_N B^T lam_N over the optimal duals lam_N"""
    evaluation = _evaluate(stage, x, eps=eps)
    if evaluation.subgradient is None:
        raise ValueError(f"'x' = '{tuple(x)}' is outside the domain of the value function")
    return evaluation.subgradient


def eval_or_separate(
    stage: StageData,
    x: Sequence[Fraction],
    eps: Optional[Fraction] = None,
    v_next: Optional[PolyhedralValueFunction] = None,
) -> Union[FirstOrderValue, Separation]:
    """First-order oracle: value and subgradient in the domain, else a hyperplane separating x from it

    The hyperplane comes from the Farkas certificate lam of the empty fiber of the stage polyhedron Q: every
    feasible x' satisfies lam^T T x' <= lam^T b while lam^T T x > lam^T b, where T are the columns of Q acting
    on x, and the offset is the midpoint of both.

    :param stage:     stage data
    :param x:         previous decision
    :param eps:       accuracy of the weak valuations
    :param v_next:    value function of the following stage, None for the last stage
    :return:          FirstOrderValue or Separation
    """
    x = vec(x)
    evaluation = _evaluate(stage, x, v_next, eps=eps)
    if evaluation.farkas is None:
        error = evaluation.eps + (v_next.eps if v_next is not None else Fraction(0))
        return FirstOrderValue(evaluation.value, evaluation.subgradient, error)
    q = stage_polyhedron(stage.outcomes[evaluation.outcome], v_next)
    lam = evaluation.farkas
    normal = q.a.select_columns(range(stage.n_prev)).transpose().apply(lam)
    offset = (dot(lam, q.b) + dot(normal, x)) / 2
    logger.info(f"Point '{x}' is outside the domain, separated by outcome '{evaluation.outcome}'")
    return Separation(normal, offset, lam)


def _dedupe_cuts(cuts: Sequence[Cut]) -> Tuple[Cut, ...]:
    return tuple(sorted(set(cuts), key=lambda cut: (cut.alpha, cut.beta)))


def _stage_domain(stage: StageData, v_next: Optional[PolyhedralValueFunction] = None) -> HPolyhedron:
    domain = HPolyhedron.whole_space(stage.n_prev)
    for outcome in stage.outcomes:
        domain = domain.intersect(projection(stage_polyhedron(outcome, v_next), stage.keep))
    return domain


def build_affine_representation(stage: StageData, eps: Optional[Fraction] = None) -> PolyhedralValueFunction:
    """Cut representation of the two-stage value function from the chamber complexes of the outcomes

    V is affine on every cell of the common refinement of the chamber complexes, so the value and a subgradient
    at the witness of each maximal cell give a cut that is tight on the whole cell.
    """
    complexes = [chamber_complex(outcome.coupling, stage.keep) for outcome in stage.outcomes]
    cells = functools.reduce(intersect_complexes, complexes)
    cuts = []
    error = Fraction(0)
    for cell in cells.maximal_cells():
        witness = ri_point(cell)
        evaluation = _evaluate(stage, witness, eps=eps)
        cuts.append(Cut(evaluation.subgradient, evaluation.value - dot(evaluation.subgradient, witness)))
        error = max(error, evaluation.eps)
    logger.info(f"Value function has '{len(cuts)}' affine pieces")
    return PolyhedralValueFunction(_dedupe_cuts(cuts), _stage_domain(stage), cells, error)


def sample_value_function(
    stage: StageData, xs: Sequence[Sequence[Fraction]], eps: Optional[Fraction] = None
) -> List[Tuple[Vec, Union[Value, ApproxValue]]]:
    """(x, V(x)) pairs for plotting"""
    return [(vec(x), expected_value_at(stage, x, eps)) for x in xs]


def propagate_complexes(problem: MultistageProblem) -> List[PolyComplex]:
    """Complexes P_2..P_T on which the value functions V_2..V_T are affine, whatever the cost distributions

    P_{T+1} is the trivial complex of the whole space. P_{t, xi} is the chamber complex, along x_{t-1}, of the
    face complex of the coupling polyhedron intersected with the cylinder over P_{t+1}, and P_t is the common
    refinement over the outcomes.
    """
    horizon = problem.horizon
    n_last = problem.stage(horizon).n
    following = PolyComplex.from_cells([HPolyhedron.whole_space(n_last)], n_last)
    result: Dict[int, PolyComplex] = {}
    for t in range(horizon, 1, -1):
        stage = problem.stage(t)
        per_outcome = []
        for outcome in stage.outcomes:
            cylinder = PolyComplex.from_cells(
                [cell.lift(outcome.n_prev, 0) for cell in following.cells], outcome.n_prev + outcome.n, close=False
            )
            face_complex = PolyComplex.from_polyhedron(outcome.coupling)
            per_outcome.append(chamber_complex(intersect_complexes(cylinder, face_complex), stage.keep))
        following = functools.reduce(intersect_complexes, per_outcome)
        result[t] = following
        logger.info(f"Stage '{t}' complex has '{len(following)}' cells")
    return [result[t] for t in range(2, horizon + 1)]


def quantize_stage(
    outcome: Outcome, v_next: Optional[PolyhedralValueFunction] = None, eps: Optional[Fraction] = None
) -> StageQuantization:
    """Common cost regions of a stage outcome, valid for every previous decision

    The epigraph over (x_{t-1}, x_t, z) is cut into the chambers of its projection; above every maximal chamber
    the negated normal fan of the fiber is taken, the fans are met, and each lifted cone is sliced at z = 1 since
    the lifted cost is (c_t, 1).

    :param outcome:    stage Outcome
    :param v_next:     future value function, the zero function when omitted
    :param eps:        accuracy of the weak valuations
    :return:           StageQuantization with the regions of positive probability
    """
    if v_next is None:
        v_next = PolyhedralValueFunction.zero(outcome.n)
    q = stage_polyhedron(outcome, v_next)
    chambers = chamber_complex(q, range(outcome.n_prev)).maximal_chambers()
    if not chambers:
        raise InfeasibleProblemError("Stage outcome is infeasible for every previous decision")
    fans = [fan_above(q, chamber).negated() for chamber in chambers]
    fan = functools.reduce(meet, fans)
    regions = []
    for region in _cost_regions(fan, True):
        quantized = valuation(outcome.cost, region, eps)
        if quantized.p > 0:
            regions.append((region, quantized))
    logger.info(f"Quantized stage outcome into '{len(regions)}' regions over '{len(chambers)}' chambers")
    return StageQuantization(fan, tuple(regions))


def _stage_cuts(
    stage: StageData,
    cells: PolyComplex,
    v_next: PolyhedralValueFunction,
    quantized: Sequence[StageQuantization],
) -> Tuple[List[Cut], Fraction]:
    cuts = []
    error = Fraction(0)
    for cell in cells.maximal_cells():
        witness = ri_point(cell)
        evaluation = _evaluate(stage, witness, v_next, quantized)
        if evaluation.subgradient is None:
            continue
        cuts.append(Cut(evaluation.subgradient, evaluation.value - dot(evaluation.subgradient, witness)))
        error = max(error, evaluation.eps)
    return cuts, error


def _value_functions(
    problem: MultistageProblem, eps: Optional[Fraction] = None
) -> Tuple[Dict[int, PolyhedralValueFunction], Dict[int, List[StageQuantization]]]:
    complexes = propagate_complexes(problem)
    values: Dict[int, PolyhedralValueFunction] = {
        problem.horizon + 1: PolyhedralValueFunction.zero(problem.stage(problem.horizon).n)
    }
    quantizations: Dict[int, List[StageQuantization]] = {}
    for t in range(problem.horizon, 1, -1):
        stage = problem.stage(t)
        v_next = values[t + 1]
        quantized = [quantize_stage(outcome, v_next, eps) for outcome in stage.outcomes]
        cuts, error = _stage_cuts(stage, complexes[t - 2], v_next, quantized)
        values[t] = PolyhedralValueFunction(
            _dedupe_cuts(cuts), _stage_domain(stage, v_next), complexes[t - 2], error + v_next.eps
        )
        quantizations[t] = quantized
        logger.info(f"Value function of stage '{t}' has '{len(values[t].cuts)}' cuts")
    return values, quantizations


def backward_recursion(problem: MultistageProblem, eps: Optional[Fraction] = None) -> List[PolyhedralValueFunction]:
    """Value functions V_2..V_T, each affine on the cells of the matching propagated complex"""
    values, _ = _value_functions(problem, eps)
    return [values[t] for t in range(2, problem.horizon + 1)]


def nested_value(problem: MultistageProblem, eps: Optional[Fraction] = None) -> ExtensiveSolution:
    """min c_1^T x + V_2(x)  s.t.  A_1 x <= b_1, solved over the epigraph of V_2"""
    v2 = backward_recursion(problem, eps)[0]
    first = problem.first_stage
    epigraph = v2.epigraph()
    rows = [tuple(row) + (Fraction(0),) for row in first.a.rows] + list(epigraph.a.rows)
    rhs = list(first.b) + list(epigraph.b)
    result = lp.solve_raw(Matrix(tuple(rows), first.n + 1), rhs, tuple(first.c) + (Fraction(1),))
    if isinstance(result, lp.Infeasible):
        raise InfeasibleProblemError("First stage has no decision with finite recourse", result.farkas)
    if isinstance(result, lp.Unbounded):
        raise ValueError("First stage problem is unbounded")
    return ExtensiveSolution(result.value, {(): result.x[: first.n]})


def _grow(
    problem: MultistageProblem,
    quantizations: Dict[int, List[StageQuantization]],
    t: int,
    label: Tuple[Tuple[int, int], ...],
    path_prob: Fraction,
) -> Tuple["ScenarioNode", ...]:
    if t > problem.horizon:
        return ()
    stage = problem.stage(t)
    children = []
    for xi, outcome in enumerate(stage.outcomes):
        for index, (region, quantized) in enumerate(quantizations[t][xi].regions):
            child_label = label + ((xi, index),)
            child_prob = path_prob * outcome.prob * quantized.p
            children.append(
                ScenarioNode(
                    child_label,
                    t,
                    outcome.n,
                    outcome,
                    region,
                    quantized,
                    _grow(problem, quantizations, t + 1, child_label, child_prob),
                    child_prob,
                )
            )
    return tuple(children)


def build_scenario_tree(problem: MultistageProblem, t0: int = 2, eps: Optional[Fraction] = None) -> ScenarioNode:
    """Quantized scenario tree from stage t0 on; the root holds the decision x_{t0-1}

    :param problem:    MultistageProblem
    :param t0:         first random stage of the tree
    :param eps:        accuracy of the weak valuations
    :return:           root ScenarioNode
    """
    if not 2 <= t0 <= problem.horizon:
        raise ValueError(f"'t0' must lie in [2, {problem.horizon}], not '{t0}'")
    _, quantizations = _value_functions(problem, eps)
    root_dim = problem.stage(t0).n_prev
    children = _grow(problem, quantizations, t0, (), Fraction(1))
    tree = ScenarioNode((), t0 - 1, root_dim, None, None, None, children, Fraction(1))
    logger.info(f"Scenario tree has '{sum(1 for _ in tree.walk())}' nodes")
    return tree


def solve_extensive(
    tree: ScenarioNode, first_stage: Optional[FirstStage] = None, x0: Optional[Sequence[Fraction]] = None
) -> ExtensiveSolution:
    """Solves the extensive form of a quantized tree exactly

    Every node gets its own decision block; a node with outcome (A, B, b) below parent mu adds A x_node + B x_mu <= b
    and the cost path_prob * c_node^T x_node. The root is constrained by the first stage (if given) and fixed to
    x0 (if given).

    :param tree:           root ScenarioNode
    :param first_stage:    FirstStage data for a root at stage 1
    :param x0:             fixed root decision
    :return:               ExtensiveSolution with the optimal value and the decision of every node
    """
    nodes = list(tree.walk())
    offsets = {}
    total = 0
    for node in nodes:
        offsets[node.label] = total
        total += node.dim
    rows: List[Vec] = []
    rhs: List[Fraction] = []
    objective = [Fraction(0)] * total

    def block_row(parts: Sequence[Tuple[Tuple[Tuple[int, int], ...], Vec]]) -> Vec:
        row = [Fraction(0)] * total
        for label, coefficients in parts:
            start = offsets[label]
            row[start : start + len(coefficients)] = coefficients
        return tuple(row)

    if first_stage is not None:
        if first_stage.n != tree.dim:
            raise DimensionError(f"First stage has '{first_stage.n}' variables, the tree root '{tree.dim}'")
        objective[: tree.dim] = first_stage.c
        for row, value in zip(first_stage.a.rows, first_stage.b):
            rows.append(block_row([((), row)]))
            rhs.append(value)
    if x0 is not None:
        x0 = vec(x0)
        for j in range(tree.dim):
            unit = tuple(Fraction(int(i == j)) for i in range(tree.dim))
            rows.append(block_row([((), unit)]))
            rhs.append(x0[j])
            rows.append(block_row([((), tuple(-v for v in unit))]))
            rhs.append(-x0[j])
    for node in nodes:
        if node.outcome is None:
            continue
        parent = node.label[:-1]
        outcome = node.outcome
        for recourse_row, technology_row, value in zip(outcome.recourse.rows, outcome.technology.rows, outcome.rhs):
            rows.append(block_row([(node.label, recourse_row), (parent, technology_row)]))
            rhs.append(value)
        start = offsets[node.label]
        objective[start : start + node.dim] = scale(node.path_prob, node.quantized.c)
    logger.info(f"Extensive form has '{total}' variables and '{len(rows)}' constraints")
    result = lp.solve_raw(Matrix(tuple(rows), total), rhs, tuple(objective))
    if isinstance(result, lp.Infeasible):
        raise InfeasibleProblemError("Extensive form is infeasible", result.farkas)
    if isinstance(result, lp.Unbounded):
        raise ValueError("Extensive form is unbounded")
    policy = {node.label: result.x[offsets[node.label] : offsets[node.label] + node.dim] for node in nodes}
    return ExtensiveSolution(result.value, policy)


def mc_estimate(
    stage: StageData, x: Sequence[Fraction], n_samples: int, rng: np.random.Generator
) -> MonteCarloEstimate:
    """Monte Carlo mean and standard error of the recourse value at x

    Outcomes are drawn by probability and costs by the exact samplers; the recourse value of a draw is the
    minimum of c^T v over the points of the exact V-representation of the fiber.
    """
    if n_samples <= 0:
        raise ValueError(f"'n_samples' must be positive, not '{n_samples}'")
    x = vec(x)
    fibers = [fiber(outcome.coupling, x).vrep for outcome in stage.outcomes]
    if any(f.is_empty() for f in fibers):
        return MonteCarloEstimate(math.inf, 0.0, n_samples)
    probs = np.array([float(outcome.prob) for outcome in stage.outcomes])
    chosen = rng.choice(len(stage.outcomes), size=n_samples, p=probs / probs.sum())
    values = np.empty(n_samples)
    for index, outcome in enumerate(stage.outcomes):
        rows = np.flatnonzero(chosen == index)
        if not len(rows):
            continue
        costs = sample(outcome.cost, rng, len(rows))
        points = np.array([to_f64(v) for v in fibers[index].vertices])
        values[rows] = (costs @ points.T).min(axis=1)
    stderr = float(values.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    logger.info(f"Monte Carlo mean '{values.mean()}' with standard error '{stderr}' from '{n_samples}' samples")
    return MonteCarloEstimate(float(values.mean()), stderr, n_samples)
