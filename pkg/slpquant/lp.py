"""Exact rational linear programming

Solves ``min/max c^T x  s.t.  a x <= b`` with free variables by a two-phase tableau simplex over
:class:`fractions.Fraction` using Bland's anti-cycling rule. Every outcome carries a certificate that can be
checked by substitution:

* :class:`Optimal` - primal point, value and a dual vector ``lam >= 0`` with ``a^T lam = -c`` (min sense)
* :class:`Infeasible` - Farkas vector ``lam >= 0`` with ``lam^T a = 0`` and ``lam^T b < 0``
* :class:`Unbounded` - ray ``r`` with ``a r <= 0`` and ``c^T r < 0`` (min sense)
"""

import enum
import logging

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple, Union

from .rational_linalg import Matrix, Vec, canonical_ray, dot, rank, solve as solve_linear, zeros

if TYPE_CHECKING:  # pragma: no cover
    from .polyhedron import HPolyhedron

logger = logging.getLogger(__name__)

__all__ = [
    "Sense",
    "LinearProgram",
    "Optimal",
    "Infeasible",
    "Unbounded",
    "LpOutcome",
    "FaceDesc",
    "NotOptimalError",
    "solve",
    "solve_raw",
    "is_feasible",
    "implicit_equalities",
    "argmin_face",
    "certificate_holds",
]


class NotOptimalError(ValueError):
    """Raised if an operation needs an optimal LP outcome"""


class Sense(str, enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class FaceDesc:
    """Face of an H-polyhedron given by its maximal active set"""

    active_set: Tuple[int, ...]
    dim: int


@dataclass(frozen=True)
class LinearProgram:
    """Linear program over the polyhedron ``constraints``

    :param objective:      cost vector c
    :param constraints:    HPolyhedron {x : a x <= b}
    :param sense:          Sense.MIN or Sense.MAX
    """

    objective: Vec
    constraints: "HPolyhedron"
    sense: Sense = Sense.MIN

    def __post_init__(self) -> None:
        if len(self.objective) != self.constraints.a.n_cols:
            raise ValueError(
                f"Objective of length '{len(self.objective)}' does not match dimension '{self.constraints.a.n_cols}'"
            )


@dataclass(frozen=True)
class Optimal:
    x: Vec
    value: Fraction
    dual: Vec


@dataclass(frozen=True)
class Infeasible:
    farkas: Vec


@dataclass(frozen=True)
class Unbounded:
    ray: Vec


LpOutcome = Union[Optimal, Infeasible, Unbounded]


class _Tableau:
    """Dense simplex tableau for ``A'' z = b''``, ``z >= 0``"""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int]) -> None:
        self.rows = [row[:] + [value] for row, value in zip(rows, rhs)]
        self.basis = basis[:]
        self.kept_rows = list(range(len(rows)))

    def rhs(self, i: int) -> Fraction:
        return self.rows[i][-1]

    def reduced_costs(self, costs: Sequence[Fraction], allowed: Sequence[int]) -> dict:
        basic_costs = [costs[j] for j in self.basis]
        result = {}
        for j in allowed:
            result[j] = costs[j] - sum((cb * row[j] for cb, row in zip(basic_costs, self.rows) if cb != 0), Fraction(0))
        return result

    def pivot(self, r: int, e: int) -> None:
        pivot_row = self.rows[r]
        pivot = pivot_row[e]
        if pivot != 1:
            pivot_row = [entry / pivot for entry in pivot_row]
            self.rows[r] = pivot_row
        for i, row in enumerate(self.rows):
            if i != r and row[e] != 0:
                factor = row[e]
                self.rows[i] = [a - factor * b for a, b in zip(row, pivot_row)]
        self.basis[r] = e

    def run(self, costs: Sequence[Fraction], allowed: Sequence[int]) -> Optional[int]:
        """Runs Bland's rule simplex iterations until optimal.

        :return:    None when optimal, otherwise the entering column along which the objective is unbounded
        """
        iterations = 0
        while True:
            iterations += 1
            reduced = self.reduced_costs(costs, allowed)
            entering = next((j for j in sorted(allowed) if j not in self.basis and reduced[j] < 0), None)
            if entering is None:
                logger.debug(f"Simplex finished after '{iterations}' iterations")
                return None
            leaving = None
            best_ratio = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    ratio = row[-1] / row[entering]
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leaving])
                    ):
                        best_ratio = ratio
                        leaving = i
            if leaving is None:
                return entering
            self.pivot(leaving, entering)


def _multipliers(original: List[List[Fraction]], basis: List[int], costs: Sequence[Fraction]) -> List[Fraction]:
    """Simplex multipliers y solving ``B^T y = c_B`` for the basis columns of the original system"""
    size = len(basis)
    if not size:
        return []
    basis_t = Matrix(tuple(tuple(original[i][j] for i in range(size)) for j in basis), size)
    y = solve_linear(basis_t, [costs[j] for j in basis])
    if not isinstance(y, tuple):
        raise ArithmeticError("Simplex basis became singular")
    return list(y)


def solve_raw(a: Matrix, b: Sequence[Fraction], objective: Sequence[Fraction], sense: Sense = Sense.MIN) -> LpOutcome:
    """Solves ``min/max objective^T x  s.t.  a x <= b`` without wrapping the data in a LinearProgram

    :param a:            constraint Matrix (q x d)
    :param b:            right-hand side of length q
    :param objective:    cost vector of length d
    :param sense:        Sense.MIN or Sense.MAX
    :return:             Optimal, Infeasible or Unbounded
    """
    q, d = a.shape
    c = [Fraction(v) for v in objective]
    if sense == Sense.MAX:
        c = [-v for v in c]
    b = [Fraction(v) for v in b]

    # columns: x+ (d), x- (d), slacks (q), artificials for rows with negative rhs
    signs = [1 if value >= 0 else -1 for value in b]
    negative_rows = [i for i in range(q) if signs[i] < 0]
    n_structural = 2 * d + q
    n_total = n_structural + len(negative_rows)
    original: List[List[Fraction]] = []
    basis: List[int] = []
    for i in range(q):
        row = [Fraction(0)] * n_total
        for j in range(d):
            row[j] = signs[i] * a[i][j]
            row[d + j] = -signs[i] * a[i][j]
        row[2 * d + i] = Fraction(signs[i])
        if signs[i] < 0:
            artificial = n_structural + negative_rows.index(i)
            row[artificial] = Fraction(1)
            basis.append(artificial)
        else:
            basis.append(2 * d + i)
        original.append(row)
    rhs = [signs[i] * b[i] for i in range(q)]
    tableau = _Tableau(original, rhs, basis)

    if negative_rows:
        phase_one_costs = [Fraction(0)] * n_structural + [Fraction(1)] * len(negative_rows)
        tableau.run(phase_one_costs, list(range(n_total)))
        infeasibility = sum((phase_one_costs[j] * tableau.rhs(i) for i, j in enumerate(tableau.basis)), Fraction(0))
        if infeasibility > 0:
            y = _multipliers(original, tableau.basis, phase_one_costs)
            farkas = tuple(-signs[i] * y[i] for i in range(q))
            logger.debug(f"LP infeasible, Farkas certificate '{farkas}'")
            return Infeasible(farkas)
        _drive_out_artificials(tableau, n_structural)

    costs = [Fraction(0)] * n_total
    for j in range(d):
        costs[j] = c[j]
        costs[d + j] = -c[j]
    unbounded_column = tableau.run(costs, list(range(n_structural)))
    if unbounded_column is not None:
        direction = [Fraction(0)] * n_total
        direction[unbounded_column] = Fraction(1)
        for i, j in enumerate(tableau.basis):
            direction[j] = -tableau.rows[i][unbounded_column]
        ray = canonical_ray(tuple(direction[j] - direction[d + j] for j in range(d)))
        return Unbounded(ray)

    z = [Fraction(0)] * n_total
    for i, j in enumerate(tableau.basis):
        z[j] = tableau.rhs(i)
    x = tuple(z[j] - z[d + j] for j in range(d))
    y = _multipliers([original[i] for i in tableau.kept_rows], tableau.basis, costs) if q else []
    dual = [Fraction(0)] * q
    for y_value, i in zip(y, tableau.kept_rows):
        dual[i] = -signs[i] * y_value
    value = dot(objective, x) if d else Fraction(0)
    return Optimal(x, Fraction(value), tuple(dual))


def _drive_out_artificials(tableau: _Tableau, n_structural: int) -> None:
    """Pivots zero-level artificials out of the basis, dropping rows that turn out to be redundant"""
    kept = list(range(len(tableau.rows)))
    r = 0
    while r < len(tableau.rows):
        if tableau.basis[r] >= n_structural:
            column = next((j for j in range(n_structural) if tableau.rows[r][j] != 0), None)
            if column is None:
                logger.debug(f"Dropping redundant constraint row '{kept[r]}'")
                del tableau.rows[r]
                del tableau.basis[r]
                del kept[r]
                continue
            tableau.pivot(r, column)
        r += 1
    tableau.kept_rows = kept


def solve(lp: LinearProgram) -> LpOutcome:
    """Solves a LinearProgram exactly, see :func:`solve_raw`"""
    return solve_raw(lp.constraints.a, lp.constraints.b, lp.objective, lp.sense)


def is_feasible(a: Matrix, b: Sequence[Fraction]) -> bool:
    return not isinstance(solve_raw(a, b, zeros(a.n_cols)), Infeasible)


def implicit_equalities(a: Matrix, b: Sequence[Fraction]) -> Optional[Tuple[int, ...]]:
    """Indices of the inequalities that hold with equality on the whole polyhedron {x : a x <= b}

    Repeatedly maximizes the total slack (each capped at 1) of the undecided inequalities; any inequality with
    positive slack in the optimum is not implicit, and once the optimum is zero all undecided ones are.

    :param a:    constraint Matrix
    :param b:    right-hand side
    :return:     sorted tuple of indices, None if the polyhedron is empty
    """
    q, d = a.shape
    if not is_feasible(a, b):
        return None
    undecided = list(range(q))
    while undecided:
        k = len(undecided)
        rows = []
        rhs = []
        for i in range(q):
            slack_part = [Fraction(0)] * k
            if i in undecided:
                slack_part[undecided.index(i)] = Fraction(1)
            rows.append(tuple(a[i]) + tuple(slack_part))
            rhs.append(b[i])
        for position in range(k):
            upper = [Fraction(0)] * (d + k)
            upper[d + position] = Fraction(1)
            lower = [Fraction(0)] * (d + k)
            lower[d + position] = Fraction(-1)
            rows.extend([tuple(upper), tuple(lower)])
            rhs.extend([Fraction(1), Fraction(0)])
        objective = zeros(d) + (Fraction(1),) * k
        outcome = solve_raw(Matrix(tuple(rows), d + k), rhs, objective, Sense.MAX)
        if not isinstance(outcome, Optimal):
            raise ArithmeticError(f"Slack maximization ended with '{type(outcome).__name__}'")
        if outcome.value == 0:
            break
        undecided = [i for position, i in enumerate(undecided) if outcome.x[d + position] == 0]
    return tuple(undecided)


def argmin_face(lp: LinearProgram, outcome: Optional[LpOutcome] = None) -> FaceDesc:
    """Active set of the optimal face: the inequalities tight at every optimal solution

    :param lp:         LinearProgram
    :param outcome:    result of ``solve(lp)`` if already known
    :return:           FaceDesc of the optimal face
    """
    if outcome is None:
        outcome = solve(lp)
    if not isinstance(outcome, Optimal):
        raise NotOptimalError(f"Optimal face needs an optimal outcome, got '{type(outcome).__name__}'")
    a, b = lp.constraints.a, lp.constraints.b
    objective = lp.objective if lp.sense == Sense.MIN else tuple(-v for v in lp.objective)
    value = outcome.value if lp.sense == Sense.MIN else -outcome.value
    optimal_set = Matrix(a.rows + (tuple(objective),), a.n_cols)
    tight = implicit_equalities(optimal_set, tuple(b) + (value,))
    active = tuple(i for i in tight if i < a.n_rows)
    return FaceDesc(active, a.n_cols - rank(a.select_rows(active)))


def certificate_holds(a: Matrix, b: Sequence[Fraction], objective: Sequence[Fraction], outcome: LpOutcome) -> bool:
    """Checks the certificate of a minimization outcome by exact substitution"""
    if isinstance(outcome, Optimal):
        dual = outcome.dual
        primal_ok = all(dot(row, outcome.x) <= rhs for row, rhs in zip(a.rows, b))
        stationary = all(
            sum((dual[i] * a[i][j] for i in range(a.n_rows)), Fraction(0)) == -objective[j] for j in range(a.n_cols)
        )
        strong = -dot(dual, b) == outcome.value if a.n_rows else outcome.value == 0
        return primal_ok and stationary and strong and all(v >= 0 for v in dual)
    if isinstance(outcome, Infeasible):
        lam = outcome.farkas
        combined = a.transpose().apply(lam)
        return all(v >= 0 for v in lam) and all(v == 0 for v in combined) and dot(lam, b) < 0
    ray = outcome.ray
    return all(dot(row, ray) <= 0 for row in a.rows) and dot(objective, ray) < 0
