"""Exact rational scalars, vectors and matrices with fraction-free elimination kernels

Scalars are :class:`fractions.Fraction` (always kept in lowest terms by the standard library), vectors are
tuples of fractions and matrices are immutable :class:`Matrix` objects. Every geometric object in the package
is built on top of these types, nothing in here ever touches floating point except :func:`to_f64`, which is a
read-only view used for reporting and Monte Carlo comparison.
"""

import logging
import math

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

Rat = Fraction
Vec = Tuple[Fraction, ...]

__all__ = [
    "Rat",
    "Vec",
    "DimensionError",
    "Matrix",
    "NoSolution",
    "InfinitelyMany",
    "to_rat",
    "vec",
    "zeros",
    "dot",
    "add",
    "sub",
    "scale",
    "neg",
    "is_zero",
    "canonical_ray",
    "lex_key",
    "to_f64",
    "det",
    "rank",
    "rref",
    "rref_with_pivots",
    "solve",
    "nullspace",
    "inverse",
]


class DimensionError(ValueError):
    """Raised if shapes of matrices or vectors do not match"""


def to_rat(value: Union[int, str, Fraction]) -> Fraction:
    """Converts an integer, a fraction or a "p/q" / decimal string to an exact rational

    Floats are refused because their binary expansion is almost never what the caller meant.

    :param value:    integer, Fraction or string such as "-7/24", "3" or "0.125"
    :return:         Fraction
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"'value' must be an int, a Fraction or a rational string, not '{type(value)}'")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"'value' must be an int, a Fraction or a rational string, not '{type(value)}'")


def vec(values: Iterable[Union[int, str, Fraction]]) -> Vec:
    """Builds a rational vector"""
    return tuple(to_rat(value) for value in values)


def zeros(n: int) -> Vec:
    return (Fraction(0),) * n


def _check_same_length(u: Sequence, v: Sequence) -> None:
    if len(u) != len(v):
        raise DimensionError(f"Vectors of lengths '{len(u)}' and '{len(v)}' do not match")


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    _check_same_length(u, v)
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    _check_same_length(u, v)
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    _check_same_length(u, v)
    return tuple(a - b for a, b in zip(u, v))


def scale(factor: Fraction, v: Sequence[Fraction]) -> Vec:
    return tuple(factor * a for a in v)


def neg(v: Sequence[Fraction]) -> Vec:
    return tuple(-a for a in v)


def is_zero(v: Sequence[Fraction]) -> bool:
    return all(a == 0 for a in v)


def canonical_ray(v: Sequence[Fraction]) -> Vec:
    """Scales a nonzero direction so that its first nonzero coordinate is +1 or -1

    Two rays span the same half-line iff their canonical forms are equal.

    :param v:    nonzero vector
    :return:     positively rescaled vector
    """
    for entry in v:
        if entry != 0:
            return scale(1 / abs(Fraction(entry)), v)
    raise ValueError("Zero vector has no ray direction")


def lex_key(v: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    """Sort key giving the deterministic lexicographic order used for generators and vertices"""
    return tuple(v)


def to_f64(value: Union[Fraction, Sequence[Fraction], "Matrix"]) -> Union[float, np.ndarray]:
    """Approximate float view of a scalar, vector or matrix (reporting and Monte Carlo only)"""
    if isinstance(value, Matrix):
        return np.array([[float(a) for a in row] for row in value.rows], dtype=float).reshape(value.shape)
    if isinstance(value, (Fraction, int)):
        return float(value)
    return np.array([float(a) for a in value], dtype=float)


@dataclass(frozen=True)
class Matrix:
    """Immutable row-major rational matrix

    The number of columns is stored explicitly so that matrices with zero rows still know their width.
    """

    rows: Tuple[Vec, ...]
    n_cols: int

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != self.n_cols:
                raise DimensionError(f"All rows must have '{self.n_cols}' entries, found a row with '{len(row)}'")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Union[int, str, Fraction]]], n_cols: int = None) -> "Matrix":
        """Builds a matrix from nested iterables, converting every entry to a Fraction

        :param rows:      iterable of rows
        :param n_cols:    number of columns, mandatory when there are no rows
        :return:          Matrix
        """
        converted = tuple(vec(row) for row in rows)
        if n_cols is None:
            if not converted:
                raise DimensionError("'n_cols' must be given for a matrix without rows")
            n_cols = len(converted[0])
        return cls(converted, n_cols)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Fraction]], n_rows: int) -> "Matrix":
        return cls(tuple(tuple(Fraction(col[i]) for col in columns) for i in range(n_rows)), len(columns))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)), n)

    @classmethod
    def zero(cls, n_rows: int, n_cols: int) -> "Matrix":
        return cls(tuple(zeros(n_cols) for _ in range(n_rows)), n_cols)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    def __getitem__(self, index: int) -> Vec:
        return self.rows[index]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, j: int) -> Vec:
        return tuple(row[j] for row in self.rows)

    def transpose(self) -> "Matrix":
        return Matrix(tuple(self.column(j) for j in range(self.n_cols)), self.n_rows)

    @property
    def T(self) -> "Matrix":
        return self.transpose()

    def apply(self, v: Sequence[Fraction]) -> Vec:
        """Matrix-vector product"""
        if len(v) != self.n_cols:
            raise DimensionError(f"Cannot multiply a '{self.shape}' matrix with a vector of length '{len(v)}'")
        return tuple(dot(row, v) for row in self.rows)

    def __matmul__(self, other: Union["Matrix", Sequence[Fraction]]) -> Union["Matrix", Vec]:
        if not isinstance(other, Matrix):
            return self.apply(other)
        if self.n_cols != other.n_rows:
            raise DimensionError(f"Cannot multiply '{self.shape}' and '{other.shape}' matrices")
        columns = [other.column(j) for j in range(other.n_cols)]
        return Matrix(tuple(tuple(dot(row, col) for col in columns) for row in self.rows), other.n_cols)

    def select_rows(self, indices: Iterable[int]) -> "Matrix":
        return Matrix(tuple(self.rows[i] for i in indices), self.n_cols)

    def select_columns(self, indices: Sequence[int]) -> "Matrix":
        return Matrix(tuple(tuple(row[j] for j in indices) for row in self.rows), len(indices))

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.n_rows != other.n_rows:
            raise DimensionError(f"Cannot stack '{self.shape}' and '{other.shape}' side by side")
        return Matrix(tuple(a + b for a, b in zip(self.rows, other.rows)), self.n_cols + other.n_cols)

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.n_cols != other.n_cols:
            raise DimensionError(f"Cannot stack '{self.shape}' on top of '{other.shape}'")
        return Matrix(self.rows + other.rows, self.n_cols)

    def negated(self) -> "Matrix":
        return Matrix(tuple(neg(row) for row in self.rows), self.n_cols)

    def scaled(self, factor: Fraction) -> "Matrix":
        return Matrix(tuple(scale(factor, row) for row in self.rows), self.n_cols)


@dataclass(frozen=True)
class NoSolution:
    """The linear system is inconsistent"""


@dataclass(frozen=True)
class InfinitelyMany:
    """Solution set ``particular + span(basis)`` of an underdetermined consistent system"""

    particular: Vec
    basis: Tuple[Vec, ...]


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[Fraction]], Fraction]:
    """Clears denominators row by row.

    :return:    integer-valued rows and the product of the row multipliers
    """
    scaled_rows = []
    multiplier = Fraction(1)
    for row in rows:
        lcm = 1
        for entry in row:
            lcm = lcm * Fraction(entry).denominator // math.gcd(lcm, Fraction(entry).denominator)
        scaled_rows.append([Fraction(entry) * lcm for entry in row])
        multiplier *= lcm
    return scaled_rows, multiplier


def _bareiss(rows: List[List[Fraction]], n_cols: int) -> Tuple[List[List[Fraction]], List[int], int]:
    """Fraction-free forward elimination (Bareiss) in place.

    :param rows:      integer-valued rows, modified in place
    :param n_cols:    number of columns
    :return:          echelon rows, pivot columns and the parity of row swaps (+1 or -1)
    """
    n_rows = len(rows)
    pivots: List[int] = []
    sign = 1
    previous = Fraction(1)
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot_row = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != r:
            rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
            sign = -sign
        pivot = rows[r][c]
        for i in range(r + 1, n_rows):
            factor = rows[i][c]
            for j in range(c + 1, n_cols):
                rows[i][j] = (pivot * rows[i][j] - factor * rows[r][j]) / previous
            rows[i][c] = Fraction(0)
        previous = pivot
        pivots.append(c)
        r += 1
    return rows, pivots, sign


def det(m: Matrix) -> Fraction:
    """Exact determinant of a square matrix

    :param m:    square Matrix
    :return:     Fraction
    """
    if m.n_rows != m.n_cols:
        raise DimensionError(f"Determinant needs a square matrix, got shape '{m.shape}'")
    n = m.n_rows
    if n == 0:
        return Fraction(1)
    rows, multiplier = _integer_rows(m.rows)
    echelon, pivots, sign = _bareiss(rows, n)
    if len(pivots) < n:
        return Fraction(0)
    # the last Bareiss pivot is the determinant of the integer matrix
    return sign * echelon[n - 1][n - 1] / multiplier


def rref_with_pivots(m: Matrix) -> Tuple[Matrix, Tuple[int, ...]]:
    """Reduced row echelon form together with the pivot columns

    :param m:    Matrix
    :return:     (rref matrix with zero rows at the bottom, pivot column indices)
    """
    rows, _ = _integer_rows(m.rows)
    echelon, pivots, _ = _bareiss(rows, m.n_cols)
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        pivot = echelon[r][c]
        echelon[r] = [entry / pivot for entry in echelon[r]]
        for i in range(r):
            factor = echelon[i][c]
            if factor != 0:
                echelon[i] = [a - factor * b for a, b in zip(echelon[i], echelon[r])]
    return Matrix(tuple(tuple(row) for row in echelon), m.n_cols), tuple(pivots)


def rref(m: Matrix) -> Matrix:
    return rref_with_pivots(m)[0]


def rank(m: Matrix) -> int:
    rows, _ = _integer_rows(m.rows)
    return len(_bareiss(rows, m.n_cols)[1])


def nullspace(m: Matrix) -> Tuple[Vec, ...]:
    """Basis of {x : m x = 0}, one vector per free column, in column order"""
    reduced, pivots = rref_with_pivots(m)
    free = [j for j in range(m.n_cols) if j not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * m.n_cols
        x[f] = Fraction(1)
        for r, p in enumerate(pivots):
            x[p] = -reduced[r][f]
        basis.append(tuple(x))
    return tuple(basis)


def solve(m: Matrix, rhs: Sequence[Fraction]) -> Union[Vec, NoSolution, InfinitelyMany]:
    """Classifies and solves the linear system ``m x = rhs`` exactly

    :param m:      Matrix
    :param rhs:    right-hand side with one entry per row of m
    :return:       the unique solution, NoSolution or InfinitelyMany(particular, basis)
    """
    if len(rhs) != m.n_rows:
        raise DimensionError(f"Right-hand side of length '{len(rhs)}' does not match '{m.n_rows}' rows")
    augmented = m.hstack(Matrix(tuple((Fraction(v),) for v in rhs), 1))
    reduced, pivots = rref_with_pivots(augmented)
    if m.n_cols in pivots:
        return NoSolution()
    x = [Fraction(0)] * m.n_cols
    for r, p in enumerate(pivots):
        x[p] = reduced[r][m.n_cols]
    if len(pivots) < m.n_cols:
        return InfinitelyMany(tuple(x), nullspace(m))
    return tuple(x)


def inverse(m: Matrix) -> Matrix:
    """Exact inverse of a nonsingular square matrix"""
    if m.n_rows != m.n_cols:
        raise DimensionError(f"Inverse needs a square matrix, got shape '{m.shape}'")
    n = m.n_rows
    reduced, pivots = rref_with_pivots(m.hstack(Matrix.identity(n)))
    if tuple(pivots[:n]) != tuple(range(n)):
        raise ValueError("Matrix is singular")
    return reduced.select_columns(list(range(n, 2 * n)))
