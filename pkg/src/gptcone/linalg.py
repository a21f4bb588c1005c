"""Small dense linear algebra over exact rationals or floats.

Matrices are tuples of row tuples.  Exact inputs stay exact; float inputs are
handed to numpy.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import SingularMatrix
from .scalar import all_exact, epsilon, is_zero, to_scalar

Matrix = tuple


def matrix(rows) -> Matrix:
    return tuple(tuple(to_scalar(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def diag(values) -> Matrix:
    values = [to_scalar(v) for v in values]
    zero = Fraction(0) if all_exact([values]) else 0.0
    return tuple(tuple(v if i == j else zero for j in range(len(values))) for i, v in enumerate(values))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m))


def matvec(m: Matrix, v: Sequence) -> tuple:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in m)


def vecmat(v: Sequence, m: Matrix) -> tuple:
    return tuple(sum(v[i] * m[i][j] for i in range(len(v))) for j in range(len(m[0])))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def outer(a: Sequence, b: Sequence) -> Matrix:
    return tuple(tuple(x * y for y in b) for x in a)


def kron(a: Sequence, b: Sequence) -> tuple:
    """Row-major flattening of ``outer(a, b)``."""
    return tuple(x * y for x in a for y in b)


def reshape(flat: Sequence, n: int, m: int) -> Matrix:
    if len(flat) != n * m:
        raise ValueError(f"cannot reshape length {len(flat)} into {n}x{m}")
    return tuple(tuple(flat[i * m:(i + 1) * m]) for i in range(n))


def flatten(m: Matrix) -> tuple:
    return tuple(x for row in m for x in row)


def _row_reduce(rows: list[list[Fraction]]) -> int:
    """In-place Gauss elimination over Fractions; returns the rank."""
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / p
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def rank(vectors) -> int:
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        return 0
    if all_exact(vectors):
        return _row_reduce([[Fraction(x) for x in v] for v in vectors])
    arr = np.array(vectors, dtype=float)
    return int(np.linalg.matrix_rank(arr, tol=epsilon() * max(1.0, np.abs(arr).max())))


def solve(rows, rhs) -> tuple | None:
    """One exact solution of ``rows . x = rhs`` (free variables set to 0),
    or None when the system is inconsistent."""
    rows = [tuple(r) for r in rows]
    if not rows:
        return None
    ncols = len(rows[0])
    aug = [[Fraction(x) for x in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    rk = _row_reduce(aug)
    x = [Fraction(0)] * ncols
    for r in aug[:rk]:
        lead = next(i for i, v in enumerate(r) if v != 0)
        if lead == ncols:
            return None
        x[lead] = r[ncols] / r[lead]
    if any(all(v == 0 for v in r[:ncols]) and r[ncols] != 0 for r in aug[rk:]):
        return None
    return tuple(x)


def inverse(m: Matrix) -> Matrix:
    n = len(m)
    if any(len(row) != n for row in m):
        raise SingularMatrix("matrix is not square")
    if all_exact(m):
        aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
               for i, row in enumerate(m)]
        if _row_reduce(aug) < n or any(aug[i][i] == 0 for i in range(n)):
            raise SingularMatrix("matrix is singular")
        return tuple(tuple(x / aug[i][i] for x in aug[i][n:]) for i in range(n))
    arr = np.array(m, dtype=float)
    if abs(np.linalg.det(arr)) <= epsilon():
        raise SingularMatrix("matrix is singular")
    return tuple(tuple(float(x) for x in row) for row in np.linalg.inv(arr))


def is_identity(m: Matrix) -> bool:
    return all(is_zero(m[i][j] - (1 if i == j else 0)) for i in range(len(m)) for j in range(len(m)))
