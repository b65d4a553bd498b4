"""Dense matrices over a :class:`~nahcharp.ring.Ring`, as tuples of row tuples."""

from __future__ import annotations

from functools import reduce
from typing import Callable, Sequence

from .errors import NotAUnit, ShapeMismatch
from .ring import Ring, RingElem

Matrix = tuple


def from_rows(R: Ring, rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(R(x) for x in row) for row in rows)


def identity(R: Ring, n: int) -> Matrix:
    one, zero = R.one, R.zero
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def zeros(R: Ring, n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    z = R.zero
    return tuple(tuple(z for _ in range(m)) for _ in range(n))


def ring_of(A: Matrix) -> Ring:
    return A[0][0].ring


def shape(A: Matrix) -> tuple:
    return len(A), len(A[0]) if A else 0


def add(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ShapeMismatch(f"cannot add {shape(A)} and {shape(B)}")
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def sub(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ShapeMismatch(f"cannot subtract {shape(A)} and {shape(B)}")
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def neg(A: Matrix) -> Matrix:
    return tuple(tuple(-a for a in r) for r in A)


def scale(c, A: Matrix) -> Matrix:
    return tuple(tuple(c * a for a in r) for r in A)


def mul(A: Matrix, B: Matrix) -> Matrix:
    if len(A[0]) != len(B):
        raise ShapeMismatch(f"cannot multiply {shape(A)} by {shape(B)}")
    R = ring_of(A)
    cols = list(zip(*B))
    out = []
    for row in A:
        new = []
        for col in cols:
            acc = R.zero
            for a, b in zip(row, col):
                if a.num and b.num:
                    acc = acc + a * b
            new.append(acc)
        out.append(tuple(new))
    return tuple(out)


def mul_all(mats: Sequence[Matrix]) -> Matrix:
    return reduce(mul, mats)


def power(A: Matrix, k: int) -> Matrix:
    out = identity(ring_of(A), len(A))
    for _ in range(k):
        out = mul(out, A)
    return out


def apply(f: Callable, A: Matrix) -> Matrix:
    return tuple(tuple(f(a) for a in r) for r in A)


def equal(A: Matrix, B: Matrix) -> bool:
    return shape(A) == shape(B) and all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def is_zero(A: Matrix) -> bool:
    return all(not a.num for r in A for a in r)


def is_identity(A: Matrix) -> bool:
    return equal(A, identity(ring_of(A), len(A)))


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def commutator(A: Matrix, B: Matrix) -> Matrix:
    return sub(mul(A, B), mul(B, A))


def kron(A: Matrix, B: Matrix) -> Matrix:
    n, m = len(A), len(B)
    return tuple(
        tuple(A[i // m][j // m] * B[i % m][j % m] for j in range(n * m)) for i in range(n * m)
    )


def block_diag(A: Matrix, B: Matrix) -> Matrix:
    R = ring_of(A)
    n, m = len(A), len(B)
    z = R.zero
    rows = [tuple(A[i]) + (z,) * m for i in range(n)]
    rows += [(z,) * n + tuple(B[i]) for i in range(m)]
    return tuple(rows)


def det(A: Matrix) -> RingElem:
    """Determinant by memoized Laplace expansion (no division, so valid over Z/p^2)."""
    n = len(A)
    R = ring_of(A)
    memo: dict = {}

    def minor(row: int, cols: frozenset) -> RingElem:
        if row == n:
            return R.one
        key = (row, cols)
        if key in memo:
            return memo[key]
        acc = R.zero
        sign = 1
        for c in sorted(cols):
            a = A[row][c]
            if a.num:
                term = a * minor(row + 1, cols - {c})
                acc = acc + term if sign > 0 else acc - term
            sign = -sign
        memo[key] = acc
        return acc

    return minor(0, frozenset(range(n)))


def is_invertible(A: Matrix) -> bool:
    return det(A).is_unit()


def inverse(A: Matrix) -> Matrix:
    n = len(A)
    d = det(A)
    if not d.is_unit():
        raise NotAUnit("matrix is not invertible")
    dinv = d.inverse()
    if n == 1:
        return ((dinv,),)
    cof = []
    for i in range(n):
        row = []
        for j in range(n):
            sub_m = tuple(
                tuple(A[r][c] for c in range(n) if c != j) for r in range(n) if r != i
            )
            c = det(sub_m)
            row.append(c if (i + j) % 2 == 0 else -c)
        cof.append(row)
    return tuple(tuple(cof[j][i] * dinv for j in range(n)) for i in range(n))


def to_json(A: Matrix) -> list:
    return [[a.to_json() for a in r] for r in A]


def from_json(R: Ring, obj) -> Matrix:
    return tuple(tuple(RingElem.from_json(R, x) for x in row) for row in obj)


def to_str(A: Matrix) -> list:
    return [[str(a) for a in r] for r in A]
