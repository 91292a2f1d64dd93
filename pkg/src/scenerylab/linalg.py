"""Small exact linear algebra over any field whose elements support + - * / and ``== 0``.

Used with :class:`fractions.Fraction` and with cyclotomic numbers.  Matrices
are lists of rows.  Sizes here are tiny (n <= 12), so clarity wins over speed.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import SingularSystemError


def _is_zero(x) -> bool:
    return x == 0


def solve(a: Sequence[Sequence], b: Sequence, *, one=Fraction(1)) -> list:
    """Solve ``a @ x = b`` by Gauss-Jordan elimination with exact pivot tests."""
    n = len(a)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not _is_zero(m[r][col])), None)
        if piv is None:
            raise SingularSystemError(f"matrix is singular (no pivot in column {col})")
        m[col], m[piv] = m[piv], m[col]
        inv = one / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and not _is_zero(m[r][col]):
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n] for row in m]


def inverse(a: Sequence[Sequence], *, one=Fraction(1), zero=Fraction(0)) -> list[list]:
    n = len(a)
    cols = [solve(a, [one if i == j else zero for i in range(n)], one=one) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def matmul(a, b) -> list[list]:
    return [[sum((x * y for x, y in zip(row, col)), start=0 * row[0]) for col in zip(*b)] for row in a]


def vandermonde_inverse(nodes: Sequence, *, one=Fraction(1), zero=Fraction(0)) -> list[list]:
    """Inverse of ``V[l][j] = nodes[j]**l`` via the Lagrange basis.

    Row ``j`` of the result holds the coefficients of
    ``L_j(t) = prod_{i != j} (t - z_i) / (z_j - z_i)``, so that
    ``sum_l U[j][l] z_i**l = [i == j]``.  Coinciding nodes raise
    :class:`SingularSystemError` listing the offending index pairs.
    """
    n = len(nodes)
    clashes = [
        (i, j) for i in range(n) for j in range(i + 1, n) if _is_zero(nodes[i] - nodes[j])
    ]
    if clashes:
        raise SingularSystemError(
            f"Vandermonde nodes coincide at index pairs {clashes[:5]}", collisions=clashes
        )
    # master polynomial prod_i (t - z_i), coefficients low to high
    master = [one]
    for z in nodes:
        nxt = [zero] * (len(master) + 1)
        for k, c in enumerate(master):
            nxt[k + 1] = nxt[k + 1] + c
            nxt[k] = nxt[k] - c * z
        master = nxt
    rows = []
    for j, zj in enumerate(nodes):
        # synthetic division of the master polynomial by (t - z_j)
        quot = [zero] * n
        carry = zero
        for k in range(n, 0, -1):
            carry = master[k] + carry * zj if k < n else master[k]
            quot[k - 1] = carry
        denom = one
        for i, zi in enumerate(nodes):
            if i != j:
                denom = denom * (zj - zi)
        inv = one / denom
        rows.append([q * inv for q in quot])
    return rows


def apply_along_axis(tensor: list, shape_n: int, rank: int, matrix, axis: int, zero=Fraction(0)) -> list:
    """Contract ``matrix`` (n x n) with a flat row-major ``n**rank`` tensor along ``axis``.

    ``out[..., i, ...] = sum_j matrix[i][j] * tensor[..., j, ...]``.
    """
    n = shape_n
    stride = n ** (rank - 1 - axis)
    block = stride * n
    out = [zero] * len(tensor)
    for base in range(0, len(tensor), block):
        for off in range(stride):
            col = [tensor[base + off + j * stride] for j in range(n)]
            if all(_is_zero(c) for c in col):
                continue
            for i in range(n):
                row = matrix[i]
                acc = zero
                for j in range(n):
                    c = col[j]
                    if not _is_zero(c):
                        acc = acc + row[j] * c
                out[base + off + i * stride] = acc
    return out


def kron(a, b) -> list[list]:
    return [[x * y for x in ra for y in rb] for ra in a for rb in b]
