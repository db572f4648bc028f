"""Exact linear algebra over the integers and rationals.

Everything here is deterministic and exact: integer algorithms (Smith and
Hermite normal forms, kernels, Bareiss determinants) and Fraction-based
algorithms (Gaussian elimination, LDL^T, Gram-based LLL).  Vectors are rows
throughout the package, so "solving" means finding x with x*A = b.

numpy is used elsewhere purely as a bounded-integer engine; this module is
the arbitrary-precision fallback and the source of all unimodular
transforms.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotDefinite


def _rows(mat) -> list[list[Fraction]]:
    """Copy input (RatMatrix or nested sequence) to mutable Fraction rows."""
    if isinstance(mat, RatMatrix):
        return [list(r) for r in mat.rows]
    return [[Fraction(e) for e in row] for row in mat]


def _int_rows(mat) -> list[list[int]]:
    """Copy input to mutable int rows, insisting on integrality."""
    out = []
    for row in mat.rows if isinstance(mat, RatMatrix) else mat:
        r = []
        for e in row:
            f = Fraction(e)
            if f.denominator != 1:
                raise ValueError("integer matrix required, got %s" % (e,))
            r.append(f.numerator)
        out.append(r)
    return out


class RatMatrix:
    """Immutable exact rational matrix (row major)."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(Fraction(e) for e in row) for row in rows)
        if not data or not data[0]:
            raise ValueError("matrix must be nonempty")
        width = len(data[0])
        if any(len(r) != width for r in data):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", data)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("RatMatrix is immutable")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    def __getitem__(self, ij):
        if isinstance(ij, tuple):
            return self.rows[ij[0]][ij[1]]
        return self.rows[ij]

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other):
        return isinstance(other, RatMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "RatMatrix(%r)" % (self.rows,)

    @staticmethod
    def identity(n: int) -> "RatMatrix":
        return RatMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def transpose(self) -> "RatMatrix":
        return RatMatrix(list(zip(*self.rows)))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix([[-e for e in row] for row in self.rows])

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        return RatMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)]
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RatMatrix):
            cols = list(zip(*other.rows))
            return RatMatrix(
                [[_dot(r, c) for c in cols] for r in self.rows]
            )
        c = Fraction(other)
        return RatMatrix([[e * c for e in row] for row in self.rows])

    __rmul__ = __mul__

    def is_integral(self) -> bool:
        return all(e.denominator == 1 for row in self.rows for e in row)

    def int_rows(self) -> list[list[int]]:
        return _int_rows(self)


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum(a * b for a, b in zip(u, v))


def mat_mul(a, b) -> list[list[Fraction]]:
    """Plain nested-list matrix product."""
    bc = list(zip(*(b.rows if isinstance(b, RatMatrix) else b)))
    ar = a.rows if isinstance(a, RatMatrix) else a
    return [[sum(x * y for x, y in zip(row, col)) for col in bc] for row in ar]


def vec_mat(v, m) -> list:
    """Row vector times matrix."""
    rows = m.rows if isinstance(m, RatMatrix) else m
    return [sum(v[i] * rows[i][j] for i in range(len(v))) for j in range(len(rows[0]))]


def gram_pair(u, v, gram) -> Fraction:
    """Bilinear pairing u * gram * v^T."""
    return _dot(vec_mat(u, gram), v)


def nearest_int(x: Fraction) -> int:
    """Round to nearest integer, halves up (deterministic)."""
    x = Fraction(x)
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


# --------------------------------------------------------------------------
# integer normal forms
# --------------------------------------------------------------------------

def smith_normal_form(mat) -> tuple[RatMatrix, RatMatrix, RatMatrix]:
    """Return (U, D, V) with U*mat*V = D, U, V unimodular, D diagonal with
    nonnegative entries forming a divisibility chain."""
    m_rows = _int_rows(mat)
    m, n = len(m_rows), len(m_rows[0])
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_op(dst, src, c, mat_, tr):
        for j in range(len(mat_[0])):
            mat_[dst][j] += c * mat_[src][j]
        for j in range(len(tr[0])):
            tr[dst][j] += c * tr[src][j]

    def col_op(dst, src, c):
        for i in range(m):
            m_rows[i][dst] += c * m_rows[i][src]
        for i in range(n):
            v[i][dst] += c * v[i][src]

    def swap_rows(a, b):
        m_rows[a], m_rows[b] = m_rows[b], m_rows[a]
        u[a], u[b] = u[b], u[a]

    def swap_cols(a, b):
        for i in range(m):
            m_rows[i][a], m_rows[i][b] = m_rows[i][b], m_rows[i][a]
        for i in range(n):
            v[i][a], v[i][b] = v[i][b], v[i][a]

    t = 0
    while t < min(m, n):
        # locate minimal nonzero entry in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                e = m_rows[i][j]
                if e and (best is None or abs(e) < abs(m_rows[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        while True:
            i0, j0 = best
            if i0 != t:
                swap_rows(t, i0)
            if j0 != t:
                swap_cols(t, j0)
            p = m_rows[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = m_rows[i][t] // p
                if q:
                    row_op(i, t, -q, m_rows, u)
                if m_rows[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = m_rows[t][j] // p
                if q:
                    col_op(j, t, -q)
                if m_rows[t][j]:
                    dirty = True
            if dirty:
                best = None
                for i in range(t, m):
                    for j in range(t, n):
                        e = m_rows[i][j]
                        if e and (
                            best is None or abs(e) < abs(m_rows[best[0]][best[1]])
                        ):
                            best = (i, j)
                continue
            # pivot clean; enforce divisibility of the remaining block

            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if m_rows[i][j] % p:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_op(t, offender, 1, m_rows, u)
            best = (t, t)
        if m_rows[t][t] < 0:
            for j in range(n):
                m_rows[t][j] = -m_rows[t][j]
            for j in range(m):
                u[t][j] = -u[t][j]
        t += 1

    return RatMatrix(u), RatMatrix(m_rows), RatMatrix(v)


def hermite_normal_form(mat) -> tuple[RatMatrix, RatMatrix]:
    """Row-style HNF of an integer matrix: returns (H, U) with H = U*mat,
    U unimodular, pivots positive, entries above pivots reduced, zero rows
    last."""
    a = _int_rows(mat)
    m, n = len(a), len(a[0])
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    r = 0
    for c in range(n):
        # gcd out column c below row r
        piv = None
        for i in range(r, m):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        u[r], u[piv] = u[piv], u[r]
        improved = True
        while improved:
            improved = False
            for i in range(r + 1, m):
                if not a[i][c]:
                    continue
                q = a[i][c] // a[r][c]
                if q:
                    for j in range(n):
                        a[i][j] -= q * a[r][j]
                    for j in range(m):
                        u[i][j] -= q * u[r][j]
                if a[i][c]:
                    a[r], a[i] = a[i], a[r]
                    u[r], u[i] = u[i], u[r]
                    improved = True
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = a[i][c] // a[r][c]
            if q:
                for j in range(n):
                    a[i][j] -= q * a[r][j]
                for j in range(m):
                    u[i][j] -= q * u[r][j]
        r += 1
        if r == m:
            break
    return RatMatrix(a), RatMatrix(u)


def kernel_basis_int(mat) -> list[list[int]]:
    """Basis of the saturated integer row kernel {x : x*mat = 0}."""
    u, d, _v = smith_normal_form(mat)
    m = u.nrows
    n = d.ncols
    out = []
    for i in range(m):
        if i >= n or d[i, i] == 0:
            out.append([int(e) for e in u[i]])
    return out


def solve_int_row(mat, b) -> list[int] | None:
    """One integer solution x of x*mat = b, or None if none exists."""
    u, d, v = smith_normal_form(mat)
    bv = vec_mat([Fraction(e) for e in b], v)
    m, n = u.nrows, d.ncols
    y = [Fraction(0)] * m
    for j in range(n):
        dj = d[j, j] if j < m else 0
        if dj:
            q = bv[j] / dj
            if q.denominator != 1:
                return None
            if j < m:
                y[j] = q
        elif bv[j]:
            return None
    x = vec_mat(y, u)
    assert all(e.denominator == 1 for e in x)
    return [int(e) for e in x]


def det_bareiss(mat) -> int:
    """Fraction-free determinant of an integer matrix."""
    a = _int_rows(mat)
    n = len(a)
    assert len(a[0]) == n
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# --------------------------------------------------------------------------
# rational elimination
# --------------------------------------------------------------------------

def rat_inverse(mat) -> RatMatrix:
    """Exact inverse of a square rational matrix."""
    a = _rows(mat)
    n = len(a)
    assert len(a[0]) == n
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv[c], inv[piv] = inv[piv], inv[c]
        p = a[c][c]
        a[c] = [e / p for e in a[c]]
        inv[c] = [e / p for e in inv[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                inv[i] = [x - f * y for x, y in zip(inv[i], inv[c])]
    return RatMatrix(inv)


def rat_solve_row(mat, b) -> list[Fraction]:
    """Solve x*mat = b for a square invertible rational matrix."""
    return vec_mat(list(b), rat_inverse(mat))


def det_rational(mat) -> Fraction:
    a = _rows(mat)
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        p = a[c][c]
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / p
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def rank_rational(mat) -> int:
    a = _rows(mat)
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, m):
            if a[i][c]:
                f = a[i][c] / p
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == m:
            break
    return r


def signature(gram) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia of a symmetric rational matrix,
    by exact congruence diagonalization."""
    a = _rows(gram)
    n = len(a)
    assert all(a[i][j] == a[j][i] for i in range(n) for j in range(n)), "not symmetric"
    pos = neg = zero = 0
    idx = list(range(n))
    for t in range(n):
        if a[t][t] == 0:
            j = next((j for j in range(t + 1, n) if a[j][j]), None)
            if j is not None:
                a[t], a[j] = a[j], a[t]
                for row in a:
                    row[t], row[j] = row[j], row[t]
            else:
                j = next((j for j in range(t + 1, n) if a[t][j]), None)
                if j is None:
                    zero += 1
                    continue
                # a[t][t] == a[j][j] == 0, a[t][j] != 0: add row/col j to t
                for c in range(n):
                    a[t][c] += a[j][c]
                for r in range(n):
                    a[r][t] += a[r][j]
        p = a[t][t]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for i in range(t + 1, n):
            if a[i][t]:
                f = a[i][t] / p
                for c in range(n):
                    a[i][c] -= f * a[t][c]
                for r in range(n):
                    a[r][i] -= f * a[r][t]
    del idx
    return pos, neg, zero


# --------------------------------------------------------------------------
# quadratic form decompositions
# --------------------------------------------------------------------------

def ldl(gram) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Exact LDL^T of a positive definite symmetric matrix.

    Returns (d, mu) with Q(x) = sum_i d[i] * (x[i] + sum_{j>i} mu[i][j]x[j])^2.
    Raises NotDefinite if the matrix is not positive definite.
    """
    a = _rows(gram)
    n = len(a)
    d = [Fraction(0)] * n
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        val = a[i][i] - sum(d[k] * mu[k][i] * mu[k][i] for k in range(i))
        if val <= 0:
            raise NotDefinite("pivot %d is %s" % (i, val))
        d[i] = val
        mu[i][i] = Fraction(1)
        for j in range(i + 1, n):
            s = a[i][j] - sum(d[k] * mu[k][i] * mu[k][j] for k in range(i))
            mu[i][j] = s / val
    return d, mu


def lll_reduce(gram, delta: Fraction = Fraction(99, 100)) -> tuple[RatMatrix, RatMatrix]:
    """Exact Gram-based LLL.

    Accepts a positive or negative definite symmetric rational Gram matrix
    and returns (U, G') with G' = U*gram*U^T LLL-reduced (for the negated
    form when the input is negative definite, with the sign restored in
    G').  Raises NotDefinite for indefinite or degenerate input.
    """
    g0 = _rows(gram)
    n = len(g0)
    if n != len(g0[0]):
        raise ValueError("square matrix required")
    diag = [g0[i][i] for i in range(n)]
    if all(e > 0 for e in diag):
        sign = 1
    elif all(e < 0 for e in diag):
        sign = -1
    else:
        raise NotDefinite("mixed diagonal signs")
    a = [[sign * e for e in row] for row in g0]
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    # full Gram-Schmidt data
    b = [Fraction(0)] * n
    mu = [[Fraction(0)] * n for _ in range(n)]

    def gs_row(i):
        for j in range(i):
            mu[i][j] = (a[i][j] - sum(mu[i][k] * mu[j][k] * b[k] for k in range(j))) / b[j]
        b[i] = a[i][i] - sum(mu[i][k] * mu[i][k] * b[k] for k in range(i))
        if b[i] <= 0:
            raise NotDefinite("Gram-Schmidt norm %d is %s" % (i, b[i]))

    for i in range(n):
        gs_row(i)

    def size_reduce(k, j):
        r = nearest_int(mu[k][j])
        if r:
            for c in range(n):
                a[k][c] -= r * a[j][c]
            for rr in range(n):
                a[rr][k] -= r * a[rr][j]
            for c in range(n):
                u[k][c] -= r * u[j][c]
            mu[k][j] -= r
            for l in range(j):
                mu[k][l] -= r * mu[j][l]

    k = 1
    while k < n:
        size_reduce(k, k - 1)
        if b[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * b[k - 1]:
            for j in range(k - 2, -1, -1):
                size_reduce(k, j)
            k += 1
        else:
            # swap rows k-1 and k everywhere
            a[k - 1], a[k] = a[k], a[k - 1]
            for row in a:
                row[k - 1], row[k] = row[k], row[k - 1]
            u[k - 1], u[k] = u[k], u[k - 1]
            m = mu[k][k - 1]
            bnew = b[k] + m * m * b[k - 1]
            for j in range(k - 1):
                mu[k - 1][j], mu[k][j] = mu[k][j], mu[k - 1][j]
            mu[k][k - 1] = m * b[k - 1] / bnew
            b[k] = b[k - 1] * b[k] / bnew
            b[k - 1] = bnew
            for i in range(k + 1, n):
                t = mu[i][k]
                mu[i][k] = mu[i][k - 1] - m * t
                mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
            k = max(k - 1, 1)

    reduced = [[sign * e for e in row] for row in a]
    return RatMatrix(u), RatMatrix(reduced)
