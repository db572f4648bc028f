"""Exact enumeration of lattice vectors by norm and pairing conditions.

All routines reduce to one primitive: list integer points x with
(x + s) A (x + s)^T related to a bound, for a positive definite rational A
and rational shift s.  The recursion uses the exact LDL^T decomposition;
interval endpoints are located with float guesses and then corrected by
exact Fraction comparisons, so results carry no rounding error.  Bases are
LLL-reduced first, which keeps the search tree small.

Vectors are rows; a "coset" is offset + Z^k in the coordinates of the
ambient basis.  Output order is always lexicographic, making every caller
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import ConeViolation, NotDefinite
from .exact import (
    RatMatrix,
    gram_pair,
    kernel_basis_int,
    ldl,
    lll_reduce,
    mat_mul,
    rat_inverse,
    rat_solve_row,
    solve_int_row,
    vec_mat,
)


def _floor_sqrt_bound(t: Fraction, r: Fraction, upper: bool) -> int:
    """Endpoints of { x integer : (x+t)^2 <= r }, i.e. the largest integer
    <= -t + sqrt(r) (upper) or the smallest integer >= -t - sqrt(r).
    Requires r >= 0; the interval may contain no integer, in which case
    lower > upper.  Exact: float guesses corrected by Fraction tests."""
    ft = float(t)
    fr = math.sqrt(float(r)) if r > 0 else 0.0
    if upper:
        # predicate x <= -t + sqrt(r), monotone decreasing in x
        def ok(x):
            s = x + t
            return s <= 0 or s * s <= r

        x = math.floor(-ft + fr)
        while ok(x + 1):
            x += 1
        while not ok(x):
            x -= 1
    else:
        # predicate x >= -t - sqrt(r), monotone increasing in x
        def ok(x):
            s = x + t
            return s >= 0 or s * s <= r

        x = math.ceil(-ft - fr)
        while ok(x - 1):
            x -= 1
        while not ok(x):
            x += 1
    return x


def _enumerate_shifted(d, mu, shift, bound: Fraction) -> Iterator[tuple[int, ...]]:
    """Yield all x in Z^n with Q(x + shift) <= bound, where
    Q(y) = sum_i d[i] (y_i + sum_{j>i} mu[i][j] y_j)^2."""
    n = len(d)
    if bound < 0:
        return
    x = [0] * n

    def rec(i: int, remaining: Fraction) -> Iterator[tuple[int, ...]]:
        if i < 0:
            yield tuple(x)
            return
        # center for level i given choices x[i+1:]
        t = shift[i] + sum(mu[i][j] * (x[j] + shift[j]) for j in range(i + 1, n))
        r = remaining / d[i]
        if r < 0:
            return
        lo = _floor_sqrt_bound(t, r, upper=False)
        hi = _floor_sqrt_bound(t, r, upper=True)
        for v in range(lo, hi + 1):
            x[i] = v
            term = d[i] * (v + t) * (v + t)
            yield from rec(i - 1, remaining - term)
        x[i] = 0

    yield from rec(n - 1, Fraction(bound))


def _quadratic_lattice_points(
    gram_pd, shift, bound: Fraction, mode: str
) -> list[tuple[Fraction, ...]]:
    """All v = x + shift (x integer) with v*gram_pd*v^T (<=, <, ==) bound.

    gram_pd must be positive definite.  Returns the v themselves, sorted.
    """
    rows = [list(map(Fraction, r)) for r in (gram_pd.rows if isinstance(gram_pd, RatMatrix) else gram_pd)]
    n = len(rows)
    shift = [Fraction(e) for e in shift]
    u, reduced = lll_reduce(rows)
    # x = z*U, so Q(x + s) = (z + s*U^{-1}) * (U G U^T) * ...
    uinv = rat_inverse(u)
    s2 = vec_mat(shift, uinv)
    d, mu = ldl(reduced)
    out = []
    for z in _enumerate_shifted(d, mu, s2, Fraction(bound)):
        y = [zz + ss for zz, ss in zip(z, s2)]
        q = gram_pair(y, y, reduced)
        if mode == "eq" and q != bound:
            continue
        if mode == "lt" and q >= bound:
            continue
        if mode == "le" and q > bound:
            continue
        v = vec_mat(y, u)  # = x + shift in original coordinates
        out.append(tuple(v))
    out.sort()
    return out


def vectors_with_norm(gram, offset, norm, mode: str = "equal"):
    """Vectors v in offset + Z^k (coords of a negative definite Gram) with
    <v,v> == norm, or <v,v> > norm for mode="greater"."""
    rows = [list(map(Fraction, r)) for r in (gram.rows if isinstance(gram, RatMatrix) else gram)]
    n = len(rows)
    if any(rows[i][i] >= 0 for i in range(n)):
        raise NotDefinite("negative definite Gram required")
    neg = [[-e for e in row] for row in rows]
    target = -Fraction(norm)
    if mode == "equal":
        return _quadratic_lattice_points(neg, offset, target, "eq")
    if mode == "greater":
        return _quadratic_lattice_points(neg, offset, target, "lt")
    raise ValueError("mode must be 'equal' or 'greater'")


@dataclass(frozen=True)
class SliceQuery:
    """Slice of a hyperbolic lattice: vectors v in offset + Z^k with
    <v, pivot> = a and <v, v> = n.  The pivot must have positive norm,
    which makes the slice finite."""

    gram: tuple
    pivot: tuple
    a: Fraction
    n: Fraction
    offset: tuple = None

    def __post_init__(self):
        g = RatMatrix(self.gram)
        object.__setattr__(self, "gram", g.rows)
        piv = tuple(Fraction(e) for e in self.pivot)
        object.__setattr__(self, "pivot", piv)
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "n", Fraction(self.n))
        off = self.offset
        if off is None:
            off = (Fraction(0),) * len(piv)
        object.__setattr__(self, "offset", tuple(Fraction(e) for e in off))
        if gram_pair(piv, piv, self.gram) <= 0:
            raise ConeViolation("slice pivot must have positive norm")


def _coset_with_norm(gram, constraints, values, norm, extra_offset=None):
    """Vectors v = offset + x, x in Z^k, with v*gram*c_i^T = values[i] for the
    given integer constraint vectors c_i and <v,v> = norm.  Returns sorted
    exact coordinate tuples.  gram restricted to the joint kernel must be
    negative definite."""
    g = [list(map(Fraction, r)) for r in (gram.rows if isinstance(gram, RatMatrix) else gram)]
    k = len(g)
    offset = [Fraction(0)] * k if extra_offset is None else [Fraction(e) for e in extra_offset]

    # linear condition on x: x * (G c^T) = value - <offset, c>
    cols = []
    rhs = []
    for c, val in zip(constraints, values):
        col = vec_mat([Fraction(e) for e in c], g)
        adj = Fraction(val) - sum(o * e for o, e in zip(offset, col))
        cols.append(col)
        rhs.append(adj)
    # scale each condition to integers
    mat = []
    tgt = []
    for col, val in zip(cols, rhs):
        den = 1
        for e in col + [val]:
            den = den * e.denominator // math.gcd(den, e.denominator)
        mat.append([int(e * den) for e in col])
        tgt.append(val * den)
        if tgt[-1].denominator != 1:
            return []
    mat_t = [list(r) for r in zip(*mat)]  # k x m
    x0 = solve_int_row(mat_t, [int(t) for t in tgt])
    if x0 is None:
        return []
    kern = kernel_basis_int(mat_t)
    base = [o + x for o, x in zip(offset, x0)]
    if not kern:
        q = gram_pair(base, base, g)
        return [tuple(base)] if q == Fraction(norm) else []
    m = mat_mul(kern, mat_mul(g, [list(r) for r in zip(*kern)]))
    # complete the square: v = base + z*kern
    cvec = [gram_pair(base, row, g) for row in kern]
    neg_m = [[-e for e in row] for row in m]
    try:
        shift = rat_solve_row(m, cvec)
    except ZeroDivisionError:
        raise NotDefinite("degenerate restriction to constraint kernel")
    q0 = gram_pair(base, base, g)
    const = q0 - gram_pair(shift, shift, m)
    target = -(Fraction(norm) - const)
    if any(neg_m[i][i] <= 0 for i in range(len(neg_m))):
        raise NotDefinite("restriction to constraint kernel is not negative definite")
    sols = _quadratic_lattice_points(neg_m, shift, target, "eq")
    out = []
    for z in sols:
        zint = [zz - ss for zz, ss in zip(z, shift)]
        v = [b + sum(zint[i] * kern[i][j] for i in range(len(kern))) for j, b in enumerate(base)]
        out.append(tuple(v))
    out.sort()
    return out


def affine_slice(query: SliceQuery):
    """Enumerate the slice described by a SliceQuery."""
    return _coset_with_norm(
        query.gram, [query.pivot], [query.a], query.n, extra_offset=query.offset
    )


def positive_quadratic_sublevel(a_matrix, linear, constant, level, mode: str = "leq"):
    """Integer points of an inhomogeneous positive definite quadratic
    Q(x) = x A x^T + linear . x + constant, with Q(x) <= level ("leq"),
    < level ("strict") or == level ("exact").  Sorted lexicographically."""
    a = [list(map(Fraction, r)) for r in (a_matrix.rows if isinstance(a_matrix, RatMatrix) else a_matrix)]
    n = len(a)
    b = [Fraction(e) for e in linear]
    c = Fraction(constant)
    # Q(x) = (x+s) A (x+s)^T + c - sAs^T  with  s = A^{-1} b / 2
    s = [e / 2 for e in rat_solve_row(a, b)]
    const = c - gram_pair(s, s, a)
    bound = Fraction(level) - const
    md = {"leq": "le", "strict": "lt", "exact": "eq"}[mode]
    pts = _quadratic_lattice_points(a, s, bound, md)
    out = sorted(tuple(e - ss for e, ss in zip(p, s)) for p in pts)
    assert all(all(e.denominator == 1 for e in p) for p in out)
    return [tuple(int(e) for e in p) for p in out]


def separating_roots(gram, h, m):
    """Roots v (norm -2) with <v,m> < 0 and <v,h> > 0.

    h must lie in the interior of the positive cone and m in its closure
    with <h,m> >= 0; the result is the (finite) set of root hyperplanes
    separating m from the chamber of h.  Sorted lexicographically.
    """
    g = [list(map(Fraction, r)) for r in (gram.rows if isinstance(gram, RatMatrix) else gram)]
    hh = gram_pair(h, h, g)
    mm = gram_pair(m, m, g)
    hm = gram_pair(h, m, g)
    if hh <= 0 or mm < 0:
        raise ConeViolation("need <h,h> > 0 and <m,m> >= 0")
    # m proportional to h: nothing separates
    if all(Fraction(mi) * hh == Fraction(hi) * hm for mi, hi in zip(m, h)):
        return []
    if hm <= 0:
        raise ConeViolation("h and m must lie in a common positive cone")
    det2 = hh * mm - hm * hm
    assert det2 < 0, "h, m must span a hyperbolic plane"
    # For v = v_par + v_perp with v_perp negative definite, <v,v> = -2 forces
    # (p,q) Gram(h,m)^{-1} (p,q)^T >= -2, i.e. with p > 0, |q| > 0:
    #     mm p^2 + 2 hm p |q| + hh q^2 <= lim := -2 det2,
    # whose three terms are all nonnegative, bounding the (p, q) grid.
    lim = -2 * det2
    out = []
    pmax = math.floor(lim / (2 * hm))
    if mm > 0:
        pmax = min(pmax, _isqrt_fraction(lim / mm))
    for p in range(1, pmax + 1):
        qa = 1
        while mm * p * p + 2 * hm * p * qa + hh * qa * qa <= lim:
            for v in _coset_with_norm(g, [h, m], [p, -qa], -2):
                assert all(e.denominator == 1 for e in v)
                out.append(tuple(int(e) for e in v))
            qa += 1
    out.sort()
    return out


def _isqrt_fraction(x: Fraction) -> int:
    """floor(sqrt(x)) for a nonnegative Fraction."""
    assert x >= 0
    return math.isqrt(int(x))


def isotropic_with_pairing(gram, m, c):
    """Isotropic vectors v (norm 0) with <v, m> = c; m must have positive
    norm, making the set finite.  Sorted lexicographically."""
    g = [list(map(Fraction, r)) for r in (gram.rows if isinstance(gram, RatMatrix) else gram)]
    if gram_pair(m, m, g) <= 0:
        raise ConeViolation("pairing vector must have positive norm")
    sols = _coset_with_norm(g, [m], [c], 0)
    out = []
    for v in sols:
        if any(e for e in v):
            assert all(e.denominator == 1 for e in v)
            out.append(tuple(int(e) for e in v))
    return out
