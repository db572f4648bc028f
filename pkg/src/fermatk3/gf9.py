"""Arithmetic in GF(9) and GF(81), tuned for vectorized table lookups.

GF(9) = GF(3)[i] with i^2 = -1.  An element a + b*i is encoded as the
integer a + 3*b with a, b in {0, 1, 2}; code 0 is zero, codes 1..8 the
units.  The Frobenius x -> x^3 is conjugation.  The multiplicative group
is cyclic of order 8, generated by 1 + i; the squares are {1, -1, i, -i}.

GF(81) = GF(9)[s] with s^2 = 1 + i (a non-square in GF(9)).  An element
u + v*s is encoded as u + 9*v with u, v GF(9) codes.

All tables are numpy uint8 arrays so that polynomial evaluation and linear
algebra over these fields vectorize.
"""

from __future__ import annotations

import numpy as np

# ---------------------------------------------------------------------------
# GF(9)
# ---------------------------------------------------------------------------

ORDER = 9


def _code(a: int, b: int) -> int:
    return (a % 3) + 3 * (b % 3)


def _parts(c: int) -> tuple[int, int]:
    return c % 3, c // 3


def _build_gf9():
    add = np.zeros((9, 9), dtype=np.uint8)
    mul = np.zeros((9, 9), dtype=np.uint8)
    for x in range(9):
        a, b = _parts(x)
        for y in range(9):
            c, d = _parts(y)
            add[x, y] = _code(a + c, b + d)
            # (a+bi)(c+di) = (ac - bd) + (ad + bc) i
            mul[x, y] = _code(a * c - b * d, a * d + b * c)
    neg = np.array([_code(-_parts(x)[0], -_parts(x)[1]) for x in range(9)], dtype=np.uint8)
    frob = np.array([int(_pow_table(mul, x, 3)) for x in range(9)], dtype=np.uint8)
    inv = np.zeros(9, dtype=np.uint8)
    for x in range(1, 9):
        for y in range(1, 9):
            if mul[x, y] == 1:
                inv[x] = y
    return add, mul, neg, frob, inv


def _pow_table(mul, x, k):
    r = 1
    for _ in range(k):
        r = mul[r, x]
    return r


ADD, MUL, NEG, FROB, INV = _build_gf9()
SUB = ADD[:, NEG]

ZERO, ONE, TWO = 0, 1, 2
I = 3  # the square root of -1
GEN = _code(1, 1)  # 1 + i generates GF(9)^*

#: x * x^3 lands in GF(3) = {0, 1, 2}; this is the norm to GF(3).
NORM = np.array([int(MUL[x, FROB[x]]) for x in range(9)], dtype=np.uint8)

#: nonzero squares in GF(9)
SQUARES = sorted({int(MUL[x, x]) for x in range(1, 9)})


def gf9_repr(c: int) -> str:
    a, b = _parts(int(c))
    re = {0: "", 1: "1", 2: "-1"}[a]
    im = {0: "", 1: "i", 2: "-i"}[b]
    if re and im:
        return re + ("+" if b == 1 else "") + im if b == 1 else re + "-i"
    return re or im or "0"


def gf9_add(x, y):
    return ADD[x, y]


def gf9_mul(x, y):
    return MUL[x, y]


def gf9_neg(x):
    return NEG[x]


def gf9_pow(x: int, k: int) -> int:
    r = 1
    x = int(x)
    k = int(k)
    while k:
        if k & 1:
            r = int(MUL[r, x])
        x = int(MUL[x, x])
        k >>= 1
    return r


# ---------------------------------------------------------------------------
# GF(9) linear algebra (numpy uint8 matrices of codes)
# ---------------------------------------------------------------------------

def rref9(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(9).  Returns (rref, pivot columns)."""
    a = np.array(mat, dtype=np.uint8).copy()
    m, n = a.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = MUL[a[r], INV[a[r, c]]]
        rows = np.nonzero(a[:, c])[0]
        for i in rows:
            if i != r:
                a[i] = SUB[a[i], MUL[a[r], a[i, c]]]
        pivots.append(c)
        r += 1
    return a, pivots


def rank9(mat: np.ndarray) -> int:
    return len(rref9(mat)[1])


def nullspace9(mat: np.ndarray) -> np.ndarray:
    """Basis of the right nullspace {x : mat @ x = 0} over GF(9), as rows."""
    a, pivots = rref9(mat)
    m, n = a.shape
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        for r, c in enumerate(pivots):
            v[c] = NEG[a[r, f]]
        basis.append(v)
    return np.array(basis, dtype=np.uint8).reshape(len(basis), n)


def solve9(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """One solution x of mat @ x = rhs over GF(9), or None."""
    a = np.concatenate([np.array(mat, dtype=np.uint8),
                        np.array(rhs, dtype=np.uint8).reshape(-1, 1)], axis=1)
    red, pivots = rref9(a)
    n = mat.shape[1]
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.uint8)
    for r, c in enumerate(pivots):
        x[c] = red[r, n]
    return x


def mat_mul9(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over GF(9)."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for k in range(a.shape[1]):
        out = ADD[out, MUL[a[:, k][:, None], b[k][None, :]]]
    return out


def det9(mat: np.ndarray) -> int:
    """Determinant over GF(9) by elimination."""
    a = np.array(mat, dtype=np.uint8).copy()
    n = a.shape[0]
    det = 1
    for c in range(n):
        nz = np.nonzero(a[c:, c])[0]
        if nz.size == 0:
            return 0
        p = c + int(nz[0])
        if p != c:
            a[[c, p]] = a[[p, c]]
            det = int(NEG[det])
        det = int(MUL[det, a[c, c]])
        piv_inv = INV[a[c, c]]
        for i in range(c + 1, n):
            if a[i, c]:
                f = MUL[a[i, c], piv_inv]
                a[i] = SUB[a[i], MUL[a[c], f]]
    return det


# ---------------------------------------------------------------------------
# GF(81)
# ---------------------------------------------------------------------------

SIGMA = GEN  # s^2 = 1 + i


def _build_gf81():
    mul = np.zeros((81, 81), dtype=np.uint8)
    add = np.zeros((81, 81), dtype=np.uint8)
    for x in range(81):
        u1, v1 = x % 9, x // 9
        for y in range(81):
            u2, v2 = y % 9, y // 9
            add[x, y] = int(ADD[u1, u2]) + 9 * int(ADD[v1, v2])
            # (u1 + v1 s)(u2 + v2 s) = u1u2 + v1v2*sigma + (u1v2 + u2v1) s
            re = ADD[MUL[u1, u2], MUL[MUL[v1, v2], SIGMA]]
            im = ADD[MUL[u1, v2], MUL[u2, v1]]
            mul[x, y] = int(re) + 9 * int(im)
    neg = np.array([int(NEG[x % 9]) + 9 * int(NEG[x // 9]) for x in range(81)],
                   dtype=np.uint8)
    inv = np.zeros(81, dtype=np.uint8)
    for x in range(1, 81):
        if inv[x]:
            continue
        for y in range(1, 81):
            if mul[x, y] == 1:
                inv[x] = y
                inv[y] = x
                break
    frob = np.zeros(81, dtype=np.uint8)
    for x in range(81):
        frob[x] = mul[mul[x, x], x]
    return add, mul, neg, inv, frob


ADD81, MUL81, NEG81, INV81, FROB81 = _build_gf81()
SUB81 = ADD81[:, NEG81]

#: embedding of GF(9) codes into GF(81) codes (u -> u + 9*0)
EMBED9 = np.arange(9, dtype=np.uint8)


def gf81_pow(x: int, k: int) -> int:
    r = 1
    x = int(x)
    while k:
        if k & 1:
            r = int(MUL81[r, x])
        x = int(MUL81[x, x])
        k >>= 1
    return r


def in_gf9(c: int) -> bool:
    return c < 9


def gf81_repr(c: int) -> str:
    u, v = c % 9, c // 9
    if v == 0:
        return gf9_repr(u)
    s = "(%s)s" % gf9_repr(v) if v > 1 else "s"
    if u == 0:
        return s
    return "%s+%s" % (gf9_repr(u), s)


# ---------------------------------------------------------------------------
# univariate polynomials over GF(9): lists of codes, index = exponent
# ---------------------------------------------------------------------------

def poly_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_mul(p: list[int], q: list[int]) -> list[int]:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] = int(ADD[out[i + j], MUL[a, b]])
    return out


def poly_divmod(p: list[int], q: list[int]) -> tuple[list[int], list[int]]:
    q = poly_trim(list(q))
    assert q, "division by zero polynomial"
    r = list(p)
    poly_trim(r)
    quo = [0] * max(0, len(r) - len(q) + 1)
    inv_lead = int(INV[q[-1]])
    while len(r) >= len(q):
        c = int(MUL[r[-1], inv_lead])
        d = len(r) - len(q)
        quo[d] = c
        for i, b in enumerate(q):
            r[d + i] = int(SUB[r[d + i], MUL[c, b]])
        poly_trim(r)
        if not r:
            break
    return quo, r


def poly_gcd(p: list[int], q: list[int]) -> list[int]:
    a = poly_trim(list(p))
    b = poly_trim(list(q))
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    if a:
        inv = int(INV[a[-1]])
        a = [int(MUL[c, inv]) for c in a]
    return a


# ---------------------------------------------------------------------------
# binary forms over GF(9): coeff c[k] multiplies u^(d-k) v^k, fixed degree d
# ---------------------------------------------------------------------------

def bf_mul(a: list[int], b: list[int]) -> list[int]:
    """Product of binary forms of degrees len-1."""
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = int(ADD[out[i + j], MUL[x, y]])
    return out


def bf_pow(a: list[int], k: int) -> list[int]:
    out = [1]
    for _ in range(k):
        out = bf_mul(out, a)
    return out


def bf_is_zero(a: list[int]) -> bool:
    return all(c == 0 for c in a)


def bf_gcd(forms: list[list[int]]) -> list[int]:
    """Monic gcd of binary forms (all of them, ignoring identically-zero
    entries).  Returned as a coefficient list of its degree."""
    nz = [list(f) for f in forms if not bf_is_zero(f)]
    assert nz, "gcd of zero forms"
    # split off powers of v (leading zeros) and u (trailing zeros)
    vpow = min(next(i for i, c in enumerate(f) if c) for f in nz)
    upow = min(len(f) - 1 - max(i for i, c in enumerate(f) if c) for f in nz)
    g = None
    for f in nz:
        core = f[vpow : len(f) - upow if upow else len(f)]
        g = core if g is None else poly_gcd(g, core)
    # g is univariate in t = v/u of some degree e; homogenize
    g = poly_trim(list(g))
    out = [0] * vpow + g
    out += [0] * upow
    return out


def bf_div(a: list[int], g: list[int]) -> list[int]:
    """Exact division of binary forms (a = q*g), via the u,v split."""
    if bf_is_zero(a):
        return [0] * (len(a) - len(g) + 1)
    va = next(i for i, c in enumerate(a) if c)
    vg = next(i for i, c in enumerate(g) if c)
    ua = len(a) - 1 - max(i for i, c in enumerate(a) if c)
    ug = len(g) - 1 - max(i for i, c in enumerate(g) if c)
    assert va >= vg and ua >= ug, "not divisible (u/v powers)"
    core_a = a[va : len(a) - ua if ua else len(a)]
    core_g = g[vg : len(g) - ug if ug else len(g)]
    q, r = poly_divmod(core_a, core_g)
    assert not r, "not divisible"
    out = [0] * (va - vg) + q + [0] * (ua - ug)
    assert len(out) == len(a) - len(g) + 1
    return out
