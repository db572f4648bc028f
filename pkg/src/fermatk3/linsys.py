"""Polynomial geometry of the quartic surface over GF(9).

This module works in the homogeneous coordinate ring
GF(9)[w,x,y,z] / (w^4 + x^4 + y^4 + z^4) and provides:

* normal forms for ring elements (`NFPoly`): affine representatives with
  z = 1 and w-degree < 4, using w^4 = -(x^4 + y^4 + 1);
* graded pieces of linear systems |d*h - sum a_i L_i| cut out by base-line
  multiplicities (`gamma_space`, `LinSysSpace`);
* a search for effective decompositions d*h - v = sum a_i [L_i]
  (`effective_decomposition`) and the nef/polarization test;
* ADE classification of the line classes contracted by a low-degree
  polarization (`contracted_classes`) and the lattice involution determined
  by its eigenspaces (`involution_from_eigenspaces`);
* double-plane models G^2 + f(F0,F1,F2) = 0 (`double_plane_model`), with
  reduced branch sextics (`BranchSextic`) and blow-up typing of their
  singular points over GF(81) (`singular_points_of_sextic`);
* the Neron-Severi isometry induced by an explicit polynomial self-map
  (`induced_isometry_of_map`);
* Hermitian relations sum a_ij H_i H_j^3 = 0 among quartic sections and
  the change of basis that turns them into a standard quartic identity
  (`hermitian_quartic_relation`).

Scalars are GF(9) codes a + 3b for a + b*i (i^2 = -1); GF(81) codes are
u + 9v for u + v*s (s^2 = 1 + i).  Square matrices act on row vectors from
the right, matching the lattice modules.  A small Buchberger engine over
GF(9) is included so ideal-membership claims can be cross-checked against
a textbook Groebner computation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .enumeration import SliceQuery, affine_slice, isotropic_with_pairing, separating_roots
from .errors import (
    BaseLocusTooLarge,
    DegenerateSquare,
    NoDecomposition,
    NonIntegralClass,
    NonIntegralInvolution,
    NonReduced,
    NoRelation,
    NotIsometry,
    NotPolarization,
    QuarticIdentityFails,
    SingularHermitian,
    VerificationError,
)
from .exact import RatMatrix, kernel_basis_int, rank_rational, rat_inverse
from .fermat import ProjLine, line_image_data
from .gf9 import (
    ADD,
    ADD81,
    EMBED9,
    FROB,
    GEN,
    INV,
    INV81,
    MUL,
    MUL81,
    NEG,
    NEG81,
    SUB81,
    bf_gcd,
    det9,
    mat_mul9,
    nullspace9,
    poly_divmod,
    poly_gcd,
    poly_mul,
    poly_trim,
    rank9,
    rref9,
)

__all__ = [
    "NFPoly",
    "LinSysSpace",
    "gamma_monomials",
    "gamma_space",
    "effective_decomposition",
    "polarization_test",
    "RootSystemType",
    "ContractedConfiguration",
    "contracted_classes",
    "involution_from_eigenspaces",
    "BranchSextic",
    "singular_points_of_sextic",
    "double_plane_model",
    "induced_isometry_of_map",
    "hermitian_quartic_relation",
    "buchberger",
    "poly_normal_form",
]


# ---------------------------------------------------------------------------
# sparse polynomials over GF(9): dict {exponent tuple: nonzero code}
# ---------------------------------------------------------------------------


def _dict_add_term(out: dict, exps: tuple, code: int) -> None:
    c = int(ADD[out.get(exps, 0), code])
    if c:
        out[exps] = c
    else:
        out.pop(exps, None)


def dict_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for e, c in b.items():
        _dict_add_term(out, e, c)
    return out


def dict_neg(a: dict) -> dict:
    return {e: int(NEG[c]) for e, c in a.items()}


def dict_sub(a: dict, b: dict) -> dict:
    return dict_add(a, dict_neg(b))


def dict_scale(a: dict, code: int) -> dict:
    if not code:
        return {}
    return {e: int(MUL[code, c]) for e, c in a.items()}


def dict_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            _dict_add_term(out, tuple(x + y for x, y in zip(ea, eb)), int(MUL[ca, cb]))
    return out


def dict_cube(a: dict) -> dict:
    """Cube of a polynomial; the Frobenius x -> x^3 is additive in
    characteristic 3, so exponents triple and coefficients map through it."""
    return {tuple(3 * x for x in e): int(FROB[c]) for e, c in a.items()}


# ---------------------------------------------------------------------------
# monomial orders, division, Buchberger (cross-check engine)
# ---------------------------------------------------------------------------


def _drl_key(mono: tuple):
    """Sort key realizing graded reverse lexicographic order."""
    return (sum(mono), tuple(-e for e in reversed(mono)))


def _leading(f: dict) -> tuple:
    return max(f, key=_drl_key)


def _mono_divides(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def poly_normal_form(f: dict, basis: list[dict]) -> dict:
    """Remainder of f under multivariate division by basis (degrevlex)."""
    work = dict(f)
    rem: dict = {}
    lead = [(_leading(g), g) for g in basis if g]
    while work:
        m = _leading(work)
        c = work.pop(m)
        for lm, g in lead:
            if _mono_divides(lm, m):
                shift = tuple(x - y for x, y in zip(m, lm))
                factor = int(MUL[c, INV[g[lm]]])
                for eg, cg in g.items():
                    if eg == lm:
                        continue
                    _dict_add_term(
                        work,
                        tuple(x + y for x, y in zip(eg, shift)),
                        int(MUL[NEG[factor], cg]),
                    )
                break
        else:
            rem[m] = c
    return rem


def _s_poly(f: dict, g: dict) -> dict:
    lf, lg = _leading(f), _leading(g)
    lcm = tuple(max(a, b) for a, b in zip(lf, lg))
    sf = tuple(a - b for a, b in zip(lcm, lf))
    sg = tuple(a - b for a, b in zip(lcm, lg))
    cf, cg = int(INV[f[lf]]), int(INV[g[lg]])
    out: dict = {}
    for e, c in f.items():
        _dict_add_term(out, tuple(x + y for x, y in zip(e, sf)), int(MUL[cf, c]))
    for e, c in g.items():
        _dict_add_term(out, tuple(x + y for x, y in zip(e, sg)), int(MUL[NEG[cg], c]))
    return out


def buchberger(gens: list[dict]) -> list[dict]:
    """Reduced Groebner basis (degrevlex, monic) of the ideal generated by
    gens.  Pair selection is by lowest degree of the monomial lcm ("sugar"),
    and pairs with coprime leading monomials are skipped.  Intended for
    small cross-checks, not production-size ideals."""
    basis = [g for g in gens if g]
    pairs = {(i, j) for i in range(len(basis)) for j in range(i)}
    while pairs:
        i, j = min(
            pairs,
            key=lambda p: _drl_key(
                tuple(
                    max(a, b)
                    for a, b in zip(_leading(basis[p[0]]), _leading(basis[p[1]]))
                )
            ),
        )
        pairs.discard((i, j))
        li, lj = _leading(basis[i]), _leading(basis[j])
        if all(min(a, b) == 0 for a, b in zip(li, lj)):
            continue
        r = poly_normal_form(_s_poly(basis[i], basis[j]), basis)
        if r:
            basis.append(r)
            k = len(basis) - 1
            pairs.update((k, t) for t in range(k))
    # autoreduce to the canonical reduced basis
    reduced = []
    for i, g in enumerate(basis):
        others = basis[:i] + basis[i + 1 :]
        r = poly_normal_form(g, others)
        if r:
            reduced.append(dict_scale(r, int(INV[r[_leading(r)]])))
    reduced.sort(key=lambda g: _drl_key(_leading(g)))
    return reduced


# ---------------------------------------------------------------------------
# normal forms in GF(9)[w,x,y,z] / (w^4 + x^4 + y^4 + z^4), z = 1
# ---------------------------------------------------------------------------


def _reduce_w(coeffs: dict) -> dict:
    """Rewrite w-exponents below 4 using w^4 = 2(x^4 + y^4 + 1)."""
    out: dict = {}
    stack = list(coeffs.items())
    while stack:
        (a, b, c), code = stack.pop()
        if not code:
            continue
        if a < 4:
            _dict_add_term(out, (a, b, c), code)
            continue
        d = int(MUL[2, code])
        stack.append(((a - 4, b + 4, c), d))
        stack.append(((a - 4, b, c + 4), d))
        stack.append(((a - 4, b, c), d))
    return out


class NFPoly:
    """Normal form of a coordinate-ring element: an affine polynomial in
    (w, x, y) with z = 1 and all w-exponents below 4.  Together with a
    homogeneity degree d this determines a unique degree-d representative.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        acc: dict = {}
        if coeffs:
            for e, c in coeffs.items():
                if len(e) != 3 or any(x < 0 for x in e):
                    raise ValueError("exponents must be nonnegative triples")
                _dict_add_term(acc, tuple(int(x) for x in e), int(c))
        self.coeffs = _reduce_w(acc)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def __eq__(self, other) -> bool:
        return isinstance(other, NFPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __add__(self, other: "NFPoly") -> "NFPoly":
        return NFPoly(dict_add(self.coeffs, other.coeffs))

    def __sub__(self, other: "NFPoly") -> "NFPoly":
        return NFPoly(dict_sub(self.coeffs, other.coeffs))

    def __mul__(self, other: "NFPoly") -> "NFPoly":
        return NFPoly(dict_mul(self.coeffs, other.coeffs))

    def scale(self, code: int) -> "NFPoly":
        return NFPoly(dict_scale(self.coeffs, code))

    def cube(self) -> "NFPoly":
        return NFPoly(dict_cube(self.coeffs))

    def __pow__(self, k: int) -> "NFPoly":
        if k < 0:
            raise ValueError("negative power")
        result = NFPoly({(0, 0, 0): 1})
        base = self
        while k:
            for _ in range(k % 3):
                result = result * base
            base = base.cube()
            k //= 3
        return result

    def __repr__(self) -> str:
        return "NFPoly(%d terms, degree %d)" % (len(self.coeffs), self.degree())


# ---------------------------------------------------------------------------
# graded pieces Gamma(d) and linear systems with base-line multiplicities
# ---------------------------------------------------------------------------


def gamma_monomials(degree: int) -> list[tuple[int, int, int, int]]:
    """Monomial basis of the degree-d graded piece of the coordinate ring:
    w^a x^b y^c z^e with a + b + c + e = d and a <= 3 (w^4 is rewritten).
    Sorted in descending lexicographic exponent order."""
    out = []
    for a in range(min(3, degree), -1, -1):
        for b in range(degree - a, -1, -1):
            for c in range(degree - a - b, -1, -1):
                out.append((a, b, c, degree - a - b - c))
    return out


def nf_coefficient_vector(p: NFPoly, degree: int, index: dict) -> np.ndarray:
    """Coefficient vector of the degree-d homogeneous representative of p
    over the gamma_monomials(degree) basis (index: monomial -> position)."""
    vec = np.zeros(len(index), dtype=np.uint8)
    for (a, b, c), code in p.coeffs.items():
        e = degree - a - b - c
        if e < 0:
            raise VerificationError(
                "normal form of degree %d does not fit in degree %d"
                % (a + b + c, degree)
            )
        vec[index[(a, b, c, e)]] = code
    return vec


def _poly_from_vector(vec: np.ndarray, monomials: list) -> NFPoly:
    coeffs = {}
    for pos, code in enumerate(vec):
        if code:
            a, b, c, _ = monomials[pos]
            coeffs[(a, b, c)] = int(code)
    return NFPoly(coeffs)


def _mat_inv9(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    aug = np.hstack([mat, np.eye(n, dtype=np.uint8)])
    red, pivots = rref9(aug)
    if list(pivots) != list(range(n)):
        raise VerificationError("matrix over GF(9) is singular")
    return red[:, n:].copy()


def _adapted_change(line: ProjLine) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate change adapted to a line: a matrix C whose first two rows
    are linear forms vanishing on the line (so the line becomes u = v = 0)
    and whose last two rows are standard coordinates completing a basis.
    Returns (C, C^-1)."""
    span = np.array(line.rows, dtype=np.uint8)
    duals = nullspace9(span)
    assert duals.shape == (2, 4)
    rows = [duals[0], duals[1]]
    for j in range(4):
        cand = np.zeros(4, dtype=np.uint8)
        cand[j] = 1
        if rank9(np.vstack(rows + [cand])) == len(rows) + 1:
            rows.append(cand)
            if len(rows) == 4:
                break
    c_mat = np.vstack(rows)
    return c_mat, _mat_inv9(c_mat)


def _adapted_quartic(inv_change: np.ndarray) -> dict:
    """The Fermat quartic w^4 + x^4 + y^4 + z^4 written in adapted
    coordinates n = C x, i.e. substituted with x_i = sum_j C^-1[i,j] n_j."""
    phi: dict = {}
    basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    for i in range(4):
        lin = {basis[j]: int(inv_change[i, j]) for j in range(4) if inv_change[i, j]}
        phi = dict_add(phi, dict_mul(dict_cube(lin), lin))
    return phi


def _w_monomials(degree: int, nu: int) -> list[tuple[int, int, int, int]]:
    """Adapted monomials of total degree d whose (u, v)-degree is below nu;
    these index the quotient where vanishing to order nu is tested."""
    out = []
    for uv in range(min(nu - 1, degree), -1, -1):
        for m0 in range(uv, -1, -1):
            m1 = uv - m0
            for m2 in range(degree - uv, -1, -1):
                out.append((m0, m1, m2, degree - uv - m2))
    out.sort(reverse=True)
    return out


def _expansion_matrix(inv_change: np.ndarray, degree: int, nu: int):
    """Truncated expansions of the original monomial basis in adapted
    coordinates.

    Returns (monomials, w_monomials, E) where E[r, c] is the coefficient of
    adapted monomial w_monomials[c] in the expansion of gamma monomial
    monomials[r], truncated to (u, v)-degree below nu.  Built degree by
    degree: each monomial is a parent monomial times one variable, and
    multiplying a truncated expansion by a linear form is four coefficient
    shifts."""
    units = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    mons_prev = [(0, 0, 0, 0)]
    idx_prev = {(0, 0, 0, 0): 0}
    w_prev = [(0, 0, 0, 0)]
    e_prev = np.ones((1, 1), dtype=np.uint8)
    if degree == 0:
        return mons_prev, w_prev, e_prev
    for level in range(1, degree + 1):
        mons = gamma_monomials(level)
        wm = _w_monomials(level, nu)
        widx = {m: i for i, m in enumerate(wm)}
        shifts = []
        for t in range(4):
            src, dst = [], []
            for i, m in enumerate(w_prev):
                target = tuple(m[k] + (k == t) for k in range(4))
                if target[0] + target[1] < nu:
                    src.append(i)
                    dst.append(widx[target])
            shifts.append((np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp)))
        e_mat = np.zeros((len(mons), len(wm)), dtype=np.uint8)
        for r, mono in enumerate(mons):
            j0 = max(k for k in range(4) if mono[k] > 0)
            parent = tuple(mono[k] - (k == j0) for k in range(4))
            prow = e_prev[idx_prev[parent]]
            row = e_mat[r]
            for t in range(4):
                c = int(inv_change[j0, t])
                if not c:
                    continue
                src, dst = shifts[t]
                if src.size:
                    row[dst] = ADD[row[dst], MUL[c, prow[src]]]
        mons_prev, idx_prev, w_prev, e_prev = mons, {m: i for i, m in enumerate(mons)}, wm, e_mat
    return mons_prev, w_prev, e_prev


def _ideal_rows(phi: dict, degree: int, nu: int, widx: dict, width: int) -> np.ndarray:
    """Truncated coefficient rows of m * phi for adapted monomials m of
    degree d - 4; their span is the image of the surface ideal inside the
    truncated quotient."""
    if degree < 4:
        return np.zeros((0, width), dtype=np.uint8)
    mults = _w_monomials(degree - 4, nu)
    rows = np.zeros((len(mults), width), dtype=np.uint8)
    phi_terms = list(phi.items())
    for r, m in enumerate(mults):
        row = rows[r]
        for pe, pc in phi_terms:
            t = (m[0] + pe[0], m[1] + pe[1], m[2] + pe[2], m[3] + pe[3])
            if t[0] + t[1] < nu:
                j = widx[t]
                row[j] = ADD[row[j], pc]
    return rows


def _row_space_conditions(v_mat: np.ndarray, width: int) -> np.ndarray:
    """Linear conditions cutting out the row space of v_mat: one condition
    per non-pivot column of its reduced echelon form."""
    if v_mat.shape[0] == 0:
        return np.eye(width, dtype=np.uint8)
    red, pivots = rref9(v_mat)
    pivot_set = set(int(p) for p in pivots)
    free = [c for c in range(width) if c not in pivot_set]
    cond = np.zeros((len(free), width), dtype=np.uint8)
    for i, c in enumerate(free):
        cond[i, c] = 1
        for r, pc in enumerate(pivots):
            cond[i, pc] = NEG[red[r, c]]
    return cond


class LinSysSpace:
    """Degree-d graded piece of a linear system: all degree-d forms modulo
    the quartic that vanish to order at least mults[L] along each assigned
    line L.  The basis is in reduced echelon form over the descending
    lexicographic monomial order, so equal spaces have equal bases."""

    __slots__ = ("degree", "mults", "basis", "rows", "_index")

    def __init__(self, degree: int, mults, rows: np.ndarray):
        self.degree = int(degree)
        self.mults = tuple(sorted(mults))
        self.rows = rows
        mons = gamma_monomials(degree)
        self._index = {m: i for i, m in enumerate(mons)}
        self.basis = tuple(_poly_from_vector(r, mons) for r in rows)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coefficient_vector(self, p: NFPoly) -> np.ndarray:
        return nf_coefficient_vector(p, self.degree, self._index)

    def contains(self, p: NFPoly) -> bool:
        if p.is_zero:
            return True
        vec = self.coefficient_vector(p)
        return rank9(np.vstack([self.rows, vec])) == self.dim

    def same_space(self, other: "LinSysSpace") -> bool:
        return (
            self.degree == other.degree
            and self.rows.shape == other.rows.shape
            and bool(np.array_equal(self.rows, other.rows))
        )

    def __repr__(self) -> str:
        return "LinSysSpace(degree=%d, dim=%d, %d base lines)" % (
            self.degree,
            self.dim,
            len(self.mults),
        )


def gamma_space(degree: int, assignment) -> LinSysSpace:
    """Degree-d forms vanishing to order >= nu_L along each line L.

    assignment: iterable of (ProjLine, multiplicity) pairs; the lines must
    lie on the quartic surface.  Vanishing to order nu along a line is
    membership in (u, v)^nu + (quartic) in coordinates adapted to the line,
    which in each degree is a linear condition: the truncated expansion of
    the form must lie in the span of the truncated multiples of the
    quartic.  The result collects those conditions over all assigned lines
    and solves them exactly over GF(9)."""
    mults = {}
    for line, nu in assignment:
        nu = int(nu)
        if nu < 0:
            raise ValueError("multiplicities must be nonnegative")
        if nu:
            mults[line] = max(mults.get(line, 0), nu)
    mons = gamma_monomials(degree)
    blocks = []
    for line in sorted(mults):
        nu = mults[line]
        _, inv_change = _adapted_change(line)
        phi = _adapted_quartic(inv_change)
        if any(e[0] + e[1] == 0 for e in phi):
            raise VerificationError("assigned line does not lie on the quartic")
        lev_mons, wm, e_mat = _expansion_matrix(inv_change, degree, nu)
        assert lev_mons == mons
        widx = {m: i for i, m in enumerate(wm)}
        v_mat = _ideal_rows(phi, degree, nu, widx, len(wm))
        cond = _row_space_conditions(v_mat, len(wm))
        if cond.shape[0]:
            blocks.append(mat_mul9(cond, np.ascontiguousarray(e_mat.T)))
    if blocks:
        stacked = np.vstack(blocks)
        sol = nullspace9(stacked)
    else:
        sol = np.eye(len(mons), dtype=np.uint8)
    if sol.shape[0]:
        red, _ = rref9(sol)
        keep = [r for r in range(red.shape[0]) if red[r].any()]
        rows = red[keep]
    else:
        rows = np.zeros((0, len(mons)), dtype=np.uint8)
    return LinSysSpace(degree, mults.items(), rows)


# ---------------------------------------------------------------------------
# effective decompositions and the polarization test
# ---------------------------------------------------------------------------


def effective_decomposition(
    gram: np.ndarray,
    h0: np.ndarray,
    class_vectors: np.ndarray,
    v: np.ndarray,
    degree: int,
    max_multiplicity: int = 4,
) -> dict[int, int]:
    """Write degree*h0 - v as a nonnegative combination of the line classes.

    Depth-first search over multisets of lines, bounded by per-line
    multiplicity.  The pairing of the residual with h0 counts how many line
    summands remain.  Whenever some line pairs negatively with the
    residual, that line must occur in any effective decomposition (distinct
    lines pair nonnegatively with each other), so it is selected without
    branching; otherwise lines are tried in order of ascending pairing.
    Raises NoDecomposition if no decomposition exists within the bound."""
    gram = np.asarray(gram, dtype=np.int64)
    cv = np.asarray(class_vectors, dtype=np.int64)
    h0 = np.asarray(h0, dtype=np.int64)
    target = degree * h0 - np.asarray(v, dtype=np.int64)
    pair = cv @ gram
    budget = int(h0 @ gram @ target)
    if budget < 0:
        raise NoDecomposition("target pairs negatively with the ample class")
    counts: dict[int, int] = {}
    failed: set[tuple] = set()

    def search(residual: np.ndarray, remaining: int) -> bool:
        if remaining == 0:
            return not residual.any()
        key = (remaining, tuple(residual))
        if key in failed:
            return False
        pairings = pair @ residual
        negative = np.where(pairings < 0)[0]
        if negative.size:
            order = [int(negative[np.argmin(pairings[negative])])]
        else:
            order = [int(i) for i in np.argsort(pairings, kind="stable")]
        for i in order:
            if counts.get(i, 0) >= max_multiplicity:
                continue
            counts[i] = counts.get(i, 0) + 1
            if search(residual - cv[i], remaining - 1):
                return True
            counts[i] -= 1
            if not counts[i]:
                del counts[i]
        failed.add(key)
        return False

    if not search(target.copy(), budget):
        raise NoDecomposition(
            "no effective decomposition with multiplicities <= %d" % max_multiplicity
        )
    total = sum(a * cv[i] for i, a in counts.items())
    assert np.array_equal(total, target)
    return dict(sorted(counts.items()))


def polarization_test(gram, h0, v) -> bool:
    """True when v is a polarization class: positive norm, no norm -2 class
    separates it from the ample chamber, and no isotropic class pairs to 1
    with it (so the associated linear system has no fixed part)."""
    gram_rows = [list(map(int, r)) for r in np.asarray(gram)]
    h_list = [int(e) for e in np.asarray(h0)]
    v_list = [int(e) for e in np.asarray(v)]
    if not separating_roots(gram_rows, h_list, v_list) == []:
        return False
    return isotropic_with_pairing(gram_rows, v_list, 1) == []


# ---------------------------------------------------------------------------
# ADE typing of contracted line configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootSystemType:
    """Multiset of A_n components, e.g. 6 A1 + 4 A2."""

    counts: tuple[tuple[int, int], ...]  # ((rank, how many), ...) sorted

    @staticmethod
    def from_ranks(ranks) -> "RootSystemType":
        tally: dict[int, int] = {}
        for r in ranks:
            tally[int(r)] = tally.get(int(r), 0) + 1
        return RootSystemType(tuple(sorted(tally.items())))

    @staticmethod
    def parse(text: str) -> "RootSystemType":
        """Parse labels like '6A1+4A2' or 'A1+A2+2A3+2A4'."""
        ranks = []
        for part in text.replace(" ", "").split("+"):
            mult, _, rank = part.partition("A")
            ranks.extend([int(rank)] * (int(mult) if mult else 1))
        return RootSystemType.from_ranks(ranks)

    @property
    def rank(self) -> int:
        return sum(r * n for r, n in self.counts)

    @property
    def component_count(self) -> int:
        return sum(n for _, n in self.counts)

    def label(self) -> str:
        return "+".join(
            ("%dA%d" % (n, r)) if n > 1 else ("A%d" % r) for r, n in self.counts
        )

    def __str__(self) -> str:
        return self.label()


@dataclass(frozen=True)
class ContractedConfiguration:
    """Classes contracted by a polarization: the ADE type, the simple
    classes grouped into chains (each chain ordered along its Dynkin path),
    and all positive contracted classes."""

    root_type: RootSystemType
    chains: tuple[tuple[tuple[int, ...], ...], ...]
    positive: tuple[tuple[int, ...], ...]


def contracted_classes(gram, h0, m) -> ContractedConfiguration:
    """Norm -2 classes orthogonal to the polarization m, classified.

    Positive classes are those pairing positively with the ample class h0;
    simple ones pair to 1.  The simple classes form disjoint Dynkin paths
    (only type A occurs here), and every positive class must be a
    consecutive sum along one path."""
    gram = np.asarray(gram, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    h0 = np.asarray(h0, dtype=np.int64)
    if int(m @ gram @ m) <= 0 or not polarization_test(gram, h0, m):
        raise NotPolarization("class is not a polarization")
    gram_rows = [list(map(int, r)) for r in gram]
    sols = affine_slice(
        SliceQuery(gram=gram_rows, pivot=[int(e) for e in m], a=0, n=-2)
    )
    roots = [tuple(int(e) for e in s) for s in sols]
    degs = {r: int(np.array(r) @ gram @ h0) for r in roots}
    assert all(d != 0 for d in degs.values()), "contracted class of degree zero"
    positive = sorted(r for r in roots if degs[r] > 0)
    assert len(positive) * 2 == len(roots)
    simple = [r for r in positive if degs[r] == 1]
    n = len(simple)
    vecs = np.array(simple, dtype=np.int64)
    pairs = vecs @ gram @ vecs.T
    adj = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            p = int(pairs[i, j])
            assert p in (0, 1), "simple classes must meet in at most one point"
            if p == 1:
                adj[i].append(j)
                adj[j].append(i)
    assert all(len(v) <= 2 for v in adj.values()), "branch point: not type A"
    seen = set()
    chains = []
    for start in range(n):
        if start in seen or len(adj[start]) > 1:
            continue
        path = [start]
        seen.add(start)
        while True:
            nxt = [j for j in adj[path[-1]] if j not in seen]
            if not nxt:
                break
            path.append(nxt[0])
            seen.add(nxt[0])
        chains.append(path)
    assert len(seen) == n, "cycle among simple classes: not type A"
    oriented = []
    for path in chains:
        if simple[path[-1]] < simple[path[0]]:
            path = path[::-1]
        oriented.append(tuple(simple[i] for i in path))
    oriented.sort()
    generated = set()
    for chain in oriented:
        arr = [np.array(c, dtype=np.int64) for c in chain]
        for i in range(len(arr)):
            acc = arr[i].copy()
            generated.add(tuple(int(e) for e in acc))
            for j in range(i + 1, len(arr)):
                acc = acc + arr[j]
                generated.add(tuple(int(e) for e in acc))
    assert generated == set(positive), "positive classes not generated by chains"
    return ContractedConfiguration(
        root_type=RootSystemType.from_ranks(len(c) for c in oriented),
        chains=tuple(oriented),
        positive=tuple(positive),
    )


def involution_from_eigenspaces(gram, m, contracted: ContractedConfiguration) -> np.ndarray:
    """Lattice involution with +1 eigenspace spanned by the polarization m
    and the chain-symmetric combinations of contracted simple classes, and
    -1 eigenspace their orthogonal complement.

    For a chain gamma_1, ..., gamma_r the symmetric combinations are
    gamma_j + gamma_{r+1-j} (the middle class itself when r is odd).
    Raises NonIntegralInvolution when the resulting map does not preserve
    the lattice."""
    gram = np.asarray(gram, dtype=np.int64)
    n = gram.shape[0]
    plus_rows = [[int(e) for e in np.asarray(m)]]
    for chain in contracted.chains:
        r = len(chain)
        for j in range((r + 1) // 2):
            k = r - 1 - j
            if j == k:
                vec = np.array(chain[j], dtype=np.int64)
            else:
                vec = np.array(chain[j], dtype=np.int64) + np.array(chain[k], dtype=np.int64)
            plus_rows.append([int(e) for e in vec])
    plus = np.array(plus_rows, dtype=np.int64)
    assert rank_rational([list(r) for r in plus]) == plus.shape[0]
    minus = kernel_basis_int([list(r) for r in (gram @ plus.T)])
    assert len(minus) == n - plus.shape[0]
    p_rows = [list(map(int, r)) for r in plus] + [list(map(int, r)) for r in minus]
    signed = [list(r) for r in plus] + [[-int(e) for e in r] for r in minus]
    a_mat = rat_inverse(p_rows) * RatMatrix(signed)
    if not a_mat.is_integral():
        raise NonIntegralInvolution("eigenspace splitting is not over the lattice")
    a_int = np.array(a_mat.int_rows(), dtype=np.int64)
    if not np.array_equal(a_int @ gram @ a_int.T, gram):
        raise NotIsometry("eigenspace involution does not preserve the pairing")
    assert np.array_equal(a_int @ a_int, np.eye(n, dtype=np.int64))
    assert np.array_equal(np.asarray(m, dtype=np.int64) @ a_int, np.asarray(m, dtype=np.int64))
    for chain in contracted.chains:
        arr = [np.array(c, dtype=np.int64) for c in chain]
        for j, c in enumerate(arr):
            assert np.array_equal(c @ a_int, arr[len(arr) - 1 - j])
    return a_int


# ---------------------------------------------------------------------------
# trivariate forms over GF(9): branch sextics and reducedness
# ---------------------------------------------------------------------------


def _tri_partial(f: dict, var: int) -> dict:
    out = {}
    for e, c in f.items():
        w = e[var] % 3
        if w:
            key = tuple(x - (i == var) for i, x in enumerate(e))
            out[key] = int(MUL[w, c])
    return out


def _poly_add9(p: list, q: list) -> list:
    n = max(len(p), len(q))
    p = p + [0] * (n - len(p))
    q = q + [0] * (n - len(q))
    return poly_trim([int(ADD[a, b]) for a, b in zip(p, q)])


def _poly_neg9(p: list) -> list:
    return [int(NEG[c]) for c in p]


def _biv_from_tri(f: dict) -> tuple[int, dict]:
    """Split a homogeneous trivariate form as x0^k * g and dehomogenize g
    at x0 = 1, returning (k, bivariate dict in (x1, x2))."""
    if not f:
        return 0, {}
    k = min(e[0] for e in f)
    return k, {(e[1], e[2]): c for e, c in f.items()}


def _biv_as_lists(f: dict) -> list[list]:
    """Bivariate dict -> list indexed by x2-exponent of univariate
    coefficient lists in x1."""
    if not f:
        return []
    d2 = max(e[1] for e in f)
    out = [[] for _ in range(d2 + 1)]
    for (j, k), c in f.items():
        coef = out[k]
        while len(coef) <= j:
            coef.append(0)
        coef[j] = int(ADD[coef[j], c])
    return [poly_trim(c) for c in out]


def _biv_trim(a: list[list]) -> list[list]:
    while a and not a[-1]:
        a.pop()
    return a


def _biv_content(a: list[list]) -> list:
    g = []
    for coef in a:
        if coef:
            g = poly_gcd(g, coef) if g else list(coef)
    return g if g else []


def _biv_divide_content(a: list[list], content: list) -> list[list]:
    out = []
    for coef in a:
        if not coef:
            out.append([])
            continue
        q, r = poly_divmod(coef, content)
        assert not r
        out.append(q)
    return out


def _x2_pseudo_rem(a: list[list], b: list[list]) -> list[list]:
    """Pseudo-remainder of a by b as polynomials in x2 with coefficients in
    GF(9)[x1]; b must have positive x2-degree and nonzero leading
    coefficient."""
    db = len(b) - 1
    lead_b = b[-1]
    rem = [list(c) for c in a]
    rem = _biv_trim(rem)
    while rem and len(rem) - 1 >= db:
        dr = len(rem) - 1
        lead_r = rem[-1]
        shift = dr - db
        new = []
        for idx in range(dr):
            term = poly_mul(lead_b, rem[idx]) if rem[idx] else []
            k = idx - shift
            if 0 <= k < db and b[k]:
                term = _poly_add9(term, _poly_neg9(poly_mul(lead_r, b[k])))
            new.append(term)
        rem = _biv_trim(new)
    return rem


def _biv_gcd(fa: dict, fb: dict) -> dict:
    """Gcd of bivariate polynomials over GF(9) via a primitive polynomial
    remainder sequence in x2 (coefficients in GF(9)[x1])."""
    if not fa:
        return dict(fb)
    if not fb:
        return dict(fa)
    a = _biv_as_lists(fa)
    b = _biv_as_lists(fb)
    cont_a, cont_b = _biv_content(a), _biv_content(b)
    cont_g = poly_gcd(cont_a, cont_b)
    a = _biv_divide_content(a, cont_a)
    b = _biv_divide_content(b, cont_b)
    while True:
        if not b:
            prim = a
            break
        if len(b) == 1:
            prim = [[1]]
            break
        if len(a) < len(b):
            a, b = b, a
            continue
        r = _x2_pseudo_rem(a, b)
        if r:
            rc = _biv_content(r)
            r = _biv_divide_content(r, rc)
        a, b = b, r
    out: dict = {}
    for k, coef in enumerate(prim):
        prod = poly_mul(coef, cont_g) if coef else []
        for j, c in enumerate(prod):
            if c:
                out[(j, k)] = int(c)
    return out


def _tri_gcd_degree(f: dict, g: dict) -> int:
    """Total degree of gcd(f, g) for homogeneous trivariate forms.

    The gcd of the x0-free parts is the homogenization of the gcd of their
    dehomogenizations at x0 = 1 (dehomogenizing an x0-free homogeneous form
    preserves total degree and factorizations)."""
    if not f:
        return max(sum(e) for e in g) if g else 0
    if not g:
        return max(sum(e) for e in f)
    kf, bf_ = _biv_from_tri(f)
    kg, bg = _biv_from_tri(g)
    core = _biv_gcd(bf_, bg)
    core_deg = max((j + k for j, k in core), default=0)
    return min(kf, kg) + core_deg


def _is_reduced_trivariate(f: dict) -> bool:
    """Square-freeness over GF(9): f is square-free iff it shares no factor
    with its first-order partials, unless all partials vanish (then f is a
    cube of a lower form in characteristic 3, hence not reduced)."""
    partials = [p for v in range(3) if (p := _tri_partial(f, v))]
    if not partials:
        return False
    for p in partials:
        if _tri_gcd_degree(f, p) == 0:
            return True
    # a repeated factor must divide f and every partial; run the gcd chain
    kf, run = _biv_from_tri(f)
    kmin = kf
    for p in partials:
        kp, bp = _biv_from_tri(p)
        run = _biv_gcd(run, bp)
        kmin = min(kmin, kp)
    deg = min(kmin, kf) + max((j + k for j, k in run), default=0)
    return deg == 0


class BranchSextic:
    """Reduced homogeneous sextic over GF(9) in three variables, the branch
    curve of a double-plane model.  Construction fails with NonReduced when
    the form has a repeated factor (square-freeness is checked against the
    first-order partials, which also catches perfect cubes in
    characteristic 3)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict):
        acc: dict = {}
        for e, c in coeffs.items():
            if len(e) != 3 or sum(e) != 6 or any(x < 0 for x in e):
                raise ValueError("terms must be degree-6 exponent triples")
            _dict_add_term(acc, tuple(int(x) for x in e), int(c))
        if not acc:
            raise NonReduced("zero form")
        if not _is_reduced_trivariate(acc):
            raise NonReduced("sextic has a repeated factor")
        self.coeffs = acc

    def __eq__(self, other) -> bool:
        return isinstance(other, BranchSextic) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __call__(self, f0: NFPoly, f1: NFPoly, f2: NFPoly) -> NFPoly:
        """Substitute three ring elements for the variables."""
        pows = []
        for f in (f0, f1, f2):
            p = [NFPoly({(0, 0, 0): 1})]
            for _ in range(6):
                p.append(p[-1] * f)
            pows.append(p)
        out = NFPoly()
        for (i, j, k), c in self.coeffs.items():
            out = out + (pows[0][i] * pows[1][j] * pows[2][k]).scale(c)
        return out

    def __repr__(self) -> str:
        return "BranchSextic(%d terms)" % len(self.coeffs)


# ---------------------------------------------------------------------------
# singular points of plane sextics over GF(81) and their blow-up types
# ---------------------------------------------------------------------------


_COMB3 = np.array([[math.comb(n, k) % 3 for k in range(10)] for n in range(10)], dtype=np.uint8)


def _p2_points81() -> np.ndarray:
    """All 6643 points of the projective plane over GF(81), normalized so
    the first nonzero coordinate is 1."""
    pts = []
    for a in range(81):
        for b in range(81):
            pts.append((1, a, b))
    for a in range(81):
        pts.append((0, 1, a))
    pts.append((0, 0, 1))
    return np.array(pts, dtype=np.uint8)


def _pow81_table(max_exp: int) -> np.ndarray:
    tab = np.zeros((81, max_exp + 1), dtype=np.uint8)
    tab[:, 0] = 1
    for e in range(1, max_exp + 1):
        tab[:, e] = MUL81[np.arange(81), tab[:, e - 1]]
    return tab


def _eval_tri81(f: dict, pts: np.ndarray, pow_tab: np.ndarray) -> np.ndarray:
    vals = np.zeros(pts.shape[0], dtype=np.uint8)
    for (i, j, k), c in f.items():
        term = MUL81[pow_tab[pts[:, 0], i], pow_tab[pts[:, 1], j]]
        term = MUL81[term, pow_tab[pts[:, 2], k]]
        term = MUL81[term, EMBED9[c]]
        vals = ADD81[vals, term]
    return vals


def _local_expansion(f: dict, point: tuple) -> dict:
    """Expansion of f around a point of P^2(GF(81)) in the affine chart of
    its leading coordinate: a bivariate dict over GF(81) in the two local
    coordinates, vanishing at the origin."""
    j0 = next(i for i in range(3) if point[i])
    assert point[j0] == 1
    others = [i for i in range(3) if i != j0]
    out: dict = {}
    for exps, code in f.items():
        base = int(EMBED9[code])
        # expand code * prod (p_t + u_t)^{e_t} over the two affine slots
        terms = {(0, 0): base}
        for slot, t in enumerate(others):
            e = exps[t]
            p = int(point[t])
            expanded: dict = {}
            # (p + u)^e = sum_k C(e,k) p^(e-k) u^k
            coefs = []
            for k in range(e, -1, -1):
                coefs.append((k, int(_COMB3[e, k])))
            pk = [1]
            for _ in range(e):
                pk.append(int(MUL81[pk[-1], p]))
            for k, cb in coefs:
                if not cb:
                    continue
                scal = int(MUL81[EMBED9[cb], pk[e - k]])
                for (a, b), c in terms.items():
                    key = (a + k, b) if slot == 0 else (a, b + k)
                    prev = expanded.get(key, 0)
                    expanded[key] = int(ADD81[prev, MUL81[c, scal]])
            terms = {k: v for k, v in expanded.items() if v}
        for key, c in terms.items():
            prev = out.get(key, 0)
            val = int(ADD81[prev, c])
            if val:
                out[key] = val
            else:
                out.pop(key, None)
    return out


def _pow81(c: int, e: int) -> int:
    v = 1
    for _ in range(e):
        v = int(MUL81[v, c])
    return v


def _subst2_81(g: dict, m00: int, m01: int, m10: int, m11: int) -> dict:
    """Substitute u = m00 U + m01 V, v = m10 U + m11 V in a bivariate dict
    over GF(81)."""
    out: dict = {}
    max_e = max((max(i, j) for i, j in g), default=0)
    for (i, j), c in g.items():
        # expand (m00 U + m01 V)^i * (m10 U + m11 V)^j
        fac1 = {}
        for k in range(i + 1):
            cb = int(_COMB3[i, k])
            if not cb:
                continue
            coef = MUL81[_pow81(m00, k), _pow81(m01, i - k)]
            coef = int(MUL81[EMBED9[cb], coef])
            if coef:
                fac1[(k, i - k)] = coef
        fac2 = {}
        for k in range(j + 1):
            cb = int(_COMB3[j, k])
            if not cb:
                continue
            coef = MUL81[_pow81(m10, k), _pow81(m11, j - k)]
            coef = int(MUL81[EMBED9[cb], coef])
            if coef:
                fac2[(k, j - k)] = coef
        for (a1, b1), c1 in fac1.items():
            for (a2, b2), c2 in fac2.items():
                key = (a1 + a2, b1 + b2)
                val = int(MUL81[c, MUL81[c1, c2]])
                prev = out.get(key, 0)
                tot = int(ADD81[prev, val])
                if tot:
                    out[key] = tot
                else:
                    out.pop(key, None)
    return out


def _a_type(g: dict, depth: int = 0) -> int:
    """Blow-up index of an isolated plane curve singularity of type A_n at
    the origin: returns n (0 for a smooth point).  Raises when the point is
    not of type A (multiplicity at least 3)."""
    if depth > 24:
        raise VerificationError("blow-up recursion did not terminate")
    g = {e: c for e, c in g.items() if c}
    assert g, "curve germ is identically zero"
    mult = min(i + j for i, j in g)
    assert mult >= 1, "germ does not pass through the origin"
    if mult == 1:
        return 0
    if mult >= 3:
        raise VerificationError("singular point has multiplicity >= 3: not type A")
    qa = g.get((2, 0), 0)
    qb = g.get((1, 1), 0)
    qc = g.get((0, 2), 0)
    disc = int(SUB81[MUL81[qb, qb], MUL81[qa, qc]])
    if disc:
        return 1
    # align the double tangent direction with the second coordinate
    if qa:
        two_a = int(MUL81[EMBED9[2], qa])
        s = int(MUL81[qb, INV81[two_a]])
        g = _subst2_81(g, int(NEG81[s]), 1, 1, 0)
    # tangent cone is now c * v^2; blow up v = u * v1 and remove u^2
    blown: dict = {}
    for (i, j), c in g.items():
        assert i + j >= 2
        key = (i + j - 2, j)
        prev = blown.get(key, 0)
        tot = int(ADD81[prev, c])
        if tot:
            blown[key] = tot
        else:
            blown.pop(key, None)
    return 2 + _a_type(blown, depth + 1)


def singular_points_of_sextic(sextic: BranchSextic) -> tuple:
    """Singular points of the branch sextic over GF(81), each with its
    blow-up type.  Returns a sorted tuple of (point, n) pairs where point
    is a normalized coordinate triple of GF(81) codes and the singularity
    is of type A_n.  Points of the sextic over GF(81) are scanned directly;
    since the sextic is reduced its singular locus is finite, and every
    singular point must be of type A for the scan to succeed."""
    f = sextic.coeffs
    pts = _p2_points81()
    pow_tab = _pow81_table(6)
    vals = _eval_tri81(f, pts, pow_tab)
    mask = vals == 0
    for v in range(3):
        p = _tri_partial(f, v)
        pv = _eval_tri81(p, pts, pow_tab) if p else np.zeros(pts.shape[0], dtype=np.uint8)
        mask &= pv == 0
    out = []
    for idx in np.where(mask)[0]:
        point = tuple(int(c) for c in pts[idx])
        germ = _local_expansion(f, point)
        n = _a_type(germ)
        assert n >= 1
        out.append((point, n))
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# double-plane models
# ---------------------------------------------------------------------------


def _monomials3(degree: int) -> list[tuple[int, int, int]]:
    out = []
    for i in range(degree, -1, -1):
        for j in range(degree - i, -1, -1):
            out.append((i, j, degree - i - j))
    return out


def double_plane_model(
    components,
    triple_space: LinSysSpace,
    six_space: LinSysSpace,
) -> tuple[NFPoly, BranchSextic]:
    """Complete a degree-2 map (F0, F1, F2) to a double-plane model.

    The cubic monomials in the components span a 10-dimensional subspace of
    the 11-dimensional triple space; G is the first reduced-echelon basis
    vector of the triple space outside that span.  The 39 weighted-degree-6
    products (28 sextic monomials in F, 10 cubic monomials times G, and
    G^2) satisfy a linear relation inside the 38-dimensional six space;
    normalizing the G^2 coefficient and completing the square yields
    Gbar^2 + f(F0, F1, F2) = 0 with f a reduced sextic, the branch curve.
    Raises NoRelation / DegenerateSquare / NonReduced when any step
    degenerates."""
    f0, f1, f2 = components
    for f in (f0, f1, f2):
        assert isinstance(f, NFPoly) and not f.is_zero
    assert triple_space.dim == 11, "triple system must have dimension 11"
    assert six_space.dim == 38, "six-fold system must have dimension 38"
    pow_cache = []
    for f in (f0, f1, f2):
        p = [NFPoly({(0, 0, 0): 1})]
        for _ in range(6):
            p.append(p[-1] * f)
        pow_cache.append(p)

    def f_monomial(exps: tuple) -> NFPoly:
        i, j, k = exps
        return pow_cache[0][i] * pow_cache[1][j] * pow_cache[2][k]

    cubic_monos = _monomials3(3)
    cubic_vecs = np.vstack(
        [triple_space.coefficient_vector(f_monomial(e)) for e in cubic_monos]
    )
    for row in cubic_vecs:
        assert rank9(np.vstack([triple_space.rows, row])) == triple_space.dim
    if rank9(cubic_vecs) != 10:
        raise NoRelation("cubic monomials in the components are degenerate")
    g_poly = None
    for row in triple_space.rows:
        if rank9(np.vstack([cubic_vecs, row])) == 11:
            g_poly = _poly_from_vector(row, gamma_monomials(triple_space.degree))
            break
    assert g_poly is not None
    sextic_monos = _monomials3(6)
    prod_polys = [f_monomial(e) for e in sextic_monos]
    prod_polys += [g_poly * f_monomial(e) for e in cubic_monos]
    prod_polys.append(g_poly * g_poly)
    vecs = np.vstack([six_space.coefficient_vector(p) for p in prod_polys])
    for row in vecs:
        assert rank9(np.vstack([six_space.rows, row])) == six_space.dim
    rel = nullspace9(np.ascontiguousarray(vecs.T))
    if rel.shape[0] == 0:
        raise NoRelation("no linear relation among the weighted-degree-6 products")
    assert rel.shape[0] == 1, "relation among products is not unique"
    rel = rel[0]
    lead = int(rel[38])
    if not lead:
        raise DegenerateSquare("relation does not involve the square term")
    rel = MUL[INV[lead], rel]
    r_sym = {sextic_monos[t]: int(rel[t]) for t in range(28) if rel[t]}
    q_sym = {cubic_monos[t]: int(rel[28 + t]) for t in range(10) if rel[28 + t]}
    # G^2 + q(F) G + r(F) = 0; with 1/2 = 2 and 1/4 = 1 in characteristic 3,
    # Gbar = G + 2 q(F) satisfies Gbar^2 + (r - q^2)(F) = 0
    f_sym = dict_sub(r_sym, dict_mul(q_sym, q_sym))
    f_sym = {e: c for e, c in f_sym.items() if c}
    q_eval = NFPoly()
    for e, c in q_sym.items():
        q_eval = q_eval + f_monomial(e).scale(c)
    g_bar = g_poly + q_eval.scale(2)
    # normalize: rescaling Gbar by c rescales the sextic by c^2; choose the
    # scalar making the sextic's lex-leading coefficient smallest (monic
    # whenever its inverse is a square), breaking ties by smaller c
    lead_mono = next(m for m in sextic_monos if m in f_sym)
    best = None
    for c in range(1, 9):
        code = int(MUL[MUL[c, c], f_sym[lead_mono]])
        if best is None or (code, c) < best:
            best = (code, c)
    c_norm = best[1]
    g_bar = g_bar.scale(c_norm)
    f_sym = dict_scale(f_sym, int(MUL[c_norm, c_norm]))
    sextic = BranchSextic(f_sym)
    check = g_bar * g_bar + sextic(f0, f1, f2)
    assert check.is_zero, "double-plane identity fails"
    assert triple_space.contains(g_bar)
    return g_bar, sextic


# ---------------------------------------------------------------------------
# the Neron-Severi isometry induced by a polynomial self-map
# ---------------------------------------------------------------------------


def _compose_nf(p: NFPoly, degree: int, pows: list[list[list[int]]]) -> list[int]:
    """Degree-d representative of p composed with a parametrized curve:
    pows[t][e] is the e-th power of the t-th coordinate form.  The result
    keeps its full homogeneous width (trailing zeros are honest powers of
    one of the parameters, not padding), so that binary-form gcds count
    common zeros at the boundary point of the parameter line."""
    width = (len(pows[0][1]) - 1) * degree + 1
    out = [0] * width
    for (a, b, c), code in p.coeffs.items():
        e = degree - a - b - c
        assert e >= 0
        term = [code]
        for t, exp in ((0, a), (1, b), (2, c), (3, e)):
            if exp:
                prod = pows[t][exp]
                new = [0] * (len(term) + len(prod) - 1)
                for i, u in enumerate(term):
                    if not u:
                        continue
                    for j, v in enumerate(prod):
                        if v:
                            new[i + j] = int(ADD[new[i + j], MUL[u, v]])
                term = new
        for i, u in enumerate(term):
            if u:
                out[i] = int(ADD[out[i], u])
    return out


def _ideal_generator_forms(line: ProjLine, gen_degree: int = 2) -> list[NFPoly]:
    """Basis of the degree-d part of the saturated ideal of a line on the
    surface.  For d = 2 the class 2h - L is base-point free, so these
    quadric sections generate the ideal sheaf of the line everywhere and
    pull back along any parametrized curve to the honest intersection
    ideal (a pencil of planes through the line has excess zeros where the
    planes meet the tangent plane of the surface doubly)."""
    return list(gamma_space(gen_degree, [(line, 1)]).basis)


def induced_isometry_of_map(
    components,
    lines,
    class_vectors: np.ndarray,
    gram: np.ndarray,
) -> np.ndarray:
    """Isometry of the Neron-Severi lattice induced by a polynomial
    self-map of the quartic surface.

    components: four NFPoly of a common homogeneous degree whose fourth
    powers sum to zero in the coordinate ring (else QuarticIdentityFails).
    For each of the 112 lines not in the base locus, the image curve is
    parametrized by restricting the components (faithfully: the map is
    injective on the surface, so each restriction is birational onto its
    image).  Its intersection number with a line L is the degree of the
    gcd of the pullbacks of the degree-2 generators of the saturated ideal
    of L, which generate the ideal sheaf of L everywhere because 2h - L is
    base-point free.  The image classes are solved exactly from these
    intersection numbers and assembled into a matrix, which must be an
    isometry of the lattice.  Raises BaseLocusTooLarge when fewer than 22
    independent line classes have computable images."""
    comps = list(components)
    assert len(comps) == 4
    total = NFPoly()
    for h in comps:
        total = total + h ** 4
    if not total.is_zero:
        raise QuarticIdentityFails("the fourth powers of the components do not sum to zero")
    gram = np.asarray(gram, dtype=np.int64)
    cv = np.asarray(class_vectors, dtype=np.int64)
    n_lines = len(lines)
    generators = [_ideal_generator_forms(ln) for ln in lines]
    pair_mat = cv @ gram  # row i = pairings of class i with the coordinate basis
    # choose 22 independent rows of cv @ gram once, for solving classes
    sel: list[int] = []
    for i in range(n_lines):
        cand = [list(map(int, pair_mat[j])) for j in sel + [i]]
        if rank_rational(cand) == len(sel) + 1:
            sel.append(i)
        if len(sel) == 22:
            break
    assert len(sel) == 22
    msel_inv = rat_inverse([list(map(int, pair_mat[j])) for j in sel])
    comp_dicts = [h.coeffs for h in comps]
    usable: list[tuple[int, np.ndarray]] = []
    for i, line in enumerate(lines):
        kind, val = line_image_data(comp_dicts, line)
        if kind == "base":
            continue
        if kind == "point":
            raise VerificationError("map contracts a line: not an automorphism")
        forms = val
        img_deg = len(forms[0]) - 1
        # powers of each coordinate form up to degree 2 (quadric generators)
        pows = []
        for f in forms:
            sq = [0] * (2 * img_deg + 1)
            for a in range(len(f)):
                if not f[a]:
                    continue
                for b in range(len(f)):
                    if f[b]:
                        sq[a + b] = int(ADD[sq[a + b], MUL[f[a], f[b]]])
            pows.append([[1], list(f), sq])
        numbers = []
        match = None
        for j in range(n_lines):
            composed = [_compose_nf(q, 2, pows) for q in generators[j]]
            nonzero = [c for c in composed if any(c)]
            if not nonzero:
                match = j  # image curve lies on every generator: it is line j
                break
            numbers.append(len(bf_gcd(nonzero)) - 1)
        if match is not None:
            usable.append((i, cv[match].copy()))
            continue
        rhs = [numbers[j] for j in sel]
        sol = RatMatrix([rhs]) * msel_inv.transpose()
        if not sol.is_integral():
            raise NonIntegralClass("image class is not integral")
        cls = np.array(sol.int_rows()[0], dtype=np.int64)
        full = pair_mat @ cls
        if not all(int(full[j]) == numbers[j] for j in range(n_lines)):
            raise NonIntegralClass("intersection numbers are inconsistent")
        usable.append((i, cls))
    if rank_rational([list(map(int, cv[i])) for i, _ in usable]) < 22:
        raise BaseLocusTooLarge(
            "fewer than 22 independent lines outside the base locus"
        )
    idx = []
    for i, _ in usable:
        cand = [list(map(int, cv[j])) for j in idx + [i]]
        if rank_rational(cand) == len(idx) + 1:
            idx.append(i)
        if len(idx) == 22:
            break
    images = {i: c for i, c in usable}
    a_mat = rat_inverse([list(map(int, cv[i])) for i in idx]) * RatMatrix(
        [list(map(int, images[i])) for i in idx]
    )
    if not a_mat.is_integral():
        raise NonIntegralClass("induced map is not defined over the lattice")
    a_int = np.array(a_mat.int_rows(), dtype=np.int64)
    for i, c in usable:
        assert np.array_equal(cv[i] @ a_int, c), "image classes are inconsistent"
    if not np.array_equal(a_int @ gram @ a_int.T, gram):
        raise NotIsometry("induced map does not preserve the pairing")
    return a_int


# ---------------------------------------------------------------------------
# Hermitian relations among quartic sections
# ---------------------------------------------------------------------------


def _herm_pair(x: np.ndarray, a_mat: np.ndarray, y: np.ndarray) -> int:
    """Sesquilinear pairing x A y^(3)t over GF(9)."""
    acc = 0
    for i in range(4):
        if not x[i]:
            continue
        row = 0
        for j in range(4):
            if y[j]:
                row = int(ADD[row, MUL[a_mat[i, j], FROB[y[j]]]])
        acc = int(ADD[acc, MUL[x[i], row]])
    return acc


def hermitian_quartic_relation(components) -> tuple[np.ndarray, np.ndarray, list[NFPoly]]:
    """Hermitian relation among four sections and its diagonalization.

    components: four NFPoly H_i spanning a system on which the products
    H_i * H_j^3 satisfy a unique (up to scalar) linear relation
    sum a_ij H_i H_j^3 = 0.  The coefficient matrix is scaled to be
    Hermitian (a_ji = a_ij^3); if it is singular, SingularHermitian is
    raised.  Gram-Schmidt over the Hermitian form factors it as
    A = B * t(B^(3)), and the returned components H'' = H' B satisfy
    sum (H''_i)^4 = 0.  Returns (A, B, [H''_0..H''_3])."""
    hs = list(components)
    assert len(hs) == 4
    cubes = [h.cube() for h in hs]
    products = [hs[i] * cubes[j] for i in range(4) for j in range(4)]
    monos = sorted({e for p in products for e in p.coeffs}, reverse=True)
    index = {m: i for i, m in enumerate(monos)}
    mat = np.zeros((16, len(monos)), dtype=np.uint8)
    for r, p in enumerate(products):
        for e, c in p.coeffs.items():
            mat[r, index[e]] = c
    rel = nullspace9(np.ascontiguousarray(mat.T))
    if rel.shape[0] == 0:
        raise VerificationError("no relation among the products H_i H_j^3")
    assert rel.shape[0] == 1, "relation among products is not unique"
    a_mat = rel[0].reshape(4, 4).copy()
    # scale to make the matrix Hermitian: some multiple c A has (cA)* = cA
    herm = None
    for c in range(1, 9):
        cand = MUL[c, a_mat]
        if np.array_equal(cand, FROB[cand.T]):
            herm = cand.copy()
            break
    assert herm is not None, "relation matrix admits no Hermitian scaling"
    if det9(herm) == 0:
        raise SingularHermitian("Hermitian relation matrix is singular")
    # Gram-Schmidt: find an orthonormal basis for the Hermitian form
    basis = [np.eye(4, dtype=np.uint8)[i] for i in range(4)]
    ortho: list[np.ndarray] = []
    for _ in range(4):
        found = None
        # first coordinate varies fastest, so an already-orthonormal basis
        # is consumed in order and yields B = identity
        for rev in itertools.product(range(9), repeat=len(basis)):
            coeffs = rev[::-1]
            if not any(coeffs):
                continue
            vec = np.zeros(4, dtype=np.uint8)
            for c, b in zip(coeffs, basis):
                if c:
                    vec = ADD[vec, MUL[c, b]]
            norm = _herm_pair(vec, herm, vec)
            if norm:
                found = (vec, norm)
                break
        assert found is not None, "Hermitian form is isotropic on the complement"
        vec, norm = found
        assert norm in (1, 2), "Hermitian norm must lie in the prime field"
        if norm == 2:
            vec = MUL[GEN, vec]  # GEN^4 = -1 flips the norm sign
            assert _herm_pair(vec, herm, vec) == 1
        ortho.append(vec.copy())
        projected = []
        for b in basis:
            coef = _herm_pair(b, herm, vec)
            nb = ADD[b, MUL[NEG[coef], vec]]
            projected.append(nb)
        red, _ = rref9(np.vstack(projected)) if projected else (np.zeros((0, 4), np.uint8), [])
        basis = [red[r] for r in range(red.shape[0]) if red[r].any()]
    e_mat = np.vstack(ortho)
    check = mat_mul9(mat_mul9(e_mat, herm), np.ascontiguousarray(FROB[e_mat.T]))
    assert np.array_equal(check, np.eye(4, dtype=np.uint8)), "diagonalization failed"
    b_mat = _mat_inv9(e_mat)
    refactored = mat_mul9(b_mat, np.ascontiguousarray(FROB[b_mat.T]))
    assert np.array_equal(refactored, herm), "matrix does not factor as B t(B^(3))" 
    new_comps = []
    for k in range(4):
        acc = NFPoly()
        for i in range(4):
            if b_mat[i, k]:
                acc = acc + hs[i].scale(int(b_mat[i, k]))
        new_comps.append(acc)
    total = NFPoly()
    for h in new_comps:
        total = total + h ** 4
    assert total.is_zero, "transformed components do not satisfy the quartic identity"
    return herm, b_mat, new_comps
