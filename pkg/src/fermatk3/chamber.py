"""Chamber structure of the ample cone inside a rank-26 even unimodular
overlattice.

The Neron-Severi lattice S (rank 22, signature (1,21)) and a negative
definite lattice T of rank 4 glue along their isomorphic discriminant
groups to an even unimodular lattice L of signature (1,25).  Every Weyl
vector w of L (a primitive isotropic vector whose orthogonal hyperbolic
complement is a copy of the Leech lattice) cuts out a chamber in the
positive cone of S whose walls come from the "Leech roots": norm -2
vectors r with <w,r> = 1.  This module provides

  * ``GluedLattice`` -- the S (+) T -> L gluing with its coset dictionary;
  * ``is_weyl_vector`` -- validation of a Weyl vector by constructing a
    hyperbolic splitting and checking the complement is root free;
  * ``leech_roots_restricted`` -- the Leech roots with negative-norm
    S-component, enumerated coset by coset through the glue dictionary;
  * ``bounding_walls`` / ``Chamber`` -- the test-point criterion deciding
    which candidate hyperplanes actually bound the chamber;
  * ``nonpositive_leech_roots`` -- the Leech roots pairing nonpositively
    with an interior class (used to certify the chamber contains it);
  * reflections in negative-norm vectors;
  * ``GeneratorWord`` / ``GeneratorSet`` / ``DescentSystem`` -- words in a
    fixed generating set, the greedy descent that moves any nef class into
    the chamber while recording the word, and the factorization of an
    arbitrary cone-preserving isometry of S as such a word.

Row-vector convention throughout: matrices act on the right, and a word
``(t1, t2, ...)`` evaluates to ``M(t1) @ M(t2) @ ...`` so that applying the
word to a vector means multiplying by the evaluated matrix once.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .enumeration import SliceQuery, affine_slice, positive_quadratic_sublevel, vectors_with_norm
from .errors import (
    InteriorViolation,
    NonIntegralImage,
    NotIsometry,
    NotIsotropic,
    NotNef,
    NotPrimitive,
    SiftFailure,
    ZeroTProjection,
)
from .exact import RatMatrix, gram_pair, rat_inverse, solve_int_row, vec_mat
from .groups import OrbitTable, PermGroup
from .lattice import Embedding, Lattice, orthogonal_complement, overlattice


# ---------------------------------------------------------------------------
# the glued even unimodular overlattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GluedLattice:
    """S (+) T glued to an even unimodular lattice along their discriminants.

    ``glue`` maps a discriminant class of T to the unique discriminant class
    of S it is paired with inside L/(S (+) T); a candidate u + v with
    u in S-dual and v in T-dual lies in L exactly when their classes form
    such a pair.  Vectors at this level live in S (+) T coordinates (first
    ``s.rank`` entries the S-part); ``to_big`` converts to a basis of L.
    """

    s: Lattice
    t: Lattice
    big: Lattice
    st: Lattice
    st_to_big: Embedding
    s_to_big: Embedding
    t_to_big: Embedding
    glue: dict

    @classmethod
    def build(cls, s_gram, t_gram, glue_vectors) -> "GluedLattice":
        s = Lattice(RatMatrix(s_gram))
        t = Lattice(RatMatrix(t_gram))
        ns, nt = s.rank, t.rank
        block = [[Fraction(0)] * (ns + nt) for _ in range(ns + nt)]
        for i in range(ns):
            for j in range(ns):
                block[i][j] = Fraction(s.gram[i][j])
        for i in range(nt):
            for j in range(nt):
                block[ns + i][ns + j] = Fraction(t.gram[i][j])
        st = Lattice(RatMatrix(block))
        big, st_to_big = overlattice(st, glue_vectors)
        assert abs(big.determinant) == 1, "glue does not fill the discriminant"
        assert big.is_even
        m = st_to_big.matrix
        s_rows = [[int(e) for e in m[i]] for i in range(ns)]
        t_rows = [[int(e) for e in m[ns + i]] for i in range(nt)]
        s_to_big = Embedding(s, big, RatMatrix(s_rows))
        t_to_big = Embedding(t, big, RatMatrix(t_rows))
        ds = s.discriminant_form
        dt = t.discriminant_form
        glue = {}
        seen_s = set()
        span = [[Fraction(e) for e in g] for g in glue_vectors]
        counts = [range(_class_order(g)) for g in span]
        for exps in itertools.product(*counts):
            vec = [sum(e * row[j] for e, row in zip(exps, span)) for j in range(ns + nt)]
            cs = ds.coords_of(s.dual([Fraction(x) for x in vec[:ns]]))
            ct = dt.coords_of(t.dual([Fraction(x) for x in vec[ns:]]))
            if ct in glue:
                assert glue[ct] == cs, "glue classes do not form a graph"
                continue
            assert cs not in seen_s, "glue graph is not injective"
            seen_s.add(cs)
            glue[ct] = cs
        return cls(s=s, t=t, big=big, st=st, st_to_big=st_to_big,
                   s_to_big=s_to_big, t_to_big=t_to_big, glue=glue)

    def to_big(self, v) -> tuple:
        """Convert S (+) T rational coordinates to integer L coordinates."""
        img = vec_mat([Fraction(e) for e in v], self.st_to_big.matrix)
        assert all(e.denominator == 1 for e in img), "vector is not in the overlattice"
        return tuple(int(e) for e in img)

    def split(self, v):
        """S-part and T-part of a vector in S (+) T coordinates."""
        vv = [Fraction(e) for e in v]
        return tuple(vv[: self.s.rank]), tuple(vv[self.s.rank:])


def _class_order(g) -> int:
    """Order of a glue vector's class modulo S (+) T."""
    den = 1
    for e in g:
        f = Fraction(e)
        den = den * f.denominator // math.gcd(den, f.denominator)
    return den


# ---------------------------------------------------------------------------
# Weyl vectors
# ---------------------------------------------------------------------------

def is_weyl_vector(lat: Lattice, w):
    """Whether a primitive isotropic vector of an even unimodular lattice has
    a root-free orthogonal complement, together with the isotropic witness
    w2 satisfying <w, w2> = 1 used to split off the hyperbolic plane.

    Returns (flag, w2).  Raises NotIsotropic / NotPrimitive on bad input.
    """
    w = [int(x) for x in w]
    if lat.norm(w) != 0:
        raise NotIsotropic("<w,w> = %s is nonzero" % lat.norm(w))
    if math.gcd(*w) != 1:
        raise NotPrimitive("w is divisible by %d" % math.gcd(*w))
    col = vec_mat(w, lat.gram)
    col_int = [int(e) for e in col]
    sol = solve_int_row([[c] for c in col_int], [1])
    assert sol is not None, "no vector pairs to 1 with w; lattice not unimodular?"
    n1 = lat.norm(sol)
    assert n1 % 2 == 0, "lattice is not even"
    w2 = [a - (n1 // 2) * b for a, b in zip(sol, w)]
    assert lat.norm(w2) == 0 and lat.pair(w, w2) == 1
    hyperbolic = Lattice(RatMatrix([[0, 1], [1, 0]]))
    emb = Embedding(hyperbolic, lat, RatMatrix([w, w2]))
    comp = orthogonal_complement(emb)
    assert comp.domain.rank == lat.rank - 2
    assert abs(comp.domain.determinant) == abs(lat.determinant)
    roots = vectors_with_norm(comp.domain.gram, [0] * comp.domain.rank, -2)
    return len(roots) == 0, tuple(int(x) for x in w2)


def nonpositive_leech_roots(lat: Lattice, w, witness, h):
    """All roots r with <r,r> = -2, <w,r> = 1 and <h,r> <= 0.

    ``w`` must be a Weyl vector with witness ``witness`` (from
    is_weyl_vector) and <h,w> > 0; the set is then finite because in the
    root-free complement parametrization r = lam - (1 + <lam,lam>/2) w + w2
    the pairing <h,r> is an inhomogeneous positive definite quadratic in
    lam.  Returns a list of (r, pairing) pairs; an interior class of the
    chamber of w yields exactly the roots orthogonal to it.
    """
    w = [int(x) for x in w]
    w2 = [int(x) for x in witness]
    h = [int(x) for x in h]
    a = lat.pair(h, w)
    assert a > 0, "<h,w> must be positive"
    hyperbolic = Lattice(RatMatrix([[0, 1], [1, 0]]))
    emb = Embedding(hyperbolic, lat, RatMatrix([w, w2]))
    comp = orthogonal_complement(emb)
    b = [[int(e) for e in row] for row in comp.matrix.rows]
    g = [[Fraction(e) for e in row] for row in lat.gram.rows]
    k = len(b)
    bgb = [[gram_pair(b[i], b[j], g) for j in range(k)] for i in range(k)]
    a_mat = [[-Fraction(a, 2) * bgb[i][j] for j in range(k)] for i in range(k)]
    linear = [gram_pair(h, b[i], g) for i in range(k)]
    const = lat.pair(h, w2) - a
    pts = positive_quadratic_sublevel(a_mat, linear, const, 0, mode="leq")
    out = []
    for z in pts:
        lam = [sum(z[i] * b[i][j] for i in range(k)) for j in range(len(w))]
        nl = gram_pair(lam, lam, g)
        assert nl.denominator == 1 and int(nl) % 2 == 0
        coef = 1 + int(nl) // 2
        r = [li - coef * wi + w2i for li, wi, w2i in zip(lam, w, w2)]
        assert lat.norm(r) == -2 and lat.pair(w, r) == 1
        out.append((tuple(int(x) for x in r), int(lat.pair(h, r))))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# restricted Leech roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeechRoot:
    """A root r = u + v split along S (+) T, with u the S-dual part.

    ``a`` is the pairing of u with the S-part of the Weyl vector and
    ``s_norm`` = <u,u> < 0; together they label the wall family of r.
    """

    s_part: tuple
    t_part: tuple
    a: int
    s_norm: Fraction

    def full(self) -> tuple:
        return self.s_part + self.t_part


def leech_roots_restricted(glued: GluedLattice, w) -> list:
    """Leech roots of the Weyl vector w whose S-component has negative norm.

    w is given in S (+) T coordinates and must have nonzero T-part.  The
    enumeration runs per discriminant class of T: each v in the T-dual with
    <v,v> > -2 forces the pairing a_v = 1 - <w_T, v> and norm
    n_v = -2 - <v,v> of the S-part, and the glue dictionary pins the unique
    S-dual coset in which the S-part can live.  Within that coset the
    affine slice { u : <u, w_S> = a_v, <u,u> = n_v } is finite because w_S
    has positive norm.
    """
    w = [int(x) for x in w]
    ns = glued.s.rank
    ws, wt = w[:ns], w[ns:]
    if not any(wt):
        raise ZeroTProjection("the Weyl vector has zero T-component")
    t_gram = [[int(e) for e in row] for row in glued.t.gram.rows]
    s_gram = [[int(e) for e in row] for row in glued.s.gram.rows]
    dt = glued.t.discriminant_form
    ds = glued.s.discriminant_form
    out = []
    for ct in itertools.product(*(range(o) for o in dt.orders)):
        cs = glued.glue.get(ct)
        if cs is None:
            continue
        off_t = [Fraction(e) for e in dt.lift(ct).coords]
        off_s = [Fraction(e) for e in ds.lift(cs).coords]
        for v in vectors_with_norm(t_gram, off_t, -2, mode="greater"):
            nv = gram_pair(v, v, t_gram)
            av = 1 - gram_pair(wt, v, t_gram)
            assert av.denominator == 1, "Weyl vector is not integral on T"
            nu = -2 - nv
            query = SliceQuery(gram=s_gram, pivot=ws, a=av, n=nu, offset=off_s)
            for u in affine_slice(query):
                out.append(LeechRoot(s_part=tuple(u), t_part=tuple(v),
                                     a=int(av), s_norm=nu))
    out.sort(key=lambda r: (r.a, r.s_norm, r.s_part, r.t_part))
    return out


# ---------------------------------------------------------------------------
# walls and chambers
# ---------------------------------------------------------------------------

def _scaled_rows(vectors):
    """Common denominator and integer matrix scale*v for rational rows."""
    den = 1
    rows = [[Fraction(e) for e in v] for v in vectors]
    for row in rows:
        for e in row:
            den = den * e.denominator // math.gcd(den, e.denominator)
    arr = np.array([[int(e * den) for e in row] for row in rows], dtype=np.int64)
    return den, arr


def bounding_walls(gram, candidates, interior) -> list:
    """The candidate hyperplanes that actually bound the chamber around
    ``interior``, decided by the test-point criterion.

    For each candidate r the point p = interior - (<interior,r>/<r,r>) r
    lies on the hyperplane of r; r bounds exactly when p pairs strictly
    positively with every other candidate.  Candidates are canonicalized to
    pair positively with the interior and deduplicated; a candidate whose
    hyperplane passes through the interior raises InteriorViolation.
    Returns the bounding walls as rational tuples, lexicographically sorted
    in the scaled integer coordinates.
    """
    if not candidates:
        return []
    g = np.array([[int(e) for e in row] for row in (gram.rows if isinstance(gram, RatMatrix) else gram)], dtype=np.int64)
    hvec = np.array([int(x) for x in interior], dtype=np.int64)
    den, arr = _scaled_rows(candidates)
    pair_h = arr @ g @ hvec
    if np.any(pair_h == 0):
        raise InteriorViolation("interior lies on a candidate hyperplane")
    arr[pair_h < 0] *= -1
    pair_h = np.abs(pair_h)
    uniq = {}
    for i, row in enumerate(arr):
        uniq.setdefault(tuple(int(x) for x in row), i)
    order = sorted(uniq)
    rows = np.array(order, dtype=np.int64)
    a_int = rows @ g @ hvec
    norms = np.einsum("ij,ij->i", rows @ g, rows)
    assert np.all(norms < 0), "wall candidates must have negative norm"
    pmat = np.empty_like(rows)
    for i in range(len(rows)):
        cg = math.gcd(int(a_int[i]), int(-norms[i]))
        pmat[i] = (int(-norms[i]) // cg) * hvec + (int(a_int[i]) // cg) * rows[i]
    gw = g @ rows.T
    keep = []
    block = 512
    for start in range(0, len(rows), block):
        m = pmat[start:start + block] @ gw
        for i in range(m.shape[0]):
            row = m[i]
            assert row[start + i] == 0
            ok = bool(np.all(np.delete(row, start + i) > 0))
            if ok:
                keep.append(start + i)
    return [tuple(Fraction(int(x), den) for x in rows[i]) for i in keep]


@dataclass(frozen=True)
class Chamber:
    """A chamber of the positive cone: walls, an interior point, and the
    Weyl vector that produced it (when there is one).

    ``walls`` is an integer matrix whose rows are ``scale`` times the wall
    vectors, lexicographically sorted; ``labels[i]`` is the pair
    (<interior, r_i>, <r_i, r_i>) naming the wall family.
    """

    gram: np.ndarray
    interior: np.ndarray
    walls: np.ndarray
    scale: int
    labels: tuple
    weyl: tuple = None

    def __post_init__(self):
        g, w, h = self.gram, self.walls, self.interior
        pair_h = w @ g @ h
        assert np.all(pair_h > 0), "interior must pair positively with every wall"
        norms = np.einsum("ij,ij->i", w @ g, w)
        assert np.all(norms < 0), "walls must have negative norm"
        for (a, n), ph, nn in zip(self.labels, pair_h, norms):
            assert Fraction(int(ph), self.scale) == a
            assert Fraction(int(nn), self.scale ** 2) == n

    @classmethod
    def from_walls(cls, gram, walls, interior, weyl=None) -> "Chamber":
        g = np.array([[int(e) for e in row] for row in (gram.rows if isinstance(gram, RatMatrix) else gram)], dtype=np.int64)
        h = np.array([int(x) for x in interior], dtype=np.int64)
        den, arr = _scaled_rows(walls)
        order = np.lexsort(arr.T[::-1])
        arr = arr[order]
        pair_h = arr @ g @ h
        norms = np.einsum("ij,ij->i", arr @ g, arr)
        labels = tuple(
            (Fraction(int(a), den), Fraction(int(n), den * den))
            for a, n in zip(pair_h, norms)
        )
        return cls(gram=g, interior=h, walls=arr, scale=den, labels=labels,
                   weyl=None if weyl is None else tuple(int(x) for x in weyl))

    @property
    def wall_count(self) -> int:
        return int(self.walls.shape[0])

    def label_census(self) -> dict:
        """Number of walls per (pairing, norm) family."""
        census = {}
        for lab in self.labels:
            census[lab] = census.get(lab, 0) + 1
        return census

    def violated_walls(self, v) -> np.ndarray:
        """Indices of walls pairing strictly negatively with v."""
        pv = self.walls @ self.gram @ np.asarray(v, dtype=np.int64)
        return np.nonzero(pv < 0)[0]

    def to_json(self) -> str:
        """Stable JSON dump: scale, weyl, and per-wall coordinates/labels."""
        payload = {
            "scale": self.scale,
            "weyl": None if self.weyl is None else list(self.weyl),
            "walls": [
                {
                    "scaled_coords": [int(x) for x in row],
                    "interior_pairing": [lab[0].numerator, lab[0].denominator],
                    "norm": [lab[1].numerator, lab[1].denominator],
                }
                for row, lab in zip(self.walls, self.labels)
            ],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# reflections
# ---------------------------------------------------------------------------

def reflect(gram, v, r):
    """Image of v under the reflection in the hyperplane of r.

    x maps to x - (2<x,r>/<r,r>) r; raises NonIntegralImage when v is
    integral but the image is not (the reflection then does not belong to
    the integral orthogonal group at v).
    """
    g = [[Fraction(e) for e in row] for row in (gram.rows if isinstance(gram, RatMatrix) else gram)]
    vv = [Fraction(e) for e in v]
    rr = [Fraction(e) for e in r]
    nr = gram_pair(rr, rr, g)
    assert nr != 0, "cannot reflect in an isotropic vector"
    coef = 2 * gram_pair(vv, rr, g) / nr
    img = [a - coef * b for a, b in zip(vv, rr)]
    if all(e.denominator == 1 for e in vv) and not all(e.denominator == 1 for e in img):
        raise NonIntegralImage("reflection of %s in %s is not integral" % (v, r))
    return tuple(img)


def reflection_matrix(gram, r) -> np.ndarray:
    """Matrix of the reflection in r acting on row vectors.

    Raises NonIntegralImage when some basis vector has a non-integral
    image, i.e. the reflection is not defined over the lattice.
    """
    n = len(r)
    rows = []
    for i in range(n):
        basis = [Fraction(int(i == j)) for j in range(n)]
        rows.append(reflect(gram, basis, r))
    mat = np.array([[int(e) for e in row] for row in rows], dtype=np.int64)
    g = np.array([[int(e) for e in row] for row in (gram.rows if isinstance(gram, RatMatrix) else gram)], dtype=np.int64)
    assert np.array_equal(mat @ g @ mat.T, g)
    assert np.array_equal(mat @ mat, np.eye(n, dtype=np.int64))
    return mat


# ---------------------------------------------------------------------------
# generator words
# ---------------------------------------------------------------------------

_TOKEN_NAMES = ("pgu", "g1", "g2", "frobenius", "s1")


@dataclass(frozen=True)
class Token:
    """One letter of a generator word: a named generator to the power +-1."""

    name: str
    index: int = 0
    power: int = 1

    def __post_init__(self):
        assert self.name in _TOKEN_NAMES, "unknown generator %r" % (self.name,)
        assert self.power in (1, -1)
        assert self.name == "pgu" or self.index == 0

    def inverse(self) -> "Token":
        return Token(self.name, self.index, -self.power)

    def to_json(self) -> dict:
        d = {"name": self.name, "power": self.power}
        if self.name == "pgu":
            d["index"] = self.index
        return d

    @classmethod
    def from_json(cls, d) -> "Token":
        return cls(d["name"], d.get("index", 0), d["power"])


@dataclass(frozen=True)
class GeneratorWord:
    """A word in the fixed generators; evaluates left factor first."""

    tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __mul__(self, other: "GeneratorWord") -> "GeneratorWord":
        return GeneratorWord(self.tokens + other.tokens)

    def inverse(self) -> "GeneratorWord":
        return GeneratorWord(tuple(t.inverse() for t in reversed(self.tokens)))

    def to_json(self) -> list:
        return [t.to_json() for t in self.tokens]

    @classmethod
    def from_json(cls, items) -> "GeneratorWord":
        return cls(tuple(Token.from_json(d) for d in items))


class GeneratorSet:
    """The named generator matrices with exact inverses and word evaluation.

    Every matrix must be an isometry of the given Gram matrix; inverses are
    computed exactly once and cached so that words with negative powers
    evaluate over the integers.
    """

    def __init__(self, gram, pgu, named):
        self.gram = np.array(gram, dtype=np.int64)
        self.pgu = tuple(np.array(m, dtype=np.int64) for m in pgu)
        self.named = {k: np.array(m, dtype=np.int64) for k, m in named.items()}
        assert set(self.named) == set(_TOKEN_NAMES) - {"pgu"}
        for m in list(self.pgu) + list(self.named.values()):
            assert np.array_equal(m @ self.gram @ m.T, self.gram), "generator is not an isometry"
        self._inverse = {}

    @property
    def rank(self) -> int:
        return int(self.gram.shape[0])

    def matrix(self, token: Token) -> np.ndarray:
        base = self.pgu[token.index] if token.name == "pgu" else self.named[token.name]
        if token.power == 1:
            return base
        key = (token.name, token.index)
        inv = self._inverse.get(key)
        if inv is None:
            exact = rat_inverse([[int(e) for e in row] for row in base])
            assert exact.is_integral()
            inv = np.array([[int(e) for e in row] for row in exact.rows], dtype=np.int64)
            self._inverse[key] = inv
        return inv

    def evaluate(self, word) -> np.ndarray:
        tokens = word.tokens if isinstance(word, GeneratorWord) else word
        out = np.eye(self.rank, dtype=np.int64)
        for t in tokens:
            out = out @ self.matrix(t)
        return out


# ---------------------------------------------------------------------------
# descent to the chamber and factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MoveRule:
    """How to clear a violated wall of one family.

    ``token`` names the base generator g with interior^g = interior + c * seed;
    ``orbit`` is the orbit table of the (scaled) seed under the pgu
    generators, providing the conjugating word tau with seed^tau = wall.
    """

    token: str
    orbit: OrbitTable
    step: int
    reflection: bool = False


@dataclass
class DescentSystem:
    """Chamber plus generator data needed to reduce and factor isometries.

    ``moves`` maps a wall label (pairing-with-interior, norm) to its
    MoveRule.  ``class_vectors`` are the 112 line classes (integer rows),
    ``stabilizer`` the permutation group they generate together with the
    non-projective symmetry, and ``stabilizer_tokens`` the token prototype
    of each stabilizer generator in order.
    """

    chamber: Chamber
    gens: GeneratorSet
    moves: dict
    class_vectors: np.ndarray
    class_index: dict
    stabilizer: PermGroup
    stabilizer_tokens: tuple

    def __post_init__(self):
        self._wall_gram = self.chamber.walls @ self.chamber.gram
        self._line_rows = np.array(
            [i for i, lab in enumerate(self.chamber.labels)
             if self.moves[lab].reflection],
            dtype=np.int64,
        )
        h = self.chamber.interior
        scale = self.chamber.scale
        for rule in self.moves.values():
            seed = np.array(rule.orbit.seed, dtype=np.int64)
            shift = rule.step * seed
            assert np.all(shift % scale == 0), "move step is not integral"
            m = self.gens.matrix(Token(rule.token))
            assert np.array_equal(h @ m, h + shift // scale), (
                "generator %s does not shift the interior by its seed" % rule.token
            )
        for i, lab in enumerate(self.chamber.labels):
            rule = self.moves.get(lab)
            assert rule is not None, "no move rule for wall family %s" % (lab,)
            assert tuple(int(x) for x in self.chamber.walls[i]) in rule.orbit, (
                "wall %d is outside the orbit table of its family" % i
            )

    def _move_tokens(self, wall_index: int) -> tuple:
        rule = self.moves[self.chamber.labels[wall_index]]
        row = tuple(int(x) for x in self.chamber.walls[wall_index])
        tau = tuple(Token("pgu", i) for i in rule.orbit.word_of(row))
        inv_tau = tuple(t.inverse() for t in reversed(tau))
        return inv_tau + (Token(rule.token),) + tau

    def reduce_to_chamber(self, v, allow_reflections: bool = False):
        """Greedy descent of v into the chamber.

        Returns (word, reduced) with reduced in the closed chamber and
        reduced^word = v exactly.  Each step conjugates a base move to the
        most-violated wall (ties broken lexicographically) and strictly
        decreases the pairing with the interior point; without
        allow_reflections a violated reflection-family wall (a class of an
        irreducible curve) raises NotNef since no such move exists in the
        automorphism group alone.
        """
        g = self.chamber.gram
        h = self.chamber.interior
        cur = np.array([int(x) for x in v], dtype=np.int64)
        height = int(cur @ g @ h)
        assert height > 0, "input must lie in the positive cone"
        parts = []
        for _ in range(height + 1):
            pv = self._wall_gram @ cur
            viol = np.nonzero(pv < 0)[0]
            if viol.size == 0:
                break
            if not allow_reflections and self._line_rows.size:
                bad = pv[self._line_rows] < 0
                if np.any(bad):
                    raise NotNef(
                        "class pairs negatively with an irreducible curve class %s"
                        % (tuple(self.chamber.walls[self._line_rows[int(np.argmax(bad))]]),)
                    )
            best = min(viol, key=lambda i: (int(pv[i]), tuple(int(x) for x in self.chamber.walls[i])))
            tokens = self._move_tokens(int(best))
            inverse = tuple(t.inverse() for t in reversed(tokens))
            cur = cur @ self.gens.evaluate(inverse)
            new_height = int(cur @ g @ h)
            assert 0 < new_height < height, "descent failed to decrease the height"
            height = new_height
            parts.append(tokens)
        else:
            raise AssertionError("descent did not terminate")
        word = GeneratorWord(tuple(itertools.chain.from_iterable(reversed(parts))))
        assert np.array_equal(cur @ self.gens.evaluate(word), np.array([int(x) for x in v], dtype=np.int64))
        return word, cur

    def factor(self, gamma) -> GeneratorWord:
        """Factor an isometry of the lattice preserving the positive cone
        as a word in the generators; evaluation reproduces gamma exactly.

        Descends interior^gamma back to the interior (reflection moves
        allowed), then expresses the residual interior-stabilizing isometry
        through its permutation of the line classes by sifting in the
        stabilizer permutation group.  A residual outside that group is a
        SiftFailure: it would contradict the classification the descent
        relies on, so it is surfaced loudly rather than patched over.
        """
        g = self.chamber.gram
        gamma = np.array([[int(e) for e in row] for row in gamma], dtype=np.int64)
        if not np.array_equal(gamma @ g @ gamma.T, g):
            raise NotIsometry("matrix does not preserve the intersection form")
        h = self.chamber.interior
        v = h @ gamma
        if int(v @ g @ h) <= 0:
            raise NotIsometry("matrix does not preserve the positive cone")
        word, reduced = self.reduce_to_chamber(v, allow_reflections=True)
        if not np.array_equal(reduced, h):
            raise SiftFailure("descent of the interior image did not reach the interior")
        residual = gamma @ self.gens.evaluate(word.inverse())
        assert np.array_equal(h @ residual, h)
        perm = []
        for row in self.class_vectors:
            img = self.class_index.get(tuple(int(x) for x in row @ residual))
            if img is None:
                raise SiftFailure("residual does not permute the curve classes")
            perm.append(img)
        letters = self.stabilizer.membership(perm)
        if letters is None:
            raise SiftFailure("residual permutation is outside the stabilizer group")
        res_tokens = []
        for letter in letters:
            proto = self.stabilizer_tokens[abs(letter) - 1]
            res_tokens.append(Token(proto.name, proto.index, 1 if letter > 0 else -1))
        res_word = GeneratorWord(tuple(res_tokens))
        if not np.array_equal(self.gens.evaluate(res_word), residual):
            raise SiftFailure("stabilizer word does not reproduce the residual matrix")
        out = res_word * word
        assert np.array_equal(self.gens.evaluate(out), gamma)
        return out
