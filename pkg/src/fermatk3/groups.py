"""Finite group machinery: permutation groups, matrix orbits, and isometry
groups of definite lattices.

Three layers.  PermGroup wraps a base-and-strong-generating-set computation
(delegated to sympy's Schreier-Sims) behind an interface that returns
verified factorization words over the original generators.  matrix_orbit
closes an integer row vector under right multiplication by integer matrices
while recording a transversal word for every orbit element.  The definite
layer enumerates the full isometry group of a small definite lattice by
backtracking over same-Gram vector tuples and compares its action on the
discriminant form with the brute-force automorphism group of that finite
quadratic form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy.combinatorics import Permutation, PermutationGroup

from .enumeration import vectors_with_norm
from .errors import NotDefinite, OrbitOverflow, TooLarge
from .lattice import DiscriminantForm, Lattice


# ---------------------------------------------------------------------------
# permutation groups
# ---------------------------------------------------------------------------

def _apply_word(word, gens, degree):
    """Permutation obtained by applying word[0] first, then word[1], ...
    Letters are signed 1-based generator indices (negative = inverse)."""
    cur = list(range(degree))
    for w in word:
        g = gens[abs(w) - 1]
        if w > 0:
            cur = [g[x] for x in cur]
        else:
            inv = [0] * degree
            for i, x in enumerate(g):
                inv[x] = i
            cur = [inv[x] for x in cur]
    return tuple(cur)


class PermGroup:
    """Permutation group with exact order, orbits and factorization words.

    Permutations are sequences mapping position to image; composition in
    words applies earlier letters first, matching the right action of
    matrix products on row vectors.
    """

    def __init__(self, generators):
        gens = [tuple(int(x) for x in g) for g in generators]
        assert gens, "a permutation group needs at least one generator"
        n = len(gens[0])
        for g in gens:
            assert sorted(g) == list(range(n)), "not a permutation"
        self.degree = n
        self.generators = gens
        self._sym = [Permutation(list(g)) for g in gens]
        self._group = PermutationGroup(self._sym)
        self._letter = {}
        for i, g in enumerate(self._sym):
            self._letter.setdefault(self._key(g), i + 1)
            self._letter.setdefault(self._key(g ** -1), -(i + 1))

    def _key(self, p: Permutation) -> tuple:
        a = p.array_form
        return tuple(a + list(range(len(a), self.degree)))

    @property
    def order(self) -> int:
        return int(self._group.order())

    def is_transitive(self) -> bool:
        return bool(self._group.is_transitive())

    def orbit(self, point: int) -> set:
        return {int(x) for x in self._group.orbit(point)}

    def stabilizer_order(self, point: int) -> int:
        return int(self._group.stabilizer(point).order())

    def contains(self, perm) -> bool:
        return self.membership(perm) is not None

    def membership(self, perm):
        """Factorization word for perm (None when not a member).

        The word is a tuple of signed 1-based generator indices; applying
        its letters left to right reconstructs perm exactly (verified).
        """
        p = tuple(int(x) for x in perm)
        assert len(p) == self.degree
        sp = Permutation(list(p))
        if not self._group.contains(sp):
            return None
        factors = self._group.generator_product(sp, original=True)
        word = []
        for f in reversed(factors):
            letter = self._letter.get(self._key(f))
            assert letter is not None, "factor outside the generator alphabet"
            word.append(letter)
        word = tuple(word)
        assert _apply_word(word, self.generators, self.degree) == p
        return word


def schreier_sims(generators) -> PermGroup:
    """Permutation group with a verified base and strong generating set."""
    return PermGroup(generators)


# ---------------------------------------------------------------------------
# orbits of matrix actions
# ---------------------------------------------------------------------------

@dataclass
class OrbitTable:
    """Orbit of an integer row vector under right matrix action, with a
    Schreier tree: every element stores (parent, generator index)."""

    seed: tuple
    elements: list
    parent: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, vec) -> bool:
        return tuple(int(x) for x in vec) in self.parent

    def word_of(self, vec) -> tuple:
        """Generator indices whose matrices, applied left to right to the
        seed, give vec."""
        key = tuple(int(x) for x in vec)
        out = []
        while True:
            step = self.parent[key]
            if step is None:
                break
            key, gi = step[0], step[1]
            out.append(gi)
        return tuple(reversed(out))


def matrix_orbit(seed, gens, expected: int | None = None, bound: int | None = None) -> OrbitTable:
    """Breadth-first closure of seed under right multiplication by gens.

    bound defaults to 10x the expected size so a wrong seed or a wrong glue
    fails fast instead of exhausting memory.  Raises OrbitOverflow when the
    orbit exceeds the bound.
    """
    mats = [np.asarray(g, dtype=np.int64) for g in gens]
    s = tuple(int(x) for x in seed)
    if bound is None:
        bound = 10 * expected if expected else 10_000_000
    elements = [s]
    parent = {s: None}
    frontier = [s]
    while frontier:
        block = np.array(frontier, dtype=np.int64)
        new = []
        for gi, m in enumerate(mats):
            images = block @ m
            for src, row in zip(frontier, images):
                key = tuple(int(x) for x in row)
                if key not in parent:
                    if len(elements) >= bound:
                        raise OrbitOverflow(
                            "orbit of %s exceeded bound %d" % (s, bound)
                        )
                    parent[key] = (src, gi)
                    elements.append(key)
                    new.append(key)
        frontier = new
    return OrbitTable(seed=s, elements=elements, parent=parent)


# ---------------------------------------------------------------------------
# isometries of definite lattices
# ---------------------------------------------------------------------------

def isometries_of_definite(gram, node_limit: int = 1_000_000) -> list[np.ndarray]:
    """All isometries of a definite lattice, as integer matrices acting on
    row vectors (M @ gram @ M.T == gram).

    Candidate images of each basis vector are the lattice vectors of the
    same norm; the backtracking fills the rarest-norm slots first and checks
    all pairings against the Gram matrix at every step.  Raises TooLarge
    when the search tree exceeds node_limit nodes.
    """
    g = np.array(gram, dtype=np.int64)
    n = g.shape[0]
    assert np.array_equal(g, g.T), "Gram matrix must be symmetric"
    neg = g[0, 0] < 0
    work = g if neg else -g  # vectors_with_norm wants negative definite
    candidates = []
    for i in range(n):
        norm = int(work[i, i])
        vecs = vectors_with_norm(work.tolist(), [0] * n, norm)
        ints = [tuple(int(x) for x in v) for v in vecs]
        if not ints:
            raise NotDefinite("no vectors of norm %d; Gram not definite?" % norm)
        candidates.append(ints)

    order = sorted(range(n), key=lambda i: (len(candidates[i]), i))
    pair_cache = {i: np.array(candidates[i], dtype=np.int64) for i in range(n)}
    nodes = 0
    out = []
    chosen = [None] * n

    def rec(depth: int) -> None:
        nonlocal nodes
        if depth == n:
            m = np.array([chosen[i] for i in range(n)], dtype=np.int64)
            assert np.array_equal(m @ g @ m.T, g)
            out.append(m)
            return
        i = order[depth]
        arr = pair_cache[i]
        ok = np.ones(len(arr), dtype=bool)
        for j in order[:depth]:
            want = g[i, j]
            ok &= (arr @ g @ np.array(chosen[j], dtype=np.int64)) == want
        for v in arr[ok]:
            nodes += 1
            if nodes > node_limit:
                raise TooLarge("isometry search exceeded %d nodes" % node_limit)
            chosen[i] = tuple(int(x) for x in v)
            rec(depth + 1)
            chosen[i] = None

    rec(0)
    # determinant of the change of basis must be a unit
    for m in out:
        assert abs(round(float(np.linalg.det(m.astype(float))))) == 1
    return out


# ---------------------------------------------------------------------------
# discriminant form automorphisms
# ---------------------------------------------------------------------------

def _group_elements(disc: DiscriminantForm):
    """All classes of the finite group, as exponent tuples."""
    return list(itertools.product(*[range(d) for d in disc.orders]))

def _q_table(disc: DiscriminantForm) -> dict:
    """Exponent tuple -> value of the quadratic form (Fraction mod 2)."""
    return {e: disc.q(disc.lift(e)) for e in _group_elements(disc)}


def discriminant_automorphisms(disc: DiscriminantForm) -> list[np.ndarray]:
    """Brute-force automorphism group of the finite quadratic form.

    Candidates are matrices whose row i gives the exponents of the image of
    generator i; a candidate survives when it preserves the quadratic form
    on generators, the bilinear form on generator pairs, and permutes the
    full element set (so it is invertible).
    """
    k = len(disc.orders)
    if k == 0:
        return [np.zeros((0, 0), dtype=np.int64)]
    gens = disc.generators
    qs = [disc.q(u) for u in gens]
    bs = {(i, j): disc.b(gens[i], gens[j]) for i in range(k) for j in range(i + 1, k)}
    elements = _group_elements(disc)
    qtab = _q_table(disc)
    out = []
    # entry (i, j) is an exponent of generator j, hence ranges over orders[j]
    ranges = [range(disc.orders[j]) for _ in range(k) for j in range(k)]
    for flat in itertools.product(*ranges):
        m = np.array(flat, dtype=np.int64).reshape(k, k)
        # well-defined on Z/orders[i]: the image of generator i must die
        # when multiplied by orders[i]
        if any(
            (int(m[i, j]) * disc.orders[i]) % disc.orders[j]
            for i in range(k)
            for j in range(k)
        ):
            continue
        imgs = [disc.lift(m[i]) for i in range(k)]
        if any(disc.q(imgs[i]) != qs[i] for i in range(k)):
            continue
        if any(disc.b(imgs[i], imgs[j]) != bs[i, j] for i, j in bs):
            continue
        seen = set()
        for e in elements:
            img = tuple(
                int(sum(e[i] * m[i, c] for i in range(k))) % disc.orders[c]
                for c in range(k)
            )
            if qtab[img] != qtab[e]:
                break
            seen.add(img)
        else:
            if len(seen) == len(elements):
                out.append(m % np.array(disc.orders, dtype=np.int64))
    return out


def discriminant_matrix(lat: Lattice, disc: DiscriminantForm, isometry) -> np.ndarray:
    """Action of a lattice isometry on the discriminant group, as a matrix
    of generator-image exponents."""
    m = np.asarray(isometry, dtype=np.int64)
    rows = []
    for gvec in disc.generators:
        coords = [Fraction(c) for c in gvec.coords]
        img = [sum(coords[r] * int(m[r, c]) for r in range(lat.rank)) for c in range(lat.rank)]
        rows.append(disc.coords_of(lat.dual(img)))
    return np.array(rows, dtype=np.int64)


def discriminant_action(lat: Lattice, isometries) -> tuple[list, bool]:
    """Distinct discriminant-form actions of the given isometries and a
    surjectivity flag against the brute-force automorphism group."""
    disc = lat.discriminant_form
    image = {}
    for m in isometries:
        a = discriminant_matrix(lat, disc, isometry=m)
        image.setdefault(a.tobytes(), a)
    full = discriminant_automorphisms(disc)
    full_keys = {a.tobytes() for a in full}
    img_keys = set(image)
    assert img_keys <= full_keys, "image contains a non-automorphism"
    return list(image.values()), img_keys == full_keys
