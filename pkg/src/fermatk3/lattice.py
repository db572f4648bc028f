"""Integral lattices, dual vectors, discriminant forms and primitive
embeddings.

A lattice is a free Z-module with an integral symmetric Gram matrix;
vectors are rows of coordinates in the lattice basis.  Dual vectors are
rational coordinate rows whose pairings with the lattice are integral.
Discriminant groups are presented through the Smith normal form of the
Gram matrix, which also yields explicit dual-vector lifts of the cyclic
generators.

Gluing (overlattices of a direct sum along isotropic subgroups of the
discriminant form) is done by Hermite reduction of generator stacks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import NotIsotropic, NotPrimitive
from .exact import (
    RatMatrix,
    det_rational,
    gram_pair,
    hermite_normal_form,
    kernel_basis_int,
    mat_mul,
    rat_inverse,
    signature,
    smith_normal_form,
    vec_mat,
)


@dataclass(frozen=True)
class Lattice:
    """Nondegenerate integral lattice given by its Gram matrix."""

    gram: RatMatrix

    def __post_init__(self):
        g = self.gram if isinstance(self.gram, RatMatrix) else RatMatrix(self.gram)
        object.__setattr__(self, "gram", g)
        if g.rows != g.transpose().rows:
            raise ValueError("Gram matrix must be symmetric")
        if not g.is_integral():
            raise ValueError("Gram matrix must be integral")

    @property
    def rank(self) -> int:
        return self.gram.nrows

    @cached_property
    def signature(self) -> tuple[int, int]:
        pos, neg, zero = signature(self.gram)
        if zero:
            raise ValueError("degenerate lattice")
        return (pos, neg)

    @cached_property
    def determinant(self) -> int:
        d = det_rational(self.gram)
        assert d.denominator == 1
        return int(d)

    @cached_property
    def is_even(self) -> bool:
        return all(self.gram[i, i] % 2 == 0 for i in range(self.rank))

    @cached_property
    def dual_gram(self) -> RatMatrix:
        """Gram matrix of the dual basis (= inverse Gram)."""
        return rat_inverse(self.gram)

    def pair(self, u, v) -> Fraction:
        return gram_pair(list(u), list(v), self.gram)

    def norm(self, v) -> Fraction:
        return self.pair(v, v)

    def dual(self, coords) -> "DualVector":
        return DualVector(self, tuple(Fraction(e) for e in coords))

    @cached_property
    def discriminant_form(self) -> "DiscriminantForm":
        return DiscriminantForm(self)


@dataclass(frozen=True)
class DualVector:
    """Vector of the dual lattice, in rational coordinates of the lattice
    basis (all pairings with lattice vectors are integral)."""

    lattice: Lattice
    coords: tuple

    def __post_init__(self):
        cs = tuple(Fraction(e) for e in self.coords)
        object.__setattr__(self, "coords", cs)
        pairings = vec_mat(list(cs), self.lattice.gram)
        if any(p.denominator != 1 for p in pairings):
            raise ValueError("not a dual vector: non-integral pairings")

    def pair(self, other) -> Fraction:
        o = other.coords if isinstance(other, DualVector) else other
        return self.lattice.pair(self.coords, o)

    @property
    def norm(self) -> Fraction:
        return self.pair(self)

    def is_integral(self) -> bool:
        return all(e.denominator == 1 for e in self.coords)

    def __add__(self, other: "DualVector") -> "DualVector":
        return DualVector(
            self.lattice, tuple(a + b for a, b in zip(self.coords, other.coords))
        )

    def __sub__(self, other: "DualVector") -> "DualVector":
        return DualVector(
            self.lattice, tuple(a - b for a, b in zip(self.coords, other.coords))
        )

    def scaled(self, c) -> "DualVector":
        c = Fraction(c)
        return DualVector(self.lattice, tuple(c * e for e in self.coords))


class DiscriminantForm:
    """Finite quadratic form on dual/lattice with explicit generator lifts.

    Orders are read off the Smith normal form of the Gram matrix; entries 1
    are dropped.  coords_of() maps a dual vector to its class, q() and b()
    evaluate the discriminant quadratic form (mod 2Z) and bilinear form
    (mod Z).
    """

    def __init__(self, lattice: Lattice):
        self.lattice = lattice
        u, d, v = smith_normal_form(lattice.gram)
        n = lattice.rank
        orders = [int(d[i, i]) for i in range(n)]
        keep = [i for i in range(n) if orders[i] > 1]
        self.orders = tuple(orders[i] for i in keep)
        vinv = rat_inverse(v)
        ginv = lattice.dual_gram
        self._v = v
        lifts = []
        for i in keep:
            row = vec_mat(list(vinv[i]), ginv)
            lifts.append(DualVector(lattice, tuple(row)))
        self.generators = tuple(lifts)
        self._keep = keep

    @property
    def order(self) -> int:
        out = 1
        for d in self.orders:
            out *= d
        return out

    def coords_of(self, vec: DualVector) -> tuple[int, ...]:
        """Class of a dual vector as exponents of the cyclic generators."""
        xi = vec_mat(list(vec.coords), self.lattice.gram)
        eta = vec_mat(xi, self._v)
        out = []
        for pos, i in enumerate(self._keep):
            e = eta[i]
            assert e.denominator == 1
            out.append(int(e) % self.orders[pos])
        return tuple(out)

    def lift(self, coords) -> DualVector:
        """A dual-vector representative of the class with given exponents."""
        vec = DualVector(self.lattice, (Fraction(0),) * self.lattice.rank)
        for c, g in zip(coords, self.generators):
            vec = vec + g.scaled(int(c))
        return vec

    def q(self, vec: DualVector) -> Fraction:
        """Discriminant quadratic form: <v,v> mod 2Z, in [0, 2)."""
        return vec.norm % 2

    def b(self, u: DualVector, v: DualVector) -> Fraction:
        """Discriminant bilinear form: <u,v> mod Z, in [0, 1)."""
        return u.pair(v) % 1


@dataclass(frozen=True)
class Embedding:
    """Embedding of one lattice into another.

    matrix rows are the images of the domain basis, in ambient coordinates.
    Construction verifies that the pairing is preserved and, unless
    require_primitive is disabled (finite-index inclusions into
    overlattices), that the image is a primitive sublattice (torsion-free
    cokernel, via Smith form).
    """

    domain: Lattice
    ambient: Lattice
    matrix: RatMatrix
    require_primitive: bool = True

    def __post_init__(self):
        m = self.matrix if isinstance(self.matrix, RatMatrix) else RatMatrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not m.is_integral():
            raise ValueError("embedding matrix must be integral")
        prod = RatMatrix(mat_mul(mat_mul(m, self.ambient.gram), m.transpose()))
        if prod != self.domain.gram:
            raise ValueError("embedding does not preserve the pairing")
        if self.require_primitive:
            _u, d, _v = smith_normal_form(m)
            k = self.domain.rank
            diags = [d[i, i] for i in range(k)]
            if any(e != 1 for e in diags):
                raise NotPrimitive("image has elementary divisors %s" % (diags,))

    def push(self, v) -> list[Fraction]:
        """Image of a domain (dual) vector in ambient coordinates."""
        return vec_mat([Fraction(e) for e in v], self.matrix)


def orthogonal_complement(emb: Embedding) -> Embedding:
    """The primitive sublattice of the ambient orthogonal to the image."""
    pairing = mat_mul(emb.ambient.gram, emb.matrix.transpose())
    pairing_int = [[int(e) for e in row] for row in pairing]
    k = kernel_basis_int(pairing_int)
    gram = mat_mul(k, mat_mul(emb.ambient.gram, [list(r) for r in zip(*k)]))
    return Embedding(Lattice(RatMatrix(gram)), emb.ambient, RatMatrix(k))


def overlattice(base: Lattice, glue_vectors) -> tuple[Lattice, Embedding]:
    """Even overlattice generated by base and the given rational vectors
    (coordinates in the base basis).  Raises NotIsotropic when the glue
    classes are not isotropic for the discriminant form (the result would
    not be an even integral lattice)."""
    n = base.rank
    den = 1
    gens = []
    for g in glue_vectors:
        row = [Fraction(e) for e in g]
        gens.append(row)
        for e in row:
            den = den * e.denominator // __import__("math").gcd(den, e.denominator)
    stacked = [[int(e * den) for e in row] for row in gens]
    stacked += [[den if i == j else 0 for j in range(n)] for i in range(n)]
    h, _u = hermite_normal_form(stacked)
    rows = [list(r) for r in h.rows if any(r)]
    assert len(rows) == n, "glue vectors must span a finite-index overlattice"
    basis = [[Fraction(e, den) for e in row] for row in rows]
    gram = mat_mul(basis, mat_mul(base.gram, [list(r) for r in zip(*basis)]))
    for i in range(n):
        for j in range(n):
            if gram[i][j].denominator != 1 or (i == j and gram[i][i] % 2):
                raise NotIsotropic(
                    "glue classes are not isotropic: overlattice Gram entry "
                    "(%d,%d) = %s" % (i, j, gram[i][j])
                )
    new = Lattice(RatMatrix(gram))
    # base basis in the new coordinates
    binv = rat_inverse(basis)
    if not binv.is_integral():
        raise AssertionError("base is not contained in the overlattice")
    emb = Embedding(base, new, binv, require_primitive=False)
    return new, emb


def project(emb: Embedding, ambient_vector) -> DualVector:
    """Orthogonal projection of an ambient vector to (domain tensor Q),
    returned as a dual vector of the domain."""
    v = [Fraction(e) for e in ambient_vector]
    pairings = vec_mat(vec_mat(v, emb.ambient.gram), emb.matrix.transpose().rows)
    coords = vec_mat(pairings, rat_inverse(emb.domain.gram))
    return DualVector(emb.domain, tuple(coords))
