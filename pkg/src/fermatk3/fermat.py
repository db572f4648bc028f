"""The Fermat quartic surface over GF(9): lines, incidence, projectivities
and recovery of the printed line ordering.

The surface x0^4 + x1^4 + x2^4 + x3^4 = 0 in characteristic 3 is cut out by
the Hermitian form sum x_i * conj(x_i) over GF(9), so its geometry is
governed by the projective unitary group.  It contains exactly 112 lines
and 280 GF(9)-points, 10 points on each line and 4 lines through each
point.

Lines are canonicalized as reduced row echelon 2x4 matrices over GF(9) and
ordered lexicographically by their code tuples; this fixes a deterministic
internal indexing.  A "frame" is an ordered 22-tuple of lines whose classes
form a basis of the Neron-Severi lattice with a prescribed Gram matrix; the
constraint solver in recover_frame() reconstructs the printed ordering of
all lines that printed tables refer to, from geometric pins alone (plane
sections, contracted-fiber tables, base loci of printed maps, Frobenius
images and a sample projectivity).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import gf9
from .errors import (
    NoFrameFound,
    NonIntegralClass,
    NotAutomorphism,
)
from .exact import RatMatrix, mat_mul, rat_inverse, vec_mat
from .gf9 import ADD, FROB, INV, MUL, NEG, NORM, SUB, bf_div, bf_gcd, bf_is_zero, bf_mul

COORDS = 4


def normalize_point(vec) -> tuple[int, ...]:
    """Scale a nonzero GF(9)^4 row so its first nonzero coordinate is 1."""
    v = [int(e) for e in vec]
    piv = next((e for e in v if e), None)
    assert piv is not None, "zero vector"
    inv = int(INV[piv])
    return tuple(int(MUL[e, inv]) for e in v)


def all_projective_points(dim: int = COORDS) -> list[tuple[int, ...]]:
    """All points of P^(dim-1) over GF(9), first nonzero coordinate 1."""
    pts = []
    for lead in range(dim):
        for tail in itertools.product(range(9), repeat=dim - lead - 1):
            pts.append((0,) * lead + (1,) + tail)
    return pts


def on_fermat(pt) -> bool:
    """x^4 = x * x^3 is the norm to GF(3), so the quartic is defined by
    NORM[x0] + NORM[x1] + NORM[x2] + NORM[x3] = 0 mod 3."""
    return sum(int(NORM[int(e)]) for e in pt) % 3 == 0


def surface_points() -> list[tuple[int, ...]]:
    return [p for p in all_projective_points() if on_fermat(p)]


@dataclass(frozen=True, order=True)
class ProjLine:
    """A line of P^3 over GF(9), stored as its canonical RREF 2x4 matrix
    flattened to an 8-tuple of codes."""

    codes: tuple

    @staticmethod
    def from_rows(r1, r2) -> "ProjLine":
        a = np.array([list(r1), list(r2)], dtype=np.uint8)
        red, pivots = gf9.rref9(a)
        assert len(pivots) == 2, "rows do not span a line"
        return ProjLine(tuple(int(e) for e in red.reshape(-1)))

    @property
    def rows(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.codes[:4], self.codes[4:]

    def points(self) -> list[tuple[int, ...]]:
        """The 10 GF(9)-points, as normalized tuples."""
        r1, r2 = self.rows
        pts = [normalize_point(r1)]
        for t in range(9):
            pts.append(
                normalize_point([int(ADD[MUL[t, a], b]) for a, b in zip(r1, r2)])
            )
        return pts

    def contains(self, pt) -> bool:
        m = np.array([list(self.rows[0]), list(self.rows[1]), list(pt)], dtype=np.uint8)
        return gf9.rank9(m) == 2

    def apply(self, mat4: np.ndarray) -> "ProjLine":
        """Image under a projectivity acting on row vectors from the right."""
        r1, r2 = self.rows
        m1 = gf9.mat_mul9(np.array([r1], dtype=np.uint8), mat4)[0]
        m2 = gf9.mat_mul9(np.array([r2], dtype=np.uint8), mat4)[0]
        return ProjLine.from_rows(m1, m2)

    def frobenius(self) -> "ProjLine":
        return ProjLine.from_rows(
            [int(FROB[e]) for e in self.rows[0]], [int(FROB[e]) for e in self.rows[1]]
        )

    def param_forms(self) -> list[list[int]]:
        """Coordinates of the parametrization u*r1 + v*r2 as degree-1 binary
        forms [coeff of u, coeff of v]."""
        r1, r2 = self.rows
        return [[int(a), int(b)] for a, b in zip(r1, r2)]


def all_lines() -> list[ProjLine]:
    """All 7462 lines of P^3 over GF(9), via RREF pivot patterns."""
    out = []
    for p1, p2 in itertools.combinations(range(4), 2):
        free_cols = [c for c in range(4) if c not in (p1, p2)]
        free1 = [c for c in free_cols if c > p1 and c != p2]
        free2 = [c for c in free_cols if c > p2]
        for vals in itertools.product(range(9), repeat=len(free1) + len(free2)):
            r1 = [0] * 4
            r2 = [0] * 4
            r1[p1] = 1
            r2[p2] = 1
            for c, v in zip(free1, vals[: len(free1)]):
                r1[c] = v
            for c, v in zip(free2, vals[len(free1):]):
                r2[c] = v
            out.append(ProjLine(tuple(r1 + r2)))
    assert len(out) == 7462
    return out


def lines_on_fermat() -> list[ProjLine]:
    """The lines contained in the Fermat quartic, sorted canonically."""
    found = [ln for ln in all_lines() if all(on_fermat(p) for p in ln.points())]
    found.sort()
    return found


def lines_meet(a: ProjLine, b: ProjLine) -> bool:
    """Two distinct lines of P^3 meet iff they are coplanar."""
    m = np.array([list(a.rows[0]), list(a.rows[1]), list(b.rows[0]), list(b.rows[1])],
                 dtype=np.uint8)
    return gf9.det9(m) == 0


def pgu_generator_matrices() -> list[np.ndarray]:
    """Generators of the projective unitary group PGU_4(GF(9)) acting on
    row vectors: coordinate 4-cycle, a transposition, a diagonal unit, and
    a unitary mixing block.  Each satisfies M * conj(M)^T = c*I for the
    standard Hermitian form (conj = entrywise cube)."""
    cyc = np.zeros((4, 4), dtype=np.uint8)
    for i in range(4):
        cyc[i, (i + 1) % 4] = 1
    swap = np.eye(4, dtype=np.uint8)
    swap[[0, 1]] = swap[[1, 0]]
    diag = np.eye(4, dtype=np.uint8)
    diag[0, 0] = gf9.I
    a = gf9.GEN  # 1 + i
    mix = np.eye(4, dtype=np.uint8)
    mix[0, 0] = a
    mix[0, 1] = a
    mix[1, 0] = a
    mix[1, 1] = NEG[a]
    gens = [cyc, swap, diag, mix]
    for m in gens:
        assert _is_unitary(m), m
    return gens


def _is_unitary(m: np.ndarray) -> bool:
    conj_t = FROB[m].T
    prod = gf9.mat_mul9(m, conj_t)
    diag = prod[0, 0]
    if diag == 0 or MUL[diag, FROB[diag]] != diag or FROB[diag] != diag:
        # scaling must be in GF(3)^*
        if diag not in (1, 2):
            return False
    target = np.eye(4, dtype=np.uint8) * diag
    return np.array_equal(prod, target)


class LineConfiguration:
    """The 112 lines with their intersection form and group actions."""

    def __init__(self):
        self.lines = tuple(lines_on_fermat())
        if len(self.lines) != 112:
            raise NotAutomorphism("expected 112 lines, found %d" % len(self.lines))
        self.index = {ln: i for i, ln in enumerate(self.lines)}
        n = len(self.lines)
        inter = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            inter[i, i] = -2
            for j in range(i + 1, n):
                if lines_meet(self.lines[i], self.lines[j]):
                    inter[i, j] = inter[j, i] = 1
        self.intersection = inter

    def line_permutation(self, mat4: np.ndarray) -> tuple[int, ...]:
        """Permutation induced on line indices by a projectivity; raises
        NotAutomorphism if some image is not a configuration line."""
        perm = []
        for ln in self.lines:
            img = ln.apply(mat4)
            if img not in self.index:
                raise NotAutomorphism("projectivity does not preserve the line set")
            perm.append(self.index[img])
        return tuple(perm)

    def frobenius_permutation(self) -> tuple[int, ...]:
        perm = []
        for ln in self.lines:
            img = ln.frobenius()
            if img not in self.index:
                raise NotAutomorphism("Frobenius does not preserve the line set")
            perm.append(self.index[img])
        return tuple(perm)

    def incidence_counts(self) -> tuple[int, int]:
        """(points per line, lines per point) for the configuration."""
        pts = {}
        for ln in self.lines:
            for p in ln.points():
                pts[p] = pts.get(p, 0) + 1
        per_point = set(pts.values())
        assert len(per_point) == 1
        return 10, per_point.pop()


# ---------------------------------------------------------------------------
# maps given by polynomial components, and their action on lines
# ---------------------------------------------------------------------------

def homogenize(poly: dict, degree: int | None = None) -> list[tuple[int, int, int, int, int]]:
    """Affine poly dict {(a,b,c): code} in (w,x,y) with z=1 -> list of
    homogeneous terms (a, b, c, d, code) of the given total degree."""
    if degree is None:
        degree = max(sum(e) for e in poly)
    out = []
    for (a, b, c), code in poly.items():
        d = degree - a - b - c
        assert d >= 0
        out.append((a, b, c, d, code))
    return out


def restrict_to_line(terms, line: ProjLine) -> list[int]:
    """Restriction of a homogeneous quartic-coordinate polynomial to a line,
    as a binary form in the line parameters."""
    degree = sum(terms[0][:4])
    forms = line.param_forms()
    # cache powers of each coordinate form
    pows = []
    for f in forms:
        p = [[1]]
        for _ in range(degree):
            p.append(bf_mul(p[-1], f))
        pows.append(p)
    out = [0] * (degree + 1)
    for a, b, c, d, code in terms:
        term = [code]
        for exp, coord in zip((a, b, c, d), pows):
            if exp:
                term = bf_mul(term, coord[exp])
        # term has degree a+b+c+d = degree
        for k, val in enumerate(term):
            out[k] = int(ADD[out[k], val])
    return out


def line_image_data(components: list[dict], line: ProjLine):
    """Restrict map components to a line.

    Returns ("base", None) when all components vanish identically on the
    line, ("point", pt) when the line is contracted to the point pt, or
    ("curve", forms) with the reduced parametrization forms otherwise.
    """
    degree = max(max(sum(e) for e in comp) for comp in components)
    restricted = [
        restrict_to_line(homogenize(comp, degree), line) for comp in components
    ]
    if all(bf_is_zero(f) for f in restricted):
        return ("base", None)
    g = bf_gcd(restricted)
    reduced = [
        bf_div(f, g) if not bf_is_zero(f) else [0] * (len(f) - len(g) + 1)
        for f in restricted
    ]
    if len(reduced[0]) == 1:
        return ("point", normalize_point([f[0] for f in reduced]))
    return ("curve", reduced)


def contracted_fibers(config: LineConfiguration, components: list[dict]):
    """Group the contracted lines of a map by image point.

    Returns (base_line_ids, {point: [line ids]}).
    """
    base = []
    fibers: dict[tuple, list[int]] = {}
    for i, ln in enumerate(config.lines):
        kind, val = line_image_data(components, ln)
        if kind == "base":
            base.append(i)
        elif kind == "point":
            fibers.setdefault(val, []).append(i)
    return base, fibers


def chain_order(config: LineConfiguration, ids: list[int]) -> list[int]:
    """Order line ids so consecutive lines meet (the dual graph must be a
    path); single lines and pairs come back as-is."""
    if len(ids) <= 1:
        return list(ids)
    deg = {i: 0 for i in ids}
    adj = {i: [] for i in ids}
    for a, b in itertools.combinations(ids, 2):
        if config.intersection[a, b] == 1:
            adj[a].append(b)
            adj[b].append(a)
            deg[a] += 1
            deg[b] += 1
    ends = sorted(i for i in ids if deg[i] <= 1)
    assert len(ends) == 2, "contracted fiber is not a chain"
    path = [ends[0]]
    prev = None
    while len(path) < len(ids):
        nxts = [n for n in adj[path[-1]] if n != prev]
        assert len(nxts) == 1, "contracted fiber is not a chain"
        prev = path[-1]
        path.append(nxts[0])
    return path


# ---------------------------------------------------------------------------
# frame recovery
# ---------------------------------------------------------------------------

@dataclass
class FrameConstraints:
    """Geometric pins for the printed line ordering.

    gram: 22x22 intersection matrix of the printed basis.
    basis_indices: printed indices (1-based) of the basis lines, in order.
    plane: coefficients of a linear form; its four section lines are the
        printed lines 1..4 (as a set).
    set_constraints: list of (printed index list, "set name") where the
        named geometric set must equal the image of those indices.
    line_sets: name -> set of internal line ids.
    chains: list of (printed index list, internal ids in path order)
        matching each contracted-fiber table row up to reversal.
    frobenius_images: {printed k: printed j} with line_j = Frobenius(line_k).
    projectivity_images: {printed k: printed j} realized by some projectivity
        (the matrix itself is reconstructed from the images, so a misprint in
        a published matrix cannot corrupt the recovered ordering).
    identities: list of ({printed index: multiplicity}, target class) used
        after the frame is known.
    """

    gram: list
    basis_indices: list
    plane: tuple | None = None
    set_constraints: list = field(default_factory=list)
    line_sets: dict = field(default_factory=dict)
    chains: list = field(default_factory=list)
    frobenius_images: dict = field(default_factory=dict)
    projectivity_images: dict = field(default_factory=dict)
    identities: list = field(default_factory=list)


@dataclass
class FrameRecovery:
    frame_ids: tuple          # internal line ids of the 22 basis lines
    assignment: dict          # printed index -> internal id (lex-least completion)
    pinned_indices: set       # printed indices forced by the constraints
    pinned: bool              # True when the frame is uniquely determined
    framed: "FramedConfiguration" = None
    projectivity_matrix: np.ndarray = None  # matrix realizing projectivity_images


def plane_section_lines(config: LineConfiguration, coeffs) -> list[int]:
    """Ids of configuration lines lying in the plane with the given
    coefficient row (a line lies in the plane iff both spanning rows are
    orthogonal to it under multiplication)."""
    out = []
    cvec = [int(c) for c in coeffs]
    for i, ln in enumerate(config.lines):
        ok = True
        for row in ln.rows:
            s = 0
            for a, b in zip(row, cvec):
                s = int(ADD[s, MUL[a, b]])
            if s:
                ok = False
                break
        if ok:
            out.append(i)
    return out


def meet_point(a: ProjLine, b: ProjLine):
    """Common point of two distinct meeting lines (first nonzero coordinate
    normalized to 1), or None when the lines are skew."""
    stack = np.array([a.rows[0], a.rows[1], b.rows[0], b.rows[1]], dtype=np.uint8)
    null = gf9.nullspace9(stack.T)
    if null.shape[0] == 0:
        return None
    assert null.shape[0] == 1, "lines coincide"
    c = null[0]
    pt = np.zeros(4, dtype=np.uint8)
    pt = ADD[pt, MUL[c[0], stack[0]]]
    pt = ADD[pt, MUL[c[1], stack[1]]]
    nz = int(np.nonzero(pt)[0][0])
    return tuple(int(x) for x in MUL[INV[pt[nz]], pt])


def projectivity_from_images(config: LineConfiguration, pairs) -> np.ndarray:
    """Unique projectivity (right action on row vectors) realizing the given
    line correspondences.

    pairs: list of (line id, image line id).  The intersection point of two
    meeting source lines must map to the intersection point of the image
    lines, which gives linear conditions on the matrix entries; the nullspace
    of those conditions is filtered by the pair list and by preservation of
    the whole configuration.  Raises NoFrameFound unless exactly one
    projectivity survives.
    """
    lines = config.lines
    inter = config.intersection
    corr = []
    for (a, fa), (b, fb) in itertools.combinations(sorted(set(pairs)), 2):
        if a == b or inter[a, b] != 1:
            continue
        if inter[fa, fb] != 1:
            raise NoFrameFound("images of meeting lines do not meet")
        corr.append((meet_point(lines[a], lines[b]), meet_point(lines[fa], lines[fb])))
    if not corr:
        raise NoFrameFound("no usable intersection points among the image pairs")
    # p @ M proportional to q: all 2x2 minors of [p @ M; q] vanish, which is
    # linear in the 16 entries of M (flattened row-major).
    rows = []
    for p, q in corr:
        for i in range(4):
            for j in range(i + 1, 4):
                row = np.zeros(16, dtype=np.uint8)
                for k in range(4):
                    row[4 * k + i] = ADD[row[4 * k + i], MUL[p[k], q[j]]]
                    row[4 * k + j] = ADD[row[4 * k + j], NEG[MUL[p[k], q[i]]]]
                rows.append(row)
    null = gf9.nullspace9(np.array(rows, dtype=np.uint8))
    dim = null.shape[0]
    if dim == 0 or dim > 4:
        raise NoFrameFound("projectivity conditions have nullspace dimension %d" % dim)
    survivors = []
    seen = set()
    for coeffs in itertools.product(range(9), repeat=dim):
        v = np.zeros(16, dtype=np.uint8)
        for c, b in zip(coeffs, null):
            v = ADD[v, MUL[c, b]]
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            continue
        key = tuple(int(x) for x in MUL[INV[v[nz[0]]], v])
        if key in seen:
            continue
        seen.add(key)
        m = np.array(key, dtype=np.uint8).reshape(4, 4)
        if gf9.det9(m) == 0:
            continue
        if any(lines[a].apply(m) != lines[fa] for a, fa in pairs):
            continue
        try:
            config.line_permutation(m)
        except NotAutomorphism:
            continue
        survivors.append(m)
    if len(survivors) != 1:
        raise NoFrameFound(
            "image pairs determine %d projectivities, not one" % len(survivors)
        )
    return survivors[0]


_SOLUTION_CAP = 64
_DFS_POOL_CAP = 8


def _stage_one(config: LineConfiguration, cons: FrameConstraints, image_pairs):
    """Propagate the pins and enumerate assignments of the directly
    constrained printed indices (at most _SOLUTION_CAP of them).

    image_pairs: list of (printed k, printed j, line permutation) meaning the
    line at printed index j is the permutation image of the line at printed
    index k.  Returns (solutions, candidate sets after propagation); raises
    NoFrameFound when the constraints admit no assignment.
    """
    n = len(config.lines)
    all_ids = frozenset(range(n))
    gram = cons.gram
    basis = list(cons.basis_indices)
    pos_of = {k: j for j, k in enumerate(basis)}
    inter = config.intersection

    candidates: dict[int, set] = {}

    def cand(k) -> set:
        if k not in candidates:
            candidates[k] = set(all_ids)
        return candidates[k]

    search_keys: set[int] = set(basis)

    if cons.plane is not None:
        sect = set(plane_section_lines(config, cons.plane))
        if len(sect) != 4:
            raise NoFrameFound("plane section has %d lines" % len(sect))
        for k in (1, 2, 3, 4):
            cand(k).intersection_update(sect)

    for indices, name in cons.set_constraints:
        ids = cons.line_sets[name]
        if len(indices) != len(ids):
            raise NoFrameFound(
                "set %s has %d lines but %d printed indices" % (name, len(ids), len(indices))
            )
        for k in indices:
            cand(k).intersection_update(ids)

    for indices, path in cons.chains:
        if len(indices) != len(path):
            raise NoFrameFound("chain length mismatch for %s" % (indices,))
        r = len(path)
        for j, k in enumerate(indices):
            cand(k).intersection_update({path[j], path[r - 1 - j]})
            search_keys.add(k)

    for k, j, _ in image_pairs:
        search_keys.add(k)
        search_keys.add(j)
    for k in search_keys:
        cand(k)

    def propagate() -> bool:
        """Run all propagation rules to a fixpoint; False on wipeout."""
        changed = True
        while changed:
            changed = False
            taken = {}
            for k, s in candidates.items():
                if len(s) == 0:
                    return False
                if len(s) == 1:
                    v = next(iter(s))
                    if v in taken and taken[v] != k:
                        return False
                    taken[v] = k
            for k, s in candidates.items():
                if len(s) > 1:
                    drop = s & set(taken)
                    if drop:
                        s.difference_update(drop)
                        changed = True
            for k, j, perm in image_pairs:
                sk, sj = cand(k), cand(j)
                fwd = {perm[c] for c in sk}
                if not sj.issubset(fwd):
                    sj.intersection_update(fwd)
                    changed = True
                inv = {c for c in sk if perm[c] in sj}
                if len(inv) != len(sk):
                    sk.intersection_update(inv)
                    changed = True
            # Gram arc consistency between basis indices (vectorized)
            for a in basis:
                sa = candidates.get(a)
                if sa is None or len(sa) == 1:
                    continue
                la = sorted(sa)
                rows = inter[la]
                keep_mask = np.ones(len(la), dtype=bool)
                for b in basis:
                    if b == a:
                        continue
                    sb = candidates.get(b)
                    if sb is None:
                        continue
                    want = gram[pos_of[a]][pos_of[b]]
                    sub = rows[:, sorted(sb)] == want
                    keep_mask &= sub.any(axis=1)
                keep = {la[i] for i in range(len(la)) if keep_mask[i]}
                if keep != sa:
                    if not keep:
                        return False
                    sa.intersection_update(keep)
                    changed = True
        return True

    if not propagate():
        raise NoFrameFound("constraint propagation wiped out a candidate set")

    solutions: list[dict] = []

    def consistent_full(assign: dict) -> bool:
        for a in basis:
            for b in basis:
                if a == b:
                    continue
                if inter[assign[a], assign[b]] != gram[pos_of[a]][pos_of[b]]:
                    return False
        for k, j, perm in image_pairs:
            if perm[assign[k]] != assign[j]:
                return False
        for indices, path in cons.chains:
            got = [assign.get(k) for k in indices]
            if None in got:
                continue
            if got != list(path) and got != list(reversed(path)):
                return False
        return True

    skeys = sorted(search_keys)

    def search() -> None:
        if len(solutions) >= _SOLUTION_CAP:
            return
        open_keys = [k for k in skeys if len(candidates[k]) > 1]
        if not open_keys:
            assign = {k: next(iter(candidates[k])) for k in skeys}
            if consistent_full(assign) and assign not in solutions:
                solutions.append(dict(assign))
            return
        k = min(open_keys, key=lambda kk: (len(candidates[kk]), kk))
        for choice in sorted(candidates[k]):
            snapshot = {kk: set(ss) for kk, ss in candidates.items()}
            candidates[k].clear()
            candidates[k].add(choice)
            if propagate():
                search()
            for kk in list(candidates):
                candidates[kk] = snapshot.get(kk, set())
            if len(solutions) >= _SOLUTION_CAP:
                return

    search()
    if not solutions:
        raise NoFrameFound("no line ordering satisfies all constraints")
    return solutions, candidates


def recover_frame(config: LineConfiguration, cons: FrameConstraints) -> FrameRecovery:
    """Reconstruct the printed line ordering from geometric constraints.

    Constraint propagation (set membership, chain rows up to reversal,
    Frobenius images, Gram consistency) is run to a fixpoint, followed by
    backtracking over the remaining distinguishable choices.  When
    projectivity images are given, the projectivity is first reconstructed
    from the images whose source and target are already determined, and the
    search is repeated with its full action as an extra pin.  Indices touched
    only by symmetric constraints (pure set membership, multiplicity-one
    decompositions) are completed lexicographically and reported as not
    pinned.  Raises NoFrameFound when the constraints admit no assignment.
    """
    basis = list(cons.basis_indices)
    frob_perm = config.frobenius_permutation()
    image_pairs = [
        (int(k), int(j), frob_perm) for k, j in cons.frobenius_images.items()
    ]
    solutions, candidates = _stage_one(config, cons, image_pairs)

    proj_matrix = None
    if cons.projectivity_images:
        first = solutions[0]
        known = {k: v for k, v in first.items() if all(s[k] == v for s in solutions)}
        id_pairs = [
            (known[k], known[j])
            for k, j in sorted(cons.projectivity_images.items())
            if k in known and j in known
        ]
        proj_matrix = projectivity_from_images(config, id_pairs)
        proj_perm = config.line_permutation(proj_matrix)
        image_pairs = image_pairs + [
            (int(k), int(j), proj_perm) for k, j in cons.projectivity_images.items()
        ]
        solutions, candidates = _stage_one(config, cons, image_pairs)

    frames = sorted({tuple(sol[k] for k in basis) for sol in solutions})
    frame_pinned = len(frames) == 1 and len(solutions) < _SOLUTION_CAP
    frame = frames[0]
    matching = [sol for sol in solutions if tuple(sol[k] for k in basis) == frame]
    chosen = min(matching, key=lambda sol: sorted(sol.items()))
    pinned_indices = {
        k for k, v in chosen.items() if all(sol[k] == v for sol in matching)
    }
    assignment = dict(chosen)

    framed = FramedConfiguration(config, frame, cons.gram)

    # stage 2: extend the assignment using the printed decomposition
    # identities (which need class vectors, hence the frame)
    assignment, pinned_indices = _complete_with_identities(
        config, framed, cons, assignment, pinned_indices, candidates
    )

    return FrameRecovery(
        frame_ids=frame,
        assignment=assignment,
        pinned_indices=pinned_indices,
        pinned=frame_pinned,
        framed=framed,
        projectivity_matrix=proj_matrix,
    )


def _complete_with_identities(config, framed, cons, assignment, pinned, candidates):
    """Assign remaining printed indices using decomposition identities.

    Identities are (multiplicity dict over printed indices, target class
    vector).  Each identity's unassigned slots are enumerated with the
    largest candidate pool resolved last by direct class lookup; slots that
    take the same line in every completion become pinned, and pinning rounds
    repeat until stable.  Remaining slots follow the lexicographically least
    completion, and leftovers touched only by set constraints are completed
    in index order.
    """
    n = len(config.lines)
    cv = [tuple(int(x) for x in row) for row in framed.class_vectors]
    used = set(assignment.values())

    def pool_of(k):
        base = candidates.get(k)
        ids = set(base) if base is not None else set(range(n))
        return sorted(ids - used)

    def completions_of(mults, target):
        """All assignments of one identity's unassigned slots hitting the
        target exactly (at most _SOLUTION_CAP of them)."""
        res = [int(t) for t in target]
        slots = []
        for k, m in sorted(mults.items()):
            if k in assignment:
                c = cv[assignment[k]]
                res = [r - m * x for r, x in zip(res, c)]
            else:
                slots.append((k, int(m), pool_of(k)))
        if not slots:
            return None
        slots.sort(key=lambda km: (len(km[2]), km[0]))
        found: list[dict] = []
        tail = [s for s in slots if len(s[2]) > _DFS_POOL_CAP and s[1] == 1]

        if len(tail) >= 2:
            # meet-in-the-middle over the weakly constrained multiplicity-one
            # slots: hash class sums of half-size subsets of their pool union
            # once, then match the other half against each search prefix
            head = [s for s in slots if not (len(s[2]) > _DFS_POOL_CAP and s[1] == 1)]
            tail_keys = [k for k, _, _ in tail]
            tail_pools = [set(p) for _, _, p in tail]
            universe = sorted(set().union(*tail_pools))
            t = len(tail)
            h = t // 2
            cva = framed.class_vectors
            half_sums: dict = {}
            for combo in itertools.combinations(universe, t - h):
                key = tuple(int(x) for x in cva[list(combo)].sum(axis=0))
                half_sums.setdefault(key, []).append(combo)

            def emit(res_now, used_now, assign_now):
                seen_sets = set()
                for small in itertools.combinations(universe, h):
                    if used_now.intersection(small):
                        continue
                    ssum = cva[list(small)].sum(axis=0)
                    key = tuple(int(r) - int(x) for r, x in zip(res_now, ssum))
                    for big in half_sums.get(key, ()):
                        if used_now.intersection(big) or set(small) & set(big):
                            continue
                        values = tuple(sorted(small + big))
                        if values in seen_sets:
                            continue
                        seen_sets.add(values)
                        for order in itertools.permutations(values):
                            if len(found) >= _SOLUTION_CAP:
                                return
                            if all(v in tail_pools[i] for i, v in enumerate(order)):
                                sol = dict(assign_now)
                                sol.update(zip(tail_keys, order))
                                found.append(sol)
        else:
            # resolve the largest slot by direct class lookup
            *head, (klast, mlast, plast) = slots
            plast_set = set(plast)

            def emit(res_now, used_now, assign_now):
                if mlast == 1:
                    req = tuple(res_now)
                else:
                    if any(r % mlast for r in res_now):
                        return
                    req = tuple(r // mlast for r in res_now)
                c = framed.class_index.get(req)
                if c is not None and c in plast_set and c not in used_now:
                    sol = dict(assign_now)
                    sol[klast] = c
                    found.append(sol)

        def rec(i, res_now, used_now, assign_now):
            if len(found) >= _SOLUTION_CAP:
                return
            if i == len(head):
                emit(res_now, used_now, assign_now)
                return
            k, m, p = head[i]
            for c in p:
                if c in used_now:
                    continue
                cls = cv[c]
                assign_now[k] = c
                rec(
                    i + 1,
                    [r - m * x for r, x in zip(res_now, cls)],
                    used_now | {c},
                    assign_now,
                )
                del assign_now[k]

        rec(0, res, set(), {})
        return found

    idents = [(dict(m), list(t)) for m, t in cons.identities]

    # pinning rounds: a slot constant across every completion is forced
    changed = True
    while changed:
        changed = False
        for mults, target in idents:
            if all(k in assignment for k in mults):
                continue
            found = completions_of(mults, target)
            if not found or len(found) >= _SOLUTION_CAP:
                continue
            for k in found[0]:
                vals = {sol[k] for sol in found}
                if len(vals) == 1:
                    v = vals.pop()
                    assignment[k] = v
                    pinned.add(k)
                    used.add(v)
                    changed = True

    # lexicographically least completion for identities still open
    for mults, target in idents:
        if all(k in assignment for k in mults):
            continue
        found = completions_of(mults, target)
        if not found:
            continue
        best = min(found, key=lambda sol: sorted(sol.items()))
        for k, v in best.items():
            assignment[k] = v
            used.add(v)

    # leftovers touched only by set constraints: lexicographic completion
    for indices, name in cons.set_constraints:
        ids = cons.line_sets[name]
        left_idx = sorted(k for k in indices if k not in assignment)
        left_ids = sorted(set(ids) - {assignment[k] for k in indices if k in assignment})
        if len(left_idx) != len(left_ids):
            raise NoFrameFound("set constraint %s became unsatisfiable" % name)
        for k, v in zip(left_idx, left_ids):
            assignment[k] = v

    return assignment, pinned


# ---------------------------------------------------------------------------
# divisor classes in a frame
# ---------------------------------------------------------------------------

class FramedConfiguration:
    """Line configuration together with a frame: lattice coordinates for
    every line class and isometries induced by symmetries."""

    def __init__(self, config: LineConfiguration, frame_ids, gram):
        self.config = config
        self.frame_ids = tuple(frame_ids)
        self.gram = RatMatrix(gram)
        self.gram_inv = rat_inverse(self.gram)
        n = len(config.lines)
        pair = np.zeros((n, 22), dtype=np.int64)
        for j, fid in enumerate(self.frame_ids):
            pair[:, j] = config.intersection[:, fid]
        classes = []
        for i in range(n):
            row = vec_mat([Fraction(int(e)) for e in pair[i]], self.gram_inv)
            if any(e.denominator != 1 for e in row):
                raise NonIntegralClass("line %d has a non-integral class" % i)
            classes.append([int(e) for e in row])
        self.class_vectors = np.array(classes, dtype=np.int64)
        self.class_index = {tuple(int(x) for x in row): i for i, row in enumerate(classes)}

    def class_of(self, line_id: int) -> tuple[int, ...]:
        return tuple(int(e) for e in self.class_vectors[line_id])

    def isometry_of_permutation(self, perm) -> np.ndarray:
        """22x22 integer matrix (right action on rows) induced by a line
        permutation: frame basis class j maps to the class of its image."""
        rows = [self.class_of(perm[fid]) for fid in self.frame_ids]
        m = np.array(rows, dtype=np.int64)
        # verify it preserves the Gram matrix
        g = np.array([[int(e) for e in r] for r in self.gram.rows], dtype=np.int64)
        if not np.array_equal(m @ g @ m.T, g):
            raise NotAutomorphism("induced matrix does not preserve the form")
        # verify it permutes all classes the same way
        img = self.class_vectors @ m
        for i in range(len(self.config.lines)):
            if tuple(int(x) for x in img[i]) != self.class_of(perm[i]):
                raise NotAutomorphism("class action disagrees with permutation")
        return m
