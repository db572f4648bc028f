"""Verification engine for the automorphism group of the supersingular
Fermat quartic surface in characteristic 3.

The package recomputes, from first principles, the lattice-theoretic and
geometric facts needed to identify the full automorphism group of the
Fermat quartic surface x0^4 + x1^4 + x2^4 + x3^4 = 0 over an algebraically
closed field of characteristic 3: the 112 lines and their intersection
lattice, the embedding of the Neron-Severi lattice into the even unimodular
lattice of signature (1,25), the induced chamber structure and its walls,
the projective unitary group action, the extra non-projective involutions
coming from degree-2 polarizations, and the reduction/factorization
machinery that expresses isometries as words in the generators.

Every numerical claim is exposed through the ``verify-all`` CLI subcommand,
which emits a machine-readable report.
"""

__version__ = "0.1.0"
