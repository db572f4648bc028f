"""Exception types raised by the verification engine.

All errors derive from VerificationError so callers can catch the whole
family at once.  The names describe the violated precondition or the
failed certificate, not the routine that raised them.
"""


class VerificationError(Exception):
    """Base class for all errors raised by this package."""


# --- exact linear algebra ---------------------------------------------------

class NotDefinite(VerificationError):
    """A Gram matrix expected to be positive or negative definite is not."""


# --- lattices ---------------------------------------------------------------

class NotIsotropic(VerificationError):
    """A vector or glue coset expected to be isotropic has nonzero norm."""


class NotPrimitive(VerificationError):
    """A sublattice embedding expected to be primitive has torsion cokernel."""


# --- chamber machinery ------------------------------------------------------

class ZeroTProjection(VerificationError):
    """A restricted root projects to zero and cannot define a wall."""


class InteriorViolation(VerificationError):
    """The designated interior point lies on or behind a candidate wall."""


class NonIntegralImage(VerificationError):
    """A reflection image of an integral vector is not integral."""


class NotNef(VerificationError):
    """A vector pairs negatively with a line class during reduction."""


class NotIsometry(VerificationError):
    """A matrix does not preserve the intersection form (or the cone)."""


class SiftFailure(VerificationError):
    """A permutation could not be expressed in the stabilizer generators."""


# --- enumeration ------------------------------------------------------------

class ConeViolation(VerificationError):
    """Input vectors do not lie in the positive cone as required."""


# --- group machinery --------------------------------------------------------

class OrbitOverflow(VerificationError):
    """An orbit grew past the stated bound; the seed or generators are wrong."""


class TooLarge(VerificationError):
    """A definite isometry group search exceeded its cutoff."""


# --- line configuration -----------------------------------------------------

class NoFrameFound(VerificationError):
    """No ordering of lines satisfies all frame constraints."""


class NonIntegralClass(VerificationError):
    """A curve's pairing vector does not solve to an integral divisor class."""


class NotAutomorphism(VerificationError):
    """A projectivity does not preserve the surface (or the line set)."""


# --- linear systems and polarizations ---------------------------------------

class NoDecomposition(VerificationError):
    """No effective decomposition of the given class was found."""


class NotPolarization(VerificationError):
    """A class fails the nef-and-big test required of a polarization."""


class NoRelation(VerificationError):
    """The expected linear relation among monomials does not exist."""


class DegenerateSquare(VerificationError):
    """A quadratic relation has no quadratic term and cannot be normalized."""


class NonReduced(VerificationError):
    """A branch curve has a multiple component."""


class QuarticIdentityFails(VerificationError):
    """A claimed self-map does not satisfy the surface equation identity."""


class BaseLocusTooLarge(VerificationError):
    """Too few lines survive outside the base locus to span the lattice."""


class NonIntegralInvolution(VerificationError):
    """An eigenspace-projection involution is not defined over the integers."""


class SingularHermitian(VerificationError):
    """A Hermitian coefficient matrix expected to be invertible is singular."""
