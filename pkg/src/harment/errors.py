"""Exception types shared across the package."""


class HarmentError(Exception):
    """Base class for all errors raised by this package."""


class NotSymmetric(HarmentError):
    """Coupling coefficients violate V_k = V_{-k}."""


class NotPositive(HarmentError):
    """Some circulant eigenvalue is at or below the positivity tolerance.

    The Hamiltonian has no normalizable ground state at this lattice size;
    callers sweeping over sizes should perturb N and retry.
    """

    def __init__(self, message, offending_index=None, eigenvalue=None):
        super().__init__(message)
        self.offending_index = offending_index
        self.eigenvalue = eigenvalue


class TooLarge(HarmentError):
    """Requested dense matrix exceeds the configured site cap."""


class IllConditionedRoots(HarmentError):
    """Unit-circle root clustering or multiplicity detection is ambiguous."""


class BadPartition(HarmentError):
    """Partition block is empty, full, or exceeds the lattice extents."""


class IntegrityError(HarmentError):
    """A numerical self-check failed; indicates an upstream bug, not physics."""


class SpectrumBelowOne(IntegrityError):
    """Some mu eigenvalue fell below 1 beyond tolerance (broken kernel)."""


class InsufficientDecayData(HarmentError):
    """Too few usable lags in the decay-fit window."""
