"""Exception types shared across the package."""


class BergmanDppError(Exception):
    """Base class for all package errors."""


class ContractViolationError(BergmanDppError):
    """A numeric contract was violated (spectrum out of range, bad pmf, ...)."""


class SingularMatrixError(BergmanDppError):
    def __init__(self, message, cond_estimate=None):
        super().__init__(message)
        self.cond_estimate = cond_estimate


class LatticePointError(BergmanDppError):
    """Weierstrass function evaluated at (or too close to) a lattice point."""


class DomainError(BergmanDppError):
    """Point on or outside the boundary of its domain."""


class GridTooCoarseError(BergmanDppError):
    """Spectrum clamping moved more than 10% of the trace."""


class UndefinedPalmError(BergmanDppError):
    """Palm conditioning at a tuple of near-zero correlation."""


class SingularResolventError(BergmanDppError):
    """The conditioning resolvent (1 - chi K) is numerically singular."""


class DominationError(BergmanDppError):
    """Stochastic domination fails; carries the violating up-set."""

    def __init__(self, message, certificate=None, violation=0.0):
        super().__init__(message)
        self.certificate = certificate
        self.violation = violation


class ConfigError(BergmanDppError):
    """Experiment config file could not be parsed."""
