"""Exception types raised by the library."""


class IsoDarbouxError(Exception):
    """Base class for all library errors."""


class GridError(IsoDarbouxError, ValueError):
    """Unusable discretization or mismatched grids."""


class NodalFunctionError(IsoDarbouxError, ValueError):
    """A function required to be positive (nodeless) is not."""


class SingularBandError(IsoDarbouxError, ValueError):
    """Deformation parameter inside the excluded band [-I_total, 0].

    The endpoints of the band are the Abraham-Moses (lambda = -1) and
    Pursey (lambda = 0) limits of the family; inside the band the
    denominator I0(x) + lambda vanishes somewhere on the real line.
    """

    def __init__(self, lam: float, total: float = 1.0, detail: str = ""):
        self.lam = lam
        self.total = total
        msg = (
            f"lambda = {lam!r} lies in the excluded singular band "
            f"[{-total:g}, 0] between the limiting values {-total:g} and 0, "
            f"the Abraham-Moses (lambda = {-total:g}) and Pursey (lambda = 0) limits"
        )
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NumericalError(IsoDarbouxError, ArithmeticError):
    """A numerical procedure failed or produced unreliable output."""


class FactorizationEnergyError(IsoDarbouxError, ValueError):
    """Factorization energy not strictly below the ground-state energy."""


class EigenSolverError(NumericalError):
    """Degenerate, non-converged, or otherwise failed eigenpair."""


class DegenerateConfigurationError(IsoDarbouxError, ValueError):
    """Cross-ratio or superposition inputs leave no usable nodes."""


class PartnerMismatchError(IsoDarbouxError, ValueError):
    """Superpotentials do not solve the same Riccati equation."""


class ScatteringError(NumericalError):
    """Scattering integration is unreliable or the potential is not short-range."""


class CatalogError(IsoDarbouxError, ValueError):
    """Unknown potential family, missing parameters, or malformed table."""
