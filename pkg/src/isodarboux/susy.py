"""Witten superpotential, SUSY partners and the strictly isospectral family.

Conventions
-----------
* ``I0(x)`` is the running integral of ``u0^2`` anchored at ``x_min``
  (endpoint-corrected trapezoid, so ``I0' = u0^2`` holds to O(h^4)).
* The deformation term ``D ln(I0 + lam)`` is evaluated as
  ``u0^2 / (I0 + lam)``, i.e. through ``I0' = u0^2`` instead of by
  differencing a logarithm. This form is a Moebius function of ``lam`` at
  every node, so cross-ratios of family members are exact to rounding.
* A general superpotential keeps its Witten base and its correction
  separately; differences between members of one family are taken on the
  corrections, which avoids cancellation where ``u0^2`` is tiny.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, NodalFunctionError, NumericalError, SingularBandError
from .grid import (
    SampledFunction,
    cumulative_integral,
    derivative,
    log_derivative,
    pointwise,
    second_derivative,
    same_grid,
    total_integral,
)
from .schrodinger import WaveFunction, require_nodeless

NORM_TOL = 1e-6
SINGULAR_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class Superpotential:
    """Samples of a Riccati solution ``w`` plus provenance.

    ``base``/``correction`` split ``w`` into the Witten superpotential it
    deforms and the (small) deformation; both are ``None`` for
    superpotentials given only by their samples.
    """

    samples: SampledFunction
    kind: str = "particular"
    lambda_chain: tuple = ()
    source_mode: WaveFunction | None = None
    base: SampledFunction | None = None
    correction: SampledFunction | None = None

    def __post_init__(self):
        if self.kind not in ("particular", "general"):
            raise ValueError(f"unknown superpotential kind {self.kind!r}")
        object.__setattr__(self, "lambda_chain", tuple(float(v) for v in self.lambda_chain))

    @property
    def grid(self):
        return self.samples.grid

    @property
    def values(self) -> np.ndarray:
        return self.samples.values


@dataclass(frozen=True, eq=False)
class FamilyMember:
    lam: float
    potential: SampledFunction
    ground_state: WaveFunction
    shift: float
    diagnostics: dict = field(default_factory=dict)


def _samples(w) -> SampledFunction:
    return w.samples if isinstance(w, Superpotential) else w


def _interior(f: SampledFunction) -> SampledFunction:
    mask = f.valid.copy()
    mask[[0, -1]] = False
    return f.masked(mask)


# -- partners ---------------------------------------------------------------

def witten_superpotential(u0: WaveFunction, form: str | None = None) -> Superpotential:
    """``w_p = -D ln u0`` with the two boundary nodes masked.

    ``form="log"`` differences ``ln u0`` (exact for Gaussian-like tails);
    ``form="quotient"`` uses ``-u0' / u0``, which stays second-order next to
    a hard wall where ``u0`` vanishes linearly and ``w_p`` has a pole. The
    default is ``"quotient"`` when the samples carry ``hard_walls=True``.
    """
    require_nodeless(u0)
    if form is None:
        form = "quotient" if u0.samples.meta.get("hard_walls") else "log"
    inner = _interior(u0.samples)
    if form == "log":
        w = log_derivative(inner)
        w = w.with_values(-w.values)
    elif form == "quotient":
        w = pointwise(lambda d, a: -d / a, derivative(inner), inner)
    else:
        raise ValueError(f"unknown form {form!r}")
    zero = w.with_values(np.zeros(w.grid.n))
    return Superpotential(w, "particular", (), u0, base=w, correction=zero)


def fermionic_partner(w) -> SampledFunction:
    """``V+ = w^2 + w'``."""
    s = _samples(w)
    return pointwise(lambda a, b: a * a + b, s, derivative(s))


def bosonic_from_superpotential(w) -> SampledFunction:
    """``V- = w^2 - w'``."""
    s = _samples(w)
    return pointwise(lambda a, b: a * a - b, s, derivative(s))


def partner_deviation(w: Superpotential, ref: Superpotential) -> float:
    """Max |V+(w) - V+(ref)| over nodes where both partners are defined.

    When both share one Witten base the difference is expanded as
    ``2 b (c - r) + c^2 - r^2 + (c - r)'`` on the corrections.
    """
    if (
        isinstance(w, Superpotential)
        and isinstance(ref, Superpotential)
        and w.base is not None
        and w.base is ref.base
    ):
        dc = pointwise(np.subtract, w.correction, ref.correction)
        quad = pointwise(lambda b, c, r, d: 2.0 * b * d + (c - r) * (c + r), w.base, w.correction, ref.correction, dc)
        dev = pointwise(np.add, quad, derivative(dc))
    else:
        dev = pointwise(np.subtract, fermionic_partner(w), fermionic_partner(ref))
    return float(np.max(np.abs(dev.valid_values())))


# -- the one-parameter family -------------------------------------------------

def norm_integral(u0: WaveFunction) -> SampledFunction:
    """``I0(x) = int_{x_min}^x u0^2``; rejects unnormalized input."""
    dens = u0.samples.with_values(u0.values ** 2)
    total = total_integral(dens)
    if not u0.normalized or abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"ground state is not normalized (norm^2 = {total!r})")
    return cumulative_integral(dens, endpoint_correction=True)


def check_lambda(lam: float, total: float = 1.0) -> float:
    """Reject ``lam`` in the closed band ``[-total, 0]``."""
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValueError(f"lambda must be finite, got {lam!r}")
    slack = 1e-12 * total
    if -total - slack <= lam <= slack:
        raise SingularBandError(lam, total)
    return lam


def _denominator(u0: WaveFunction, lam: float) -> tuple[SampledFunction, SampledFunction]:
    I0 = norm_integral(u0)
    total = float(I0.valid_values()[-1])
    check_lambda(lam, total)
    den = I0.with_values(I0.values + lam)
    if np.any(np.sign(den.valid_values()) != np.sign(lam)):
        raise SingularBandError(lam, total, "I0 + lambda changes sign on the grid")
    return I0, den


def singularity_margin(u0: WaveFunction, lam: float) -> float:
    """``min |I0 + lam| / I_total``; small values flag near-singular members."""
    I0, den = _denominator(u0, lam)
    return float(np.min(np.abs(den.valid_values())) / I0.valid_values()[-1])


def bernoulli_solution(u0: WaveFunction, lam: float) -> SampledFunction:
    """``v = (I0 + lam) / u0^2``, valid where ``u0 > 0``."""
    _, den = _denominator(u0, lam)
    u = u0.samples.masked(u0.values > 0.0)
    return pointwise(lambda d, a: d / (a * a), den, u)


def deformation_term(u0: WaveFunction, lam: float) -> SampledFunction:
    """``D ln(I0 + lam)`` evaluated as ``u0^2 / (I0 + lam)``."""
    _, den = _denominator(u0, lam)
    return pointwise(lambda a, d: a * a / d, u0.samples, den)


def log_deformation_term(u0: WaveFunction, lam: float) -> SampledFunction:
    """``D ln|I0 + lam|`` by differencing the logarithm (cross-check form)."""
    _, den = _denominator(u0, lam)
    return derivative(den.with_values(np.log(np.abs(den.values))))


def general_superpotential(u0: WaveFunction, lam: float, w_p: Superpotential | None = None) -> Superpotential:
    """``w_g = w_p + D ln(I0 + lam) = -D ln(u0 / (I0 + lam))``."""
    if w_p is None:
        w_p = witten_superpotential(u0)
    corr = deformation_term(u0, lam).masked(w_p.samples.valid)
    w = pointwise(np.add, w_p.base, corr)
    return Superpotential(w, "general", (lam,), u0, base=w_p.base, correction=corr)


def general_superpotential_log_form(u0: WaveFunction, lam: float) -> SampledFunction:
    """``-D ln(u0 / (I0 + lam))`` differenced directly, for cross-checks."""
    _, den = _denominator(u0, lam)
    ratio = pointwise(lambda a, d: a / np.abs(d), _interior(u0.samples), den)
    w = log_derivative(ratio)
    return w.with_values(-w.values)


def deformation_correction(u0: WaveFunction, lam: float) -> SampledFunction:
    """``-4 u0 u0' / (I0 + lam) + 2 u0^4 / (I0 + lam)^2``, the change ``-2 D^2 ln(I0 + lam)``."""
    _, den = _denominator(u0, lam)
    du = derivative(u0.samples)
    return pointwise(lambda a, b, d: -4.0 * a * b / d + 2.0 * a ** 4 / d ** 2, u0.samples, du, den)


def deformed_ground_state(u0: WaveFunction, lam: float) -> WaveFunction:
    """``sqrt(lam (lam + 1)) u0 / (I0 + lam)``, normalized for both signs of ``lam``.

    The prefactor is written for a general total ``T = I0(x_max)`` as
    ``sqrt(lam (lam + T) / T)``, which is the closed form for ``T = 1``.
    """
    I0, den = _denominator(u0, lam)
    total = float(I0.valid_values()[-1])
    f = math.sqrt(lam * (lam + total) / total)
    samples = pointwise(lambda a, d: f * a / np.abs(d), u0.samples, den)
    if np.any(samples.valid_values() < 0.0):
        raise NumericalError("deformed ground state lost positivity")
    return WaveFunction(samples.with_values(samples.values, lam=lam), u0.energy, True)


def hamiltonian_residual(V: SampledFunction, u: WaveFunction) -> float:
    """Max |(-D^2 + V - E) u| over nodes where the three-point stencil applies."""
    d2 = second_derivative(u.samples)
    res = pointwise(lambda a, v, b: -a + (v - u.energy) * b, d2, V, u.samples)
    return float(np.max(np.abs(res.valid_values())))


def deformed_potential(V_minus: SampledFunction, u0: WaveFunction, lam: float) -> FamilyMember:
    """The family member ``V-(x; lam)`` with its ground state and diagnostics.

    ``V_minus`` is the parent shifted so that ``u0`` has zero energy.
    """
    same_grid(V_minus, u0.samples)
    lam = float(lam)
    corr = deformation_correction(u0, lam)
    potential = pointwise(np.add, V_minus, corr)
    if potential.mask is not None:
        raise NumericalError("deformed potential has non-finite samples")
    potential = potential.with_values(potential.values, lam=lam, shift=V_minus.meta.get("shift", 0.0))
    gs = deformed_ground_state(u0, lam)
    w_p = witten_superpotential(u0)
    w_g = general_superpotential(u0, lam, w_p)
    margin = singularity_margin(u0, lam)
    diagnostics = {
        "partner_deviation": partner_deviation(w_g, w_p),
        "gs_residual": hamiltonian_residual(potential, gs),
        "norm_error": abs(total_integral(gs.samples.with_values(gs.values ** 2)) - 1.0),
        "singularity_margin": margin,
        "near_singular": margin < SINGULAR_TOL,
    }
    return FamilyMember(lam, potential, gs, float(V_minus.meta.get("shift", 0.0)), diagnostics)


def double_darboux_reconstruct(V_plus: SampledFunction, u0_lam: WaveFunction) -> SampledFunction:
    """``V+ + 2 D^2 ln u0(x; lam)``: back from the fermionic partner."""
    if V_plus.grid != u0_lam.grid:
        raise GridError("partner and ground state live on different grids")
    require_nodeless(u0_lam)
    positive = _interior(u0_lam.samples)
    logu = positive.with_values(np.log(positive.values))
    d2 = second_derivative(logu)
    return pointwise(lambda v, d: v + 2.0 * d, V_plus, d2)
