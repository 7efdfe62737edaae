"""Iterated (multi-parameter) general Riccati solutions.

At order ``j`` the particular solution is ``w_p^(j) = w_p + w_{lam_1} + ... +
w_{lam_j}`` with ``w_{lam_j} = D ln(lam_j + int F_{j-1})`` and integration
factor ``F_j = exp(-int 2 w_p^(j))``.

Every ``w_p^(j)`` is a logarithmic derivative ``-D ln phi_j`` with
``phi_j = phi_{j-1} / (lam_j + int F_{j-1})`` and ``phi_0 = u0``, so the
factor is carried in closed form as ``F_j = phi_j^2``; no exponential of a
numerical integral is ever formed. The literal quadrature
``exp(-int 2 w_p^(j))`` is still evaluated and its deviation reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PartnerMismatchError, SingularBandError
from .grid import SampledFunction, cumulative_integral, pointwise
from .riccati import DEFAULT_REL_TOL, CrossRatio, RiccatiTriple, cross_ratio
from .schrodinger import WaveFunction, normalize, require_nodeless
from .susy import Superpotential, norm_integral, partner_deviation, witten_superpotential

PARTNER_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class HierarchyState:
    order: int
    fixed_lambdas: tuple
    w_particular: Superpotential
    F: SampledFunction
    amplitude: SampledFunction
    diagnostics: dict = field(default_factory=dict)


def quadrature_factor(w: Superpotential, reference: SampledFunction) -> SampledFunction:
    """``exp(-int 2 w)`` formed in log space, matched to ``reference`` at mid-grid."""
    logF = cumulative_integral(w.samples)
    logF = logF.with_values(-2.0 * logF.values)
    mid = w.grid.n // 2
    valid = logF.valid
    if not (valid[mid] and reference.valid[mid] and reference.values[mid] > 0):
        raise ValueError("mid-grid node unusable for rescaling the integration factor")
    shift = np.log(reference.values[mid]) - logF.values[mid]
    return logF.with_values(np.exp(logF.values + shift))


def _with_quadrature_check(state: HierarchyState) -> HierarchyState:
    quad = quadrature_factor(state.w_particular, state.F)
    both = quad.valid & state.F.valid
    state.diagnostics["quadrature_deviation"] = float(np.max(np.abs(quad.values[both] - state.F.values[both])))
    return state


def init_hierarchy(u0: WaveFunction) -> HierarchyState:
    require_nodeless(u0)
    norm_integral(u0)  # normalization check
    w_p = witten_superpotential(u0)
    F = SampledFunction(u0.grid, u0.values ** 2)
    return _with_quadrature_check(HierarchyState(0, (), w_p, F, u0.samples))


def _log_argument(state: HierarchyState, lam: float) -> SampledFunction:
    """``lam + int F`` checked for a sign change on the grid."""
    lam = float(lam)
    J = cumulative_integral(state.F, endpoint_correction=True)
    arg = J.with_values(J.values + lam)
    vals = arg.valid_values()
    if not (np.all(vals > 0) or np.all(vals < 0)):
        raise SingularBandError(
            lam, float(J.valid_values()[-1]), f"log argument crosses zero at hierarchy order {state.order + 1}"
        )
    return arg


def _next_correction(state: HierarchyState, lam: float) -> tuple[SampledFunction, SampledFunction]:
    arg = _log_argument(state, lam)
    step = pointwise(np.divide, state.F, arg)
    corr = pointwise(np.add, state.w_particular.correction, step)
    return corr.masked(state.w_particular.base.valid), arg


def extend(state: HierarchyState, lam_j: float) -> HierarchyState:
    """Fix one more parameter: order ``j -> j + 1``."""
    corr, arg = _next_correction(state, lam_j)
    base = state.w_particular.base
    chain = state.fixed_lambdas + (float(lam_j),)
    w = Superpotential(
        pointwise(np.add, base, corr), "particular", chain, state.w_particular.source_mode,
        base=base, correction=corr,
    )
    amplitude = pointwise(lambda p, a: p / np.abs(a), state.amplitude, arg)
    F = amplitude.with_values(amplitude.values ** 2)
    return _with_quadrature_check(HierarchyState(state.order + 1, chain, w, F, amplitude))


def general_at_order(state: HierarchyState, lam: float) -> Superpotential:
    """General solution on top of ``state``: only ``lam`` is free."""
    corr, _ = _next_correction(state, lam)
    base = state.w_particular.base
    return Superpotential(
        pointwise(np.add, base, corr), "general", state.fixed_lambdas + (float(lam),),
        state.w_particular.source_mode, base=base, correction=corr,
    )


def reconstruct_ground_state(w: Superpotential) -> WaveFunction:
    """Normalized ``exp(-int w)``, the zero mode of ``w^2 - w'``."""
    neglog = cumulative_integral(w.samples)
    expo = -neglog.values
    phi = neglog.with_values(np.exp(expo - np.max(expo[neglog.valid])))
    return WaveFunction(normalize(phi), 0.0, True)


def cross_order_invariant(
    w_i: Superpotential,
    t1: Superpotential,
    t2: Superpotential,
    t3: Superpotential,
    rel_tol: float = DEFAULT_REL_TOL,
    partner_tol: float = PARTNER_TOL,
) -> CrossRatio:
    """Cross-ratio for solutions of arbitrary hierarchy order.

    All four must share the fermionic partner of ``w_i`` within ``partner_tol``.
    """
    for name, t in (("t1", t1), ("t2", t2), ("t3", t3)):
        dev = partner_deviation(t, w_i)
        if not dev <= partner_tol:
            raise PartnerMismatchError(f"{name} has a different fermionic partner (deviation {dev:.3g})")
    return cross_ratio(w_i, RiccatiTriple(t1, t2, t3), rel_tol)
