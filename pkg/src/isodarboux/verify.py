"""End-to-end checks: isospectrality, partner uniqueness, ground-state
residuals and invariance of the scattering moduli under the deformation.

Only the direction "DDGR preserves |R| and |T|" is checked; no rival
isospectral construction is implemented.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import GridError, ScatteringError
from .grid import SampledFunction, pointwise
from .schrodinger import (
    WaveFunction,
    compute_spectrum,
    compute_zero_mode,
    discretize,
    shift_to_zero_ground,
)
from .susy import (
    FamilyMember,
    deformation_correction,
    deformed_potential,
    general_superpotential,
    hamiltonian_residual,
    partner_deviation,
    witten_superpotential,
)

DEFAULT_TOLERANCES = {
    "spectrum": 5e-3,
    "partner": 1e-4,
    "gs_residual": 1e-3,
    "scattering": 5e-4,
    "unitarity": 1e-4,
}


@dataclass(frozen=True)
class ScatteringData:
    k_wavenumber: float
    R: complex
    T: complex
    unitarity_defect: float


@dataclass(frozen=True)
class ScatteringDelta:
    k_wavenumber: float
    delta_R: float
    delta_T: float
    parent: ScatteringData
    deformed: ScatteringData


@dataclass
class VerificationReport:
    potential_id: str
    lambdas: list
    spectrum_deltas: dict = field(default_factory=dict)
    partner_deviation: dict = field(default_factory=dict)
    gs_residual: dict = field(default_factory=dict)
    scattering_deltas: dict = field(default_factory=dict)
    passed: bool = True
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    warnings: list = field(default_factory=list)
    parent_energies: list = field(default_factory=list)
    shift: float = 0.0
    # absolute rounding level of the eigenvalues, eps * ||H||
    spectral_noise: float = 0.0

    def max_spectrum_delta(self) -> float:
        vals = [d for deltas in self.spectrum_deltas.values() for d in deltas]
        return max(vals) if vals else 0.0

    def evaluate(self) -> bool:
        tol = self.tolerances
        checks = [d < tol["spectrum"] for ds in self.spectrum_deltas.values() for d in ds]
        checks += [d < tol["partner"] for d in self.partner_deviation.values()]
        checks += [d < tol["gs_residual"] for d in self.gs_residual.values()]
        for rows in self.scattering_deltas.values():
            checks += [r["delta_R"] < tol["scattering"] and r["delta_T"] < tol["scattering"] for r in rows]
        self.passed = all(checks)
        return self.passed

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("spectrum_deltas", "partner_deviation", "gs_residual", "scattering_deltas"):
            out[key] = {_lam_key(k): v for k, v in sorted(out[key].items())}
        return out


def _lam_key(lam: float) -> str:
    return format(float(lam), ".17g")


# -- spectra and partners ------------------------------------------------------

def prepare_zero_mode(V: SampledFunction, u0: WaveFunction | None) -> tuple[SampledFunction, WaveFunction]:
    """Shift ``V`` to zero ground energy and return the matching zero mode."""
    if u0 is None:
        u0 = compute_zero_mode(V)
        if V.meta.get("hard_walls"):
            u0 = WaveFunction(u0.samples.with_values(u0.values, hard_walls=True), u0.energy, u0.normalized)
    elif u0.grid != V.grid:
        raise GridError("zero mode and potential live on different grids")
    V_minus = shift_to_zero_ground(V, u0.energy)
    return V_minus, WaveFunction(u0.samples, 0.0, u0.normalized)


def isospectrality_report(
    V: SampledFunction,
    lambdas,
    levels: int = 5,
    tol: float = DEFAULT_TOLERANCES["spectrum"],
    u0: WaveFunction | None = None,
    potential_id: str = "custom",
) -> VerificationReport:
    """Compare the lowest ``levels`` eigenvalues of ``V`` and of each family member.

    ``V`` is the physical potential; it is shifted by the ground energy of
    ``u0`` (computed when not given) before deforming.
    """
    V_minus, zero = prepare_zero_mode(V, u0)
    report = VerificationReport(potential_id, [float(v) for v in lambdas])
    report.tolerances["spectrum"] = tol
    report.shift = float(V_minus.meta.get("shift", 0.0))
    H = discretize(V_minus)
    parent = compute_spectrum(H, levels).energies
    report.spectral_noise = float(np.finfo(float).eps * (np.max(np.abs(H.diag)) + 2.0 * abs(H.offdiag)))
    report.parent_energies = [float(e) for e in parent]
    edge = min(V_minus.values[0], V_minus.values[-1])
    if not V.meta.get("hard_walls") and edge <= parent[-1]:
        report.warnings.append(
            f"domain truncation: edge potential {edge:.6g} does not exceed level {levels - 1} "
            f"energy {parent[-1]:.6g}; Dirichlet walls may distort the requested levels"
        )
    for lam in report.lambdas:
        member = deformed_potential(V_minus, zero, lam)
        deformed = compute_spectrum(discretize(member.potential), levels).energies
        report.spectrum_deltas[lam] = [float(d) for d in np.abs(deformed - parent)]
        report.partner_deviation[lam] = member.diagnostics["partner_deviation"]
        report.gs_residual[lam] = member.diagnostics["gs_residual"]
        if member.diagnostics["near_singular"]:
            report.warnings.append(f"lambda = {lam:g} is within {member.diagnostics['singularity_margin']:.3g} of the singular band")
    report.evaluate()
    return report


def partner_uniqueness(u0: WaveFunction, lambdas) -> dict:
    """Max interior |V+(w_g(lam)) - V+(w_p)| for each ``lam``."""
    w_p = witten_superpotential(u0)
    return {float(lam): partner_deviation(general_superpotential(u0, lam, w_p), w_p) for lam in lambdas}


def ground_state_residual(member: FamilyMember) -> float:
    return hamiltonian_residual(member.potential, member.ground_state)


# -- scattering ------------------------------------------------------------------

def _numerov_coefficients(f: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    return 1.0 - h * h * f / 12.0, 2.0 + 10.0 * h * h * f / 12.0


def discrete_wavenumber(k: float, h: float) -> float:
    """Wavenumber of the exact Numerov plane wave at energy ``k^2`` with V = 0."""
    c, b = _numerov_coefficients(np.array([-k * k]), h)
    cos_qh = float(b[0] / (2.0 * c[0]))
    if not -1.0 < cos_qh < 1.0:
        raise ScatteringError(f"k = {k} is not resolved by grid spacing h = {h}")
    return math.acos(cos_qh) / h


def scattering_coefficients(V: SampledFunction, k_wavenumber: float, tol: float = 1e-6) -> ScatteringData:
    """Reflection and transmission amplitudes for a wave incident from the left.

    Numerov integration from ``x_max`` (pure transmitted wave) to ``x_min``,
    where the solution is split into incident and reflected waves. The
    asymptotic waves use the discrete Numerov dispersion, so a free
    propagation gives ``R = 0, T = 1`` to rounding.
    """
    k = float(k_wavenumber)
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    if V.mask is not None:
        raise GridError("potential must be fully valid")
    if abs(V.values[0]) >= tol or abs(V.values[-1]) >= tol:
        raise ScatteringError(
            f"potential is not flat at the grid edges (|V| = {abs(V.values[0]):.3g}, {abs(V.values[-1]):.3g})"
        )
    h, x = V.grid.h, V.grid.x
    q = discrete_wavenumber(k, h)
    c, b = _numerov_coefficients(V.values - k * k, h)
    n = V.grid.n
    psi = np.zeros(n, dtype=complex)
    psi[-1] = cmath.exp(1j * q * x[-1])
    psi[-2] = cmath.exp(1j * q * x[-2])
    scale = 1.0
    for i in range(n - 2, 0, -1):
        psi[i - 1] = (b[i] * psi[i] - c[i + 1] * psi[i + 1]) / c[i - 1]
        if abs(psi[i - 1]) > 1e200:
            psi[i - 1:] /= 1e200
            scale *= 1e200
    e0p, e1p = cmath.exp(1j * q * x[0]), cmath.exp(1j * q * x[1])
    e0m, e1m = cmath.exp(-1j * q * x[0]), cmath.exp(-1j * q * x[1])
    det = e0p * e1m - e1p * e0m
    A = (psi[0] * e1m - psi[1] * e0m) / det
    B = (e0p * psi[1] - e1p * psi[0]) / det
    if A == 0 or not cmath.isfinite(A):
        raise ScatteringError("incident amplitude vanished during integration")
    T = 1.0 / (A * scale)
    R = B / A
    defect = abs(abs(R) ** 2 + abs(T) ** 2 - 1.0)
    if defect > 10.0 * tol:
        raise ScatteringError(f"flux not conserved (defect {defect:.3g}); integration unreliable")
    return ScatteringData(k, complex(R), complex(T), float(defect))


def scattering_invariance(V: SampledFunction, u0: WaveFunction, lam: float, ks, tol: float = 1e-6) -> list:
    """``||R_lam| - |R||`` and ``||T_lam| - |T||`` per wavenumber.

    ``V`` is the physical (unshifted) short-range potential and ``u0`` its
    bound ground state; the deformation term is the same in either energy
    convention.
    """
    deformed = pointwise(np.add, V, deformation_correction(u0, lam))
    if deformed.mask is not None:
        raise ScatteringError("deformed potential has non-finite samples")
    if abs(deformed.values[0]) >= tol or abs(deformed.values[-1]) >= tol:
        raise ScatteringError("deformed potential is not short-range on this grid (bug-level failure)")
    rows = []
    for k in sorted(float(k) for k in ks):
        parent = scattering_coefficients(V, k, tol)
        member = scattering_coefficients(deformed, k, tol)
        rows.append(
            ScatteringDelta(
                k,
                abs(abs(member.R) - abs(parent.R)),
                abs(abs(member.T) - abs(parent.T)),
                parent,
                member,
            )
        )
    return rows


# -- convergence and the full suite ---------------------------------------------

CONVERGENCE_RATIO = 3.0
# deltas below this are rounding, not discretization error
CONVERGENCE_FLOOR = 1e-9


def refinement_ratios(coarse: VerificationReport, fine: VerificationReport, floor: float = CONVERGENCE_FLOOR) -> dict:
    """Worst coarse/fine ratio per metric; metrics at rounding level are skipped."""
    out = {}
    for key in ("spectrum_deltas", "partner_deviation", "gs_residual"):
        cut = floor
        if key == "spectrum_deltas":
            # the refined delta must stay clear of eigenvalue rounding
            cut = max(floor, 10.0 * CONVERGENCE_RATIO * fine.spectral_noise)
        ratios = []
        for lam, c in getattr(coarse, key).items():
            f = getattr(fine, key)[lam]
            pairs = zip(c, f) if isinstance(c, list) else [(c, f)]
            for a, b in pairs:
                if a > cut:
                    ratios.append(a / b if b > 0 else math.inf)
        if ratios:
            out[key] = float(min(ratios))
    return out


def verify_suite(
    resolve,
    grid,
    lambdas,
    levels: int = 5,
    tol: float = DEFAULT_TOLERANCES["spectrum"],
    ks=(),
    potential_id: str = "custom",
    scattering_tol: float = 1e-6,
) -> VerificationReport:
    """Isospectrality, partner and residual checks on ``grid`` and its refinement,
    plus scattering invariance when ``ks`` is given.

    ``resolve(grid)`` returns ``(V, u0)`` with ``u0`` possibly ``None``.
    A metric that fails to tighten by ``CONVERGENCE_RATIO`` under refinement
    produces a warning (the coarse grid is not in the asymptotic regime).
    """
    V, u0 = resolve(grid)
    report = isospectrality_report(V, lambdas, levels, tol, u0, potential_id)
    fine_grid = grid.refined()
    Vf, u0f = resolve(fine_grid)
    fine = isospectrality_report(Vf, lambdas, levels, tol, u0f, potential_id)
    for metric, ratio in sorted(refinement_ratios(report, fine).items()):
        if ratio < CONVERGENCE_RATIO:
            report.warnings.append(
                f"convergence: {metric} tightened only {ratio:.3g}x from n={grid.n} to n={fine_grid.n}"
            )
    # Richardson estimate of the second-order error in the parent levels
    est = max(abs(a - b) * 4.0 / 3.0 for a, b in zip(report.parent_energies, fine.parent_energies))
    if est > tol:
        report.warnings.append(
            f"convergence: coarse grid, estimated level discretization error {est:.3g} exceeds tolerance {tol:.3g}"
        )
    if ks:
        zero = u0 if u0 is not None else compute_zero_mode(V)
        for lam in report.lambdas:
            rows = scattering_invariance(V, zero, lam, ks, scattering_tol)
            report.scattering_deltas[lam] = [
                {
                    "k": r.k_wavenumber,
                    "delta_R": r.delta_R,
                    "delta_T": r.delta_T,
                    "unitarity_defect": max(r.parent.unitarity_defect, r.deformed.unitarity_defect),
                }
                for r in rows
            ]
    report.evaluate()
    return report
