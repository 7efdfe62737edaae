"""Finite-difference Schrodinger operator ``H = -D^2 + V`` (units hbar = 2m = 1).

The grid end nodes are Dirichlet walls (psi = 0); eigenproblems are solved on
the ``n - 2`` interior nodes and eigenvectors are padded with zeros.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, solveh_banded

from .errors import EigenSolverError, FactorizationEnergyError, GridError, NodalFunctionError, NumericalError
from .grid import Grid, SampledFunction, total_integral

DEGENERACY_GAP = 1e-8
RESIDUAL_TOL = 1e-8
_RESCALE_AT = 1e200


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Symmetric tridiagonal ``-D^2 + V``; ``diag[i] = 2/h^2 + V(x_i)``."""

    grid: Grid
    diag: np.ndarray
    offdiag: float

    @property
    def interior_diag(self) -> np.ndarray:
        return self.diag[1:-1]

    def apply(self, u: np.ndarray) -> np.ndarray:
        """``H u`` on the interior nodes, with ``u = 0`` beyond the walls."""
        out = self.diag * u
        out[1:] += self.offdiag * u[:-1]
        out[:-1] += self.offdiag * u[1:]
        return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    energies: np.ndarray
    grid: Grid

    @property
    def count(self) -> int:
        return len(self.energies)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    samples: SampledFunction
    energy: float
    normalized: bool = True

    @property
    def grid(self) -> Grid:
        return self.samples.grid

    @property
    def values(self) -> np.ndarray:
        return self.samples.values


def discretize(V: SampledFunction, grid: Grid | None = None) -> Hamiltonian:
    if grid is not None and grid != V.grid:
        raise GridError("potential is not sampled on the requested grid")
    if V.mask is not None or not np.all(np.isfinite(V.values)):
        raise GridError("potential must be finite and fully valid")
    h2 = V.grid.h ** 2
    diag = 2.0 / h2 + V.values
    diag.setflags(write=False)
    return Hamiltonian(V.grid, diag, -1.0 / h2)


def compute_spectrum(H: Hamiltonian, count: int) -> Spectrum:
    """Lowest ``count`` eigenvalues by Sturm-sequence bisection (LAPACK stebz)."""
    m = H.grid.n - 2
    if not 1 <= count <= m:
        raise ValueError(f"count must lie in [1, {m}], got {count}")
    d = H.interior_diag
    e = np.full(m - 1, H.offdiag)
    energies = eigvalsh_tridiagonal(
        d, e, select="i", select_range=(0, count - 1), lapack_driver="stebz"
    )
    energies = np.sort(energies)
    if count > 1 and np.any(np.diff(energies) <= 0.0):
        raise EigenSolverError("spectrum is not strictly increasing (degenerate levels)")
    energies.setflags(write=False)
    return Spectrum(energies, H.grid)


def sturm_count(H: Hamiltonian, energy: float) -> int:
    """Number of eigenvalues strictly below ``energy`` (LDL^T inertia count)."""
    e2 = H.offdiag ** 2
    tiny = np.finfo(float).tiny
    q = 1.0
    negatives = 0
    for i, d in enumerate(H.interior_diag):
        q = d - energy - (e2 / q if i else 0.0)
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            negatives += 1
    return negatives


def normalize(samples: SampledFunction) -> SampledFunction:
    norm2 = total_integral(samples.with_values(samples.values ** 2))
    if not norm2 > 0.0:
        raise NumericalError("cannot normalize a function with zero norm")
    return samples.with_values(samples.values / math.sqrt(norm2))


def wave_function(samples: SampledFunction, energy: float) -> WaveFunction:
    """Normalized, sign-fixed wave function from given (e.g. closed-form) samples."""
    vals = samples.valid_values()
    if vals.size and vals[np.argmax(np.abs(vals))] < 0:
        samples = samples.with_values(-samples.values)
    return WaveFunction(normalize(samples), float(energy), True)


def compute_zero_mode(V: SampledFunction, grid: Grid | None = None) -> WaveFunction:
    """Ground state by bisection (energy) and shifted inverse iteration (vector).

    The shift sits just below ``E0`` so ``H - shift`` is a positive-definite
    M-matrix: its Cholesky solves involve only sums of positive terms, which
    keeps the exponentially small tails positive and relatively accurate.
    """
    H = discretize(V, grid)
    spec = compute_spectrum(H, 2)
    e0, e1 = spec.energies
    gap = e1 - e0
    if gap <= DEGENERACY_GAP:
        raise EigenSolverError(f"ground level is degenerate (gap {gap:.3g})")
    shift = e0 - 1e-6 * gap
    m = H.grid.n - 2
    ab = np.empty((2, m))
    ab[0, 0] = 0.0
    ab[0, 1:] = H.offdiag
    ab[1] = H.interior_diag - shift
    u = np.ones(m)
    for _ in range(6):
        try:
            u = solveh_banded(ab, u, lower=False)
        except np.linalg.LinAlgError as exc:
            raise EigenSolverError("inverse iteration factorization failed") from exc
        u /= np.max(np.abs(u))
    full = np.zeros(H.grid.n)
    full[1:-1] = u
    scale = np.max(np.abs(H.diag))
    residual = np.max(np.abs(H.apply(full) - e0 * full)[1:-1]) / scale
    if not residual < RESIDUAL_TOL:
        raise EigenSolverError(f"ground-state residual {residual:.3g} did not converge")
    if np.any(full[1:-1] <= 0.0):
        raise EigenSolverError("ground state changes sign at interior nodes")
    samples = normalize(SampledFunction(H.grid, full))
    return WaveFunction(samples, float(e0), True)


def shift_to_zero_ground(V: SampledFunction, E0: float) -> SampledFunction:
    """``V - E0``; the accumulated shift is recorded in ``meta['shift']``."""
    return V.with_values(V.values - E0, shift=V.meta.get("shift", 0.0) + E0)


def shoot(V: SampledFunction, energy: float) -> tuple[np.ndarray, int]:
    """Numerov integration of ``-u'' + V u = energy u`` from ``x_min`` rightwards.

    Starts on the branch that decays towards the left wall when the edge is
    classically forbidden (otherwise ``u = 0`` at the wall). Large values are
    rescaled on the fly. Returns the samples (scaled to unit maximum) and the
    number of sign changes between consecutive nonzero interior samples.
    """
    h = V.grid.h
    f = V.values - energy
    c = 1.0 - h * h * f / 12.0
    b = 2.0 + 10.0 * h * h * f / 12.0
    n = V.grid.n
    u = np.zeros(n)
    if f[0] > 0.0:
        # growth factor of the exact discrete solution for constant f
        t = b[0] / (2.0 * c[0])
        u[0], u[1] = 1.0, t + math.sqrt(t * t - 1.0) if t > 1.0 else 1.0
    else:
        u[0], u[1] = 0.0, h
    for i in range(1, n - 1):
        u[i + 1] = (b[i] * u[i] - c[i - 1] * u[i - 1]) / c[i + 1]
        if abs(u[i + 1]) > _RESCALE_AT:
            u[: i + 2] /= _RESCALE_AT
    if not np.all(np.isfinite(u)):
        raise NumericalError("Numerov integration overflowed despite rescaling")
    peak = np.max(np.abs(u))
    if peak > 0:
        u /= peak
    inner = u[1:-1]
    signs = np.sign(inner[inner != 0.0])
    return u, int(np.count_nonzero(signs[1:] != signs[:-1]))


def solve_at_energy(
    V: SampledFunction, epsilon: float, ground_energy: float | None = None
) -> tuple[SampledFunction, bool]:
    """Solution of ``H u = epsilon u`` for a factorization energy below ``E0``.

    Returns the unnormalized samples and whether they are nodeless.
    """
    if ground_energy is None:
        ground_energy = float(compute_spectrum(discretize(V), 1).energies[0])
    if not epsilon < ground_energy:
        raise FactorizationEnergyError(
            f"factorization energy {epsilon!r} must be below the ground energy {ground_energy!r}"
        )
    u, changes = shoot(V, epsilon)
    return SampledFunction(V.grid, u, meta={"energy": epsilon}), changes == 0


def require_nodeless(u: WaveFunction) -> None:
    inner = u.values[1:-1]
    if np.any(~np.isfinite(inner)) or np.any(inner <= 0.0):
        raise NodalFunctionError("wave function must be strictly positive at interior nodes")
