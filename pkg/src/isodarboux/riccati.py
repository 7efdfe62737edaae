"""Nonlinear superposition for Riccati solutions sharing one fermionic partner.

Any four solutions ``w, w1, w2, w3`` of one Riccati equation have an
x-independent cross-ratio

    k = (w - w1)(w3 - w2) / ((w - w2)(w3 - w1)),

so ``k = 0`` at ``w = w1``, ``k = 1`` at ``w = w3`` and ``k = inf`` at
``w = w2``. :func:`superpose` is the exact inverse of :func:`cross_ratio`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfigurationError
from .grid import SampledFunction, cumulative_integral, derivative, same_grid
from .schrodinger import WaveFunction
from .susy import Superpotential, check_lambda, deformation_term

EPS = np.finfo(float).eps
DEFAULT_REL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CrossRatio:
    pointwise: SampledFunction
    k_estimate: float
    constancy: float
    valid_fraction: float
    k_mean: float


@dataclass(frozen=True, eq=False)
class RiccatiTriple:
    w1: Superpotential
    w2: Superpotential
    w3: Superpotential

    def __post_init__(self):
        members = (self.w1, self.w2, self.w3)
        same_grid(*(m.samples for m in members))
        for i in range(3):
            for j in range(i + 1, 3):
                if _identical(members[i], members[j]):
                    raise DegenerateConfigurationError(
                        f"triple members {i + 1} and {j + 1} coincide "
                        f"(lambda chain {members[i].lambda_chain})"
                    )

    def __iter__(self):
        return iter((self.w1, self.w2, self.w3))


def _identical(a: Superpotential, b: Superpotential) -> bool:
    if a is b:
        return True
    if a.lambda_chain and a.lambda_chain == b.lambda_chain and a.kind == b.kind:
        return True
    return bool(np.array_equal(a.values, b.values, equal_nan=True))


def _difference(a: Superpotential, b: Superpotential) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``a - b`` with a rounding floor and validity.

    Members built on the same Witten base are subtracted through their
    corrections so exponentially small differences survive.
    """
    if a.base is not None and a.base is b.base:
        x, y = a.correction, b.correction
    else:
        x, y = a.samples, b.samples
    valid = a.samples.valid & b.samples.valid & x.valid & y.valid
    with np.errstate(invalid="ignore"):
        diff = x.values - y.values
        floor = 8.0 * EPS * (np.abs(x.values) + np.abs(y.values))
    return diff, floor, valid


def _ratio(d1, d2, d31, d32, floors, valid, grid, rel_tol) -> CrossRatio:
    """Pointwise ``d1 d32 / (d2 d31)`` with near-degenerate nodes masked."""
    with np.errstate(all="ignore"):
        scale = np.maximum.reduce([np.abs(d1), np.abs(d2), np.abs(d31), np.abs(d32)])
        ok = valid.copy()
        for d, fl in zip((d2, d31, d32), floors[1:]):
            ok &= np.abs(d) > np.maximum(fl, rel_tol * scale)
        # a numerator lost in rounding cannot be told apart from zero
        ok &= (np.abs(d1) > floors[0]) | (d1 == 0.0)
        k = d1 * d32 / (d2 * d31)
    ok &= np.isfinite(k)
    if not ok.any():
        raise DegenerateConfigurationError("cross-ratio undefined at every node")
    vals = k[ok]
    est = float(np.median(vals))
    return CrossRatio(
        pointwise=SampledFunction(grid, np.where(ok, k, np.nan), ok),
        k_estimate=est,
        constancy=float(np.max(np.abs(vals - est))),
        valid_fraction=float(ok.sum() / grid.n),
        k_mean=float(np.mean(vals)),
    )


def cross_ratio(w: Superpotential, triple: RiccatiTriple, rel_tol: float = DEFAULT_REL_TOL) -> CrossRatio:
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    grid = same_grid(w.samples, triple.w1.samples)
    w1, w2, w3 = triple
    parts = [_difference(w, w1), _difference(w, w2), _difference(w3, w1), _difference(w3, w2)]
    valid = np.logical_and.reduce([p[2] for p in parts])
    return _ratio(*(p[0] for p in parts), [p[1] for p in parts], valid, grid, rel_tol)


def superpose(triple: RiccatiTriple, k: float, rel_tol: float = DEFAULT_REL_TOL) -> Superpotential:
    """General solution with cross-ratio ``k`` relative to ``triple``.

    ``w = w1 + k (w2 - w1)(w3 - w1) / (k (w3 - w1) - (w3 - w2))``; nodes where
    the denominator is lost in rounding or below ``rel_tol`` times its terms
    are masked.
    """
    w1, w2, w3 = triple
    k = float(k)
    d21, f21, v21 = _difference(w2, w1)
    d31, f31, v31 = _difference(w3, w1)
    d32, f32, v32 = _difference(w3, w2)
    valid = v21 & v31 & v32
    with np.errstate(all="ignore"):
        den = k * d31 - d32
        den_scale = np.abs(k * d31) + np.abs(d32)
        den_floor = abs(k) * f31 + f32
        ok = valid & (np.abs(den) > np.maximum(den_floor, rel_tol * den_scale))
        delta = k * d21 * d31 / den
    # k = 0 is w1 itself, whatever the denominator does
    if k == 0.0:
        delta = np.zeros_like(d21)
        ok = valid.copy()
    ok &= np.isfinite(delta)
    if not ok.any():
        raise DegenerateConfigurationError("superposition denominator vanishes at every node")
    grid = w1.grid
    shared = w1.base is not None and w1.base is w2.base is w3.base
    if shared:
        corr = np.where(ok, w1.correction.values + delta, np.nan)
        values = w1.base.values + corr
        correction = SampledFunction(grid, corr, ok)
        base = w1.base
    else:
        values = np.where(ok, w1.values + delta, np.nan)
        correction = base = None
    samples = SampledFunction(grid, values, ok, {"k": k})
    return Superpotential(samples, "general", (), w1.source_mode, base=base, correction=correction)


def lambda_cross_ratio(lam: float, lam1: float, lam2: float, lam3: float) -> float:
    """Closed-form cross-ratio of four family members in terms of their parameters."""
    values = [check_lambda(v) for v in (lam, lam1, lam2, lam3)]
    if len(set(values)) < 4:
        raise DegenerateConfigurationError(f"parameters must be pairwise distinct, got {values}")
    lam, lam1, lam2, lam3 = values
    return (lam1 - lam) * (lam2 - lam3) / ((lam2 - lam) * (lam1 - lam3))


def lambda_form_invariant(
    u0: WaveFunction,
    lam: float,
    lam1: float,
    lam2: float,
    lam3: float,
    rel_tol: float = DEFAULT_REL_TOL,
    form: str = "sigma",
) -> CrossRatio:
    """Cross-ratio of the deformation terms ``sigma(lam_i) = D ln(I0 + lam_i)``.

    ``form="sigma"`` uses the terms directly. ``form="integral"`` rebuilds each
    term as the running integral (from ``x_min``, where every term vanishes)
    of its own derivative; the shared anchor constant cancels in the ratio.
    """
    lams = (lam, lam1, lam2, lam3)
    if len({float(v) for v in lams}) < 4:
        raise DegenerateConfigurationError(f"parameters must be pairwise distinct, got {lams}")
    sigmas = [deformation_term(u0, v) for v in lams]
    if form == "sigma":
        arrays = [s.values for s in sigmas]
        valid = np.logical_and.reduce([s.valid for s in sigmas])
        noise = None
    elif form == "integral":
        rebuilt = [cumulative_integral(derivative(s)) for s in sigmas]
        arrays = [r.values for r in rebuilt]
        valid = np.logical_and.reduce([r.valid for r in rebuilt])
        # running sums carry absolute rounding relative to their largest value
        noise = 64.0 * EPS * max(r.max_abs() for r in rebuilt)
    else:
        raise ValueError(f"unknown form {form!r}")
    s, s1, s2, s3 = arrays
    pairs = [(s, s1), (s, s2), (s3, s1), (s3, s2)]
    with np.errstate(invalid="ignore"):
        diffs = [a - b for a, b in pairs]
        floors = [8.0 * EPS * (np.abs(a) + np.abs(b)) for a, b in pairs]
    if noise is not None:
        floors = [np.maximum(f, noise) for f in floors]
    return _ratio(*diffs, floors, valid, u0.grid, rel_tol)
