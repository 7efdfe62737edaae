"""Command-line front end.

Every subcommand resolves one run manifest (catalog potential, grid,
parameters, tolerances), writes CSV/JSON files into ``--out-dir`` and exits
with 0 (pass), 1 (a verification check failed), 2 (usage or configuration
error, including an excluded lambda) or 3 (numerical failure).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .catalog import RunManifest, lookup, resolve_potential, write_csv, write_json
from .errors import CatalogError, IsoDarbouxError, NumericalError
from .grid import SampledFunction, build_grid, total_integral
from .multiparam import PARTNER_TOL, extend, init_hierarchy
from .riccati import RiccatiTriple, cross_ratio, lambda_cross_ratio, superpose
from .schrodinger import compute_spectrum, discretize, solve_at_energy
from .susy import (
    bosonic_from_superpotential,
    check_lambda,
    deformed_potential,
    fermionic_partner,
    general_superpotential,
    norm_integral,
    partner_deviation,
    witten_superpotential,
)
from .verify import (
    DEFAULT_TOLERANCES,
    prepare_zero_mode,
    scattering_coefficients,
    scattering_invariance,
    verify_suite,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

TOLERANCES = {
    **DEFAULT_TOLERANCES,
    "norm": 1e-6,
    "cross_ratio": 1e-6,
    "hierarchy_partner": PARTNER_TOL,
}
# which tolerance --tol overrides, per subcommand
PRIMARY_TOL = {
    "solve": "spectrum",
    "family": "partner",
    "partner": "partner",
    "superpose": "cross_ratio",
    "iterate": "hierarchy_partner",
    "verify": "spectrum",
    "scatter": "scattering",
}
DEFAULT_LAMBDAS = [0.5, 1.0, 5.0, -2.0]
DEFAULT_KS = [0.5, 1.0, 2.0]
CONFIG_KEYS = {
    "potential", "params", "source_path", "xmin", "xmax", "n", "lambdas", "levels",
    "tol", "ks", "k_override", "epsilon", "numeric_ground_state", "format",
}


class UsageError(IsoDarbouxError, ValueError):
    pass


@dataclass
class Run:
    command: str
    manifest: RunManifest
    out_dir: Path
    fmt: str
    levels: int
    ks: list
    k_override: float | None
    epsilon: float | None
    arrays: dict = field(default_factory=dict)

    @property
    def tol(self) -> dict:
        return self.manifest.tolerances

    def emit(self, stem: str, x: np.ndarray, columns: dict) -> None:
        """CSV file, or an entry of the JSON payload with ``--format json``."""
        if self.fmt == "csv":
            name = f"{stem}.csv"
            write_csv(self.out_dir / name, x, columns)
            self.manifest.outputs.append(name)
        else:
            self.arrays[stem] = {"x": x, **columns}

    def finish(self, payload: dict, passed: bool) -> int:
        name = f"{self.command}.json"
        self.manifest.outputs.append(name)
        body = {"command": self.command, "passed": passed, "manifest": self.manifest.to_dict(), **payload}
        if self.arrays:
            body["arrays"] = self.arrays
        write_json(self.out_dir / name, body)
        print(f"{self.command}: {'PASS' if passed else 'FAIL'} -> {self.out_dir / name}")
        return EXIT_OK if passed else EXIT_FAIL


def _lam_tag(lam: float) -> str:
    return format(float(lam), ".17g")


def _parse_param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"parameter {key!r} needs a number") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration; flags override it")
    common.add_argument("--potential", help="catalog name or 'tabulated'")
    common.add_argument("--param", action="append", type=_parse_param, default=None, metavar="K=V")
    common.add_argument("--table", dest="source_path", help="CSV file for tabulated potentials")
    common.add_argument("--xmin", type=float)
    common.add_argument("--xmax", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--lambda", dest="lambdas", action="append", type=float, default=None)
    common.add_argument("--levels", type=int)
    common.add_argument("--tol", type=float, help="primary tolerance of the subcommand")
    common.add_argument("--out-dir", type=Path, default=Path("."))
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--numeric-ground-state", action="store_true", default=None,
                        help="ignore closed-form ground states and use the discrete one")
    parser = argparse.ArgumentParser(prog="isodarboux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="spectrum and ground state")
    p.add_argument("--epsilon", type=float, help="also solve at this factorization energy")
    sub.add_parser("family", parents=[common], help="isospectral family members per lambda")
    sub.add_parser("partner", parents=[common], help="superpotential and both partners")
    p = sub.add_parser("superpose", parents=[common], help="cross-ratio of a lambda quadruple")
    p.add_argument("--k-override", type=float, help="rebuild with this cross-ratio instead of the measured one")
    sub.add_parser("iterate", parents=[common], help="multi-parameter hierarchy along the lambda chain")
    p = sub.add_parser("verify", parents=[common], help="full verification report")
    p.add_argument("--k", dest="ks", action="append", type=float, default=None)
    p = sub.add_parser("scatter", parents=[common], help="reflection and transmission amplitudes")
    p.add_argument("--k", dest="ks", action="append", type=float, default=None)
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    unknown = sorted(set(cfg) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys {unknown}")
    return cfg


def make_run(args: argparse.Namespace) -> Run:
    cfg = _load_config(args.config)

    def pick(name, default=None):
        value = getattr(args, name, None)
        return cfg.get(name, default) if value is None else value

    name = pick("potential")
    if not name:
        raise UsageError("no potential given (--potential or config 'potential')")
    params = dict(cfg.get("params", {}))
    params.update(dict(args.param or []))
    spec, grid = lookup(name, params, pick("source_path"))
    if pick("numeric_ground_state", False):
        spec = replace(spec, analytic_ground_state=False)
    xmin, xmax, n = pick("xmin", grid.x_min), pick("xmax", grid.x_max), pick("n", grid.n)
    grid = build_grid(xmin, xmax, int(n))
    lambdas = [float(v) for v in pick("lambdas", [])]
    tolerances = dict(TOLERANCES)
    tol = pick("tol")
    if tol is not None:
        if not float(tol) > 0:
            raise UsageError("--tol must be positive")
        tolerances[PRIMARY_TOL[args.command]] = float(tol)
    fmt = pick("format", "csv")
    if fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {fmt!r}")
    levels = int(pick("levels", 5))
    if levels < 1:
        raise UsageError("--levels must be at least 1")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(spec, grid, 0.0, lambdas, tolerances)
    ks = [float(k) for k in pick("ks", [])]
    k_override = pick("k_override")
    epsilon = pick("epsilon")
    return Run(
        args.command, manifest, out_dir, fmt, levels, ks,
        None if k_override is None else float(k_override),
        None if epsilon is None else float(epsilon),
    )


def _setup(run: Run):
    """Physical potential, shifted potential and zero mode; validates every lambda."""
    V, u0 = resolve_potential(run.manifest.spec, run.manifest.grid)
    V_minus, zero = prepare_zero_mode(V, u0)
    run.manifest.shift = float(V_minus.meta["shift"])
    total = float(norm_integral(zero).valid_values()[-1])
    for lam in run.manifest.lambdas:
        check_lambda(lam, total)
    return V, V_minus, zero


def _values(f: SampledFunction) -> np.ndarray:
    return np.where(f.valid, f.values, np.nan)


# -- subcommands -------------------------------------------------------------------

def cmd_solve(run: Run) -> int:
    V, V_minus, zero = _setup(run)
    x = V.grid.x
    energies = compute_spectrum(discretize(V), run.levels).energies
    run.emit("potential", x, {"value": V.values})
    run.emit("ground_state", x, {"value": zero.values})
    payload = {"energies": energies, "shift": run.manifest.shift}
    edge = min(V.values[0], V.values[-1])
    payload["truncation_ok"] = bool(V.meta.get("hard_walls") or edge > energies[-1])
    passed = True
    if run.epsilon is not None:
        u, nodeless = solve_at_energy(V, run.epsilon, float(energies[0]))
        run.emit("factorization_solution", x, {"value": u.values})
        payload["factorization"] = {"epsilon": run.epsilon, "nodeless": nodeless}
        passed = nodeless
    return run.finish(payload, passed)


def cmd_family(run: Run) -> int:
    V, V_minus, zero = _setup(run)
    x = V.grid.x
    w_p = witten_superpotential(zero)
    run.emit("parent_potential", x, {"value": V_minus.values})
    run.emit("parent_ground_state", x, {"value": zero.values})
    run.emit("parent_superpotential", x, {"value": _values(w_p.samples)})
    tol = run.tol
    diagnostics, warnings, passed = {}, [], True
    for lam in sorted(run.manifest.lambdas):
        member = deformed_potential(V_minus, zero, lam)
        w_g = general_superpotential(zero, lam, w_p)
        tag = f"family_lambda_{_lam_tag(lam)}"
        run.emit(tag, x, {"value": member.potential.values})
        run.emit(f"{tag}_ground_state", x, {"value": member.ground_state.values})
        run.emit(f"{tag}_superpotential", x, {"value": _values(w_g.samples)})
        d = member.diagnostics
        ok = d["partner_deviation"] < tol["partner"] and d["gs_residual"] < tol["gs_residual"] and d["norm_error"] < tol["norm"]
        if d["near_singular"]:
            warnings.append(f"lambda = {lam:g} is near the singular band (margin {d['singularity_margin']:.3g})")
        diagnostics[_lam_tag(lam)] = {**d, "passed": ok}
        passed &= ok
    return run.finish({"diagnostics": diagnostics, "warnings": warnings, "shift": run.manifest.shift}, passed)


def cmd_partner(run: Run) -> int:
    V, V_minus, zero = _setup(run)
    x = V.grid.x
    w_p = witten_superpotential(zero)
    V_plus = fermionic_partner(w_p)
    rebuilt = bosonic_from_superpotential(w_p)
    run.emit("superpotential", x, {"value": _values(w_p.samples)})
    run.emit("partner_plus", x, {"value": _values(V_plus)})
    run.emit("partner_minus", x, {"value": _values(rebuilt)})
    deviations = {
        _lam_tag(lam): partner_deviation(general_superpotential(zero, lam, w_p), w_p)
        for lam in sorted(run.manifest.lambdas)
    }
    passed = all(d < run.tol["partner"] for d in deviations.values())
    return run.finish({"partner_deviation": deviations}, passed)


def cmd_superpose(run: Run) -> int:
    lams = run.manifest.lambdas
    if len(lams) != 4:
        raise UsageError("superpose needs exactly four --lambda values: lambda, lambda1, lambda2, lambda3")
    V, V_minus, zero = _setup(run)
    k_closed = lambda_cross_ratio(*lams)
    w_p = witten_superpotential(zero)
    w, w1, w2, w3 = (general_superpotential(zero, lam, w_p) for lam in lams)
    triple = RiccatiTriple(w1, w2, w3)
    cr = cross_ratio(w, triple)
    k_used = cr.k_estimate if run.k_override is None else run.k_override
    rebuilt = superpose(triple, k_used)
    run.emit("superpose", V.grid.x, {
        "w1": _values(w1.samples),
        "w2": _values(w2.samples),
        "w3": _values(w3.samples),
        "w": _values(w.samples),
        "w_superposed": _values(rebuilt.samples),
    })
    payload = {
        "k_estimate": cr.k_estimate,
        "k_closed_form": k_closed,
        "k_used": k_used,
        "constancy": cr.constancy,
        "valid_fraction": cr.valid_fraction,
    }
    tol = run.tol["cross_ratio"]
    passed = cr.constancy < tol and abs(cr.k_estimate - k_closed) < tol
    if run.k_override is None:
        both = rebuilt.samples.valid & w.samples.valid
        err = float(np.max(np.abs(rebuilt.values[both] - w.values[both])))
        payload["reconstruction_error"] = err
        passed &= err < tol
    return run.finish(payload, passed)


def cmd_iterate(run: Run) -> int:
    V, V_minus, zero = _setup(run)
    x = V.grid.x
    state = init_hierarchy(zero)
    w_p = state.w_particular
    orders = {"0": {"quadrature_deviation": state.diagnostics["quadrature_deviation"], "partner_deviation": 0.0}}
    passed = True
    for lam in run.manifest.lambdas:
        state = extend(state, lam)
        dev = partner_deviation(state.w_particular, w_p)
        tag = f"iterate_order_{state.order}"
        run.emit(f"{tag}_superpotential", x, {"value": _values(state.w_particular.samples)})
        run.emit(f"{tag}_potential", x, {"value": _values(bosonic_from_superpotential(state.w_particular))})
        run.emit(f"{tag}_factor", x, {"value": _values(state.F)})
        orders[str(state.order)] = {
            "lambda_chain": state.fixed_lambdas,
            "partner_deviation": dev,
            "quadrature_deviation": state.diagnostics["quadrature_deviation"],
            "factor_total": total_integral(state.F),
        }
        passed &= dev < run.tol["hierarchy_partner"]
    return run.finish({"orders": orders}, passed)


def cmd_verify(run: Run) -> int:
    spec = run.manifest.spec
    if not run.manifest.lambdas:
        run.manifest.lambdas = list(DEFAULT_LAMBDAS)
    _setup(run)
    report = verify_suite(
        lambda g: resolve_potential(spec, g),
        run.manifest.grid,
        run.manifest.lambdas,
        run.levels,
        run.tol["spectrum"],
        ks=run.ks,
        potential_id=spec.name,
    )
    for key in ("partner", "gs_residual", "scattering"):
        report.tolerances[key] = run.tol[key]
    report.evaluate()
    for line in report.warnings:
        print(f"warning: {line}", file=sys.stderr)
    return run.finish({"report": report.to_dict()}, report.passed)


def cmd_scatter(run: Run) -> int:
    ks = sorted(run.ks or DEFAULT_KS)
    V, V_minus, zero = _setup(run)
    unit_tol = run.tol["unitarity"]
    parent = {}
    passed = True
    for k in ks:
        s = scattering_coefficients(V, k)
        parent[format(k, ".17g")] = {"R": s.R, "T": s.T, "unitarity_defect": s.unitarity_defect}
        passed &= s.unitarity_defect < unit_tol
    deltas = {}
    for lam in sorted(run.manifest.lambdas):
        rows = scattering_invariance(V, zero, lam, ks)
        deltas[_lam_tag(lam)] = {
            format(r.k_wavenumber, ".17g"): {
                "delta_R": r.delta_R,
                "delta_T": r.delta_T,
                "R": r.deformed.R,
                "T": r.deformed.T,
                "unitarity_defect": r.deformed.unitarity_defect,
            }
            for r in rows
        }
        for r in rows:
            passed &= max(r.delta_R, r.delta_T) < run.tol["scattering"] and r.deformed.unitarity_defect < unit_tol
    return run.finish({"parent": parent, "invariance": deltas}, passed)


COMMANDS = {
    "solve": cmd_solve,
    "family": cmd_family,
    "partner": cmd_partner,
    "superpose": cmd_superpose,
    "iterate": cmd_iterate,
    "verify": cmd_verify,
    "scatter": cmd_scatter,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = make_run(args)
        return COMMANDS[args.command](run)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
