"""Command-line surface: simulate, analyze, canonicalize, filter, ecf.

Every command is deterministic given its inputs; seeds come from the config
(or the COINTSSM_SEED environment variable), never the wall clock. Exit
codes: 0 success, 2 validation failure, 3 numeric/convergence failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import ecf as ecf_mod
from . import kalman, matops, moments, simulate
from .cointegration import check_cointegration, cointegration_space
from .errors import ComputationError, ModelInputError, ValidationError
from .model import CointCanonicalForm, McarmaModel
from .modeldoc import (
    canonical_to_doc,
    complex_pairs,
    dump_json,
    load_document,
    mat_to_list,
    parse_document,
    parse_sampling,
    to_canonical,
)
from .realization import canonicalize, mcarma_to_ss

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: str, header: list[str], rows: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read_path_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a simulated-path CSV; returns (times, observations)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ValidationError(f"cannot read path CSV {path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"malformed path CSV {path}: {exc}") from exc
    if not header or header[0] != "t":
        raise ValidationError(f"path CSV {path} must start with a 't' column")
    y_cols = [i for i, name in enumerate(header) if name.startswith("y_")]
    if not y_cols:
        raise ValidationError(f"path CSV {path} has no y_* columns")
    if data.shape[0] < 2:
        raise ValidationError(f"path CSV {path} needs at least two rows")
    return data[:, 0], data[:, y_cols]


def _sidecar_path(csv_path: str) -> str:
    if csv_path.endswith(".csv"):
        return csv_path[:-4] + ".json"
    return csv_path + ".json"


def _load_canonical(config_path: str) -> tuple[CointCanonicalForm, dict]:
    doc = load_document(config_path)
    mod = parse_document(doc)
    return to_canonical(mod), doc


def cmd_simulate(args) -> int:
    cf, doc = _load_canonical(args.config)
    opts = parse_sampling(doc)
    sm = moments.discretize(cf, opts.h)
    if cf.levy.kind == "brownian":
        ps = simulate.simulate_exact_gaussian(
            sm, cf, opts.n_steps, x1_0=opts.x1_0, seed=opts.seed
        )
    else:
        ps = simulate.simulate_levy_euler(
            cf, opts.h, opts.n_steps, refinement=opts.refinement,
            x1_0=opts.x1_0, burn_in=opts.burn_in, seed=opts.seed,
        )
    d, c, n2 = cf.d, cf.c, cf.n2
    header = ["t"] + [f"y_{i+1}" for i in range(d)]
    cols = [ps.times[:, None], ps.y]
    if args.columns == "full":
        header += [f"x1_{i+1}" for i in range(c)]
        header += [f"x2_{i+1}" for i in range(n2)]
        header += [f"r1_{i+1}" for i in range(c)]
        cols += [ps.x1, ps.x2, ps.r1]
    _write_csv(args.output, header, np.hstack(cols))
    sidecar = {
        "seed": ps.seed,
        "driver_kind": ps.driver_kind,
        "h": sm.h,
        "c": sm.c,
        "eAh": mat_to_list(sm.eAh),
        "sigma_tilde": mat_to_list(sm.sigma_tilde),
        "gamma0": mat_to_list(sm.gamma0),
    }
    with open(_sidecar_path(args.output), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json(sidecar))
    return EXIT_OK


def _coint_report_doc(report) -> dict:
    return {
        "is_cointegrated": report.is_cointegrated,
        "condition_a": report.condition_a,
        "offending_roots": complex_pairs(report.offending_roots),
        "condition_b": report.condition_b,
        "r": report.r,
        "alpha": None if report.alpha is None else mat_to_list(report.alpha),
        "beta": None if report.beta is None else mat_to_list(report.beta),
        "condition_c": report.condition_c,
        "transversality_rank": report.transversality_rank,
        "roots": complex_pairs(report.roots),
    }


def cmd_analyze(args) -> int:
    doc = load_document(args.config)
    mod = parse_document(doc)
    out: dict = {"model_kind": doc["model_kind"]}
    if isinstance(mod, McarmaModel):
        out["cointegration"] = _coint_report_doc(check_cointegration(mod, args.rank_tol))
        cf = to_canonical(mod) if out["cointegration"]["is_cointegrated"] else None
    else:
        cf = to_canonical(mod)
    if cf is not None:
        out["canonical_form"] = canonical_to_doc(cf)
        out["c"] = cf.c
        if 0 < cf.c < cf.d:
            out["cointegration_space"] = mat_to_list(cointegration_space(cf))
    if args.moments:
        if cf is None:
            raise ValidationError("--moments needs a model with a canonical form")
        t_grid = [float(v) for v in args.t_grid.split(",")]
        s_grid = [float(v) for v in args.s_grid.split(",")]
        lines = ["t,s," + ",".join(
            f"cov_{i+1}_{j+1}" for i in range(cf.d) for j in range(cf.d)
        )]
        for t in t_grid:
            for s in s_grid:
                cov = moments.cov_continuous(cf, t, s)
                lines.append(",".join([_fmt(t), _fmt(s)] + [_fmt(v) for v in cov.ravel()]))
        out["moments_csv"] = "\n".join(lines) + "\n"
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(out["moments_csv"])
    sys.stdout.write(dump_json(out))
    return EXIT_OK


def cmd_canonicalize(args) -> int:
    doc = load_document(args.config)
    mod = parse_document(doc)
    if isinstance(mod, McarmaModel):
        mod = mcarma_to_ss(mod)
    if isinstance(mod, CointCanonicalForm):
        cf, T = mod, np.eye(mod.N)
    else:
        cf, T = canonicalize(mod)
    out = {
        "canonical_form": canonical_to_doc(cf),
        "transform": mat_to_list(T),
        "c": cf.c,
    }
    sys.stdout.write(dump_json(out))
    return EXIT_OK


def _infer_h(times: np.ndarray) -> float:
    steps = np.diff(times)
    if steps.size == 0 or np.any(steps <= 0):
        raise ValidationError("path CSV times must be strictly increasing")
    h = float(steps[0])
    if np.max(np.abs(steps - h)) > 1e-9 * max(1.0, h):
        raise ValidationError("path CSV must be sampled on a uniform grid")
    return h


def cmd_filter(args) -> int:
    cf, _ = _load_canonical(args.model)
    times, y = _read_path_csv(args.path)
    if y.shape[1] != cf.d:
        raise ValidationError(
            f"path has {y.shape[1]} observation columns, model has d={cf.d}"
        )
    h = args.h if args.h is not None else _infer_h(times)
    sm = moments.discretize(cf, h)
    ks = kalman.solve_steady_state(sm, cf, tol=args.riccati_tol)
    eps, _ = kalman.filter_innovations(ks, sm, y)
    header = ["t"] + [f"eps_{i+1}" for i in range(cf.d)]
    _write_csv(args.output_prefix + "_innovations.csv", header,
               np.hstack([times[:, None], eps]))
    solution = {
        "h": sm.h,
        "omega": mat_to_list(ks.omega),
        "gain": mat_to_list(ks.gain),
        "v": mat_to_list(ks.v),
        "iterations": ks.iterations,
        "residual": ks.residual,
        "rho_closed_loop": ks.spectral_radius,
    }
    with open(args.output_prefix + "_solution.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json(solution))
    return EXIT_OK


def cmd_ecf(args) -> int:
    cf, doc = _load_canonical(args.model)
    opts = parse_sampling(doc)
    times = y = None
    if args.path:
        times, y = _read_path_csv(args.path)
        if y.shape[1] != cf.d:
            raise ValidationError(
                f"path has {y.shape[1]} observation columns, model has d={cf.d}"
            )
    h = args.h if args.h is not None else (_infer_h(times) if times is not None else opts.h)
    sm = moments.discretize(cf, h)
    ks = kalman.solve_steady_state(sm, cf, tol=args.riccati_tol)
    dec = ecf_mod.ma_and_ktilde_coeffs(ks, sm, args.J, rel_tol=args.rank_tol)
    check = ecf_mod.structural_check(ks, sm, cf)
    out = {
        "h": sm.h,
        "truncation": dec.truncation,
        "tail_bound": dec.tail_bound,
        "k1": mat_to_list(dec.k1),
        "alpha": mat_to_list(dec.alpha),
        "beta": mat_to_list(dec.beta),
        "r": dec.r,
        "L_norms": [float(np.linalg.norm(L)) for L in dec.L_coeffs],
        "Ktilde_norms": [float(np.linalg.norm(K)) for K in dec.Ktilde_coeffs],
        "structural_check": {
            "idempotency_defect": check.idempotency_defect,
            "projector_rank": check.projector_rank,
            "k1_reconstruction_error": check.k1_reconstruction_error,
            "ok": check.ok,
        },
    }
    if y is not None:
        eps_kalman, _ = kalman.filter_innovations(ks, sm, y)
        eps_ecf = ecf_mod.ecf_residuals(dec, y, args.J)
        gap = float(np.max(np.abs(eps_ecf - eps_kalman[args.J + 1:])))
        out["max_residual_gap"] = gap
        white = ecf_mod.whiteness_diagnostic(eps_ecf, max_lag=10)
        out["whiteness"] = {
            "passed": white.passed,
            "degenerate": white.degenerate,
            "band": white.band,
            "max_abs": white.max_abs,
        }
        if args.residuals_out:
            header = ["t"] + [f"eps_{i+1}" for i in range(cf.d)]
            _write_csv(args.residuals_out, header,
                       np.hstack([times[args.J + 1:, None], eps_ecf]))
    sys.stdout.write(dump_json(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cointssm",
        description="Cointegrated continuous-time state-space models: "
                    "simulation, analysis, Kalman filtering and error correction forms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tols(p):
        p.add_argument("--rank-tol", type=float, default=matops.RANK_REL_TOL,
                       help="relative tolerance for rank decisions")
        p.add_argument("--riccati-tol", type=float, default=kalman.RICCATI_TOL,
                       help="relative convergence tolerance of the Riccati iteration")

    p_sim = sub.add_parser("simulate", help="simulate a path of the sampled model")
    p_sim.add_argument("config", help="model document (JSON)")
    p_sim.add_argument("-o", "--output", required=True, help="output CSV path")
    p_sim.add_argument("--columns", choices=("y", "full"), default="y",
                       help="emit observations only or also states and unit-root noise")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="cointegration report / canonical structure")
    p_an.add_argument("config", help="model document (JSON)")
    p_an.add_argument("--moments", action="store_true",
                      help="also evaluate the closed-form covariance on a (t, s) grid")
    p_an.add_argument("--t-grid", default="0,1,2", help="comma separated t values")
    p_an.add_argument("--s-grid", default="0,1", help="comma separated s values")
    p_an.add_argument("--output", default=None, help="write the moments CSV here")
    add_tols(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_can = sub.add_parser("canonicalize", help="unique decoupled canonical form")
    p_can.add_argument("config", help="model document (JSON)")
    add_tols(p_can)
    p_can.set_defaults(func=cmd_canonicalize)

    p_fil = sub.add_parser("filter", help="steady state Kalman filter over a path CSV")
    p_fil.add_argument("model", help="model document (JSON)")
    p_fil.add_argument("path", help="path CSV with t and y_* columns")
    p_fil.add_argument("-o", "--output-prefix", required=True,
                       help="prefix for _innovations.csv and _solution.json")
    p_fil.add_argument("--h", type=float, default=None,
                       help="override the sampling step inferred from the CSV")
    add_tols(p_fil)
    p_fil.set_defaults(func=cmd_filter)

    p_ecf = sub.add_parser("ecf", help="error correction decomposition report")
    p_ecf.add_argument("model", help="model document (JSON)")
    p_ecf.add_argument("--path", default=None, help="optional path CSV for residual checks")
    p_ecf.add_argument("--J", type=int, default=ecf_mod.DEFAULT_TRUNCATION,
                       help="filter truncation order")
    p_ecf.add_argument("--h", type=float, default=None,
                       help="sampling step (default: CSV grid or the document's sampling block)")
    p_ecf.add_argument("--residuals-out", default=None, help="write ECF residual CSV here")
    add_tols(p_ecf)
    p_ecf.set_defaults(func=cmd_ecf)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
