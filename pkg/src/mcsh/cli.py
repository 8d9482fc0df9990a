"""Command-line surface.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure (blow-up, non-convergence, divergent integral).  Orchestration
is single-threaded; worker parallelism inside FFTs and sweeps is capped
by the MCSH_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import generate_data, load_config
from .diagnostics import diagnostics_record, write_diagnostics_csv
from .errors import (
    BlowUpError,
    ConfigurationError,
    ConstraintError,
    DivergenceError,
    McshError,
    NonConvergenceError,
)
from .evolve import integrate
from .io import read_snapshot, write_manifest, write_snapshot
from .model import FIELD_NAMES, PhysParams
from .nullforms import (
    DeltaIntegralSpec,
    delta_integral,
    delta_integral_asymptotic,
    far_branch_integral,
    null2_residual,
)
from .probes import ProbeSpec, probe, report_json
from .spaces import admissible, fl_norm, fl_norm_homogeneous, gap_report, scaling_check
from .spectral import Grid2D, as_field, gaussian_bump

_VALIDATION_ERRORS = 1
_NUMERICAL_ERRORS = 2


def _emit(doc, out: str | None):
    text = json.dumps(doc, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# -- subcommands ---------------------------------------------------------------


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    params = cfg.phys_params()
    state, info = generate_data(cfg)
    steps = int(round(cfg.T / cfg.dt))
    if abs(steps * cfg.dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        raise ConfigurationError(f"integrator.dt: {cfg.dt} does not divide T = {cfg.T}")
    observer_stride = cfg.snapshot_stride if cfg.snapshot_stride > 0 else max(1, steps // 100)
    result = integrate(
        state,
        params,
        cfg.dt,
        steps,
        scheme=cfg.scheme,
        snapshot_stride=cfg.snapshot_stride,
        observer=lambda s: diagnostics_record(s, params),
        observer_stride=observer_stride,
    )
    written = []
    if cfg.snapshot_dir:
        outdir = Path(cfg.snapshot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        snaps = result.snapshots if result.snapshots else [result.state]
        for i, snap in enumerate(snaps):
            path = outdir / f"snapshot_{i:06d}.bin"
            write_snapshot(path, snap)
            written.append(str(path))
    if cfg.diagnostics_csv:
        write_diagnostics_csv(cfg.diagnostics_csv, result.records)
    if cfg.manifest:
        write_manifest(
            cfg.manifest,
            cfg.as_dict(),
            Path(args.config).read_bytes(),
            extra={"gauss_solve": {"residual": info.residual, "iterations": info.iterations}},
        )
    first, last = result.records[0], result.records[-1]
    _emit(
        {
            "steps": result.steps,
            "t_final": result.state.t,
            "energy_initial": first.energy,
            "energy_final": last.energy,
            "gauss_residual_final": last.gauss_res,
            "lorenz_residual_final": last.lorenz_res,
            "snapshots": written,
            "diagnostics_csv": cfg.diagnostics_csv,
            "manifest": cfg.manifest,
        },
        args.out,
    )
    return 0


def _cmd_diagnose(args) -> int:
    cfg = load_config(args.config) if args.config else None
    params = cfg.phys_params() if cfg else PhysParams()
    records = [diagnostics_record(read_snapshot(p), params) for p in args.snapshots]
    if args.out:
        write_diagnostics_csv(args.out, records)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["t", "energy", "gauss_res", "lorenz_res", "maxwell_res_1", "maxwell_res_2"])
        for r in records:
            w.writerow([r.t, r.energy, r.gauss_res, r.lorenz_res, r.maxwell_res_1, r.maxwell_res_2])
    return 0


def _cmd_norms(args) -> int:
    state = read_snapshot(args.snapshot)
    norm = fl_norm_homogeneous if args.homogeneous else fl_norm
    doc = {
        "s": args.s,
        "r": args.r,
        "homogeneous": bool(args.homogeneous),
        "t": state.t,
        "norms": {
            name: norm(getattr(state, name), args.s, args.r) for name in FIELD_NAMES
        },
    }
    _emit(doc, args.out)
    return 0


def _cmd_admissible(args) -> int:
    report = admissible(args.r, args.s, args.l, args.m, which=args.which)
    if args.gap:
        report["gap"] = gap_report(args.r, which=args.which)
    _emit(report, args.out)
    return 0


def _cmd_scaling_test(args) -> int:
    grid = Grid2D(args.n, args.period)
    u = as_field(grid, gaussian_bump(grid, args.amplitude, args.sigma), real=True)
    rows = []
    for lam in args.lam or [2.0, 4.0]:
        ratio = scaling_check(u, lam, args.s, args.r)
        rows.append({"lam": lam, "ratio": ratio, "deviation": abs(ratio - 1.0)})
    _emit({"n": args.n, "s": args.s, "r": args.r, "results": rows}, args.out)
    return 0


def _cmd_nullform_verify(args) -> int:
    from .config import DataSpec, RunConfig

    residuals = []
    for i in range(args.count):
        cfg = RunConfig(
            n=args.n,
            period=args.period,
            data=DataSpec(
                "random-band",
                {"amplitude": args.amplitude, "kmax": args.kmax},
                args.seed + i,
            ),
        )
        state, _ = generate_data(cfg)
        residuals.append(null2_residual(state))
    _emit(
        {
            "count": args.count,
            "n": args.n,
            "max_residual": max(residuals),
            "residuals": residuals,
        },
        args.out,
    )
    return 0


_BRANCH_SIGNS = {"elliptic": ("+", "+"), "hyperbolic": ("+", "-")}


def _cmd_delta_integrals(args) -> int:
    r = args.r
    p, q = (args.p, args.q) if args.p is not None else (1.0 + r / 2.0, r / 2.0)
    rows = []
    if args.sweep == "default":
        if args.branch == "far":
            raise ConfigurationError("--sweep default supports elliptic/hyperbolic only")
        for xi in np.geomspace(0.5, 8.0, 10):
            for frac in np.geomspace(1.1, 10.0, 10):
                tau = frac * xi if args.branch == "elliptic" else xi / frac
                spec = DeltaIntegralSpec(_BRANCH_SIGNS[args.branch], p, q, tau, xi)
                value = delta_integral(spec)
                approx = delta_integral_asymptotic(spec, r)
                rows.append(
                    {"xi": float(xi), "tau": float(tau), "value": value,
                     "asymptotic": approx, "ratio": value / approx}
                )
    else:
        if args.tau is None or args.xi is None:
            raise ConfigurationError("explicit evaluation needs --tau and --xi")
        if args.branch == "far":
            value = far_branch_integral(args.tau, args.xi, r)
            rows.append({"xi": args.xi, "tau": args.tau, "value": value})
        else:
            spec = DeltaIntegralSpec(_BRANCH_SIGNS[args.branch], p, q, args.tau, args.xi)
            value = delta_integral(spec)
            approx = delta_integral_asymptotic(spec, r)
            rows.append(
                {"xi": args.xi, "tau": args.tau, "value": value,
                 "asymptotic": approx, "ratio": value / approx}
            )
    def dump(fh):
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    if args.out:
        with open(args.out, "w", newline="") as fh:
            dump(fh)
    else:
        dump(sys.stdout)
    return 0


def _cmd_probe(args) -> int:
    spec = ProbeSpec(
        lemma=args.lemma,
        r=args.r,
        alpha1=args.alpha1,
        alpha2=args.alpha2,
        b=args.b,
        b1=args.b1,
        b2=args.b2,
        s0=args.s0,
        s1=args.s1,
        signs=(args.sign1, args.sign2),
        count=args.count,
        band=(args.kmin, args.kmax),
        width=args.width,
        seed=args.seed,
        n=args.n,
        nt=args.nt,
        period=args.period,
        T=args.T,
        dilations=tuple(args.dilations),
        enforce=not args.no_enforce,
    )
    report = probe(spec, keep_ratios=args.dump_ratios is not None)
    ratios = report.pop("ratios", None)
    if args.dump_ratios:
        with open(args.dump_ratios, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["draw", "ratio"])
            for i, value in enumerate(ratios):
                w.writerow([i, repr(value)])
    text = report_json(report)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


# -- parser --------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mcsh",
        description="Pseudo-spectral simulator and estimate toolkit for a "
        "Chern-Simons-Higgs gauge system on the 2-torus.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured evolution")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="write the JSON summary here instead of stdout")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("diagnose", help="diagnostics for stored snapshots")
    p.add_argument("snapshots", nargs="+")
    p.add_argument("--config", default=None, help="config supplying the coupling constants")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("norms", help="Fourier-Lebesgue norms of a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--homogeneous", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_norms)

    p = sub.add_parser("admissible", help="check a regularity triple")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--which", default="thm11", choices=("thm11", "thm12", "cor13"))
    p.add_argument("--gap", action="store_true", help="include the distance to scaling-critical")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_admissible)

    p = sub.add_parser("scaling-test", help="norm homogeneity under exact dilation")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--period", type=float, default=2.0 * np.pi * 8.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--lam", type=float, action="append", default=None)
    p.add_argument("--sigma", type=float, default=1.5)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_scaling_test)

    p = sub.add_parser("nullform-verify", help="decomposition residual on compatible random states")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--period", type=float, default=2.0 * np.pi * 8.0)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_nullform_verify)

    p = sub.add_parser("delta-integrals", help="cone resonance integrals vs asymptotics")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--branch", default="elliptic", choices=("elliptic", "hyperbolic", "far"))
    p.add_argument("--sweep", default=None, choices=("default",))
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_delta_integrals)

    p = sub.add_parser("probe", help="ratio statistics for a space-time estimate")
    p.add_argument("--lemma", required=True)
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--alpha1", type=float, default=None)
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--b1", type=float, default=None)
    p.add_argument("--b2", type=float, default=None)
    p.add_argument("--s0", type=float, default=None)
    p.add_argument("--s1", type=float, default=None)
    p.add_argument("--sign1", type=int, default=1)
    p.add_argument("--sign2", type=int, default=-1)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--kmin", type=float, default=0.0)
    p.add_argument("--kmax", type=float, default=3.0)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--nt", type=int, default=32)
    p.add_argument("--period", type=float, default=2.0 * np.pi)
    p.add_argument("--T", type=float, default=2.0 * np.pi)
    p.add_argument("--dilations", type=_int_list, default=[1, 2])
    p.add_argument("--no-enforce", action="store_true",
                   help="probe even when the hypotheses are violated (negative controls)")
    p.add_argument("--dump-ratios", default=None, help="write per-draw ratios to this CSV")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_probe)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (BlowUpError, NonConvergenceError, DivergenceError, ConstraintError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _NUMERICAL_ERRORS
    except McshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _VALIDATION_ERRORS
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _VALIDATION_ERRORS


if __name__ == "__main__":
    sys.exit(main())
