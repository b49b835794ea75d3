"""Command line entry point: ``macint {run,check-params,sweep-a,demo}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import replace

import numpy as np

from .driver import ProblemConfig, run
from .schedule import ScheduleParams, alpha_zero_limits, calpha1_bounds, calpha2_bounds, \
    calpha3_bounds, check_admissibility
from .stage import FLAG_NAMES

# Exact subsolution: zero data gives the flat start with defect exactly δ₁ Id.
EXACT_SCHEDULE = ScheduleParams(a=1.062, b=3.0, c=10.1, theta=0.01, alpha=0.24, N=2, tau0=0.9,
                                q_max=0)
# Two stages fit under the n = 1024 guard with λ₂ ≈ 0.95 · n/4.
_LA = math.log(2.0) / 2.0
_C2 = math.log(0.95 * 256) / (8.0 * _LA)
TWO_STAGE_SCHEDULE = ScheduleParams(a=math.exp(_LA), b=2.0, c=_C2, theta=0.5 / (4.0 * _C2),
                                    alpha=0.05, N=2, tau0=0.9, q_max=1)

DEMOS = {
    "exact": dict(schedule=EXACT_SCHEDULE, f="zero", v_under="zero", n=1024),
    "sinsin": dict(schedule=TWO_STAGE_SCHEDULE, f="sinsin", v_under="cos", n=1024, force=True),
    "zero": dict(schedule=TWO_STAGE_SCHEDULE, f="zero", v_under="zero", n=1024, force=True),
}


def demo_config(name: str, **overrides) -> ProblemConfig:
    kw = dict(DEMOS[name])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return ProblemConfig(**kw)


def _summary(report) -> str:
    lines = [f"kappa = {report.kappa:.6g}  B = {report.B:.6g}  a = {report.a:.6g}  "
             f"stages = {len(report.stages)}/{report.stage_cap}"]
    for d in report.stages:
        failed = [k for k, v in d.flags.items() if not v]
        lines.append(f"  q={d.q} sigma={d.sigma:.4g} mu={d.mu} lambda={d.lam} "
                     f"defect {d.defect_before:.4g} -> {d.defect_after:.4g}  "
                     + ("all flags pass" if not failed else "failed: " + ",".join(failed)))
    rho = [w["pairing_max"] for w in report.weak_residual]
    lines.append("  weak residual (max pairing): " + ", ".join(f"{x:.4g}" for x in rho))
    if report.error:
        lines.append(f"  stopped: {report.error}")
    return "\n".join(lines)


def _params_from_args(args) -> ScheduleParams:
    return ScheduleParams(a=args.a, b=args.b, c=args.c, theta=args.theta, alpha=args.alpha,
                          N=args.N, tau0=args.tau0, q_max=args.q_max)


def cmd_run(args) -> int:
    cfg = ProblemConfig.load(args.config)
    if args.out:
        cfg.output_dir = args.out
    report = run(cfg)
    print(_summary(report))
    return 0 if report.passed else 1


def cmd_demo(args) -> int:
    cfg = demo_config(args.name, n=args.n, output_dir=args.out)
    report = run(cfg)
    print(_summary(report))
    return 0 if report.passed else 1


def cmd_check_params(args) -> int:
    p = _params_from_args(args)
    rep = check_admissibility(p, args.q)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
        return 0
    print(rep.table())
    print(f"\nalpha -> 0 limits at b = {p.b:g} (bounds evaluated at alpha = {args.limit_alpha:g}):")
    lim = alpha_zero_limits(p.b)
    got = {"calpha1": calpha1_bounds(p.b, args.limit_alpha)[1],
           "calpha2": calpha2_bounds(p.b, args.limit_alpha)[1],
           "calpha3": calpha3_bounds(p.b, args.limit_alpha)[1]}
    for k in ("calpha1", "calpha2", "calpha3"):
        print(f"  {k}: c > {got[k]:.8f}   limit {lim[k]:.8f}   gap {abs(got[k] - lim[k]):.2e}")
    return 0


def sweep_a(cfg: ProblemConfig, a_values) -> list[dict]:
    """Run ``cfg`` once per value of a; one row of flags per run."""
    rows = []
    for a in a_values:
        c = replace(cfg, schedule=replace(cfg.schedule, a=float(a)), output_dir=None)
        row = {"a": float(a), "passed": False, "error": None, "flags": {}}
        try:
            rep = run(c)
        except Exception as exc:  # report, keep sweeping
            row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
            continue
        row["error"] = rep.error
        row["passed"] = rep.passed
        for name in FLAG_NAMES:
            row["flags"][name] = all(d.flags.get(name, False) for d in rep.stages) if rep.stages else False
        row["report"] = rep
        rows.append(row)
    return rows


def format_sweep(rows) -> str:
    head = f"{'a':>10} " + " ".join(f"{n[:5]:>5}" for n in FLAG_NAMES) + "  pass"
    out = [head]
    for r in rows:
        cells = " ".join(f"{('ok' if r['flags'].get(n) else 'x'):>5}" for n in FLAG_NAMES)
        tail = "  yes" if r["passed"] else "  no" + (f" ({r['error'][:50]})" if r["error"] else "")
        out.append(f"{r['a']:>10.5g} {cells}{tail}")
    return "\n".join(out)


def cmd_sweep_a(args) -> int:
    cfg = ProblemConfig.load(args.config) if args.config else demo_config("exact")
    if args.values:
        values = [float(x) for x in args.values.split(",")]
    else:
        values = np.linspace(args.start, args.stop, args.num).tolist()
    rows = sweep_a(cfg, values)
    print(format_sweep(rows))
    return 0 if any(r["passed"] for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="macint", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a JSON config")
    r.add_argument("config")
    r.add_argument("--out", help="report directory (overrides output_dir)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check-params", help="admissibility table for schedule parameters")
    c.add_argument("--a", type=float, default=EXACT_SCHEDULE.a)
    c.add_argument("--b", type=float, default=1.1)
    c.add_argument("--c", type=float, default=1.7)
    c.add_argument("--theta", type=float, default=0.0)
    c.add_argument("--alpha", type=float, default=1e-3)
    c.add_argument("--N", type=int, default=7)
    c.add_argument("--tau0", type=float, default=0.5)
    c.add_argument("--q-max", dest="q_max", type=int, default=2)
    c.add_argument("--q", type=int, default=0)
    c.add_argument("--limit-alpha", type=float, default=1e-6)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check_params)

    s = sub.add_parser("sweep-a", help="pass/fail matrix over a range of a")
    s.add_argument("config", nargs="?", help="JSON config (default: exact-subsolution demo)")
    s.add_argument("--values", help="comma-separated list of a")
    s.add_argument("--start", type=float, default=1.055)
    s.add_argument("--stop", type=float, default=1.07)
    s.add_argument("--num", type=int, default=4)
    s.set_defaults(func=cmd_sweep_a)

    d = sub.add_parser("demo", help="run a builtin problem")
    d.add_argument("name", choices=sorted(DEMOS))
    d.add_argument("--n", type=int)
    d.add_argument("--out")
    d.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
