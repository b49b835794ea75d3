"""End-to-end runs: build a subsolution from (f, v_under), iterate stages, rescale, verify.

The target is A = (u + κ) Id with -Δu = f, so that -curl curl A = f.  After
scaling by δ₁/κ the flat start v₀ = (δ₁/κ)^{1/2} v_under, w₀ = 0 has defect
close to δ₁ Id, and every stage brings the defect closer to δ_{q+1} Id.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import maf
from .dbar import poisson_solve
from .errors import InitRegimeError, MacintError, MeanModeWarning
from .fields import (DisplacementField, Grid, ScalarField, SymMatrixField, curl_curl,
                     gradient, half_outer, sym_gradient, very_weak_hessian)
from .norms import ck_norm, holder_norm, sup_norm
from .schedule import ScheduleParams, lam, max_stages, schedule_values
from .stage import CSV_COLUMNS, StageConfig, StageState, preconditions, run_stage

NORM_LEVEL = 64
TEST_MODES = ((1, 1), (1, 2), (2, 1), (2, 2), (1, 3))

BUILTIN_F = {
    "zero": lambda x1, x2: np.zeros_like(x1),
    "sinsin": lambda x1, x2: np.sin(2 * np.pi * x1) * np.sin(2 * np.pi * x2),
}
BUILTIN_V = {
    "zero": lambda x1, x2: np.zeros_like(x1),
    "cos": lambda x1, x2: 0.3 * np.cos(2 * np.pi * x1),
}


@dataclass
class ProblemConfig:
    """Everything a run needs.  ``f`` and ``v_under`` are builtin names or MAF1 paths."""

    schedule: ScheduleParams
    f: str = "sinsin"
    v_under: str = "cos"
    epsilon: float = 0.5
    n: int = 1024
    output_dir: str | None = None
    dealias: bool = False
    force: bool = False
    C0: float = 20.0
    tau_star: float = 0.1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if isinstance(self.schedule, dict):
            self.schedule = ScheduleParams.from_dict(self.schedule)

    @classmethod
    def from_json(cls, text: str) -> "ProblemConfig":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schedule"] = self.schedule.to_dict()
        return d


def _resolve(spec, grid: Grid, builtins: dict) -> ScalarField:
    if isinstance(spec, ScalarField):
        return spec
    if spec in builtins:
        return ScalarField.from_function(grid, builtins[spec])
    field_ = maf.load(spec)
    if not isinstance(field_, ScalarField) or field_.grid != grid:
        raise ValueError(f"{spec}: expected a scalar MAF1 field on an n = {grid.n} grid")
    return field_


def restrict(f: ScalarField, m: int) -> ScalarField:
    """Spectral restriction to an m x m grid (modes below m/2 kept)."""
    n = f.grid.n
    if m >= n:
        return f
    spec = np.fft.fft2(f.values)
    half = m // 2
    idx = np.r_[0:half, m - half + 1:m]
    src = np.r_[0:half, n - half + 1:n]
    out = np.zeros((m, m), dtype=complex)
    out[np.ix_(idx, idx)] = spec[np.ix_(src, src)]
    return ScalarField(Grid(m), np.fft.ifft2(out).real * (m * m) / (n * n))


@dataclass
class InitResult:
    A: SymMatrixField
    A_bar: SymMatrixField
    kappa: float
    B: float
    state: StageState
    u: ScalarField
    f: ScalarField
    v_under: ScalarField
    f_mean: float
    checks: dict


def init_problem(cfg: ProblemConfig) -> InitResult:
    grid = Grid(cfg.n)
    p = cfg.schedule
    f = _resolve(cfg.f, grid, BUILTIN_F)
    v_under = _resolve(cfg.v_under, grid, BUILTIN_V)
    u, f_mean = poisson_solve(f)
    if abs(f_mean) > 1e-12 * max(1.0, f.sup()):
        warnings.warn(f"f has mean {f_mean:.3g}; only its mean-zero part is realised on the torus",
                      MeanModeWarning, stacklevel=2)
        f = f - f_mean
    gamma = p.gamma_data
    u_norm = holder_norm(restrict(u, NORM_LEVEL), 0, gamma, method="exhaustive").value
    v_norm = holder_norm(restrict(v_under, NORM_LEVEL), 1, gamma, method="exhaustive").value
    kappa = (u_norm + v_norm ** 2 + 100.0) / p.tau0
    B = holder_norm(v_under, 1, 0.0).ck + 2.0
    A = SymMatrixField.scalar_multiple_of_identity(u + kappa)
    d1 = schedule_values(p, 0).delta_q1
    A_bar = A * (d1 / kappa)
    v0 = v_under * math.sqrt(d1 / kappa)
    state = StageState(0, v0, DisplacementField.zeros(grid))
    sv = schedule_values(p, 0)
    pre = preconditions(state, A_bar, p, StageConfig(C0=cfg.C0, B=B), sv.delta_q, sv.delta_q1,
                        sv.lambda_q)
    # curl curl is linear: evaluate it on κ Id and u Id separately.  Summing u + κ
    # first rounds u to ulp(κ), and two derivatives amplify that by (πn)².
    ident = SymMatrixField.identity(grid)
    cc = curl_curl(ident * kappa) + curl_curl(SymMatrixField.scalar_multiple_of_identity(u))
    checks = {"preconditions": pre,
              "compatibility": sup_norm(-cc - f),
              "compatibility_sampled": sup_norm(-curl_curl(A) - f)}
    if not pre["defect"]["ok"] and not cfg.force:
        raise InitRegimeError(
            f"initial defect {pre['defect']['value']:.4g} exceeds tau0*delta_1 = "
            f"{pre['defect']['bound']:.4g}; increase a or tau0")
    return InitResult(A, A_bar, kappa, B, state, u, f, v_under, f_mean, checks)


def pairing_functions(grid: Grid) -> list[ScalarField]:
    return [ScalarField.from_function(grid, lambda x1, x2, k=k, l=l:
                                      np.sin(2 * np.pi * k * x1) * np.sin(2 * np.pi * l * x2))
            for k, l in TEST_MODES]


def weak_residual(A_bar: SymMatrixField, state: StageState, scale: float, f: ScalarField,
                  phis) -> dict:
    """ρ = 𝒟et D²v̄ - f = scale · curl curl(Ā - ½∇v⊗∇v - sym∇w), with scale = κ/δ₁."""
    defect = A_bar - half_outer(gradient(state.v)) - sym_gradient(state.w)
    rho = curl_curl(defect) * scale
    pairings = [float((rho * phi).mean()) for phi in phis]
    return {"q": state.q, "sup": rho.sup(), "pairings": pairings,
            "pairing_max": max(abs(x) for x in pairings)}


def convergence_report(states, thetas, p: ScheduleParams) -> list[dict]:
    """Measured log-ratios of interpolated C^{1,θ} increments against the schedule's prediction.

    For the increment Δ_q = v_{q+1} - v_q we use I_q = ‖Δ_q‖₁^{1-θ} ‖Δ_q‖₂^θ, and compare
    log(I_{q+1}/I_q) with -(b^{q+2} - b^{q+1})(½ - θcb) log a.
    """
    if len(states) < 3:
        raise ValueError("need at least two stages")
    incs = [states[i + 1].v - states[i].v for i in range(len(states) - 1)]
    n1 = [ck_norm(d, 1) for d in incs]
    n2 = [ck_norm(d, 2) for d in incs]
    la = math.log(p.a)
    out = []
    for theta in thetas:
        logs = [(1 - theta) * math.log(x) + theta * math.log(y) for x, y in zip(n1, n2)]
        for q in range(len(incs) - 1):
            measured = logs[q + 1] - logs[q]
            predicted = -(p.b ** (q + 2) - p.b ** (q + 1)) * (0.5 - theta * p.c * p.b) * la
            out.append({
                "theta": theta, "q": q, "measured": measured, "predicted": predicted,
                "sign_match": bool(np.sign(measured) == np.sign(predicted)),
                "rel_error": abs(measured - predicted) / abs(predicted) if predicted else math.inf,
                "predicts_divergence": bool(0.5 - theta * p.c * p.b < 0),
            })
    return out


@dataclass
class RunReport:
    config: dict
    kappa: float
    B: float
    a: float
    stages: list = field(default_factory=list)
    weak_residual: list = field(default_factory=list)
    convergence: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    stage_cap: int = 0
    error: str | None = None
    states: list = field(default_factory=list, repr=False)
    v_bar: ScalarField | None = field(default=None, repr=False)
    w_bar: DisplacementField | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.stages) and all(d.passed for d in self.stages)

    def csv_text(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for d in self.stages:
            wr.writerow([repr(x) if isinstance(x, float) else x for x in d.csv_row()])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"config": self.config, "kappa": self.kappa, "B": self.B, "a": self.a,
                "stage_cap": self.stage_cap, "passed": self.passed, "error": self.error,
                "stages": [d.to_dict() for d in self.stages],
                "weak_residual": self.weak_residual, "convergence": self.convergence,
                "checks": self.checks}

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "stages.csv"), "w") as fh:
            fh.write(self.csv_text())
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(_jsonable(self.to_dict()), fh, indent=2, sort_keys=True)
        if self.v_bar is not None:
            maf.save(os.path.join(out_dir, "v_bar.maf"), self.v_bar)
            maf.save(os.path.join(out_dir, "w_bar.maf"), self.w_bar)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def run(cfg: ProblemConfig, thetas=None) -> RunReport:
    """Run stages until q_max or the Nyquist cap, then rescale and verify.

    Stage failures do not raise: the report keeps the completed stages and
    records the error.
    """
    p = cfg.schedule
    init = init_problem(cfg)
    grid = Grid(cfg.n)
    d1 = schedule_values(p, 0).delta_q1
    scale = init.kappa / d1
    stage_cfg = StageConfig(C0=cfg.C0, B=init.B, tau_star=cfg.tau_star, force=cfg.force,
                            dealias=cfg.dealias)
    report = RunReport(cfg.to_dict(), init.kappa, init.B, p.a, checks={"init": init.checks})
    report.stage_cap = max_stages(p, cfg.n)
    if report.stage_cap == 0:
        report.error = f"lambda_1 = {lam(p, 1):.4g} exceeds the Nyquist guard {cfg.n // 4}; no stage fits"
    phis = pairing_functions(grid)
    states = [init.state]
    report.weak_residual.append(weak_residual(init.A_bar, init.state, scale, init.f, phis))
    for q in range(report.stage_cap):
        try:
            new, diag = run_stage(states[-1], init.A_bar, p, stage_cfg)
        except (MacintError, OverflowError) as exc:
            report.error = f"stage {q}: {type(exc).__name__}: {exc}"
            break
        states.append(new)
        report.stages.append(diag)
        report.weak_residual.append(weak_residual(init.A_bar, new, scale, init.f, phis))
    report.states = states

    last = states[-1]
    report.v_bar = last.v * math.sqrt(scale)
    report.w_bar = last.w * scale
    direct = very_weak_hessian(report.v_bar)
    via = very_weak_hessian(last.v) * scale
    denom = max(direct.sup(), 1e-300)
    budget = sum(math.sqrt(schedule_values(p, q).delta_q1) / lam(p, q)
                 for q in range(len(states) - 1)) * math.sqrt(scale)
    dist = sup_norm(init.v_under - report.v_bar)
    report.checks.update({
        "rescaling_rel_gap": sup_norm(direct - via) / denom,
        "closeness": dist,
        "closeness_budget": budget,
        "closeness_within_budget": bool(dist <= budget),
        "closeness_within_epsilon": bool(dist < cfg.epsilon),
        "weak_residual_decreasing": bool(all(
            b["pairing_max"] < a["pairing_max"]
            for a, b in zip(report.weak_residual, report.weak_residual[1:]))),
    })
    if len(states) >= 3:
        if thetas is None:
            t0 = 1.0 / (2 * p.b * p.c)
            thetas = [0.0, 0.5 * t0, 0.8 * t0, 1.2 * t0]
        report.convergence = convergence_report(states, thetas, p)
    if cfg.output_dir:
        report.write(cfg.output_dir)
    return report
