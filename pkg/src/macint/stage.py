"""One stage of the iteration: mollify, decompose, then corrugate along x1 and x2.

A stage maps a subsolution (v_q, w_q) with defect close to δ_{q+1} Id to
(v_{q+1}, w_{q+1}) whose defect is close to δ_{q+2} Id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decompose import (PROFILES, CorrugationProfiles, DecompositionResult, oscillation,
                        picard_decompose)
from .errors import PositivityError, RegimeError
from .fields import (DisplacementField, ScalarField, SymMatrixField, VectorField2, dealiasing,
                     gradient, half_outer, hessian, partial, sym_gradient, sym_outer)
from .mollify import mollify
from .norms import ck_norm, derivative_sup, holder_norm, sup_norm
from .schedule import ScheduleParams, schedule_values

CSV_COLUMNS = ("q", "sigma", "mu", "lambda", "defect_before", "defect_after",
               "e1", "e2", "e3", "dv0", "dv1", "dv2", "flags")

FLAG_NAMES = ("defect", "dv0", "dv1", "c2", "e1", "e2", "e3", "separation")


@dataclass(frozen=True)
class StageConfig:
    """Constants the construction leaves free, plus run toggles."""

    C0: float = 20.0
    B: float = 2.0
    tau_star: float = 0.1
    eps_floor: float = 1e-6
    force: bool = False
    dealias: bool = False
    mollify_method: str = "auto"
    holder_method: str = "auto"


@dataclass(frozen=True)
class StageState:
    q: int
    v: ScalarField
    w: DisplacementField

    @classmethod
    def flat(cls, grid, q: int = 0) -> "StageState":
        return cls(q, ScalarField.zeros(grid), DisplacementField.zeros(grid))

    def c1(self) -> float:
        return ck_norm(self.v, 1) + ck_norm(self.w, 1)

    def c2(self) -> float:
        return ck_norm(self.v, 2) + ck_norm(self.w, 2)


@dataclass
class StageDiagnostics:
    q: int
    sigma: float
    mu: int
    mu_raw: float
    lam: int
    defect_before: float
    defect_after: float
    e1: float
    e2: float
    e3: float
    dv0: float
    dv1: float
    dv2: float
    dw1: float
    c2_after: float
    flags: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def flag_string(self) -> str:
        return ";".join(f"{k}={int(v)}" for k, v in self.flags.items())

    def csv_row(self) -> list:
        return [self.q, self.sigma, self.mu, self.lam, self.defect_before, self.defect_after,
                self.e1, self.e2, self.e3, self.dv0, self.dv1, self.dv2, self.flag_string()]

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("q", "sigma", "mu", "mu_raw", "lam", "defect_before",
                                           "defect_after", "e1", "e2", "e3", "dv0", "dv1", "dv2",
                                           "dw1", "c2_after")}
        d.update(flags=dict(self.flags), bounds=dict(self.bounds), extra=dict(self.extra),
                 passed=self.passed)
        return d


@dataclass
class StageOutput:
    """Intermediate fields of a stage, kept for diagnostics and tests."""

    v_moll: ScalarField
    w_moll: DisplacementField
    D_moll: SymMatrixField
    H: SymMatrixField
    M: SymMatrixField
    decomposition: DecompositionResult
    r: ScalarField
    s: ScalarField
    v_tilde: ScalarField
    w_tilde: DisplacementField
    errors: tuple


def defect(D: SymMatrixField, v: ScalarField, w: DisplacementField) -> SymMatrixField:
    """D - ½∇v⊗∇v - sym∇w."""
    return D - half_outer(gradient(v)) - sym_gradient(w)


def build_H(D_moll: SymMatrixField, v: ScalarField, w: DisplacementField,
            delta_q1: float, delta_q2: float) -> SymMatrixField:
    """Rescaled, shifted defect of the mollified iterate.

    ``D_moll`` is the already mollified data.
    """
    return (defect(D_moll, v, w) / delta_q1).add_identity(-delta_q2 / delta_q1)


def first_perturbation(v: ScalarField, w: DisplacementField, w_c: DisplacementField,
                       r: ScalarField, mu: int,
                       profiles: CorrugationProfiles = PROFILES) -> tuple[ScalarField, DisplacementField]:
    """Corrugation along x1 with amplitude √r at frequency mu."""
    if r.min() <= 0.0:
        raise PositivityError(f"amplitude r has minimum {r.min():.3g}")
    grid = v.grid
    g1 = oscillation(grid, profiles.g1, mu, 1)
    g2 = oscillation(grid, profiles.g2, mu, 1)
    amp = r.sqrt() * g1 * (1.0 / mu)
    v_t = v + amp
    dv = gradient(v)
    shift = VectorField2(-(amp * dv.c1) + r * g2 * (1.0 / mu), -(amp * dv.c2))
    w_t = w + w_c + DisplacementField(np.zeros((2, 2)), shift)
    return v_t, w_t


def second_amplitude(r: ScalarField, v: ScalarField, mu: int,
                     profiles: CorrugationProfiles = PROFILES) -> ScalarField:
    """s = r - (√r/μ)γ1 ∂22 v + (γ1²/2μ²)(∂2√r)², with γ1 evaluated at μx1."""
    g1 = oscillation(r.grid, profiles.g1, mu, 1)
    sr = r.sqrt()
    d2sr = partial(sr, (0, 1))
    return r - sr * g1 * partial(v, (0, 2)) * (1.0 / mu) + g1 * g1 * d2sr * d2sr * (0.5 / mu ** 2)


def second_perturbation(v_t: ScalarField, w_t: DisplacementField, r: ScalarField, v: ScalarField,
                        mu: int, lam: int, profiles: CorrugationProfiles = PROFILES,
                        delta_q1: float | None = None) -> tuple[ScalarField, DisplacementField, ScalarField]:
    """Corrugation along x2 at frequency lam absorbing the remaining e2⊗e2 defect s.

    With ``delta_q1`` given, s must stay above δ_{q+1}/8.
    """
    s = second_amplitude(r, v, mu, profiles)
    floor = 0.0 if delta_q1 is None else delta_q1 / 8.0
    if s.min() <= floor:
        raise PositivityError(f"second amplitude s has minimum {s.min():.3g} (floor {floor:.3g})")
    grid = v.grid
    g1 = oscillation(grid, profiles.g1, lam, 2)
    g2 = oscillation(grid, profiles.g2, lam, 2)
    amp = s.sqrt() * g1 * (1.0 / lam)
    v_new = v_t + amp
    dvt = gradient(v_t)
    shift = VectorField2(-(amp * dvt.c1), -(amp * dvt.c2) + s * g2 * (1.0 / lam))
    w_new = w_t + DisplacementField(np.zeros((2, 2)), shift)
    return v_new, w_new, s


def step8_errors(D: SymMatrixField, D_moll: SymMatrixField, e_prev: SymMatrixField,
                 e_last: SymMatrixField, s: ScalarField, v_t: ScalarField, lam: int,
                 delta_q1: float, profiles: CorrugationProfiles = PROFILES):
    """The three parts of the new defect: mollification, truncated iteration, second corrugation."""
    grid = s.grid
    g1 = oscillation(grid, profiles.g1, lam, 2)
    g3 = oscillation(grid, profiles.g3, lam, 2)
    E1 = D - D_moll
    E2 = (e_prev - e_last) * (-delta_q1)
    ds = gradient(s)
    e2 = VectorField2(ScalarField.zeros(grid), ScalarField.constant(grid, 1.0))
    dss = gradient(s.sqrt())
    # signs follow from subtracting the expansion of ½∇v⊗∇v + sym∇w from D
    E3 = (sym_outer(ds, e2) * (g3 * (-1.0 / lam))
          + hessian(v_t) * (s.sqrt() * g1 * (1.0 / lam))
          - sym_outer(dss, dss) * (g1 * g1 * (0.5 / lam ** 2)))
    return E1, E2, E3


def residual_identity(D: SymMatrixField, v_new: ScalarField, w_new: DisplacementField,
                      delta_q2: float, errors) -> tuple[float, SymMatrixField, SymMatrixField]:
    """Max componentwise gap between the new shifted defect and the sum of its three parts."""
    lhs = defect(D, v_new, w_new).add_identity(-delta_q2)
    rhs = errors[0] + errors[1] + errors[2]
    gap = max(float(np.abs(c.values).max()) for c in (lhs - rhs).components())
    return gap, lhs, rhs


def preconditions(state: StageState, D: SymMatrixField, p: ScheduleParams, cfg: StageConfig,
                  delta_q: float, delta_q1: float, lambda_q: float) -> dict:
    dev = defect(D, state.v, state.w).add_identity(-delta_q1)
    out = {
        "defect": (sup_norm(dev), p.tau0 * delta_q1),
        "first_derivatives": (state.c1(), cfg.B - math.sqrt(delta_q)),
        "second_derivatives": (state.c2(), cfg.C0 * math.sqrt(delta_q) * lambda_q),
    }
    return {k: {"value": v, "bound": b, "ok": bool(v <= b)} for k, (v, b) in out.items()}


def run_stage(state: StageState, D: SymMatrixField, p: ScheduleParams,
              cfg: StageConfig = StageConfig(), profiles: CorrugationProfiles = PROFILES,
              keep_fields: bool = False):
    """Advance (v_q, w_q) to (v_{q+1}, w_{q+1}) and measure every stage inequality.

    Returns ``(new_state, diagnostics)``, or ``(new_state, diagnostics, output)``
    when ``keep_fields`` is set.
    """
    with dealiasing(cfg.dealias):
        return _run_stage(state, D, p, cfg, profiles, keep_fields)


def _run_stage(state, D, p, cfg, profiles, keep_fields):
    grid = D.grid
    q = state.q
    sv = schedule_values(p, q, grid.n)
    dq, dq1, dq2 = sv.delta_q, sv.delta_q1, sv.delta_q2
    sigma, mu, lam = sv.sigma, sv.mu, sv.lambda_int
    alpha = p.alpha
    if not sigma < 0.5:
        raise RegimeError(f"stage {q}: mollification scale sigma = {sigma:.4g} is not below 1/2")

    pre = preconditions(state, D, p, cfg, dq, dq1, sv.lambda_q)
    bad = [k for k, v in pre.items() if not v["ok"]]
    if bad and not cfg.force:
        detail = ", ".join(f"{k}: {pre[k]['value']:.4g} > {pre[k]['bound']:.4g}" for k in bad)
        raise RegimeError(f"stage {q} preconditions fail ({detail})")

    # mollify
    v = mollify(state.v, sigma, cfg.mollify_method)
    w = mollify(state.w, sigma, cfg.mollify_method)
    D_moll = mollify(D, sigma, cfg.mollify_method)

    # decompose
    H = build_H(D_moll, v, w, dq1, dq2)
    M = hessian(v) * (1.0 / math.sqrt(dq1))
    dec = picard_decompose(H, M, mu, sigma, p.N, profiles, alpha=alpha,
                           eps_floor=cfg.eps_floor, holder_method=cfg.holder_method)
    H_dev = holder_norm(H.add_identity(-1.0), 0, alpha, method=cfg.holder_method).value

    # corrugate twice
    r = dec.a_seq[-1] * dq1
    w_c = dec.w_seq[-1] * dq1
    v_t, w_t = first_perturbation(v, w, w_c, r, mu, profiles)
    v_new, w_new, s = second_perturbation(v_t, w_t, r, v, mu, lam, profiles, delta_q1=dq1)

    e_last = dec.e_seq[-1]
    e_prev = dec.e_seq[-2] if dec.N >= 1 else SymMatrixField.zeros(grid)
    errs = step8_errors(D, D_moll, e_prev, e_last, s, v_t, lam, dq1, profiles)
    gap, lhs, _ = residual_identity(D, v_new, w_new, dq2, errs)

    dv = v_new - state.v
    dw = w_new - state.w
    new_state = StageState(q + 1, v_new, w_new)
    defect_after = sup_norm(lhs)
    e_sup = [sup_norm(E) for E in errs]
    dv0, dv1, dv2 = sup_norm(dv), ck_norm(dv, 1), ck_norm(dv, 2)
    dw1 = ck_norm(dw, 1)
    c2_after = new_state.c2()

    bounds = {
        "defect": p.tau0 * dq2,
        "dv0": math.sqrt(dq1) / sv.lambda_q,
        "dv1": cfg.C0 * math.sqrt(dq1),
        "c2": cfg.C0 * math.sqrt(dq1) * lam,
        "e": p.tau0 * dq2 / 3.0,
    }
    flags = {
        "defect": defect_after <= bounds["defect"],
        "dv0": dv0 <= bounds["dv0"],
        "dv1": dv1 + dw1 <= bounds["dv1"],
        "c2": c2_after <= bounds["c2"],
        "e1": e_sup[0] <= bounds["e"],
        "e2": e_sup[1] <= bounds["e"],
        "e3": e_sup[2] <= bounds["e"],
        "separation": 1.0 / sigma < mu < lam,
    }
    extra = {
        "preconditions": pre,
        "forced": bool(bad),
        "delta_q": dq, "delta_q1": dq1, "delta_q2": dq2, "lambda_q": sv.lambda_q,
        "lambda_q1": sv.lambda_q1,
        "H_dev_holder": H_dev,
        "smallness": dec.smallness,
        "smallness_ok": bool(dec.smallness <= cfg.tau_star),
        "H_dev_ok": bool(H_dev <= cfg.tau_star / 2.0),
        "picard_residuals": list(dec.residuals),
        "picard_contraction": list(dec.contraction),
        "picard_ratios": list(dec.ratios),
        "min_r": r.min(), "min_s": s.min(),
        "s_dev_ratio": holder_norm(s - dq1, 0, alpha, method=cfg.holder_method).value / dq1,
        "v_tilde_amplitude": sup_norm(v_t - v),
        "v_tilde_bound": 1.5 * math.sqrt(dq1) / mu,
        "defect_after_holder": holder_norm(lhs, 0, alpha, method=cfg.holder_method).value,
        "e_holder": [holder_norm(E, 0, alpha, method=cfg.holder_method).value for E in errs],
        "residual_identity": gap,
        "moll_v0": sup_norm(v - state.v),
        "moll_v1": derivative_sup(v - state.v, 1),
    }
    diag = StageDiagnostics(q, sigma, mu, sv.mu_raw, lam, pre["defect"]["value"], defect_after,
                            e_sup[0], e_sup[1], e_sup[2], dv0, dv1, dv2, dw1, c2_after,
                            {k: bool(f) for k, f in flags.items()}, bounds, extra)
    if keep_fields:
        out = StageOutput(v, w, D_moll, H, M, dec, r, s, v_t, w_t, errs)
        return new_state, diag, out
    return new_state, diag

