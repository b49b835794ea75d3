"""Amplitude/frequency schedule and the admissibility inequalities on (b, c, α, N).

Every inequality in the admissibility report is homogeneous in b^q log a once
δ_q = a^(-b^q) and λ_q = a^(c b^(q+1)) are substituted, so margins are
reported in units of b^q log a and do not depend on q or a.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction


@dataclass(frozen=True)
class ScheduleParams:
    a: float
    b: float
    c: float
    theta: float
    alpha: float
    N: int = 3
    tau0: float = 0.5
    gamma_data: float = 2.0 / 3.0
    q_max: int = 2

    def __post_init__(self):
        if not self.a > 1.0:
            raise ValueError(f"a must exceed 1, got {self.a}")
        if not self.b > 1.0:
            raise ValueError(f"b must exceed 1, got {self.b}")
        if not self.c > 0.0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 1/2), got {self.alpha}")
        if not 0.0 < self.tau0 < 1.0:
            raise ValueError(f"tau0 must lie in (0, 1), got {self.tau0}")
        if self.theta < 0.0:
            raise ValueError("theta must be nonnegative")
        if int(self.N) != self.N or self.N < 0:
            raise ValueError("N must be a nonnegative integer")
        if self.gamma_data < 2.0 / 3.0 - 1e-12 or self.gamma_data > 1.0:
            raise ValueError("gamma_data must lie in [2/3, 1]")
        if int(self.q_max) != self.q_max or self.q_max < 0:
            raise ValueError("q_max must be a nonnegative integer")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScheduleParams":
        return cls(**d)


def delta(p: ScheduleParams, q: int) -> float:
    return math.exp(-(p.b ** q) * math.log(p.a))


def lam(p: ScheduleParams, q: int) -> float:
    return math.exp(p.c * p.b ** (q + 1) * math.log(p.a))


@dataclass(frozen=True)
class ScheduleValues:
    q: int
    delta_q: float
    delta_q1: float
    delta_q2: float
    lambda_q: float
    lambda_q1: float
    sigma: float
    mu_raw: float
    mu: int
    lambda_int: int


def schedule_values(p: ScheduleParams, q: int, n: int | None = None) -> ScheduleValues:
    """δ_q, δ_{q+1}, δ_{q+2}, λ_q, λ_{q+1}, σ, μ (raw and rounded) at stage q.

    With ``n`` given, λ_{q+1} must not exceed the Nyquist guard n/4.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    la = math.log(p.a)
    dq, dq1, dq2 = delta(p, q), delta(p, q + 1), delta(p, q + 2)
    lq, lq1 = lam(p, q), lam(p, q + 1)
    if n is not None and lq1 > n // 4:
        raise OverflowError(f"lambda_{q + 1} = {lq1:.4g} exceeds the Nyquist guard {n // 4} at n = {n}")
    # log σ = (log δ_{q+1} - log δ_q - 2 log λ_q) / (2 - 2α), evaluated in log space
    log_sigma = la * (-(p.b ** (q + 1)) + p.b ** q - 2.0 * p.c * p.b ** (q + 1)) / (2.0 - 2.0 * p.alpha)
    sigma = math.exp(log_sigma)
    mu_raw = dq2 * lq1 ** (1.0 - 2.0 * p.alpha) / dq1
    mu = max(1, int(round(mu_raw)))
    return ScheduleValues(q, dq, dq1, dq2, lq, lq1, sigma, mu_raw, mu, max(1, int(round(lq1))))


def max_stages(p: ScheduleParams, n: int) -> int:
    """Number of stages q = 0, 1, ... whose λ_{q+1} fits under the guard (capped at q_max + 1)."""
    count = 0
    for q in range(p.q_max + 1):
        if lam(p, q + 1) > n // 4:
            break
        count += 1
    return count


# -- exponent bounds --------------------------------------------------------

def _F(x) -> Fraction:
    return Fraction(x) if isinstance(x, (int, Fraction)) else Fraction(repr(float(x)))


def calpha1_bounds(b, alpha) -> tuple[float, float]:
    """(b_min, c_min) of the first family: σ^(-1) ≤ μ^(1-2α)."""
    b, al = _F(b), _F(alpha)
    s = 1 - 2 * al
    b_min = 1 / (s * s * (1 - al))
    den = 2 * b * (b * s * s * (1 - al) - 1)
    num = b * b * s * (2 - 2 * al) - b * (s * (2 - 2 * al) - 1) - 1
    c_min = num / den if den > 0 else None
    return float(b_min), (float(c_min) if c_min is not None else math.inf)


def calpha2_bounds(b, alpha) -> tuple[float, float]:
    """(b_max, c_min) of the second family: σ^(2/3-α) ≤ δ_{q+2} λ_{q+1}^(-α)."""
    b, al = _F(b), _F(alpha)
    t = Fraction(2, 3) - al
    # requirement α + bα(1-α) < 2/3, i.e. b < b_max
    b_max = (t / (al * (1 - al))) if al > 0 else None
    den = 2 * b * (t - b * al * (1 - al))
    num = 2 * b * b * (1 - al) - (b - 1) * t
    c_min = num / den if den > 0 else None
    return (float(b_max) if b_max is not None else math.inf,
            float(c_min) if c_min is not None else math.inf)


def calpha3_bounds(b, alpha) -> tuple[float, float]:
    """(b_min, c_min) for the N-dependent family to admit some finite N."""
    b, al = _F(b), _F(alpha)
    r = (1 - al) ** 2
    b_min = 1 / (r * (1 - 2 * al))
    den = 2 * b * (b * r * (1 - 2 * al) - 1)
    num = (b - 1) * (1 + 2 * b * r)
    c_min = num / den if den > 0 else None
    return float(b_min), (float(c_min) if c_min is not None else math.inf)


def n0(b, c, alpha) -> float:
    """Smallest real N making the third family hold; inf if none does."""
    b, c, al = _F(b), _F(c), _F(alpha)
    r = (1 - al) ** 2
    den = 2 * c * b * (b * r * (1 - 2 * al) - 1) - (b - 1) * (1 + 2 * b * r)
    if den <= 0:
        return math.inf
    num = 2 * (1 - al) * (b * b - b + al * c * b * b)
    return float(1 + num / den)


def alpha_zero_limits(b) -> dict:
    """The three c-bounds at α = 0 in closed form."""
    b = float(b)
    return {"calpha1": 1.0 + 1.0 / (2 * b), "calpha2": 1.5 * b + 1.0 / (2 * b) - 0.5,
            "calpha3": 1.0 + 1.0 / (2 * b)}


# -- report -------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    margin: float
    detail: str = ""


@dataclass
class AdmissibilityReport:
    params: ScheduleParams
    q: int
    checks: list
    N0: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.ok]

    def table(self) -> str:
        rows = [f"{'check':<12} {'ok':<5} {'margin':>12}  detail"]
        for c in self.checks:
            rows.append(f"{c.name:<12} {str(c.ok):<5} {c.margin:>12.5g}  {c.detail}")
        rows.append(f"N0 = {self.N0:.6g} (N = {self.params.N})")
        return "\n".join(rows)

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "q": self.q, "N0": self.N0, "ok": self.ok,
                "checks": [{"name": c.name, "ok": c.ok, "margin": c.margin, "detail": c.detail}
                           for c in self.checks]}


def _exponents(p: ScheduleParams):
    """log σ, log μ, log(δ_{q+2} λ_{q+1}^(-α)), log δ_{q+1} in units of b^q log a."""
    b, c, al = _F(p.b), _F(p.c), _F(p.alpha)
    log_sigma = (1 - b - 2 * c * b) / (2 - 2 * al)
    log_mu = -b * b + b + (1 - 2 * al) * c * b * b
    log_target = -b * b - al * c * b * b
    return log_sigma, log_mu, log_target, -b


def check_admissibility(p: ScheduleParams, q: int = 0) -> AdmissibilityReport:
    """Evaluate the schedule inequalities and report margins (positive means satisfied)."""
    al, N = _F(p.alpha), p.N
    ls, lm, lt, ld1 = _exponents(p)
    checks = []

    m1 = (1 - 2 * al) * lm + ls
    checks.append(Check("p1", m1 >= 0, float(m1), "sigma^-1 <= mu^(1-2alpha)"))
    m4 = lt - (Fraction(2, 3) - al) * ls
    checks.append(Check("p4", m4 >= 0, float(m4), "sigma^(2/3-alpha) <= delta_{q+2} lambda_{q+1}^-alpha"))
    m2 = lt - (ld1 + N * ((al - 1) * lm - ls))
    checks.append(Check("p2", m2 >= 0, float(m2), "delta_{q+1}(mu^(alpha-1)/sigma)^N <= delta_{q+2} lambda_{q+1}^-alpha"))

    b1, c1 = calpha1_bounds(p.b, p.alpha)
    checks.append(Check("calpha1", p.b > b1 and p.c > c1, p.c - c1, f"b > {b1:.6g}, c > {c1:.6g}"))
    bmax2, c2 = calpha2_bounds(p.b, p.alpha)
    checks.append(Check("calpha2", p.b < bmax2 and p.c > c2, p.c - c2, f"b < {bmax2:.6g}, c > {c2:.6g}"))
    b3, c3 = calpha3_bounds(p.b, p.alpha)
    checks.append(Check("calpha3", p.b > b3 and p.c > c3, p.c - c3, f"b > {b3:.6g}, c > {c3:.6g}"))

    N0 = n0(p.b, p.c, p.alpha)
    checks.append(Check("N>=N0", N >= N0, N - N0, f"N0 = {N0:.6g}"))

    cb = 2 * p.b + 1 / (2 * p.b) - 1
    checks.append(Check("bc", p.c >= cb, p.c - cb, f"c >= 2b + 1/(2b) - 1 = {cb:.6g}"))
    tmax = 1.0 / (2 * p.b * p.c)
    checks.append(Check("theta", p.theta < tmax, tmax - p.theta, f"theta < 1/(2bc) = {tmax:.6g}"))

    d1 = delta(p, 1)
    checks.append(Check("delta1<1", d1 < 1.0, 1.0 - d1, f"delta_1 = {d1:.4g}"))
    worst_d, worst_l, lam_ok = math.inf, math.inf, True
    for k in range(p.q_max + 1):
        worst_d = min(worst_d, 0.5 * delta(p, k) - delta(p, k + 1))
        worst_l = min(worst_l, lam(p, k + 1) - 2.0 * lam(p, k))
        lam_ok = lam_ok and lam(p, k) > 1.0
    checks.append(Check("delta-halve", worst_d >= 0, worst_d, "delta_{q+1} <= delta_q / 2"))
    checks.append(Check("lambda-double", worst_l >= 0 and lam_ok, worst_l, "lambda_{q+1} >= 2 lambda_q > 2"))
    return AdmissibilityReport(p, q, checks, N0)
