"""The linearization iteration: schedule, per-step coordinate changes,
certificates, transition renewal, and the assembled conjugacy.

One step at level m does, for a transition system of width sigma_m:

1. read the hat coefficients ``b_{e|n}`` of every edge and audit their decay;
2. solve the mode-n coboundary system for the per-chart coefficients
   ``a_{j|n}`` of the coordinate changes ``psi_j(w) = w exp(psihat_j(w))``;
3. certify the norm and derivative bounds the schedule requires of psihat
   (power law in the strip shrink, derivative majorant small enough for
   univalence), and the annulus nesting that makes the renewal well defined;
4. renew every edge as ``psi_k^{-1} o f o psi_j`` on the shrunk annulus,
   re-extract phases and hats, and certify that the new norms contract
   quadratically below the schedule's delta sequence.

The schedule itself is closed-form: ``eta_{m+1} = mu^(-1/(mu+1)) eta_m``,
``sigma_{m+1} = sigma_m - 4 eta_m``, ``delta_{m+1} = (1 + e^sigma0) C1
delta_m^2 / eta_m^(mu+1)``, started at ``delta_0 = min(eta_0,
eta_0^(mu+1) / ((1 + e^sigma0) C1 mu))``. With ``strict_schedule`` the run
aborts on the first failed certificate; otherwise failures are logged in the
trace and the iteration continues, which is how behaviour outside the
guaranteed regime stays observable.

All norm comparisons use the one-sided weighted coefficient sums
(:func:`circlekam.series.majorant_norm`); sampled sup-norms appear only in
reports. Gamma(mu) stands in for (mu-1)! in the constant C1 so non-integer
exponents are meaningful; every report header records that convention.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .circle import (
    CircleDiffeo,
    apply_inverse,
    compose,
    eval_diffeo,
    expand_detailed,
    identity_map,
    rotation_number,
    symmetrize,
    unit_circle,
)
from .cocycle import (
    TransitionSystem,
    UnitaryFlatBundle,
    amplification_spectrum,
    fit_diophantine,
    solve_mode,
)
from .errors import (
    ConvergenceViolationError,
    ScheduleViolationError,
    TruncationError,
    ValidationError,
)
from .series import (
    LaurentSeries,
    decay_check,
    empirical_sup_norm,
    log_derivative_majorant,
    majorant_norm,
)

TWO_PI = 2.0 * np.pi

CONVENTIONS = {
    "c1_constant": "Gamma(mu) replaces the factorial (mu-1)! in C1",
    "norms": "schedule comparisons use weighted coefficient majorants",
}

# Relative residual above which a mode system counts as unsolvable.
COBOUNDARY_REL_TOL = 0.1

# Tolerances of the per-step certificates.
PHASE_DRIFT_TOL = 1e-10
SYMMETRY_PROJECTION_TOL = 1e-8
TAIL_BUDGET_FACTOR = 1e-3


@dataclass(frozen=True)
class KamParams:
    """Constants of the iteration schedule.

    ``c0`` may be left as None and fitted from the measured amplification
    spectrum when a run or gate report first needs it.
    """

    sigma0: float
    eta0: float
    c0: float | None = None
    mu: float = 2.0
    n_trunc: int = 64
    tol: float = 1e-10
    max_iter: int = 40
    strict_schedule: bool = True

    def __post_init__(self):
        if not (self.sigma0 > 0):
            raise ValidationError(f"sigma0 must be positive, got {self.sigma0}")
        if not (self.mu > 1):
            raise ValidationError(f"mu must exceed 1, got {self.mu}")
        bound = self.eta0_bound()
        if not (0 < self.eta0 < bound):
            raise ValidationError(
                f"eta0 must lie in (0, {bound:.6g}), got {self.eta0}"
            )
        if self.c0 is not None and not (self.c0 > 0):
            raise ValidationError(f"c0 must be positive, got {self.c0}")
        if self.n_trunc < 1 or self.max_iter < 1 or not (self.tol > 0):
            raise ValidationError("n_trunc, max_iter must be >= 1 and tol > 0")

    @property
    def ratio(self) -> float:
        """Geometric factor of the eta sequence, mu^(-1/(mu+1))."""
        return self.mu ** (-1.0 / (self.mu + 1.0))

    def eta0_bound(self) -> float:
        return min(math.pi, (1.0 - self.ratio) * self.sigma0 / 4.0)

    @property
    def c1(self) -> float:
        if self.c0 is None:
            raise ValidationError("c0 is unset; fit it from the spectrum first")
        return (
            2.0
            * self.c0
            * self.sigma0**self.mu
            * math.gamma(self.mu)
            / (1.0 - math.exp(-self.sigma0)) ** self.mu
        )

    @property
    def delta0(self) -> float:
        return min(
            self.eta0,
            self.eta0 ** (self.mu + 1.0)
            / ((1.0 + math.exp(self.sigma0)) * self.c1 * self.mu),
        )

    @property
    def sigma_inf(self) -> float:
        return self.sigma0 - 4.0 * self.eta0 / (1.0 - self.ratio)

    def with_c0(self, c0: float) -> "KamParams":
        return dataclasses.replace(self, c0=c0)

    def to_json_dict(self) -> dict:
        return {
            "C0": self.c0,
            "mu": self.mu,
            "sigma0": self.sigma0,
            "eta0": self.eta0,
            "N": self.n_trunc,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "strict_schedule": self.strict_schedule,
        }

    @classmethod
    def from_json_dict(cls, doc: dict, sigma0: float | None = None) -> "KamParams":
        sigma = float(doc.get("sigma0", sigma0))
        ratio = float(doc.get("mu", 2.0)) ** (-1.0 / (float(doc.get("mu", 2.0)) + 1.0))
        eta_default = min(math.pi, (1.0 - ratio) * sigma / 4.0) / 2.0
        c0 = doc.get("C0")
        return cls(
            sigma0=sigma,
            eta0=float(doc.get("eta0", eta_default)),
            c0=None if c0 is None else float(c0),
            mu=float(doc.get("mu", 2.0)),
            n_trunc=int(doc.get("N", 64)),
            tol=float(doc.get("tol", 1e-10)),
            max_iter=int(doc.get("max_iter", 40)),
            strict_schedule=bool(doc.get("strict_schedule", True)),
        )


def schedule(params: KamParams, m: int) -> tuple[float, float, float]:
    """(sigma_m, eta_m, delta_m): widths and gates at level m.

    eta and sigma are closed-form (geometric sequence and its partial sums),
    delta follows its quadratic recursion from delta_0.
    """
    if m < 0:
        raise ValidationError("m must be nonnegative")
    r = params.ratio
    eta_m = params.eta0 * r**m
    sigma_m = params.sigma0 - 4.0 * params.eta0 * (1.0 - r**m) / (1.0 - r)
    delta = params.delta0
    factor = (1.0 + math.exp(params.sigma0)) * params.c1
    for i in range(m):
        delta = factor * delta**2 / (params.eta0 * r**i) ** (params.mu + 1.0)
    return sigma_m, eta_m, delta


def resolve_c0(system: TransitionSystem, params: KamParams) -> KamParams:
    """Fit c0 from the measured amplification spectrum when it is unset."""
    if params.c0 is not None:
        return params
    spectrum = amplification_spectrum(system.bundle(), params.n_trunc)
    fit = fit_diophantine(spectrum, params.mu)
    return params.with_c0(fit.c0)


# ---------------------------------------------------------------------------
# reports and traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertRecord:
    """One certified inequality: lhs <= rhs (within its stated slack)."""

    name: str
    passed: bool
    lhs: float
    rhs: float
    detail: str = ""


@dataclass
class StepReport:
    m: int
    certificates: dict = field(default_factory=dict)
    worst_mode_residual: float = 0.0
    tail_mass: float = 0.0
    phase_drift: float = 0.0
    symmetry_projection: float = 0.0
    max_hat_empirical: float = 0.0   # sampled sup norm, diagnosis only
    modes_solved: int = 0
    violations: list = field(default_factory=list)

    def record(self, name: str, passed: bool, lhs: float, rhs: float, detail: str = ""):
        self.certificates[name] = CertRecord(name, bool(passed), float(lhs), float(rhs), detail)
        if not passed:
            self.violations.append(name)


@dataclass(frozen=True)
class TraceRow:
    m: int
    sigma: float
    eta: float
    delta: float
    max_hat_norm: float
    worst_mode_residual: float
    tail_mass: float
    wall_ms: float


CSV_HEADER = "m,sigma,eta,delta,max_hat_norm,worst_mode_residual,tail_mass,wall_ms"


@dataclass
class IterationTrace:
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)  # (m, certificate) pairs

    def append(self, row: TraceRow):
        self.rows.append(row)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.m},{r.sigma!r},{r.eta!r},{r.delta!r},{r.max_hat_norm!r},"
                f"{r.worst_mode_residual!r},{r.tail_mass!r},{r.wall_ms!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "conventions": dict(CONVENTIONS),
            "rows": [dataclasses.asdict(r) for r in self.rows],
            "violations": [
                {"m": m, "certificate": cert} for m, cert in self.violations
            ],
        }


@dataclass(frozen=True)
class GateReport:
    """Initial-norm gate: certified hat majorants against the entry threshold."""

    passed: bool
    gate_value: float
    c0_used: float
    c1: float
    eta0: float
    per_edge: tuple   # (edge str, majorant, margin, passed)
    conventions: dict = field(default_factory=lambda: dict(CONVENTIONS))

    def to_json_dict(self) -> dict:
        return {
            "conventions": self.conventions,
            "passed": self.passed,
            "gate_value": self.gate_value,
            "C0": self.c0_used,
            "C1": self.c1,
            "eta0": self.eta0,
            "per_edge": [
                {"edge": e, "majorant": m, "margin": g, "passed": p}
                for e, m, g, p in self.per_edge
            ],
        }


def gate_check(system: TransitionSystem, params: KamParams) -> GateReport:
    """Compare every edge's certified hat majorant at sigma0 against the gate
    ``min(eta0, eta0^(mu+1) / ((1 + e^sigma0) C1 mu))``. Pure report."""
    params = resolve_c0(system, params)
    gate = params.delta0
    per_edge = []
    passed = True
    for e, f in zip(system.nerve.edges, system.transitions):
        maj = majorant_norm(f.hat, params.sigma0) if f.hat.truncation else 0.0
        ok = maj < gate
        passed = passed and ok
        per_edge.append((str(e), float(maj), float(gate - maj), bool(ok)))
    return GateReport(
        passed=passed,
        gate_value=float(gate),
        c0_used=float(params.c0),
        c1=float(params.c1),
        eta0=float(params.eta0),
        per_edge=tuple(per_edge),
    )


# ---------------------------------------------------------------------------
# one step of the iteration
# ---------------------------------------------------------------------------


def _solve_changes(system: TransitionSystem, params: KamParams, sigma_m: float,
                   eta_m: float, report: StepReport) -> dict:
    """Solve every populated mode and assemble the per-chart change hats."""
    nerve = system.nerve
    bundle = system.bundle()
    n_t = params.n_trunc
    coeffs = {c: np.zeros(2 * n_t + 1, dtype=complex) for c in nerve.charts}
    modes = {}
    for n in range(-n_t, n_t + 1):
        if n == 0:
            continue
        b = np.array([f.hat.coeff(n) for f in system.transitions])
        if np.any(np.abs(b) > 0):
            modes[n] = b
    # solvability is judged against the dominant mode of the step; sub-scale
    # modes carry round-off whose inconsistency means nothing
    scale = max((float(np.max(np.abs(b))) for b in modes.values()), default=0.0)
    worst = 0.0
    solved = 0
    for n in sorted(modes, key=lambda k: (abs(k), -k)):
        b = modes[n]
        sol = solve_mode(bundle, n, b,
                         solvability_tol=COBOUNDARY_REL_TOL * scale)
        worst = max(worst, sol.residual)
        solved += 1
        for c, val in zip(nerve.charts, sol.a):
            coeffs[c][n + n_t] = val
    report.worst_mode_residual = worst
    report.modes_solved = solved

    psis = {}
    proj = 0.0
    for c in nerve.charts:
        hat = LaurentSeries(coeffs[c], sigma_m - eta_m)
        hat, defect = symmetrize(hat)
        proj = max(proj, defect)
        psis[c] = CircleDiffeo(0.0, hat)
    report.symmetry_projection = proj
    report.record(
        "change_reality_symmetry",
        proj <= SYMMETRY_PROJECTION_TOL,
        proj,
        SYMMETRY_PROJECTION_TOL,
        "projection size of the solved change coefficients",
    )
    return psis


def kam_step(
    system: TransitionSystem, m: int, params: KamParams
) -> tuple[TransitionSystem, dict, StepReport]:
    """One renewal step at level m; returns the shrunk-width system, the
    per-chart coordinate changes, and the certificate report.

    With ``strict_schedule`` the first failed certificate raises; otherwise
    failures are recorded in the report and the step completes anyway.
    """
    params = resolve_c0(system, params)
    sigma_m, eta_m, delta_m = schedule(params, m)
    _, _, delta_next = schedule(params, m + 1)
    sigma_next = sigma_m - 4.0 * eta_m
    if abs(system.width - sigma_m) > 1e-9:
        raise ValidationError(
            f"system width {system.width:.6g} does not match schedule width "
            f"{sigma_m:.6g} at step {m}"
        )
    report = StepReport(m=m)
    strict = params.strict_schedule

    def enforce(name: str, exc_cls=ScheduleViolationError):
        rec = report.certificates[name]
        if strict and not rec.passed:
            if exc_cls is ScheduleViolationError:
                raise ScheduleViolationError(
                    name, f"{name}: {rec.lhs:.6e} !<= {rec.rhs:.6e} at step {m}"
                )
            raise exc_cls(f"{name}: {rec.lhs:.6e} !<= {rec.rhs:.6e} at step {m}")

    # entry gate of the induction; the sampled sup norm rides along in the
    # report but never drives a comparison
    max_maj = system.max_hat_majorant(sigma_m)
    samples = max(2 * params.n_trunc + 1, 256)
    report.max_hat_empirical = max(
        (empirical_sup_norm(f.hat, sigma_m * (1.0 - 1e-9), samples)
         for f in system.transitions if f.hat.truncation),
        default=0.0,
    )
    report.record("hat_norm_below_delta", max_maj < delta_m, max_maj, delta_m,
                  "certified transition-hat norm against the schedule gate")
    enforce("hat_norm_below_delta")

    # coefficient decay audit (with the majorant itself as the norm bound)
    decay_ok = True
    for f in system.transitions:
        if f.hat.truncation == 0:
            continue
        rep = decay_check(f.hat, majorant_norm(f.hat, sigma_m))
        decay_ok = decay_ok and rep.passed
    report.record("coefficient_decay", decay_ok, 0.0 if decay_ok else 1.0, 0.0,
                  "per-index decay of hat coefficients")
    enforce("coefficient_decay")

    psis = _solve_changes(system, params, sigma_m, eta_m, report)
    enforce("change_reality_symmetry")

    # norm power law of the changes on shrunk strips
    c1 = params.c1
    power_ok, power_lhs, power_rhs = True, 0.0, 0.0
    for c, psi in psis.items():
        for nu in (1, 2, 3, 4):
            lam = nu * eta_m
            lhs = majorant_norm(psi.hat, sigma_m - lam)
            rhs = c1 * max(max_maj, 1e-300) * lam ** (-params.mu)
            if lhs > rhs:
                power_ok = False
                power_lhs, power_rhs = lhs, rhs
    report.record("change_norm_power_law", power_ok, power_lhs, power_rhs,
                  "change-hat majorant against C1 * |f| * lambda^-mu")
    enforce("change_norm_power_law")

    # derivative bound: contraction margin for inversion and injectivity
    deriv_bound = 1.0 / (1.0 + math.exp(params.sigma0))
    deriv_worst = 0.0
    for psi in psis.values():
        deriv_worst = max(
            deriv_worst, log_derivative_majorant(psi.hat, sigma_m - eta_m)
        )
    report.record("change_derivative_bound", deriv_worst <= deriv_bound,
                  deriv_worst, deriv_bound,
                  "log-lift derivative majorant of the changes")
    enforce("change_derivative_bound")

    # annulus nesting that makes the renewed transitions well defined
    nest_ok, nest_lhs = True, 0.0
    for psi in psis.values():
        for width in (sigma_m - 4.0 * eta_m, sigma_m - eta_m):
            v = majorant_norm(psi.hat, width)
            if v >= eta_m:
                nest_ok = False
                nest_lhs = max(nest_lhs, v)
    for f in system.transitions:
        v = majorant_norm(f.hat, sigma_m - 3.0 * eta_m) if f.hat.truncation else 0.0
        if v >= eta_m:
            nest_ok = False
            nest_lhs = max(nest_lhs, v)
    report.record("annulus_nesting", nest_ok, nest_lhs, eta_m,
                  "radial displacement of charts and transitions")
    enforce("annulus_nesting")

    # renewal: psi_k^{-1} o f o psi_j on the shrunk annulus
    w = unit_circle(max(4 * params.n_trunc, 8))
    new_transitions = []
    drift = 0.0
    tail_worst = 0.0
    proj_worst = report.symmetry_projection
    for e, f in zip(system.nerve.edges, system.transitions):
        x = eval_diffeo(psis[e.src], w)
        y = eval_diffeo(f, x)
        z = apply_inverse(psis[e.dst], y)
        renewed, info = expand_detailed(z, params.n_trunc, sigma_next)
        new_transitions.append(renewed)
        d = abs(renewed.phase - f.phase) % TWO_PI
        drift = max(drift, min(d, TWO_PI - d))
        tail_worst = max(tail_worst, info.tail_mass)
        proj_worst = max(proj_worst, info.symmetry_defect)
    report.phase_drift = drift
    report.tail_mass = tail_worst
    report.symmetry_projection = proj_worst

    report.record("phase_invariance", drift <= PHASE_DRIFT_TOL, drift,
                  PHASE_DRIFT_TOL, "multiplier phase drift across the renewal")
    enforce("phase_invariance")

    report.record("tail_budget", tail_worst <= TAIL_BUDGET_FACTOR * delta_m,
                  tail_worst, TAIL_BUDGET_FACTOR * delta_m,
                  "discarded spectral tail mass")
    enforce("tail_budget", TruncationError)

    new_system = TransitionSystem(system.nerve, tuple(new_transitions), sigma_next)

    new_maj = new_system.max_hat_majorant(sigma_next)
    report.record("contraction_claim", new_maj < delta_next, new_maj, delta_next,
                  "renewed hat norm against the next schedule gate")
    enforce("contraction_claim", ConvergenceViolationError)

    return new_system, psis, report


# ---------------------------------------------------------------------------
# the full run
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Conjugacy:
    """Per-chart composed coordinate change plus the limiting linear cocycle.

    ``charts[j]`` maps final coordinates to initial ones, so correctness
    reads ``charts[k](t_e u) = f_e(charts[j](u))`` for every edge j -> k of
    the initial system.
    """

    charts: dict
    linear_cocycle: UnitaryFlatBundle
    final_width: float

    def residual(self, initial: TransitionSystem, samples: int = 128) -> float:
        u = unit_circle(samples)
        worst = 0.0
        for e, f0, phi in zip(
            initial.nerve.edges, initial.transitions, self.linear_cocycle.phases
        ):
            lhs = eval_diffeo(self.charts[e.dst], np.exp(1j * phi) * u)
            rhs = eval_diffeo(f0, eval_diffeo(self.charts[e.src], u))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "final_width": float(self.final_width),
            "charts": {c: phi.to_json_dict() for c, phi in self.charts.items()},
            "linear_cocycle": self.linear_cocycle.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Conjugacy":
        bundle = UnitaryFlatBundle.from_json_dict(doc["linear_cocycle"])
        charts = {
            c: CircleDiffeo.from_json_dict(d) for c, d in doc["charts"].items()
        }
        return cls(charts=charts, linear_cocycle=bundle,
                   final_width=float(doc["final_width"]))


@dataclass
class RunResult:
    conjugacy: Conjugacy
    trace: IterationTrace
    converged: bool
    outcome: str                  # "converged" or "max_iter"
    gate: GateReport
    conjugation_residual: float
    params: KamParams
    steps: int


def run(system: TransitionSystem, params: KamParams) -> RunResult:
    """Iterate until the certified hat norm drops below tol or max_iter hits.

    The per-chart conjugacy is composed step by step; any hard error raised
    mid-iteration carries the trace so far on its ``trace`` attribute.
    """
    try:
        params = resolve_c0(system, params)
        gate = gate_check(system, params)
    except Exception as exc:
        exc.trace = IterationTrace()
        raise
    if not gate.passed and params.strict_schedule:
        worst = min(gate.per_edge, key=lambda row: row[2])
        err = ScheduleViolationError(
            "initial_norm_gate",
            f"initial norm gate failed on edge {worst[0]}: majorant "
            f"{worst[1]:.3e} >= gate {gate.gate_value:.3e}",
        )
        err.trace = IterationTrace()
        raise err

    trace = IterationTrace()
    initial = system
    phis = {c: identity_map(params.sigma0) for c in system.nerve.charts}
    converged = False
    steps = 0
    for m in range(params.max_iter + 1):
        sigma_m, eta_m, delta_m = schedule(params, m)
        max_maj = system.max_hat_majorant(sigma_m)
        if max_maj < params.tol:
            trace.append(TraceRow(m, sigma_m, eta_m, delta_m, max_maj,
                                  0.0, 0.0, 0.0))
            converged = True
            steps = m
            break
        if m == params.max_iter:
            trace.append(TraceRow(m, sigma_m, eta_m, delta_m, max_maj,
                                  0.0, 0.0, 0.0))
            steps = m
            break
        t0 = time.perf_counter()
        try:
            system, psis, report = kam_step(system, m, params)
            sigma_next = sigma_m - 4.0 * eta_m
            for c in system.nerve.charts:
                phis[c] = compose(phis[c], psis[c], sigma_next,
                                  n_trunc=params.n_trunc)
        except Exception as exc:
            exc.trace = trace
            raise
        wall_ms = (time.perf_counter() - t0) * 1000.0
        trace.append(TraceRow(m, sigma_m, eta_m, delta_m, max_maj,
                              report.worst_mode_residual, report.tail_mass,
                              wall_ms))
        for cert in report.violations:
            trace.violations.append((m, cert))

    final_width = schedule(params, steps)[0]
    conj = Conjugacy(
        charts=phis,
        linear_cocycle=system.bundle(),
        final_width=final_width,
    )
    residual = conj.residual(initial)
    return RunResult(
        conjugacy=conj,
        trace=trace,
        converged=converged,
        outcome="converged" if converged else "max_iter",
        gate=gate,
        conjugation_residual=residual,
        params=params,
        steps=steps,
    )


def alpha_vs_rotation(system: TransitionSystem, iters: int = 32768) -> list:
    """Per-edge comparison of the multiplier phase with 2 pi times the
    rotation number. Diagnostic only; nothing is asserted."""
    out = []
    for e, f in zip(system.nerve.edges, system.transitions):
        rho = rotation_number(f, iters=iters)
        diff = (f.phase - TWO_PI * rho + math.pi) % TWO_PI - math.pi
        out.append(
            {
                "edge": str(e),
                "phase": float(f.phase),
                "two_pi_rotation_number": float(TWO_PI * rho),
                "difference_mod_2pi": float(diff),
            }
        )
    return out
