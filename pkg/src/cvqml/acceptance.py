"""Acceptance criteria as plain functions, shared by the test-suite and ``cvqml check``.

Each function returns a :class:`CriterionResult`.  Thresholds are fixed;
``quick`` only reduces sample counts (random instances, shots) and skips
supplementary scans.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .channels import HermitianObservable, TrotterPlan, eswap_channel_error, expA_pR, random_density
from .fock import FockCutoff, FockVector, fidelity, make_fock, partial_trace, tensor
from .gates import (
    PolyPhaseSpec,
    compile_poly_phase,
    compile_quartic_US,
    controlled_swap,
    exp_swap,
    fit_loglog_slope,
    plus_state,
    swap_matrix,
)
from .qml import ClassicalVector, DistanceProblem, distance_estimate, distance_pdf, eigen_distinguish, matrix_invert


@dataclass
class CriterionResult:
    id: str
    name: str
    passed: bool
    value: object
    threshold: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0
    supplementary: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        kind = " (supplementary)" if self.supplementary else ""
        return f"{tag} [{self.id}] {self.name}{kind}: {_fmt(self.value)} (need {self.threshold})"

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "passed": bool(self.passed), "value": self.value,
                "threshold": self.threshold, "details": self.details, "seconds": self.seconds,
                "supplementary": self.supplementary}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_fmt(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        out = fn(*a, **kw)
        for r in out if isinstance(out, list) else [out]:
            r.seconds = time.perf_counter() - t0
        return out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _rand_vec(n, rng):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------


@_timed
def criterion_1(quick: bool = False, seed: int = 1) -> CriterionResult:
    """exp(i theta S) through the ancilla gadget at dims (2, 2, 6, 6)."""
    rng = np.random.default_rng(seed)
    d = 6
    n = 3 if quick else 10
    worst_out, worst_anc = 1.0, 1.0
    for theta in (0.0, math.pi / 6, math.pi / 4, math.pi / 2):
        u = exp_swap(theta, d)
        for _ in range(n):
            psi, phi = _rand_vec(d, rng), _rand_vec(d, rng)
            st = FockVector(FockCutoff((2, 2, d, d)), np.kron(plus_state().amps, np.kron(psi, phi)))
            out = u.mat @ st.amps
            want = math.cos(theta) * np.kron(psi, phi) + 1j * math.sin(theta) * np.kron(phi, psi)
            full = np.kron(plus_state().amps, want)
            worst_out = min(worst_out, abs(np.vdot(full, out)) ** 2)
            red = partial_trace(FockVector(st.cutoff, out), [0, 1])
            worst_anc = min(worst_anc, fidelity(plus_state(), red))
    ok = worst_out >= 1 - 1e-8 and worst_anc >= 1 - 1e-8
    return CriterionResult("1", "exponential-swap action", ok,
                           {"min_output_fidelity": worst_out, "min_ancilla_fidelity": worst_anc},
                           ">= 1 - 1e-8 for both", {"states_per_theta": n})


@_timed
def criterion_2(quick: bool = False, seed: int = 2) -> CriterionResult:
    """Quadratic error of the exponential-swap channel."""
    rng = np.random.default_rng(seed)
    deltas = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
    slopes = []
    for _ in range(2 if quick else 5):
        r, rp = random_density(6, 6, rng), random_density(6, 6, rng)
        errs = [eswap_channel_error(r, rp, dl) for dl in deltas]
        slopes.append(fit_loglog_slope(deltas, errs))
    ok = all(abs(s - 2.0) <= 0.1 for s in slopes)
    return CriterionResult("2", "channel error slope vs delta", ok, slopes, "2.0 +- 0.1 for every pair")


def poly_errors(Ks=(4, 8, 16, 32), dim=16):
    return [compile_poly_phase(PolyPhaseSpec(0.1, (0, 0, 0, 1), K), dim).error() for K in Ks]


def quartic_errors(Ks=(4, 8, 16, 32), dim=16, route="compiled"):
    return [compile_quartic_US(K, dim, route=route).error() for K in Ks]


@_timed
def criterion_3(quick: bool = False) -> list:
    Ks = (4, 8, 16, 32)
    pe = poly_errors(Ks)
    ps = fit_loglog_slope(Ks, pe)
    out = []
    qe = {route: quartic_errors(Ks, route=route) for route in ("compiled", "trotter")}
    qs = {route: fit_loglog_slope(Ks, e) for route, e in qe.items()}
    ok = abs(ps + 1) <= 0.2 and all(abs(s + 1) <= 0.2 for s in qs.values())
    out.append(CriterionResult(
        "3", "phase-gate compilation error slope vs K", ok,
        {"poly_slope": ps, "quartic_compiled_slope": qs["compiled"], "quartic_trotter_slope": qs["trotter"]},
        "-1.0 +- 0.2 for each",
        {"K": list(Ks), "poly_errors": pe, "quartic_errors": qe},
    ))
    out.append(CriterionResult("3-poly", "cubic phase gate slope", abs(ps + 1) <= 0.2, ps, "-1.0 +- 0.2",
                               {"errors": pe}, supplementary=True))
    if not quick:
        big = (128, 256, 512)
        be = quartic_errors(big, route="trotter")
        bs = fit_loglog_slope(big, be)
        out.append(CriterionResult("3-quartic-largeK", "quartic chain slope at K = 128..512",
                                   abs(bs + 1) <= 0.2, bs, "-1.0 +- 0.2", {"K": list(big), "errors": be},
                                   supplementary=True))
    return out


@_timed
def criterion_4(quick: bool = False, seed: int = 4) -> CriterionResult:
    rng = np.random.default_rng(seed)
    d = 6
    c = controlled_swap((2, d, d)).mat
    sw = swap_matrix(d)
    worst = 1.0
    for ctl in (0, 1):
        for _ in range(3 if quick else 10):
            psi = _rand_vec(d * d, rng)
            full = np.kron(make_fock(ctl, 2).amps, psi)
            out = c @ full
            want = np.kron(make_fock(ctl, 2).amps, sw @ psi if ctl else psi)
            worst = min(worst, abs(np.vdot(want, out)) ** 2)
    return CriterionResult("4", "controlled swap action", worst >= 1 - 1e-8, worst, ">= 1 - 1e-8")


@_timed
def criterion_5(quick: bool = False) -> CriterionResult:
    A = np.diag([1.0, -1.0])
    b = ClassicalVector.unit([1, 1])
    gamma, s = 2.0, 4.0
    _, est, rep = eigen_distinguish(A, b, gamma, s, dim_R=40)
    tv = rep.residuals["total_variation"]
    tol = 1 / (gamma * math.sqrt(s))
    est_ok = len(est) == 2 and abs(est[0] + 1) <= tol and abs(est[1] - 1) <= tol
    valley = rep.details["valley_ratio"]
    ok = tv < 1e-3 and est_ok and valley is not None and valley < 0.1
    return CriterionResult("5", "eigenvalue distinguishing", ok,
                           {"total_variation": tv, "estimates": est, "valley_ratio": valley},
                           "TV < 1e-3, |lam_hat -+ 1| <= 0.25, valley < 0.1")


@_timed
def criterion_6(quick: bool = False) -> list:
    A = np.diag([1.0, 0.5])
    b = ClassicalVector.unit([1, 1])
    _, rep = matrix_invert(A, b, 5.0, 20.0)
    tv = rep.residuals["joint_total_variation"]
    inf = rep.residuals["infidelity"]
    fit = oracles.success_rate_exponent(20.0, 5.0, [1.0, 0.5])
    rect = oracles.success_rate_exponent(20.0, 5.0, [1.0, 0.5], window="rectangular")
    return [
        CriterionResult("6a", "inversion joint outcome density vs closed form", tv < 1e-2, tv, "< 1e-2"),
        CriterionResult("6b", "inversion solution infidelity (q_R = 0)", inf < 1e-2, inf, "< 1e-2",
                        {"outcome_averaged_infidelity": rep.residuals["infidelity_outcome_averaged"],
                         "success_probability": rep.success_probability}),
        CriterionResult("6c", "success-rate exponent (product window)", abs(fit.slope - 1.5) <= 0.2,
                        fit.slope, "1.5 +- 0.2",
                        {"mass": fit.mass, "eps": fit.eps, "rectangular_slope": rect.slope}),
    ]


def random_distance_problem(rng) -> DistanceProblem:
    M = int(rng.integers(1, 4))
    N = int(rng.integers(2, 5))

    def cv():
        return ClassicalVector(rng.normal(size=N) + 1j * rng.normal(size=N))

    return DistanceProblem(cv(), tuple(cv() for _ in range(M)))


@_timed
def criterion_7(quick: bool = False, seed: int = 7) -> list:
    rng = np.random.default_rng(seed)
    probs = [random_distance_problem(rng) for _ in range(2 if quick else 5)]
    worst_unit, worst_swap = 0.0, 0.0
    rows = []
    for pr in probs:
        for beta in (2.0, 3.0, 4.0):
            diff = oracles.curve_sign_difference(distance_pdf(pr, beta))
            sd = oracles.sign_difference(beta)
            unit = -sd * pr.distance2 / pr.norm2
            swap = unit / 2
            ep, es = abs(diff - unit) / abs(unit), abs(diff - swap) / abs(swap)
            worst_unit, worst_swap = max(worst_unit, ep), max(worst_swap, es)
            rows.append({"M": pr.M, "N": pr.N, "beta": beta, "sign_difference": diff, "unit_overlap_law": unit})
    out = [
        CriterionResult("7a", "sign-difference law -sd(beta) D^2/N^2", worst_unit < 0.01, worst_unit,
                        "max relative error < 0.01", {"cases": rows}),
        CriterionResult("7a-swap", "sign-difference law with <S> = D^2/(2 N^2)", worst_swap < 0.01,
                        worst_swap, "max relative error < 0.01", supplementary=True),
    ]
    pr = DistanceProblem(ClassicalVector([1, 0]), (ClassicalVector([0, 1]),))
    shots = 10_000 if quick else 100_000
    est, rep = distance_estimate(pr, 2.0, shots=shots, rng=seed)
    se = rep.estimates["D2_standard_error"]
    z = abs(est - pr.distance2) / se
    out.append(CriterionResult("7b", "Monte-Carlo D^2 estimate", z <= 3, {"D2_hat": est, "z": z},
                               "|D2_hat - 2| <= 3 SE", {"shots": shots, "standard_error": se}))
    est_p, rep_p = distance_estimate(pr, 2.0, shots=shots, rng=seed, calibration="unit-overlap")
    zp = abs(est_p - pr.distance2) / rep_p.estimates["D2_standard_error"]
    out.append(CriterionResult("7b-unit", "Monte-Carlo D^2 with the uncorrected estimator", zp <= 3,
                               {"D2_hat": est_p, "z": zp}, "|D2_hat - 2| <= 3 SE", supplementary=True))
    sd4 = oracles.sign_difference(4.0)
    sq4 = oracles.sign_difference_quad(4.0)
    out.append(CriterionResult("7c", "sign_difference(4)", abs(sd4 - 0.2141) <= 5e-4 and abs(sd4 - sq4) < 1e-10,
                               {"dawson": sd4, "quadrature": sq4}, "0.2141 +- 0.0005"))
    return out


def trotter_instance(seed: int = 8, dim_R: int = 20):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(4, 2, rng), random_density(4, 2, rng)
    A = HermitianObservable.from_pair(rho, sigma)
    b = FockVector(FockCutoff((4,)), _rand_vec(4, rng))
    state = tensor(b, make_fock(0, dim_R)).dm()
    return A, state


@_timed
def criterion_8(quick: bool = False, seed: int = 8) -> list:
    A, state = trotter_instance(seed)
    r = expA_pR(TrotterPlan(1.0, 0.05), A, state)
    out = [CriterionResult("8", "Trotter path vs direct exponential", r.trace_distance < 5e-3, r.trace_distance,
                           "< 5e-3", {"copies": r.copies, "min_ancilla_fidelity": r.min_ancilla_fidelity})]
    if not quick:
        eps = [0.1, 0.05, 0.025]
        errs = [expA_pR(TrotterPlan(1.0, e), A, state).trace_distance for e in eps]
        sl = fit_loglog_slope(eps, errs)
        out.append(CriterionResult("8-slope", "Trotter error slope vs epsilon", abs(sl - 1) <= 0.2, sl, "1.0 +- 0.2",
                                   {"eps": eps, "errors": errs}, supplementary=True))
    return out


@_timed
def criterion_9(quick: bool = False) -> CriterionResult:
    import tempfile
    from pathlib import Path

    from .cli import run_config, strip_timestamp

    cfg = {"kind": "distance", "u": [1, 0], "vs": [[0, 1]], "beta": 2.0, "shots": 2000, "seed": 11}
    reports = []
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(2):
            out = Path(tmp) / f"r{k}"
            run_config(cfg, out)
            reports.append(strip_timestamp((out / "report.json").read_text()))
    same = reports[0] == reports[1]
    return CriterionResult("9", "deterministic reports", same, same, "identical modulo timestamp")


ALL = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
       criterion_8, criterion_9]


def run_suite(quick: bool = False, echo=print) -> list:
    results = []
    for fn in ALL:
        out = fn(quick=quick)
        for r in out if isinstance(out, list) else [out]:
            results.append(r)
            if echo:
                echo(r.line())
    return results
