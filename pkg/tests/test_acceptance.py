"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line before asserting."""
import time
from fractions import Fraction

import numpy as np
import pytest

from spinc.bilinear import alpha_k, equivariance_check, random_spinor, spinc_basis, vector_adjoint_residual
from spinc.cli import BILINEAR_SIGNATURES, _generic_case
from spinc.clifford import build_rep, half_projectors, volume_complex
from spinc.exact import ExactScalar, parse_scalar
from spinc.forms import KForm
from spinc.lowdim import (
    CASES,
    assemble_omega_system,
    no_charge_check,
    omega_array,
    orbit_invariants,
    point_data,
    signature_case,
    solve_connection,
    twistor_residuals_exact,
)
from spinc.numgeo import (
    SIGMA_PROFILES,
    TAU_PROFILES,
    charge_check,
    conformal_check,
    cr_model,
    fefferman_chart,
    fefferman_points,
    gauge_check,
    residual_sweep,
)
from spinc.pointwise import FramePointData, classical_reduction, random_curvature_block

BOUND = 1e-5


def _signatures(max_n):
    return [(p, n - p) for n in range(1, max_n + 1) for p in range(n + 1)]


def test_criterion_1_clifford_relations(criterion):
    t0 = time.perf_counter()
    bad = [(p, q) for p, q in _signatures(10) if build_rep(p, q).relation_residuals()]
    dt = time.perf_counter() - t0
    ok = criterion(1, not bad and dt < 10, f"{len(_signatures(10))} signatures, failures {bad}, {dt:.2f} s")
    assert ok


def test_criterion_2_volume_and_projectors(criterion):
    vol_bad, proj_bad = [], []
    for p, q in _signatures(10):
        n = p + q
        rep = build_rep(p, q)
        if n % 2 and n <= 9 and q > 0 and volume_complex(rep) != rep.identity():
            vol_bad.append((p, q))
        if n % 2 == 0:
            want = 2 ** (n // 2 - 1)
            if [P.rank() for P in half_projectors(rep)] != [want, want]:
                proj_bad.append((p, q))
    ok = criterion(2, not vol_bad and not proj_bad, f"volume failures {vol_bad}, projector failures {proj_bad}")
    assert ok


# published orbit values: norm, Dirac current (as vector, or as its flat when marked "form"),
# alpha^2 coefficients on e_a ^ e_b, eigenvalue of alpha^2 acting on the spinor
PUBLISHED = {
    ("L14", "u1"): ("1", "vector", (1, 0, 0, 0, 0), {(1, 2): 1, (3, 4): 1}, "2i"),
    ("L14", "u0"): ("0", "vector", (-2, 0, -2, 0, 0), {(0, 1): -2, (1, 2): 2}, "0"),
    ("S32", "u"): ("0", "vector", (0, 0, 0, 0, 0), {(0, 2): -1, (2, 4): -1, (0, 3): 1, (3, 4): 1}, "0"),
    ("S32", "u0"): ("0", "vector", (2, 0, 0, 0, -2), {(0, 3): -2, (3, 4): -2}, "0"),
    ("S32", "u1"): ("-i", "form", (0, -1, 0, 0, 0), {(0, 2): -1, (3, 4): 1}, "-2i"),
}


def test_criterion_3_orbit_tables(criterion):
    wrong = []
    for (tag, name), (norm, kind, V, a2, lam) in PUBLISHED.items():
        case = signature_case(tag)
        chi = case.spinors[name]
        inv = orbit_invariants(case, chi)
        got_V = inv.V if kind == "vector" else tuple(e * v for e, v in zip(case.epsilon, inv.V))
        checks = {
            "norm": inv.norm == parse_scalar(norm),
            "V": all(ExactScalar.coerce(a) == b for a, b in zip(got_V, V)),
            "alpha2": (inv.alpha2 - KForm(case.epsilon, 2, a2)).is_zero(),
            "action": inv.action_eigenvalue(chi) == parse_scalar(lam),
        }
        wrong += [f"{tag} {name} {item}" for item, good in checks.items() if not good]
    ok = criterion(3, not wrong, f"{20 - len(wrong)}/20 items match; mismatches: {', '.join(wrong) or 'none'}")
    assert ok


def test_criterion_4_connection_solver(criterion):
    rng = np.random.default_rng(0)
    fs = (0, 1, -1, 2, -2)
    counts = dict(samples=0, unique=0, closed=0, printed_zero=0, half_zero=0)
    systems = {f: assemble_omega_system("L14", f) for f in fs}
    for s in range(100):
        f = fs[s % 5]
        om = omega_array(systems[f].sample(rng, f))
        sol = solve_connection("L14", om, systems[f])
        counts["samples"] += 1
        counts["unique"] += sol.unique
        counts["closed"] += sol.matches_closed_form
        for A, key in ((sol.A, "printed_zero"), (sol.A_half_omega, "half_zero")):
            res = twistor_residuals_exact(point_data("L14", om, A))
            counts[key] += all(ExactScalar.coerce(v).is_zero() for r in res for v in r)
    n = counts["samples"]
    ok = counts["unique"] == counts["closed"] == counts["printed_zero"] == n
    criterion(4, ok, f"{n} samples: unique {counts['unique']}, equal to closed form {counts['closed']}, "
                     f"zero twistor residuals {counts['printed_zero']} "
                     f"(with half omega term: {counts['half_zero']})")
    assert counts["unique"] == n
    assert counts["half_zero"] == n
    assert counts["closed"] == n
    assert counts["printed_zero"] == n


def test_criterion_5_no_charge(criterion):
    reports = [no_charge_check("S22", name) for name in ("u0+", "u0-")]
    dims = [r.A_kernel_dim for r in reports]
    ok = criterion(5, dims == [0, 0], f"kernel dimension in A per real half spinor: {dims}")
    assert ok


def test_criterion_6_heisenberg_sweep(criterion):
    model = cr_model("Heisenberg")
    chart = fefferman_chart(model, fd_step=1e-4)
    pts = fefferman_points(model, np.random.default_rng(0), 50)
    t0 = time.perf_counter()
    rep = residual_sweep(chart, pts, depth=1)
    dt = time.perf_counter() - t0
    vals = {k: rep.max(k) for k in ("twistor", "nabla_N", "nabla_T*", "V_plus_sqrt2_N")}
    ok = all(v < BOUND for v in vals.values()) and dt < 60
    criterion(6, ok, ", ".join(f"{k} {v:.2e}" for k, v in vals.items()) + f", {dt:.1f} s")
    assert ok


def test_criterion_7_charge_identity(criterion):
    model = cr_model("Sphere3")
    cc = charge_check(model, fefferman_points(model, np.random.default_rng(0), 30))
    ok = cc["max_residual"] < BOUND and cc["max_dA"] > 1e-2
    criterion(7, ok, f"max |dA - 2 Ric^W| {cc['max_residual']:.2e}, max |dA| {cc['max_dA']:.3f}")
    assert ok


SWEEP_KEYS = ("1p", "2p", "int1", "pr2", "noco_row1", "noco_row2", "noco_row3", "noco_row4", "ed")


@pytest.mark.slow
def test_criterion_8_integrability_suite(criterion):
    rng = np.random.default_rng(0)
    worst = {}
    poll = True
    for tag in ("Heisenberg", "Sphere3"):
        model = cr_model(tag)
        rep = residual_sweep(fefferman_chart(model), fefferman_points(model, rng, 5), depth=3)
        for k in SWEEP_KEYS:
            worst[f"{tag} {k}"] = rep.max(k)
        poll &= rep.max("poll_consistent") == 0.0
    gaps = {}
    for p, q in ((1, 3), (1, 4), (2, 2), (0, 4)):
        rep_, spec, table = _generic_case(p, q)
        n = p + q
        om = np.full((n, n, n), Fraction(0), dtype=object)
        data = FramePointData(rep_, spec, table, om, (0,) * n, random_spinor(rep_.dim, rng),
                              curvature=random_curvature_block(rep_.epsilon, rng))
        for k, v in classical_reduction(data, random_spinor(rep_.dim, rng)).items():
            gaps[f"({p},{q}) {k}"] = v
    top = max(worst, key=worst.get)
    ok = all(v < BOUND for v in worst.values()) and poll and all(v == 0 for v in gaps.values())
    criterion(8, ok, f"largest residual {top} = {worst[top]:.2e}, length conditions consistent {poll}, "
                     f"{sum(v == 0 for v in gaps.values())}/{len(gaps)} charge-free reductions exact")
    assert ok


def test_criterion_9_covariance(criterion):
    rng = np.random.default_rng(0)
    worst = 0.0
    law = 0.0
    for tag in ("Heisenberg", "Sphere3"):
        model = cr_model(tag)
        chart = fefferman_chart(model)
        pts = fefferman_points(model, rng, 3)
        for sigma in SIGMA_PROFILES.values():
            worst = max(worst, conformal_check(chart, sigma, pts)["rescaled"])
        for tau in TAU_PROFILES.values():
            r = gauge_check(chart, tau, pts)
            worst = max(worst, r["gauged_twistor"])
            law = max(law, r["covariance"])
    ok = worst < BOUND and law < 1e-10
    criterion(9, ok, f"{len(SIGMA_PROFILES)} sigma and {len(TAU_PROFILES)} tau profiles, worst residual "
                     f"{worst:.2e}, pointwise gauge law {law:.1e}")
    assert ok


def _cases():
    for p, q in BILINEAR_SIGNATURES:
        yield f"({p},{q})", *_generic_case(p, q)
    for tag in CASES:
        c = signature_case(tag)
        yield tag, c.rep, c.spec, c.table


def test_criterion_10_bilinear_layer(criterion):
    rng = np.random.default_rng(0)
    failures = []
    for label, rep, spec, table in _cases():
        zero = np.array([ExactScalar(0)] * rep.dim, dtype=object)
        if not alpha_k(rep, spec, table, zero, zero, rep.p).is_zero():
            failures.append(f"{label} zero spinor")
        for _ in range(100):
            chi = random_spinor(rep.dim, rng)
            if any(not c.is_zero() for c in chi) and alpha_k(rep, spec, table, chi, chi, rep.p).is_zero():
                failures.append(f"{label} alpha^p")
                break
        chi = random_spinor(rep.dim, rng)
        if not all(equivariance_check(rep, spec, table, k, X, chi).is_zero()
                   for X in spinc_basis(rep.n) for k in range(rep.n + 1)):
            failures.append(f"{label} equivariance")
        u, v = random_spinor(rep.dim, rng), random_spinor(rep.dim, rng)
        if not all(vector_adjoint_residual(rep, spec, i, u, v).is_zero() for i in range(rep.n)):
            failures.append(f"{label} adjoint")
    ok = criterion(10, not failures, f"{len(BILINEAR_SIGNATURES) + len(CASES)} signatures, failures: "
                                     f"{failures or 'none'}")
    assert ok
