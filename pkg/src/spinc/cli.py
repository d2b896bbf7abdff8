"""Command-line verification harness.

Each suite returns a Report of checks with status pass, fail or measured.
Structured output is JSON with sorted keys; the exit status is 0 iff no check
has status fail.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .bilinear import (
    alpha_k,
    equivariance_check,
    generic_inner_spec,
    hermitian_flag_oracle,
    random_spinor,
    reality_table,
    spinc_basis,
    vector_adjoint_residual,
)
from .clifford import CliffordRep, build_rep, half_projectors, half_spinor_label_report, volume_complex
from .exact import ExactScalar, parse_scalar
from .forms import KForm
from .pointwise import (
    CurvatureBlock,
    FramePointData,
    classical_reduction,
    dirac_and_twistor,
    int1_residual,
    random_curvature_block,
)

SCHEMA_VERSION = "1"
SUITES = ("clifford", "bilinear", "lowdim", "integrability", "fefferman", "conformal")
STATUSES = ("pass", "fail", "measured")

REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "spinc verification report",
    "type": "object",
    "required": ["schema_version", "tool_version", "suite", "status", "config", "checks"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool_version": {"type": "string"},
        "suite": {"type": "string"},
        "status": {"enum": ["pass", "fail"]},
        "config": {
            "type": "object",
            "required": ["seed", "fd_step", "points", "max_n", "samples"],
            "properties": {
                "seed": {"type": "integer"},
                "fd_step": {"type": "number", "exclusiveMinimum": 0},
                "points": {"type": "integer", "minimum": 1},
                "max_n": {"type": "integer", "minimum": 1},
                "samples": {"type": "integer", "minimum": 1},
            },
        },
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "status", "value", "citation", "provenance"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "status": {"enum": list(STATUSES)},
                    "value": {"type": ["number", "string", "null"]},
                    "citation": {"type": "string", "minLength": 1},
                    "provenance": {"enum": ["published", "derived", "invariant", "measured"]},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class Config:
    seed: int = 0
    fd_step: float = 1e-4
    points: int = 50
    max_n: int = 10
    samples: int = 100

    def __post_init__(self):
        if not (isinstance(self.fd_step, float) and self.fd_step > 0 and math.isfinite(self.fd_step)):
            raise ValueError("fd_step must be a positive finite number")
        if self.points < 1 or self.samples < 1:
            raise ValueError("points and samples must be positive")
        if not 1 <= self.max_n <= 12:
            raise ValueError("max_n must lie in 1..12")


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    value: float | str | None
    citation: str
    provenance: str


@dataclass
class Report:
    suite: str
    config: Config
    checks: list[Check] = field(default_factory=list)
    tool_version: str = __version__

    @property
    def status(self) -> str:
        return "fail" if any(c.status == "fail" for c in self.checks) else "pass"

    def failing(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": self.tool_version,
            "suite": self.suite,
            "status": self.status,
            "config": asdict(self.config),
            "checks": [asdict(c) for c in self.checks],
        }


def _num(v: float) -> float:
    """Six significant digits, so reports stay byte-stable under last-bit noise."""
    v = float(v)
    if not math.isfinite(v):
        return v
    return float(f"{v:.6g}")


def _bound(name: str, value: float, tol: float, citation: str, provenance: str = "derived") -> Check:
    return Check(name, "pass" if value < tol else "fail", _num(value), citation, provenance)


def _flag(name: str, ok: bool, citation: str, provenance: str = "invariant", value=None) -> Check:
    return Check(name, "pass" if ok else "fail", value, citation, provenance)


def _measured(name: str, value, citation: str) -> Check:
    if isinstance(value, float):
        value = _num(value)
    return Check(name, "measured", value, citation, "measured")


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _signatures(max_n: int):
    return [(p, n - p) for n in range(1, max_n + 1) for p in range(n + 1)]


def suite_clifford(cfg: Config) -> list[Check]:
    reps = {}
    bad = []
    for p, q in _signatures(cfg.max_n):
        reps[(p, q)] = rep = build_rep(p, q)
        if rep.relation_residuals():
            bad.append(f"({p},{q})")
    out = [_flag(f"relations p+q<={cfg.max_n}", not bad, "Clifford relations in every signature",
                 value=", ".join(bad) or None)]
    for (p, q), rep in reps.items():
        n = p + q
        if n % 2 and q > 0:
            out.append(_flag(f"volume ({p},{q})", volume_complex(rep) == rep.identity(),
                             "complex volume element acts as Id"))
        if n % 2 == 0:
            ranks = [P.rank() for P in half_projectors(rep)]
            want = 2 ** (n // 2 - 1)
            out.append(_flag(f"half projectors ({p},{q})", ranks == [want, want],
                             "half-spinor projector ranks", value=f"{ranks[0]},{ranks[1]}"))
            if n <= 6:
                out.append(_measured(f"half-spinor label mismatches ({p},{q})",
                                     len(half_spinor_label_report(rep)), "u(delta) labels vs volume eigenvalue"))
    return out


BILINEAR_SIGNATURES = ((1, 3), (2, 2), (0, 4), (1, 4), (3, 2), (0, 5), (2, 3))


@lru_cache(maxsize=None)
def _generic_case(p: int, q: int):
    rep = build_rep(p, q)
    spec = generic_inner_spec(rep)
    return rep, spec, reality_table(rep, spec)


def _bilinear_cases():
    from .lowdim import CASES, signature_case

    for p, q in BILINEAR_SIGNATURES:
        rep, spec, table = _generic_case(p, q)
        yield f"({p},{q})", rep, spec, table
    for tag in CASES:
        c = signature_case(tag)
        yield tag, c.rep, c.spec, c.table


def suite_bilinear(cfg: Config) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for label, rep, spec, table in _bilinear_cases():
        flags = [hermitian_flag_oracle(rep, spec, k) for k in range(rep.n + 1)]
        out.append(_flag(f"{label} reality table", flags == [table[k] for k in range(rep.n + 1)],
                         "reality of <alpha.chi, chi> per degree", "derived",
                         value="".join(f[0] if f else "?" for f in flags)))
        adj_ok = True
        for _ in range(cfg.samples // 10):
            u = random_spinor(rep.dim, rng)
            v = random_spinor(rep.dim, rng)
            adj_ok &= all(ExactScalar.coerce(vector_adjoint_residual(rep, spec, i, u, v)).is_zero()
                          for i in range(rep.n))
        out.append(_flag(f"{label} vector adjoint", adj_ok, "<X.u, v> + (-1)^p <u, X.v> = 0"))
        nonzero = all(not alpha_k(rep, spec, table, chi, chi, rep.p).is_zero()
                      for chi in (random_spinor(rep.dim, rng) for _ in range(cfg.samples))
                      if any(not ExactScalar.coerce(c).is_zero() for c in chi))
        zero = np.array([ExactScalar(0)] * rep.dim, dtype=object)
        out.append(_flag(f"{label} alpha^p detects zero",
                         nonzero and alpha_k(rep, spec, table, zero, zero, rep.p).is_zero(),
                         "alpha^p_chi = 0 iff chi = 0", "published"))
        chi = random_spinor(rep.dim, rng)
        eq_ok = all(equivariance_check(rep, spec, table, k, X, chi).is_zero()
                    for X in spinc_basis(rep.n) for k in range(rep.n + 1))
        out.append(_flag(f"{label} equivariance", eq_ok, "infinitesimal equivariance of alpha^k", "published"))
    return out


def suite_lowdim(cfg: Config) -> list[Check]:
    from .lowdim import (
        OMEGA_CASES,
        assemble_omega_system,
        classify_spinor,
        killing_identity_residual,
        no_charge_check,
        omega_array,
        orbit_table_comparison,
        point_data,
        rank_report,
        signature_case,
        solve_connection,
        tata_residual,
        twistor_residuals_exact,
        u_b,
    )

    out = []
    for c in orbit_table_comparison():
        out.append(Check(f"orbit {c.case} {c.spinor} {c.item}", "pass" if c.match else "fail",
                         f"expected {c.expected}; got {c.measured}", "published orbit table", "published"))
    out.append(_measured("S32 3*u_b(1) label", classify_spinor(signature_case("S32"), 3 * u_b(1)),
                         "orbit label of a scaled u_b"))
    for source in ("listed", "corrected"):
        r = rank_report(assemble_omega_system("L14", 1, source))
        out.append(_measured(f"L14 omega system ({source})",
                             f"rows={r.rows} rank={r.rank} inconsistent_for_f!=0={r.inconsistent_for_nonzero_f} "
                             f"rows_not_implied={list(r.not_implied_by_form_equation)}",
                             "linear constraints on the connection"))
    rng = np.random.default_rng(cfg.seed)
    fs = (0, 1, -1, 2, -2)
    for tag in OMEGA_CASES:
        systems = {f: assemble_omega_system(tag, f) for f in fs}
        consistent = unique = printed_zero = half_zero = closed = True
        for s in range(cfg.samples):
            f = fs[s % len(fs)]
            om = omega_array(systems[f].sample(rng, f))
            consistent &= all(v.is_zero() for v in tata_residual(tag, om, f).values())
            consistent &= all(k == 0 for k in killing_identity_residual(tag, om))
            sol = solve_connection(tag, om, systems[f])
            unique &= sol.unique
            closed &= sol.matches_closed_form
            for A, acc in ((sol.A, "printed"), (sol.A_half_omega, "half")):
                res = twistor_residuals_exact(point_data(tag, om, A))
                ok = all(all(ExactScalar.coerce(v).is_zero() for v in r) for r in res)
                if acc == "printed":
                    printed_zero &= ok
                else:
                    half_zero &= ok
        n = cfg.samples
        out.append(_flag(f"{tag} sampled omega satisfy form equation", consistent, "conformal Killing 2-form equation"))
        out.append(_flag(f"{tag} connection unique ({n} samples)", unique, "twistor system for A", "published"))
        out.append(_flag(f"{tag} printed-system A gives zero twistor residuals ({n} samples)", printed_zero,
                         "twistor system for A", "published"))
        out.append(_flag(f"{tag} A with half omega term gives zero twistor residuals ({n} samples)", half_zero,
                         "twistor equation at solved data", "derived"))
        if tag == "L14":
            out.append(_flag(f"{tag} printed-system A equals closed form ({n} samples)", closed,
                             "closed-form connection in the chosen gauge", "published"))
    for tag, name in (("S22", "u0+"), ("S22", "u0-")):
        r = no_charge_check(tag, name)
        out.append(_flag(f"{tag} {name} forces A = 0", r.A_kernel_dim == 0,
                         "real/imaginary split of the (2,2) twistor equation", "published",
                         value=r.A_kernel_dim))
    return out


def _charts():
    from .numgeo import cr_model, fefferman_chart

    return {tag: (cr_model(tag), fefferman_chart(cr_model(tag))) for tag in ("Heisenberg", "Sphere3")}


INTEGRABILITY_KEYS = ("1p", "2p", "int1", "pr2", "noco_row1", "noco_row2", "noco_row3", "noco_row4", "ed",
                      "weyl_trace")


def suite_integrability(cfg: Config) -> list[Check]:
    from dataclasses import replace

    from .numgeo import fefferman_chart, fefferman_points, residual_sweep

    rng = np.random.default_rng(cfg.seed)
    out = []
    for p, q in ((1, 3), (1, 4), (2, 2), (0, 4)):
        rep, spec, table = _generic_case(p, q)
        n = p + q
        om = np.full((n, n, n), ExactScalar(0), dtype=object)
        data = FramePointData(rep, spec, table, om, tuple(ExactScalar(0) for _ in range(n)),
                              random_spinor(rep.dim, rng), curvature=random_curvature_block(rep.epsilon, rng))
        gaps = classical_reduction(data, random_spinor(rep.dim, rng))
        for name, v in gaps.items():
            out.append(_flag(f"({p},{q}) {name} without charge is classical", v == 0.0,
                             "charge-free reduction of the integrability conditions", "derived", value=_num(v)))
    count = max(1, min(cfg.points, 5))
    for tag, (model, chart) in _charts().items():
        chart = replace(chart, fd_step=cfg.fd_step) if cfg.fd_step != chart.fd_step else chart
        rep = residual_sweep(chart, fefferman_points(model, rng, count), depth=3)
        for key in INTEGRABILITY_KEYS:
            out.append(_bound(f"{tag} {key} ({count} points)", rep.max(key), 1e-5, f"{key} residual on Fefferman data"))
        out.append(_flag(f"{tag} poll consistency", rep.max("poll_consistent") == 0.0,
                         "consistency of the length conditions", "published"))
        for key in ("measured_noco_literal", "measured_pr2_literal", "pr2_derived", "aux_weyl_dA", "killing",
                    "measured_K_VV", "weyl_max", "cotton_max", "dA_max"):
            out.append(_measured(f"{tag} {key}", rep.max(key), f"{key} on Fefferman data"))
    return out


def suite_fefferman(cfg: Config) -> list[Check]:
    from dataclasses import replace

    from .numgeo import charge_check, fefferman_points, residual_sweep, tanaka_webster

    rng = np.random.default_rng(cfg.seed)
    charts = _charts()
    model, chart = charts["Heisenberg"]
    chart = replace(chart, fd_step=cfg.fd_step)
    rep = residual_sweep(chart, fefferman_points(model, rng, cfg.points), depth=1)
    const = rep.max("measured_nabla_V_constant")
    pts = f"{cfg.points} points"
    out = [
        _bound(f"Heisenberg twistor ({pts})", rep.max("twistor"), 1e-5, "twistor equation on Fefferman data"),
        _bound(f"Heisenberg nabla_N phi - i/2 phi ({pts})", rep.max("nabla_N"), 1e-5, "derivative along the fibre",
               "published"),
        _bound(f"Heisenberg nabla_T* phi ({pts})", rep.max("nabla_T*"), 1e-5, "derivative along T*", "published"),
        _bound(f"Heisenberg V + sqrt2 N ({pts})", rep.max("V_plus_sqrt2_N"), 1e-5, "Dirac current of the spinor",
               "published"),
        _measured("Heisenberg nabla_V phi / (i phi)", const, "derivative along the Dirac current"),
        _measured("Heisenberg nabla_V phi candidates",
                  f"+1/sqrt2 off by {_num(abs(const - 2 ** -0.5))}; -1/sqrt2 off by {_num(abs(const + 2 ** -0.5))}",
                  "derivative along the Dirac current"),
    ]
    smodel, _ = charts["Sphere3"]
    cc = charge_check(smodel, fefferman_points(smodel, rng, 30))
    out.append(_bound("Sphere3 dA - 2 Ric^W (30 points)", cc["max_residual"], 1e-5, "charge of the Fefferman spinor",
                      "published"))
    out.append(_flag("Sphere3 dA nonzero", cc["max_dA"] > 1e-2, "charged solution", "published",
                     value=_num(cc["max_dA"])))
    x = smodel.sample_points(np.random.default_rng(cfg.seed), 3)
    rws = [float(tanaka_webster(smodel, y)["RW"]) for y in x]
    out.append(_measured("Sphere3 R^W", rws[0], "Tanaka-Webster scalar curvature"))
    out.append(_bound("Sphere3 R^W constancy", max(rws) - min(rws), 1e-4, "Tanaka-Webster scalar curvature"))
    hm, _ = charts["Heisenberg"]
    out.append(_bound("Heisenberg R^W", max(abs(float(tanaka_webster(hm, y)["RW"]))
                                           for y in hm.sample_points(np.random.default_rng(cfg.seed), 3)),
                      1e-5, "flat Tanaka-Webster connection"))
    return out


def suite_conformal(cfg: Config) -> list[Check]:
    from .numgeo import SIGMA_PROFILES, TAU_PROFILES, conformal_check, fefferman_points, gauge_check

    rng = np.random.default_rng(cfg.seed)
    out = []
    count = max(1, min(cfg.points, 5))
    for tag, (model, chart) in _charts().items():
        pts = fefferman_points(model, rng, count)
        for name, sigma in SIGMA_PROFILES.items():
            r = conformal_check(chart, sigma, pts)
            out.append(_bound(f"{tag} rescaled by sigma={name}", r["rescaled"], 1e-5,
                              "conformal covariance of the twistor operator", "published"))
        for name, tau in TAU_PROFILES.items():
            r = gauge_check(chart, tau, pts)
            out.append(_bound(f"{tag} gauge tau={name}", r["gauged_twistor"], 1e-5, "gauge covariance", "published"))
            out.append(_bound(f"{tag} gauge law tau={name}", r["covariance"], 1e-10, "gauge covariance, pointwise"))
    return out


SUITE_FUNCS = {
    "clifford": suite_clifford,
    "bilinear": suite_bilinear,
    "lowdim": suite_lowdim,
    "integrability": suite_integrability,
    "fefferman": suite_fefferman,
    "conformal": suite_conformal,
}


def run_suite(name: str, config: Config | None = None) -> Report:
    config = config or Config()
    if name == "all":
        checks = [replace_name(c, f"{s}: {c.name}") for s in SUITES for c in SUITE_FUNCS[s](config)]
        return Report("all", config, checks)
    if name not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return Report(name, config, SUITE_FUNCS[name](config))


def replace_name(c: Check, name: str) -> Check:
    return Check(name, c.status, c.value, c.citation, c.provenance)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, REPORT_SCHEMA)


def emit_report(report: Report, fmt: str = "text") -> str:
    if fmt == "structured":
        doc = report.to_dict()
        validate_report(doc)
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt != "text":
        raise ValueError("format must be 'text' or 'structured'")
    cfg = report.config
    lines = [f"suite {report.suite}  (spinc {report.tool_version}, seed={cfg.seed}, fd_step={cfg.fd_step:g}, "
             f"points={cfg.points}, max_n={cfg.max_n}, samples={cfg.samples})"]
    width = max((len(c.name) for c in report.checks), default=0)
    for c in report.checks:
        val = "" if c.value is None else (f"{c.value:.3e}" if isinstance(c.value, float) else str(c.value))
        lines.append(f"  {c.status.upper():8} {c.name:<{width}}  {val}  [{c.citation}]")
    counts = {s: sum(c.status == s for c in report.checks) for s in STATUSES}
    lines.append(f"{report.status.upper()}: {counts['pass']} pass, {counts['fail']} fail, "
                 f"{counts['measured']} measured")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# point data files
# ---------------------------------------------------------------------------


class PointDataError(ValueError):
    """Malformed point data; the message starts with the offending field."""


_DECIMAL = re.compile(r"\d\.\d*|\.\d|[eE][+-]?\d")


def _scalar(value, where: str, mode: list):
    """Exact for integer/rational literals, complex float once any decimal appears."""
    if isinstance(value, bool):
        raise PointDataError(f"{where}: booleans are not scalars")
    if isinstance(value, int):
        return ExactScalar(value)
    if isinstance(value, float):
        mode[0] = False
        return complex(value)
    if isinstance(value, list) and len(value) == 2:  # [re, im] decimal pair
        mode[0] = False
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError) as e:
            raise PointDataError(f"{where}: {e}") from None
    if not isinstance(value, str):
        raise PointDataError(f"{where}: expected a number or literal string, got {type(value).__name__}")
    text = value.strip()
    try:
        if _DECIMAL.search(text):
            mode[0] = False
            return complex(text.replace("i", "j").replace(" ", ""))
        return parse_scalar(text)
    except (ValueError, ZeroDivisionError) as e:
        raise PointDataError(f"{where}: cannot parse {value!r} ({e})") from None


def _finish(value, exact_mode: bool):
    if exact_mode:
        return ExactScalar.coerce(value)
    return complex(value)


def _index_key(key: str, k: int, n: int, where: str) -> tuple[int, ...]:
    try:
        idx = tuple(int(t) for t in key.split(",")) if key else ()
    except ValueError:
        raise PointDataError(f"{where}: bad index key {key!r}") from None
    if len(idx) != k or any(not 0 <= i < n for i in idx):
        raise PointDataError(f"{where}: index key {key!r} must list {k} indices in 0..{n - 1}")
    return idx


def _list(doc, name: str, length: int | None = None) -> list:
    v = doc.get(name) if isinstance(doc, dict) else None
    if not isinstance(v, list):
        raise PointDataError(f"{name}: expected a list")
    if length is not None and len(v) != length:
        raise PointDataError(f"{name}: expected {length} entries, got {len(v)}")
    return v


def point_data_from_dict(doc: dict) -> FramePointData:
    """Build validated FramePointData from the documented dictionary layout."""
    if not isinstance(doc, dict):
        raise PointDataError("document: expected an object")
    sig = _list(doc, "signature", 2)
    if not all(isinstance(s, int) and s >= 0 for s in sig) or sum(sig) < 3:
        raise PointDataError("signature: expected [p, q] with p, q >= 0 and p + q >= 3")
    p, q = sig
    n = p + q
    rep, spec, table = _generic_case(p, q)
    mode = [True]
    raw_om = _list(doc, "omega", n)
    om = []
    for i, plane in enumerate(raw_om):
        if not isinstance(plane, list) or len(plane) != n or any(not isinstance(r, list) or len(r) != n for r in plane):
            raise PointDataError(f"omega[{i}]: expected an {n} x {n} table")
        om.append([[_scalar(v, f"omega[{i}][{k}][{l}]", mode) for l, v in enumerate(r)] for k, r in enumerate(plane)])
    A = [_scalar(v, f"A[{i}]", mode) for i, v in enumerate(_list(doc, "A", n))]
    phi = [_scalar(v, f"phi[{k}]", mode) for k, v in enumerate(_list(doc, "phi", rep.dim))]
    dphi = None
    if "dphi" in doc:
        rows = _list(doc, "dphi", n)
        dphi = []
        for i, r in enumerate(rows):
            if not isinstance(r, list) or len(r) != rep.dim:
                raise PointDataError(f"dphi[{i}]: expected {rep.dim} components")
            dphi.append([_scalar(v, f"dphi[{i}][{k}]", mode) for k, v in enumerate(r)])
    curv = doc.get("curvature")
    parsed_curv = None
    if curv is not None:
        if not isinstance(curv, dict):
            raise PointDataError("curvature: expected an object")
        parsed_curv = _parse_curvature(curv, n, mode)
    ex = mode[0]
    fin = np.vectorize(lambda v: _finish(v, ex), otypes=[object if ex else complex])
    omega = fin(np.array(om, dtype=object))
    dtype = object if ex else complex
    args = dict(
        omega=omega,
        A=tuple(_finish(a, ex) for a in A),
        phi=np.array([_finish(v, ex) for v in phi], dtype=dtype),
        dphi=None if dphi is None else tuple(np.array([_finish(v, ex) for v in r], dtype=dtype) for r in dphi),
        curvature=None if parsed_curv is None else _finish_curvature(parsed_curv, rep.epsilon, ex),
    )
    if "tolerance" in doc:
        tol = doc["tolerance"]
        if not isinstance(tol, (int, float)) or tol <= 0:
            raise PointDataError("tolerance: expected a positive number")
        args["tol"] = float(tol)
    try:
        return FramePointData(rep, spec, table, **args)
    except ValueError as e:
        raise PointDataError(str(e)) from None


def _parse_form_table(obj, k: int, n: int, where: str, mode: list) -> dict:
    if not isinstance(obj, dict):
        raise PointDataError(f"{where}: expected an object of index keys")
    return {_index_key(key, k, n, where): _scalar(v, f"{where}[{key}]", mode) for key, v in obj.items()}


def _parse_curvature(curv: dict, n: int, mode: list) -> dict:
    out: dict = {}
    if "W" in curv:
        W = curv["W"]
        if not isinstance(W, dict):
            raise PointDataError("curvature.W: expected an object keyed by 'i,j'")
        out["W"] = {_index_key(key, 2, n, "curvature.W"): _parse_form_table(v, 2, n, f"curvature.W[{key}]", mode)
                    for key, v in W.items()}
    if "C" in curv:
        C = curv["C"]
        if not isinstance(C, dict):
            raise PointDataError("curvature.C: expected an object keyed by 'i,j'")
        out["C"] = {_index_key(key, 2, n, "curvature.C"): _parse_form_table(v, 1, n, f"curvature.C[{key}]", mode)
                    for key, v in C.items()}
    if "K" in curv:
        K = _list(curv, "K", n)
        if any(not isinstance(r, list) or len(r) != n for r in K):
            raise PointDataError(f"curvature.K: expected an {n} x {n} table")
        out["K"] = [[_scalar(v, f"curvature.K[{i}][{j}]", mode) for j, v in enumerate(r)] for i, r in enumerate(K)]
    if "dA" in curv:
        out["dA"] = _parse_form_table(curv["dA"], 2, n, "curvature.dA", mode)
    if "nabla_dA" in curv:
        rows = curv["nabla_dA"]
        if not isinstance(rows, list) or len(rows) != n:
            raise PointDataError(f"curvature.nabla_dA: expected {n} forms")
        out["nabla_dA"] = [_parse_form_table(r, 2, n, f"curvature.nabla_dA[{i}]", mode) for i, r in enumerate(rows)]
    if "R" in curv:
        out["R"] = _scalar(curv["R"], "curvature.R", mode)
    return out


def _finish_curvature(c: dict, eps, ex: bool) -> CurvatureBlock:
    def form(tab, k):
        return KForm.from_values(eps, k, {idx: _real_if_exact(_finish(v, ex), ex) for idx, v in tab.items()})

    def form_keep(tab, k):
        return KForm.from_values(eps, k, {idx: _finish(v, ex) for idx, v in tab.items()})

    n = len(eps)
    K = None
    if "K" in c:
        K = np.array([[_real_if_exact(_finish(v, ex), ex) for v in r] for r in c["K"]],
                     dtype=object if ex else float)
    return CurvatureBlock(
        W={k: form(v, 2) for k, v in c["W"].items()} if "W" in c else None,
        K=K,
        C={k: form(v, 1) for k, v in c["C"].items()} if "C" in c else None,
        dA=form_keep(c["dA"], 2) if "dA" in c else None,
        nabla_dA=tuple(form_keep(t, 2) for t in c["nabla_dA"]) if "nabla_dA" in c else None,
        R=_real_if_exact(_finish(c["R"], ex), ex) if "R" in c else (Fraction(0) if ex else 0.0),
    ) if n else None


def _real_if_exact(v, ex: bool):
    """Real curvature entries stay ExactScalar in exact mode and become floats otherwise."""
    if ex:
        return v
    if abs(v.imag) > 1e-12:
        raise PointDataError(f"curvature: expected a real value, got {v}")
    return v.real


def _literal(v) -> str | float | list:
    if isinstance(v, (ExactScalar, int, Fraction)):
        return str(ExactScalar.coerce(v))
    z = complex(v)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _form_table(a: KForm) -> dict:
    """Nonzero values a(s_I) on increasing index tuples."""
    out = {}
    for idx in combinations(range(a.n), a.k):
        v = a.value(idx)
        if not (ExactScalar.coerce(v).is_zero() if isinstance(v, (ExactScalar, int, Fraction)) else v == 0):
            out[",".join(map(str, idx))] = _literal(v)
    return out


def point_data_to_dict(data: FramePointData) -> dict:
    """Inverse of point_data_from_dict.  Exact values become literal strings."""
    n = data.n
    doc: dict = {
        "signature": [data.rep.p, data.rep.q],
        "omega": [[[_literal(data.omega[i, k, l]) for l in range(n)] for k in range(n)] for i in range(n)],
        "A": [_literal(a) for a in data.A],
        "phi": [_literal(v) for v in data.phi],
        "dphi": [[_literal(v) for v in d] for d in data.dphi],
    }
    cb = data.curvature
    if cb is not None:
        c: dict = {"R": _literal(cb.R)}
        if cb.W is not None:
            c["W"] = {f"{i},{j}": _form_table(w) for (i, j), w in sorted(cb.W.items())}
        if cb.C is not None:
            c["C"] = {f"{i},{j}": _form_table(w) for (i, j), w in sorted(cb.C.items())}
        if cb.K is not None:
            c["K"] = [[_literal(v) for v in r] for r in np.asarray(cb.K)]
        if cb.dA is not None:
            c["dA"] = _form_table(cb.dA)
        if cb.nabla_dA is not None:
            c["nabla_dA"] = [_form_table(f) for f in cb.nabla_dA]
        doc["curvature"] = c
    if not data.exact:
        doc["tolerance"] = data.tol
    return doc


def load_point_data(path: str | Path) -> FramePointData:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise PointDataError(f"document: invalid JSON ({e})") from None
    return point_data_from_dict(doc)


def dump_point_data(data: FramePointData, path: str | Path) -> None:
    Path(path).write_text(json.dumps(point_data_to_dict(data), indent=2) + "\n", encoding="utf-8")


def suite_input(data: FramePointData, cfg: Config) -> list[Check]:
    """Checks on user-supplied point data: residuals are measured, invariants asserted."""
    n = data.n
    out = [Check("validation", "pass", f"signature ({data.rep.p},{data.rep.q}), "
                 f"{'exact' if data.exact else 'approximate'}", "point data invariants", "invariant")]
    psi, res = dirac_and_twistor(data)
    vals = [max((abs(complex(v)) for v in r), default=0.0) for r in res]
    out.append(_measured("twistor residual max", max(vals), "twistor operator at the point"))
    cb = data.curvature
    if cb is not None and cb.dA is not None:
        m = max(max((abs(complex(v)) for v in int1_residual(data, i, j)), default=0.0)
                for i, j in combinations(range(n), 2))
        out.append(_measured("int1 residual max", m, "first integrability condition"))
        if cb.W is not None and cb.K is not None and cb.C is not None:
            gaps = classical_reduction(data, psi)
            for k, v in gaps.items():
                out.append(_bound(f"{k} without charge is classical", v, 1e-12 if not data.exact else 1e-300,
                                  "charge-free reduction of the integrability conditions"))
    return out


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinc", description="Run Spin^c twistor verification suites.")
    ap.add_argument("--suite", default="all", choices=SUITES + ("all",))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fd-step", type=float, default=1e-4)
    ap.add_argument("--points", type=int, default=50)
    ap.add_argument("--max-n", type=int, default=10)
    ap.add_argument("--samples", type=int, default=100, help="random samples for exact suites")
    ap.add_argument("--format", choices=("text", "structured"), default="text")
    ap.add_argument("--input", help="point data file; runs the pointwise checks on it instead of a suite")
    ap.add_argument("--output", help="write the report here instead of stdout")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = Config(seed=args.seed, fd_step=float(args.fd_step), points=args.points, max_n=args.max_n,
                     samples=args.samples)
    except ValueError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return 2
    try:
        if args.input:
            report = Report("input", cfg, suite_input(load_point_data(args.input), cfg))
        else:
            report = run_suite(args.suite, cfg)
    except (PointDataError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = emit_report(report, args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for c in report.failing():
        print(f"FAIL {c.name}: {c.value}", file=sys.stderr)
    return 0 if report.status == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
