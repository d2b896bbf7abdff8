"""Explicit 4x4 representations in signatures (1,4), (0,5), (2,2), (3,2), their
orbit data, and the exact linear algebra behind the isotropic-spinor connection.

Frame indices are 0-based.  For L14 and R05 index 0 is the distinguished
direction e_0; for S22 and S32 index k stands for e_{k+1}.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .bilinear import InnerProductSpec, RealityTable, alpha_k, inner, reality_table
from .clifford import CliffordRep, volume_complex
from .exact import I, INV_SQRT2, ONE, ZERO, ExactMatrix, ExactScalar, exact, exact_vector, nullspace, solve_exact
from .forms import KForm, clifford_action, contract, wedge
from .pointwise import FramePointData, cov_deriv, dirac_and_twistor

CASES = ("L14", "R05", "S22", "S32")
OMEGA_CASES = ("L14", "S32")


@dataclass(frozen=True)
class SignatureCase:
    tag: str
    rep: CliffordRep
    spec: InnerProductSpec
    table: RealityTable
    spinors: dict = field(default_factory=dict, compare=False)
    labels: tuple = ()

    @property
    def n(self) -> int:
        return self.rep.n

    @property
    def epsilon(self) -> tuple[int, ...]:
        return self.rep.epsilon


def _m(rows) -> ExactMatrix:
    return ExactMatrix.from_rows(rows)


def _l14_generators() -> list[ExactMatrix]:
    i = 1j
    return [
        _m([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]),
        _m([[0, i, 0, 0], [i, 0, 0, 0], [0, 0, 0, i], [0, 0, i, 0]]),
        _m([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]),
        _m([[0, 0, -i, 0], [0, 0, 0, i], [-i, 0, 0, 0], [0, i, 0, 0]]),
        _m([[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]]),
    ]


def _s22_generators() -> list[ExactMatrix]:
    return [
        _m([[0, 0, 0, -1], [0, 0, -1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]),
        _m([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]]),
        _m([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]),
        _m([[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]]),
    ]


def _s32_generators() -> list[ExactMatrix]:
    return [
        _m([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]]),
        _m([[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]),
        _m([[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, -1, 0]]),
        _m([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]),
        _m([[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]]),
    ]


def u_b(b) -> np.ndarray:
    """(1, 0, i b, 0)/sqrt2 in signature (3,2)."""
    b = exact(b)
    return np.array([INV_SQRT2, ZERO, I * b * INV_SQRT2, ZERO], dtype=object)


@lru_cache(maxsize=None)
def signature_case(tag: str) -> SignatureCase:
    if tag == "L14":
        rep = CliffordRep(1, 4, tuple(_l14_generators()), label="L14").check()
        spec = InnerProductSpec(1, ONE, rep.generators[0], name="(e0 v, w)")
        spinors = {"u1": exact_vector([1, 0, 0, 0]), "u0": exact_vector([1, 1, 0, 0])}
        labels = tuple(f"e{k}" for k in range(5))
    elif tag == "R05":
        gens = _l14_generators()
        gens[0] = gens[0].scale(ExactScalar(0, -1))
        rep = CliffordRep(0, 5, tuple(gens), label="R05").check()
        spec = InnerProductSpec(0, ONE, ExactMatrix.identity(4), name="hermitian")
        spinors = {"u": exact_vector([1, 0, 0, 0])}
        labels = tuple(f"e{k}" for k in range(5))
    elif tag == "S22":
        rep = CliffordRep(2, 2, tuple(_s22_generators()), label="S22").check()
        spec = InnerProductSpec(2, ONE, rep.generators[0] @ rep.generators[1], name="(e1 e2 v, w)")
        spinors = {f"u0{'+' if s > 0 else '-'}": v for s, v in _real_half_spinors(rep).items()}
        labels = tuple(f"e{k + 1}" for k in range(4))
    elif tag == "S32":
        rep = CliffordRep(3, 2, tuple(_s32_generators()), label="S32").check()
        J = _m([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]])
        # v^T J conj(w) = (J^T v, w)_C
        spec = InnerProductSpec(3, ONE, J.transpose(), name="v^T J conj(w)")
        spinors = {"u": exact_vector([1, 0, 0, 0]), "u0": exact_vector([1j, 1, 0, 0]), "u1": u_b(1)}
        labels = tuple(f"e{k + 1}" for k in range(5))
    else:
        raise ValueError(f"unknown case {tag!r}; expected one of {CASES}")
    table = reality_table(rep, spec, samples=40)
    return SignatureCase(tag, rep, spec, table, spinors, labels)


def _real_half_spinors(rep: CliffordRep) -> dict:
    """First real basis vector of each omega_C eigenspace (omega_C is real here)."""
    w = volume_complex(rep)
    out = {}
    Id = rep.identity()
    for sign in (1, -1):
        P = (Id + w.scale(sign)).to_object()
        col = next(c for c in range(4) if any(not P[r, c].is_zero() for r in range(4)))
        out[sign] = np.array([P[r, col] for r in range(4)], dtype=object)
    return out


# ---------------------------------------------------------------------------
# orbit data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitInvariants:
    norm: ExactScalar
    V: tuple
    alpha2: KForm
    alpha2_action: np.ndarray

    def action_eigenvalue(self, chi) -> ExactScalar | None:
        """lambda with alpha^2 . chi = lambda chi, or None."""
        k = next(k for k, c in enumerate(chi) if not exact(c).is_zero())
        lam = exact(self.alpha2_action[k]) / exact(chi[k])
        if all((exact(a) - lam * exact(c)).is_zero() for a, c in zip(self.alpha2_action, chi)):
            return lam
        return None


def _check_nonzero(chi):
    if all(exact(c).is_zero() for c in chi):
        raise ValueError("spinor must be nonzero")


def orbit_invariants(case: SignatureCase, chi) -> OrbitInvariants:
    chi = np.array([exact(c) for c in chi], dtype=object)
    _check_nonzero(chi)
    norm = exact(inner(case.spec, chi, chi))
    a1 = alpha_k(case.rep, case.spec, case.table, chi, chi, 1)
    a2 = alpha_k(case.rep, case.spec, case.table, chi, chi, 2)
    act = clifford_action(case.rep, a2, chi)
    return OrbitInvariants(norm, tuple(exact(v) for v in a1.sharp()), a2, act)


def classify_spinor(case: SignatureCase, chi) -> str:
    """Orbit label built from the invariants."""
    inv = orbit_invariants(case, chi)
    if not inv.norm.is_zero():
        label = f"norm = {inv.norm}"
        if case.tag == "S32":
            b = 1 if float(inv.norm.imag()) > 0 else -1
            label += f", scaled class of u_b with b = {b}"
        return label
    if case.tag in ("S22", "S32"):
        if all(v.is_zero() for v in inv.V):
            return "isotropic, V = 0 (type u)"
        return "isotropic, V != 0 (type u0)"
    return "isotropic"


# Published orbit values, frame indices as in the module docstring.  ``V`` is
# (kind, components): "vector" compares the Dirac current, "form" its flat.
REFERENCE_ORBIT_VALUES: dict[tuple[str, str], dict] = {
    ("L14", "u1"): {"norm": "1", "V": ("vector", (1, 0, 0, 0, 0)),
                    "alpha2": {(1, 2): 1, (3, 4): 1}, "action": "2i"},
    ("L14", "u0"): {"norm": "0", "V": ("vector", (-2, 0, -2, 0, 0)),
                    "alpha2": {(0, 1): -2, (1, 2): 2}, "action": "0"},
    ("S32", "u"): {"norm": "0", "V": ("vector", (0, 0, 0, 0, 0)),
                   "alpha2": {(0, 2): -1, (2, 4): -1, (0, 3): 1, (3, 4): 1}, "action": "0"},
    ("S32", "u0"): {"norm": "0", "V": ("vector", (2, 0, 0, 0, -2)),
                    "alpha2": {(0, 3): -2, (3, 4): -2}, "action": "0"},
    ("S32", "u1"): {"norm": "-i", "V": ("form", (0, -1, 0, 0, 0)),
                    "alpha2": {(0, 2): -1, (3, 4): 1}, "action": "-2i"},
}


@dataclass(frozen=True)
class OrbitComparison:
    case: str
    spinor: str
    item: str
    expected: str
    measured: str
    match: bool


def _fmt_vec(v) -> str:
    return "(" + ", ".join(str(exact(c)) for c in v) + ")"


def _fmt_form(a: KForm) -> str:
    terms = [f"{exact(c)}*e{i}^e{j}" for (i, j), c in sorted(a.coeffs.items()) if not exact(c).is_zero()]
    return " + ".join(terms) if terms else "0"


def orbit_table_comparison() -> list[OrbitComparison]:
    """Item-by-item exact comparison of computed orbit invariants with REFERENCE_ORBIT_VALUES."""
    from .exact import parse_scalar

    out = []
    for (tag, name), ref in REFERENCE_ORBIT_VALUES.items():
        case = signature_case(tag)
        chi = case.spinors[name]
        inv = orbit_invariants(case, chi)
        eps = case.rep.epsilon
        norm = parse_scalar(ref["norm"])
        out.append(OrbitComparison(tag, name, "norm", str(norm), str(inv.norm), norm == inv.norm))
        kind, comps = ref["V"]
        got = inv.V if kind == "vector" else tuple(e * v for e, v in zip(eps, inv.V))
        want = tuple(exact(c) for c in comps)
        out.append(OrbitComparison(tag, name, f"V ({kind})", _fmt_vec(want), _fmt_vec(got),
                                   all(a == b for a, b in zip(want, got))))
        a2 = KForm(eps, 2, {k: exact(v) for k, v in ref["alpha2"].items()})
        out.append(OrbitComparison(tag, name, "alpha2", _fmt_form(a2), _fmt_form(inv.alpha2),
                                   (a2 - inv.alpha2).is_zero()))
        lam = parse_scalar(ref["action"])
        got_lam = inv.action_eigenvalue(chi)
        out.append(OrbitComparison(tag, name, "alpha2 action", str(lam), str(got_lam), got_lam == lam))
    return out


# ---------------------------------------------------------------------------
# the omega system
# ---------------------------------------------------------------------------

_PAIRS = [(a, b) for a in range(5) for b in range(a + 1, 5)]
N_OMEGA = 5 * len(_PAIRS)
F_COL = N_OMEGA


def omega_index(a: int, b: int, k: int) -> tuple[int, int]:
    """(column, sign) of omega_ab^k among the unknowns."""
    if a == b:
        raise ValueError("diagonal omega entries vanish")
    s = 1
    if a > b:
        a, b, s = b, a, -1
    return k * len(_PAIRS) + _PAIRS.index((a, b)), s


def omega_array(x) -> np.ndarray:
    """omega[k, a, b] = omega_ab^k from a solution vector."""
    out = np.full((5, 5, 5), Fraction(0), dtype=object)
    for k in range(5):
        for a, b in _PAIRS:
            col, _ = omega_index(a, b, k)
            out[k, a, b] = x[col]
            out[k, b, a] = -x[col]
    return out


# Constraint rows as listed, "w<ab>^<k>" standing for omega_ab^k.
_L14_LISTED = """
w20^1 = f; w23^1 + w30^1 = 0; w24^1 + w40^1 = 0;
w20^2 = 0; w12^1 - w10^1 = 0; w24^2 + w40^2 = 0; w23^2 + w30^2 = w13^1;
w13^1 = -w20^3; w23^3 + w30^3 = 0; w24^3 + w40^3 = 0;
w14^1 + w20^4 = 0; w23^4 + w30^4 = 0;
w20^0 = w10^1 - w12^1; w23^0 + w30^0 = -w13^1; w24^0 + w40^0 = -w14^1; w20^0 = 0;
w13^2 = 0; w14^2 = 0; w12^2 - w10^2 = f;
w23^2 + w30^2 = -w20^3; w13^3 = f; w14^3 = 0; w12^3 - w10^3 = 0;
w24^2 = -w20^4; w14^2 = 0; w13^4 = 0; w14^4 = f; w12^4 - w10^4 = 0;
w13^2 = w13^0; w14^0 = w14^2; w12^0 - w10^0 = -f;
w23^3 + w30^3 = 0; w13^3 = f; w14^3 = -w13^4;
w20^3 = w23^0 + w30^0; w13^0 = w10^3 - w12^3; w13^3 = f; w14^3 = 0; w13^0 = 0;
w24^4 + w40^4 = 0; w14^4 = f;
w24^0 + w40^0 = w20^4; w12^4 - w10^4 = -w14^0; w14^0 = 0;
w12^0 - w10^0 = 0
"""

# rows of the listing replaced in the consistent system: index -> replacement text
_L14_CORRECTIONS = {
    5: "w24^2 + w40^2 = w14^1",
    23: "w24^2 + w40^2 = -w20^4",
    44: "w12^0 - w10^0 = -f",
}

_TERM = re.compile(r"([+-]?)\s*(w(\d)(\d)\^(\d)|f|0)")


def _parse_side(text: str) -> list:
    row = [Fraction(0)] * (N_OMEGA + 1)
    for sign, tok, a, b, k in _TERM.findall(text):
        s = -1 if sign == "-" else 1
        if tok == "f":
            row[F_COL] += s
        elif tok != "0":
            col, t = omega_index(int(a), int(b), int(k))
            row[col] += s * t
    return row


def parse_constraint(text: str) -> list:
    """Row r with sum r[c] x[c] + r[F_COL] f = 0."""
    lhs, rhs = text.split("=")
    L, R = _parse_side(lhs), _parse_side(rhs)
    return [x - y for x, y in zip(L, R)]


def listed_rows() -> list[str]:
    return [r.strip() for r in _L14_LISTED.replace("\n", " ").split(";") if r.strip()]


def _rank(rows) -> int:
    from .exact import rref
    return len(rref(rows)[1]) if rows else 0


@dataclass(frozen=True)
class OmegaSystem:
    """Linear constraints on the 50 omega unknowns and f (last column)."""

    case: str
    rows: tuple
    source: str
    f: Fraction = Fraction(0)

    def residual(self, x, f=None) -> list:
        f = self.f if f is None else Fraction(f)
        return [sum((r[c] * x[c] for c in range(N_OMEGA) if r[c]), Fraction(0)) + r[F_COL] * f
                for r in self.rows]

    def satisfied(self, x, f=None) -> bool:
        return all(v == 0 for v in self.residual(x, f))

    def rank(self) -> int:
        return _rank([r[:N_OMEGA] for r in self.rows])

    def sample(self, rng: np.random.Generator, f=None, bound: int = 2) -> list:
        f = self.f if f is None else Fraction(f)
        x0, basis = _solution_space(self.rows)
        if x0 is None:
            raise ValueError(f"{self.case} constraint system is inconsistent for f != 0")
        x = [v * f for v in x0]
        for vec in basis:
            t = int(rng.integers(-bound, bound + 1))
            if t:
                x = [a + t * b for a, b in zip(x, vec)]
        return x


@lru_cache(maxsize=None)
def _solution_space_cached(rows: tuple):
    A = [list(r[:N_OMEGA]) for r in rows]
    b = [-r[F_COL] for r in rows]
    return solve_exact(A, b)


def _solution_space(rows):
    return _solution_space_cached(tuple(tuple(r) for r in rows))


def killing_form_data(tag: str) -> tuple[KForm, KForm]:
    """(alpha, l) with alpha = r ^ l for the isotropic orbit representative."""
    case = signature_case(tag)
    eps = case.epsilon
    if tag == "L14":
        l = KForm(eps, 1, {(0,): 1, (2,): 1})
        return wedge(KForm(eps, 1, {(1,): 1}), l), l
    if tag == "S32":
        l = KForm(eps, 1, {(0,): 1, (4,): -1})
        return wedge(KForm(eps, 1, {(3,): 1}), l), l
    raise ValueError(f"no omega system for case {tag!r}; expected one of {OMEGA_CASES}")


def _nabla_form(eps, omega_k, a: KForm) -> KForm:
    """nabla_X a for a 1- or 2-form; omega_k[p, j] = omega_pj(X)."""
    n = len(eps)
    out = KForm.zero(eps, a.k)
    for idx, v in a.coeffs.items():
        for pos, p in enumerate(idx):
            for j in range(n):
                w = omega_k[p, j]
                if w == 0:
                    continue
                new = idx[:pos] + (j,) + idx[pos + 1:]
                out = out + KForm.basis(eps, new, v * eps[p] * w)
    return out


def tata_residual(tag: str, omega: np.ndarray, f) -> dict:
    """X -| nabla_Y a + Y -| nabla_X a - f (X -| (Y ^ l) + Y -| (X ^ l)) for all pairs X <= Y."""
    alpha, l = killing_form_data(tag)
    eps = alpha.eps
    n = len(eps)
    nab = [_nabla_form(eps, omega[k], alpha) for k in range(n)]
    out = {}
    for X in range(n):
        for Y in range(X, n):
            lhs = contract(X, nab[Y]) + contract(Y, nab[X])
            fx = KForm.basis(eps, (X,))
            fy = KForm.basis(eps, (Y,))
            rhs = contract(X, wedge(fy, l)) + contract(Y, wedge(fx, l))
            out[(X, Y)] = lhs - rhs.scale(Fraction(f))
    return out


@lru_cache(maxsize=None)
def _tata_rows(tag: str) -> tuple:
    cols = []
    for c in range(N_OMEGA + 1):
        x = [Fraction(0)] * N_OMEGA
        f = Fraction(0)
        if c < N_OMEGA:
            x[c] = Fraction(1)
        else:
            f = Fraction(1)
        res = tata_residual(tag, omega_array(x), f)
        cols.append([res[key].get(idx) for key in sorted(res) for idx in combinations(range(5), 1)])
    rows = [tuple(Fraction(cols[c][r]) for c in range(N_OMEGA + 1)) for r in range(len(cols[0]))]
    rows = [r for r in rows if any(r)]
    return tuple(rows)


def assemble_omega_system(tag: str, f=0, source: str = "corrected") -> OmegaSystem:
    """source: 'listed' (L14 verbatim rows), 'corrected' (L14 rows with repairs), 'derived' (from the form equation)."""
    if tag not in OMEGA_CASES:
        raise ValueError(f"no omega system for case {tag!r}; expected one of {OMEGA_CASES}")
    if source == "derived" or tag == "S32":
        return OmegaSystem(tag, _tata_rows(tag), "derived", Fraction(f))
    texts = listed_rows()
    if source == "corrected":
        texts = [_L14_CORRECTIONS.get(k, t) for k, t in enumerate(texts)]
    elif source != "listed":
        raise ValueError(f"unknown source {source!r}")
    return OmegaSystem(tag, tuple(tuple(parse_constraint(t)) for t in texts), source, Fraction(f))


@dataclass(frozen=True)
class RankReport:
    rows: int
    rank: int
    redundant: tuple
    inconsistent_for_nonzero_f: bool
    not_implied_by_form_equation: tuple
    form_rows_not_implied: int


def rank_report(system: OmegaSystem) -> RankReport:
    """Redundant rows, consistency in f, and agreement with the form equation."""
    rows = [list(r) for r in system.rows]
    redundant = []
    kept: list = []
    for k, r in enumerate(rows):
        if _rank(kept + [r]) == _rank(kept):
            redundant.append(k)
        else:
            kept.append(r)
    x0, _ = _solution_space(system.rows)
    derived = [list(r) for r in _tata_rows(system.case)]
    base = _rank(derived)
    not_implied = tuple(k for k, r in enumerate(rows) if _rank(derived + [r]) > base)
    own = _rank(rows)
    extra = sum(1 for r in derived if _rank(rows + [r]) > own)
    return RankReport(len(rows), own, tuple(redundant), x0 is None, not_implied, extra)


def killing_identity_residual(tag: str, omega: np.ndarray) -> list:
    """g(nabla_i l, s_j) + g(nabla_j l, s_i) for the null vector l, all i <= j."""
    _, l = killing_form_data(tag)
    eps = l.eps
    n = len(eps)
    lv = l.sharp()
    out = []
    for i in range(n):
        for j in range(i, n):
            # g(nabla_i s_a, s_j) = eps_a eps_j omega_aj^i
            t = sum(lv[a] * eps[a] * eps[j] * omega[i, a, j] for a in range(n) if lv[a]) + \
                sum(lv[a] * eps[a] * eps[i] * omega[j, a, i] for a in range(n) if lv[a])
            out.append(t)
    return out


# ---------------------------------------------------------------------------
# connection solver
# ---------------------------------------------------------------------------


def _split(z: ExactScalar) -> list[Fraction]:
    return list(z.components())


def _twistor_system(case: SignatureCase, chi, omega: np.ndarray, omega_factor: Fraction):
    """Rows for A = i a:  eps_i e_i nabla_i chi = eps_j e_j nabla_j chi, split into rational parts.

    nabla_i chi = omega_factor sum_{k<l} omega^i_kl e_k e_l chi + (1/2) A_i chi.
    Returns (M, b) with M a = b.
    """
    rep = case.rep
    eps = case.epsilon
    n = case.n
    G = rep.generators
    base = []
    Acol = []
    for i in range(n):
        t = np.array([ZERO] * 4, dtype=object)
        for k, l in combinations(range(n), 2):
            w = omega[i, k, l]
            if w:
                t = t + np.array([exact(w * omega_factor) * v for v in G[k] @ (G[l] @ chi)], dtype=object)
        base.append(np.array([exact(eps[i]) * v for v in G[i] @ t], dtype=object))
        # coefficient of a_i:  eps_i e_i (1/2) i chi
        Acol.append(np.array([exact(eps[i]) * Fraction(1, 2) * I * v for v in G[i] @ chi], dtype=object))
    M, b = [], []
    for i, j in combinations(range(n), 2):
        for r in range(4):
            coeff = [[Fraction(0)] * 4 for _ in range(n)]
            for c, part in enumerate(_split(Acol[i][r])):
                coeff[i][c] += part
            for c, part in enumerate(_split(Acol[j][r])):
                coeff[j][c] -= part
            rhs = _split(base[j][r] - base[i][r])
            for c in range(4):
                M.append([coeff[q][c] for q in range(n)])
                b.append(rhs[c])
    return M, b


@dataclass(frozen=True)
class ConnectionSolution:
    A: tuple
    A_half_omega: tuple
    A_closed_form: tuple
    unique: bool
    matches_closed_form: bool


def _as_imag(a) -> tuple:
    return tuple(I * exact(v) for v in a)


def closed_form_A(omega: np.ndarray) -> tuple:
    """-2i omega_34 on s_0, s_1, s_2 and -2i (omega_34 + omega_14) on s_3, s_4."""
    out = []
    for k in range(5):
        w = omega[k, 3, 4] + (omega[k, 1, 4] if k >= 3 else 0)
        out.append(ExactScalar(0, -2) * exact(w))
    return tuple(out)


def orbit_spinor(tag: str) -> np.ndarray:
    return signature_case(tag).spinors["u0"]


def solve_connection(tag: str, omega: np.ndarray, system: OmegaSystem | None = None) -> ConnectionSolution:
    """Solve the twistor condition for A with the frame-constant spinor u0.

    ``A`` solves the condition as written with the full omega term and
    ``A_half_omega`` with the covariant-derivative normalization (half the
    omega term); the latter makes the assembled twistor residuals vanish.
    """
    case = signature_case(tag)
    if system is not None:
        flat = [omega[k, a, b] for k in range(5) for a, b in _PAIRS]
        if not system.satisfied(flat):
            raise ValueError("omega violates the constraint system")
    chi = orbit_spinor(tag)
    sols = []
    unique = True
    for factor in (Fraction(1), Fraction(1, 2)):
        M, b = _twistor_system(case, chi, omega, factor)
        x, kernel = solve_exact(M, b)
        if x is None:
            raise ValueError("no connection makes the spinor twistor for this omega")
        unique = unique and not kernel
        sols.append(_as_imag(x))
    closed = closed_form_A(omega) if tag == "L14" else tuple()
    match = bool(closed) and all((a - c).is_zero() for a, c in zip(sols[0], closed))
    return ConnectionSolution(sols[0], sols[1], closed, unique, match)


def point_data(tag: str, omega: np.ndarray, A) -> FramePointData:
    """Exact FramePointData with the frame-constant spinor u0."""
    case = signature_case(tag)
    om = np.empty((5, 5, 5), dtype=object)
    for idx in np.ndindex(5, 5, 5):
        om[idx] = exact(omega[idx])
    return FramePointData(case.rep, case.spec, case.table, om, tuple(A), orbit_spinor(tag))


def twistor_residuals_exact(data: FramePointData) -> list:
    _, res = dirac_and_twistor(data)
    return res


def jol_pair_residuals(tag: str, omega: np.ndarray, A, omega_factor=Fraction(1)) -> dict:
    """eps_i e_i nabla_i u0 - eps_j e_j nabla_j u0 for all 10 pairs, with the given omega weighting."""
    case = signature_case(tag)
    G = case.rep.generators
    eps = case.epsilon
    chi = orbit_spinor(tag)
    terms = []
    for i in range(5):
        t = np.array([exact(A[i]) * Fraction(1, 2) * v for v in chi], dtype=object)
        for k, l in combinations(range(5), 2):
            w = omega[i, k, l]
            if w:
                t = t + np.array([exact(w * omega_factor) * v for v in G[k] @ (G[l] @ chi)], dtype=object)
        terms.append(np.array([exact(eps[i]) * v for v in G[i] @ t], dtype=object))
    return {(i, j): terms[i] - terms[j] for i, j in combinations(range(5), 2)}


# ---------------------------------------------------------------------------
# (2,2) and real-orbit no-charge check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoChargeReport:
    spinor: str
    unknowns: int
    kernel_dim: int
    A_kernel_dim: int


def no_charge_check(tag: str = "S22", name: str | None = None) -> NoChargeReport:
    """Exact kernel of the twistor condition for a frame-constant real spinor.

    Unknowns: real omega^i_kl and a_i with A_i = i a_i.  The report gives the
    dimension of the kernel projected onto the a-coordinates.
    """
    case = signature_case(tag)
    n = case.n
    names = [k for k in case.spinors if name is None or k == name]
    if not names:
        raise ValueError(f"unknown spinor {name!r} for {tag}")
    name = names[0]
    chi = case.spinors[name]
    G = case.rep.generators
    eps = case.epsilon
    pairs = list(combinations(range(n), 2))
    nw = n * len(pairs)
    nunk = nw + n
    # terms[i][r] as a list of coefficient vectors over the unknowns (ExactScalar)
    terms = []
    for i in range(n):
        rows = [[ZERO] * nunk for _ in range(case.rep.dim)]
        for p, (k, l) in enumerate(pairs):
            v = G[i] @ (G[k] @ (G[l] @ chi))
            for r in range(case.rep.dim):
                rows[r][i * len(pairs) + p] = exact(eps[i]) * Fraction(1, 2) * v[r]
        v = G[i] @ chi
        for r in range(case.rep.dim):
            rows[r][nw + i] = exact(eps[i]) * Fraction(1, 2) * I * v[r]
        terms.append(rows)
    M = []
    for i, j in combinations(range(n), 2):
        for r in range(case.rep.dim):
            diff = [a - b for a, b in zip(terms[i][r], terms[j][r])]
            for c in range(4):
                M.append([d.components()[c] for d in diff])
    kernel = nullspace(M)
    a_part = [v[nw:] for v in kernel]
    a_rank = _rank([list(v) for v in a_part]) if a_part else 0
    return NoChargeReport(name, nunk, len(kernel), a_rank)


# ---------------------------------------------------------------------------
# Killing-type data
# ---------------------------------------------------------------------------


def killing_type_data(tag: str, lam, rng: np.random.Generator, name: str | None = None,
                      bound: int = 2) -> FramePointData:
    """Random exact omega and A with dphi chosen so that nabla_i phi = i lam e_i phi."""
    case = signature_case(tag)
    n = case.n
    chi = case.spinors[name or next(iter(case.spinors))]
    om = np.empty((n, n, n), dtype=object)
    for i in range(n):
        for k in range(n):
            om[i, k, k] = ZERO
            for l in range(k + 1, n):
                v = exact(int(rng.integers(-bound, bound + 1)))
                om[i, k, l] = v
                om[i, l, k] = -v
    A = tuple(ExactScalar(0, int(rng.integers(-bound, bound + 1))) for _ in range(n))
    zero = tuple(np.array([ZERO] * case.rep.dim, dtype=object) for _ in range(n))
    base = FramePointData(case.rep, case.spec, case.table, om, A, chi, zero)
    lam = exact(lam)
    dphi = []
    for i in range(n):
        target = np.array([I * lam * v for v in case.rep.generators[i] @ chi], dtype=object)
        dphi.append(target - cov_deriv(base, i))
    return FramePointData(case.rep, case.spec, case.table, om, A, chi, tuple(dphi))


def length_derivative_residual(data: FramePointData, lam) -> list:
    """s_i<phi, phi> from dphi minus i lam (<e_i phi, phi> - <phi, e_i phi>)."""
    lam = exact(lam)
    out = []
    for i in range(data.n):
        lhs = inner(data.spec, data.dphi[i], data.phi) + inner(data.spec, data.phi, data.dphi[i])
        ei = data.act((i,), data.phi)
        rhs = I * lam * (inner(data.spec, ei, data.phi) - inner(data.spec, data.phi, ei))
        out.append(exact(lhs) - rhs)
    return out
