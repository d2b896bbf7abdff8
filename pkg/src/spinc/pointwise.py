"""Pointwise Spin^c covariant derivative, twistor operator and integrability residuals.

All quantities refer to a pseudo-orthonormal frame (s_1, ..., s_n) at one
point.  ``omega[i, k, l]`` is omega_kl(s_i) = eps_k eps_l g(nabla_{s_i} s_k, s_l)
and ``A[i]`` = A(s_i) is purely imaginary.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations

import numpy as np

from .bilinear import InnerProductSpec, RealityTable, inner
from .clifford import CliffordRep
from .exact import ExactScalar
from .forms import KForm, clifford_action, contract, wedge


def _is_exact_value(v) -> bool:
    return isinstance(v, (int, Fraction, ExactScalar))


@dataclass(frozen=True)
class CurvatureBlock:
    """W[(i, j)], C[(i, j)] and nabla_dA[i] are KForms; K is an n x n array of values K(s_i, s_j)."""

    W: dict | None = None
    K: np.ndarray | None = None
    C: dict | None = None
    dA: KForm | None = None
    nabla_dA: tuple | None = None
    R: object = 0

    @staticmethod
    def _pair(table, i: int, j: int):
        if table is None or i == j:
            return None
        if (i, j) in table:
            return table[(i, j)]
        if (j, i) in table:
            return -table[(j, i)]
        return None

    def w(self, i: int, j: int) -> KForm | None:
        return self._pair(self.W, i, j)

    def c(self, i: int, j: int) -> KForm | None:
        return self._pair(self.C, i, j)


@dataclass(frozen=True)
class FramePointData:
    rep: CliffordRep
    spec: InnerProductSpec
    table: RealityTable
    omega: np.ndarray
    A: tuple
    phi: np.ndarray
    dphi: tuple | None = None
    curvature: CurvatureBlock | None = None
    tol: float = 1e-10

    def __post_init__(self):
        n = self.rep.n
        om = np.asarray(self.omega)
        if om.shape != (n, n, n):
            raise ValueError(f"omega: expected shape {(n, n, n)}, got {om.shape}")
        object.__setattr__(self, "omega", om)
        if len(self.A) != n:
            raise ValueError(f"A: expected {n} values")
        phi = np.asarray(self.phi)
        if phi.shape != (self.rep.dim,):
            raise ValueError(f"phi: expected {self.rep.dim} components")
        object.__setattr__(self, "phi", phi)
        if self.dphi is None:
            zero = np.array([ExactScalar(0)] * self.rep.dim, dtype=object) if phi.dtype == object \
                else np.zeros(self.rep.dim, dtype=complex)
            object.__setattr__(self, "dphi", tuple(zero.copy() for _ in range(n)))
        else:
            dphi = tuple(np.asarray(d) for d in self.dphi)
            if len(dphi) != n or any(d.shape != (self.rep.dim,) for d in dphi):
                raise ValueError("dphi: expected n spinors of the representation dimension")
            object.__setattr__(self, "dphi", dphi)
        self._validate()

    # validation ------------------------------------------------------------
    def _small(self, v) -> bool:
        if _is_exact_value(v):
            return ExactScalar.coerce(v).is_zero()
        return abs(complex(v)) <= self.tol

    def _validate(self):
        n = self.rep.n
        for i in range(n):
            for k in range(n):
                for l in range(k, n):
                    if not self._small(self.omega[i, k, l] + self.omega[i, l, k]):
                        raise ValueError(f"omega: not antisymmetric at (i={i}, k={k}, l={l})")
        for i, a in enumerate(self.A):
            if _is_exact_value(a):
                if not ExactScalar.coerce(a).is_imaginary():
                    raise ValueError(f"A: entry {i} is not purely imaginary")
            elif abs(complex(a).real) > self.tol:
                raise ValueError(f"A: entry {i} is not purely imaginary")
        cb = self.curvature
        if cb is None:
            return
        if cb.dA is not None:
            for idx, v in cb.dA.coeffs.items():
                if _is_exact_value(v):
                    if not ExactScalar.coerce(v).is_imaginary():
                        raise ValueError(f"dA: coefficient {idx} is not purely imaginary")
                elif abs(complex(v).real) > self.tol:
                    raise ValueError(f"dA: coefficient {idx} is not purely imaginary")
        if cb.W is not None:
            eps = self.rep.epsilon
            for b in range(n):
                for c in range(n):
                    tr = 0
                    for a in range(n):
                        Wab = cb.w(a, b)
                        if Wab is not None:
                            tr = tr + eps[a] * Wab.value((c, a))
                    if not self._small(tr):
                        raise ValueError(f"W: Ricci trace nonzero at ({b}, {c})")

    # helpers ---------------------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.rep.is_exact and self.phi.dtype == object

    def const(self, num: int, den: int = 1):
        return Fraction(num, den) if self.exact else num / den

    @property
    def n(self) -> int:
        return self.rep.n

    def act(self, idx, s):
        """e_{i1} ... e_{ik} s."""
        gens = self.rep.generators if self.exact else self.rep.mats
        for i in reversed(tuple(idx)):
            s = gens[i] @ s
        return s

    def vec(self, x, s):
        """X . s for X = sum x_i s_i."""
        out = None
        for i, c in enumerate(x):
            if (ExactScalar.coerce(c).is_zero() if _is_exact_value(c) else c == 0):
                continue
            t = self.act((i,), s) * c if not self.exact else _scale(self.act((i,), s), c)
            out = t if out is None else out + t
        return out if out is not None else self.zero()

    def form(self, a: KForm, s):
        if self.exact:
            return clifford_action(self.rep, a, s)
        return clifford_action(self.rep.numeric(), a, np.asarray(s, dtype=complex))

    def zero(self):
        if self.exact:
            return np.array([ExactScalar(0)] * self.rep.dim, dtype=object)
        return np.zeros(self.rep.dim, dtype=complex)

    def ip(self, u, v):
        return inner(self.spec, u, v)

    def flat(self, i: int) -> KForm:
        x = [0] * self.n
        x[i] = 1
        return KForm.flat(self.rep.epsilon, x)

    def K_form(self, i: int) -> KForm:
        """K(s_i) as a 1-form."""
        K = self.curvature.K
        return KForm.from_values(self.rep.epsilon, 1, {(j,): K[i, j] for j in range(self.n)})


def _scale(v, c):
    c = ExactScalar.coerce(c) if _is_exact_value(c) else c
    return np.array([c * x for x in v], dtype=object)


def _mul(data: FramePointData, c, v):
    return _scale(v, c) if data.exact else complex(c) * np.asarray(v, dtype=complex)


def cov_deriv(data: FramePointData, i: int, dphi=None):
    """nabla^A_{s_i} phi = s_i(phi) + 1/2 sum_{k<l} omega_kl(s_i) e_k e_l phi + 1/2 A_i phi."""
    phi = data.phi
    out = data.dphi[i] if dphi is None else dphi
    out = out.copy()
    half = data.const(1, 2)
    n = data.n
    for k in range(n):
        for l in range(k + 1, n):
            w = data.omega[i, k, l]
            if (ExactScalar.coerce(w).is_zero() if _is_exact_value(w) else w == 0):
                continue
            out = out + _mul(data, half * w, data.act((k, l), phi))
    return out + _mul(data, half * data.A[i], phi)


def spinor_cov_deriv(data: FramePointData, i: int, field_value, field_derivative):
    """Covariant derivative of another spinor field given its value and s_i-derivative."""
    d2 = replace(data, phi=field_value, dphi=None)
    return cov_deriv(d2, i, dphi=field_derivative)


def dirac_and_twistor(data: FramePointData):
    """(D phi, [nabla_i phi + (1/n) e_i . D phi])."""
    eps = data.rep.epsilon
    nab = [cov_deriv(data, i) for i in range(data.n)]
    D = data.zero()
    for i in range(data.n):
        D = D + _mul(data, eps[i], data.act((i,), nab[i]))
    inv_n = data.const(1, data.n)
    res = [nab[i] + _mul(data, inv_n, data.act((i,), D)) for i in range(data.n)]
    return D, res


def kernel_identity(data: FramePointData, residuals):
    """sum eps_i e_i . residual_i (vanishes identically)."""
    out = data.zero()
    for i, r in enumerate(residuals):
        out = out + _mul(data, data.rep.epsilon[i], data.act((i,), r))
    return out


def gauge_transform(data: FramePointData, tau: float, dtau) -> FramePointData:
    """phi -> e^{i tau/2} phi, A -> A - i dtau; dtau[i] = s_i(tau).

    Stays exact when tau is a multiple of pi/2 and dtau is rational.
    """
    q = 2 * tau / math.pi
    exact_phase = data.exact and abs(q - round(q)) < 1e-14 and all(_is_exact_value(t) for t in dtau)
    if exact_phase:
        k = int(round(q)) % 4  # e^{i tau/2} = e^{i pi k/4}
        r = Fraction(1, 2)
        phase = [ExactScalar(1), ExactScalar(0, 0, r, r), ExactScalar(0, 1),
                 ExactScalar(0, 0, -r, r)][k]
        if int(round(q)) % 8 >= 4:
            phase = -phase
        I = ExactScalar(0, 1)
        half = Fraction(1, 2)
        phi = _scale(data.phi, phase)
        dphi = tuple(_scale(d + _scale(data.phi, I * half * ExactScalar.coerce(t)), phase)
                     for d, t in zip(data.dphi, dtau))
        A = tuple(ExactScalar.coerce(a) - I * ExactScalar.coerce(t) for a, t in zip(data.A, dtau))
        return replace(data, phi=phi, dphi=dphi, A=A)
    phase = cmath.exp(0.5j * tau)
    phi = phase * np.asarray(data.phi, dtype=complex)
    dphi = tuple(phase * (np.asarray(d, dtype=complex) + 0.5j * t * np.asarray(data.phi, dtype=complex))
                 for d, t in zip(data.dphi, dtau))
    A = tuple(complex(a) - 1j * t for a, t in zip(data.A, dtau))
    omega = data.omega.astype(float) if data.omega.dtype == object else data.omega
    rep = data.rep.numeric()
    return replace(data, rep=rep, omega=omega, phi=phi, dphi=dphi, A=A, spec=_numeric_spec(data.spec))


def _numeric_spec(spec: InnerProductSpec) -> InnerProductSpec:
    M = spec.matrix.to_numpy() if hasattr(spec.matrix, "to_numpy") else np.asarray(spec.matrix)
    return InnerProductSpec(spec.p, complex(spec.d), M, spec.name)


# ---------------------------------------------------------------------------
# curvature identities
# ---------------------------------------------------------------------------


def _need(data: FramePointData, *names):
    cb = data.curvature
    if cb is None:
        raise ValueError("curvature block missing")
    for nm in names:
        if getattr(cb, nm) is None:
            raise ValueError(f"curvature block lacks {nm}")
    return cb


def dA_action(data: FramePointData, s):
    cb = _need(data, "dA")
    return data.form(cb.dA, s)


def rhs_1p(data: FramePointData):
    """(n/(n-1)) (R/4 phi + 1/2 dA . phi)."""
    cb = _need(data, "dA")
    n = data.n
    t = _mul(data, data.const(1, 4) * cb.R, data.phi) + _mul(data, data.const(1, 2), dA_action(data, data.phi))
    return _mul(data, data.const(n, n - 1), t)


def B_action(data: FramePointData, i: int, s):
    """(K(s_i) + 1/(n-2) (1/(n-1) s_i . dA + s_i -| dA)) . s"""
    cb = _need(data, "K", "dA")
    n = data.n
    out = data.form(data.K_form(i), s)
    x = [0] * n
    x[i] = 1
    t = _mul(data, data.const(1, n - 1), data.vec(x, data.form(cb.dA, s)))
    t = t + data.form(contract(i, cb.dA), s)
    return out + _mul(data, data.const(1, n - 2), t)


def rhs_2p(data: FramePointData, i: int):
    return _mul(data, data.const(data.n, 2), B_action(data, i, data.phi))


def curvature_identities(data: FramePointData, dirac_squared, nabla_dirac):
    """Residuals of D^2 phi = rhs_1p and nabla_{s_i} D phi = rhs_2p(i).

    ``dirac_squared`` and ``nabla_dirac`` come from differentiating D phi.
    """
    r1 = dirac_squared - rhs_1p(data)
    r2 = [nabla_dirac[i] - rhs_2p(data, i) for i in range(data.n)]
    return r1, r2


def int1_residual(data: FramePointData, i: int, j: int):
    cb = _need(data, "dA")
    n = data.n
    phi = data.phi
    eps = data.rep.epsilon
    out = data.zero()
    if cb.w(i, j) is not None:
        out = out + _mul(data, data.const(1, 2), data.form(cb.w(i, j), phi))
    dA = cb.dA
    out = out + _mul(data, data.const(n - 3, 2 * (n - 1)) * dA.value((i, j)), phi)
    if n >= 4:
        t3 = wedge(wedge(data.flat(i), data.flat(j)), dA)
        out = out - _mul(data, data.const(1, (n - 2) * (n - 1)), data.form(t3, phi))
    t2 = wedge(data.flat(i), contract(j, dA)) - wedge(data.flat(j), contract(i, dA))
    c = data.const(1, n - 2) * (data.const(1, n - 1) - data.const(1, 2))
    return out + _mul(data, c, data.form(t2, phi))


def _dA_vec_pair(data, nabla_form: KForm, Y: int) -> KForm:
    """g(nabla_X dA, Y) read as the 1-form Y -| nabla_X dA."""
    return contract(Y, nabla_form)


def pr2_residual(data: FramePointData, i: int, j: int, psi, literal: bool = False):
    """Second-slot integrability condition with psi = D phi.

    The default coefficients are the ones that hold on computed Fefferman
    data; ``literal=True`` keeps the printed transcription, which does not.
    """
    cb = _need(data, "dA", "C", "nabla_dA")
    n = data.n
    phi = data.phi
    dA = cb.dA
    Xf, Yf = data.flat(i), data.flat(j)
    if literal:
        k_c = data.const(n, 2)
        k_xy = -data.const(n - 3, 2 * (n - 1))
        k_last = -data.const(1, n - 2)
    else:
        k_c = -data.const(n, 2)
        k_xy = data.const(n + 1, 2 * (n - 1))
        k_last = -data.const(1, 2 * (n - 2))
    out = data.zero()
    if cb.w(i, j) is not None:
        out = out + _mul(data, data.const(1, 2), data.form(cb.w(i, j), psi))
    if cb.c(i, j) is not None:
        out = out + _mul(data, k_c, data.form(cb.c(i, j), phi))
    t = wedge(Yf, cb.nabla_dA[i]) - wedge(Xf, cb.nabla_dA[j])
    out = out - _mul(data, data.const(n, 2 * (n - 2) * (n - 1)), data.form(t, phi))
    t = _dA_vec_pair(data, cb.nabla_dA[i], j) - _dA_vec_pair(data, cb.nabla_dA[j], i)
    out = out - _mul(data, data.const(n, 2 * (n - 1)), data.form(t, phi))
    out = out + _mul(data, k_xy * dA.value((i, j)), psi)
    if n >= 4:
        out = out - _mul(data, data.const(1, (n - 2) * (n - 1)), data.form(wedge(wedge(Xf, Yf), dA), psi))
    t = wedge(contract(i, dA), Yf) - wedge(contract(j, dA), Xf)
    return out + _mul(data, k_last, data.form(t, psi))


def riemann_form(data: FramePointData, i: int, j: int) -> KForm:
    """R(s_i, s_j) as a 2-form rebuilt from W and K (Rf = W - K.g) in value form."""
    cb = _need(data, "K")
    eps = data.rep.epsilon
    n = data.n
    vals = {}
    for c, d in combinations(range(n), 2):
        # K_bc g_ad + K_ad g_bc - K_ac g_bd - K_bd g_ac with (a, b) = (i, j)
        v = (cb.K[j, c] * (eps[i] if i == d else 0) + cb.K[i, d] * (eps[j] if j == c else 0)
             - cb.K[i, c] * (eps[j] if j == d else 0) - cb.K[j, d] * (eps[i] if i == c else 0))
        vals[(c, d)] = -v
    out = KForm.from_values(eps, 2, vals)
    if cb.w(i, j) is not None:
        out = out + cb.w(i, j)
    return out


def pr2_derived_residual(data: FramePointData, i: int, j: int, psi, nabla_B):
    """R^A(X,Y) psi - (n/2)((nabla_X B)(Y) - (nabla_Y B)(X)) phi - 1/2 (B(X).Y - B(Y).X) psi.

    ``nabla_B[(i, j)]`` is the spinor ((nabla_{s_i} B)(s_j)) . phi.
    """
    cb = _need(data, "dA", "K")
    n = data.n
    ei = [0] * n
    ej = [0] * n
    ei[i] = 1
    ej[j] = 1
    half = data.const(1, 2)
    RA = _mul(data, half, data.form(riemann_form(data, i, j), psi)) + \
        _mul(data, half * cb.dA.value((i, j)), psi)
    out = RA - _mul(data, data.const(n, 2), nabla_B[(i, j)] - nabla_B[(j, i)])
    t = B_action(data, i, data.vec(ej, psi)) - B_action(data, j, data.vec(ei, psi))
    return out - _mul(data, half, t)


# ---------------------------------------------------------------------------
# bilinear system (Lorentzian, k = 1)
# ---------------------------------------------------------------------------


def _require_lorentzian(data: FramePointData):
    if data.rep.p != 1:
        raise ValueError("this system is formulated for Lorentzian signature (p = 1)")


def _form_from_pairing(data: FramePointData, k: int, fn) -> KForm:
    """Form alpha with g(alpha, e_I^flat) = fn(e_I^flat) on basis forms."""
    eps = data.rep.epsilon
    coeffs = {}
    for I in combinations(range(data.n), k):
        s = 1
        for i in I:
            s *= eps[i]
        coeffs[I] = s * fn(KForm.basis(eps, I))
    return KForm(eps, k, coeffs)


def _re(z):
    return ExactScalar.coerce(z).real() if isinstance(z, ExactScalar) else complex(z).real


def _im(z):
    return ExactScalar.coerce(z).imag() if isinstance(z, ExactScalar) else complex(z).imag


@dataclass(frozen=True)
class BilinearForms:
    alpha1: KForm
    alpha0_2: KForm
    alpha_mp: KForm
    alpha1_D: KForm
    alpha3: KForm
    alpha_dA1: KForm
    alpha_dA3: KForm
    alpha_t0_2: KForm
    alpha_t_mp: object
    V: list = field(default_factory=list)


def bilinear_forms(data: FramePointData, psi) -> BilinearForms:
    """The forms entering the first-order system, with psi = D phi."""
    _require_lorentzian(data)
    n = data.n
    phi = data.phi
    two_n = data.const(2, n)
    a1 = _form_from_pairing(data, 1, lambda b: _re(data.ip(data.form(b, phi), phi)))
    a02 = _form_from_pairing(data, 2, lambda b: two_n * _re(data.ip(data.form(b, psi), phi)))
    amp = KForm(data.rep.epsilon, 0, {(): two_n * _re(data.ip(psi, phi))})
    a1D = _form_from_pairing(data, 1, lambda b: _re(data.ip(data.form(b, psi), psi)))
    a3 = _form_from_pairing(data, 3, lambda b: _im(data.ip(data.form(b, phi), phi)))
    dphi_ = dA_action(data, phi) if data.curvature and data.curvature.dA is not None else data.zero()
    c = data.const(1, (n - 2) * (n - 1))
    adA1 = _form_from_pairing(data, 1, lambda b: c * _re(data.ip(dphi_, data.form(b, phi))))
    adA3 = _form_from_pairing(data, 3, lambda b: c * _re(data.ip(dphi_, data.form(b, phi))))
    at02 = _form_from_pairing(data, 2, lambda b: two_n * _im(data.ip(data.form(b, psi), phi)))
    atmp = two_n * _im(data.ip(psi, phi))
    return BilinearForms(a1, a02, amp, a1D, a3, adA1, adA3, at02, atmp, a1.sharp())


def _inner1(a: KForm, b: KForm):
    """g(a, b) for 1-forms."""
    return sum((a.eps[i] * v * b.coeffs.get((i,), 0) for (i,), v in a.coeffs.items()), 0)


def _scalar_times(c, a: KForm) -> KForm:
    return a.scale(c)


def noco_residuals(data: FramePointData, psi, derivs,
                   literal: bool = False) -> list[tuple[KForm, KForm, KForm, KForm]]:
    """Residuals of the four rows of the first-order system in each direction.

    ``derivs[i]`` = (nabla_i alpha1, nabla_i alpha0_2, nabla_i alpha_mp, nabla_i alpha1_D).
    ``literal=True`` uses the printed sign of the fourth unknown and of the
    second row's right side.
    """
    _require_lorentzian(data)
    cb = _need(data, "K", "dA")
    n = data.n
    eps = data.rep.epsilon
    F = bilinear_forms(data, psi)
    c4 = data.const(2, n * n)  # fourth unknown: -(2/n^2) alpha^1_{D phi}
    if not literal:
        c4 = -c4
    s2 = -1 if literal else 1
    F4 = F.alpha1_D.scale(c4)
    out = []
    amp = F.alpha_mp.coeffs.get((), 0)
    for i in range(n):
        X = data.flat(i)
        Kx = data.K_form(i)
        d1, d2, d3, d4 = derivs[i]
        d4 = d4.scale(c4)
        rhs2, rhs3, rhs4 = noco_rhs(data, F, i)
        row1 = d1 - contract(i, F.alpha0_2) - X.scale(amp)
        lhs2 = d2 - wedge(Kx, F.alpha1) + wedge(X, F4)
        lhs3 = d3 - KForm(eps, 0, {(): _inner1(Kx, F.alpha1)}) - contract(i, F4)
        lhs4 = contract(Kx.sharp(), F.alpha0_2) - Kx.scale(amp) + d4
        out.append((row1, lhs2 + rhs2.scale(s2), lhs3 - rhs3, lhs4 - rhs4))
    return out


def noco_rhs(data: FramePointData, F: "BilinearForms", i: int) -> tuple[KForm, KForm, KForm]:
    """Charge terms of rows 2 to 4 in direction s_i; all vanish when dA = 0."""
    cb = _need(data, "dA")
    n = data.n
    eps = data.rep.epsilon
    omega = cb.dA.scale(ExactScalar(0, -1) if data.exact else -1j)  # (1/i) dA
    omega = KForm(eps, 2, {k: _re(v) for k, v in omega.coeffs.items()})
    X = data.flat(i)
    Xw = contract(i, omega)
    Xw_sharp = Xw.sharp()
    rhs2 = contract(Xw_sharp, F.alpha3).scale(data.const(1, n - 2)) - wedge(X, F.alpha_dA1) \
        + contract(i, F.alpha_dA3)
    rhs3 = contract(i, F.alpha_dA1)
    rhs4 = (contract(Xw_sharp, F.alpha_t0_2).scale(data.const(1, n - 2))
            + Xw.scale(F.alpha_t_mp)).scale(data.const(1, n - 1))
    return rhs2, rhs3, rhs4


def auxiliary_relations(data: FramePointData):
    """Residuals of the two trailing Weyl/dA relations, per pair (i, j)."""
    cb = _need(data, "dA")
    n = data.n
    phi = data.phi
    out = {}
    for i, j in combinations(range(n), 2):
        t = wedge(data.flat(i), contract(j, cb.dA)) - wedge(data.flat(j), contract(i, cb.dA))
        second = data.ip(phi, data.form(t, phi))
        lhs = 0
        if cb.w(i, j) is not None:
            # g(alpha^2, W) = i <phi, W . phi>
            lhs = (1 - n) * 1j * 1j * complex(data.ip(phi, data.form(cb.w(i, j), phi)))
        rhs = (3 - n) * complex(cb.dA.value((i, j))) * complex(data.ip(phi, phi))
        if n >= 4:
            beta = wedge(wedge(data.flat(i), data.flat(j)), cb.dA)
            # g(alpha^4, beta) through d_4 <beta phi, phi>, d_4 = Re in Lorentzian signature
            rhs += 2 / (n - 2) * complex(data.ip(data.form(beta, phi), phi)).real
        out[(i, j)] = (lhs - rhs, complex(second))
    return out


def prop_checks(data: FramePointData, psi, d_im_psi_phi, tol: float = 1e-6):
    """(V -| (1/i)dA - (2(1-n)/n) d Im<D phi, phi>,  (V -| W == 0, (Z -| (1/i)dA)^sharp -| alpha^3 == 0))."""
    _require_lorentzian(data)
    cb = _need(data, "dA")
    n = data.n
    eps = data.rep.epsilon
    F = bilinear_forms(data, psi)
    omega = KForm(eps, 2, {k: _re(v * (ExactScalar(0, -1) if data.exact else -1j))
                           for k, v in cb.dA.coeffs.items()})
    V = F.V
    dIm = KForm.from_values(eps, 1, {(i,): d_im_psi_phi[i] for i in range(n)})
    ed = contract(V, omega) - dIm.scale(data.const(2 * (1 - n), n))
    if cb.W is not None:
        vw = 0.0
        for (i, j), Wij in cb.W.items():
            for c in range(n):
                # W(V, X, Y, Z) = W(Y, Z, V, X) for pair-symmetric W
                vw = max(vw, abs(complex(sum(v * Wij.value((a, c)) for a, v in enumerate(V)))))
        left = vw <= tol
    else:
        left = True
    right_val = 0.0
    for j in range(n):
        Zw = contract(j, omega).sharp()
        right_val = max(right_val, contract(Zw, F.alpha3).max_abs())
    right = right_val <= tol
    return ed, (left, right)


# ---------------------------------------------------------------------------
# exact algebraic curvature and the charge-free reduction
# ---------------------------------------------------------------------------


def _kn_exact(h: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Kulkarni-Nomizu product h_ac k_bd + h_bd k_ac - h_ad k_bc - h_bc k_ad."""
    n = h.shape[0]
    out = np.full((n, n, n, n), Fraction(0), dtype=object)
    for a, b, c, d in np.ndindex(n, n, n, n):
        out[a, b, c, d] = h[a, c] * k[b, d] + h[b, d] * k[a, c] - h[a, d] * k[b, c] - h[b, c] * k[a, d]
    return out


def _random_symmetric(n: int, rng: np.random.Generator, bound: int) -> np.ndarray:
    M = np.full((n, n), Fraction(0), dtype=object)
    for a in range(n):
        for b in range(a, n):
            M[a, b] = M[b, a] = Fraction(int(rng.integers(-bound, bound + 1)))
    return M


def random_curvature_block(eps, rng: np.random.Generator, bound: int = 2,
                           charged: bool = True) -> CurvatureBlock:
    """Exact curvature data built from a random algebraic curvature tensor.

    Frame Riemann values are a sum of two Kulkarni-Nomizu products of random
    symmetric forms, so they have every algebraic symmetry.  K and W follow
    the same decomposition as the numerical charts.  C, dA and nabla dA are
    random with the right symmetry and reality.
    """
    n = len(eps)
    if n < 3:
        raise ValueError("need n >= 3")
    Rf = _kn_exact(_random_symmetric(n, rng, bound), _random_symmetric(n, rng, bound))
    Rf = Rf + _kn_exact(_random_symmetric(n, rng, bound), _random_symmetric(n, rng, bound))
    Ric = np.full((n, n), Fraction(0), dtype=object)
    for b, c in np.ndindex(n, n):
        Ric[b, c] = sum((eps[a] * Rf[a, b, c, a] for a in range(n)), Fraction(0))
    Rs = sum((eps[b] * Ric[b, b] for b in range(n)), Fraction(0))
    K = np.full((n, n), Fraction(0), dtype=object)
    for b, c in np.ndindex(n, n):
        g = eps[b] if b == c else 0
        K[b, c] = (Rs / (2 * (n - 1)) * g - Ric[b, c]) / (n - 2)
    gd = np.array([[Fraction(eps[a] if a == b else 0) for b in range(n)] for a in range(n)], dtype=object)
    Wv = Rf - _kn_exact(K, gd)
    pairs = list(combinations(range(n), 2))
    W = {(i, j): KForm.from_values(eps, 2, {(c, d): Wv[i, j, c, d] for c, d in pairs}) for i, j in pairs}

    def rnd():
        return Fraction(int(rng.integers(-bound, bound + 1)))

    C = {(i, j): KForm(eps, 1, {(c,): rnd() for c in range(n)}) for i, j in pairs}

    def imaginary_2form():
        if not charged:
            return KForm.zero(eps, 2)
        return KForm(eps, 2, {p: ExactScalar(0, int(rng.integers(-bound, bound + 1))) for p in pairs})

    return CurvatureBlock(W=W, K=K, C=C, dA=imaginary_2form(),
                          nabla_dA=tuple(imaginary_2form() for _ in range(n)), R=Rs)


def _gap(data: FramePointData, v) -> float:
    if data.exact:
        return max((abs(complex(ExactScalar.coerce(x))) for x in v), default=0.0)
    return float(np.abs(np.asarray(v, dtype=complex)).max(initial=0.0))


def classical_reduction(data: FramePointData, psi) -> dict[str, float]:
    """Largest deviation of each residual from its uncharged form once dA and nabla dA are set to 0.

    int1 -> W/2 . phi, pr2 -> W/2 . psi - (n/2) C . phi, the 1p right side ->
    (n/(n-1)) (R/4) phi, the 2p right side -> (n/2) K(s_i) . phi; in
    Lorentzian signature the charge terms of the first-order system vanish.
    """
    cb = _need(data, "W", "K", "C", "dA")
    n = data.n
    eps = data.rep.epsilon
    flat = replace(cb, dA=KForm.zero(eps, 2), nabla_dA=tuple(KForm.zero(eps, 2) for _ in range(n)))
    d0 = replace(data, curvature=flat)
    phi = data.phi
    out = {"int1": 0.0, "pr2": 0.0, "1p": 0.0, "2p": 0.0}
    half = d0.const(1, 2)
    for i, j in combinations(range(n), 2):
        w = _mul(d0, half, d0.form(flat.w(i, j), phi)) if flat.w(i, j) is not None else d0.zero()
        out["int1"] = max(out["int1"], _gap(d0, int1_residual(d0, i, j) - w))
        wpsi = _mul(d0, half, d0.form(flat.w(i, j), psi)) if flat.w(i, j) is not None else d0.zero()
        cphi = _mul(d0, d0.const(n, 2), d0.form(flat.c(i, j), phi))
        out["pr2"] = max(out["pr2"], _gap(d0, pr2_residual(d0, i, j, psi) - (wpsi - cphi)))
    r1 = _mul(d0, d0.const(n, n - 1) * d0.const(1, 4) * flat.R, phi)
    out["1p"] = _gap(d0, rhs_1p(d0) - r1)
    for i in range(n):
        r2 = _mul(d0, d0.const(n, 2), d0.form(d0.K_form(i), phi))
        out["2p"] = max(out["2p"], _gap(d0, rhs_2p(d0, i) - r2))
    if data.rep.p == 1:
        F = bilinear_forms(d0, psi)
        out["noco"] = max(max(f.max_abs() for f in noco_rhs(d0, F, i)) for i in range(n))
    return out
