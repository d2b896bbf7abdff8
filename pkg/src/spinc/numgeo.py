"""Chart-based numerical geometry.

Finite-difference Christoffel symbols, pseudo-orthonormal frames and spin
connection coefficients, curvature blocks, the two built-in CR models with
their Fefferman spaces, and residual sweeps over chart points.

Nested derivatives use three step sizes: ``fd_step`` for first derivatives
of chart data, ``second_step`` for derivatives of first-order quantities and
``third_step`` for derivatives of curvature.  All stencils are the 5-point
fourth-order central differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations
from typing import Callable

import numpy as np
import sympy as sp

from .bilinear import InnerProductSpec, RealityTable, generic_inner_spec, inner, reality_table
from .clifford import CliffordRep, build_rep, u_delta
from .exact import ExactMatrix
from .forms import KForm
from .pointwise import (
    CurvatureBlock,
    FramePointData,
    auxiliary_relations,
    bilinear_forms,
    curvature_identities,
    dirac_and_twistor,
    gauge_transform,
    int1_residual,
    noco_residuals,
    pr2_derived_residual,
    pr2_residual,
    prop_checks,
    spinor_cov_deriv,
)

_STENCIL = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))


def fd_derivative(fun: Callable, x, h: float) -> np.ndarray:
    """out[a] = d fun / d x_a by the 5-point central stencil."""
    x = np.asarray(x, dtype=float)
    out = []
    for a in range(x.size):
        acc = 0
        for k, w in _STENCIL:
            y = x.copy()
            y[a] += k * h
            acc = acc + w * np.asarray(fun(y))
        out.append(acc / h)
    return np.array(out)


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChartGeometry:
    """A metric, an imaginary connection 1-form and a spinor field on a chart.

    ``frame(x)`` (optional) returns the frame vectors as rows of coordinate
    components; without it a Gram-Schmidt frame is used.  ``spinor_field(x)``
    gives spinor components relative to that frame.  ``marked`` names frame
    coefficient vectors for directional checks.
    """

    n: int
    p: int
    metric: Callable
    connection1form: Callable | None = None
    spinor_field: Callable | None = None
    frame: Callable | None = None
    rep: CliffordRep | None = None
    spec: InnerProductSpec | None = None
    fd_step: float = 1e-4
    second_step: float = 1e-3
    third_step: float = 1e-2
    base_point: tuple | None = None
    marked: dict = field(default_factory=dict)
    name: str = "chart"

    @property
    def q(self) -> int:
        return self.n - self.p

    @property
    def epsilon(self) -> tuple[int, ...]:
        return tuple(-1 if i < self.p else 1 for i in range(self.n))

    def g(self, x) -> np.ndarray:
        return np.asarray(self.metric(np.asarray(x, dtype=float)), dtype=float)

    def check_signature(self, x) -> None:
        ev = np.linalg.eigvalsh(self.g(x))
        scale = max(1.0, np.abs(ev).max())
        if np.abs(ev).min() < 1e-9 * scale:
            raise GeometryError(f"metric degenerates at {list(np.round(x, 6))}")
        neg = int((ev < 0).sum())
        if neg != self.p:
            raise GeometryError(f"metric has index {neg}, expected {self.p}, at {list(np.round(x, 6))}")

    def frame_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.frame is not None:
            return np.asarray(self.frame(x), dtype=float)
        return gram_schmidt_frame(self, x)

    def A_coord(self, x) -> np.ndarray:
        if self.connection1form is None:
            return np.zeros(self.n, dtype=complex)
        return np.asarray(self.connection1form(np.asarray(x, dtype=float)), dtype=complex)

    def spinor(self, x) -> np.ndarray:
        if self.spinor_field is None:
            raise GeometryError("chart carries no spinor field")
        return np.asarray(self.spinor_field(np.asarray(x, dtype=float)), dtype=complex)

    def numeric_rep(self) -> CliffordRep:
        rep = self.rep if self.rep is not None else build_rep(self.p, self.q)
        return rep.numeric()

    def inner_spec(self) -> InnerProductSpec:
        spec = self.spec if self.spec is not None else generic_inner_spec(self.numeric_rep())
        M = spec.matrix.to_numpy() if isinstance(spec.matrix, ExactMatrix) else np.asarray(spec.matrix)
        return InnerProductSpec(spec.p, complex(spec.d), M, spec.name)


@lru_cache(maxsize=None)
def _table_for(rep: CliffordRep, spec: InnerProductSpec) -> RealityTable:
    return reality_table(rep, spec, samples=20)


def _table(chart: ChartGeometry) -> RealityTable:
    rep = chart.rep if chart.rep is not None else build_rep(chart.p, chart.q)
    spec = chart.spec if chart.spec is not None else generic_inner_spec(rep)
    return _table_for(rep, spec)


def _gs_order(chart: ChartGeometry) -> tuple[int, ...]:
    """Greedy pivot order at the base point: timelike pivots first."""
    x0 = np.zeros(chart.n) if chart.base_point is None else np.asarray(chart.base_point, float)
    g = chart.g(x0)
    chosen: list[int] = []
    basis: list[np.ndarray] = []
    signs: list[int] = []
    for step in range(chart.n):
        want = -1 if step < chart.p else 1
        best, best_val = None, 0.0
        for a in range(chart.n):
            if a in chosen:
                continue
            v = np.eye(chart.n)[a]
            for s, e in zip(basis, signs):
                v = v - e * (v @ g @ s) * s
            nv = v @ g @ v
            if nv * want > best_val:
                best, best_val, best_v = a, nv * want, v
        if best is None or best_val < 1e-8:
            raise GeometryError("Gram-Schmidt pivot breakdown at the base point")
        chosen.append(best)
        basis.append(best_v / math.sqrt(best_val))
        signs.append(want)
    return tuple(chosen)


def gram_schmidt_frame(chart: ChartGeometry, x) -> np.ndarray:
    """Pseudo-orthonormal frame from coordinate vectors in a fixed pivot order."""
    order = _gs_order(chart)
    g = chart.g(x)
    eps = chart.epsilon
    rows = [None] * chart.n
    done: list[tuple[np.ndarray, int]] = []
    for step, a in enumerate(order):
        v = np.eye(chart.n)[a]
        for s, e in done:
            v = v - e * (v @ g @ s) * s
        nv = (v @ g @ v) * eps[step]
        if nv < 1e-10:
            raise GeometryError(f"Gram-Schmidt breakdown at {list(np.round(x, 6))}")
        s = v / math.sqrt(nv)
        rows[step] = s
        done.append((s, eps[step]))
    return np.array(rows)


def christoffels(chart: ChartGeometry, x, h: float | None = None) -> np.ndarray:
    """Gamma[k, i, j] from the Koszul formula with differenced metric."""
    h = chart.fd_step if h is None else h
    g = chart.g(x)
    dg = fd_derivative(chart.g, x, h)  # dg[c, a, b] = d_c g_ab
    t = np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg
    G = 0.5 * np.einsum("kl,lij->kij", np.linalg.inv(g), t)
    return 0.5 * (G + G.transpose(0, 2, 1))


def metricity_residual(chart: ChartGeometry, x) -> float:
    g = chart.g(x)
    dg = fd_derivative(chart.g, x, chart.fd_step)
    G = christoffels(chart, x)
    r = dg - np.einsum("dca,db->cab", G, g) - np.einsum("dcb,ad->cab", G, g)
    return float(np.abs(r).max())


def _spin_connection(chart: ChartGeometry, x, S: np.ndarray, g: np.ndarray, G: np.ndarray) -> np.ndarray:
    eps = np.array(chart.epsilon, dtype=float)
    dS = fd_derivative(chart.frame_at, x, chart.fd_step)  # dS[a, k, b] = d_a s_k^b
    # nab[i, k, b] = (nabla_{s_i} s_k)^b
    nab = np.einsum("ia,akb->ikb", S, dS) + np.einsum("bac,ia,kc->ikb", G, S, S)
    om = np.einsum("ikb,bc,lc->ikl", nab, g, S) * eps[None, :, None] * eps[None, None, :]
    return 0.5 * (om - om.transpose(0, 2, 1))


def frame_and_spin_connection(chart: ChartGeometry, x):
    """(frame rows, omega[i, k, l] = eps_k eps_l g(nabla_{s_i} s_k, s_l))."""
    x = np.asarray(x, dtype=float)
    S = chart.frame_at(x)
    g = chart.g(x)
    gram = S @ g @ S.T
    if np.abs(gram - np.diag(chart.epsilon)).max() > 1e-8:
        raise GeometryError(f"frame is not pseudo-orthonormal at {list(np.round(x, 6))}")
    return S, _spin_connection(chart, x, S, g, christoffels(chart, x))


# ---------------------------------------------------------------------------
# point assembly
# ---------------------------------------------------------------------------


@dataclass
class _First:
    """First-order data at one chart point."""

    x: np.ndarray
    S: np.ndarray
    g: np.ndarray
    G: np.ndarray
    omega: np.ndarray
    A: np.ndarray
    dA: np.ndarray
    data: FramePointData
    psi: np.ndarray | None
    residuals: list | None


def _first(chart: ChartGeometry, x, with_spinor: bool = True) -> _First:
    x = np.asarray(x, dtype=float)
    S = chart.frame_at(x)
    g = chart.g(x)
    G = christoffels(chart, x)
    om = _spin_connection(chart, x, S, g, G)
    A = S @ chart.A_coord(x)
    dAc = fd_derivative(chart.A_coord, x, chart.fd_step)  # dAc[a, b] = d_a A_b
    dA = S @ (dAc - dAc.T) @ S.T
    rep = chart.numeric_rep()
    spec = chart.inner_spec()
    table = _table(chart)
    if with_spinor and chart.spinor_field is not None:
        phi = chart.spinor(x)
        dphi_c = fd_derivative(chart.spinor, x, chart.fd_step)
        dphi = tuple(S[i] @ dphi_c for i in range(chart.n))
    else:
        phi = np.zeros(rep.dim, dtype=complex)
        phi[0] = 1
        dphi = None
    # A is imaginary by contract; drop rounding noise in the real part
    data = FramePointData(rep, spec, table, om, tuple(1j * A.imag), phi, dphi, tol=1e-6)
    psi = res = None
    if with_spinor and chart.spinor_field is not None:
        psi, res = dirac_and_twistor(data)
    return _First(x, S, g, G, om, 1j * A.imag, 1j * dA.imag, data, psi, res)


def _frame_derivative(S: np.ndarray, dvals: np.ndarray) -> np.ndarray:
    """s_i(f) from coordinate derivatives dvals[a, ...]."""
    return np.tensordot(S, dvals, axes=(1, 0))


def _cov_frame_tensor(eps, omega: np.ndarray, T: np.ndarray, sT: np.ndarray) -> np.ndarray:
    """(nabla_{s_i} T)_{j...} = s_i(T_{j...}) - sum_l eps_j omega^i_{jl} T_{..l..} for every slot."""
    out = sT.copy()
    r = T.ndim
    conn = omega * np.asarray(eps, dtype=float)[None, :, None]  # conn[i, j, l] = eps_j omega^i_jl
    for slot in range(r):
        moved = np.moveaxis(T, slot, 0)  # l first
        term = np.tensordot(conn, moved, axes=(2, 0))  # [i, j, rest...]
        out = out - np.moveaxis(term, 1, slot + 1)
    return out


def _riemann_frame(chart: ChartGeometry, first: _First, dG: np.ndarray) -> np.ndarray:
    """Rf[a, b, c, d] = g(R(s_a, s_b) s_c, s_d)."""
    G = first.G
    # R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk} - G^l_{jm} G^m_{ik}
    Rc = (np.einsum("iljk->lkij", dG) - np.einsum("jlik->lkij", dG)
          + np.einsum("lim,mjk->lkij", G, G) - np.einsum("ljm,mik->lkij", G, G))
    low = np.einsum("dl,lkij->ijkd", first.g, Rc)
    S = first.S
    return np.einsum("ai,bj,ck,dm,ijkm->abcd", S, S, S, S, low)


def kulkarni_nomizu(K: np.ndarray, eps) -> np.ndarray:
    """K_bc g_ad + K_ad g_bc - K_ac g_bd - K_bd g_ac."""
    gd = np.diag(np.asarray(eps, dtype=float))
    return (np.einsum("bc,ad->abcd", K, gd) + np.einsum("ad,bc->abcd", K, gd)
            - np.einsum("ac,bd->abcd", K, gd) - np.einsum("bd,ac->abcd", K, gd))


def curvature_decomposition(eps, Rf: np.ndarray):
    """(Ric, scalar, Schouten K, Weyl W) from frame Riemann values.

    Ric is positive on round spheres; K = (R/(2(n-1)) g - Ric)/(n-2), the sign
    under which the second-order twistor identity holds, so Rf = W - K.g.
    """
    n = len(eps)
    e = np.asarray(eps, dtype=float)
    Ric = np.einsum("a,abca->bc", e, Rf)
    Rs = float(np.einsum("b,bb->", e, Ric))
    K = (Rs / (2 * (n - 1)) * np.diag(e) - Ric) / (n - 2)
    return Ric, Rs, K, Rf + kulkarni_nomizu(K, eps)


def _schouten_at(chart: ChartGeometry, x) -> tuple[_First, np.ndarray, np.ndarray]:
    """(first-order data, frame Riemann, Schouten) at x."""
    first = _first(chart, x, with_spinor=False)
    dG = fd_derivative(lambda y: christoffels(chart, y), x, chart.second_step)
    Rf = _riemann_frame(chart, first, dG)
    _, _, K, _ = curvature_decomposition(chart.epsilon, Rf)
    return first, Rf, K


def _B_matrices(rep: CliffordRep, eps, K: np.ndarray, dA: np.ndarray) -> np.ndarray:
    """Endomorphisms B(s_j) = K(s_j) + 1/(n-2) (1/(n-1) s_j . dA + s_j -| dA)."""
    n = len(eps)
    gens = rep.mats
    dAop = sum(eps[a] * eps[b] * dA[a, b] * gens[a] @ gens[b] for a, b in combinations(range(n), 2))
    out = []
    for j in range(n):
        Kj = sum(eps[c] * K[j, c] * gens[c] for c in range(n))
        contr = sum(eps[b] * dA[j, b] * gens[b] for b in range(n))
        out.append(Kj + (gens[j] @ dAop / (n - 1) + contr) / (n - 2))
    return np.array(out)


@dataclass
class PointFields:
    """Everything the residual suite needs at one point."""

    x: np.ndarray
    data: FramePointData
    frame: np.ndarray
    psi: np.ndarray
    twistor: list
    nabla_psi: list | None = None
    dirac_squared: np.ndarray | None = None
    noco_derivs: list | None = None
    d_im_psi_phi: np.ndarray | None = None
    nabla_B: dict | None = None
    riemann: np.ndarray | None = None
    ricci: np.ndarray | None = None


def _dense_forms(data: FramePointData, psi) -> list[np.ndarray]:
    F = bilinear_forms(data, psi)
    return [F.alpha1.to_dense().real, F.alpha0_2.to_dense().real,
            np.array(complex(F.alpha_mp.coeffs.get((), 0)).real), F.alpha1_D.to_dense().real]


def assemble_fields(chart: ChartGeometry, x, depth: int = 3) -> PointFields:
    """Assemble point data; depth 1 stops at the twistor operator, 2 adds curvature, 3 adds Cotton."""
    x = np.asarray(x, dtype=float)
    first = _first(chart, x)
    eps = chart.epsilon
    n = chart.n
    rep = chart.numeric_rep()
    if depth <= 1:
        return PointFields(x, first.data, first.S, first.psi, first.residuals)

    h2 = chart.second_step
    # first-order data around x, reused for every second-order quantity
    cache: dict[tuple, _First] = {}

    def at(y) -> _First:
        key = tuple(np.round(y, 14))
        if key not in cache:
            cache[key] = _first(chart, y)
        return cache[key]

    dG = fd_derivative(lambda y: at(y).G, x, h2)
    Rf = _riemann_frame(chart, first, dG)
    Ric, Rs, K, W = curvature_decomposition(eps, Rf)
    S = first.S
    om = first.omega

    sdA = _frame_derivative(S, fd_derivative(lambda y: at(y).dA, x, h2))
    ndA = _cov_frame_tensor(eps, om, first.dA, sdA)
    spsi = _frame_derivative(S, fd_derivative(lambda y: at(y).psi, x, h2))
    nabla_psi = [spinor_cov_deriv(first.data, i, first.psi, spsi[i]) for i in range(n)]
    D2 = sum(eps[i] * rep.mats[i] @ nabla_psi[i] for i in range(n))

    dense = [_dense_forms(first.data, first.psi)]
    derivs_raw = []
    for slot in range(4):
        f = lambda y, s=slot: _dense_forms(at(y).data, at(y).psi)[s]
        derivs_raw.append(_frame_derivative(S, fd_derivative(f, x, h2)))
    noco = []
    for i in range(n):
        row = []
        for slot, k in zip(range(4), (1, 2, 0, 1)):
            T = dense[0][slot]
            if k == 0:
                row.append(KForm(eps, 0, {(): float(derivs_raw[slot][i])}))
                continue
            cov = _cov_frame_tensor(eps, om, T, derivs_raw[slot])[i]
            row.append(KForm.from_values(eps, k, cov))
        noco.append(tuple(row))

    def im_psi_phi(y):
        f = at(y)
        return complex(inner(f.data.spec, f.psi, f.data.phi)).imag

    d_im = _frame_derivative(S, fd_derivative(im_psi_phi, x, h2))

    Wd = {(i, j): KForm.from_values(eps, 2, W[i, j]) for i, j in combinations(range(n), 2)}
    dA_form = KForm.from_values(eps, 2, first.dA)
    ndA_forms = tuple(KForm.from_values(eps, 2, ndA[i]) for i in range(n))
    C = None
    nabla_B = None
    if depth >= 3:
        h3 = chart.third_step
        sch: dict[tuple, tuple] = {}

        def sch_at(y):
            key = tuple(np.round(y, 14))
            if key not in sch:
                f1, _, Ky = _schouten_at(chart, y)
                sch[key] = (Ky, _B_matrices(rep, eps, Ky, f1.dA))
            return sch[key]

        sK = _frame_derivative(S, fd_derivative(lambda y: sch_at(y)[0], x, h3))
        nK = _cov_frame_tensor(eps, om, K, sK)
        Cv = nK - nK.transpose(1, 0, 2)  # C[i, j, c] = (nabla_i K)(s_j, s_c) - (nabla_j K)(s_i, s_c)
        C = {(i, j): KForm.from_values(eps, 1, {(c,): Cv[i, j, c] for c in range(n)})
             for i, j in combinations(range(n), 2)}
        Bm = _B_matrices(rep, eps, K, first.dA)
        sB = _frame_derivative(S, fd_derivative(lambda y: sch_at(y)[1], x, h3))
        spin = [0.5 * sum(om[i, k, l] * rep.mats[k] @ rep.mats[l] for k, l in combinations(range(n), 2))
                for i in range(n)]
        nabla_B = {}
        for i in range(n):
            for j in range(n):
                M = sB[i, j] + spin[i] @ Bm[j] - Bm[j] @ spin[i]
                M = M - sum(eps[j] * om[i, j, l] * Bm[l] for l in range(n))
                nabla_B[(i, j)] = M @ first.data.phi
    block = CurvatureBlock(W=Wd, K=K, C=C, dA=dA_form, nabla_dA=ndA_forms, R=Rs)
    data = replace(first.data, curvature=block)
    return PointFields(x, data, S, first.psi, first.residuals, nabla_psi, D2, noco, d_im, nabla_B, Rf, Ric)


def assemble_point(chart: ChartGeometry, x, depth: int = 3) -> FramePointData:
    return assemble_fields(chart, x, depth).data


# ---------------------------------------------------------------------------
# CR models
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CRModel:
    """A three-dimensional strictly pseudoconvex model given in ambient coordinates.

    The chart embeds into an ambient space by ``embed``; frame fields
    (e1, e2 = J e1, T) and the dual coframe (e^1, e^2, theta) are polynomial
    in ambient coordinates, which keeps the symbolic Tanaka-Webster
    computation small.  ``a_values`` gives the connection form of the
    Tanaka-Webster connection, nabla e1 = a (x) e2, on (e1, e2, T).
    """

    tag: str
    n: int
    embed: Callable
    embed_jac: Callable
    amb_fields: Callable
    amb_coframe: Callable
    amb_a: Callable
    amb_a_form: Callable
    amb_da: Callable
    amb_RW: Callable
    radius: float

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def coframe(self, x) -> np.ndarray:
        X = self.embed(x)
        return np.asarray(self.amb_coframe(X), float) @ np.asarray(self.embed_jac(x), float)

    def frame(self, x) -> np.ndarray:
        return np.linalg.inv(self.coframe(x)).T

    def theta(self, x) -> np.ndarray:
        return self.coframe(x)[2]

    def J(self, x) -> np.ndarray:
        """Chart matrix of J (J T = 0)."""
        F = self.frame(x)
        C = self.coframe(x)
        Jm = np.array([[0.0, -1, 0], [1, 0, 0], [0, 0, 0]])
        return F.T @ Jm @ C

    def levi(self, x, X, Y) -> float:
        """L(X, Y) = d theta(X, J Y)."""
        dth = fd_derivative(self.theta, x, 1e-4)
        dth = dth - dth.T
        return float(X @ dth @ (self.J(x) @ Y))

    def a_values(self, x) -> np.ndarray:
        return np.asarray(self.amb_a(self.embed(x)), float)

    def a_form(self, x) -> np.ndarray:
        """Real chart 1-form a with A^W = i a."""
        return np.asarray(self.embed_jac(x), float).T @ np.asarray(self.amb_a_form(self.embed(x)), float)

    def RW(self, x) -> float:
        return float(self.amb_RW(self.embed(x)))

    def ricci_form(self, x) -> np.ndarray:
        """Ric^W = i da as a chart 2-form matrix."""
        Jx = np.asarray(self.embed_jac(x), float)
        return 1j * (Jx.T @ np.asarray(self.amb_da(self.embed(x)), float) @ Jx)

    def a_theta(self, x) -> np.ndarray:
        """Real form with A_theta = i a_theta."""
        return self.a_form(x) + self.RW(x) * self.theta(x) / (2 * (self.n + 1))

    def sample_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        pts = []
        while len(pts) < count:
            y = rng.uniform(-self.radius, self.radius, size=self.dim)
            if np.linalg.norm(y) <= self.radius:
                pts.append(y)
        return np.array(pts)

    def structure_checks(self, x) -> dict[str, float]:
        """theta(T) - 1, |T -| d theta| and the smallest Levi eigenvalue on H."""
        F = self.frame(x)
        th = self.theta(x)
        dth = fd_derivative(self.theta, x, 1e-4)
        dth = dth - dth.T
        Lm = np.array([[self.levi(x, F[a], F[b]) for b in range(2)] for a in range(2)])
        return {
            "theta_T": abs(th @ F[2] - 1),
            "T_dtheta": float(np.abs(F[2] @ dth).max()),
            "levi_min": float(np.linalg.eigvalsh(0.5 * (Lm + Lm.T)).min()),
        }


def _bracket(A: sp.Matrix, B: sp.Matrix, X) -> sp.Matrix:
    return B.jacobian(X) * A - A.jacobian(X) * B


@lru_cache(maxsize=None)
def cr_model(tag: str) -> CRModel:
    """The Heisenberg group or the round three-sphere in a stereographic chart."""
    if tag == "Heisenberg":
        X = sp.symbols("x y u", real=True)
        x, y, u = X
        q = X
        P = sp.Matrix(X)
        r2 = sp.sqrt(2)
        E = [sp.Matrix([1, 0, y]) / r2, sp.Matrix([0, 1, -x]) / r2, sp.Matrix([0, 0, 1])]
        Cf = [sp.Matrix([[r2, 0, 0]]), sp.Matrix([[0, r2, 0]]), sp.Matrix([[-y, x, 1]])]
        radius = 1.0
    elif tag == "Sphere3":
        X = sp.symbols("x1 y1 x2 y2", real=True)
        x1, y1, x2, y2 = X
        q = sp.symbols("q1 q2 q3", real=True)
        r = sum(c ** 2 for c in q)
        P = sp.Matrix([2 * q[0], 2 * q[1], 2 * q[2], r - 1]) / (r + 1)
        r2 = sp.sqrt(2)
        E1 = sp.Matrix([-x2, y2, x1, -y1]) / r2
        E2 = sp.Matrix([-E1[1], E1[0], -E1[3], E1[2]])
        T0 = sp.Matrix([-y1, x1, -y2, x2])
        E = [E1, E2, T0]
        Cf = [2 * E1.T, 2 * E2.T, T0.T]
        radius = 0.9
    else:
        raise ValueError(f"unknown CR model {tag!r}")
    b12 = _bracket(E[0], E[1], X)
    bT1 = _bracket(E[2], E[0], X)
    bT2 = _bracket(E[2], E[1], X)
    a1 = sp.expand(-(Cf[0] * b12)[0])
    a2 = sp.expand(-(Cf[1] * b12)[0])
    aT = sp.expand(sp.Rational(1, 2) * ((Cf[1] * bT1)[0] - (Cf[0] * bT2)[0]))
    a_form = (a1 * Cf[0] + a2 * Cf[1] + aT * Cf[2]).T
    N = len(X)
    da = sp.Matrix(N, N, lambda i, j: sp.diff(a_form[j], X[i]) - sp.diff(a_form[i], X[j]))
    RW = sp.expand(-(E[0].T * da * E[1])[0])
    lam = lambda expr, args: sp.lambdify([args], expr, "numpy")

    def wrap(f, shape=None):
        def g(v):
            out = np.array(f(np.asarray(v, float)), dtype=float)
            return out if shape is None else out.reshape(shape)
        return g

    return CRModel(
        tag=tag,
        n=1,
        embed=wrap(lam(list(P), q)),
        embed_jac=wrap(lam(P.jacobian(q), q)),
        amb_fields=wrap(lam(sp.Matrix.hstack(*E).T, X)),
        amb_coframe=wrap(lam(sp.Matrix.vstack(*Cf), X)),
        amb_a=wrap(lam([a1, a2, aT], X)),
        amb_a_form=wrap(lam(list(a_form), X), (N,)),
        amb_da=wrap(lam(da, X), (N, N)),
        amb_RW=wrap(lam(RW, X)),
        radius=radius,
    )


def tanaka_webster(model: CRModel, x, h: float = 1e-4) -> dict:
    """Tanaka-Webster data from differenced brackets of the chart frame.

    Returns the connection values a(e1), a(e2), a(T), the residuals of the
    torsion normal form, R^W = -da(e1, e2) and Ric^W = i da (chart matrix).
    This route shares nothing with the symbolic model data except the frame.
    """
    x = np.asarray(x, dtype=float)

    def brackets(y):
        F = model.frame(y)
        dF = fd_derivative(model.frame, y, h)  # dF[a, k, b] = d_a f_k^b
        br = lambda i, j: F[i] @ dF[:, j, :] - F[j] @ dF[:, i, :]
        return F, br

    def a_vals(y):
        F, br = brackets(y)
        C = np.linalg.inv(F).T
        b12, bT1, bT2 = br(0, 1), br(2, 0), br(2, 1)
        return np.array([-(C[0] @ b12), -(C[1] @ b12), 0.5 * (C[1] @ bT1 - C[0] @ bT2)])

    F, br = brackets(x)
    C = np.linalg.inv(F).T
    a = a_vals(x)
    # connection on frame: nabla_X e1 = a(X) e2, nabla_X e2 = -a(X) e1, nabla T = 0
    conn = np.zeros((3, 3, 3))  # conn[i, j, :] = frame coefficients of nabla_{f_i} f_j
    for i in range(3):
        conn[i, 0, 1] = a[i]
        conn[i, 1, 0] = -a[i]
    Jm = np.array([[0.0, -1, 0], [1, 0, 0], [0, 0, 0]])

    def tor(i, j):
        return conn[i, j] - conn[j, i] - C @ br(i, j)

    # Tor(X, Y) = L(JX, Y) T on H, with L(e_a, e_b) = delta_ab
    r_h = tor(0, 1) - np.array([0, 0, 1.0])
    res = [np.abs(r_h).max()]
    for j in range(2):
        lhs = tor(2, j)
        bj = C @ br(2, j)
        bJj = C @ br(2, 1 - j) * (1 if j == 0 else -1)  # [T, J e_j] in frame coordinates
        rhs = -0.5 * (bj + Jm @ bJj)
        res.append(np.abs(lhs - rhs).max())
    a_coord = lambda y: np.linalg.inv(model.frame(y)) @ a_vals(y)
    da = fd_derivative(a_coord, x, 1e-3)
    da = da - da.T
    return {
        "a": a,
        "torsion_residual": float(max(res)),
        "theta_bracket": float(C[2] @ br(0, 1)),
        "RW": float(-(F[0] @ da @ F[1])),
        "ricci": 1j * da,
    }


# ---------------------------------------------------------------------------
# Fefferman spaces
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def fefferman_rep(ncr: int = 1) -> CliffordRep:
    """Cl(1, 2n+1) acting on Delta_2n + Delta_2n by the block rule

    s1 (a, b) = (-b, -a), s2 (a, b) = (-b, a), X* (a, b) = (-X a, X b).
    """
    base = build_rep(0, 2 * ncr)
    one = ExactMatrix.identity(base.dim)
    sx = ExactMatrix.from_rows([[0, -1], [-1, 0]])
    sy = ExactMatrix.from_rows([[0, -1], [1, 0]])
    sz = ExactMatrix.from_rows([[-1, 0], [0, 1]])
    gens = [sx.kron(one), sy.kron(one)] + [sz.kron(g) for g in base.generators]
    return CliffordRep(1, 2 * ncr + 1, tuple(gens), label=f"Fefferman({ncr})").check()


def fefferman_spinor(ncr: int = 1) -> np.ndarray:
    """(u(-1, ..., -1), 0) as an exact vector."""
    u = u_delta((-1,) * ncr)
    z = np.array([u[0] * 0] * len(u), dtype=object)
    return np.concatenate([u, z])


def fefferman_chart(model: CRModel, fd_step: float = 1e-4, gauge: Callable | None = None,
                    sigma: Callable | None = None) -> ChartGeometry:
    """Lorentzian chart (CR chart, fibre angle t) with the Fefferman metric.

    The fundamental field is N = (n+2)/2 d/dt.  The connection is
    A = 2 i a + i dt (the pulled-back Tanaka-Webster form counted twice plus
    the fibre part) and the spinor is constant in the frame
    (s1, s2, e1*, ..., T-lifts) built from horizontal lifts for A_theta.
    """
    ncr = model.n
    m = model.dim
    dim = m + 1
    nscale = (ncr + 2) / 2
    N = np.zeros(dim)
    N[-1] = nscale
    r2 = math.sqrt(2)

    def metric(P):
        x = P[:m]
        C = model.coframe(x)
        th = C[2 * ncr]
        at = model.a_theta(x)
        g = np.zeros((dim, dim))
        L = sum(np.outer(C[k], C[k]) for k in range(2 * ncr))
        c = 4.0 / (ncr + 2)
        g[:m, :m] = L + c * 0.5 * (np.outer(th, at) + np.outer(at, th))
        g[:m, m] = g[m, :m] = c * 0.5 * th
        return g

    def frame(P):
        x = P[:m]
        F = model.frame(x)
        at = model.a_theta(x)
        lift = lambda v: np.concatenate([v, [-(at @ v)]])
        T = lift(F[2 * ncr])
        rows = [(N - T) / r2, (N + T) / r2] + [lift(F[k]) for k in range(2 * ncr)]
        return np.array(rows)

    def A(P):
        return np.concatenate([2j * model.a_form(P[:m]), [1j]])

    phi0 = np.array([complex(z) for z in fefferman_spinor(ncr)])

    def spinor(P):
        return phi0

    rep = fefferman_rep(ncr)
    spec = generic_inner_spec(rep)
    chart = ChartGeometry(
        n=dim, p=1, metric=metric, connection1form=A, spinor_field=spinor, frame=frame,
        rep=rep, spec=spec, fd_step=fd_step, name=f"Fefferman({model.tag})",
        marked={"N": np.array([1 / r2, 1 / r2] + [0.0] * 2 * ncr),
                "T*": np.array([-1 / r2, 1 / r2] + [0.0] * 2 * ncr)},
    )
    if gauge is not None:
        chart = gauged_chart(chart, gauge)
    if sigma is not None:
        chart = rescaled_chart(chart, sigma)
    return chart


def fefferman_points(model: CRModel, rng: np.random.Generator, count: int) -> np.ndarray:
    base = model.sample_points(rng, count)
    t = rng.uniform(-math.pi, math.pi, size=(count, 1))
    return np.hstack([base, t])


def charge_check(model: CRModel, points) -> dict[str, float]:
    """max |dA - 2 pi^* Ric^W| and max |dA| over the points (chart components)."""
    chart = fefferman_chart(model)
    m = model.dim
    worst = 0.0
    size = 0.0
    for P in points:
        dAc = fd_derivative(chart.A_coord, P, chart.fd_step)
        dA = dAc - dAc.T
        ric = np.zeros_like(dA)
        ric[:m, :m] = tanaka_webster(model, P[:m])["ricci"]
        worst = max(worst, float(np.abs(dA - 2 * ric).max()))
        size = max(size, float(np.abs(dA).max()))
    return {"max_residual": worst, "max_dA": size}


# ---------------------------------------------------------------------------
# chart transformations
# ---------------------------------------------------------------------------


def gauged_chart(chart: ChartGeometry, tau: Callable) -> ChartGeometry:
    """phi -> e^{i tau/2} phi and A -> A - i d tau."""
    h = chart.fd_step

    def A(x):
        return chart.A_coord(x) - 1j * fd_derivative(lambda y: np.array(tau(y)), x, h)

    def spinor(x):
        return np.exp(0.5j * tau(x)) * chart.spinor(x)

    return replace(chart, connection1form=A, spinor_field=spinor, name=chart.name + "+gauge")


def rescaled_chart(chart: ChartGeometry, sigma: Callable) -> ChartGeometry:
    """Metric e^{2 sigma} g, frame e^{-sigma} s, spinor e^{sigma/2} phi."""
    base_frame = chart.frame_at

    def metric(x):
        return math.exp(2 * sigma(x)) * chart.g(x)

    def frame(x):
        return math.exp(-sigma(x)) * base_frame(x)

    def spinor(x):
        return math.exp(0.5 * sigma(x)) * chart.spinor(x)

    return replace(chart, metric=metric, frame=frame, spinor_field=spinor, name=chart.name + "+conformal")


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def _vmax(v) -> float:
    if v is None:
        return 0.0
    if isinstance(v, KForm):
        return v.max_abs()
    return float(np.abs(np.asarray(v, dtype=complex)).max()) if np.size(v) else 0.0


def point_residuals(chart: ChartGeometry, x, depth: int = 3) -> dict[str, float]:
    """Named residual norms at one point."""
    pf = assemble_fields(chart, x, depth)
    data = pf.data
    n = chart.n
    eps = chart.epsilon
    out: dict[str, float] = {"twistor": max(_vmax(r) for r in pf.twistor)}
    nab = [r - data.rep.mats[i] @ pf.psi / n for i, r in enumerate(pf.twistor)]  # nabla_i phi
    phi = data.phi
    for name, coeff in chart.marked.items():
        v = sum(c * nab[i] for i, c in enumerate(coeff))
        if name == "N":
            out["nabla_N"] = _vmax(v - 0.5j * phi)
        elif name == "T*":
            out["nabla_T*"] = _vmax(v)
    if data.rep.p == 1:
        F = bilinear_forms(data, pf.psi)
        V = np.array([complex(c).real for c in F.V])
        if "N" in chart.marked:
            out["V_plus_sqrt2_N"] = float(np.abs(V + math.sqrt(2) * chart.marked["N"]).max())
        nv = sum(c * nab[i] for i, c in enumerate(V))
        iphi = 1j * phi
        out["measured_nabla_V_constant"] = float((np.vdot(iphi, nv) / np.vdot(iphi, iphi)).real)
        out["measured_nabla_V_fit"] = _vmax(nv - out["measured_nabla_V_constant"] * iphi)
    if depth < 2:
        return out
    cb = data.curvature
    r1, r2 = curvature_identities(data, pf.dirac_squared, pf.nabla_psi)
    out["1p"] = _vmax(r1)
    out["2p"] = max(_vmax(r) for r in r2)
    out["int1"] = max(_vmax(int1_residual(data, i, j)) for i, j in combinations(range(n), 2))
    out["weyl_trace"] = max(
        abs(sum(eps[a] * (cb.w(a, b).value((c, a)) if cb.w(a, b) is not None else 0) for a in range(n)))
        for b in range(n) for c in range(n))
    out["weyl_max"] = max(w.max_abs() for w in cb.W.values())
    out["dA_max"] = cb.dA.max_abs()
    if data.rep.p == 1:
        rows = noco_residuals(data, pf.psi, pf.noco_derivs)
        for r in range(4):
            out[f"noco_row{r + 1}"] = max(_vmax(row[r]) for row in rows)
        rows = noco_residuals(data, pf.psi, pf.noco_derivs, literal=True)
        out["measured_noco_literal"] = max(_vmax(x) for row in rows for x in row)
        ed, (left, right) = prop_checks(data, pf.psi, pf.d_im_psi_phi)
        out["ed"] = _vmax(ed)
        out["poll_consistent"] = 0.0 if left == right else 1.0
        out["poll_left"] = float(left)
        out["poll_right"] = float(right)
        aux = auxiliary_relations(data)
        out["aux_weyl_dA"] = max(abs(v[0]) for v in aux.values())
        out["aux_dA_pairing"] = max(abs(v[1]) for v in aux.values())
        V = [complex(c).real for c in bilinear_forms(data, pf.psi).V]
        D1 = np.array([pf.noco_derivs[i][0].to_dense().real for i in range(n)])  # D1[i, j] = (nabla_i alpha1)(s_j)
        out["killing"] = float(np.abs(D1 + D1.T).max())
        Vd = cb.dA.to_dense()
        out["V_dA"] = float(np.abs(np.einsum("a,ab->b", np.array(V) * np.array(eps), Vd)).max())
        Kd = cb.K
        Vf = np.array(V)
        out["measured_K_VV"] = float(Vf @ Kd @ Vf)
    if depth >= 3:
        out["cotton_max"] = max((c.max_abs() for c in cb.C.values()), default=0.0)
        out["pr2"] = max(_vmax(pr2_residual(data, i, j, pf.psi)) for i, j in combinations(range(n), 2))
        out["pr2_derived"] = max(_vmax(pr2_derived_residual(data, i, j, pf.psi, pf.nabla_B))
                                 for i, j in combinations(range(n), 2))
        out["measured_pr2_literal"] = max(_vmax(pr2_residual(data, i, j, pf.psi, literal=True))
                                          for i, j in combinations(range(n), 2))
    return out


@dataclass
class SweepReport:
    chart: str
    points: list
    per_point: list

    def max(self, key: str) -> float:
        vals = [p[key] for p in self.per_point if key in p]
        return max(vals) if vals else float("nan")

    def values(self, key: str) -> list[float]:
        return [p[key] for p in self.per_point if key in p]

    def keys(self) -> list[str]:
        seen: list[str] = []
        for p in self.per_point:
            for k in p:
                if k not in seen:
                    seen.append(k)
        return seen


def residual_sweep(chart: ChartGeometry, points, depth: int = 3) -> SweepReport:
    per = [point_residuals(chart, P, depth) for P in points]
    return SweepReport(chart.name, [list(map(float, P)) for P in points], per)


def conformal_check(chart: ChartGeometry, sigma: Callable, points) -> dict[str, float]:
    """Twistor residuals before and after the rescaling g -> e^{2 sigma} g."""
    resc = rescaled_chart(chart, sigma)
    before = max(point_residuals(chart, P, 1)["twistor"] for P in points)
    after = max(point_residuals(resc, P, 1)["twistor"] for P in points)
    return {"original": before, "rescaled": after}


def gauge_check(chart: ChartGeometry, tau: Callable, points) -> dict[str, float]:
    """Chart-level gauge change and the pointwise law at assembled data."""
    g = gauged_chart(chart, tau)
    chart_level = max(point_residuals(g, P, 1)["twistor"] for P in points)
    covariance = 0.0
    for P in points:
        pf = assemble_fields(chart, P, 1)
        S = pf.frame
        dtau = S @ fd_derivative(lambda y: np.array(tau(y)), P, chart.fd_step)
        moved = gauge_transform(pf.data, float(tau(P)), tuple(float(t) for t in dtau))
        _, res2 = dirac_and_twistor(moved)
        phase = np.exp(0.5j * tau(P))
        covariance = max(covariance, max(_vmax(r2 - phase * r1) for r1, r2 in zip(pf.twistor, res2)))
    return {"gauged_twistor": chart_level, "covariance": covariance}


SIGMA_PROFILES: dict[str, Callable] = {
    "0.1*x0": lambda x: 0.1 * x[0],
    "0.05*x0*x1": lambda x: 0.05 * x[0] * x[1],
    "0.1*sin(x2)": lambda x: 0.1 * math.sin(x[2]),
}

TAU_PROFILES: dict[str, Callable] = {
    "0.3*x3": lambda x: 0.3 * x[3],
    "0.2*x0*x2": lambda x: 0.2 * x[0] * x[2],
    "0.5*cos(x1)": lambda x: 0.5 * math.cos(x[1]),
}
