"""Invariant inner products on spinors and the induced bilinear forms alpha^k."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .clifford import CliffordRep, spinc_lie_action, zeta_star
from .exact import ExactMatrix, ExactScalar, I as EXACT_I
from .forms import KForm, clifford_action, form_operator, vector_action

REAL = "Real"
IMAGINARY = "Imaginary"


@dataclass(frozen=True)
class InnerProductSpec:
    """<u, v> = d * (M u, v)_C with (x, y)_C = sum x_k conj(y_k)."""

    p: int
    d: object
    matrix: object
    name: str = "generic"

    @property
    def is_exact(self) -> bool:
        return isinstance(self.matrix, ExactMatrix)


def generic_inner_spec(rep: CliffordRep) -> InnerProductSpec:
    """d = i^(p(p-1)/2) and M = e_1 ... e_p."""
    k = rep.p * (rep.p - 1) // 2
    M = rep.product(range(rep.p))
    if rep.is_exact:
        return InnerProductSpec(rep.p, EXACT_I ** k, M)
    return InnerProductSpec(rep.p, 1j ** k, M)


def _exact_spinor(s) -> bool:
    return isinstance(s, np.ndarray) and s.dtype == object


def inner(spec: InnerProductSpec, u, v):
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError("spinor dimensions differ")
    if spec.is_exact and _exact_spinor(u) and _exact_spinor(v):
        Mu = spec.matrix @ u
        total = ExactScalar(0)
        for a, b in zip(Mu, v):
            total = total + a * ExactScalar.coerce(b).conj()
        return spec.d * total
    M = spec.matrix.to_numpy() if isinstance(spec.matrix, ExactMatrix) else np.asarray(spec.matrix)
    return complex(spec.d) * np.vdot(v.astype(complex), M @ u.astype(complex))


@lru_cache(maxsize=256)
def _pairing_matrices(rep: CliffordRep, spec: InnerProductSpec, k: int) -> tuple:
    """(I, sparse entries of d M e_I) for increasing I of length k, exact."""
    out = []
    for I in combinations(range(rep.n), k):
        H = (spec.matrix @ rep.product(I)).scale(spec.d)
        out.append((I, tuple((a, b, h) for (a, b), h in H.entries.items())))
    return tuple(out)


def _pair(entries, u, v) -> ExactScalar:
    """sum_ab H_ab u_b conj(v_a), i.e. <e_I u, v>."""
    total = ExactScalar(0)
    for a, b, h in entries:
        total = total + h * u[b] * v[a].conj()
    return total


def vector_adjoint_residual(rep: CliffordRep, spec: InnerProductSpec, i: int, u, v):
    """<e_i u, v> + (-1)^p <u, e_i v>."""
    x = [0] * rep.n
    x[i] = 1
    return inner(spec, vector_action(rep, x, u), v) + (-1) ** spec.p * inner(spec, u, vector_action(rep, x, v))


def random_spinor(dim: int, rng: np.random.Generator, exact_mode: bool = True, bound: int = 3):
    if exact_mode:
        return np.array(
            [ExactScalar(int(rng.integers(-bound, bound + 1)), int(rng.integers(-bound, bound + 1)))
             for _ in range(dim)],
            dtype=object,
        )
    return rng.normal(size=dim) + 1j * rng.normal(size=dim)


def _flag_of(z, tol: float) -> set:
    if isinstance(z, ExactScalar):
        out = set()
        if z.is_real():
            out.add(REAL)
        if z.is_imaginary():
            out.add(IMAGINARY)
        return out
    z = complex(z)
    scale = max(1.0, abs(z))
    out = set()
    if abs(z.imag) <= tol * scale:
        out.add(REAL)
    if abs(z.real) <= tol * scale:
        out.add(IMAGINARY)
    return out


class RealityInconsistency(RuntimeError):
    pass


def detect_dkp(rep: CliffordRep, spec: InnerProductSpec, k: int, samples: int = 200,
               seed: int = 0, tol: float = 1e-10) -> str:
    """Decide whether <e_I chi, chi> is always real or always imaginary in degree k."""
    if not 0 <= k <= rep.n:
        raise ValueError("degree out of range")
    rng = np.random.default_rng(seed)
    exact_mode = rep.is_exact and spec.is_exact
    allowed = {REAL, IMAGINARY}
    if exact_mode:
        mats = [e for _, e in _pairing_matrices(rep, spec, k)]
    else:
        bases = [KForm.basis(rep.epsilon, I) for I in combinations(range(rep.n), k)]
    for _ in range(samples):
        chi = random_spinor(rep.dim, rng, exact_mode)
        if exact_mode:
            values = (_pair(e, chi, chi) for e in mats)
        else:
            values = (inner(spec, clifford_action(rep, b, chi), chi) for b in bases)
        for z in values:
            allowed &= _flag_of(z, tol)
            if not allowed:
                raise RealityInconsistency(
                    f"degree {k}: <alpha chi, chi> is neither always real nor always imaginary")
    # both flags survive only if every value was 0, which random sampling excludes
    return REAL if REAL in allowed else IMAGINARY


@dataclass(frozen=True)
class RealityTable:
    flags: dict = field(default_factory=dict)

    def __getitem__(self, k: int) -> str:
        return self.flags[k]


def reality_table(rep: CliffordRep, spec: InnerProductSpec, degrees=None, samples: int = 200,
                  seed: int = 0) -> RealityTable:
    degrees = range(rep.n + 1) if degrees is None else degrees
    return RealityTable({k: detect_dkp(rep, spec, k, samples, seed) for k in degrees})


def _project(z, flag: str):
    if isinstance(z, ExactScalar):
        return z.real() if flag == REAL else z.imag()
    z = complex(z)
    return z.real if flag == REAL else z.imag


def alpha_k(rep: CliffordRep, spec: InnerProductSpec, table: RealityTable, chi1, chi2, k: int) -> KForm:
    """Coefficients eps_I d_k(<e_I chi1, chi2>) on increasing tuples I."""
    eps = rep.epsilon
    flag = table[k]
    coeffs = {}
    if rep.is_exact and spec.is_exact and _exact_spinor(chi1) and _exact_spinor(chi2):
        u = [ExactScalar.coerce(x) for x in chi1]
        v = [ExactScalar.coerce(x) for x in chi2]
        for I, entries in _pairing_matrices(rep, spec, k):
            s = 1
            for i in I:
                s *= eps[i]
            coeffs[I] = s * _project(_pair(entries, u, v), flag)
        return KForm(eps, k, coeffs)
    for I in combinations(range(rep.n), k):
        z = inner(spec, clifford_action(rep, KForm.basis(eps, I), chi1), chi2)
        s = 1
        for i in I:
            s *= eps[i]
        coeffs[I] = s * _project(z, flag)
    return KForm(eps, k, coeffs)


def dirac_current(rep: CliffordRep, spec: InnerProductSpec, table: RealityTable, chi) -> list:
    """Components of V = (alpha^1)^sharp in the frame."""
    return alpha_k(rep, spec, table, chi, chi, 1).sharp()


def causal_character(eps, V) -> str:
    g = sum(e * complex(v).real ** 2 for e, v in zip(eps, V))
    if all(abs(complex(v)) == 0 for v in V):
        return "zero"
    if abs(g) < 1e-12:
        return "null"
    return "timelike" if g < 0 else "spacelike"


def so_action_on_form(M: np.ndarray, a: KForm) -> KForm:
    """Derivative of the induced action: (M.a)(v_1..v_k) = -sum_r a(.., M v_r, ..)."""
    n, k = a.n, a.k
    vals = {}
    for I in combinations(range(n), k):
        total = 0
        for r, i in enumerate(I):
            for j in range(n):
                mji = M[j, i]
                if mji == 0:
                    continue
                J = I[:r] + (j,) + I[r + 1:]
                total = total - mji * a.value(J)
        vals[I] = total
    return KForm.from_values(a.eps, k, vals)


def equivariance_check(rep: CliffordRep, spec: InnerProductSpec, table: RealityTable, k: int,
                       X: tuple, chi) -> KForm:
    """alpha^k_{X chi, chi} + alpha^k_{chi, X chi} - zeta_*(X) . alpha^k_chi."""
    coeffs, t = X
    act = spinc_lie_action(rep, coeffs, t)
    Xchi = act @ chi if isinstance(act, ExactMatrix) else act @ np.asarray(chi, dtype=complex)
    lhs = alpha_k(rep, spec, table, Xchi, chi, k) + alpha_k(rep, spec, table, chi, Xchi, k)
    M, _ = zeta_star(rep, coeffs, t)
    return lhs - so_action_on_form(M, alpha_k(rep, spec, table, chi, chi, k))


def spinc_basis(n: int, exact_mode: bool = True) -> list[tuple[dict, object]]:
    """Basis (e_i e_j, 0) for i < j plus (0, i) of spin^c."""
    one = Fraction(1) if exact_mode else 1.0
    out = [({(i, j): one}, 0) for i in range(n) for j in range(i + 1, n)]
    out.append(({}, EXACT_I if exact_mode else 1j))
    return out


def hermitian_flag_oracle(rep: CliffordRep, spec: InnerProductSpec, k: int) -> str | None:
    """Independent decision: d M e_I Hermitian (Real) or anti-Hermitian (Imaginary) for all I."""
    flags = {REAL, IMAGINARY}
    for I in combinations(range(rep.n), k):
        H = spec.matrix @ form_operator(rep, KForm.basis(rep.epsilon, I))
        H = H.scale(spec.d) if isinstance(H, ExactMatrix) else complex(spec.d) * H
        Hs = H.conj_transpose() if isinstance(H, ExactMatrix) else H.conj().T
        if isinstance(H, ExactMatrix):
            if H != Hs:
                flags.discard(REAL)
            if H != -Hs:
                flags.discard(IMAGINARY)
        else:
            if np.abs(H - Hs).max() > 1e-10:
                flags.discard(REAL)
            if np.abs(H + Hs).max() > 1e-10:
                flags.discard(IMAGINARY)
    if len(flags) == 1:
        return flags.pop()
    return None
