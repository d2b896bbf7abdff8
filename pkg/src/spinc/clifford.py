"""Complex Clifford representations in arbitrary signature.

Generators are sparse exact matrices over Q(i, sqrt2).  Index 0 of ``epsilon``
belongs to the first generator; timelike generators (square +1) come first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

import numpy as np

from .exact import (
    I,
    INV_SQRT2,
    ONE,
    ZERO,
    ExactMatrix,
    ExactScalar,
    exact,
    exact_vector,
    kron_all,
)

E2 = ExactMatrix.identity(2)
T2 = ExactMatrix.from_rows([[0, -1j], [1j, 0]])
U2 = ExactMatrix.from_rows([[1j, 0], [0, -1j]])
V2 = ExactMatrix.from_rows([[0, 1j], [1j, 0]])


def exact_arithmetic(x, y, op: str) -> ExactScalar:
    """Field operations on Q(i, sqrt2); ``y`` is ignored for unary ops."""
    x = exact(x)
    if op == "add":
        return x + exact(y)
    if op == "mul":
        return x * exact(y)
    if op == "conj":
        return x.conj()
    if op == "inv":
        return x.inv()
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class CliffordRep:
    """Generators of a complex Clifford representation of signature (p, q).

    ``generators`` holds ExactMatrix values (exact mode) or complex numpy
    arrays (approximate mode).
    """

    p: int
    q: int
    generators: tuple
    label: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def dim(self) -> int:
        g = self.generators[0]
        return g.rows if isinstance(g, ExactMatrix) else g.shape[0]

    @property
    def epsilon(self) -> tuple[int, ...]:
        return tuple(-1 if i < self.p else 1 for i in range(self.n))

    @property
    def is_exact(self) -> bool:
        return isinstance(self.generators[0], ExactMatrix)

    @cached_property
    def mats(self) -> tuple[np.ndarray, ...]:
        """Complex double copies of the generators."""
        if self.is_exact:
            return tuple(g.to_numpy() for g in self.generators)
        return tuple(np.asarray(g, dtype=complex) for g in self.generators)

    @cached_property
    def objs(self) -> tuple[np.ndarray, ...]:
        """Object-array copies of exact generators (for dense exact products)."""
        if not self.is_exact:
            raise TypeError("approximate representation has no exact entries")
        return tuple(g.to_object() for g in self.generators)

    def identity(self):
        if self.is_exact:
            return ExactMatrix.identity(self.dim)
        return np.eye(self.dim, dtype=complex)

    @cached_property
    def _numeric(self) -> "CliffordRep":
        return CliffordRep(self.p, self.q, self.mats, self.label)

    def numeric(self) -> "CliffordRep":
        return self._numeric if self.is_exact else self

    def product(self, idx) -> object:
        """Matrix of e_{i1} ... e_{ik} for the given 0-based indices."""
        out = self.identity()
        for i in idx:
            out = out @ self.generators[i]
        return out

    def relation_residuals(self) -> dict[tuple[int, int], object]:
        """Nonzero entries of e_i e_j + e_j e_i + 2<e_i,e_j> Id, keyed by (i, j)."""
        bad = {}
        eps = self.epsilon
        Id = self.identity()
        for i in range(self.n):
            for j in range(i, self.n):
                gi, gj = self.generators[i], self.generators[j]
                r = gi @ gj + gj @ gi
                if i == j:
                    r = r + (Id * (2 * eps[i]) if self.is_exact else 2 * eps[i] * Id)
                if self.is_exact:
                    if not r.is_zero():
                        bad[(i, j)] = r
                elif np.abs(r).max() > 1e-12:
                    bad[(i, j)] = r
        return bad

    def check(self) -> "CliffordRep":
        bad = self.relation_residuals()
        if bad:
            raise ValueError(f"Clifford relations fail for pairs {sorted(bad)}")
        return self


def _tau(eps: int) -> ExactScalar:
    return ONE if eps == 1 else I


def _even_generators(p: int, q: int) -> list[ExactMatrix]:
    n = p + q
    m = n // 2
    eps = [-1 if i < p else 1 for i in range(n)]
    gens = []
    for j in range(1, m + 1):
        for k, mid in ((2 * j - 1, U2), (2 * j, V2)):
            mat = kron_all([E2] * (m - j) + [mid] + [T2] * (j - 1))
            gens.append(mat.scale(_tau(eps[k - 1])))
    return gens


def build_rep(p: int, q: int) -> CliffordRep:
    """Irreducible complex representation of Cl(p, q) on C^(2^m)."""
    if p < 0 or q < 0 or p + q < 1:
        raise ValueError("need p, q >= 0 and p + q >= 1")
    n = p + q
    m = n // 2
    if n % 2 == 0:
        gens = _even_generators(p, q)
    elif q > 0:
        gens = _even_generators(p, q - 1) if m else []
        last = kron_all([T2] * m).scale(I)  # spacelike, so tau = 1
        gens.append(last)
    else:
        # (p, 0) with p odd: rotate every generator of (0, p) by i
        gens = [g.scale(I) for g in build_rep(0, p).generators]
    rep = CliffordRep(p, q, tuple(gens), label=f"Phi({p},{q})")
    if n % 2 and volume_complex(rep) != rep.identity():
        # the other factor of the pair: flipping e_n maps omega_C to Id
        gens[-1] = -gens[-1]
        rep = CliffordRep(p, q, tuple(gens), label=f"Phi({p},{q})")
    return rep.check()


def volume_real(rep: CliffordRep):
    return rep.product(range(rep.n))


def volume_complex(rep: CliffordRep):
    """Phi(omega_C) with omega_C = (-i)^(floor((n+1)/2) - p) e_1 ... e_n."""
    k = (rep.n + 1) // 2 - rep.p
    if rep.is_exact:
        return volume_real(rep).scale(ExactScalar(0, -1) ** k)
    return ((-1j) ** k) * volume_real(rep)


def half_projectors(rep: CliffordRep):
    """(P+, P-) = ((Id + omega_C)/2, (Id - omega_C)/2) for even n."""
    if rep.n % 2:
        raise ValueError("half-spinor projectors need even dimension")
    w = volume_complex(rep)
    Id = rep.identity()
    if rep.is_exact:
        h = Fraction(1, 2)
        return ((Id + w).scale(h), (Id - w).scale(h))
    return ((Id + w) / 2, (Id - w) / 2)


def u_delta(deltas) -> np.ndarray:
    """u(d1) x ... x u(dm) with u(d) = (1, -d i)/sqrt2, exact."""
    vec = exact_vector([1])
    for d in deltas:
        if d not in (1, -1):
            raise ValueError("delta entries must be +1 or -1")
        u = exact_vector([INV_SQRT2, INV_SQRT2 * ExactScalar(0, -d)])
        vec = np.array([a * b for a in vec for b in u], dtype=object)
    return vec


def half_spinor_label_report(rep: CliffordRep) -> list[tuple[tuple[int, ...], int, int]]:
    """Return (deltas, prod(deltas), omega_C eigenvalue) for mismatching u(delta)."""
    w = volume_complex(rep)
    out = []
    for deltas in product((1, -1), repeat=rep.m):
        u = u_delta(deltas)
        wu = w @ u
        sign = int(np.prod(deltas))
        if all((a - b).is_zero() for a, b in zip(wu, u)):
            eig = 1
        elif all((a + b).is_zero() for a, b in zip(wu, u)):
            eig = -1
        else:
            eig = 0
        if eig != sign:
            out.append((deltas, sign, eig))
    return out


def _pairs(n: int):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def spinc_lie_action(rep: CliffordRep, coeffs: dict, t=0):
    """Spinor action of X = (sum c_ij e_i e_j, t) with t in iR: sum c_ij e_i e_j + t Id."""
    Id = rep.identity()
    if rep.is_exact:
        out = Id.scale(exact(t))
        for (i, j), c in coeffs.items():
            out = out + (rep.generators[i] @ rep.generators[j]).scale(exact(c))
        return out
    out = complex(t) * Id
    for (i, j), c in coeffs.items():
        out = out + complex(c) * (rep.mats[i] @ rep.mats[j])
    return out


def so_generator(eps, i: int, j: int, exact_mode: bool = True) -> np.ndarray:
    """E_ij = -eps_j D_ij + eps_i D_ji as an n x n matrix."""
    n = len(eps)
    zero = Fraction(0) if exact_mode else 0.0
    M = np.full((n, n), zero, dtype=object if exact_mode else float)
    M[i, j] = -eps[j]
    M[j, i] = eps[i]
    return M


def zeta_star(rep: CliffordRep, coeffs: dict, t=0):
    """Image (so-matrix, scalar) of (sum c_ij e_i e_j, t) under the covering's derivative."""
    exact_mode = rep.is_exact
    n = rep.n
    M = np.full((n, n), Fraction(0) if exact_mode else 0.0, dtype=object if exact_mode else float)
    for (i, j), c in coeffs.items():
        M = M + 2 * c * so_generator(rep.epsilon, i, j, exact_mode)
    return M, 2 * t


def realify(u: np.ndarray) -> np.ndarray:
    """iota: gl(m, C) -> gl(2m, R); complex coordinate k maps to real (2k, 2k+1)."""
    m = u.shape[0]
    exact_mode = u.dtype == object
    R = np.full((2 * m, 2 * m), ZERO if exact_mode else 0.0, dtype=object if exact_mode else float)
    for a in range(m):
        for b in range(m):
            z = u[a, b]
            if exact_mode:
                z = exact(z)
                re, im = z.real(), z.imag()
            else:
                re, im = z.real, z.imag
            R[2 * a, 2 * b] = re
            R[2 * a, 2 * b + 1] = -im
            R[2 * a + 1, 2 * b] = im
            R[2 * a + 1, 2 * b + 1] = re
    return R


def unitary_lie_lift(rep: CliffordRep, u: np.ndarray):
    """Spinor action of l_*(u) for u in u(p', q'), (p, q) = (2p', 2q').

    The so-part of the lift is half of iota(u) expanded in the E_ij basis and
    the scalar part is half the trace.
    """
    if rep.n % 2 or rep.p % 2:
        raise ValueError("unitary lift needs (p, q) = (2p', 2q')")
    u = np.asarray(u)
    if u.shape != (rep.m, rep.m):
        raise ValueError("u must be an m x m matrix with m = n/2")
    exact_mode = rep.is_exact and u.dtype == object
    R = realify(u)
    eps = rep.epsilon
    coeffs = {}
    for i, j in _pairs(rep.n):
        c = -eps[j] * R[i, j]
        coeffs[(i, j)] = c * Fraction(1, 2) if exact_mode else 0.5 * c
    tr = sum((u[k, k] for k in range(rep.m)), ZERO if exact_mode else 0)
    if exact_mode:
        return spinc_lie_action(rep, coeffs, exact(tr) * Fraction(1, 2))
    return spinc_lie_action(rep.numeric(), coeffs, 0.5 * tr)


def pseudo_unitary_sample(pp: int, qq: int, rng: np.random.Generator, exact_mode: bool = False,
                          bound: int = 3) -> np.ndarray:
    """Random element of u(pp, qq): I_{pp,qq} K with K skew-Hermitian."""
    m = pp + qq
    sig = np.array([-1] * pp + [1] * qq)
    if exact_mode:
        K = np.empty((m, m), dtype=object)
        for a in range(m):
            K[a, a] = ExactScalar(0, int(rng.integers(-bound, bound + 1)))
            for b in range(a + 1, m):
                z = ExactScalar(int(rng.integers(-bound, bound + 1)), int(rng.integers(-bound, bound + 1)))
                K[a, b] = z
                K[b, a] = -z.conj()
        for a in range(m):
            for b in range(m):
                K[a, b] = K[a, b] * sig[a]
        return K
    X = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    K = X - X.conj().T
    return sig[:, None] * K
