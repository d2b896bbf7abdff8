"""Frame-relative real k-forms and their Clifford action.

Coefficients are stored on the basis e_I^flat = e_{i1}^flat ^ ... ^ e_{ik}^flat
(increasing, 0-based indices).  e_i^flat = <e_i, .> so that e_i^flat(e_j) =
eps_i delta_ij, and under the Clifford correspondence e_I^flat acts as
e_{i1} ... e_{ik}.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np

from .clifford import CliffordRep
from .exact import ExactMatrix, ExactScalar


def _is_zero(v) -> bool:
    if isinstance(v, ExactScalar):
        return v.is_zero()
    return v == 0


def _sort_sign(idx: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting idx (0 if an index repeats)."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class KForm:
    """Sparse k-form on an n-dimensional pseudo-orthonormal frame."""

    __slots__ = ("n", "k", "eps", "coeffs")

    def __init__(self, eps, k: int, coeffs: dict | None = None):
        self.eps = tuple(eps)
        self.n = len(self.eps)
        self.k = k
        if k < 0 or k > self.n:
            raise ValueError(f"degree {k} outside 0..{self.n}")
        out = {}
        for idx, v in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != k or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing of length {k}")
            if idx and (idx[0] < 0 or idx[-1] >= self.n):
                raise ValueError(f"index tuple {idx} out of range")
            if not _is_zero(v):
                out[idx] = v
        self.coeffs = out

    # constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, eps, k: int) -> "KForm":
        return cls(eps, k)

    @classmethod
    def basis(cls, eps, idx, coeff=1) -> "KForm":
        sign, srt = _sort_sign(tuple(idx))
        if not sign:
            return cls(eps, len(idx))
        return cls(eps, len(idx), {srt: sign * coeff})

    @classmethod
    def flat(cls, eps, x) -> "KForm":
        """X^flat for X = sum x_i e_i."""
        return cls(eps, 1, {(i,): v for i, v in enumerate(x)})

    @classmethod
    def from_values(cls, eps, k: int, values) -> "KForm":
        """Form with prescribed values F(s_I) on increasing frame tuples.

        ``values`` is a dict {I: value} or a dense antisymmetric array.
        """
        eps = tuple(eps)
        n = len(eps)
        if isinstance(values, dict):
            items = values.items()
        else:
            arr = np.asarray(values)
            items = ((I, arr[I]) for I in combinations(range(n), k))
        coeffs = {}
        for I, v in items:
            s = 1
            for i in I:
                s *= eps[i]
            coeffs[tuple(I)] = s * v
        return cls(eps, k, coeffs)

    # linear structure ------------------------------------------------------
    def _check(self, o: "KForm"):
        if self.eps != o.eps or self.k != o.k:
            raise ValueError("forms live in different spaces")

    def __add__(self, o: "KForm") -> "KForm":
        self._check(o)
        out = dict(self.coeffs)
        for idx, v in o.coeffs.items():
            out[idx] = out[idx] + v if idx in out else v
        return KForm(self.eps, self.k, out)

    def __neg__(self) -> "KForm":
        return KForm(self.eps, self.k, {i: -v for i, v in self.coeffs.items()})

    def __sub__(self, o: "KForm") -> "KForm":
        return self + (-o)

    def scale(self, s) -> "KForm":
        return KForm(self.eps, self.k, {i: s * v for i, v in self.coeffs.items()})

    def __mul__(self, s):
        if isinstance(s, KForm):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    def __eq__(self, o):
        if not isinstance(o, KForm):
            return NotImplemented
        return self.eps == o.eps and self.k == o.k and not (self - o).coeffs

    def __hash__(self):
        return hash((self.eps, self.k, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def max_abs(self) -> float:
        return max((abs(complex(v)) for v in self.coeffs.values()), default=0.0)

    def get(self, idx) -> object:
        sign, srt = _sort_sign(tuple(idx))
        if not sign:
            return 0
        v = self.coeffs.get(srt, 0)
        return sign * v

    def value(self, idx) -> object:
        """F(s_{i1}, ..., s_{ik}) for frame vectors."""
        v = self.get(idx)
        for i in idx:
            v = v * self.eps[i]
        return v

    def sharp(self) -> list:
        """Vector components of alpha^sharp for a 1-form."""
        if self.k != 1:
            raise ValueError("sharp is defined here for 1-forms only")
        return [self.coeffs.get((i,), 0) for i in range(self.n)]

    def to_dense(self) -> np.ndarray:
        """Antisymmetric array of values F(s_{i1}, ..., s_{ik}), complex doubles."""
        shape = (self.n,) * self.k
        out = np.zeros(shape, dtype=complex)
        from itertools import permutations

        for idx, v in self.coeffs.items():
            val = complex(v)
            for i in idx:
                val *= self.eps[i]
            for perm in permutations(range(self.k)):
                sign, _ = _sort_sign(tuple(perm))
                out[tuple(idx[p] for p in perm)] = sign * val
        return out

    def __repr__(self):
        terms = " + ".join(f"({v})e{list(i)}" for i, v in sorted(self.coeffs.items()))
        return f"KForm[{self.k}]({terms or '0'})"


def wedge(a: KForm, b: KForm) -> KForm:
    if a.eps != b.eps:
        raise ValueError("forms live on different frames")
    if a.k + b.k > a.n:
        raise ValueError(f"wedge degree {a.k + b.k} exceeds dimension {a.n}")
    out: dict = {}
    for I, v in a.coeffs.items():
        for J, w in b.coeffs.items():
            sign, srt = _sort_sign(I + J)
            if not sign:
                continue
            t = v * w if sign > 0 else -(v * w)
            out[srt] = out[srt] + t if srt in out else t
    return KForm(a.eps, a.k + b.k, out)


def contract(X, a: KForm) -> KForm:
    """Interior product X -| a; X is a frame index or a component sequence."""
    if a.k == 0:
        raise ValueError("cannot contract a 0-form")
    if isinstance(X, (int, np.integer)):
        comps = {int(X): 1}
    else:
        comps = {i: x for i, x in enumerate(X) if not _is_zero(x)}
    out: dict = {}
    for I, v in a.coeffs.items():
        for pos, i in enumerate(I):
            if i not in comps:
                continue
            # e_i^flat(X) = eps_i x_i
            t = v * comps[i] * (a.eps[i] * (-1) ** pos)
            J = I[:pos] + I[pos + 1:]
            out[J] = out[J] + t if J in out else t
    return KForm(a.eps, a.k - 1, out)


def pairing(a: KForm, b: KForm):
    """Metric pairing <e_I^flat, e_J^flat> = delta_IJ prod eps_I."""
    if a.eps != b.eps or a.k != b.k:
        raise ValueError("pairing needs equal degrees on the same frame")
    total = 0
    for I, v in a.coeffs.items():
        if I in b.coeffs:
            s = 1
            for i in I:
                s *= a.eps[i]
            total = total + s * v * b.coeffs[I]
    return total


def _as_spinor(rep: CliffordRep, s):
    s = np.asarray(s)
    if s.shape != (rep.dim,):
        raise ValueError(f"spinor of length {s.shape} does not match dimension {rep.dim}")
    return s


def clifford_action(rep: CliffordRep, a: KForm, s):
    """sum_I coeff_I e_I . s"""
    if a.n != rep.n:
        raise ValueError("form and representation frame dimensions differ")
    s = _as_spinor(rep, s)
    exact_mode = rep.is_exact and s.dtype == object
    gens = rep.generators if exact_mode else rep.mats
    if not exact_mode and s.dtype == object:
        s = s.astype(complex)
    out = np.zeros(rep.dim, dtype=object if exact_mode else complex)
    if exact_mode:
        out[:] = ExactScalar(0)
    for I, v in a.coeffs.items():
        t = s
        for i in reversed(I):
            t = gens[i] @ t
        if exact_mode:
            c = v if isinstance(v, ExactScalar) else ExactScalar.coerce(v)
            out = out + np.array([c * x for x in t], dtype=object)
        else:
            out = out + complex(v) * t
    return out


def form_operator(rep: CliffordRep, a: KForm):
    """Matrix of the Clifford action of a."""
    exact_mode = rep.is_exact and all(
        isinstance(v, (int, Fraction, ExactScalar)) for v in a.coeffs.values()
    )
    if exact_mode:
        out = ExactMatrix.zeros(rep.dim)
        for I, v in a.coeffs.items():
            out = out + rep.product(I).scale(v)
        return out
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for I, v in a.coeffs.items():
        M = np.eye(rep.dim, dtype=complex)
        for i in I:
            M = M @ rep.mats[i]
        out = out + complex(v) * M
    return out


def vector_action(rep: CliffordRep, x, s):
    """X . s for X = sum x_i e_i."""
    return clifford_action(rep, KForm.flat(rep.epsilon, x), s)


def clid_residuals(rep: CliffordRep, x, w: KForm, s):
    """Both Clifford identities applied to s: returns (X.w - (X^ w - X-|w), w.X - (-1)^k (X^ w + X-|w))."""
    eps = rep.epsilon
    X = KForm.flat(eps, x)
    k = w.k
    wX = clifford_action(rep, w, vector_action(rep, x, s))  # (w . X) s = w(X s)
    Xw = vector_action(rep, x, clifford_action(rep, w, s))  # (X . w) s = X(w s)
    if k < rep.n:
        wedge_part = clifford_action(rep, wedge(X, w), s)
    else:
        wedge_part = np.zeros_like(Xw)
    contr_part = clifford_action(rep, contract(list(x), w), s) if k > 0 else np.zeros_like(Xw)
    r1 = Xw - (wedge_part - contr_part)
    r2 = wX - (-1) ** k * (wedge_part + contr_part)
    return r1, r2
