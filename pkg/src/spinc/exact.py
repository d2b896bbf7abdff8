"""Exact arithmetic in Q(i, sqrt2), sparse exact matrices and exact row reduction."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
import math

import numpy as np


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


# product of basis units (1, i, r, ir), r = sqrt2: (index, factor)
_UNIT_TABLE = (
    ((0, 1), (1, 1), (2, 1), (3, 1)),
    ((1, 1), (0, -1), (3, 1), (2, -1)),
    ((2, 1), (3, 1), (0, 2), (1, 2)),
    ((3, 1), (2, -1), (1, 2), (0, -2)),
)


_F0 = Fraction(0)


def _raw(a: Fraction, b: Fraction, c: Fraction, d: Fraction) -> "ExactScalar":
    """Build from components already known to be Fractions (skips conversion)."""
    x = object.__new__(ExactScalar)
    x.a, x.b, x.c, x.d = a, b, c, d
    return x


class ExactScalar:
    """a + b*i + c*sqrt2 + d*i*sqrt2 with rational a, b, c, d."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a=0, b=0, c=0, d=0):
        self.a = _q(a)
        self.b = _q(b)
        self.c = _q(c)
        self.d = _q(d)

    @classmethod
    def coerce(cls, x) -> "ExactScalar":
        if isinstance(x, ExactScalar):
            return x
        if isinstance(x, complex):
            re, im = x.real, x.imag
            if re != int(re) or im != int(im):
                raise TypeError("only integral complex literals convert exactly")
            return cls(int(re), int(im))
        if isinstance(x, float):
            if x != int(x):
                raise TypeError("non-integral floats do not convert exactly")
            return cls(int(x))
        return cls(_q(x))

    # ring structure -------------------------------------------------------
    def __add__(self, o):
        if not isinstance(o, ExactScalar):
            try:
                o = ExactScalar.coerce(o)
            except TypeError:
                return NotImplemented
        return _raw(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __neg__(self):
        return _raw(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, o):
        if not isinstance(o, ExactScalar):
            try:
                o = ExactScalar.coerce(o)
            except TypeError:
                return NotImplemented
        return _raw(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, ExactScalar):
            if isinstance(o, (np.ndarray, ExactMatrix)):
                return NotImplemented
            try:
                o = ExactScalar.coerce(o)
            except TypeError:
                return NotImplemented
        # basis 1, i, r, ir with r = sqrt2; only nonzero parts are multiplied
        acc = [_F0, _F0, _F0, _F0]
        x = (self.a, self.b, self.c, self.d)
        y = (o.a, o.b, o.c, o.d)
        for k in range(4):
            if x[k]:
                for l in range(4):
                    if y[l]:
                        idx, sgn = _UNIT_TABLE[k][l]
                        acc[idx] += sgn * x[k] * y[l]
        return _raw(*acc)

    __rmul__ = __mul__

    def conj(self) -> "ExactScalar":
        return _raw(self.a, -self.b, self.c, -self.d)

    def inv(self) -> "ExactScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(i, sqrt2)")
        # x = P + Q r; x * (P - Q r) = P^2 - 2 Q^2 =: N (Gaussian rational)
        P = complex_q(self.a, self.b)
        Q = complex_q(self.c, self.d)
        N = P.mul(P).sub(Q.mul(Q).scale(2))
        Ninv = N.inv()
        num_p = P.mul(Ninv)
        num_q = Q.mul(Ninv).scale(-1)
        return ExactScalar(num_p.re, num_p.im, num_q.re, num_q.im)

    def __truediv__(self, o):
        try:
            o = ExactScalar.coerce(o)
        except TypeError:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, o):
        return ExactScalar.coerce(o) * self.inv()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inv()
        out = ExactScalar(1)
        for _ in range(abs(k)):
            out = out * base
        return out

    # predicates and projections -------------------------------------------
    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def __bool__(self):
        return not self.is_zero()

    def is_real(self) -> bool:
        return not (self.b or self.d)

    def is_imaginary(self) -> bool:
        return not (self.a or self.c)

    def real(self) -> "ExactScalar":
        return ExactScalar(self.a, 0, self.c, 0)

    def imag(self) -> "ExactScalar":
        return ExactScalar(self.b, 0, self.d, 0)

    def __eq__(self, o):
        try:
            o = ExactScalar.coerce(o)
        except TypeError:
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (o.a, o.b, o.c, o.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __complex__(self):
        r = math.sqrt(2.0)
        return complex(float(self.a) + r * float(self.c), float(self.b) + r * float(self.d))

    def __float__(self):
        if not self.is_real():
            raise TypeError("non-real ExactScalar")
        return float(self.a) + math.sqrt(2.0) * float(self.c)

    def components(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def __repr__(self):
        return f"ExactScalar({self})"

    def __str__(self):
        parts = []
        for coeff, unit in ((self.a, ""), (self.b, "i"), (self.c, "√2"), (self.d, "i√2")):
            if not coeff:
                continue
            if unit and abs(coeff) == 1:
                s = ("-" if coeff < 0 else "+") + unit
            else:
                s = ("+" if coeff > 0 else "-") + str(abs(coeff)) + ("*" + unit if unit else "")
            parts.append(s)
        if not parts:
            return "0"
        out = "".join(parts)
        return out[1:] if out.startswith("+") else out


class complex_q:
    """Gaussian rational helper used by inversion."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re, self.im = Fraction(re), Fraction(im)

    def mul(self, o):
        return complex_q(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def sub(self, o):
        return complex_q(self.re - o.re, self.im - o.im)

    def scale(self, k):
        return complex_q(self.re * k, self.im * k)

    def inv(self):
        n = self.re * self.re + self.im * self.im
        return complex_q(self.re / n, -self.im / n)


ZERO = ExactScalar(0)
ONE = ExactScalar(1)
I = ExactScalar(0, 1)
SQRT2 = ExactScalar(0, 0, 1)
INV_SQRT2 = ExactScalar(0, 0, Fraction(1, 2))


def exact(x) -> ExactScalar:
    return ExactScalar.coerce(x)


def parse_scalar(text: str) -> ExactScalar:
    """Parse literals like '3/2', '-i', '1/2*i', '2+3i', 'sqrt2/2', 'i*sqrt2'."""
    s = text.replace(" ", "").replace("√2", "sqrt2").replace("−", "-")
    if not s:
        raise ValueError("empty scalar literal")
    terms: list[str] = []
    cur = ""
    for ch in s:
        if ch in "+-" and cur and cur[-1] not in "*/(":
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    terms.append(cur)
    total = ExactScalar(0)
    for t in terms:
        sign = 1
        while t and t[0] in "+-":
            if t[0] == "-":
                sign = -sign
            t = t[1:]
        unit = ExactScalar(1)
        factors = t.replace("/", "*/").split("*")
        coeff = Fraction(1)
        for fac in factors:
            if not fac:
                continue
            div = fac.startswith("/")
            body = fac[1:] if div else fac
            while body.endswith("i") or body.endswith("sqrt2"):
                if body.endswith("sqrt2"):
                    if div:
                        unit = unit * INV_SQRT2
                    else:
                        unit = unit * SQRT2
                    body = body[: -len("sqrt2")]
                else:
                    unit = unit * (ExactScalar(0, -1) if div else I)
                    body = body[:-1]
            if body.startswith("sqrt2"):
                unit = unit * (INV_SQRT2 if div else SQRT2)
                body = body[len("sqrt2"):]
            if body:
                val = Fraction(body)
                coeff = coeff / val if div else coeff * val
        total = total + unit * (sign * coeff)
    return total


# ---------------------------------------------------------------------------
# sparse matrices
# ---------------------------------------------------------------------------


class ExactMatrix:
    """Sparse matrix over Q(i, sqrt2); entries is a dict {(r, c): ExactScalar}."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: dict | None = None):
        self.rows = rows
        self.cols = cols
        self.entries = {k: v for k, v in (entries or {}).items() if not v.is_zero()}

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, {(k, k): ONE for k in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "ExactMatrix":
        return cls(rows, rows if cols is None else cols)

    @classmethod
    def from_rows(cls, rows) -> "ExactMatrix":
        rows = [list(r) for r in rows]
        ent = {}
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                v = exact(v)
                if not v.is_zero():
                    ent[(i, j)] = v
        return cls(len(rows), len(rows[0]), ent)

    def __matmul__(self, o):
        if isinstance(o, ExactMatrix):
            if self.cols != o.rows:
                raise ValueError("dimension mismatch in product")
            by_row: dict[int, list] = {}
            for (r, c), v in o.entries.items():
                by_row.setdefault(r, []).append((c, v))
            out: dict = {}
            for (r, k), v in self.entries.items():
                for c, w in by_row.get(k, ()):
                    key = (r, c)
                    out[key] = out[key] + v * w if key in out else v * w
            return ExactMatrix(self.rows, o.cols, out)
        if isinstance(o, np.ndarray) and o.ndim == 1:
            if len(o) != self.cols:
                raise ValueError("dimension mismatch in matrix-vector product")
            res = np.array([ZERO] * self.rows, dtype=object)
            for (r, c), v in self.entries.items():
                res[r] = res[r] + v * o[c]
            return res
        return NotImplemented

    def __add__(self, o):
        if not isinstance(o, ExactMatrix):
            return NotImplemented
        if (self.rows, self.cols) != (o.rows, o.cols):
            raise ValueError("dimension mismatch in sum")
        out = dict(self.entries)
        for k, v in o.entries.items():
            out[k] = out[k] + v if k in out else v
        return ExactMatrix(self.rows, self.cols, out)

    def __neg__(self):
        return ExactMatrix(self.rows, self.cols, {k: -v for k, v in self.entries.items()})

    def __sub__(self, o):
        return self + (-o)

    def scale(self, s) -> "ExactMatrix":
        s = exact(s)
        return ExactMatrix(self.rows, self.cols, {k: s * v for k, v in self.entries.items()})

    def __mul__(self, s):
        if isinstance(s, (ExactMatrix, np.ndarray)):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    def kron(self, o: "ExactMatrix") -> "ExactMatrix":
        out = {}
        for (r1, c1), v in self.entries.items():
            for (r2, c2), w in o.entries.items():
                out[(r1 * o.rows + r2, c1 * o.cols + c2)] = v * w
        return ExactMatrix(self.rows * o.rows, self.cols * o.cols, out)

    def conj_transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, {(c, r): v.conj() for (r, c), v in self.entries.items()})

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    def is_zero(self) -> bool:
        return not self.entries

    def trace(self) -> ExactScalar:
        return sum((v for (r, c), v in self.entries.items() if r == c), ZERO)

    def __eq__(self, o):
        if not isinstance(o, ExactMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (o.rows, o.cols) and (self - o).is_zero()

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def to_object(self) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=object)
        out[...] = ZERO
        for (r, c), v in self.entries.items():
            out[r, c] = v
        return out

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=complex)
        for (r, c), v in self.entries.items():
            out[r, c] = complex(v)
        return out

    def rank(self) -> int:
        return len(rref([list(r) for r in self.to_object()])[1])

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def kron_all(mats) -> ExactMatrix:
    out = ExactMatrix.identity(1)
    for m in mats:
        out = out.kron(m)
    return out


def exact_vector(values) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    for k, v in enumerate(values):
        arr[k] = exact(v)
    return arr


# ---------------------------------------------------------------------------
# row reduction over any exact field (Fraction or ExactScalar entries)
# ---------------------------------------------------------------------------


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, ExactScalar) else x == 0


def rref(rows: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    M = [list(r) for r in rows]
    if not M:
        return M, []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(M)) if not _is_zero(M[k][c])), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = M[r][c].inv() if isinstance(M[r][c], ExactScalar) else 1 / Fraction(M[r][c])
        M[r] = [v * inv for v in M[r]]
        for k in range(len(M)):
            if k != r and not _is_zero(M[k][c]):
                f = M[k][c]
                M[k] = [a - f * b for a, b in zip(M[k], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


def solve_exact(A: list[list], b: list) -> tuple[list | None, list[list]]:
    """Solve A x = b exactly.

    Returns (particular solution or None if inconsistent, basis of the kernel of A).
    """
    ncols = len(A[0])
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    R, piv = rref(aug)
    if ncols in piv:
        return None, nullspace(A)
    zero = _zero_like(A)
    x = [zero] * ncols
    for r, c in enumerate(piv):
        x[c] = R[r][ncols]
    return x, nullspace(A)


def _zero_like(A):
    for row in A:
        for v in row:
            return ZERO if isinstance(v, ExactScalar) else Fraction(0)
    return Fraction(0)


def nullspace(A: list[list]) -> list[list]:
    R, piv = rref(A)
    ncols = len(A[0])
    zero = _zero_like(A)
    one = ONE if isinstance(zero, ExactScalar) else Fraction(1)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for r, c in enumerate(piv):
            v[c] = -R[r][f]
        basis.append(v)
    return basis
