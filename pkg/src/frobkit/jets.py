"""Truncated multivariate Taylor arithmetic (forward-mode AD).

A :class:`Jet` stores the Taylor coefficients of a scalar function at a point,
for every multi-index of total degree ``<= order``.  Coefficients are the
*Taylor* coefficients, i.e. ``partial / alpha!``; use :meth:`Jet.partial` to
get the derivative back.

The elementary functions in this module accept either jets or plain floats,
so the same formula code can be evaluated numerically or differentiated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, OrderExceeded

__all__ = [
    "Jet",
    "FdOracle",
    "jet_var",
    "jet_const",
    "variables",
    "jet_apply",
    "extract_partial",
    "fd_check",
    "compose",
    "exp",
    "ln",
    "log",
    "sinh",
    "cosh",
    "sqrt",
    "pow_real",
    "value_of",
]


class _Basis:
    """Graded-lexicographic monomial basis for ``nvars`` variables up to ``order``."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        mis: list[tuple[int, ...]] = []
        for deg in range(order + 1):
            # graded lex: within a degree, larger exponent of earlier variables first
            level = [
                mi
                for mi in itertools.product(range(deg + 1), repeat=nvars)
                if sum(mi) == deg
            ]
            level.sort(reverse=True)
            mis.extend(level)
        self.multi_indices = mis
        self.size = len(mis)
        self.index = {mi: k for k, mi in enumerate(mis)}
        self.degree = np.array([sum(mi) for mi in mis], dtype=int)
        self.factorial = np.array(
            [math.prod(math.factorial(a) for a in mi) for mi in mis], dtype=float
        )

        ii, jj, kk = [], [], []
        for a, ma in enumerate(mis):
            for b, mb in enumerate(mis):
                if self.degree[a] + self.degree[b] > order:
                    continue
                ii.append(a)
                jj.append(b)
                kk.append(self.index[tuple(x + y for x, y in zip(ma, mb))])
        self._mul_i = np.array(ii, dtype=np.intp)
        self._mul_j = np.array(jj, dtype=np.intp)
        self._mul_k = np.array(kk, dtype=np.intp)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.bincount(
            self._mul_k, weights=a[self._mul_i] * b[self._mul_j], minlength=self.size
        )

    @lru_cache(maxsize=None)
    def derivative_map(self, var: int) -> tuple[np.ndarray, np.ndarray]:
        """Source indices and weights for d/d(var), landing in the order-1 basis."""
        lower = basis(self.nvars, self.order - 1)
        src = np.empty(lower.size, dtype=np.intp)
        weight = np.empty(lower.size)
        for k, mi in enumerate(lower.multi_indices):
            up = list(mi)
            up[var] += 1
            src[k] = self.index[tuple(up)]
            weight[k] = up[var]
        return src, weight

    @lru_cache(maxsize=None)
    def truncation_map(self, order: int) -> np.ndarray:
        lower = basis(self.nvars, order)
        return np.array([self.index[mi] for mi in lower.multi_indices], dtype=np.intp)


@lru_cache(maxsize=None)
def basis(nvars: int, order: int) -> _Basis:
    if nvars < 1:
        raise ValueError("nvars must be >= 1")
    if order < 0:
        raise ValueError("order must be >= 0")
    return _Basis(nvars, order)


class Jet:
    """Immutable truncated Taylor expansion of a scalar field."""

    __slots__ = ("coeffs", "basis")
    __array_priority__ = 1000  # keep numpy scalars from swallowing jets

    def __init__(self, coeffs: np.ndarray, basis_: _Basis):
        self.coeffs = coeffs
        self.basis = basis_

    # -- construction -------------------------------------------------
    @classmethod
    def constant(cls, value: float, nvars: int, order: int) -> "Jet":
        b = basis(nvars, order)
        c = np.zeros(b.size)
        c[0] = value
        return cls(c, b)

    @classmethod
    def from_dict(cls, coeffs: dict, nvars: int, order: int) -> "Jet":
        b = basis(nvars, order)
        c = np.zeros(b.size)
        for mi, v in coeffs.items():
            c[b.index[tuple(mi)]] = v
        return cls(c, b)

    # -- introspection ------------------------------------------------
    @property
    def nvars(self) -> int:
        return self.basis.nvars

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {mi: float(c) for mi, c in zip(self.basis.multi_indices, self.coeffs)}

    def coeff(self, multi_index: Sequence[int]) -> float:
        mi = tuple(multi_index)
        if len(mi) != self.nvars:
            raise ValueError(f"multi-index {mi} has wrong length for {self.nvars} vars")
        if sum(mi) > self.order:
            raise OrderExceeded(f"|{mi}| exceeds jet order {self.order}")
        return float(self.coeffs[self.basis.index[mi]])

    def partial(self, multi_index: Sequence[int]) -> float:
        mi = tuple(multi_index)
        c = self.coeff(mi)
        return c * math.prod(math.factorial(a) for a in mi)

    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise OrderExceeded("gradient needs order >= 1")
        return self.coeffs[1 : self.nvars + 1].copy()

    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise OrderExceeded("hessian needs order >= 2")
        n = self.nvars
        h = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                mi = [0] * n
                mi[i] += 1
                mi[j] += 1
                h[i, j] = self.partial(mi)
        return h

    def derivative(self, var: int) -> "Jet":
        """d/du^var, returned as a jet of one lower order."""
        if self.order < 1:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        src, w = self.basis.derivative_map(var)
        return Jet(self.coeffs[src] * w, basis(self.nvars, self.order - 1))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderExceeded("cannot raise the order of a jet")
        if order == self.order:
            return self
        idx = self.basis.truncation_map(order)
        return Jet(self.coeffs[idx], basis(self.nvars, order))

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Jet):
            if other.basis is not self.basis:
                raise ValueError(
                    f"jet mismatch: ({self.nvars},{self.order}) vs ({other.nvars},{other.order})"
                )
            return other.coeffs
        c = np.zeros(self.basis.size)
        c[0] = float(other)
        return c

    def __add__(self, other):
        if not isinstance(other, Jet):
            c = self.coeffs.copy()
            c[0] += float(other)
            return Jet(c, self.basis)
        return Jet(self.coeffs + self._coerce(other), self.basis)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Jet):
            c = self.coeffs.copy()
            c[0] -= float(other)
            return Jet(c, self.basis)
        return Jet(self.coeffs - self._coerce(other), self.basis)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Jet(-self.coeffs, self.basis)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * float(other), self.basis)
        return Jet(self.basis.mul(self.coeffs, self._coerce(other)), self.basis)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = float(other)
            if other == 0.0:
                raise DomainError("division by zero")
            return Jet(self.coeffs / other, self.basis)
        return self * pow_real(other, -1)

    def __rtruediv__(self, other):
        return pow_real(self, -1) * float(other)

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(ln(self) * p)
        return pow_real(self, p)

    def __repr__(self) -> str:
        nz = {mi: round(c, 12) for mi, c in self.as_dict().items() if c != 0.0}
        return f"Jet(nvars={self.nvars}, order={self.order}, {nz})"


# -- constructors -----------------------------------------------------------


def jet_var(i: int, value: float, nvars: int, order: int = 3) -> Jet:
    """Jet of the coordinate function ``u^i`` evaluated at ``value``."""
    if not 0 <= i < nvars:
        raise IndexError(f"variable index {i} out of range for {nvars} variables")
    b = basis(nvars, order)
    c = np.zeros(b.size)
    c[0] = value
    if order >= 1:
        c[1 + i] = 1.0
    return Jet(c, b)


def jet_const(value: float, nvars: int, order: int = 3) -> Jet:
    return Jet.constant(value, nvars, order)


def variables(point: Sequence[float], order: int = 3) -> list[Jet]:
    n = len(point)
    return [jet_var(i, float(x), n, order) for i, x in enumerate(point)]


def value_of(x) -> float:
    return x.value if isinstance(x, Jet) else float(x)


# -- univariate composition ---------------------------------------------------


def _chain(a: Jet, derivs: Sequence[float]) -> Jet:
    """sum_k derivs[k]/k! * (a - a0)^k, the Taylor composition f(a)."""
    h = a.coeffs.copy()
    h[0] = 0.0
    out = np.zeros_like(h)
    out[0] = derivs[0]
    power = h
    for k in range(1, a.order + 1):
        out += (derivs[k] / math.factorial(k)) * power
        if k < a.order:
            power = a.basis.mul(power, h)
    return Jet(out, a.basis)


def exp(x):
    if not isinstance(x, Jet):
        return math.exp(x)
    v = math.exp(x.value)
    return _chain(x, [v] * (x.order + 1))


def ln(x):
    x0 = value_of(x)
    if x0 <= 0.0:
        raise DomainError(f"log of non-positive value {x0!r}")
    if not isinstance(x, Jet):
        return math.log(x0)
    derivs = [math.log(x0)]
    for k in range(1, x.order + 1):
        derivs.append((-1) ** (k - 1) * math.factorial(k - 1) / x0**k)
    return _chain(x, derivs)


log = ln


def sinh(x):
    if not isinstance(x, Jet):
        return math.sinh(x)
    s, c = math.sinh(x.value), math.cosh(x.value)
    return _chain(x, [s if k % 2 == 0 else c for k in range(x.order + 1)])


def cosh(x):
    if not isinstance(x, Jet):
        return math.cosh(x)
    s, c = math.sinh(x.value), math.cosh(x.value)
    return _chain(x, [c if k % 2 == 0 else s for k in range(x.order + 1)])


def pow_real(x, p: float):
    """x**p for real p; non-integer p requires a positive base."""
    p = float(p)
    x0 = value_of(x)
    is_int = p.is_integer()
    if not is_int and x0 <= 0.0:
        raise DomainError(f"non-integer power {p} of non-positive base {x0!r}")
    if x0 == 0.0 and p < 0:
        raise DomainError("negative power of zero")
    if not isinstance(x, Jet):
        return x0**p
    if is_int and p >= 0 and x0 == 0.0:
        # exact polynomial: avoid 0**negative in the derivative list
        out = jet_const(1.0, x.nvars, x.order)
        for _ in range(int(p)):
            out = out * x
        return out
    derivs = []
    coef = 1.0
    for k in range(x.order + 1):
        # coef vanishes past k = p for integer p; skip the (possibly huge) power
        derivs.append(coef * x0 ** (p - k) if coef != 0.0 else 0.0)
        coef *= p - k
    return _chain(x, derivs)


def sqrt(x):
    return pow_real(x, 0.5)


_OPS: dict[str, Callable] = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "pow_real": pow_real,
    "exp": exp,
    "ln": ln,
    "sinh": sinh,
    "cosh": cosh,
    "sqrt": sqrt,
}


def jet_apply(op: str, *args):
    """Apply a named elementary operation to jets (or floats)."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None
    return fn(*args)


def extract_partial(j: Jet, multi_index: Sequence[int]) -> float:
    return j.partial(multi_index)


def compose(outer: Jet, inners: Sequence[Jet]) -> Jet:
    """Substitute jets into a Taylor polynomial.

    ``outer`` is the expansion of g about a point p (in ``outer.nvars`` variables);
    ``inners[k]`` are jets whose values equal p[k].  Returns the jet of
    g(inner_1, ..., inner_m), truncated to the inners' order.
    """
    if len(inners) != outer.nvars:
        raise ValueError("compose: need one inner jet per outer variable")
    b = inners[0].basis
    hs = []
    for jet in inners:
        if jet.basis is not b:
            raise ValueError("compose: inner jets must share a basis")
        h = jet.coeffs.copy()
        h[0] = 0.0
        hs.append(h)
    return Jet(_compose_coeffs(outer, hs, b), b)


def _compose_coeffs(outer: Jet, hs: list[np.ndarray], b: _Basis) -> np.ndarray:
    one = np.zeros(b.size)
    one[0] = 1.0
    max_pow = min(outer.order, b.order)
    powers = []
    for h in hs:
        row = [one, h]
        for _ in range(2, max_pow + 1):
            row.append(b.mul(row[-1], h))
        powers.append(row)
    out = np.zeros(b.size)
    monomials: dict[tuple[int, ...], np.ndarray] = {}
    for mi, c in zip(outer.basis.multi_indices, outer.coeffs):
        if c == 0.0 or sum(mi) > b.order:
            continue
        mono = monomials.get(mi)
        if mono is None:
            mono = one
            for var, a in enumerate(mi):
                if a:
                    mono = powers[var][a] if mono is one else b.mul(mono, powers[var][a])
            monomials[mi] = mono
        out += c * mono
    return out


def compose_many(outers: Sequence[Jet], inners: Sequence[Jet]) -> list[Jet]:
    """:func:`compose` for several outer polynomials sharing the same inners."""
    if not outers:
        return []
    b = inners[0].basis
    hs = []
    for jet in inners:
        h = jet.coeffs.copy()
        h[0] = 0.0
        hs.append(h)
    return [Jet(_compose_coeffs(o, hs, b), b) for o in outers]


# -- finite-difference oracle -------------------------------------------------

_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


@dataclass(frozen=True)
class FdOracle:
    """Central differences with one Richardson extrapolation level.

    ``step`` is used as-is for first derivatives; a derivative of total order
    k uses ``step ** (2/(k+1))``, which keeps both the O(h^4) truncation error
    and the O(eps/h^k) round-off near 1e-8 for unit-scale functions.
    """

    step: float = 1e-5

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("FdOracle.step must be positive")

    def step_for(self, total_order: int) -> float:
        return self.step if total_order <= 1 else self.step ** (2.0 / (total_order + 1))


def _stencil_estimate(f, point: np.ndarray, mi: Sequence[int], h: float) -> float:
    axes = [(v, _STENCILS[a]) for v, a in enumerate(mi) if a]
    total = 0.0
    for combo in itertools.product(*(st for _, st in axes)):
        x = point.copy()
        w = 1.0
        for (var, _), (off, wt) in zip(axes, combo):
            x[var] += off * h
            w *= wt
        total += w * float(f(x))
    return total / h ** sum(mi)


def fd_check(f, point, multi_index: Sequence[int], oracle: FdOracle | None = None) -> float:
    """Finite-difference estimate of the partial ``multi_index`` of ``f`` at ``point``.

    ``f`` takes a 1-d float array; used only as a test oracle.
    """
    oracle = oracle or FdOracle()
    mi = tuple(int(a) for a in multi_index)
    k = sum(mi)
    if k > 3:
        raise OrderExceeded("fd_check supports total order <= 3")
    x0 = np.asarray(point, dtype=float)
    if k == 0:
        return float(f(x0))
    h = oracle.step_for(k)
    try:
        coarse = _stencil_estimate(f, x0, mi, h)
        fine = _stencil_estimate(f, x0, mi, h / 2)
    except (ValueError, ArithmeticError) as exc:
        raise DomainError(f"stencil left the domain of f near {x0}: {exc}") from exc
    return (4.0 * fine - coarse) / 3.0


def derivative_arrays(jets, upto: int = 2):
    """Values, gradients and Hessians of an array of jets sharing one basis.

    Returns ``(val, d1, d2)`` with ``d1[..., k] = d/du^k`` and
    ``d2[..., k, l] = d^2/du^k du^l``; ``d2`` is ``None`` when ``upto < 2``.
    """
    arr = np.asarray(jets, dtype=object)
    flat = arr.ravel()
    b = flat[0].basis
    coeffs = np.stack([j.coeffs for j in flat]).reshape(arr.shape + (b.size,))
    n = b.nvars
    val = coeffs[..., 0]
    d1 = coeffs[..., 1 : n + 1]
    if upto < 2:
        return val, d1, None
    if b.order < 2:
        raise OrderExceeded("second derivatives need order >= 2")
    idx, scale = _hessian_map(n)
    d2 = coeffs[..., idx] * scale
    return val, d1, d2


@lru_cache(maxsize=None)
def _hessian_map(n: int):
    b = basis(n, 2)
    idx = np.empty((n, n), dtype=np.intp)
    scale = np.empty((n, n))
    for k in range(n):
        for l in range(n):
            mi = [0] * n
            mi[k] += 1
            mi[l] += 1
            idx[k, l] = b.index[tuple(mi)]
            scale[k, l] = 2.0 if k == l else 1.0
    return idx, scale
