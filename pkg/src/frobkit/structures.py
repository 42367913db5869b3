"""David-Hertling canonical-coordinate data for regular structures.

Coordinates are 0-based in code: ``u[0]`` is u^1, ``u[1]`` is u^2 and so on.
Structure constants are stored as ``c[k, i, j] = c^k_{ij}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import DomainError, SingularMetric
from .jets import Jet

__all__ = [
    "BlockStructure",
    "GeneratingData",
    "ChartFrame",
    "product_constants",
    "l_operator",
    "unit_field",
    "euler_field",
    "z_variables",
    "f_to_metric_entries",
    "assemble_metric",
    "potential_from_f",
    "potential_jet",
    "metric_potential_defects",
    "build_frame",
]


@dataclass(frozen=True)
class BlockStructure:
    """Jordan block sizes (m_1, ..., m_r) of the operator L."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes or any(m < 1 for m in sizes):
            raise ValueError(f"invalid block sizes {sizes}")
        if sum(sizes) < 2:
            raise ValueError("total dimension must be at least 2")
        if sizes[0] < 2:
            raise ValueError("the first Jordan block must have size >= 2")

    @classmethod
    def single(cls, n: int) -> "BlockStructure":
        return cls((n,))

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def r(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        """0-based index of the first coordinate of each block."""
        out, acc = [], 0
        for m in self.sizes:
            out.append(acc)
            acc += m
        return tuple(out)

    def blocks(self):
        """Yield ``(alpha, offset, size)`` for every block."""
        for alpha, (off, m) in enumerate(zip(self.offsets, self.sizes)):
            yield alpha, off, m


def product_constants(bs: BlockStructure) -> np.ndarray:
    n = bs.n
    c = np.zeros((n, n, n))
    for _, off, m in bs.blocks():
        for i in range(m):
            for j in range(m):
                if i + j <= m - 1:  # 1-based: i + j <= m + 1
                    c[off + i + j, off + i, off + j] = 1.0
    return c


def l_operator(bs: BlockStructure, point: Sequence) -> np.ndarray:
    """L = E o, block lower-triangular Toeplitz.  Works on floats or jets."""
    n = bs.n
    if len(point) != n:
        raise ValueError(f"point has {len(point)} entries, expected {n}")
    is_jet = any(isinstance(p, Jet) for p in point)
    L = np.zeros((n, n), dtype=object if is_jet else float)
    if is_jet:
        L[:] = 0.0
    for _, off, m in bs.blocks():
        for i in range(m):
            for j in range(i + 1):
                L[off + i, off + j] = point[off + i - j]
    return L


def unit_field(bs: BlockStructure) -> np.ndarray:
    e = np.zeros(bs.n)
    e[list(bs.offsets)] = 1.0
    return e


def euler_field(point: Sequence[float]) -> np.ndarray:
    return np.array([jets.value_of(p) for p in point], dtype=float)


@dataclass(frozen=True)
class GeneratingData:
    """Generating function f(z^1..z^{n-2}) plus the constants C1, C2 and weight d.

    ``f`` receives a list of jets (or floats) and returns a jet or float.
    """

    f: Callable
    C1: float
    C2: float
    d: float

    def __post_init__(self):
        if self.d != 0 and self.C1 != 0:
            raise ValueError("C1 must vanish when d != 0")


def z_variables(bs: BlockStructure, u: Sequence):
    """z^j = (u^{j+2} - u^1 [j+2 starts a block alpha >= 2]) / u^2."""
    u2 = u[1]
    if jets.value_of(u2) == 0.0:
        raise DomainError("u^2 = 0: z-variables undefined")
    starts = set(bs.offsets[1:])
    out = []
    for k in range(2, bs.n):
        num = u[k] - u[0] if k in starts else u[k]
        out.append(num / u2)
    return out


def _as_jet(x, nvars: int, order: int) -> Jet:
    return x if isinstance(x, Jet) else jets.jet_const(float(x), nvars, order)


def _z_space_entries(gd: GeneratingData, bs: BlockStructure, z0: Sequence[float], order: int):
    """F_1..F_n as Taylor polynomials (order ``order``) about z0 in z-space."""
    m = bs.n - 2
    zv = jets.variables(z0, order + 1)
    fz = _as_jet(gd.f(zv), m, order + 1)
    f_lo = fz.truncate(order)
    grads = [fz.derivative(k) for k in range(m)]
    zlo = [v.truncate(order) for v in zv]
    euler = sum((zlo[k] * grads[k] for k in range(m)), jets.jet_const(0.0, m, order))
    F = [None] * bs.n
    F[1] = -euler - (gd.d - 1.0) * f_lo + gd.C2
    F[0] = jets.jet_const(gd.C1, m, order)
    for alpha, off, _ in bs.blocks():
        if alpha == 0:
            continue
        # first coordinate of block alpha >= 2 corresponds to z index off - 2
        F[0] = F[0] - grads[off - 2]
    for j in range(2, bs.n):
        if F[j] is None:
            F[j] = grads[j - 2]
    return F


def f_to_metric_entries(gd: GeneratingData, bs: BlockStructure, point, order: int = 3) -> list:
    """F_1, ..., F_n as jets in the DH coordinates.

    ``point`` is either a sequence of floats (jets of ``order`` are seeded) or
    a sequence of u-jets.  For n = 2 the generating function takes no argument.
    """
    u = _seed(point, order)
    nvars, ord_ = u[0].nvars, u[0].order
    if bs.n == 2:
        f0 = jets.value_of(gd.f([]))
        return [
            jets.jet_const(gd.C1, nvars, ord_),
            jets.jet_const(gd.C2 - (gd.d - 1.0) * f0, nvars, ord_),
        ]
    z = z_variables(bs, u)
    z0 = [zz.value for zz in z]
    Fz = _z_space_entries(gd, bs, z0, ord_)
    return jets.compose_many(Fz, z)


def _seed(point, order: int) -> list[Jet]:
    if all(isinstance(p, Jet) for p in point):
        return list(point)
    return jets.variables([float(p) for p in point], order)


def _weight_factor(u2, d: float):
    if jets.value_of(u2) <= 0.0 and not float(d).is_integer():
        raise DomainError("(u^2)^(-d) needs u^2 > 0 for non-integer d")
    if jets.value_of(u2) == 0.0:
        raise DomainError("u^2 = 0")
    return jets.pow_real(u2, -d)


def assemble_metric(bs: BlockStructure, Fs: Sequence, d: float, point) -> np.ndarray:
    """eta_{i(a) j(b)} = delta_ab (u^2)^(-d) F_{(i+j-1)(a)} as an object array of jets."""
    u2 = point[1]
    w = _weight_factor(u2, d)
    bar = [w * F for F in Fs]
    n = bs.n
    zero = bar[0] * 0.0
    eta = np.empty((n, n), dtype=object)
    eta[:] = zero
    for _, off, m in bs.blocks():
        for i in range(m):
            for j in range(m):
                if i + j <= m - 1:
                    eta[off + i, off + j] = bar[off + i + j]
    return eta


def _phi(u2, d: float):
    if d == 1.0:
        return jets.ln(u2)
    return jets.pow_real(u2, 1.0 - d) / (1.0 - d)


def potential_jet(gd: GeneratingData, bs: BlockStructure, point, order: int = 4):
    """H = (u^2)^(1-d) f + C2 phi(u^2) + C1 u^1 as a jet (or float for float input with order=None)."""
    u = _seed(point, order) if order is not None else list(point)
    u2 = u[1]
    if jets.value_of(u2) <= 0.0:
        raise DomainError("metric potential needs u^2 > 0")
    if bs.n == 2:
        f = gd.f([])
    else:
        f = gd.f(z_variables(bs, u))
    return jets.pow_real(u2, 1.0 - gd.d) * f + gd.C2 * _phi(u2, gd.d) + gd.C1 * u[0]


def potential_from_f(gd: GeneratingData, point, bs: BlockStructure | None = None) -> float:
    bs = bs or BlockStructure.single(len(point))
    return float(jets.value_of(potential_jet(gd, bs, [float(p) for p in point], order=None)))


def metric_potential_defects(gd: GeneratingData, bs: BlockStructure, point, order: int = 3):
    """(potential defect, closedness defect) at a point.

    The first is max |d_i H - eta_bar_i| over value and derivatives through
    ``order``, relative to max(1, |eta_bar|); the second is
    max |d_j eta_bar_i - d_i eta_bar_j| over the first-derivative coefficients.
    """
    H = potential_jet(gd, bs, point, order + 1)
    Fs = f_to_metric_entries(gd, bs, point, order)
    u = jets.variables([float(p) for p in point], order)
    w = _weight_factor(u[1], gd.d)
    bar = [w * F for F in Fs]
    pot = 0.0
    for i in range(bs.n):
        dH = H.derivative(i)
        scale = max(1.0, float(np.max(np.abs(bar[i].coeffs))))
        pot = max(pot, float(np.max(np.abs(dH.coeffs - bar[i].coeffs))) / scale)
    grad = np.array([b.gradient() for b in bar])
    closed = float(np.max(np.abs(grad - grad.T)))
    return pot, closed


@dataclass
class ChartFrame:
    """Tensors of a structure at one point of the DH chart."""

    point: np.ndarray
    d: float
    metric: np.ndarray
    metric_inv: np.ndarray
    dmetric: np.ndarray  # [i, j, k] = d_k eta_ij
    d2metric: np.ndarray  # [i, j, k, l] = d_k d_l eta_ij
    c: np.ndarray  # [k, i, j] = c^k_ij
    L: np.ndarray
    e: np.ndarray
    E: np.ndarray
    block: BlockStructure = field(default=None)
    metric_jets: np.ndarray | None = field(default=None, repr=False)


def checked_inverse(g: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(g))) ** g.shape[0]
    if scale == 0.0 or abs(np.linalg.det(g)) < 1e-12 * scale:
        raise SingularMetric(f"metric is singular (det={np.linalg.det(g):.3e})")
    return np.linalg.inv(g)


def frame_from_metric(bs: BlockStructure, d: float, point, eta_jets: np.ndarray) -> ChartFrame:
    val, d1, d2 = jets.derivative_arrays(eta_jets, upto=2)
    pt = np.array([jets.value_of(p) for p in point], dtype=float)
    return ChartFrame(
        point=pt,
        d=float(d),
        metric=val,
        metric_inv=checked_inverse(val),
        dmetric=d1,
        d2metric=d2,
        c=product_constants(bs),
        L=l_operator(bs, pt),
        e=unit_field(bs),
        E=euler_field(pt),
        block=bs,
        metric_jets=eta_jets,
    )


def build_frame(gd: GeneratingData, bs: BlockStructure, point, order: int = 3) -> ChartFrame:
    if order < 2:
        raise ValueError("curvature needs jets of order >= 2")
    u = jets.variables([float(p) for p in point], order)
    Fs = f_to_metric_entries(gd, bs, u)
    eta = assemble_metric(bs, Fs, gd.d, u)
    return frame_from_metric(bs, gd.d, u, eta)
