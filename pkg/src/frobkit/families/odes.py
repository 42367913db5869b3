"""Residuals of the ODEs defining each family, and direct evaluators."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, Optional, Sequence

import numpy as np

from .. import jets
from ..errors import BranchError, DomainError
from ..structures import _z_space_entries
from .types import FamilySpec


def _zjet(z: float, order: int = 3):
    return jets.jet_var(0, float(z), 1, order)


def _d(j, k: int) -> float:
    return j.partial((k,)) if isinstance(j, jets.Jet) else (float(j) if k == 0 else 0.0)


def _residual(terms: Sequence[float], relative: bool) -> float:
    """|sum(terms)|, divided by max(1, max|term|) when ``relative``.

    Near poles the individual terms reach ~1e5 while their sum cancels to
    rounding level, so the absolute sum is not a meaningful zero test there.
    """
    total = abs(float(sum(terms)))
    if not relative:
        return total
    return total / max(1.0, max(abs(float(t)) for t in terms))


def ode_residual_dim3(spec: FamilySpec, z: float, F: Optional[Callable] = None,
                      relative: bool = True) -> tuple[float, float]:
    """Residuals of F2' + z F3' + d F3 = 0 and 2 F3 F3'' - 3 F3'^2 = 0.

    Evaluated on the printed F's (or on ``F``), scaled as in ``_residual``.
    """
    if spec.n != 3:
        raise ValueError(f"{spec.key} is not three-dimensional")
    if spec.kind == "dim3-rational" and abs(z + spec.constants["C3"]) < 1e-12:
        raise DomainError("z = -C3 is a pole of the metric entries")
    F = F or spec.printed_F
    zj = _zjet(z, 2)
    _, F2, F3 = F([zj])
    r1 = _residual([_d(F2, 1), z * _d(F3, 1), spec.d * _d(F3, 0)], relative)
    r2 = _residual([2.0 * _d(F3, 0) * _d(F3, 2), -3.0 * _d(F3, 1) ** 2], relative)
    return r1, r2


def printed_F_defect(spec: FamilySpec, z: Sequence[float]) -> float:
    """max |F_j(printed) - F_j(from f)| at z, including first derivatives."""
    if spec.printed_F is None:
        raise BranchError(f"{spec.key} has no printed F list")
    if spec.n == 2:
        f0 = jets.value_of(spec.f([]))
        from_f = [spec.C1, spec.C2 - (spec.d - 1.0) * f0]
        return float(max(abs(float(a) - b) for a, b in zip(spec.printed_F([]), from_f)))
    z = [float(v) for v in z]
    from_f = _z_space_entries(spec.generating_data(), spec.block, z, 1)
    zv = jets.variables(z, 1) if z else []
    printed = spec.printed_F(zv)
    out = 0.0
    for a, b in zip(printed, from_f):
        ca = a.coeffs if isinstance(a, jets.Jet) else np.array([float(a)] + [0.0] * (b.coeffs.size - 1))
        out = max(out, float(np.max(np.abs(ca - b.coeffs))))
    return out


@dataclass(frozen=True)
class Dim4OdeResiduals:
    eqdiffh: Optional[float] = None
    h1sing: Optional[float] = None
    eqA: Optional[float] = None
    eqB: Optional[float] = None
    eqdipartenza4: Optional[float] = None

    def max(self) -> float:
        vals = [getattr(self, f.name) for f in fields(self)]
        return max(v for v in vals if v is not None)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


def ode_residual_dim4(spec: FamilySpec, z: float, w: float, relative: bool = True) -> Dim4OdeResiduals:
    """Residuals of the equations defining the family's branch, scaled as in ``_residual``."""
    if spec.n != 4:
        raise ValueError(f"{spec.key} is not four-dimensional")
    c = spec.constants
    zw = jets.variables([float(z), float(w)], 3)
    if spec.kind == "dim4-rational":
        A, B = spec.ode["A"], spec.ode["B"]
        if abs(2.0 * B(float(z)) + w) < 1e-12:
            raise DomainError("2B(z) + w = 0 is a pole of f")
    fj = spec.f(zw)
    fw1, fw2, fw3 = fj.partial((0, 1)), fj.partial((0, 2)), fj.partial((0, 3))
    start = _residual([2.0 * fw1 * fw3, -3.0 * fw2**2], relative)
    zj = _zjet(z, 3)
    if spec.kind == "dim4-exp":
        C3, C4 = c["C3"], c["C4"]
        h1 = spec.ode["h1"](zj)
        h2 = spec.ode["h2"](zj)
        # constant h's (e.g. C4 = 0) come back as floats
        r_h = _residual([_d(h2, 3), -2 * C4 * _d(h2, 2), C4**2 * _d(h2, 1), 2 * C3 * C4 * np.exp(C4 * z)], relative)
        r_1 = _residual([_d(h1, 0) * _d(h1, 2), -_d(h1, 1) ** 2], relative)
        return Dim4OdeResiduals(eqdiffh=r_h, h1sing=r_1, eqdipartenza4=start)
    if spec.kind == "dim4-rational":
        K = c["C2"] + (1.0 - spec.d) * c["C3"]
        Aj, Bj = spec.ode["A"](zj), spec.ode["B"](zj)
        a0, a1, a2 = _d(Aj, 0), _d(Aj, 1), _d(Aj, 2)
        b1, b2, b3 = _d(Bj, 1), _d(Bj, 2), _d(Bj, 3)
        rA = _residual([a2 * a0, -(a1**2), 2 * K * a0], relative)
        rB = _residual([a0 * b3, -a1 * (b2 + 1), 2 * K * (b1 + z), c["C1"]], relative)
        return Dim4OdeResiduals(eqA=rA, eqB=rB, eqdipartenza4=start)
    raise BranchError(f"no ODE data for kind {spec.kind}")


def eval_flat_map(spec: FamilySpec, point):
    """Flat coordinates of ``point``: floats in, float array out; jets in, jets out."""
    if spec.flat_map is None:
        raise BranchError(f"{spec.key}: no printed flat coordinates for d={spec.d} and these constants")
    is_jet = any(isinstance(p, jets.Jet) for p in point)
    if jets.value_of(point[1]) == 0.0:
        raise DomainError("u^2 = 0")
    try:
        x = spec.flat_map(list(point))
    except ZeroDivisionError as exc:
        raise DomainError(str(exc)) from exc
    if is_jet:
        return x
    x = np.array([jets.value_of(v) for v in x], dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"flat map is not finite at {list(point)}")
    return x


def eval_prepotential(spec: FamilySpec, x) -> float:
    if spec.prepotential is None:
        raise BranchError(f"{spec.key}: no printed prepotential")
    xf = np.asarray([jets.value_of(v) for v in x], dtype=float)
    if not spec.prepotential.x_accept(xf):
        raise DomainError(f"{spec.key}: x={xf.tolist()} outside the prepotential's domain")
    try:
        return jets.value_of(spec.prepotential(list(xf)))
    except ZeroDivisionError as exc:
        raise DomainError(str(exc)) from exc
