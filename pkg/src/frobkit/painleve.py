"""Rotation coefficients of 3d semisimple structures and the sigma form of Painleve VI.

The reduced system for (F12, F13, F23) in z = (u3 - u1)/(u2 - u1) is
integrated with fixed-step RK4; sigma is reconstructed algebraically from the
solution and tested against the sigma-PVI equation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import CoincidentCoordinates, DomainError, SingularPoint, StepTooLarge
from .jets import Jet

SINGULAR = (0.0, 1.0)
MARGIN = 0.05
DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class PainleveState:
    z: float
    F12: float
    F13: float
    F23: float

    @property
    def F(self) -> np.ndarray:
        return np.array([self.F12, self.F13, self.F23])

    @property
    def I(self) -> float:
        return self.F12**2 + self.F13**2 + self.F23**2

    @classmethod
    def from_seq(cls, s: Sequence[float]) -> "PainleveState":
        z, a, b, c = (float(v) for v in s)
        return cls(z, a, b, c)


def _check_z(z: float, margin: float = 0.0):
    for s in SINGULAR:
        if abs(z - s) <= margin:
            raise SingularPoint(f"z = {z} is within {margin} of the singular point {s}")


def _rhs(z, F12, F13, F23):
    # works for floats and jets alike
    return (F13 * F23 / (z * (z - 1.0)), -F12 * F23 / (z - 1.0), F12 * F13 / z)


def ode_rhs(s: PainleveState) -> tuple[float, float, float]:
    _check_z(s.z)
    return _rhs(s.z, s.F12, s.F13, s.F23)


def _rk4_step(z: float, y: np.ndarray, h: float) -> np.ndarray:
    f = lambda zz, yy: np.array(_rhs(zz, *yy))
    k1 = f(z, y)
    k2 = f(z + h / 2, y + h / 2 * k1)
    k3 = f(z + h / 2, y + h / 2 * k2)
    k4 = f(z + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class Trajectory:
    z: np.ndarray
    F: np.ndarray  # shape (N, 3)
    R2: float
    step: float

    @property
    def states(self) -> list[PainleveState]:
        return [PainleveState(float(z), *map(float, f)) for z, f in zip(self.z, self.F)]

    @property
    def I(self) -> np.ndarray:
        return np.sum(self.F**2, axis=1)

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.I - self.R2)))

    def __len__(self) -> int:
        return len(self.z)


def _segment_ok(z0: float, z1: float):
    lo, hi = min(z0, z1), max(z0, z1)
    for s in SINGULAR:
        if lo - MARGIN <= s <= hi + MARGIN:
            raise SingularPoint(f"[{z0}, {z1}] passes within {MARGIN} of the singular point {s}")


def integrate(s0: PainleveState, z_end: float, step: float, drift_limit: float = DRIFT_LIMIT) -> Trajectory:
    """Fixed-step RK4 from s0.z to z_end; the step is shrunk to divide the interval evenly."""
    if not step > 0:
        raise ValueError("step must be positive")
    _segment_ok(s0.z, z_end)
    span = z_end - s0.z
    n = max(1, math.ceil(abs(span) / step - 1e-9)) if span != 0 else 0
    h = span / n if n else 0.0
    zs = s0.z + h * np.arange(n + 1)
    if n:
        zs[-1] = z_end
    F = np.empty((n + 1, 3))
    F[0] = s0.F
    y = s0.F.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            y = _rk4_step(zs[k], y, h)
            F[k + 1] = y
    t = Trajectory(zs, F, s0.I, abs(h))
    if not t.drift <= drift_limit:  # NaN after blow-up counts as too large
        raise StepTooLarge(f"first-integral drift {t.drift:.3e} exceeds {drift_limit:.1e}; reduce the step")
    return t


@dataclass(frozen=True)
class SigmaPoint:
    z: float
    sigma: float
    dsigma: float
    d2sigma: float
    consistency: float


def sigma_from_state(z: float, F12: float, F13: float, F23: float, R2: float) -> SigmaPoint:
    ds = F12**2
    sigma = F13**2 + z * ds - R2 / 2
    d2s = 2 * F12 * F13 * F23 / (z * (z - 1))
    cons = abs(-sigma + (z - 1) * ds + R2 / 2 - F23**2)
    return SigmaPoint(z, sigma, ds, d2s, cons)


def sigma_eval(t: Trajectory) -> list[SigmaPoint]:
    return [sigma_from_state(float(z), *map(float, f), t.R2) for z, f in zip(t.z, t.F)]


def sigma_pvi_residual(z: float, sigma: float, ds: float, d2s: float, R2: float) -> float:
    """|LHS - RHS| of the sigma form; R2 is R^2 (the first integral)."""
    a = z * ds - sigma
    lhs = z**2 * (z - 1) ** 2 * d2s**2 + 4 * (ds * a**2 - ds**2 * a)
    rhs = -2 * R2 * ds**2 + R2**2 * ds
    return abs(lhs - rhs)


def sigma_residuals(t: Trajectory) -> np.ndarray:
    return np.array([sigma_pvi_residual(p.z, p.sigma, p.dsigma, p.d2sigma, t.R2) for p in sigma_eval(t)])


# ------------------------------------------------------ rotation coefficients


def _antiderivative(j: Jet) -> Jet:
    """Univariate jet with coefficients shifted up one degree (top term dropped)."""
    c = np.zeros_like(j.coeffs)
    k = np.arange(1, len(c))
    c[1:] = j.coeffs[:-1] / k
    return Jet(c, j.basis)


class SolutionFunction:
    """F(z) from a trajectory, accepting floats or jets.

    Values come from one short RK4 step off the nearest grid point; jets are
    filled by Picard iteration on the Taylor series about that value, which
    gains one exact order per sweep, then composed with the argument jet.
    """

    def __init__(self, t: Trajectory):
        self.t = t
        self.lo, self.hi = float(np.min(t.z)), float(np.max(t.z))

    def values(self, z: float) -> np.ndarray:
        if not self.lo - 1e-12 <= z <= self.hi + 1e-12:
            raise DomainError(f"z = {z} outside the trajectory range [{self.lo}, {self.hi}]")
        k = int(np.argmin(np.abs(self.t.z - z)))
        h = z - float(self.t.z[k])
        y = self.t.F[k]
        return y if h == 0.0 else _rk4_step(float(self.t.z[k]), y, h)

    def taylor(self, z0: float, order: int) -> list[Jet]:
        y0 = self.values(z0)
        zeta = jets.jet_var(0, 0.0, 1, order)
        Y = [jets.jet_const(float(v), 1, order) for v in y0]
        for _ in range(order):
            rhs = _rhs(z0 + zeta, *Y)
            Y = [y0[i] + _antiderivative(rhs[i]) for i in range(3)]
        return Y

    def __call__(self, z):
        if not isinstance(z, Jet):
            return self.values(float(z))
        z0 = z.value
        series = self.taylor(z0, z.order)
        shift = z - z0
        return jets.compose_many(series, [shift])


def z_of_u(u: Sequence):
    u1, u2, u3 = u
    for a, b in ((u1, u2), (u1, u3), (u2, u3)):
        if jets.value_of(a) == jets.value_of(b):
            raise CoincidentCoordinates(f"u has coincident entries {[jets.value_of(v) for v in u]}")
    return (u3 - u1) / (u2 - u1)


def beta_from_F(F: Callable, u: Sequence) -> np.ndarray:
    """Rotation coefficients beta_ij(u) from F(z) -> (F12, F13, F23); symmetric, zero diagonal."""
    z = z_of_u(u)
    F12, F13, F23 = F(z)
    u1, u2, u3 = u
    b12 = F12 / (u2 - u1)
    b13 = F13 / (u3 - u1)
    b23 = F23 / (u3 - u2)
    is_jet = isinstance(z, Jet)
    B = np.empty((3, 3), dtype=object if is_jet else float)
    zero = b12 * 0.0
    B[:] = zero
    B[0, 1] = B[1, 0] = b12
    B[0, 2] = B[2, 0] = b13
    B[1, 2] = B[2, 1] = b23
    return B


def darboux_egorov_residual(beta_field: Callable, u: Sequence[float]) -> tuple[float, float, float]:
    """Max residuals of d_k b_ij = b_ik b_kj, e(b_ij) = 0 and E(b_ij) = -b_ij."""
    u = [float(v) for v in u]
    z_of_u(u)
    uj = jets.variables(u, 1)
    B = beta_field(uj)
    val = np.array([[jets.value_of(B[i, j]) for j in range(3)] for i in range(3)])
    grad = np.array([[B[i, j].gradient() if isinstance(B[i, j], Jet) else np.zeros(3) for j in range(3)]
                     for i in range(3)])
    r1 = r2 = r3 = 0.0
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            for k in range(3):
                if k not in (i, j):
                    r1 = max(r1, abs(grad[i, j, k] - val[i, k] * val[k, j]))
            r2 = max(r2, abs(grad[i, j].sum()))
            r3 = max(r3, abs(float(np.dot(u, grad[i, j])) + val[i, j]))
    return float(r1), float(r2), float(r3)


def write_csv(t: Trajectory, path) -> None:
    rows = sigma_eval(t)
    res = sigma_residuals(t)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "F12", "F13", "F23", "sigma", "residual"])
        for (z, f), p, r in zip(zip(t.z, t.F), rows, res):
            w.writerow([repr(float(z)), *(repr(float(v)) for v in f), repr(p.sigma), repr(float(r))])
