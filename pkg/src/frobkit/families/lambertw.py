"""Principal branch of the Lambert W function, for floats and jets."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import jets
from ..errors import DomainError, NoConvergence
from ..jets import Jet

BRANCH_POINT = -math.exp(-1.0)


@dataclass(frozen=True)
class LambertWConfig:
    max_iter: int = 50
    tol: float = 1e-14

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def _initial_guess(x: float) -> float:
    if x < -0.25:
        # branch-point series in p = sqrt(2(e x + 1))
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    return math.log1p(x)


def _lambert_w_float(x: float, cfg: LambertWConfig) -> float:
    if math.isnan(x):
        raise DomainError("lambert_w(nan)")
    if x < BRANCH_POINT:
        # tolerate the rounding of -1/e itself
        if x > BRANCH_POINT * (1 + 4e-16):
            return -1.0
        raise DomainError(f"lambert_w is real only for x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    w = _initial_guess(x)
    if w == -1.0:
        return w
    best, best_res = w, math.inf
    for _ in range(cfg.max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) < best_res:
            best, best_res = w, abs(f)
        # near -1/e w is only determined to ~sqrt(eps); stop on the residual
        if abs(f) <= 4e-16 * max(1.0, abs(x)):
            return w
        fp = ew * (w + 1.0)
        if fp == 0.0:
            return w
        step = f / (fp - (w + 2.0) * f / (2.0 * w + 2.0))
        w_new = w - step
        if abs(w_new - w) <= cfg.tol * (1.0 + abs(w_new)):
            return w_new
        w = w_new
    if best_res <= 1e-12 * max(1.0, abs(x)):
        return best
    raise NoConvergence(f"lambert_w({x!r}) did not converge in {cfg.max_iter} iterations")


def lambert_w(x, cfg: LambertWConfig | None = None):
    """W(x) on the principal branch; jets are propagated by Newton iteration."""
    cfg = cfg or LambertWConfig()
    if not isinstance(x, Jet):
        return _lambert_w_float(float(x), cfg)
    w0 = _lambert_w_float(x.value, cfg)
    if w0 == -1.0:
        raise DomainError("lambert_w is not differentiable at -1/e")
    w = jets.jet_const(w0, x.nvars, x.order)
    # each Newton step doubles the number of exact Taylor orders
    for _ in range(max(1, math.ceil(math.log2(x.order + 1))) + 1):
        ew = jets.exp(w)
        w = w - (w * ew - x) / ((w + 1.0) * ew)
    return w
