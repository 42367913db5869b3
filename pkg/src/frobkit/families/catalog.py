"""Closed-form structures with a single Jordan block in dimensions 2, 3 and 4.

Constants are stored under their printed names.  Two conventions differ from
a literal reading of the formulas and are applied here, once:

* In dimension 3 the printed F_2 drops the ``-(d-1) * const`` contribution of
  the additive constant in f; the toolkit C2 is therefore
  ``C2 + (d-1) * const`` so that the metric entries match the printed F's.
  In dimension 2 (f = C3) the same absorption applies.
* For the rational 3d family f is taken as ``-C4/(z+C3) + C5`` so that
  F_3 = f' equals the printed C4/(z+C3)^2.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

from ..errors import BranchError, DomainError
from ..jets import cosh, exp, ln, pow_real, sinh, sqrt, value_of
from .lambertw import BRANCH_POINT, lambert_w
from .types import Domain, FamilySpec, FlatMap, Prepotential

ETA_TOL = 1e-12
UNIT = {n: np.eye(n)[0] for n in (2, 3, 4)}
# keep sampled points away from poles of the metric entries
POLE_MARGIN = 0.25
F4_MARGIN = 0.05


def _is(d: float, value: float) -> bool:
    return abs(d - value) < 1e-12


def _box(n: int, u3=(-1.0, 1.0), u4=(-1.0, 1.0)) -> tuple[tuple, tuple]:
    lo = [-1.0, 0.5, u3[0], u4[0]][:n]
    hi = [1.0, 2.0, u3[1], u4[1]][:n]
    return tuple(lo), tuple(hi)


def _flat_accept(fm: FlatMap | None, prep: Prepotential | None, base=None):
    """Point predicate: base locus test, then the prepotential's x-domain."""

    def accept(u):
        if base is not None and not base(u):
            return False
        if prep is not None and fm is not None:
            x = np.array([value_of(v) for v in fm(list(u))])
            if not np.all(np.isfinite(x)):
                return False
            return bool(prep.x_accept(x))
        return True

    return accept


# ---------------------------------------------------------------- dimension 2


def dim2_flat_map(d: float, C1: float, C2: float) -> FlatMap:
    eta = np.array([[C1, C2], [C2, 0.0]])
    if _is(d, 0.0):
        return FlatMap(lambda u: [u[0], u[1]], "d=0", eta, lambda x: np.array([x[0], x[1]]), UNIT[2])
    if _is(d, 1.0):
        return FlatMap(lambda u: [u[0], ln(u[1])], "d=1", eta, lambda x: np.array([x[0], 1.0]), UNIT[2])
    return FlatMap(
        lambda u: [u[0], pow_real(u[1], 1.0 - d) / (1.0 - d)],
        "d!=0,1",
        eta,
        lambda x: np.array([x[0], (1.0 - d) * x[1]]),
        UNIT[2],
    )


def make_dim2(d: float, C1: float, C2: float, C3: float, variant: str = "") -> FamilySpec:
    fm = dim2_flat_map(d, C1, C2)
    prep = Prepotential(
        lambda x: C1 / 6.0 * x[0] ** 3 + C2 / 2.0 * x[0] ** 2 * x[1], eta=fm.eta
    )
    return FamilySpec(
        id="dim2",
        variant=variant,
        n=2,
        d=d,
        constants={"C1": C1, "C2": C2, "C3": C3},
        C1=C1,
        C2=C2 + (d - 1.0) * C3,
        f=lambda z: C3,
        domain=Domain(*_box(2)),
        kind="dim2",
        printed_F=lambda z: [C1, C2],
        flat_map=fm,
        prepotential=prep,
    )


# ------------------------------------------------------- dimension 3, linear


def dim3_linear_flat_map(d: float, C2: float, C3: float) -> FlatMap:
    if _is(d, 0.0):
        return FlatMap(lambda u: [u[0], u[1], u[2]], "d=0")
    if _is(d, 1.0):
        return FlatMap(lambda u: [u[0], u[2] / u[1] + C2 / C3 * ln(u[1]), 2.0 * sqrt(u[1])], "d=1")
    if _is(d, 2.0):
        return FlatMap(lambda u: [u[0], u[2] / u[1] ** 2 - C2 / (C3 * u[1]), ln(u[1])], "d=2")
    return FlatMap(
        lambda u: [
            u[0],
            pow_real(u[1], -d) * u[2] + C2 * pow_real(u[1], 1.0 - d) / (C3 * (1.0 - d)),
            2.0 / (2.0 - d) * pow_real(u[1], (2.0 - d) / 2.0),
        ],
        "d not in {0,1,2}",
    )


def make_dim3_linear(d: float, C1: float, C2: float, C3: float, C4: float, variant: str = "") -> FamilySpec:
    fm = dim3_linear_flat_map(d, C2, C3)
    if _is(d, 0.0):
        F = lambda x: (C1 / 6.0 * x[0] ** 3 + C2 / 2.0 * x[0] ** 2 * x[1]
                       + C3 / 2.0 * x[0] ** 2 * x[2] + C3 / 2.0 * x[0] * x[1] ** 2)
    else:
        F = lambda x: C3 / 2.0 * x[0] ** 2 * x[1] + C3 / 2.0 * x[0] * x[2] ** 2
    return FamilySpec(
        id="dim3-linear",
        variant=variant,
        n=3,
        d=d,
        constants={"C1": C1, "C2": C2, "C3": C3, "C4": C4},
        C1=C1,
        C2=C2 + (d - 1.0) * C4,
        f=lambda z: C3 * z[0] + C4,
        domain=Domain(*_box(3)),
        kind="dim3-linear",
        printed_F=lambda z: [C1 + 0.0 * z[0], -C3 * d * z[0] + C2, C3 + 0.0 * z[0]],
        flat_map=fm,
        prepotential=Prepotential(F),
    )


# ----------------------------------------------------- dimension 3, rational


def dim3_rational_flat_map(d: float, C1: float, C2: float, C3: float, C4: float, verbatim: bool = False) -> FlatMap:
    """Select the printed branch for (d, C1, C3).

    ``verbatim`` only affects the d not in {0,1,2}, C3 != 0 branch, whose
    printed x^1 is not a flat coordinate; the default uses the corrected form.
    """
    if _is(d, 0.0):
        if C1 != 0.0 and not _is(C1, C4):
            if C1 * C4 <= 0.0:
                raise BranchError("sqrt(C1*C4) is not real; the complex branch is not implemented")
            r = math.sqrt(C1 * C4)

            def b1(u):
                u1, u2, u3 = u
                D = C3 * u2 + u3
                x1 = (C1 * C3 * u1 * u2 + C2 * C3 * u2**2 + C1 * u1 * u3 + C2 * u2 * u3 - C4 * u2**2) / (C1 * D)
                x2 = ((-C2 * C3 * r - C4 * (C1 - C4 + C2 * C3)) * pow_real(u2, (2 * C4 - r) / C4)
                      - C2 * u3 * pow_real(u2, (C4 - r) / C4) * (C4 + r)) / (C4 * (C1 - C4) * D)
                x3 = ((C2 * C3 * r - C4 * (C1 - C4 + C2 * C3)) * pow_real(u2, (2 * C4 + r) / C4)
                      - C2 * u3 * pow_real(u2, (C4 + r) / C4) * (C4 - r)) / (C4 * (C1 - C4) * D)
                return [x1, x2, x3]

            return FlatMap(b1, "d=0, C1!=0, C1!=C4")
        if C1 == 0.0:

            def b2(u):
                u1, u2, u3 = u
                D = C3 * u2 + u3
                L = ln(u2)
                return [
                    u1 + u2**2 * L**2 / (2 * D) + C2 * u2 * (2 * L - L**2 - 2) / (2 * C4),
                    -(u2**2) * L / D + C2 * u2 * (L - 1) / C4,
                    -(u2**2) / D + C2 * u2 / C4,
                ]

            return FlatMap(b2, "d=0, C1=0")

        def b3(u):
            u1, u2, u3 = u
            D = C3 * u2 + u3
            return [u1 - u2**2 / D + C2 * u2 / C4, -(u2**3) / (2 * D) + C2 * u2**2 / (4 * C4), -u2 / D + C2 * ln(u2) / C4]

        return FlatMap(b3, "d=0, C1=C4")
    if _is(d, 1.0):

        def b6(u):
            u1, u2, u3 = u
            D = C3 * u2 + u3
            return [u1 + 2 * u2**2 / D - 2 * C2 * u2 / C4, -u2 / D + C2 * ln(u2) / C4,
                    -pow_real(u2, 1.5) / D + 2 * C2 * sqrt(u2) / C4]

        return FlatMap(b6, "d=1")
    if _is(d, 2.0):

        def b7(u):
            u1, u2, u3 = u
            D = C3 * u2 + u3
            return [u1 + u2**2 / (2 * D) - C2 * u2 / (2 * C4), -u2 / D + C2 * ln(u2) / C4, -1 / D - C2 / (C4 * u2)]

        return FlatMap(b7, "d=2")
    if C3 != 0.0:

        def b4(u):
            u1, u2, u3 = u
            D = C3 * u2 + u3
            # printed last numerator term 2*C2*(u3)^2 replaced by -2*C2*C3*u2*u3
            last = 2 * C2 * u3**2 if verbatim else -2 * C2 * C3 * u2 * u3
            x1 = ((C4 * u1 * d**2 - 2 * C2 * u2) * u2 * C3**2 + (u1 * u3 * d**2 + 2 * u2**2) * C3 * C4 + last) / (
                C3 * C4 * d**2 * D)
            x2 = ((C2 * C3 - C4 * (1 - d)) * pow_real(u2, 2 - d) + C2 * u3 * pow_real(u2, 1 - d)) / (C4 * (1 - d) * D)
            x3 = (2 * C2 * u3 * pow_real(u2, (2 - d) / 2) - (C4 * (2 - d) - 2 * C2 * C3) * pow_real(u2, (4 - d) / 2)) / (
                C4 * (2 - d) * D)
            return [x1, x2, x3]

        return FlatMap(b4, "d not in {0,1,2}, C3!=0", note="" if verbatim else "x^1 corrected")

    def b5(u):
        u1, u2, u3 = u
        x1 = ((C4 * d**2 * u1 - 2 * C2 * u2) * u3 + 2 * C4 * u2**2) / (C4 * d**2 * u3)
        x2 = (2 * C2 * u3 * pow_real(u2, (2 - d) / 2) - C4 * (2 - d) * pow_real(u2, (4 - d) / 2)) / (C4 * (2 - d) * u3)
        x3 = (C2 * u3 * pow_real(u2, 1 - d) - C4 * (1 - d) * pow_real(u2, 2 - d)) / (C4 * (1 - d) * u3)
        return [x1, x2, x3]

    return FlatMap(b5, "d not in {0,1,2}, C3=0")


def _rational_base(C3: float):
    return lambda u: abs(u[2] / u[1] + C3) >= POLE_MARGIN


def make_dim3_rational(d, C1, C2, C3, C4, C5=0.0, variant="", family_id="dim3-rational",
                       flat_map: FlatMap | None = None, prepotential: Prepotential | None = None,
                       u3=(-2.0, 2.0), base=None) -> FamilySpec:
    if C4 == 0.0:
        raise ValueError("C4 = 0 degenerates to the linear family")
    fm = flat_map if flat_map is not None else dim3_rational_flat_map(d, C1, C2, C3, C4)
    base = base or _rational_base(C3)
    return FamilySpec(
        id=family_id,
        variant=variant,
        n=3,
        d=d,
        constants={"C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5},
        C1=C1,
        C2=C2 + (d - 1.0) * C5,
        f=lambda z: -C4 / (z[0] + C3) + C5,
        domain=Domain(*_box(3, u3=u3), accept=_flat_accept(fm, prepotential, base),
                      excluded=f"|u3/u2 + C3| < {POLE_MARGIN}"),
        kind="dim3-rational",
        printed_F=lambda z: [
            C1 + 0.0 * z[0],
            C3 * C4 / (z[0] + C3) ** 2 - (2.0 - d) * C4 / (z[0] + C3) + C2,
            C4 / (z[0] + C3) ** 2,
        ],
        flat_map=fm,
        prepotential=prepotential,
        notes=(fm.note,) if fm.note else (),
    )


def _example_d0(C3: float, C4: float) -> FamilySpec:
    fm = dim3_rational_flat_map(0.0, C4, 0.0, C3, C4)
    fm = FlatMap(fm.func, fm.branch, np.array([[C4, 0, 0], [0, 0, -C4], [0, -C4, 0]], dtype=float),
                 lambda x: np.array([x[0], 2.0 * x[1], 0.0]), UNIT[3])
    prep = Prepotential(
        lambda x: (2.0 * math.sqrt(2.0) / 3.0 * C4 * pow_real(x[1], 1.5) * pow_real(x[2], 1.5)
                   + C4 / 6.0 * x[0] ** 3 - C4 * x[0] * x[1] * x[2]),
        x_accept=lambda x: x[1] > 0.1 and x[2] > 0.1,
        eta=fm.eta,
        note="real slice x^2, x^3 > 0",
    )
    # x^2, x^3 > 0 needs C3 u2 + u3 < 0
    return make_dim3_rational(0.0, C4, 0.0, C3, C4, variant="", family_id="dim3-example-d0",
                              flat_map=fm, prepotential=prep, u3=(-3.0, 1.0),
                              base=lambda u: C3 * u[1] + u[2] <= -POLE_MARGIN * u[1])


def _example_d2(C2: float, C3: float, C4: float) -> FamilySpec:
    fm = dim3_rational_flat_map(2.0, 0.0, C2, C3, C4)
    eta = np.array([[0, 0, C4], [0, C4, 0], [C4, 0, 0]], dtype=float)
    if C2 == 0.0:
        E = lambda x: np.array([x[0], 0.0, -x[2]])
        prep = Prepotential(
            lambda x: C4 / 2.0 * x[0] ** 2 * x[2] + C4 / 2.0 * x[0] * x[1] ** 2 + C4 / 8.0 * x[1] ** 4 / x[2],
            x_accept=lambda x: abs(x[2]) > 0.1,
            eta=eta,
        )
        fid = "dim3-example-d2-C2zero"
    elif C2 == 1.0:
        E = lambda x: np.array([x[0], 1.0 / C4, -x[2]])

        def F(x):
            W = lambert_w(C4 * x[2] * exp(C4 * x[1] - 1.0))
            return ((3 * W**4 + 22 * W**3 + 63 * W**2 + 72 * W) / (24.0 * C4**3 * x[2])
                    + C4 / 2.0 * x[0] ** 2 * x[2] + C4 / 2.0 * x[0] * x[1] ** 2)

        def x_ok(x):
            arg = C4 * x[2] * math.exp(C4 * x[1] - 1.0)
            return abs(x[2]) > 0.1 and arg > BRANCH_POINT + 0.05

        prep = Prepotential(F, x_accept=x_ok, eta=eta, note="principal branch of Lambert W")
        fid = "dim3-example-d2-C2one"
    else:
        raise ValueError("printed d=2 examples have C2 in {0, 1}")
    fm = FlatMap(fm.func, fm.branch, eta, E, UNIT[3])
    return make_dim3_rational(2.0, 0.0, C2, C3, C4, family_id=fid, flat_map=fm, prepotential=prep,
                              u3=(-3.0, 1.0), base=lambda u: C3 * u[1] + u[2] <= -POLE_MARGIN * u[1])


# ------------------------------------------------------- dimension 4, w-linear


def h2_closed_form(C3: float, C4: float, C5: float, C6: float, C7: float) -> Callable:
    if C4 == 0.0:
        return lambda z: C5 * z**2 + C6 * z + C7
    return lambda z: C7 - exp(C4 * z) / C4**2 * (C3 * C4**2 * z**2 - C4 * (2 * C3 + C5) * z - C4 * C6 + 2 * C3 + C5)


def _exp_family(family_id, variant, d, C1, C2, C3, C4, C5, C6, C7, fm=None, prep=None) -> FamilySpec:
    h1 = lambda z: C3 * exp(C4 * z)
    h2 = h2_closed_form(C3, C4, C5, C6, C7)
    return FamilySpec(
        id=family_id,
        variant=variant,
        n=4,
        d=d,
        constants={"C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5, "C6": C6, "C7": C7},
        C1=C1,
        C2=C2,
        f=lambda z: z[1] * h1(z[0]) + h2(z[0]),
        domain=Domain(*_box(4), accept=_flat_accept(fm, prep)),
        kind="dim4-exp",
        ode={"h1": h1, "h2": h2},
        flat_map=fm,
        prepotential=prep,
        notes=(prep.note,) if prep is not None and prep.note else (),
    )


def zw_flat_map(d: float, C2: float) -> FlatMap:
    eta = np.array([[0, 1, 0, C2], [1, 0, 0, 0], [0, 0, 0, 1], [C2, 0, 1, 0]], dtype=float)
    if _is(d, 1.0):
        return FlatMap(lambda u: [u[0], (u[2] + u[3]) / u[1], 0.5 * u[1] + u[2], ln(u[1])], "d=1", eta,
                       lambda x: np.array([x[0], 0.0, x[2], 1.0]), UNIT[4])
    return FlatMap(
        lambda u: [u[0], pow_real(u[1], -d) * (u[2] + u[3]), 0.5 * u[1] + u[2], pow_real(u[1], 1.0 - d) / (1.0 - d)],
        "d!=1",
        eta,
        lambda x: np.array([x[0], (1.0 - d) * x[1], x[2], (1.0 - d) * x[3]]),
        UNIT[4],
    )


def zw_prepotential(d: float, C2: float, corrected: bool = True) -> Prepotential | None:
    common = lambda x: C2 / 2.0 * x[0] ** 2 * x[3] + x[0] * x[2] * x[3] + 0.5 * x[0] ** 2 * x[1]
    if _is(d, -2.0):
        return Prepotential(lambda x: common(x) - 0.3 * 9.0 ** (1.0 / 3.0) * pow_real(x[3], 5.0 / 3.0),
                            x_accept=lambda x: x[3] > 0.1)
    if _is(d, -1.0):
        return Prepotential(lambda x: common(x) + 0.25 * x[3] ** 2 * ln(x[3]), x_accept=lambda x: x[3] > 0.1)
    if _is(d, 2.0):
        if not corrected:
            return Prepotential(common, x_accept=lambda x: abs(x[3]) > 0.1)
        return Prepotential(lambda x: common(x) - 1.0 / (6.0 * x[3]), x_accept=lambda x: abs(x[3]) > 0.1,
                            note="missing -1/(6 x^4) term added")
    if _is(d, 1.0):
        return Prepotential(lambda x: common(x) + exp(2.0 * x[3]) / 8.0)
    return None


def make_dim4_zw(d: float, C2: float, variant: str = "") -> FamilySpec:
    fm = zw_flat_map(d, C2)
    return _exp_family("dim4-exp-C4zero", variant, d, 0.0, C2, 1.0, 0.0, 0.0, 1.0, 0.0, fm, zw_prepotential(d, C2))


def exp_one_flat_map(d: float, C2: float) -> FlatMap:
    if _is(d, 2.0):
        def m(u):
            u1, u2, u3, u4 = u
            E = exp(u3 / u2)
            return [u1 - u2 / 2, (2 * u2**2 + u2 * u4 - u3**2) / u2**2 * E, (u2 * u4 - u3**2) / u2**3 * E - C2 / u2, ln(u2)]

        eta = np.array([[0, 0, 1, 0], [0, 0, 0, 0.5], [1, 0, 0, 0], [0, 0.5, 0, C2]], dtype=float)
        return FlatMap(m, "d=2", eta, lambda x: np.array([x[0], 0.0, -x[2], 1.0]), UNIT[4])
    if _is(d, 1.0):
        def m(u):
            u1, u2, u3, u4 = u
            E = exp(u3 / u2)
            L = ln(u2)
            return [u1 + u2 / 2 - u2 / 2 * L, (u2 * u4 - u3**2) / u2**2 * E + C2 * L,
                    ((u2 * u4 - u3**2) / u2**2 * L + 2) * E + C2 / 2 * L**2, u2]

        eta = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0.5], [0, 0, 0.5, 0]], dtype=float)
        return FlatMap(m, "d=1", eta, lambda x: np.array([x[0] - x[3] / 2, C2, x[1], x[3]]), UNIT[4])
    if _is(d, -1.0) or _is(d, -2.0):
        def m(u):
            u1, u2, u3, u4 = u
            E = exp(u3 / u2)
            return [u1 + u2 / (2 * (1 - d)),
                    C2 * ln(u2) - (2 * (1 - d) * u2**2 + u3**2 - u2 * u4) / u2**2 * E,
                    pow_real(u2, -d - 1) * (u2 * u4 - u3**2) * E + C2 * pow_real(u2, 1 - d) / (1 - d),
                    pow_real(u2, 2 - d) / (2 - d)]

        k = -0.25 if _is(d, -1.0) else -1.0 / 6.0
        eta = np.array([[0, 0, 1, 0], [0, 0, 0, k], [1, 0, 0, 0], [0, k, 0, 0]], dtype=float)
        a, b = (2.0, 3.0) if _is(d, -1.0) else (3.0, 4.0)
        return FlatMap(m, f"d={d:g}", eta, lambda x: np.array([x[0], C2, a * x[2], b * x[3]]), UNIT[4])
    raise BranchError(f"(w - z^2) e^z: flat data printed only for d in {{-2,-1,1,2}}, got d={d}")


def exp_one_prepotential(d: float, C2: float) -> Prepotential:
    if _is(d, -1.0):
        c3 = 3.0 ** (1.0 / 3.0)
        return Prepotential(
            lambda x: (-c3 * C2 / 32 * pow_real(x[3], 4 / 3) * ln(3 * x[3]) + 15 / 128 * c3 * C2 * pow_real(x[3], 4 / 3)
                       + 9.0 ** (1 / 3) / 32 * pow_real(x[3], 2 / 3) * x[2] + 3 / 32 * c3 * pow_real(x[3], 4 / 3) * x[1]
                       + 0.5 * x[0] ** 2 * x[2] - 0.25 * x[0] * x[1] * x[3]),
            x_accept=lambda x: x[3] > 0.1,
        )
    if _is(d, -2.0):
        s2 = math.sqrt(2.0)
        return Prepotential(
            lambda x: (-s2 / 45 * C2 * pow_real(x[3], 1.25) * ln(2 * sqrt(x[3])) + 4 / 75 * s2 * C2 * pow_real(x[3], 1.25)
                       + 2 / 45 * s2 * pow_real(x[3], 1.25) * x[1] + 1 / 72 * sqrt(x[3]) * x[2]
                       + 0.5 * x[0] ** 2 * x[2] - x[0] * x[1] * x[3] / 6),
            x_accept=lambda x: x[3] > 0.1,
        )
    if _is(d, 2.0):
        return Prepotential(
            lambda x: (-x[2] * exp(2 * x[3]) / 16 + (C2 + x[1] / 2) * exp(x[3]) + C2 / 2 * x[0] * x[3] ** 2
                       + 0.5 * x[0] * x[1] * x[3] + 0.5 * x[0] ** 2 * x[2])
        )
    if _is(d, 1.0):
        def F(x):
            L = ln(x[3])
            return (C2 / 24 * x[3] ** 2 * L**3 - 3 / 16 * (C2 + 2 / 3 * x[1]) * x[3] ** 2 * L**2
                    + 7 / 16 * (C2 + 6 / 7 * x[1] + 4 / 7 * x[2]) * x[3] ** 2 * L + 0.5 * x[0] * x[2] * x[3]
                    + 0.5 * x[0] ** 2 * x[1] - (7 * x[1] + 6 * x[2]) / 16 * x[3] ** 2)

        return Prepotential(F, x_accept=lambda x: x[3] > 0.1)
    raise BranchError(f"no printed prepotential for d={d}")


def make_dim4_exp_one(d: float, C2: float, variant: str = "") -> FamilySpec:
    # (w - z^2) e^z is the closed form with C3 = C4 = 1, C5 = -2, C6 = C7 = 0
    return _exp_family("dim4-exp-C4one", variant, d, 0.0, C2, 1.0, 1.0, -2.0, 0.0, 0.0,
                       exp_one_flat_map(d, C2), exp_one_prepotential(d, C2))


# ------------------------------------------------------ dimension 4, rational


def ab_closed_form(d, C1, C2, C3, C4, C5, C6, C7, C8):
    K = C2 + (1.0 - d) * C3
    if K == 0.0:
        raise DomainError("C2 + (1-d) C3 = 0 is excluded")
    A = lambda z: K / C4**2 * sinh(C4 * (z + C5)) ** 2
    B = lambda z: (C6 * cosh(2 * C4 * (z + C5)) + C7 * sinh(2 * C4 * (z + C5))
                   - z / 2 * (C1 / K + 4 * C4 * C7) - z**2 / 2 + C8)
    return A, B, K


def make_dim4_rational(d, C1, C2, C3, C4, C5, C6, C7, C8, variant="") -> FamilySpec:
    A, B, _ = ab_closed_form(d, C1, C2, C3, C4, C5, C6, C7, C8)

    def base(u):
        z, w = u[2] / u[1], u[3] / u[1]
        q = 2 * B(z) + w
        # F_4 = A/q^2 controls det(eta); keep it away from 0
        return abs(q) >= POLE_MARGIN and abs(A(z)) / q**2 >= F4_MARGIN

    return FamilySpec(
        id="dim4-rational",
        variant=variant,
        n=4,
        d=d,
        constants={"C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5, "C6": C6, "C7": C7, "C8": C8},
        C1=C1,
        C2=C2,
        f=lambda z: C3 - A(z[0]) / (2 * B(z[0]) + z[1]),
        domain=Domain(*_box(4), accept=base, excluded=f"|2B(z)+w| < {POLE_MARGIN} or |F_4| < {F4_MARGIN}"),
        kind="dim4-rational",
        ode={"A": A, "B": B},
    )


# ------------------------------------------------------------------ registry


@lru_cache(maxsize=1)
def registry() -> tuple[FamilySpec, ...]:
    specs = [
        make_dim2(0.0, 0.7, 1.3, 0.4, "d=0"),
        make_dim2(1.0, 0.0, 0.9, -0.6, "d=1"),
        make_dim2(0.5, 0.0, 1.1, 0.8, "d=0.5"),
        make_dim3_linear(0.0, 1.1, 0.8, 1.3, 0.7, "d=0"),
        make_dim3_linear(0.5, 0.0, 0.8, 1.3, 0.7, "d=0.5"),
        make_dim3_linear(3.0, 0.0, -0.6, 0.9, 0.2, "d=3"),
        make_dim3_linear(1.0, 0.0, 0.5, -1.2, 0.3, "d=1"),
        make_dim3_linear(2.0, 0.0, 0.8, 1.3, -0.4, "d=2"),
        make_dim3_rational(0.0, 0.9, 0.8, 0.6, 1.7, 0.3, "d=0,C1!=0,C1!=C4"),
        make_dim3_rational(0.0, 0.0, 0.8, 0.6, 1.7, 0.3, "d=0,C1=0"),
        make_dim3_rational(0.0, 1.7, 0.8, 0.6, 1.7, -0.2, "d=0,C1=C4"),
        make_dim3_rational(0.5, 0.0, 0.8, 0.6, 1.7, 0.3, "d=0.5,C3!=0"),
        make_dim3_rational(-1.0, 0.0, 0.8, 0.0, 1.7, 0.3, "d=-1,C3=0"),
        make_dim3_rational(1.0, 0.0, 0.8, 0.6, 1.7, 0.3, "d=1"),
        make_dim3_rational(2.0, 0.0, 0.8, 0.6, 1.7, 0.3, "d=2"),
        _example_d0(0.6, 1.7),
        _example_d2(0.0, 0.6, 1.7),
        _example_d2(1.0, 0.6, 1.7),
    ]
    for d in (-2.0, -1.0, 1.0, 2.0, 0.5):
        specs.append(make_dim4_zw(d, 0.8, f"d={d:g}"))
    for d in (-2.0, -1.0, 1.0, 2.0):
        specs.append(make_dim4_exp_one(d, 0.8, f"d={d:g}"))
    specs += [
        _exp_family("dim4-exp-general", "d=1.3", 1.3, 0.0, 0.8, 0.7, 0.9, 0.3, -0.4, 0.5),
        _exp_family("dim4-exp-general", "d=0", 0.0, 0.4, -0.5, 1.2, -0.6, 0.1, 0.2, -0.3),
        _exp_family("dim4-exp-general", "d=-0.7", -0.7, 0.0, 1.1, -0.8, 0.5, 0.4, 0.3, 0.9),
        _exp_family("dim4-poly-general", "d=0.5", 0.5, 0.0, 0.8, 0.7, 0.0, 0.3, -0.4, 0.5),
        _exp_family("dim4-poly-general", "d=0", 0.0, 0.6, 0.3, -1.1, 0.0, -0.2, 0.7, 0.1),
        _exp_family("dim4-poly-general", "d=2", 2.0, 0.0, -0.9, 0.4, 0.0, 0.6, 0.2, -0.5),
        make_dim4_rational(0.5, 0.0, 0.8, 0.4, 0.5, 1.5, 0.1, 0.05, -0.5, "d=0.5"),
        make_dim4_rational(0.0, 0.5, 0.8, 0.4, 0.5, 1.5, 0.1, 0.05, -0.5, "d=0,C1!=0"),
        make_dim4_rational(2.0, 0.0, 1.5, 0.7, -0.6, 1.2, 0.2, -0.1, 0.3, "d=2"),
    ]
    keys = [s.key for s in specs]
    assert len(keys) == len(set(keys)), "duplicate registry keys"
    return tuple(specs)
