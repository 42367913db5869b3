"""Levi-Civita calculus on chart frames and the Dubrovin-Frobenius residuals.

Index conventions: ``gamma[m, i, k] = Gamma^m_{ik}``, ``dgamma[m, i, k, j] =
d_j Gamma^m_{ik}`` and ``riemann[m, i, j, k] = R^m_{ijk}`` with

    R^m_{ijk} = d_j Gamma^m_{ik} - d_i Gamma^m_{jk}
                + Gamma^s_{ik} Gamma^m_{sj} - Gamma^s_{jk} Gamma^m_{is}.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import SingularJacobian, SingularL, SingularMetric
from .jets import Jet
from .structures import ChartFrame, checked_inverse

__all__ = [
    "AxiomResiduals",
    "PencilResiduals",
    "PushedFrame",
    "connection",
    "christoffel",
    "riemann",
    "riemann_residual",
    "axiom_residuals",
    "structure_from_prepotential",
    "wdvv_residual",
    "pushforward_frame",
    "flat_pencil_residual",
    "jet_matrix_inverse",
]


@dataclass(frozen=True)
class AxiomResiduals:
    invariance: float
    curvature: float
    nabla_c_symmetry: float
    unit_flat: float
    lie_E_c: float
    lie_E_e: float
    lie_E_eta: float
    lie_e_eta: float

    def max(self) -> float:
        return max(astuple(self))

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @staticmethod
    def combine(items: Sequence["AxiomResiduals"]) -> "AxiomResiduals":
        return AxiomResiduals(*np.max([astuple(a) for a in items], axis=0).tolist())


@dataclass(frozen=True)
class PencilResiduals:
    curvature_g1: float
    curvature_g2: float
    linearity: float
    # curvature of g1 + lambda g2 at lambda = 1, 2 (each member of a flat pencil is flat)
    curvature_members: float = 0.0

    def max(self) -> float:
        return max(astuple(self))

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# -- Levi-Civita connection ---------------------------------------------------


def connection(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray | None = None, g_inv=None):
    """Christoffel symbols and (optionally) their first derivatives.

    ``dg[i, j, k] = d_k g_ij`` and ``d2g[i, j, k, l] = d_k d_l g_ij``.
    """
    if g_inv is None:
        g_inv = checked_inverse(g)
    # A_{s i k} = d_i g_sk + d_k g_si - d_s g_ik
    A = np.einsum("ski->sik", dg) + np.einsum("sik->sik", dg) - np.einsum("iks->sik", dg)
    gamma = 0.5 * np.einsum("ms,sik->mik", g_inv, A)
    if d2g is None:
        return gamma, None
    # d_j A_{sik}
    dA = (
        np.einsum("skij->sikj", d2g)
        + np.einsum("sikj->sikj", d2g)
        - np.einsum("iksj->sikj", d2g)
    )
    # d_j g^{ms} = -g^{ma} d_j g_ab g^{bs}
    dginv = -np.einsum("ma,abj,bs->msj", g_inv, dg, g_inv)
    dgamma = 0.5 * (np.einsum("msj,sik->mikj", dginv, A) + np.einsum("ms,sikj->mikj", g_inv, dA))
    return gamma, dgamma


def christoffel(frame: ChartFrame) -> np.ndarray:
    gamma, _ = connection(frame.metric, frame.dmetric, None, frame.metric_inv)
    return gamma


def riemann(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    R = np.einsum("mikj->mijk", dgamma) - np.einsum("mjki->mijk", dgamma)
    R = R + np.einsum("sik,msj->mijk", gamma, gamma) - np.einsum("sjk,mis->mijk", gamma, gamma)
    return R


def _riemann_from_arrays(g, dg, d2g) -> float:
    gamma, dgamma = connection(g, dg, d2g)
    return float(np.max(np.abs(riemann(gamma, dgamma))))


def riemann_residual(frame: ChartFrame) -> float:
    gamma, dgamma = connection(frame.metric, frame.dmetric, frame.d2metric, frame.metric_inv)
    return float(np.max(np.abs(riemann(gamma, dgamma))))


# -- axioms -------------------------------------------------------------------


def axiom_residuals(frame: ChartFrame) -> AxiomResiduals:
    g, c, e, E = frame.metric, frame.c, frame.e, frame.E
    n = g.shape[0]
    gamma, dgamma = connection(g, frame.dmetric, frame.d2metric, frame.metric_inv)
    R = riemann(gamma, dgamma)

    # eta_il c^l_jk = eta_jl c^l_ik
    low = np.einsum("il,ljk->ijk", g, c)
    invariance = np.abs(low - np.einsum("ijk->jik", low)).max()

    # nabla_i c^l_jk (c is constant in DH coordinates)
    nc = (
        np.einsum("lis,sjk->iljk", gamma, c)
        - np.einsum("sij,lsk->iljk", gamma, c)
        - np.einsum("sik,ljs->iljk", gamma, c)
    )
    nabla_sym = np.abs(nc - np.einsum("iljk->jlik", nc)).max()

    # nabla_i e^k = d_i e^k + Gamma^k_is e^s, e constant
    unit_flat = np.abs(np.einsum("kis,s->ik", gamma, e)).max()

    # E = u^s d_s, so d_i E^k = delta
    dE = np.eye(n)
    lie_c = (
        -np.einsum("sjk,si->ijk", c, dE)
        + np.einsum("isk,js->ijk", c, dE)
        + np.einsum("ijs,ks->ijk", c, dE)
    )
    lie_E_c = np.abs(lie_c - c).max()
    lie_e = -dE.T @ e  # [E, e]^i = E^s d_s e^i - e^s d_s E^i
    lie_E_e = np.abs(lie_e + e).max()
    lie_eta = (
        np.einsum("k,ijk->ij", E, frame.dmetric)
        + np.einsum("kj,ik->ij", g, dE)
        + np.einsum("ik,jk->ij", g, dE)
    )
    lie_E_eta = np.abs(lie_eta - (2.0 - frame.d) * g).max()
    lie_e_eta = np.abs(np.einsum("k,ijk->ij", e, frame.dmetric)).max()

    return AxiomResiduals(
        invariance=float(invariance),
        curvature=float(np.abs(R).max()),
        nabla_c_symmetry=float(nabla_sym),
        unit_flat=float(unit_flat),
        lie_E_c=float(lie_E_c),
        lie_E_e=float(lie_E_e),
        lie_E_eta=float(lie_E_eta),
        lie_e_eta=float(lie_e_eta),
    )


# -- prepotentials -------------------------------------------------------------


def third_derivatives(F: Callable, x: Sequence[float]) -> np.ndarray:
    xs = jets.variables(list(x), 3)
    val = F(xs)
    n = len(x)
    if not isinstance(val, Jet):
        return np.zeros((n, n, n))
    out = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                mi = [0] * n
                mi[i] += 1
                mi[j] += 1
                mi[k] += 1
                out[i, j, k] = val.partial(mi)
    return out


def structure_from_prepotential(F: Callable, eta_flat, x) -> np.ndarray:
    """c^i_jk = eta^il d_l d_j d_k F."""
    eta_flat = np.asarray(eta_flat, dtype=float)
    inv = checked_inverse(eta_flat)
    return np.einsum("il,ljk->ijk", inv, third_derivatives(F, x))


def wdvv_residual(F: Callable, eta_flat, x, unit_index: int = 0) -> float:
    """Associativity defect of the product defined by F, and its unit normalization."""
    c = structure_from_prepotential(F, eta_flat, x)
    n = c.shape[0]
    # (d_i o d_j) o d_k vs d_i o (d_j o d_k)
    left = np.einsum("sij,lsk->ijkl", c, c)
    right = np.einsum("sjk,lsi->ijkl", c, c)
    assoc = float(np.abs(left - right).max())
    unit = float(np.abs(c[:, unit_index, :] - np.eye(n)).max())
    return max(assoc, unit)


# -- pushforward ---------------------------------------------------------------


@dataclass(frozen=True)
class PushedFrame:
    x: np.ndarray
    eta: np.ndarray
    c: np.ndarray
    e: np.ndarray
    E: np.ndarray
    jacobian: np.ndarray


def pushforward_frame(flat_map: Callable, frame: ChartFrame) -> PushedFrame:
    """Transform eta, c, e, E of ``frame`` through the coordinate map u -> x."""
    u = jets.variables(list(frame.point), 1)
    xs = flat_map(u)
    n = len(u)
    xs = [x if isinstance(x, Jet) else jets.jet_const(float(x), n, 1) for x in xs]
    J = np.array([x.gradient() for x in xs])  # J[a, i] = dx^a/du^i
    scale = float(np.max(np.abs(J))) ** n
    if scale == 0.0 or abs(np.linalg.det(J)) < 1e-12 * scale:
        raise SingularJacobian("flat-coordinate map has a singular Jacobian")
    Jinv = np.linalg.inv(J)
    eta = Jinv.T @ frame.metric @ Jinv
    c = np.einsum("ak,kij,ib,jc->abc", J, frame.c, Jinv, Jinv)
    return PushedFrame(
        x=np.array([x.value for x in xs]),
        eta=eta,
        c=c,
        e=J @ frame.e,
        E=J @ frame.E,
        jacobian=J,
    )


# -- flat pencil ---------------------------------------------------------------


def _jet_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    n, m = A.shape[0], B.shape[1]
    out = np.empty((n, m), dtype=object)
    for i in range(n):
        for j in range(m):
            acc = A[i, 0] * B[0, j]
            for k in range(1, A.shape[1]):
                acc = acc + A[i, k] * B[k, j]
            out[i, j] = acc
    return out


def jet_matrix_inverse(M: np.ndarray) -> np.ndarray:
    """Inverse of a matrix of jets, via the nilpotent Neumann series."""
    n = M.shape[0]
    b = next(x for x in M.ravel() if isinstance(x, Jet)).basis
    M = np.array(
        [[x if isinstance(x, Jet) else jets.jet_const(float(x), b.nvars, b.order) for x in row] for row in M],
        dtype=object,
    )
    M0 = np.array([[x.value for x in row] for row in M])
    M0inv = checked_inverse(M0)
    # M^{-1} = sum_k (-M0^{-1} N)^k M0^{-1}, with N = M - M0 nilpotent of degree > order
    K = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + (M[k, j] - float(M0[k, j])) * float(-M0inv[i, k])
            K[i, j] = acc
    inv0 = np.array([[jets.jet_const(float(M0inv[i, j]), b.nvars, b.order) for j in range(n)] for i in range(n)], dtype=object)
    term = inv0
    total = inv0.copy()
    for _ in range(b.order):
        term = _jet_matmul(K, term)
        total = total + term
    return total


def _contravariant_gamma(G_jets: np.ndarray):
    """Curvature residual and contravariant Christoffels -g^{is} Gamma^j_{sk} of covariant metric G."""
    g, dg, d2g = jets.derivative_arrays(G_jets, upto=2)
    gamma, dgamma = connection(g, dg, d2g)
    curv = float(np.max(np.abs(riemann(gamma, dgamma))))
    ginv = checked_inverse(g)
    contra = -np.einsum("is,jsk->ijk", ginv, gamma)
    return curv, contra


def flat_pencil_residual(frame: ChartFrame, lambdas: Sequence[float] = (0.0, 1.0, 2.0)) -> PencilResiduals:
    """Flatness of eta^{-1}, of L eta^{-1}, and affineness of the pencil connection."""
    if frame.metric_jets is None:
        raise ValueError("pencil check needs a frame built with metric jets")
    eta = frame.metric_jets
    b = eta[0, 0].basis
    if b.order < 2:
        raise ValueError("pencil check needs jets of order >= 2")
    u = jets.variables(list(frame.point), b.order)
    from .structures import l_operator

    L = l_operator(frame.block, u)
    L0 = np.array([[jets.value_of(x) for x in row] for row in L])
    try:
        checked_inverse(L0)
    except SingularMetric as exc:
        raise SingularL("L is singular at this point (u^1 = 0?)") from exc
    n = frame.metric.shape[0]
    one = jets.jet_const(1.0, b.nvars, b.order)
    zero = jets.jet_const(0.0, b.nvars, b.order)
    ident = np.array([[one if i == j else zero for j in range(n)] for i in range(n)], dtype=object)

    curv1, gam1 = _contravariant_gamma(eta)
    # covariant form of L eta^{-1} is eta L^{-1}
    G2 = _jet_matmul(eta, jet_matrix_inverse(L))
    curv2, gam2 = _contravariant_gamma(G2)

    linearity = 0.0
    members = 0.0
    for lam in lambdas:
        if lam == 0.0:
            gam = gam1
        else:
            G = _jet_matmul(eta, jet_matrix_inverse(ident + L * lam))
            c_lam, gam = _contravariant_gamma(G)
            members = max(members, c_lam)
        linearity = max(linearity, float(np.max(np.abs(gam - gam1 - lam * gam2))))
    return PencilResiduals(curv1, curv2, linearity, members)
