"""Verification sweeps over the catalog, producing JSON-lines check reports."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import jets
from .errors import FrobkitError
from .families import (
    FamilySpec,
    ode_residual_dim3,
    ode_residual_dim4,
    point_rng,
    printed_F_defect,
    registry,
    select,
)
from .geometry import (
    AxiomResiduals,
    axiom_residuals,
    flat_pencil_residual,
    pushforward_frame,
    structure_from_prepotential,
    wdvv_residual,
)
from .structures import assemble_metric, build_frame, f_to_metric_entries, frame_from_metric

NEGATIVE_THRESHOLD = 1e-3


@dataclass(frozen=True)
class RunConfig:
    family_ids: Sequence[str] | str = "all"
    points_per_family: int = 100
    seed: int = 42
    tol_axiom: float = 1e-8
    tol_flat: float = 1e-9
    tol_wdvv: float = 1e-9
    jet_order: int = 3
    tol_cmatch: float = 1e-7
    tol_ode3: float = 1e-12
    tol_ode4: float = 1e-10
    tol_pencil: float = 1e-8
    flat_points: int = 50
    wdvv_points: int = 20
    ode_points: int = 50
    pencil_points: int = 20
    negative_points: int = 20
    workers: int = 1

    def __post_init__(self):
        if self.points_per_family < 1:
            raise ValueError("points_per_family must be >= 1")
        for name in ("tol_axiom", "tol_flat", "tol_wdvv", "tol_cmatch", "tol_ode3", "tol_ode4", "tol_pencil"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.jet_order < 2:
            raise ValueError("jet_order must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class CheckReport:
    check_id: str
    family_id: str
    n_points: int
    max_residual: float
    tolerance: float
    passed: bool
    seed: int
    elapsed_ms: int
    status: str = "pass"
    detail: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, allow_nan=True)

    @classmethod
    def not_applicable(cls, check_id: str, family_id: str, seed: int, tol: float, reason: str) -> "CheckReport":
        return cls(check_id, family_id, 0, 0.0, tol, True, seed, 0, "n/a", {"reason": reason})


def _report(check_id, spec, cfg, values, tol, t0, detail=None) -> CheckReport:
    worst = float(np.max(values)) if len(values) else 0.0
    passed = bool(worst <= tol)  # NaN fails
    return CheckReport(
        check_id=check_id,
        family_id=spec.key,
        n_points=len(values),
        max_residual=worst,
        tolerance=tol,
        passed=passed,
        seed=cfg.seed,
        elapsed_ms=int(round((time.perf_counter() - t0) * 1000)),
        status="pass" if passed else "fail",
        detail=detail or {},
    )


def sample_points(spec: FamilySpec, cfg: RunConfig, check_id: str, count: int, domain=None) -> np.ndarray:
    rng = point_rng(cfg.seed, spec.key, check_id)
    return (domain or spec.domain).sample(count, rng)


def _round(d: dict) -> dict:
    return {k: float(f"{v:.6e}") for k, v in d.items()}


# ------------------------------------------------------------------- checks


def check_axioms(spec: FamilySpec, cfg: RunConfig) -> CheckReport:
    t0 = time.perf_counter()
    gd, bs = spec.generating_data(), spec.block
    res = []
    for u in sample_points(spec, cfg, "axioms", cfg.points_per_family):
        res.append(axiom_residuals(build_frame(gd, bs, u, cfg.jet_order)))
    worst = AxiomResiduals.combine(res)
    return _report("axioms", spec, cfg, [r.max() for r in res], cfg.tol_axiom, t0, _round(worst.as_dict()))


def perturbed_frame(spec: FamilySpec, u, order: int = 3):
    """Frame of the structure with its generating data perturbed.

    n >= 3: f -> f + 0.1 (z^1)^3.  n = 2 has no z variable; there F_1 -> F_1 + 0.1 (u^2)^3.
    """
    bs = spec.block
    uj = jets.variables([float(v) for v in u], order)
    if spec.n >= 3:
        gd = spec.generating_data(lambda z: spec.f(z) + 0.1 * z[0] ** 3)
        Fs = f_to_metric_entries(gd, bs, uj)
    else:
        Fs = f_to_metric_entries(spec.generating_data(), bs, uj)
        Fs = [Fs[0] + 0.1 * uj[1] ** 3] + Fs[1:]
    eta = assemble_metric(bs, Fs, spec.d, uj)
    return frame_from_metric(bs, spec.d, uj, eta)


def check_negative_control(spec: FamilySpec, cfg: RunConfig) -> CheckReport:
    """Reported residual is threshold / max(curvature, nabla-c asymmetry); <= 1 means detected."""
    t0 = time.perf_counter()
    detected = []
    for u in sample_points(spec, cfg, "negative-control", cfg.negative_points):
        r = axiom_residuals(perturbed_frame(spec, u, cfg.jet_order))
        detected.append(max(r.curvature, r.nabla_c_symmetry))
    best = max(detected)
    ratio = NEGATIVE_THRESHOLD / best if best > 0 else float("inf")
    return _report("negative-control", spec, cfg, [ratio], 1.0, t0,
                   {"max_violation": float(f"{best:.6e}"), "threshold": NEGATIVE_THRESHOLD,
                    "points": len(detected)})


def check_ode(spec: FamilySpec, cfg: RunConfig) -> CheckReport:
    t0 = time.perf_counter()
    pts = sample_points(spec, cfg, "ode", cfg.ode_points)
    if spec.n == 2:
        vals = [printed_F_defect(spec, []) for _ in pts[:1]]
        return _report("ode", spec, cfg, vals, cfg.tol_ode3, t0, {"equations": "printed F = F(f)"})
    if spec.n == 3:
        vals, parts = [], {"r1": 0.0, "r2": 0.0, "printed_F": 0.0}
        for u in pts:
            z = u[2] / u[1]
            r1, r2 = ode_residual_dim3(spec, z)
            dF = printed_F_defect(spec, [z])
            parts = {"r1": max(parts["r1"], r1), "r2": max(parts["r2"], r2), "printed_F": max(parts["printed_F"], dF)}
            vals.append(max(r1, r2, dF))
        return _report("ode", spec, cfg, vals, cfg.tol_ode3, t0, _round(parts))
    vals, parts = [], {}
    for u in pts:
        r = ode_residual_dim4(spec, u[2] / u[1], u[3] / u[1])
        for k, v in r.as_dict().items():
            parts[k] = max(parts.get(k, 0.0), v)
        vals.append(r.max())
    return _report("ode", spec, cfg, vals, cfg.tol_ode4, t0, _round(parts))


def check_flat(spec: FamilySpec, cfg: RunConfig) -> CheckReport:
    if spec.flat_map is None:
        return CheckReport.not_applicable("flat", spec.key, cfg.seed, cfg.tol_flat, "no printed flat coordinates")
    t0 = time.perf_counter()
    gd, bs, fm = spec.generating_data(), spec.block, spec.flat_map
    etas, dev_E, dev_e = [], 0.0, 0.0
    for u in sample_points(spec, cfg, "flat", cfg.flat_points):
        p = pushforward_frame(fm, build_frame(gd, bs, u, cfg.jet_order))
        etas.append(p.eta)
        if fm.E is not None:
            E_exp = fm.E(p.x)
            dev_E = max(dev_E, float(np.max(np.abs(p.E - E_exp))) / max(1.0, float(np.max(np.abs(E_exp)))))
        if fm.e is not None:
            dev_e = max(dev_e, float(np.max(np.abs(p.e - fm.e))))
    etas = np.array(etas)
    std = float(etas.std(axis=0).max())
    dev_eta = float(np.max(np.abs(etas - fm.eta))) if fm.eta is not None else 0.0
    detail = {"std": std, "eta_vs_printed": dev_eta, "E_vs_printed": dev_E, "e_vs_printed": dev_e}
    detail = _round(detail)
    detail["branch"] = fm.branch
    detail["printed_eta"] = fm.eta is not None
    per_point = np.maximum.reduce([np.full(len(etas), v) for v in (std, dev_eta, dev_E, dev_e)])
    return _report("flat", spec, cfg, per_point, cfg.tol_flat, t0, detail)


def _prepotential_sweep(spec: FamilySpec, cfg: RunConfig):
    gd, bs, fm, prep = spec.generating_data(), spec.block, spec.flat_map, spec.prepotential
    wd, cm = [], []
    for u in sample_points(spec, cfg, "wdvv", cfg.wdvv_points):
        p = pushforward_frame(fm, build_frame(gd, bs, u, cfg.jet_order))
        eta = prep.eta if prep.eta is not None else p.eta
        wd.append(wdvv_residual(prep, eta, p.x))
        c = structure_from_prepotential(prep, eta, p.x)
        cm.append(float(np.max(np.abs(c - p.c))))
    return wd, cm


def check_wdvv(spec: FamilySpec, cfg: RunConfig) -> list[CheckReport]:
    if spec.prepotential is None:
        return [
            CheckReport.not_applicable("wdvv", spec.key, cfg.seed, cfg.tol_wdvv, "no printed prepotential"),
            CheckReport.not_applicable("wdvv-structure", spec.key, cfg.seed, cfg.tol_cmatch, "no printed prepotential"),
        ]
    t0 = time.perf_counter()
    wd, cm = _prepotential_sweep(spec, cfg)
    note = {"note": spec.prepotential.note} if spec.prepotential.note else {}
    return [
        _report("wdvv", spec, cfg, wd, cfg.tol_wdvv, t0, dict(note)),
        _report("wdvv-structure", spec, cfg, cm, cfg.tol_cmatch, t0, dict(note)),
    ]


def pencil_domain(spec: FamilySpec):
    # L = E o must be invertible: keep u^1 away from 0
    return spec.domain.with_box(0, 0.5, 2.0)


def check_pencil(spec: FamilySpec, cfg: RunConfig) -> CheckReport:
    t0 = time.perf_counter()
    gd, bs = spec.generating_data(), spec.block
    vals, parts = [], {}
    for u in sample_points(spec, cfg, "pencil", cfg.pencil_points, pencil_domain(spec)):
        r = flat_pencil_residual(build_frame(gd, bs, u, cfg.jet_order))
        for k, v in r.as_dict().items():
            parts[k] = max(parts.get(k, 0.0), v)
        vals.append(r.max())
    return _report("pencil", spec, cfg, vals, cfg.tol_pencil, t0, _round(parts))


CHECKS: dict[str, Callable] = {
    "axioms": check_axioms,
    "negative-control": check_negative_control,
    "ode": check_ode,
    "flat": check_flat,
    "wdvv": check_wdvv,
    "pencil": check_pencil,
}


def _error_report(check_id: str, spec: FamilySpec, cfg: RunConfig, exc: Exception) -> CheckReport:
    return CheckReport(check_id, spec.key, 0, float("nan"), 0.0, False, cfg.seed, 0, "fail",
                       {"error": f"{type(exc).__name__}: {exc}"})


def verify_family(spec: FamilySpec, cfg: RunConfig, checks: Iterable[str] = tuple(CHECKS)) -> list[CheckReport]:
    out = []
    for name in checks:
        try:
            r = CHECKS[name](spec, cfg)
        except (FrobkitError, ArithmeticError, ValueError) as exc:
            r = _error_report(name, spec, cfg, exc)
        out.extend(r if isinstance(r, list) else [r])
    return out


def _worker(args) -> list[CheckReport]:
    key, cfg, checks = args
    spec = next(s for s in registry() if s.key == key)
    return verify_family(spec, cfg, checks)


def sort_reports(reports: Iterable[CheckReport]) -> list[CheckReport]:
    return sorted(reports, key=lambda r: (r.family_id, r.check_id))


def run(cfg: RunConfig, checks: Iterable[str] = tuple(CHECKS)) -> list[CheckReport]:
    ids = None if cfg.family_ids == "all" else list(cfg.family_ids)
    specs = select(ids)
    checks = tuple(checks)
    jobs = [(s.key, cfg, checks) for s in specs]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_worker, jobs))
    else:
        chunks = [verify_family(s, cfg, checks) for s in specs]
    return sort_reports(r for chunk in chunks for r in chunk)


def all_passed(reports: Iterable[CheckReport]) -> bool:
    return all(r.passed for r in reports if r.status != "n/a")


def strip_timing(line: str) -> str:
    obj = json.loads(line)
    obj.pop("elapsed_ms", None)
    return json.dumps(obj, sort_keys=True)
