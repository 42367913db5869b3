"""Command-line front end: ``frobkit list|verify|painleve|pencil``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .errors import BranchError, DomainError, SingularPoint, StepTooLarge, UnknownFamily
from .families import select
from .painleve import PainleveState, integrate, sigma_eval, sigma_residuals, write_csv
from .verify import CheckReport, RunConfig, all_passed, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3

# config-file key -> (RunConfig field, parser)
_CONFIG_KEYS = {
    "families": ("family_ids", lambda s: s.strip()),
    "points": ("points_per_family", int),
    "seed": ("seed", int),
    "tol_axiom": ("tol_axiom", float),
    "tol_flat": ("tol_flat", float),
    "tol_wdvv": ("tol_wdvv", float),
    "jet_order": ("jet_order", int),
    "workers": ("workers", int),
}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    """``key = value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        field_name, conv = _CONFIG_KEYS[key]
        try:
            out[field_name] = conv(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def _parse_families(s):
    if s is None:
        return None
    s = s.strip()
    if s == "all":
        return "all"
    return tuple(x.strip() for x in s.split(",") if x.strip())


def build_config(args, env=None) -> RunConfig:
    """Flags > config file > FROBKIT_SEED > defaults."""
    env = os.environ if env is None else env
    values: dict = {}
    if env.get("FROBKIT_SEED"):
        try:
            values["seed"] = int(env["FROBKIT_SEED"])
        except ValueError as exc:
            raise UsageError(f"FROBKIT_SEED must be an integer, got {env['FROBKIT_SEED']!r}") from exc
    if getattr(args, "config", None):
        values.update(read_config(args.config))
    if "family_ids" in values:
        values["family_ids"] = _parse_families(values["family_ids"])
    flags = {
        "family_ids": _parse_families(getattr(args, "families", None)),
        "points_per_family": getattr(args, "points", None),
        "seed": getattr(args, "seed", None),
        "tol_axiom": getattr(args, "tol_axiom", None),
        "jet_order": getattr(args, "jet_order", None),
        "workers": getattr(args, "workers", None),
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(reports, out_path, stream) -> None:
    lines = [r.to_json() for r in reports]
    for line in lines:
        print(line, file=stream)
    if out_path:
        Path(out_path).write_text("".join(line + "\n" for line in lines))


def _summary(reports) -> str:
    applicable = [r for r in reports if r.status != "n/a"]
    failed = [r for r in applicable if not r.passed]
    na = len(reports) - len(applicable)
    head = f"{len(applicable) - len(failed)}/{len(applicable)} checks passed, {na} n/a"
    return head + "".join(f"\nFAIL {r.family_id} {r.check_id} {r.max_residual:.3e} > {r.tolerance:.1e}" for r in failed)


def cmd_list(args, stream=None) -> int:
    stream = stream or sys.stdout
    ids = _parse_families(args.families)
    specs = select(None if ids in (None, "all") else list(ids))
    if args.json:
        print(json.dumps([s.to_json() for s in specs], indent=2, sort_keys=True), file=stream)
        return EXIT_OK
    for s in specs:
        consts = " ".join(f"{k}={v:g}" for k, v in s.constants.items())
        print(f"{s.key}\tn={s.n}\td={s.d:g}\t{consts}\tchecks={','.join(s.checks)}", file=stream)
    return EXIT_OK


def cmd_verify(args, stream=None, checks=None) -> int:
    stream = stream or sys.stdout
    cfg = build_config(args)
    t0 = time.perf_counter()
    reports = run(cfg, checks) if checks else run(cfg)
    _emit(reports, getattr(args, "out", None), stream)
    print(_summary(reports) + f"\nseed={cfg.seed} elapsed={time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK if all_passed(reports) else EXIT_FAIL


def cmd_pencil(args, stream=None) -> int:
    return cmd_verify(args, stream, checks=("pencil",))


def _parse_s0(s: str) -> PainleveState:
    parts = s.split(",")
    if len(parts) != 4:
        raise UsageError("--s0 needs four comma-separated numbers z,F12,F13,F23")
    try:
        return PainleveState.from_seq(parts)
    except ValueError as exc:
        raise UsageError(f"bad --s0 {s!r}") from exc


def painleve_reports(s0: PainleveState, z_end: float, step: float, tol_drift: float = 1e-9,
                     tol_sigma: float = 1e-7):
    t0 = time.perf_counter()
    traj = integrate(s0, z_end, step)
    res = sigma_residuals(traj)
    cons = max(p.consistency for p in sigma_eval(traj))
    ms = int(round((time.perf_counter() - t0) * 1000))
    scale = max(1.0, traj.R2**2)
    family = f"painleve[s0={s0.z:g},{s0.F12:g},{s0.F13:g},{s0.F23:g}]"
    drift = traj.drift
    sig = float(res.max())
    reports = [
        CheckReport("first-integral", family, len(traj), drift, tol_drift, drift <= tol_drift, 0, ms,
                    "pass" if drift <= tol_drift else "fail", {"R2": traj.R2, "z_end": z_end, "step": traj.step}),
        CheckReport("sigma-pvi", family, len(traj), sig, tol_sigma * scale, sig <= tol_sigma * scale, 0, ms,
                    "pass" if sig <= tol_sigma * scale else "fail",
                    {"consistency": float(f"{cons:.6e}"), "R4": traj.R2**2}),
    ]
    return traj, reports


def cmd_painleve(args, stream=None) -> int:
    stream = stream or sys.stdout
    s0 = _parse_s0(args.s0)
    traj, reports = painleve_reports(s0, args.z_end, args.step)
    if args.out:
        write_csv(traj, args.out)
    _emit(reports, None, stream)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frobkit", description="Numerical checks of regular Frobenius structures.")
    sub = p.add_subparsers(dest="command", required=True)

    lp = sub.add_parser("list", help="list catalog entries")
    lp.add_argument("--families", default=None, help="comma-separated ids or keys (default all)")
    lp.add_argument("--json", action="store_true", help="emit the registry as JSON")

    def sweep_args(sp):
        sp.add_argument("--families", default=None, help="comma-separated ids or keys, or 'all'")
        sp.add_argument("--points", type=int, default=None, help="points per family for the axiom sweep")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jet-order", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None, help="process pool size (default 1)")
        sp.add_argument("--config", default=None, help="key = value file; flags take precedence")
        sp.add_argument("--out", default=None, help="also write JSON lines here")

    vp = sub.add_parser("verify", help="run the verification sweep")
    sweep_args(vp)
    vp.add_argument("--tol-axiom", type=float, default=None)

    pp = sub.add_parser("pencil", help="flat pencil check only")
    sweep_args(pp)

    qp = sub.add_parser("painleve", help="integrate the reduced system and test the sigma form")
    qp.add_argument("--s0", default="2,1,1,1", help="z,F12,F13,F23")
    qp.add_argument("--z-end", type=float, default=3.0)
    qp.add_argument("--step", type=float, default=1e-4)
    qp.add_argument("--out", default="trajectory.csv", help="CSV path ('' to skip)")
    return p


COMMANDS = {"list": cmd_list, "verify": cmd_verify, "pencil": cmd_pencil, "painleve": cmd_painleve}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UnknownFamily as exc:
        print(f"frobkit: unknown family id {exc.args[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"frobkit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SingularPoint, BranchError, StepTooLarge) as exc:
        print(f"frobkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
