"""Executable catalog of closed-form structures and their special functions."""

import json

from .catalog import (
    ab_closed_form,
    dim2_flat_map,
    dim3_linear_flat_map,
    dim3_rational_flat_map,
    exp_one_flat_map,
    exp_one_prepotential,
    h2_closed_form,
    make_dim2,
    make_dim3_linear,
    make_dim3_rational,
    make_dim4_exp_one,
    make_dim4_rational,
    make_dim4_zw,
    registry,
    zw_flat_map,
    zw_prepotential,
)
from .lambertw import BRANCH_POINT, LambertWConfig, lambert_w
from .odes import (
    Dim4OdeResiduals,
    eval_flat_map,
    eval_prepotential,
    ode_residual_dim3,
    ode_residual_dim4,
    printed_F_defect,
)
from .types import Domain, FamilySpec, FlatMap, Prepotential, point_rng
from ..errors import UnknownFamily


def select(ids) -> list[FamilySpec]:
    """Specs matching family ids or exact keys; "all" or empty selects everything."""
    specs = list(registry())
    if not ids or ids == "all" or list(ids) == ["all"]:
        return specs
    out = []
    for name in ids:
        hit = [s for s in specs if s.id == name or s.key == name]
        if not hit:
            raise UnknownFamily(name)
        out.extend(h for h in hit if h not in out)
    return out


def registry_json(indent: int | None = 2) -> str:
    return json.dumps([s.to_json() for s in registry()], indent=indent, sort_keys=True)
