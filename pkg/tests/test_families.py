import json
import math

import numpy as np
import pytest
from scipy.special import lambertw as scipy_lambertw

from frobkit import jets
from frobkit.errors import BranchError, DomainError, NoConvergence, UnknownFamily
from frobkit.families import (
    BRANCH_POINT,
    LambertWConfig,
    ab_closed_form,
    eval_flat_map,
    eval_prepotential,
    exp_one_flat_map,
    lambert_w,
    make_dim2,
    make_dim3_linear,
    make_dim3_rational,
    make_dim4_zw,
    ode_residual_dim3,
    ode_residual_dim4,
    point_rng,
    printed_F_defect,
    registry,
    registry_json,
    select,
)
from frobkit.families.types import Domain, FamilySpec
from frobkit.verify import RunConfig, sample_points

REQUIRED_IDS = {
    "dim2", "dim3-linear", "dim3-rational", "dim3-example-d0", "dim3-example-d2-C2zero",
    "dim3-example-d2-C2one", "dim4-exp-C4zero", "dim4-exp-C4one", "dim4-rational",
}


def test_registry_contents():
    specs = registry()
    assert REQUIRED_IDS <= {s.id for s in specs}
    assert len({s.key for s in specs}) == len(specs)
    branches = {s.flat_map.branch for s in specs if s.id == "dim3-rational"}
    assert len(branches) == 7
    assert {s.d for s in specs if s.id == "dim4-exp-C4one"} == {-2.0, -1.0, 1.0, 2.0}
    assert {-2.0, -1.0, 1.0, 2.0} < {s.d for s in specs if s.id == "dim4-exp-C4zero"}
    assert {0.0, 1.0} < {s.d for s in specs if s.id == "dim2"}
    for s in specs:
        assert s.d == 0.0 or s.C1 == 0.0


def test_registry_json_roundtrip():
    data = json.loads(registry_json())
    assert len(data) == len(registry())
    assert {"id", "n", "d", "constants", "checks"} <= set(data[0])


def test_c1_rule_enforced():
    with pytest.raises(ValueError):
        make_dim2(0.5, 1.0, 1.0, 0.0)


def test_select():
    assert [s.key for s in select(["dim2[d=1]"])] == ["dim2[d=1]"]
    assert len(select(["dim2"])) == 3
    assert len(select("all")) == len(registry())
    with pytest.raises(UnknownFamily):
        select(["dim9"])


def test_rational_entries():
    spec = make_dim3_rational(0.5, 0.0, 0.8, 0.6, 1.7)
    z = 0.9
    F3 = spec.printed_F([z])[2]
    assert F3 == pytest.approx(1.7 / (z + 0.6) ** 2)


def test_dim4_rational_A():
    d, C2, C3, C4, C5 = 0.5, 0.8, 0.4, 0.5, 1.5
    A, _, K = ab_closed_form(d, 0.0, C2, C3, C4, C5, 0.1, 0.05, -0.5)
    z = 0.3
    assert A(z) == pytest.approx((C2 + (1 - d) * C3) / C4**2 * math.sinh(C4 * (z + C5)) ** 2)
    with pytest.raises(DomainError):
        ab_closed_form(2.0, 0.3, 0.5, 0.5, 1.0, 0.0, 0.1, 0.1, 0.0)


def test_dim2_f_constant():
    spec = select(["dim2[d=1]"])[0]
    assert spec.f([]) == spec.constants["C3"]


def test_ode_dim3_linear_exact():
    spec = select(["dim3-linear[d=0.5]"])[0]
    for z in (-1.0, 0.2, 3.0):
        assert ode_residual_dim3(spec, z) == (0.0, 0.0)


def test_ode_dim3_rational():
    spec = make_dim3_rational(0.5, 0.0, 0.8, 1.0, 2.0)
    r1, r2 = ode_residual_dim3(spec, 1.0)
    assert r1 < 1e-12 and r2 < 1e-12
    with pytest.raises(DomainError):
        ode_residual_dim3(spec, -1.0)


def test_ode_dim3_negative_control():
    spec = select(["dim3-linear[d=0.5]"])[0]
    cubic = lambda z: [0.0, 0.0 * z[0], z[0] ** 3]
    _, r2 = ode_residual_dim3(spec, 1.0, F=cubic, relative=False)
    assert r2 == pytest.approx(15.0)


def test_ode_dim4_exp_C4zero():
    spec = select(["dim4-exp-C4zero[d=0.5]"])[0]
    r = ode_residual_dim4(spec, 0.4, -0.3)
    assert r.eqdiffh == 0.0
    assert r.eqdipartenza4 == 0.0  # f is linear in w


def test_ode_dim4_rational():
    spec = select(["dim4-rational[d=0.5]"])[0]
    for u in sample_points(spec, RunConfig(), "ode-test", 50):
        assert ode_residual_dim4(spec, u[2] / u[1], u[3] / u[1]).max() < 1e-10
    A, B = spec.ode["A"], spec.ode["B"]
    z = 0.2
    with pytest.raises(DomainError):
        ode_residual_dim4(spec, z, -2 * B(z))


def test_ode_dim4_exponential_C4_nonzero():
    spec = select(["dim4-exp-general[d=1.3]"])[0]
    for z in np.linspace(-3, 3, 25):
        r = ode_residual_dim4(spec, z, 0.1)
        assert r.eqdiffh < 1e-10 and r.h1sing < 1e-10


def test_printed_F_match_absorbed_constants():
    for key in ("dim2[d=0.5]", "dim3-linear[d=3]", "dim3-rational[d=0,C1=C4]"):
        spec = select([key])[0]
        z = [] if spec.n == 2 else [0.3]
        assert printed_F_defect(spec, z) < 1e-13


def test_lambert_w_values():
    assert lambert_w(0.0) == 0.0
    assert lambert_w(math.e) == pytest.approx(1.0, abs=1e-15)
    assert lambert_w(1.0) == pytest.approx(0.567143290409784, abs=1e-12)
    assert lambert_w(BRANCH_POINT) == pytest.approx(-1.0, abs=1e-7)


def test_lambert_w_against_scipy():
    # closer to the branch point dW/dx blows up and both codes lose digits
    xs = np.concatenate([BRANCH_POINT + np.geomspace(1e-6, 1.0, 50), np.geomspace(1e-3, 1e12, 50)])
    for x in xs:
        assert lambert_w(float(x)) == pytest.approx(scipy_lambertw(x).real, rel=1e-12, abs=1e-12)


def test_lambert_w_errors():
    with pytest.raises(DomainError):
        lambert_w(-0.5)
    with pytest.raises(ValueError):
        LambertWConfig(tol=0.0)
    with pytest.raises(NoConvergence):
        lambert_w(1e6, LambertWConfig(max_iter=1))


def test_lambert_w_jet():
    x = jets.jet_var(0, 0.7, 1, 3)
    W = lambert_w(x)
    w = W.value
    assert W.partial((1,)) == pytest.approx(w / (0.7 * (1 + w)), rel=1e-14)
    # W e^W = x holds for the whole jet
    assert np.allclose((W * jets.exp(W)).coeffs, x.coeffs, atol=1e-14)


def test_eval_prepotential_examples():
    spec = make_dim2(1.0, 0.0, 1.0, 0.0)
    assert eval_prepotential(spec, [1.0, 2.0]) == pytest.approx(1.0)
    spec = select(["dim3-example-d2-C2zero"])[0]
    assert eval_prepotential(spec, [0.0, 0.0, 0.7]) == 0.0
    spec = select(["dim4-exp-C4one[d=2]"])[0]
    assert eval_prepotential(spec, [0.0, 0.0, 0.0, 0.0]) == pytest.approx(spec.constants["C2"])


def test_eval_prepotential_errors():
    with pytest.raises(BranchError):
        eval_prepotential(select(["dim4-rational[d=2]"])[0], [0.1, 0.2, 0.3, 0.4])
    with pytest.raises(DomainError):
        eval_prepotential(select(["dim4-exp-C4one[d=-1]"])[0], [0.1, 0.2, 0.3, -0.4])


def test_eval_flat_map_examples():
    d, C2, C3 = 1.0, 0.5, -1.2
    spec = make_dim3_linear(d, 0.0, C2, C3, 0.3)
    u = [0.2, 1.4, 0.7]
    x = eval_flat_map(spec, u)
    assert x[1] == pytest.approx(u[2] / u[1] + C2 / C3 * math.log(u[1]), rel=1e-14)
    spec = make_dim2(0.0, 0.7, 1.3, 0.4)
    assert np.array_equal(eval_flat_map(spec, [0.3, 1.1]), [0.3, 1.1])
    spec = select(["dim4-exp-C4one[d=1]"])[0]
    assert eval_flat_map(spec, [0.1, 1.3, 0.2, 0.4])[3] == 1.3


def test_eval_flat_map_errors():
    with pytest.raises(BranchError):
        eval_flat_map(select(["dim4-rational[d=2]"])[0], [0.1, 1.0, 0.2, 0.3])
    with pytest.raises(DomainError):
        eval_flat_map(select(["dim3-linear[d=2]"])[0], [0.1, 0.0, 0.2])
    with pytest.raises(BranchError):
        exp_one_flat_map(0.5, 0.8)
    with pytest.raises(BranchError):
        make_dim3_rational(0.0, -0.9, 0.8, 0.6, 1.7)


def test_zw_generic_d_has_no_prepotential():
    spec = make_dim4_zw(0.5, 0.8)
    assert spec.flat_map is not None and spec.prepotential is None


def test_domain_sampling():
    dom = Domain((0.0, 0.0), (1.0, 1.0), accept=lambda u: u[0] > u[1])
    pts = dom.sample(50, np.random.default_rng(0))
    assert pts.shape == (50, 2) and all(dom.contains(p) for p in pts)
    with pytest.raises(DomainError):
        Domain((0.0,), (1.0,), accept=lambda u: False).sample(1, np.random.default_rng(0), max_tries=5)


def test_point_rng_is_label_specific():
    a = point_rng(42, "dim2[d=0]", "axioms").random(3)
    b = point_rng(42, "dim2[d=0]", "axioms").random(3)
    c = point_rng(42, "dim2[d=0]", "flat").random(3)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_sampled_points_admissible():
    for spec in registry():
        for u in sample_points(spec, RunConfig(), "admissible", 10):
            assert spec.domain.contains(u)
            assert u[1] >= 0.1


def test_family_spec_key():
    spec = registry()[0]
    assert isinstance(spec, FamilySpec)
    assert spec.key == f"{spec.id}[{spec.variant}]"
