import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frobkit import jets
from frobkit.errors import DomainError, OrderExceeded
from frobkit.jets import FdOracle, Jet


def test_jet_var_seed():
    j = jets.jet_var(0, 5.0, 2, 3)
    d = j.as_dict()
    assert d[(0, 0)] == 5.0 and d[(1, 0)] == 1.0
    assert all(v == 0.0 for k, v in d.items() if k not in ((0, 0), (1, 0)))
    assert len(d) == math.comb(2 + 3, 3)
    j = jets.jet_var(1, 0.0, 2, 1)
    assert j.as_dict() == {(0, 0): 0.0, (1, 0): 0.0, (0, 1): 1.0}


def test_jet_var_index_range():
    with pytest.raises(IndexError):
        jets.jet_var(2, 1.0, 2)


def test_product_of_seeds():
    p = jets.jet_var(0, 2.0, 2, 3) * jets.jet_var(1, 3.0, 2, 3)
    assert p.value == 6.0
    assert p.partial((1, 0)) == 3.0 and p.partial((0, 1)) == 2.0
    assert p.partial((1, 1)) == 1.0
    assert p.partial((2, 0)) == 0.0 and p.partial((0, 2)) == 0.0


def test_elementary_series():
    x = jets.jet_var(0, 0.0, 1, 3)
    assert np.allclose(jets.jet_apply("exp", x).coeffs, [1, 1, 0.5, 1 / 6], atol=1e-16)
    y = jets.jet_var(0, 1.0, 1, 2)
    assert np.allclose(jets.jet_apply("ln", y).coeffs, [0, 1, -0.5], atol=1e-16)
    p = jets.jet_apply("pow_real", jets.jet_var(0, 4.0, 1, 1), -0.5)
    assert p.value == 0.5 and p.partial((1,)) == pytest.approx(-1 / 16, abs=1e-16)


def test_extract_partial_examples():
    x = jets.jet_var(0, 3.0, 1, 3)
    assert jets.extract_partial(x * x, (2,)) == 2.0
    s = jets.sinh(2.0 * jets.jet_var(0, 0.0, 1, 3))
    assert jets.extract_partial(s, (3,)) == pytest.approx(8.0, abs=1e-14)
    j = jets.exp(jets.jet_var(1, 0.3, 2, 3))
    assert jets.extract_partial(j, (0, 0)) == j.value


def test_extract_partial_order_exceeded():
    with pytest.raises(OrderExceeded):
        jets.jet_var(0, 1.0, 1, 2).partial((3,))


def test_domain_errors():
    x = jets.jet_var(0, -1.0, 1, 2)
    with pytest.raises(DomainError):
        jets.ln(x)
    with pytest.raises(DomainError):
        jets.sqrt(x)
    with pytest.raises(DomainError):
        jets.pow_real(x, 0.3)
    with pytest.raises(DomainError):
        jets.jet_const(1.0, 1, 2) / jets.jet_var(0, 0.0, 1, 2)
    with pytest.raises(ValueError):
        jets.jet_apply("tan", x)


def test_integer_power_of_negative_base():
    x = jets.jet_var(0, -2.0, 1, 3)
    p = jets.pow_real(x, 3)
    assert p.value == -8.0 and p.partial((1,)) == 12.0 and p.partial((2,)) == -12.0


def test_mismatched_bases_rejected():
    with pytest.raises(ValueError):
        jets.jet_var(0, 1.0, 1, 2) + jets.jet_var(0, 1.0, 2, 2)


def test_fd_oracle_examples():
    assert jets.fd_check(lambda x: x[0] ** 3, [2.0], (2,)) == pytest.approx(12.0, abs=1e-6)
    assert jets.fd_check(lambda x: math.exp(x[0]), [1.0], (1,)) == pytest.approx(math.e, abs=1e-7)
    with pytest.raises(OrderExceeded):
        jets.fd_check(lambda x: x[0], [1.0], (4,))
    with pytest.raises(ValueError):
        FdOracle(0.0)


def test_fd_oracle_on_dim3_rational_entry():
    # F_3 = C4 / (z + C3)^2 in DH coordinates, z = u3 / u2
    f = lambda u: 1.7 / (u[2] / u[1] + 0.6) ** 2
    rng = np.random.default_rng(3)
    for _ in range(10):
        p = np.array([0.0, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)])
        j = f(jets.variables(p, 3))
        for mi in [(0, 1, 0), (0, 0, 2), (0, 1, 1), (0, 2, 1)]:
            exact = j.partial(mi)
            assert abs(exact - jets.fd_check(f, p, mi)) <= 1e-5 * max(1.0, abs(exact))


def test_compose_matches_direct_evaluation():
    p = [0.4, -0.7]
    u = jets.variables(p, 3)
    # outer: g(a, b) = exp(a) * b^2 expanded about (a0, b0)
    a0, b0 = math.sin(0.4) + 0.1, 0.5 * (-0.7)
    g = jets.exp(jets.jet_var(0, a0, 2, 3)) * jets.jet_var(1, b0, 2, 3) ** 2
    inner_a = u[0] * 0.0 + math.sin(0.4) + 0.1 + (u[0] - 0.4) * math.cos(0.4)
    inner_b = 0.5 * u[1]
    got = jets.compose(g, [inner_a, inner_b])
    want = jets.exp(inner_a) * inner_b**2
    assert np.allclose(got.coeffs, want.coeffs, rtol=1e-13, atol=1e-14)


def test_derivative_and_gradient():
    u = jets.variables([1.2, 0.3], 3)
    f = u[0] ** 3 * u[1] + jets.exp(u[1])
    assert np.allclose(f.gradient(), [3 * 1.2**2 * 0.3, 1.2**3 + math.exp(0.3)])
    df = f.derivative(0)
    assert df.order == 2 and df.partial((1, 0)) == pytest.approx(6 * 1.2 * 0.3)
    assert f.hessian()[0, 1] == pytest.approx(3 * 1.2**2)


def _random_jet(seed, nvars=2, order=3):
    rng = np.random.default_rng(seed)
    b = jets.basis(nvars, order)
    return Jet(rng.uniform(-1, 1, b.size), b)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_leibniz_rule(sa, sb):
    a, b = _random_jet(sa), _random_jet(sb)
    prod = a * b
    for alpha in itertools.product(range(4), repeat=2):
        if sum(alpha) > 3:
            continue
        total = 0.0
        for beta in itertools.product(range(alpha[0] + 1), range(alpha[1] + 1)):
            gamma = (alpha[0] - beta[0], alpha[1] - beta[1])
            w = math.comb(alpha[0], beta[0]) * math.comb(alpha[1], beta[1])
            total += w * a.partial(beta) * b.partial(gamma)
        assert prod.partial(alpha) == pytest.approx(total, rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4).flatmap(
    lambda p: st.tuples(st.just(p), st.lists(st.tuples(st.integers(-5, 5), st.lists(
        st.integers(0, 3), min_size=len(p), max_size=len(p))), min_size=1, max_size=6))))
def test_polynomial_partials_exact(case):
    point, terms = case
    n = len(point)
    u = jets.variables(point, 3)
    poly = 0.0
    for c, e in terms:
        if sum(e) > 3:
            continue
        m = float(c)
        for k in range(n):
            m = m * u[k] ** e[k]
        poly = poly + m
    if not isinstance(poly, Jet):
        return
    for mi in itertools.product(range(4), repeat=n):
        if sum(mi) > 3:
            continue
        want = 0.0
        for c, e in terms:
            if sum(e) > 3 or any(e[k] < mi[k] for k in range(n)):
                continue
            t = float(c)
            for k in range(n):
                t *= math.perm(e[k], mi[k]) * point[k] ** (e[k] - mi[k])
            want += t
        assert abs(poly.partial(mi) - want) <= 1e-13 * max(1.0, abs(want))


@pytest.mark.parametrize("name", ["exp", "ln", "sinh", "cosh", "pow_real", "sqrt"])
def test_transcendental_vs_fd(name):
    fn = {
        "exp": lambda v: jets.exp(v[0] - v[1] ** 2),
        "ln": lambda v: jets.ln(2.0 + v[0] * v[1]),
        "sinh": lambda v: jets.sinh(v[0] + 0.5 * v[1]),
        "cosh": lambda v: jets.cosh(v[0] * v[1]),
        "pow_real": lambda v: jets.pow_real(1.5 + v[0], 2.3) * jets.pow_real(2.0 + v[1], -0.4),
        "sqrt": lambda v: jets.sqrt(3.0 + v[0] - v[1]),
    }[name]
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = rng.uniform(-0.8, 0.8, 2)
        j = fn(jets.variables(p, 3))
        for mi in [(1, 0), (0, 1), (2, 0), (1, 1), (3, 0), (1, 2)]:
            exact = j.partial(mi)
            fd = jets.fd_check(lambda x: jets.value_of(fn(list(x))), p, mi)
            assert abs(exact - fd) <= 1e-5 * max(1.0, abs(exact))
