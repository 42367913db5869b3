import math

import numpy as np
import pytest

from frobkit import jets
from frobkit.errors import DomainError, SingularMetric
from frobkit.structures import (
    BlockStructure,
    GeneratingData,
    assemble_metric,
    build_frame,
    checked_inverse,
    f_to_metric_entries,
    l_operator,
    metric_potential_defects,
    potential_from_f,
    product_constants,
    unit_field,
)


def _prod(c, i, j):
    return c[:, i, j]


def test_product_single_block():
    c = product_constants(BlockStructure.single(3))
    assert np.array_equal(_prod(c, 1, 1), [0, 0, 1])
    assert np.array_equal(_prod(c, 1, 2), [0, 0, 0])
    for j in range(3):
        assert np.array_equal(_prod(c, 0, j), np.eye(3)[j])


def test_product_multi_block():
    bs = BlockStructure((2, 1))
    c = product_constants(bs)
    assert np.array_equal(_prod(c, 1, 2), [0, 0, 0])
    assert np.array_equal(_prod(c, 2, 2), [0, 0, 1])
    assert np.array_equal(unit_field(bs), [1, 0, 1])


@pytest.mark.parametrize("sizes", [(2,), (3,), (4,), (2, 1), (2, 2), (3, 1, 2)])
def test_product_commutative_associative(sizes):
    c = product_constants(BlockStructure(sizes))
    assert np.array_equal(c, np.transpose(c, (0, 2, 1)))
    left = np.einsum("sij,lsk->ijkl", c, c)
    right = np.einsum("sjk,lsi->ijkl", c, c)
    assert np.array_equal(left, right)
    e = unit_field(BlockStructure(sizes))
    assert np.array_equal(np.einsum("kij,i->kj", c, e), np.eye(len(e)))


def test_block_structure_validation():
    with pytest.raises(ValueError):
        BlockStructure(())
    with pytest.raises(ValueError):
        BlockStructure((1,))
    with pytest.raises(ValueError):
        BlockStructure((2, 0))


def test_l_operator_examples():
    assert np.array_equal(l_operator(BlockStructure.single(3), (1, 2, 3)), [[1, 0, 0], [2, 1, 0], [3, 2, 1]])
    assert np.array_equal(l_operator(BlockStructure.single(2), (5, 7)), [[5, 0], [7, 5]])
    assert np.array_equal(l_operator(BlockStructure((2, 1)), (1, 2, 3)), [[1, 0, 0], [2, 1, 0], [0, 0, 3]])


def test_generating_data_c1_rule():
    with pytest.raises(ValueError):
        GeneratingData(lambda z: 0.0, 1.0, 1.0, 0.5)


def test_metric_entries_linear_f():
    d, C2, C3, C4 = 0.5, 0.8, 1.3, 0.7
    gd = GeneratingData(lambda z: C3 * z[0] + C4, 0.0, C2, d)
    u = [0.3, 1.4, -0.6]
    F = f_to_metric_entries(gd, BlockStructure.single(3), u)
    z = u[2] / u[1]
    assert F[2].value == pytest.approx(C3, abs=1e-15)
    assert F[1].value == pytest.approx(-C3 * d * z + C2 - (d - 1) * C4, abs=1e-14)
    assert F[0].value == 0.0


def test_metric_entries_dim4_z_plus_w():
    d, C2 = 1.5, 0.4
    gd = GeneratingData(lambda z: z[0] + z[1], 0.0, C2, d)
    u = [0.2, 1.3, 0.5, -0.8]
    F = f_to_metric_entries(gd, BlockStructure.single(4), u)
    z, w = u[2] / u[1], u[3] / u[1]
    assert [F[2].value, F[3].value] == pytest.approx([1.0, 1.0])
    assert F[1].value == pytest.approx(-z - w - (d - 1) * (z + w) + C2, abs=1e-14)


def test_metric_entries_zero_f():
    gd = GeneratingData(lambda z: 0.0, 0.7, 1.1, 0.0)
    F = f_to_metric_entries(gd, BlockStructure.single(4), [0.1, 0.9, 0.3, 0.2])
    assert [x.value for x in F] == [0.7, 1.1, 0.0, 0.0]


def test_metric_entries_u2_zero():
    gd = GeneratingData(lambda z: z[0], 0.0, 1.0, 0.5)
    with pytest.raises((DomainError, ZeroDivisionError)):
        f_to_metric_entries(gd, BlockStructure.single(3), [0.1, 0.0, 0.3])


def test_assemble_metric_dim2():
    bs = BlockStructure.single(2)
    u = jets.variables([0.0, 2.0], 3)
    gd = GeneratingData(lambda z: 0.0, 0.0, 1.0, 1.0)
    eta = assemble_metric(bs, f_to_metric_entries(gd, bs, u), 1.0, u)
    val = np.array([[x.value for x in row] for row in eta])
    assert np.allclose(val, [[0, 0.5], [0.5, 0]], atol=1e-16)


def test_assemble_metric_dim4_pattern():
    bs = BlockStructure.single(4)
    gd = GeneratingData(lambda z: z[0] * z[1] + z[0] ** 3, 0.0, 0.5, 0.3)
    frame = build_frame(gd, bs, [0.2, 1.2, 0.4, -0.5])
    g = frame.metric
    assert g[2, 2] == g[1, 3] == g[3, 1]
    assert g[2, 3] == g[3, 2] == g[3, 3] == 0.0
    assert np.array_equal(g, g.T)
    assert np.allclose(g @ frame.metric_inv, np.eye(4), atol=1e-10)


def test_assemble_metric_non_integer_weight_needs_positive_u2():
    bs = BlockStructure.single(2)
    u = jets.variables([0.0, -1.0], 2)
    gd = GeneratingData(lambda z: 0.0, 0.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        assemble_metric(bs, f_to_metric_entries(gd, bs, u), 0.5, u)


def test_potential_examples():
    assert potential_from_f(GeneratingData(lambda z: 0.0, 0.0, 1.7, 0.0), [0.3, 2.5]) == pytest.approx(1.7 * 2.5)
    assert potential_from_f(GeneratingData(lambda z: 0.0, 0.0, 1.7, 1.0), [0.3, 2.5]) == pytest.approx(
        1.7 * math.log(2.5))
    with pytest.raises(DomainError):
        potential_from_f(GeneratingData(lambda z: 0.0, 0.0, 1.0, 0.0), [0.3, -1.0])


@pytest.mark.parametrize("n,d,f", [
    (3, 0.5, lambda z: 0.7 * z[0] + 0.2),
    (3, 0.0, lambda z: -1.7 / (z[0] + 0.6) + 0.3),
    (3, 2.0, lambda z: -1.7 / (z[0] + 0.6)),
    (4, 1.0, lambda z: z[0] + z[1]),
    (4, -0.7, lambda z: (z[1] - z[0] ** 2) * jets.exp(z[0])),
])
def test_potential_and_closedness(n, d, f):
    C1 = 0.4 if d == 0 else 0.0
    gd = GeneratingData(f, C1, 0.9, d)
    bs = BlockStructure.single(n)
    rng = np.random.default_rng(5)
    for _ in range(10):
        u = rng.uniform(-1, 1, n)
        u[1] = rng.uniform(0.5, 2.0)
        if n == 3 and abs(u[2] / u[1] + 0.6) < 0.25:
            continue
        pot, closed = metric_potential_defects(gd, bs, u)
        assert pot < 1e-10 and closed < 1e-10


def test_checked_inverse_singular():
    with pytest.raises(SingularMetric):
        checked_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))
