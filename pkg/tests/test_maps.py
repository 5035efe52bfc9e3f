import numpy as np
import pytest

from sifs.maps import AffineMap, ContractionMap, MapError, PiecewiseMap, TableMap, compile_expression
from sifs.metric import MetricSpace


def test_e1_piecewise_on_labels(e1):
    space, T = e1
    assert T.apply(space, np.arange(5)).tolist() == [0, 0, 0, 1, 2]


def test_piecewise_continuous_space():
    T = PiecewiseMap([{"guard": "x1 <= x2", "image": ["x1", "0"]}, {"guard": "x2 < x1", "image": ["0", "x2"]}])
    space = MetricSpace("taxicab", dimension=2)
    assert T.apply(space, [[5, 4], [4, 5]]).tolist() == [[0, 4], [4, 0]]


def test_four_n_rule(four_n):
    space, T, _ = four_n
    out = T.apply(space, [[0.9], [8], [9], [1]]).ravel()
    assert out.tolist() == pytest.approx([0.3, 0.0, 0.8, 1 / 3])


def test_first_matching_branch_wins():
    T = PiecewiseMap([{"guard": "x1 < 10", "image": ["1"]}, {"guard": "x1 < 20", "image": ["2"]}])
    assert T.apply(MetricSpace("euclidean"), [[5], [15]]).ravel().tolist() == [1, 2]


def test_no_branch_matches():
    T = PiecewiseMap([{"guard": "x1 < 0", "image": ["x1"]}])
    with pytest.raises(MapError, match="no branch"):
        T.apply(MetricSpace("euclidean"), [[1.0]])


def test_piecewise_output_outside_finite_space(e1):
    space, _ = e1
    T = PiecewiseMap([{"image": ["x1 + 1", "x2"]}])
    with pytest.raises(MapError, match="outside"):
        T.apply(space, [0])


@pytest.mark.parametrize("src", ["__import__('os')", "x1 ** 2", "abs(x1)", "y1 + 1", "x0", "x1 <"])
def test_grammar_rejects(src):
    with pytest.raises(MapError):
        compile_expression(src)


def test_grammar_arithmetic_and_logic():
    env = {"x1": np.array([1.0, 6.0]), "x2": np.array([2.0, 3.0])}
    assert compile_expression("-(x1 - 2*x2) / 2 + 7 % 4")(env).tolist() == [4.5, 3.0]
    assert compile_expression("x1 < x2 or x1 == 6", boolean=True)(env).tolist() == [True, True]
    assert compile_expression("0 <= x1 <= 3 and x2 != 3", boolean=True)(env).tolist() == [True, False]


def test_guard_must_be_condition():
    with pytest.raises(MapError, match="condition"):
        PiecewiseMap([{"guard": "x1 + 1", "image": ["x1"]}])


def test_affine_apply_and_norm():
    T = AffineMap([[0.5, 0], [0, 0.25]], [1, 2])
    space = MetricSpace("euclidean", dimension=2)
    assert T.apply(space, [[2, 4]]).tolist() == [[2, 3]]
    assert T.lipschitz_bound(space) == 0.5


def test_table_map(e1):
    space, _ = e1
    T = TableMap([0, 0, 0, 1, 2])
    assert T.apply(space, [3, 4]).tolist() == [1, 2]
    with pytest.raises(MapError, match="outside"):
        TableMap([0, 0, 0, 1, 7]).apply(space, [0])


def test_declared_m_range():
    with pytest.raises(MapError):
        AffineMap([[0.5]], declared_m=1.0)


def test_dict_round_trip(e1):
    space, T = e1
    for m in (T, AffineMap([[0.5]], [0.1], declared_m=0.6), TableMap([1, 1, 0], continuous=True)):
        again = ContractionMap.from_dict(m.to_dict())
        assert again.to_dict() == m.to_dict()


def test_continuity_flags(e1):
    space, T = e1
    assert not T.continuous
    assert T.is_continuous_on(space)  # discrete space
    assert not T.is_continuous_on(MetricSpace("taxicab", dimension=2))
    assert AffineMap([[0.5]]).continuous
