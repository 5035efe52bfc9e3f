import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sifs.metric import MetricError, MetricSpace, distance, operator_norm, validate_metric

from oracles import taxicab

E1 = [(0, 0), (4, 0), (0, 4), (4, 5), (5, 4)]


def test_taxicab_e1_pair():
    space = MetricSpace("taxicab", dimension=2)
    assert distance(space, (5, 4), (4, 5)) == 2


def test_euclidean_3_4_5():
    assert distance(MetricSpace("euclidean", dimension=2), (0, 0), (3, 4)) == 5


@pytest.mark.parametrize("kind", ["euclidean", "taxicab", "chebyshev"])
def test_identity(kind):
    space = MetricSpace(kind, dimension=3)
    assert distance(space, (1.5, -2, 7), (1.5, -2, 7)) == 0


def test_chebyshev():
    assert distance(MetricSpace("chebyshev", dimension=2), (0, 0), (3, -4)) == 4


def test_finite_table_distance_and_range():
    table = [[taxicab(a, b) for b in E1] for a in E1]
    space = MetricSpace("finite_table", table=table, labels=E1)
    assert distance(space, 3, 4) == 2
    with pytest.raises(MetricError, match="out of range"):
        distance(space, 0, 5)


def test_dimension_mismatch():
    with pytest.raises(MetricError, match="dimension"):
        distance(MetricSpace("euclidean", dimension=2), (0, 0, 0), (1, 1, 1))


def test_validate_e1_table_is_metric():
    table = [[taxicab(a, b) for b in E1] for a in E1]
    assert validate_metric(table) == []


def test_validate_triangle_witness():
    table = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    report = validate_metric(table)
    assert [(v.axiom, v.indices) for v in report] == [("triangle", (0, 1, 2)), ("triangle", (2, 1, 0))]


def test_validate_zero_off_diagonal():
    report = validate_metric([[0, 0], [0, 0]])
    assert [v.axiom for v in report] == ["positive_off_diagonal"]


def test_validate_tolerates_rounding():
    assert validate_metric([[0, 1, 2 + 5e-13], [1, 0, 1], [2 + 5e-13, 1, 0]]) == []
    assert validate_metric([[0, 1, 2 + 1e-9], [1, 0, 1], [2 + 1e-9, 1, 0]])


def test_validate_asymmetry_and_diagonal():
    axioms = {v.axiom for v in validate_metric([[1, 2], [3, 0]])}
    assert axioms == {"zero_diagonal", "symmetry"}


def test_validate_rejects_non_square():
    with pytest.raises(MetricError, match="square"):
        validate_metric([[0, 1, 2], [1, 0, 1]])


def test_finite_space_rejects_bad_table():
    with pytest.raises(MetricError, match="triangle"):
        MetricSpace("finite_table", table=[[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_json_round_trip():
    space = MetricSpace.from_json('{"kind": "taxicab", "dimension": 2}')
    assert space.kind == "taxicab" and space.dimension == 2
    again = MetricSpace.from_dict(space.to_dict())
    assert again.same_as(space)
    table = [[taxicab(a, b) for b in E1] for a in E1]
    fin = MetricSpace.from_dict({"kind": "finite_table", "table": table, "labels": E1})
    assert MetricSpace.from_dict(fin.to_dict()).same_as(fin)


def test_rejects_nan_points():
    with pytest.raises(MetricError, match="finite"):
        MetricSpace("euclidean", dimension=1).as_points([float("nan")])


@pytest.mark.parametrize(
    "kind,expected", [("euclidean", 5.0), ("taxicab", 7.0), ("chebyshev", 7.0)]
)
def test_operator_norm(kind, expected):
    M = [[3.0, 4.0], [0.0, 0.0]] if kind == "euclidean" else [[3.0, 4.0], [0.0, 3.0]]
    assert operator_norm(M, kind) == pytest.approx(expected)


coords = arrays(np.float64, (3, 3), elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(coords, st.sampled_from(["euclidean", "taxicab", "chebyshev"]))
def test_metric_axioms_on_random_points(P, kind):
    space = MetricSpace(kind, dimension=3)
    a, b, c = P
    dab, dba = distance(space, a, b), distance(space, b, a)
    assert dab == dba
    assert distance(space, a, a) == 0
    assert dab <= distance(space, a, c) + distance(space, c, b) + 1e-9
    assert dab >= 0


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 2), elements=st.floats(-10, 10, allow_nan=False), unique=True))
def test_finite_tables_from_points_validate(P):
    if len({tuple(p) for p in P}) < len(P):
        return
    space = MetricSpace("euclidean", dimension=2)
    table = space.pairwise(P, P)
    if np.any(table[~np.eye(len(P), dtype=bool)] == 0):
        return
    fin = MetricSpace("finite_table", table=table)
    idx = np.arange(len(P))
    D = fin.pairwise(idx, idx)
    assert np.all(D <= D[:, [2]] + D[[2], :] + 1e-12)
