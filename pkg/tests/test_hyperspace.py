import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sifs import hyperspace as hs
from sifs.hyperspace import CompactSet, HyperspaceError
from sifs.maps import AffineMap
from sifs.metric import MetricSpace, distance

from conftest import SIERPINSKI_VERTICES
from oracles import euclid, hausdorff_loops

E2 = MetricSpace("euclidean", dimension=2)
E1D = MetricSpace("euclidean", dimension=1)


def cs(space, pts, eps=1e-9):
    return CompactSet.from_points(space, pts, eps)


@pytest.fixture
def force_buckets(monkeypatch):
    monkeypatch.setattr(hs, "BRUTE_PAIRS", 0)


def test_directed_examples():
    A = cs(E2, [[0, 0], [1, 0]])
    B = cs(E2, [[0, 0]])
    assert hs.directed_distance(E2, A, B) == 1
    assert hs.directed_distance(E2, B, A) == 0
    assert hs.directed_distance(E1D, cs(E1D, [0, 1]), cs(E1D, [0.4])) == pytest.approx(0.6, abs=1e-9)


def test_hausdorff_examples():
    A = cs(E2, [[0, 0], [1, 0]])
    assert hs.hausdorff(E2, A, A) == 0
    assert hs.hausdorff(E2, A, cs(E2, [[0, 0]])) == 1


def _cantor_endpoints(level):
    pts = {0.0, 1.0}
    for k in range(level):
        pts |= {p / 3 for p in pts} | {p / 3 + 2 / 3 for p in pts}
    ivs = [(0.0, 1.0)]
    for _ in range(level):
        ivs = [x for a, b in ivs for x in ((a, a + (b - a) / 3), (b - (b - a) / 3, b))]
    return sorted({x for iv in ivs for x in iv}), ivs


def test_cantor_levels_endpoint_sets():
    eps = 1e-3
    c1, _ = _cantor_endpoints(1)
    c2, _ = _cantor_endpoints(2)
    h = hs.hausdorff(E1D, cs(E1D, c1, eps), cs(E1D, c2, eps))
    assert h == pytest.approx(1 / 9, abs=2 * eps)
    assert hausdorff_loops([(x,) for x in c1], [(x,) for x in c2], euclid) == pytest.approx(1 / 9)


def test_cantor_levels_solid_grids():
    # filled intervals on the grid: the widest uncovered gap is half the removed third
    eps = 1e-3
    grid = np.round(np.arange(0, 1 + eps / 2, eps), 12)
    sets = []
    for level in (1, 2):
        _, ivs = _cantor_endpoints(level)
        keep = np.zeros(len(grid), bool)
        for a, b in ivs:
            keep |= (grid >= a - 1e-12) & (grid <= b + 1e-12)
        sets.append(grid[keep])
    h = hs.hausdorff(E1D, cs(E1D, sets[0], eps), cs(E1D, sets[1], eps))
    assert h == pytest.approx(1 / 18, abs=2 * eps)


def test_finite_space_hausdorff(e1):
    space, _ = e1
    A = CompactSet.from_indices(space, [3, 4])
    B = CompactSet.from_indices(space, [1])
    assert hs.hausdorff(space, A, B) == 5


def test_quantization_dedupes_and_snaps_half_even():
    A = cs(E1D, [0.5, 1.5, 2.5, 0.4], eps=1.0)
    assert A.keys.ravel().tolist() == [0, 2]
    assert len(cs(E2, [[0.1, 0.1], [0.1000000000001, 0.1]], eps=1e-6)) == 1


def test_empty_set_rejected():
    with pytest.raises(HyperspaceError):
        CompactSet.from_points(E2, np.empty((0, 2)), 1e-3)


def test_space_mismatch():
    E3 = MetricSpace("euclidean", dimension=3)
    with pytest.raises(HyperspaceError, match="mismatch"):
        hs.hausdorff(E3, cs(E2, [[0, 0]]), cs(E2, [[1, 1]]))


def test_union_examples():
    zero, one = cs(E1D, [0]), cs(E1D, [1])
    assert hs.union([zero, one]) == cs(E1D, [0, 1])
    A = cs(E2, [[0, 0], [0.3, 0.2]])
    assert hs.union([A, A]) == A


def test_union_sierpinski_vertices():
    V = cs(E2, SIERPINSKI_VERTICES, 1e-3)
    maps = [AffineMap(np.eye(2) / 2, v / 2) for v in SIERPINSKI_VERTICES]
    images = [hs.image(E2, T, V) for T in maps]
    assert sum(len(I) for I in images) == 9
    assert len(hs.union(images)) == 6


def test_union_rejects_mixed_resolution():
    with pytest.raises(HyperspaceError, match="resolutions"):
        hs.union([cs(E1D, [0], 1e-3), cs(E1D, [1], 1e-4)])


def test_csv_round_trip():
    A = cs(E2, np.random.default_rng(3).random((50, 2)), 1e-4)
    text = hs.to_csv(A)
    assert text.splitlines()[0] == "# resolution=0.0001 dim=2"
    assert hs.from_csv(text) == A


@pytest.mark.parametrize(
    "text,msg",
    [("0,1\n", "header"), ("# resolution=1e-3 dim=2\n0,1,2\n", "line 2"), ("# resolution=1e-3 dim=1\nabc\n", "line 2")],
)
def test_csv_errors(text, msg):
    with pytest.raises(HyperspaceError, match=msg):
        hs.from_csv(text)


def test_accelerated_single_points(force_buckets):
    a, b = [0.25, 0.75], [0.5, 0.125]
    A, B = cs(E2, [a], 1e-6), cs(E2, [b], 1e-6)
    assert hs.hausdorff_accelerated(E2, A, B) == distance(E2, A.points[0], B.points[0])


@pytest.mark.parametrize("kind", ["euclidean", "taxicab", "chebyshev"])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_accelerated_bit_equal(kind, dim, force_buckets):
    space = MetricSpace(kind, dimension=dim)
    rng = np.random.default_rng(dim)
    for trial in range(20):
        A = CompactSet.from_points(space, rng.random((rng.integers(1, 200), dim)), 1e-5)
        B = CompactSet.from_points(space, rng.random((rng.integers(1, 200), dim)) * 3 - 1, 1e-5)
        assert hs.hausdorff_accelerated(space, A, B) == hs.hausdorff(space, A, B)


def test_accelerated_clustered_far_apart(force_buckets):
    rng = np.random.default_rng(9)
    A = cs(E2, rng.random((300, 2)) * 0.01, 1e-6)
    B = cs(E2, np.vstack([rng.random((300, 2)) * 0.01 + 5, [[0.5, 0.5]]]), 1e-6)
    assert hs.hausdorff_accelerated(E2, A, B) == hs.hausdorff(E2, A, B)


def test_accelerated_faster_at_ten_thousand():
    rng = np.random.default_rng(42)
    A = cs(E2, rng.random((10_000, 2)), 1e-6)
    B = cs(E2, rng.random((10_000, 2)), 1e-6)
    t0 = time.perf_counter()
    brute = hs.hausdorff(E2, A, B)
    t1 = time.perf_counter()
    fast = hs.hausdorff_accelerated(E2, A, B)
    t2 = time.perf_counter()
    assert fast == brute
    assert (t1 - t0) >= 5 * (t2 - t1)


def test_accelerated_rejects_finite(e1):
    space, _ = e1
    A = CompactSet.from_indices(space, [0])
    with pytest.raises(HyperspaceError):
        hs.hausdorff_accelerated(space, A, A)


def random_set(rng, n_max=50, dim=2, eps=1e-6):
    return cs(MetricSpace("euclidean", dimension=dim), rng.random((rng.integers(1, n_max + 1), dim)), eps)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hausdorff_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (random_set(rng) for _ in range(3))
    hab = hs.hausdorff(E2, A, B)
    assert hab == hs.hausdorff(E2, B, A)
    assert hs.hausdorff(E2, A, A) == 0
    assert hab <= hs.hausdorff(E2, A, C) + hs.hausdorff(E2, C, B) + 1e-12
    assert (hab == 0) == (A == B)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_union_inequality(seed, n):
    rng = np.random.default_rng(seed)
    As = [random_set(rng) for _ in range(n)]
    Bs = [random_set(rng) for _ in range(n)]
    lhs = hs.hausdorff(E2, hs.union(As), hs.union(Bs))
    assert lhs <= max(hs.hausdorff(E2, a, b) for a, b in zip(As, Bs)) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_subset_directed_zero(seed):
    rng = np.random.default_rng(seed)
    B = random_set(rng)
    take = rng.random(len(B)) < 0.5
    take[0] = True
    A = CompactSet(B.keys[take], B.resolution)
    assert hs.directed_distance(E2, A, B) == 0


def test_brute_matches_loop_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        A, B = random_set(rng, 15), random_set(rng, 15)
        loops = hausdorff_loops([tuple(p) for p in A.points], [tuple(p) for p in B.points], euclid)
        assert hs.hausdorff(E2, A, B) == pytest.approx(loops, abs=1e-15)


def test_default_resolution():
    assert hs.default_resolution([[0, 0], [3, 4]]) == pytest.approx(5e-3)
    assert hs.default_resolution([[1, 1]]) == 1e-3
