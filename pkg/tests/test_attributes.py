import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from distmod.attributes import (
    EARTH_RADIUS_KM,
    AttributeTable,
    DistanceSpec,
    KernelSpec,
    PairwiseDistances,
    distance,
    haversine,
    kernel_eval,
    mean_pairwise_distance,
    read_attributes,
)


def law_of_cosines(lat1, lon1, lat2, lon2):
    # independent oracle, fine away from tiny angles
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, c)))


def test_quarter_circumference():
    d = haversine(0.0, 0.0, 0.0, 90.0)
    assert d == pytest.approx(10007.543398, abs=1e-3)
    assert d == pytest.approx(math.pi * EARTH_RADIUS_KM / 2, rel=1e-14)


@given(
    st.floats(-89, 89), st.floats(-179, 179), st.floats(-89, 89), st.floats(-179, 179)
)
def test_haversine_matches_cosine_law(a, b, c, d):
    if abs(a - c) + abs(b - d) < 1.0:
        return
    assert haversine(a, b, c, d) == pytest.approx(law_of_cosines(a, b, c, d), abs=1e-6)


def test_great_circle_rejects_bad_coordinates():
    t = AttributeTable({"lat": [0.0, 95.0], "lon": [0.0, 0.0]})
    with pytest.raises(ValueError):
        PairwiseDistances(DistanceSpec("great-circle", ("lat", "lon")), t)


def test_great_circle_needs_two_columns():
    with pytest.raises(ValueError):
        DistanceSpec("greatcircle", ("lat",))


def test_discrete_distance():
    t = AttributeTable({"office": ["Hartford", "Hartford", "Boston"]})
    spec = DistanceSpec("discrete", ("office",))
    assert distance(spec, t, 0, 1) == 0.0
    assert distance(spec, t, 0, 2) == 1.0


def test_missing_attribute():
    t = AttributeTable({"x": [0.0, 1.0]})
    with pytest.raises(KeyError):
        PairwiseDistances(DistanceSpec("euclidean", ("y",)), t)


def test_categorical_in_euclidean_rejected():
    t = AttributeTable({"x": ["a", "b"]})
    with pytest.raises(ValueError):
        PairwiseDistances(DistanceSpec("euclidean", ("x",)), t)


# a 1e-9 grid keeps squared differences clear of underflow
grid = st.integers(-50_000_000_000, 50_000_000_000).map(lambda v: v * 1e-9)
coords = st.lists(st.tuples(grid, grid), min_size=1, max_size=15)


@given(coords, st.sampled_from(["euclidean", "great-circle", "discrete"]))
def test_distance_axioms(pts, kind):
    arr = np.array(pts)
    if kind == "discrete":
        arr = np.round(arr / 25)
    t = AttributeTable({"a": arr[:, 0], "b": arr[:, 1]})
    D = PairwiseDistances(DistanceSpec(kind, ("a", "b")), t).matrix()
    assert np.all(D >= 0)
    np.testing.assert_array_equal(D, D.T)
    np.testing.assert_array_equal(np.diag(D), 0)
    same = np.all(arr[:, None, :] == arr[None, :, :], axis=2)
    np.testing.assert_array_equal(D == 0, same)


@given(coords)
def test_rows_agree_with_matrix(pts):
    t = AttributeTable.from_array(np.array(pts))
    lazy = PairwiseDistances(DistanceSpec("euclidean", tuple(t.names())), t, dense_cap=0)
    dense = PairwiseDistances(DistanceSpec("euclidean", tuple(t.names())), t)
    for i, r in lazy.rows():
        np.testing.assert_allclose(r, dense.matrix()[i], atol=1e-12)
    assert mean_pairwise_distance(lazy) == pytest.approx(mean_pairwise_distance(dense), abs=1e-10)


def test_mean_pairwise_distance_examples():
    one = PairwiseDistances.from_matrix([[0.0]])
    assert mean_pairwise_distance(one) == 0.0
    t = AttributeTable({"x": [0.0, 2.0]})
    two = PairwiseDistances(DistanceSpec("euclidean", ("x",)), t)
    assert mean_pairwise_distance(two) == 1.0


@given(coords)
def test_mean_distance_double_loop(pts):
    arr = np.array(pts)
    t = AttributeTable.from_array(arr)
    D = PairwiseDistances(DistanceSpec("euclidean", tuple(t.names())), t)
    n = len(arr)
    total = sum(math.dist(arr[i], arr[j]) for i in range(n) for j in range(n))
    assert mean_pairwise_distance(D) == pytest.approx(total / n**2, rel=1e-12, abs=1e-12)


def test_kernel_examples():
    assert kernel_eval(KernelSpec("gaussian", 0.3), 0.0) == 1.0
    assert kernel_eval(KernelSpec("two-level-step", 0.1), 1.0) == 0.1
    assert kernel_eval(KernelSpec("reciprocal", 2.5), 2.5) == 0.5
    assert kernel_eval(KernelSpec("hard-threshold", 1.0), 1.0) == 1.0
    assert kernel_eval(KernelSpec("hard-threshold", 1.0), 1.0001) == 0.0
    assert kernel_eval(KernelSpec("exp-inverse"), 0.0) == 0.0
    assert kernel_eval(KernelSpec("exp-decay"), 1.0) == pytest.approx(math.exp(-1))
    assert kernel_eval(KernelSpec("constant"), 7.0) == 1.0


@pytest.mark.parametrize("kind,sigma", [("gaussian", 0.0), ("reciprocal", -1.0), ("threshold", None), ("step", 1.5)])
def test_kernel_rejects_bad_sigma(kind, sigma):
    with pytest.raises(ValueError):
        KernelSpec(kind, sigma)


def test_kernel_rejects_negative_distance():
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec("gaussian", 1.0), -0.1)


kernels = st.sampled_from(
    [("gaussian", 0.7), ("reciprocal", 1.3), ("hard-threshold", 0.5), ("constant", None),
     ("two-level-step", 0.2), ("exp-decay", None), ("exp-inverse", None)]
)


@given(kernels, st.lists(st.floats(0, 1e3), min_size=2, max_size=30))
def test_kernel_range_and_monotonicity(ks, ds):
    spec = KernelSpec(*ks)
    d = np.sort(np.array(ds))
    f = kernel_eval(spec, d)
    assert np.all((f >= 0) & (f <= 1))
    if spec.kind in ("gaussian", "reciprocal", "exp-decay", "hard-threshold"):
        assert np.all(np.diff(f) <= 0)
    if spec.kind == "exp-inverse":
        assert np.all(np.diff(f) >= 0)


def test_read_attributes_csv_and_whitespace(tmp_path):
    a = tmp_path / "a.csv"
    a.write_text("node,x,office\n2,1.5,Boston\n1,0.5,Hartford\n")
    t = read_attributes(a, node_ids=[1, 2])
    np.testing.assert_array_equal(t["x"], [0.5, 1.5])
    assert not t.numeric["office"]
    b = tmp_path / "b.txt"
    b.write_text("node x\n1 3\n2 4\n")
    assert read_attributes(b)["x"].tolist() == [3.0, 4.0]


def test_read_attributes_missing_node(tmp_path):
    a = tmp_path / "a.csv"
    a.write_text("node,x\n1,0.5\n")
    with pytest.raises(ValueError):
        read_attributes(a, node_ids=[1, 2])
