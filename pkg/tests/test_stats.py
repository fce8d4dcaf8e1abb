import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import chi2, chi2_contingency

from conftest import random_instance
from distmod.attributes import AttributeTable, DistanceSpec, KernelSpec, PairwiseDistances, mean_pairwise_distance
from distmod.graph import load_graph
from distmod.nullmodels import DistModel, NGModel, SpaModel
from distmod.stats import (
    chi2_sf,
    chi_squared_independence,
    chi_squared_test,
    default_bin_edges,
    effect_curve,
    regularized_gamma_upper,
)


def tail_integral(x, dof):
    k = dof / 2.0
    pdf = lambda t: t ** (k - 1) * math.exp(-t / 2) / (2**k * math.gamma(k))  # noqa: E731
    val, _ = integrate.quad(pdf, x, np.inf, epsabs=1e-14, epsrel=1e-12)
    return val


def test_diagonal_table():
    res = chi_squared_test([[10, 0], [0, 10]])
    assert res.statistic == pytest.approx(20.0, abs=1e-12)
    assert res.dof == 1
    assert abs(res.p_value - tail_integral(20.0, 1)) < 1e-7
    assert res.p_value == pytest.approx(math.erfc(math.sqrt(10)), rel=1e-10)
    assert res.p_value == pytest.approx(7.74e-6, abs=1e-8)


def test_proportional_table():
    res = chi_squared_test([[2, 4], [3, 6], [5, 10]])
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_value == 1.0


def test_yates_matches_scipy():
    T = [[12, 5], [7, 9]]
    res = chi_squared_test(T, yates=True)
    ref = chi2_contingency(T, correction=True)
    assert res.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-10)


@pytest.mark.parametrize("table", [[[1, 2, 3]], [[1], [2]], [[0, 0], [1, 2]]])
def test_degenerate_tables(table):
    with pytest.raises(ValueError):
        chi_squared_test(table)


@given(st.floats(1e-3, 200.0), st.integers(1, 40))
def test_sf_matches_reference(x, dof):
    assert abs(chi2_sf(x, dof) - chi2.sf(x, dof)) < 1e-8


@given(st.floats(0.1, 50.0), st.floats(0.1, 50.0), st.integers(1, 10))
def test_sf_monotone(x, y, dof):
    lo, hi = sorted((x, y))
    assert chi2_sf(hi, dof) <= chi2_sf(lo, dof) + 1e-15


def test_gamma_edges():
    assert regularized_gamma_upper(2.0, 0.0) == 1.0
    with pytest.raises(ValueError):
        regularized_gamma_upper(0.0, 1.0)


@given(st.lists(st.lists(st.integers(1, 30), min_size=3, max_size=3), min_size=2, max_size=4))
def test_statistic_matches_scipy(table):
    res = chi_squared_test(table)
    ref = chi2_contingency(table, correction=False)
    assert res.statistic >= 0
    assert 0.0 <= res.p_value <= 1.0
    assert res.statistic == pytest.approx(ref.statistic, rel=1e-10, abs=1e-12)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-8)


def test_independence_from_attributes():
    a = ["x", "x", "y", "y"] * 5
    b = ["p", "p", "q", "q"] * 5
    res = chi_squared_independence(a, b)
    assert res.dof == 1
    assert res.statistic == pytest.approx(20.0)


@pytest.mark.parametrize("kind", ["ng", "spa", "dist"])
def test_curve_totals(kind):
    g, dist, _ = random_instance(12, n=40)
    dbar = mean_pairwise_distance(dist)
    m = {"ng": NGModel(g), "spa": SpaModel(g, dist, g.strengths, dbar / 4),
         "dist": DistModel(g, dist, KernelSpec("gaussian", dbar))}[kind]
    curve = effect_curve(g, dist, default_bin_edges(dist), {kind: m})
    assert curve.observed.sum() == pytest.approx(g.two_m, rel=1e-14)
    assert abs(curve.expected[kind].sum() - g.two_m) / g.two_m < 1e-9


def test_spa_same_tau_identity():
    g, dist, _ = random_instance(13, n=50)
    tau = mean_pairwise_distance(dist) / 5
    curve = effect_curve(g, dist, models={"spa": SpaModel(g, dist, g.strengths, tau)}, tau=tau)
    nz = curve.observed > 0
    np.testing.assert_allclose(curve.expected["spa"][nz], curve.observed[nz], rtol=1e-9)


def test_ng_discrete_split():
    g = load_graph([(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 1.0)])
    t = AttributeTable({"office": ["a", "a", "b", "b"]})
    dist = PairwiseDistances(DistanceSpec("discrete", ("office",)), t)
    curve = effect_curve(g, dist, default_bin_edges(dist, discrete=True), {"ng": NGModel(g)})
    k = g.strengths
    same = sum(k[i] * k[j] for i in range(4) for j in range(4) if t["office"][i] == t["office"][j])
    diff = k.sum() ** 2 - same
    np.testing.assert_allclose(curve.expected["ng"], [same / g.two_m, diff / g.two_m])


def test_smaller_sigma_shifts_weight_short():
    g, dist, _ = random_instance(14, n=60)
    dbar = mean_pairwise_distance(dist)
    edges = default_bin_edges(dist, 10)
    models = {s: DistModel(g, dist, KernelSpec("gaussian", s * dbar)) for s in (0.3, 1.0)}
    curve = effect_curve(g, dist, edges, models)
    near = lambda v: np.cumsum(v) / v.sum()  # noqa: E731
    assert np.all(near(curve.expected[0.3])[:-1] >= near(curve.expected[1.0])[:-1])


def test_bins_must_cover():
    g, dist, _ = random_instance(15, n=10)
    with pytest.raises(ValueError):
        effect_curve(g, dist, [0.0, dist.max() / 2])
    with pytest.raises(ValueError):
        effect_curve(g, dist, [0.0, 0.0, dist.max()])
