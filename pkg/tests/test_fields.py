import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ids_lab.errors import NegativePotential, WindowTooSmall
from ids_lab.fields import (
    DistributionSpec, SingleSiteFunction, alloy_potential, conformal_bounds, conformal_factor,
    log_ratio_diagnostic, sample_omega, shift, site_uniforms,
)
from ids_lab.lattice import FundamentalCell, box, build_region
from ids_lab.model import MetricSpec, Model, PotentialSpec

U01 = DistributionSpec.uniform(0.0, 1.0)


def window(n):
    return [(k,) for k in range(n)]


def test_same_seed_same_field():
    a = sample_omega(7, box(2, 3), (U01, U01))
    b = sample_omega(7, box(2, 3), (U01, U01))
    assert a.field_equal(b)
    c = sample_omega(8, box(2, 3), (U01, U01))
    assert not a.field_equal(c)


def test_window_independence():
    """A site's value does not depend on which window was materialized."""
    small = sample_omega(3, box(1, 2), (U01, None))
    big = sample_omega(3, box(1, 40), (U01, None))
    for g in box(1, 2):
        assert small.q(g) == big.q(g)


def test_query_outside_window():
    om = sample_omega(1, [(0,)], (U01, None))
    with pytest.raises(WindowTooSmall):
        om.q((1,))
    ext = om.extend([(1,)])
    assert ext.q((1,)) == sample_omega(1, [(1,)], (U01, None)).q((1,))
    with pytest.raises(WindowTooSmall):
        om.q((1,))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**40), st.integers(-50, 50), st.integers(-50, 50))
def test_shift_property(seed, g, gamma):
    om = sample_omega(seed, [(g,), (g + 3,)], (U01, U01))
    moved = shift(om, (gamma,))
    assert moved.q((g + gamma,)) == om.q((g,))
    assert moved.r((g + 3 + gamma,)) == om.r((g + 3,))
    back = shift(moved, (-gamma,))
    assert back.field_equal(om)


def test_shift_composition():
    om = sample_omega(11, box(2, 2), (U01, None))
    a = shift(shift(om, (1, 2)), (3, -1))
    b = shift(om, (4, 1))
    assert a.field_equal(b)


def test_q_and_r_independent_streams():
    om = sample_omega(5, window(2000), (U01, U01))
    q = om.q_values(window(2000))
    r = om.r_values(window(2000))
    assert abs(np.corrcoef(q, r)[0, 1]) < 0.1


def test_sample_mean_and_stationarity():
    n = 10_000
    om = sample_omega(2024, window(n), (U01, None))
    q = om.q_values(window(n))
    assert abs(q.mean() - 0.5) < 0.02
    far = sample_omega(2024, [(k + 10**6,) for k in range(n)], (U01, None))
    q2 = far.q_values([(k + 10**6,) for k in range(n)])
    assert stats.ks_2samp(q, q2).pvalue > 1e-3
    assert stats.kstest(q, "uniform").pvalue > 1e-3


@pytest.mark.parametrize("law", [
    DistributionSpec.triangular(-0.5, 0.5),
    DistributionSpec.triangular(0.0, 2.0, 0.5),
    DistributionSpec.uniform(-1.0, 3.0),
])
def test_marginal_law(law):
    n = 5000
    om = sample_omega(99, window(n), (law, None))
    q = om.q_values(window(n))
    assert stats.kstest(q, law.cdf).pvalue > 1e-3
    lo, hi = law.support
    assert q.min() >= lo and q.max() <= hi


def test_two_point_law():
    law = DistributionSpec.two_point(0.3, 1.0, 0.0)
    om = sample_omega(4, window(5000), (law, None))
    q = om.q_values(window(5000))
    assert set(np.unique(q)) <= {0.0, 1.0}
    assert abs((q == 1.0).mean() - 0.3) < 0.03
    assert law.mean == pytest.approx(0.3)


def test_site_uniforms_range():
    u = np.array([site_uniforms(s, (k, -k)) for s in range(5) for k in range(50)])
    assert u.min() >= 0.0 and u.max() < 1.0


def test_distribution_validation():
    with pytest.raises(ValueError):
        DistributionSpec.uniform(1.0, 0.0)
    with pytest.raises(ValueError):
        DistributionSpec.two_point(1.5, 1.0)
    with pytest.raises(ValueError):
        DistributionSpec.triangular(0.0, 1.0, 2.0)
    assert DistributionSpec.constant(2.0).is_degenerate


def test_alloy_convolution_by_hand(line_cell):
    v = SingleSiteFunction(((( 0,), 0, 1.0), ((1,), 0, 0.5)))
    region = build_region(line_cell, box(1, 2))
    om = sample_omega(17, [(g - 1,) for g in range(-2, 3)] + list(box(1, 2)), (U01, None))
    V = alloy_potential(om, region, v)
    for g in range(-2, 3):
        k = region.index((g,), 0)
        assert V[k] == pytest.approx(om.q((g,)) + 0.5 * om.q((g - 1,)), abs=1e-15)


def test_alloy_with_periodic_background():
    cell = FundamentalCell.ladder()
    region = build_region(cell, box(1, 1))
    v = SingleSiteFunction.on_cell(2, 1)
    om = sample_omega(3, box(1, 1), (U01, None))
    V = alloy_potential(om, region, v, v_per=[2.0, 0.0])
    for g in box(1, 1):
        assert V[region.index(g, 0)] == pytest.approx(2.0 + om.q(g))
        assert V[region.index(g, 1)] == pytest.approx(om.q(g))


def test_negative_potential_is_rejected(line_cell):
    region = build_region(line_cell, box(1, 1))
    om = sample_omega(0, box(1, 1), (DistributionSpec.uniform(-2.0, -1.0), None))
    v = SingleSiteFunction.on_cell(1, 1)
    with pytest.raises(NegativePotential):
        alloy_potential(om, region, v, require_nonnegative=True)
    model = Model(line_cell, PotentialSpec(DistributionSpec.uniform(-2.0, -1.0), v))
    from ids_lab.operator import assemble
    with pytest.raises(NegativePotential):
        assemble(region, model.realization(0, region), model)


def test_conformal_factor_single_cell(line_cell):
    region = build_region(line_cell, box(1, 3))
    law = DistributionSpec.uniform(-0.5, 0.5)
    om = sample_omega(21, box(1, 3), (None, law))
    a = conformal_factor(om, region, SingleSiteFunction.on_cell(1, 1))
    for g in box(1, 3):
        assert a[region.index(g, 0)] == pytest.approx(math.exp(om.r(g)), rel=1e-15)
    lo, hi = conformal_bounds(SingleSiteFunction.on_cell(1, 1), 1, -0.5, 0.5)
    assert np.all((lo <= a) & (a <= hi))
    assert log_ratio_diagnostic(a, region) <= 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.lists(st.floats(0.1, 2.0), min_size=1, max_size=3))
def test_conformal_bounds_hold(seed, vals):
    u = SingleSiteFunction(tuple(((k,), 0, v) for k, v in enumerate(vals)))
    region = build_region(FundamentalCell.lattice(1), box(1, 4))
    win = {(g[0] - k,) for g in region.cells for k in range(len(vals))}
    om = sample_omega(seed, win, (None, DistributionSpec.uniform(-1.0, 1.0)))
    a = conformal_factor(om, region, u)
    lo, hi = conformal_bounds(u, 1, -1.0, 1.0)
    assert np.all(a >= lo * (1 - 1e-12)) and np.all(a <= hi * (1 + 1e-12))


def test_single_site_validation():
    with pytest.raises(ValueError):
        SingleSiteFunction((((1,), 0, 1.0),)).validate(1, 1)  # zero on the fundamental cell
    with pytest.raises(ValueError):
        SingleSiteFunction((((0,), 0, -1.0),))
    f = SingleSiteFunction((((0,), 0, 1.0), ((0,), 1, 0.25), ((1,), 1, 2.0)))
    assert f.kappa(2) == 0.25
    assert f.partition_sums(2) == [1.0, 2.25]


def test_model_window_covers_metric_crossings():
    cell = FundamentalCell.lattice(1)
    u = SingleSiteFunction.on_cell(1, 1)
    model = Model(cell, metric=MetricSpec(DistributionSpec.uniform(-0.3, 0.3), u))
    region = build_region(cell, box(1, 2))
    need = model.required_window(region)
    assert {(-3,), (3,)} <= need
