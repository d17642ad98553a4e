"""Test experiment drivers"""
import numpy as np
import pytest

from subreak import (ExperimentError, InvalidArgumentError, OverlapClass,
                     cat_collapse_time, cat_stability_scan,
                     energy_drift_scan, equilibrium_order_scan,
                     fit_power_law, map_grid, perturbation_study,
                     regime_study, regime_tables, scaling_scan,
                     zero_overlap_non_decreasing)


def test_fit_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_power_law(x, 3.0 * x ** -1.5)
    assert fit.slope == pytest.approx(-1.5)
    assert fit.intercept == pytest.approx(np.log(3.0))
    assert fit.r_squared == pytest.approx(1.0)
    summary = fit.summary('o_fit')
    assert set(summary) == {'o_fit_slope', 'o_fit_intercept',
                            'o_fit_r_squared', 'o_fit_max_residual'}
    with pytest.raises(InvalidArgumentError):
        fit_power_law([1.0], [1.0])
    with pytest.raises(InvalidArgumentError):
        fit_power_law([1.0, 2.0], [1.0, -1.0])


def test_map_grid_keeps_order():
    items = list(range(20))
    assert map_grid(lambda x: x * x, items, threads=4) == \
        [x * x for x in items]
    assert map_grid(lambda x: -x, items) == [-x for x in items]


@pytest.fixture(scope='module')
def scan():
    return scaling_scan([2048, 4096, 8192, 16384], 1e-2, cutoff=64)


def test_collapse_time_scales_inversely_with_size(scan):
    assert scan.fit_slope == pytest.approx(-1.0, abs=0.05)
    assert scan.fit_r_squared >= 0.99
    assert scan.collapse_times[1] / scan.collapse_times[0] == \
        pytest.approx(0.5, abs=0.02)


def test_collapse_time_scales_inversely_with_strength(scan):
    assert scan.dual_n == 8192
    assert len(scan.o_values) == 5
    assert scan.o_fit.slope == pytest.approx(-1.0, abs=0.05)
    assert scan.o_fit.r_squared >= 0.99


def test_scaling_scan_tables(scan):
    tables = scan.tables()
    assert list(tables) == ['n_scan', 'o_scan']
    np.testing.assert_array_equal(tables['n_scan']['n'],
                                  [2048, 4096, 8192, 16384])
    tau_n_o = tables['n_scan']['tau_n_o']
    np.testing.assert_allclose(tau_n_o, tau_n_o[0], rtol=0.05)
    summary = scan.summary()
    assert summary['fit_slope'] == scan.fit_slope
    assert 'o_fit_r_squared' in summary


@pytest.mark.parametrize("n_values", [[2048, 4096, 8192],
                                      [2048, 2500, 3000, 4000]])
def test_scaling_scan_grid_preconditions(n_values):
    with pytest.raises(InvalidArgumentError):
        scaling_scan(n_values, 1e-2)


def test_scaling_scan_rejects_zero_strength():
    with pytest.raises(InvalidArgumentError):
        scaling_scan([2048, 4096, 8192, 16384], 0.0)


def test_no_collapse_within_horizon():
    with pytest.raises(ExperimentError):
        cat_collapse_time(8, 1e-6, cutoff=16)


def test_collapse_time_is_size_independent_in_scaled_units():
    small = cat_collapse_time(2048, 1e-2, cutoff=64)
    large = cat_collapse_time(2048, 2e-2, cutoff=64)
    assert small / large == pytest.approx(2.0, rel=0.02)


def test_energy_drift_vanishes_without_field():
    result = energy_drift_scan([64, 128], 0.0, horizon=50.0, n_samples=50)
    assert np.all(result.max_drift < 1e-10)
    assert np.all(np.isnan(result.collapse_times))
    np.testing.assert_array_equal(result.horizons, [50.0, 50.0])
    assert np.isnan(result.summary()['fit_slope'])


def test_energy_drift_scales_inversely_with_size():
    result = energy_drift_scan([512, 1024, 2048, 4096], 1e-2,
                               n_samples=100)
    assert np.all(result.max_drift > 0)
    assert result.fit.slope == pytest.approx(-1.0, abs=0.15)
    assert np.all(result.max_drift < result.spectral_range)
    np.testing.assert_allclose(result.horizons, 3 * result.collapse_times)
    assert list(result.tables()['drift']) == ['n', 'tau', 'horizon',
                                              'max_drift', 'spectral_range']


def test_energy_drift_preconditions():
    with pytest.raises(InvalidArgumentError):
        energy_drift_scan([64], -1.0)
    with pytest.raises(InvalidArgumentError):
        energy_drift_scan([64], 1e-2, horizon=0.0)


def test_equilibrium_order_collapses_on_scaled_field():
    b_values = np.concatenate([[0.0], np.geomspace(1e-8, 1e-3, 51)])
    result = equilibrium_order_scan([256, 1024, 4096], b_values, cutoff=64)
    assert result.max_spread < 0.05
    assert len(result.n) == 3 * 52
    for size in (256, 1024, 4096):
        order = result.order_normalized[result.n == size]
        assert order[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.diff(order) >= -1e-10)
    np.testing.assert_allclose(result.scaled_field,
                               result.field_b * result.n ** 2 / 8,
                               rtol=1e-12)
    assert result.summary()['truncated_points'] == 0


def test_equilibrium_order_scan_rejects_unsorted_fields():
    with pytest.raises(InvalidArgumentError):
        equilibrium_order_scan([64], [1e-3, 1e-4])
    with pytest.raises(InvalidArgumentError):
        equilibrium_order_scan([64], [-1e-3, 1e-4])


def test_dominant_mode_is_perturbation_independent():
    result = perturbation_study(1024, 1e-3, samples=20, cutoff=64, seed=11)
    assert result.fraction_above >= 0.95
    np.testing.assert_allclose(result.o_parallel, 1e-3, rtol=0.1)
    assert np.all(result.remainder_norm <= 3e-4)
    assert len(result.tables()['samples']['sample']) == 20


def test_perturbation_study_is_reproducible():
    first = perturbation_study(256, 1e-3, samples=5, cutoff=32, seed=3)
    second = perturbation_study(256, 1e-3, samples=5, cutoff=32, seed=3,
                                threads=2)
    np.testing.assert_array_equal(first.overlaps, second.overlaps)
    np.testing.assert_array_equal(first.o_parallel, second.o_parallel)


def test_cat_stability():
    result = cat_stability_scan([16, 512], 1e-2, 1.0)
    np.testing.assert_array_equal(result.selected, [False, True])
    assert result.dominant_weight[1] >= 0.99
    assert result.dominant_weight[0] < 0.9
    assert result.summary() == {'observation_time': 1.0,
                                'selected_count': 1}


def test_cat_stability_preconditions():
    with pytest.raises(InvalidArgumentError):
        cat_stability_scan([16], 1e-2, 0.0)
    with pytest.raises(InvalidArgumentError):
        cat_stability_scan([16], 0.0, 1.0)


def test_regime_study_preconditions():
    with pytest.raises(InvalidArgumentError):
        regime_study([100], 2e-3, initial_weight=0.5)
    with pytest.raises(InvalidArgumentError):
        regime_study([100], 0.0)


def test_zero_overlap_selection_is_slower():
    finite, zero = regime_study([64, 128], 2e-3, cutoff=48)
    assert finite.overlap_class is OverlapClass.FINITE_OVERLAP
    assert zero.overlap_class is OverlapClass.ZERO_OVERLAP
    assert np.all(finite.selection_delays > 0)
    assert np.all(zero.selection_delays > finite.selection_delays)
    assert np.all(np.diff(zero.selection_delays) >= 0)
    assert zero_overlap_non_decreasing(zero)
    ratio = finite.selection_delays[1] / finite.selection_delays[0]
    assert ratio == pytest.approx(0.5, abs=0.02)
    table = regime_tables(finite, zero)['delays']
    np.testing.assert_array_equal(table['n'], [64, 128])
    np.testing.assert_allclose(table['field_parameter'],
                               [2e-3 * 64 ** 2 / 8, 2e-3 * 128 ** 2 / 8],
                               rtol=1e-12)


@pytest.mark.slow
def test_zero_overlap_delays_beyond_trend_window(caplog):
    n_values = [64, 128, 256, 512, 1024]
    with caplog.at_level('WARNING', logger='subreak.experiments'):
        finite, zero = regime_study(n_values, 2e-3, cutoff=48)
    assert np.all(zero.selection_delays > finite.selection_delays)
    fit = fit_power_law(n_values, finite.selection_delays)
    assert fit.slope == pytest.approx(-1.0, abs=0.05)
    assert zero.selection_delays[-1] < zero.selection_delays[1]
    assert zero_overlap_non_decreasing(zero)
    assert not zero_overlap_non_decreasing(zero, max_field=np.inf)
    assert 'zero-overlap delay falls' in caplog.text
