"""Test the fluctuating-field ensemble"""
import pytest

from subreak import (BornEnsembleResult, InvalidArgumentError, Strategy,
                     born_ensemble)


@pytest.fixture(scope='module')
def martingale():
    return born_ensemble(0.7, 1000, 1e-2, n_particles=1024, seed=5)


def test_martingale_bias_reproduces_weights(martingale):
    assert martingale.strategy is Strategy.MARTINGALE_BIAS
    assert martingale.within_ci
    assert martingale.non_absorbed <= 10
    assert martingale.mean_steps > 0


def test_symmetric_flip_misses_weights():
    result = born_ensemble(0.7, 1000, 1e-2, n_particles=1024,
                           strategy='symmetric_flip', seed=5)
    assert result.strategy is Strategy.SYMMETRIC_FLIP
    assert result.frequency_l == pytest.approx(0.561, abs=0.06)
    assert not result.within_ci


@pytest.mark.parametrize("weight, frequency", [(1.0, 1.0), (0.0, 0.0)])
def test_pure_branches_are_absorbed_at_once(weight, frequency):
    result = born_ensemble(weight, 1000, 1e-2, n_particles=1024)
    assert result.frequency_l == frequency
    assert result.ci_halfwidth == 0.0
    assert result.within_ci
    assert result.mean_steps == 0.0


def test_ensemble_is_reproducible():
    first = born_ensemble(0.9, 1000, 1e-2, n_particles=256, cutoff=32,
                          seed=17)
    second = born_ensemble(0.9, 1000, 1e-2, n_particles=256, cutoff=32,
                           seed=17)
    assert first == second


@pytest.mark.parametrize("kwargs", [
    {'weight_initial': 1.5},
    {'trials': 999},
    {'o': 0.0},
    {'absorption': 0.5},
])
def test_ensemble_preconditions(kwargs):
    arguments = {'weight_initial': 0.5, 'trials': 1000, 'o': 1e-2}
    arguments.update(kwargs)
    with pytest.raises(InvalidArgumentError):
        born_ensemble(**arguments)


def test_as_row(martingale):
    row = martingale.as_row()
    assert row['strategy'] == 'martingale_bias'
    assert row['trials'] == 1000
    assert row['within_ci'] is True
    assert list(row) == ['weight_initial', 'strategy', 'trials',
                         'frequency_l', 'ci_halfwidth', 'within_ci',
                         'non_absorbed', 'mean_steps', 'clipped_steps']


def test_confidence_interval():
    result = BornEnsembleResult(trials=1000, weight_initial=0.5,
                                frequency_l=0.52, ci_halfwidth=0.03,
                                strategy=Strategy.WEIGHT_PROPORTIONAL)
    assert result.within_ci
    assert not BornEnsembleResult(1000, 0.5, 0.6, 0.03,
                                  Strategy.SYMMETRIC_FLIP).within_ci


@pytest.mark.slow
@pytest.mark.parametrize("weight", [0.3, 0.5, 0.7, 0.9])
def test_born_rule_acceptance(weight):
    result = born_ensemble(weight, 10000, 1e-2, n_particles=1024)
    assert result.within_ci
