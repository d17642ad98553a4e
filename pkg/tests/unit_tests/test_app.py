"""Test methods in the app package"""
import json

import numpy as np
import pytest

from subreak import DEFAULT_SEED, ConfigError
from subreak.app import (parse_arguments, parse_config, read_main_input,
                         run)


def _write(tmp_path, text, name='run.cfg'):
    path = tmp_path / name
    path.write_text(text)
    return path.as_posix()


def test_parse_config():
    config = parse_config('# header\n'
                          'n_values = 64, 128 # sizes\n'
                          'field_strength = 1e-2\n'
                          'model_kind = lieb_mattis\n'
                          'o_values = [0.1, 0.2]\n'
                          '\n'
                          'run_name = "scan"\n')
    assert config == {'n_values': [64, 128],
                      'field_strength': 0.01,
                      'model_kind': 'lieb_mattis',
                      'o_values': [0.1, 0.2],
                      'run_name': 'scan'}


@pytest.mark.parametrize("text", ['cutoff = 16\ncutoff = 32\n',
                                  'cutoff 16\n',
                                  '= 16\n'])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError, match='line'):
        parse_config(text)


def test_read_main_input_defaults(tmp_path):
    path = _write(tmp_path, 'n_particles = 64\nfield_strength = 0.01\n')
    config = read_main_input(path, 'evolve')
    assert config['time_step'] == 0.01
    assert config['n_steps'] == 1000
    assert config['backend'] == 'scaling_squaring'
    assert config['initial_state'] == 'cat'
    assert config['model_kind'] == 'ladder'
    assert config['cutoff'] == 64
    assert config['reference_field'] == 300.0
    assert config['seed'] == DEFAULT_SEED


def test_subcommand_specific_defaults(tmp_path):
    path = _write(tmp_path, 'n_particles = 1024\nfield_strength = 0.01\n')
    assert read_main_input(path, 'born')['cutoff'] == 48
    path = _write(tmp_path, 'n_values = 100, 200\nfield_strength = 0.01\n')
    assert read_main_input(path, 'regime')['reference_field'] == 20.0
    path = _write(tmp_path, '')
    assert read_main_input(path, 'oracle-check')['n_spins'] == [8]


def test_unknown_key(tmp_path):
    path = _write(tmp_path, 'n_particles = 64\nfeild_strength = 0.01\n')
    with pytest.raises(ConfigError, match='feild_strength'):
        read_main_input(path, 'evolve')


def test_missing_key(tmp_path):
    path = _write(tmp_path, 'n_particles = 64\n')
    with pytest.raises(ConfigError, match='field_strength'):
        read_main_input(path, 'evolve')


@pytest.mark.parametrize("text", [
    'n_particles = many\nfield_strength = 0.01\n',
    'n_particles = 64\nfield_strength = -0.01\n',
    'n_particles = 64\nfield_strength = 0.01\nbackend = rk4\n',
    'n_particles = 64\nfield_strength = 0.01\nrel_tolerance = 0.1\n',
])
def test_invalid_values(tmp_path, text):
    path = _write(tmp_path, text)
    with pytest.raises(ConfigError):
        read_main_input(path, 'evolve')


def test_seed_and_scalar_coercion(tmp_path):
    path = _write(tmp_path, 'n_values = 64\nb_values = 0.001\nseed = 3\n')
    config = read_main_input(path, 'equilibrium')
    assert config['n_values'] == [64]
    assert config['b_values'] == [0.001]
    assert config['seed'] == 3
    assert read_main_input(path, 'equilibrium', seed=11)['seed'] == 11


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match='cannot read'):
        read_main_input((tmp_path / 'absent.cfg').as_posix(), 'evolve')


@pytest.mark.parametrize("argv", [
    ['evolve'],
    ['teleport', '--config', 'run.cfg'],
    ['evolve', '--config', 'run.cfg', '--threads', '0'],
    ['evolve', '--config', 'run.cfg', '--seed', '-1'],
])
def test_parse_arguments_errors(argv):
    with pytest.raises(ConfigError):
        parse_arguments(argv)


def test_parse_arguments():
    args = parse_arguments(['collapse-scan', '--config', 'run.cfg', '-vv',
                            '--threads', '4', '--seed', '5', '--dry-run'])
    assert args.subcommand == 'collapse-scan'
    assert args.threads == 4
    assert args.seed == 5
    assert args.verbose == 2
    assert args.dry_run is True
    assert args.out == '.'


def test_dry_run(tmp_path, capsys):
    path = _write(tmp_path, 'n_particles = 64\nfield_strength = 0.01\n')
    assert run(['evolve', '--config', path, '--dry-run']) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed['n_particles'] == 64
    assert printed['n_steps'] == 1000
    assert list((tmp_path).iterdir()) == [tmp_path / 'run.cfg']


def test_configuration_error_exit_status(tmp_path, capsys):
    path = _write(tmp_path, 'n_particles = 64\nfeild_strength = 0.01\n')
    assert run(['evolve', '--config', path, '--out',
                (tmp_path / 'out').as_posix()]) == 1
    assert 'feild_strength' in capsys.readouterr().err
    assert not (tmp_path / 'out').exists()


def test_experiment_error_exit_status(tmp_path, capsys):
    path = _write(tmp_path, 'n_values = 8, 16, 32, 64\n'
                            'field_strength = 1e-6\n'
                            'cutoff = 16\n')
    status = run(['collapse-scan', '--config', path, '--out',
                  (tmp_path / 'out').as_posix()])
    assert status == 2
    assert 'no collapse' in capsys.readouterr().err


def test_unusable_output_path_exit_status(tmp_path, capsys):
    path = _write(tmp_path, 'n_particles = 64\ncutoff = 16\n')
    occupied = _write(tmp_path, 'not a directory\n', name='out')
    assert run(['spectrum', '--config', path, '--out', occupied]) == 1
    assert 'subreak: error:' in capsys.readouterr().err


def test_unitary_evolve_run(tmp_path):
    path = _write(tmp_path, 'n_particles = 64\n'
                            'field_strength = 0\n'
                            'cutoff = 16\n'
                            'n_steps = 20\n'
                            'time_step = 0.5\n'
                            'initial_state = symmetric\n')
    out = tmp_path / 'out'
    assert run(['evolve', '--config', path, '--out', out.as_posix()]) == 0
    trajectory = list(out.glob('evolve_trajectory_*.csv'))
    assert len(trajectory) == 1
    data = np.genfromtxt(trajectory[0], delimiter=',', names=True)
    assert len(data) == 21
    np.testing.assert_allclose(data['energy'], data['energy'][0], atol=1e-12)
    np.testing.assert_allclose(data['log_raw_norm'], 0.0, atol=1e-12)


def test_reruns_are_byte_identical(tmp_path):
    path = _write(tmp_path, 'n_particles = 64\ncutoff = 16\n')
    first, second = tmp_path / 'first', tmp_path / 'second'
    assert run(['spectrum', '--config', path, '--out', first.as_posix()]) \
        == 0
    assert run(['spectrum', '--config', path, '--out', second.as_posix()]) \
        == 0
    for suffix in ('*.csv', '*.json'):
        for output in first.glob(suffix):
            if output.name == 'manifest.json':
                continue
            assert output.read_bytes() == \
                (second / output.name).read_bytes()


def test_manifest(tmp_path):
    path = _write(tmp_path, 'n_spins = 4\nn_times = 5\n')
    out = tmp_path / 'out'
    assert run(['oracle-check', '--config', path, '--out', out.as_posix(),
                '--seed', '9']) == 0
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['seed'] == 9
    assert len(manifest['config_hash']) == 64
    assert manifest['started'] <= manifest['finished']
    assert all(output.startswith(out.as_posix())
               for output in manifest['outputs'])
    digest = manifest['config_hash'][:12]
    assert (out / f'oracle_check_oracle_{digest}.csv').exists()
    document = json.loads(
        (out / f'oracle_check_{digest}.json').read_text())
    assert document['summary']['max_energy_max_error'] < 1e-10
