from datetime import datetime, timezone
from pathlib import Path

import argparse
import json
import jsonschema
import logging
import sys
import numpy as np
import tables as tb

from subreak import (DEFAULT_SEED, ZERO_TREND_FIELD, Backend, ConfigError,
                     ExperimentResult, PropagatorConfig, Simulation,
                     SubreakError,
                     branch_pair, build_model, cat_state,
                     cat_stability_scan, energy_drift_scan,
                     equilibrium_order_scan, evolve_trajectory, fit_power_law,
                     map_grid, oracle_check, perturbation_study,
                     regime_study, regime_tables, scaling_scan,
                     symmetric_ground_state, zero_overlap_non_decreasing)
from subreak.ensemble import born_ensemble

SUBCOMMANDS = ('spectrum',
               'equilibrium',
               'evolve',
               'collapse-scan',
               'regime',
               'born',
               'energy-drift',
               'oracle-check',
               'perturbation',
               'cat-stability')
MAX_SEED = 2 ** 64 - 1


def run(argv=None):
    """Runs one subcommand and returns the exit status.

    Parameters
    ----------
    argv : list of str, optional
        Command-line arguments without the program name. Defaults to
        ``sys.argv[1:]``.

    Returns
    -------
    status : int
        0 on success, 1 on a configuration error or an unusable output
        path, 2 on any other error.

    """
    try:
        args = parse_arguments(argv)
        _configure_logging(args.verbose)
        config = read_main_input(args.config, args.subcommand, args.seed)
        if args.dry_run:
            print(json.dumps(config, sort_keys=True, indent=2))
            return 0
        simulation = _create_simulation_object(args.subcommand, config,
                                               args.out)
        print(f"Running {args.subcommand} (config {simulation.config_hash[:12]}"
              f", seed {simulation.seed}) ...")
        started = _timestamp()
        tables, summary = _RUNNERS[args.subcommand](config, args.threads)
        result = ExperimentResult(name=args.subcommand,
                                  tables=tables,
                                  summary=summary,
                                  seed=simulation.seed,
                                  config_hash=simulation.config_hash)
        outputs = simulation.store_result(result)
        simulation.write_manifest(started, _timestamp(), outputs)
        print(f"Results written to {simulation.output_path.resolve()}")
    except (ConfigError, OSError, tb.HDF5ExtError) as err:
        print(f'subreak: error: {err}', file=sys.stderr)
        return 1
    except SubreakError as err:
        print(f'subreak: error: {err}', file=sys.stderr)
        return 2
    return 0


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as configuration errors."""

    def error(self, message):
        raise ConfigError(message)


def parse_arguments(argv=None):
    """Parses arguments from command line.

    Parameters
    ----------
    argv : list of str, optional
        Arguments without the program name.

    Returns
    -------
    args : argparse.Namespace
        ``subcommand``, ``config``, ``out``, ``seed``, ``threads``,
        ``dry_run`` and ``verbose``.

    """
    parser = _ArgumentParser(prog='subreak')
    parser.add_argument('subcommand',
                        choices=SUBCOMMANDS,
                        help='experiment to run')
    parser.add_argument('--config',
                        type=str,
                        required=True,
                        help='path of the key = value run configuration')
    parser.add_argument('--out',
                        type=str,
                        default='.',
                        help='output directory')
    parser.add_argument('--seed',
                        type=int,
                        default=None,
                        help='root seed, overrides the configuration')
    parser.add_argument('--threads',
                        type=int,
                        default=1,
                        help='worker threads for experiment grids')
    parser.add_argument('--dry-run',
                        action='store_true',
                        help='print the resolved configuration and exit')
    parser.add_argument('-v', '--verbose',
                        action='count',
                        default=0,
                        help='log progress (-v) or debug details (-vv)')
    args = parser.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed <= MAX_SEED:
        raise ConfigError(f'--seed {args.seed} is not a 64-bit unsigned '
                          'integer')
    if args.threads < 1:
        raise ConfigError(f'--threads {args.threads} must be at least 1')
    return args


def _configure_logging(verbose):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level,
                        format='%(levelname)s %(name)s: %(message)s')
    logging.getLogger('subreak').setLevel(level)


def _timestamp():
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


def _decode_value(raw):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if ',' in raw:
        return [_decode_value(item.strip())
                for item in raw.split(',') if item.strip()]
    return raw


def parse_config(text):
    """Parses a flat ``key = value`` document.

    Values are JSON literals where possible, comma-separated values become
    lists, anything else is kept as a bare string. ``#`` starts a comment.

    Parameters
    ----------
    text : str
        Document text.

    Returns
    -------
    config : dict

    """
    config = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, separator, value = line.partition('=')
        key = key.strip()
        if not separator or not key:
            raise ConfigError(f'line {number}: expected "key = value", '
                              f'got {line!r}')
        if key in config:
            raise ConfigError(f'line {number}: duplicate key {key!r}')
        config[key] = _decode_value(value.strip())
    return config


def _load_schema():
    input_schema = (Path(__file__).parents[0] / 'input_schema.json')
    with open(input_schema) as s:
        return json.load(s)


def _resolve(schema, prop):
    """Follows a local ``$ref`` of a property schema; sibling keywords of
    the reference take precedence."""
    if '$ref' not in prop:
        return prop
    target = schema
    for part in prop['$ref'].lstrip('#/').split('/'):
        target = target[part]
    return {**target, **{k: v for k, v in prop.items() if k != '$ref'}}


def read_main_input(main_inp_file, subcommand, seed=None):
    """Reads a run configuration and resolves it against the input schema.

    Parameters
    ----------
    main_inp_file : str
        Path of the ``key = value`` configuration file.
    subcommand : str
        Subcommand whose schema applies.
    seed : int, optional
        Root seed overriding the configuration.

    Returns
    -------
    config : dict
        Validated configuration with every default filled in and ``seed``
        set.

    Raises
    ------
    ConfigError
        If the file cannot be read, holds keys unknown to the subcommand,
        misses required keys, or a value has the wrong type or range.

    """
    try:
        with open(main_inp_file, encoding='utf-8') as f:
            config = parse_config(f.read())
    except OSError as err:
        raise ConfigError(f'cannot read config {main_inp_file}: '
                          f'{err.strerror}') from err

    schema = _load_schema()
    if subcommand not in schema['$defs']['subcommands']:
        raise ConfigError(f'unknown subcommand {subcommand!r}')
    subschema = schema['$defs']['subcommands'][subcommand]
    properties = {key: _resolve(schema, prop)
                  for key, prop in subschema['properties'].items()}
    unknown = sorted(set(config) - set(properties))
    if unknown:
        raise ConfigError(f'unknown key(s) for {subcommand}: '
                          + ', '.join(unknown))

    for key, prop in properties.items():
        if key not in config and 'default' in prop:
            config[key] = prop['default']
        if prop.get('type') == 'array' and key in config \
                and not isinstance(config[key], list):
            config[key] = [config[key]]
    if seed is not None:
        config['seed'] = seed
    config.setdefault('seed', DEFAULT_SEED)

    try:
        jsonschema.validate(
            instance=config,
            schema={**schema,
                    '$ref': f'#/$defs/subcommands/{subcommand}'})
    except jsonschema.exceptions.ValidationError as err:
        location = '.'.join(str(part) for part in err.absolute_path)
        raise ConfigError(f'{location or subcommand}: {err.message}') \
            from err
    return config


def _create_simulation_object(subcommand, config, output_path):
    """Creates the Simulation object that stores the run outputs."""
    return Simulation(sim_name=config['run_name'],
                      subcommand=subcommand,
                      config={'subcommand': subcommand, **config},
                      seed=config['seed'],
                      output_path=output_path)


def _create_model_object(config, n_particles):
    return build_model(config['model_kind'],
                       int(n_particles),
                       config['cutoff'],
                       config['coupling_j'])


def _run_spectrum(config, threads):
    model = _create_model_object(config, config['n_particles'])
    pair = branch_pair(model, config['reference_field'])
    upper = np.append(np.diag(model.order_param, 1), np.nan)
    tables = {'levels': {'n': np.arange(model.cutoff),
                         'energy': model.energies,
                         'order_upper': upper,
                         'favoured': np.abs(pair.favoured.amplitudes) ** 2,
                         'unfavoured':
                             np.abs(pair.unfavoured.amplitudes) ** 2}}
    summary = {'level_spacing': model.level_spacing,
               'field_scale': model.field_scale,
               'order_bound': model.order_bound,
               'branch_field_b': pair.field_b,
               'branch_reference_field': pair.reference_field,
               'branch_overlap': pair.overlap,
               'truncation_warning': pair.truncation_warning}
    return tables, summary


def _run_equilibrium(config, threads):
    result = equilibrium_order_scan(config['n_values'],
                                    config['b_values'],
                                    config['model_kind'],
                                    config['cutoff'],
                                    config['coupling_j'],
                                    threads)
    return result.tables(), result.summary()


def _initial_state(config, model):
    if config['initial_state'] == 'symmetric':
        return symmetric_ground_state(model), None
    pair = branch_pair(model, config['reference_field'])
    states = {'cat': cat_state(pair),
              'favoured': pair.favoured,
              'unfavoured': pair.unfavoured}
    return states[config['initial_state']], (pair.favoured, pair.unfavoured)


def _run_evolve(config, threads):
    model = _create_model_object(config, config['n_particles'])
    state, branches = _initial_state(config, model)
    propagator_config = PropagatorConfig(
        field_strength_o=config['field_strength'],
        time_step=config['time_step'],
        rel_tolerance=config['rel_tolerance'],
        backend=Backend(config['backend']))
    t_grid = config['time_step'] * np.arange(config['n_steps'] + 1)
    record = evolve_trajectory(state, model, propagator_config, t_grid,
                               branches)
    summary = {'energy_max_drift': float(np.max(np.abs(
                   record.energy - record.energy[0]))),
               'log_raw_norm_final': float(record.log_raw_norm[-1]),
               'order_final': float(record.order_param[-1])}
    return {'trajectory': record.as_columns()}, summary


def _run_collapse_scan(config, threads):
    result = scaling_scan(config['n_values'],
                          config['field_strength'],
                          config['model_kind'],
                          config['cutoff'],
                          config['threshold'],
                          config.get('dual_n'),
                          config.get('o_values'),
                          config['reference_field'],
                          config['coupling_j'],
                          threads)
    return result.tables(), result.summary()


def _run_regime(config, threads):
    finite, zero = regime_study(config['n_values'],
                                config['field_strength'],
                                config['model_kind'],
                                config['cutoff'],
                                config['initial_weight'],
                                config['reference_field'],
                                coupling_j=config['coupling_j'],
                                threads=threads)
    summary = {'zero_exceeds_finite': bool(np.all(
                   zero.selection_delays > finite.selection_delays)),
               'zero_non_decreasing': zero_overlap_non_decreasing(zero),
               'zero_trend_points': int(np.sum(
                   zero.field_parameters <= ZERO_TREND_FIELD))}
    if len(finite.n_values) > 1:
        summary.update(fit_power_law(finite.n_values,
                                     finite.selection_delays)
                       .summary('finite_fit'))
    return regime_tables(finite, zero), summary


def _run_born(config, threads):
    def at_weight(weight):
        return born_ensemble(weight,
                             config['trials'],
                             config['field_strength'],
                             config['model_kind'],
                             config['n_particles'],
                             config['strategy'],
                             config['seed'],
                             config['cutoff'],
                             config['reference_field'],
                             config['step_factor'],
                             config['max_steps'],
                             coupling_j=config['coupling_j'])

    rows = [result.as_row()
            for result in map_grid(at_weight, config['weights'], threads)]
    columns = {key: [row[key] for row in rows] for key in rows[0]}
    summary = {'all_within_ci': all(columns['within_ci'])}
    return {'born': columns}, summary


def _run_energy_drift(config, threads):
    result = energy_drift_scan(config['n_values'],
                               config['field_strength'],
                               config['model_kind'],
                               config['cutoff'],
                               config['horizon'],
                               config['n_samples'],
                               config['reference_field'],
                               config['coupling_j'],
                               threads)
    return result.tables(), result.summary()


def _run_oracle_check(config, threads):
    def at_size(n_spins):
        return oracle_check(n_spins,
                            config['field_strength'],
                            config['horizon'],
                            config['n_times'],
                            config['coupling_j']).as_row()

    rows = map_grid(at_size, config['n_spins'], threads)
    columns = {key: [row[key] for row in rows] for key in rows[0]}
    summary = {f'max_{key}': max(columns[key])
               for key in ('energy_max_error',
                           'order_max_error',
                           'trajectory_max_deviation')}
    return {'oracle': columns}, summary


def _run_perturbation(config, threads):
    result = perturbation_study(config['n_particles'],
                                config['field_strength'],
                                config['epsilon_ratio'],
                                config['samples'],
                                config['model_kind'],
                                config['cutoff'],
                                config['seed'],
                                config['coupling_j'],
                                threads)
    return result.tables(), result.summary()


def _run_cat_stability(config, threads):
    result = cat_stability_scan(config['n_values'],
                                config['field_strength'],
                                config['observation_time'],
                                config['model_kind'],
                                config['cutoff'],
                                config['reference_field'],
                                config['coupling_j'],
                                threads)
    return result.tables(), result.summary()


_RUNNERS = {'spectrum': _run_spectrum,
            'equilibrium': _run_equilibrium,
            'evolve': _run_evolve,
            'collapse-scan': _run_collapse_scan,
            'regime': _run_regime,
            'born': _run_born,
            'energy-drift': _run_energy_drift,
            'oracle-check': _run_oracle_check,
            'perturbation': _run_perturbation,
            'cat-stability': _run_cat_stability}
