import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import tables as tb

from subreak.version import __version__


def canonical_json(config):
    """Canonical JSON text of a configuration: sorted keys, no
    whitespace."""
    return json.dumps(config, sort_keys=True, separators=(',', ':'))


def config_hash(config):
    """SHA-256 hex digest of the canonical configuration."""
    return hashlib.sha256(canonical_json(config).encode('utf-8')).hexdigest()


def _plain(value):
    """Converts numpy scalars to Python scalars; non-finite floats become
    None."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    return value


def format_cell(value):
    """CSV text of one value. Floats keep 17 significant digits."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '%.17g' % value
    return str(value)


def _rows(columns):
    # lists may mix types (summary values) and are kept element-wise
    arrays = [column if isinstance(column, list)
              else np.atleast_1d(np.asarray(column))
              for column in columns.values()]
    return list(zip(*arrays))


@dataclass
class RunManifest:
    """Provenance record of one run.

    Attributes
    ----------
    config_hash : str
        SHA-256 digest of the resolved configuration.
    seed : int
        Root seed of the run.
    tool_version : str
        Version of subreak that produced the outputs.
    started, finished : str
        ISO-8601 UTC timestamps.
    outputs : list of str
        Emitted file paths.

    """
    config_hash: str
    seed: int
    tool_version: str = __version__
    started: str = ''
    finished: str = ''
    outputs: list = field(default_factory=list)

    def write(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(asdict(self), f, sort_keys=True, indent=2)
            f.write('\n')


class Simulation():
    """Class for handling the outputs of one run. Contains the run name,
    the resolved configuration and the output directory, and methods to
    store result tables as CSV, JSON and in the HDF5 database, and to
    write the run manifest.

    """

    def __init__(
            self,
            sim_name="subreak",
            subcommand="run",
            config=None,
            seed=0,
            output_path=".",
            db_name="subreak.h5",
            compression_params=tb.Filters(complevel=9,
                                          complib='blosc',
                                          fletcher32=True),
    ):
        """Initializes the Simulation object.

        Parameters
        ----------
        sim_name : str
            Name to identify the run.
        subcommand : str
            Experiment that produced the results.
        config : dict
            Resolved configuration; its digest names every output.
        seed : int
            Root seed of the run.
        output_path : str or Path
            Output directory, created if missing.
        db_name : str
            File name of the HDF5 database inside ``output_path``.
        compression_params : Pytables filter object
            Compression parameters for HDF5 database.

        """
        self.sim_name = sim_name
        self.subcommand = subcommand
        self.config = {} if config is None else config
        self.seed = seed
        self.output_path = Path(output_path)
        self.db_path = self.output_path / db_name
        self.compression_params = compression_params
        self.config_hash = config_hash(self.config)

    @property
    def stem(self):
        return self.subcommand.replace('-', '_')

    def _file_name(self, table, suffix):
        return self.output_path / \
            f'{self.stem}_{table}_{self.config_hash[:12]}{suffix}'

    def store_result(self, result):
        """Writes result tables and summary as CSV and JSON, and appends
        them to the HDF5 database.

        Parameters
        ----------
        result : ExperimentResult
            Result of the run.

        Returns
        -------
        outputs : list of str
            Paths of the written files, in writing order.

        """
        self.output_path.mkdir(parents=True, exist_ok=True)
        outputs = []
        for name, columns in result.tables.items():
            outputs.append(self.write_csv(name, columns))
        if result.summary:
            outputs.append(self.write_csv(
                'summary', {'key': list(result.summary),
                            'value': list(result.summary.values())}))
        outputs.append(self.write_json(result))
        self.store_tables(result)
        outputs.append(self.db_path.as_posix())
        return outputs

    def write_csv(self, table, columns):
        """Writes one table with a header row."""
        path = self._file_name(table, '.csv')
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(list(columns))
            for row in _rows(columns):
                writer.writerow([format_cell(value) for value in row])
        return path.as_posix()

    def write_json(self, result):
        """Writes the tables, summary, seed and config hash as one JSON
        document with sorted keys."""
        document = {
            'config_hash': self.config_hash,
            'name': self.sim_name,
            'subcommand': self.subcommand,
            'seed': self.seed,
            'summary': {key: _plain(value)
                        for key, value in result.summary.items()},
            'tables': {name: {'columns': list(columns),
                              'rows': [[_plain(value) for value in row]
                                       for row in _rows(columns)]}
                       for name, columns in result.tables.items()}}
        path = self.output_path / f'{self.stem}_{self.config_hash[:12]}.json'
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(document, f, sort_keys=True, indent=1,
                      allow_nan=False)
            f.write('\n')
        return path.as_posix()

    def store_tables(self, result):
        """Stores the result tables in the HDF5 database, one group per
        subcommand. A previous group of the same subcommand is replaced."""
        db = tb.open_file(
            self.db_path.as_posix(),
            mode='a',
            filters=self.compression_params)
        try:
            if hasattr(db.root, self.stem):
                db.remove_node(db.root, self.stem, recursive=True)
            group = db.create_group(db.root,
                                    self.stem,
                                    f'{self.subcommand} results')
            group._v_attrs.config_hash = self.config_hash
            group._v_attrs.seed = self.seed
            group._v_attrs.tool_version = __version__
            for name, columns in result.tables.items():
                db.create_table(group,
                                name,
                                _structured(columns),
                                f'{name} table')
            for key, value in result.summary.items():
                setattr(group._v_attrs, f'summary_{key}', value)
        finally:
            db.close()

    def write_manifest(self, started, finished, outputs):
        """Writes ``manifest.json`` into the output directory."""
        manifest = RunManifest(config_hash=self.config_hash,
                               seed=self.seed,
                               started=started,
                               finished=finished,
                               outputs=list(outputs))
        path = self.output_path / 'manifest.json'
        manifest.write(path)
        return manifest


def _structured(columns):
    """Numpy record array of a table for pytables."""
    arrays = []
    dtype = []
    for name, column in columns.items():
        column = np.atleast_1d(np.asarray(column))
        if column.dtype.kind in 'US':
            column = column.astype('S64')
        elif column.dtype.kind == 'O':
            column = column.astype(float)
        arrays.append(column)
        dtype.append((name, column.dtype))
    return np.rec.fromarrays(arrays, dtype=dtype)


__all__ = ['RunManifest',
           'Simulation',
           'canonical_json',
           'config_hash',
           'format_cell']
