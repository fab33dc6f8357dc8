"""Batch command line and output files

    dynelab <traj|dist|sweep|polar> [--config PATH] [--preset NAME]
            [--seed U64] [--trials N] [--workers K] [--out DIR]
            [--format csv|jsonl] [--verbose]

Subcommands

    traj   per-step photocurrent and LO phase of a few pulses, per policy
    dist   estimator statistics and histograms of every policy at one N
    sweep  adaptive against heterodyne variance over a photon-number grid
    polar  adaptive variance against fixed signal phase

Every run writes a ``manifest.json`` next to its data files, echoing the
configuration and seed and listing a sha256 checksum per file.

Exit status: 0 success, 1 invalid configuration, 2 runtime or I/O error
(including ensemble errors recorded in the manifest).
"""

import os
import sys
import csv
import json
import time
import logging
import argparse
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

import dyne.lab
from dyne.lab.config import load_config, FORMATS
from dyne.lab.engine import simulate_batch
from dyne.lab.ensemble import run_ensemble, sweep_photon_number, phase_study
from dyne.lab.errors import ConfigError, DyneError
from dyne.lab.models import RngStream
from dyne.lab.stats import reference_curves
from dyne.lab.utils import default_workers, file_checksum

# create a logger for this module
log = logging.getLogger(__name__)

SUBCOMMANDS = ('traj', 'dist', 'sweep', 'polar')
MANIFEST = 'manifest.json'

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

# column order of every emitted table
TRAJ_FIELDS = ['trajectory', 'step', 'time', 'lo_phase', 'charge']
TRAJ_ESTIMATE_FIELDS = ['trajectory', 'estimator', 'phi_hat', 'magnitude',
                        'ambiguous', 'true_phase', 'initial_lo_phase']
DIST_FIELDS = ['N', 'policy', 'estimator', 'n', 'circular_mean',
               'holevo_variance', 'wrapped_variance', 'resultant_length',
               'ambiguous_count', 'stderr', 'ensemble_variance',
               'ensemble_stderr', 'ensembles', 'tail_fraction',
               'interquartile_width', 'photon_number', 'het_limit',
               'fund_limit']
HISTOGRAM_FIELDS = ['policy', 'estimator', 'bin_lower', 'bin_upper', 'count']
SWEEP_FIELDS = ['N', 'policy', 'estimator', 'wrapped_variance',
                'holevo_variance', 'stderr', 'ensemble_variance', 'het_limit',
                'het_absolute', 'fund_limit', 'ambiguous_count']
POLAR_FIELDS = ['phase', 'adaptive_variance', 'adaptive_stderr',
                'heterodyne_variance', 'heterodyne_band_lower',
                'heterodyne_band_upper', 'slope', 'slope_stderr']


def _plain(value):
    '''numpy scalars to python scalars'''
    if isinstance(value, np.generic):
        return value.item()
    return value


def emit_outputs(rows, fmt, path, fields):
    '''Write rows as CSV (header row first) or JSON lines

    Floats are written in their shortest round-trip representation, so the
    files parse back to identical values.

    Arguments
    ---------

        rows: iterable of dicts

        fmt (str): ``csv`` or ``jsonl``

        path (str): destination file

        fields (list): column names, in order

    Raises
    ------

        OSError: the file could not be written, with its path attached
    '''
    if fmt not in FORMATS:
        raise ValueError('Unknown output format {f!r}'.format(f=fmt))
    try:
        with open(path, 'w', newline='') as fp:
            if fmt == 'csv':
                writer = csv.DictWriter(fp, fieldnames=fields,
                                        lineterminator='\n')
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: _plain(row.get(k)) for k in fields})
            else:
                for row in rows:
                    fp.write(json.dumps({k: _plain(row.get(k))
                                         for k in fields}))
                    fp.write('\n')
    except OSError as e:
        raise OSError(e.errno, 'Could not write output: {m}'.format(
            m=e.strerror or e), os.fspath(path)) from e
    log.info("Wrote '{p}'".format(p=path))
    return path


def _parse_cell(text):
    if text == '':
        return None
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    if text in ('True', 'False'):
        return text == 'True'
    return text


def read_outputs(path, fmt):
    '''Parse a file written by :func:`emit_outputs` back into dicts'''
    with open(path, newline='') as fp:
        if fmt == 'csv':
            return [{k: _parse_cell(v) for k, v in row.items()}
                    for row in csv.DictReader(fp)]
        return [json.loads(line) for line in fp if line.strip()]


@dataclass
class RunManifest:
    '''What a run was asked to do and what it wrote'''

    subcommand: str
    config: dict
    master_seed: int
    version: str = dyne.lab.__version__
    files: Dict[str, str] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    workers: int = 1
    started: float = 0.0
    finished: float = 0.0

    def add(self, path):
        self.files[os.path.basename(path)] = file_checksum(path)

    def as_dict(self):
        return {'subcommand': self.subcommand,
                'config': self.config,
                'master_seed': self.master_seed,
                'version': self.version,
                'files': dict(sorted(self.files.items())),
                'errors': list(self.errors),
                'workers': self.workers,
                'started': self.started,
                'finished': self.finished,
                'wall_seconds': self.finished - self.started}

    def write(self, directory):
        path = os.path.join(directory, MANIFEST)
        try:
            with open(path, 'w') as fp:
                json.dump(self.as_dict(), fp, indent=2, sort_keys=True)
                fp.write('\n')
        except OSError as e:
            raise OSError(e.errno, 'Could not write manifest: {m}'.format(
                m=e.strerror or e), path) from e
        return path

    @staticmethod
    def verify(directory):
        '''Names of listed files whose checksum no longer matches'''
        with open(os.path.join(directory, MANIFEST)) as fp:
            listed = json.load(fp)['files']
        mismatched = []
        for name, checksum in listed.items():
            path = os.path.join(directory, name)
            if not os.path.exists(path) or file_checksum(path) != checksum:
                mismatched.append(name)
        return mismatched


def _path(directory, name, fmt):
    return os.path.join(directory, '{n}.{e}'.format(n=name, e=fmt))


def _run_traj(config, directory, fmt, workers, manifest):
    indices = list(range(config.traj_count))
    for policy in config.policies:
        block = simulate_batch(config.pulse, config.noise, config.loop,
                               policy, config.n_steps,
                               [RngStream(config.master_seed, i)
                                for i in indices],
                               record_full=True)
        steps, estimates = [], []
        for i in indices:
            steps.extend(block.record(i).rows(trajectory=i))
            for kind, result in block.estimate(i).items():
                estimates.append({'trajectory': i,
                                  'estimator': kind.value,
                                  'phi_hat': result.phi_hat,
                                  'magnitude': result.magnitude,
                                  'ambiguous': result.ambiguous,
                                  'true_phase': float(block.true_phase[i]),
                                  'initial_lo_phase':
                                      float(block.initial_lo_phase[i])})
        name = 'traj_{t}'.format(t=policy.token)
        manifest.add(emit_outputs(steps, fmt, _path(directory, name, fmt),
                                  TRAJ_FIELDS))
        manifest.add(emit_outputs(estimates, fmt,
                                  _path(directory, name + '_estimates', fmt),
                                  TRAJ_ESTIMATE_FIELDS))


def _run_dist(config, directory, fmt, workers, manifest):
    report = run_ensemble(config, workers=workers)
    n = config.pulse.mean_photon_number
    references = (reference_curves(n, config.noise) if n > 0
                  else {'heterodyne_limit': None, 'fundamental_limit': None})
    stats, histograms = [], []
    for result in report:
        row = {'N': n,
               'het_limit': references['heterodyne_limit'],
               'fund_limit': references['fundamental_limit']}
        row.update(result.as_dict())
        stats.append(row)
        for bin_row in result.histogram.rows():
            bin_row.update(policy=result.policy,
                           estimator=result.estimator.value)
            histograms.append(bin_row)
    manifest.add(emit_outputs(stats, fmt, _path(directory, 'dist_stats', fmt),
                              DIST_FIELDS))
    manifest.add(emit_outputs(histograms, fmt,
                              _path(directory, 'dist_histogram', fmt),
                              HISTOGRAM_FIELDS))


def _run_sweep(config, directory, fmt, workers, manifest):
    rows = sweep_photon_number(config, workers=workers)
    for row in rows:
        if row.error:
            manifest.errors.append('N={n}: {e}'.format(
                n=row.mean_photon_number, e=row.error))
    table = [line for row in rows for line in row.rows()]
    manifest.add(emit_outputs(table, fmt, _path(directory, 'sweep', fmt),
                              SWEEP_FIELDS))


def _run_polar(config, directory, fmt, workers, manifest):
    study = phase_study(config, workers=workers)
    log.info('Adaptive variance slope against phase: {s:.3g} +/- '
             '{e:.3g}'.format(s=study.slope, e=study.slope_stderr))
    manifest.add(emit_outputs(study.rows(), fmt,
                              _path(directory, 'polar', fmt), POLAR_FIELDS))


_COMMANDS = {
    'traj': _run_traj,
    'dist': _run_dist,
    'sweep': _run_sweep,
    'polar': _run_polar,
}


def run_command(subcommand, config, output_dir=None, fmt=None, workers=1):
    '''Run one subcommand and write its files plus the manifest

    Returns
    -------

        (exit status, RunManifest)

    Raises
    ------

        OSError: output could not be written
        DyneError: the run itself failed
    '''
    if subcommand not in _COMMANDS:
        raise ValueError('Unknown subcommand {s!r}, expected one of '
                         '{c}'.format(s=subcommand, c=', '.join(SUBCOMMANDS)))
    directory = output_dir or config.output_directory
    fmt = fmt or config.output_format
    os.makedirs(directory, exist_ok=True)

    manifest = RunManifest(subcommand=subcommand, config=config.as_dict(),
                           master_seed=config.master_seed, workers=workers,
                           started=time.time())
    log.info("Running '{s}' into '{d}' (seed {seed}, {w} workers)".format(
        s=subcommand, d=directory, seed=config.master_seed, w=workers))
    _COMMANDS[subcommand](config, directory, fmt, workers, manifest)
    manifest.finished = time.time()
    manifest.write(directory)

    if manifest.errors:
        for error in manifest.errors:
            log.error(error)
        return EXIT_RUNTIME, manifest
    return EXIT_OK, manifest


def build_parser():
    parser = argparse.ArgumentParser(
        prog='dynelab',
        description='Simulate adaptive homodyne and heterodyne phase '
                    'estimation on weak coherent pulses')
    parser.add_argument('subcommand', choices=SUBCOMMANDS)
    parser.add_argument('--config', help='YAML configuration file')
    parser.add_argument('--preset', choices=('ideal', 'paper-apparatus'))
    parser.add_argument('--seed', type=int, help='master seed (unsigned '
                                                 '64-bit)')
    parser.add_argument('--trials', type=int)
    parser.add_argument('--workers', type=int,
                        help='worker processes (default: $DYNELAB_WORKERS or '
                             'the CPU count)')
    parser.add_argument('--out', help='output directory')
    parser.add_argument('--format', choices=FORMATS)
    parser.add_argument('--verbose', action='store_true')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    overrides = {}
    if args.seed is not None:
        overrides['master_seed'] = args.seed
    if args.trials is not None:
        overrides['trials'] = args.trials
    if args.out is not None:
        overrides.setdefault('output', {})['directory'] = args.out
    if args.format is not None:
        overrides.setdefault('output', {})['format'] = args.format

    try:
        config = load_config(args.config, preset=args.preset,
                             overrides=overrides)
    except ConfigError as e:
        log.error('Invalid configuration: {e}'.format(e=e))
        return EXIT_CONFIG
    except OSError as e:
        log.error('Could not read configuration: {e}'.format(e=e))
        return EXIT_RUNTIME

    workers = args.workers if args.workers else default_workers()
    try:
        status, _ = run_command(args.subcommand, config, workers=workers)
    except (OSError, DyneError) as e:
        log.error("'{s}' failed: {e}".format(s=args.subcommand, e=e))
        return EXIT_RUNTIME
    return status


if __name__ == '__main__':
    sys.exit(main())
