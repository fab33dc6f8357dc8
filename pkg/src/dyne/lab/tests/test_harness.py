#!/bin/env python
""" Unit tests for the dynelab command line and its output files. """
import os
import json
import shutil
import tempfile
import unittest
from dataclasses import replace
from unittest import mock

from dyne.lab import harness
from dyne.lab.config import load_config
from dyne.lab.ensemble import SweepRow
from dyne.lab.harness import (emit_outputs, read_outputs, run_command, main,
                              RunManifest, SWEEP_FIELDS)

HERE = os.path.dirname(__file__)
CONFIG = os.path.join(HERE, 'experiment.yaml')


class test_emit_outputs(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.rows = [{'N': 10.0, 'policy': 'adaptive', 'count': 3,
                      'value': 0.1 + 0.2, 'flag': False},
                     {'N': 50.0, 'policy': 'heterodyne', 'count': 0,
                      'value': 1e-17, 'flag': True}]
        self.fields = ['N', 'policy', 'count', 'value', 'flag']

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_csv(self):
        path = emit_outputs(self.rows, 'csv',
                            os.path.join(self.directory, 'rows.csv'),
                            self.fields)
        with open(path) as fp:
            self.assertEqual(fp.readline(), 'N,policy,count,value,flag\n')
        self.assertEqual(read_outputs(path, 'csv'), self.rows)

    def test_jsonl(self):
        path = emit_outputs(self.rows, 'jsonl',
                            os.path.join(self.directory, 'rows.jsonl'),
                            self.fields)
        self.assertEqual(read_outputs(path, 'jsonl'), self.rows)

    def test_empty(self):
        csv_path = emit_outputs([], 'csv',
                                os.path.join(self.directory, 'e.csv'),
                                self.fields)
        with open(csv_path) as fp:
            self.assertEqual(fp.read(), 'N,policy,count,value,flag\n')
        jsonl_path = emit_outputs([], 'jsonl',
                                  os.path.join(self.directory, 'e.jsonl'),
                                  self.fields)
        self.assertEqual(os.path.getsize(jsonl_path), 0)
        self.assertEqual(read_outputs(csv_path, 'csv'), [])

    def test_unwritable(self):
        path = os.path.join(self.directory, 'missing', 'rows.csv')
        with self.assertRaises(OSError) as cm:
            emit_outputs(self.rows, 'csv', path, self.fields)
        self.assertIn(path, str(cm.exception))

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            emit_outputs(self.rows, 'xml',
                         os.path.join(self.directory, 'rows.xml'),
                         self.fields)


class test_run_command(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.config = load_config(CONFIG)

    def tearDown(self):
        shutil.rmtree(self.directory)

    def out(self, name):
        return os.path.join(self.directory, name)

    def test_traj(self):
        status, manifest = run_command('traj', self.config, self.out('t'))
        self.assertEqual(status, 0)
        self.assertEqual(sorted(manifest.files),
                         ['traj_adaptive.csv', 'traj_adaptive_estimates.csv',
                          'traj_heterodyne.csv',
                          'traj_heterodyne_estimates.csv'])
        steps = read_outputs(self.out('t/traj_adaptive.csv'), 'csv')
        self.assertEqual(len(steps), 2 * 128)
        estimates = read_outputs(self.out('t/traj_adaptive_estimates.csv'),
                                 'csv')
        self.assertEqual([row['estimator'] for row in estimates],
                         ['mark1', 'mark2', 'mark1', 'mark2'])
        self.assertEqual(RunManifest.verify(self.out('t')), [])

    def test_dist(self):
        status, manifest = run_command('dist', self.config, self.out('d'),
                                       fmt='jsonl')
        self.assertEqual(status, 0)
        stats = read_outputs(self.out('d/dist_stats.jsonl'), 'jsonl')
        self.assertEqual([(row['policy'], row['estimator']) for row in stats],
                         [('adaptive', 'mark1'), ('adaptive', 'mark2'),
                          ('heterodyne', 'iq')])
        self.assertTrue(all(row['n'] == 200 for row in stats))
        histogram = read_outputs(self.out('d/dist_histogram.jsonl'), 'jsonl')
        self.assertEqual(len(histogram), 3 * 16)
        with open(self.out('d/manifest.json')) as fp:
            echoed = json.load(fp)
        self.assertEqual(echoed['master_seed'], 20020331)
        self.assertEqual(echoed['config']['trials'], 200)

    def test_reruns_are_identical(self):
        _, first = run_command('dist', self.config, self.out('one'),
                               workers=1)
        _, second = run_command('dist', self.config, self.out('two'),
                                workers=2)
        self.assertEqual(first.files, second.files)
        for name in first.files:
            with open(self.out('one/' + name), 'rb') as one, \
                    open(self.out('two/' + name), 'rb') as two:
                self.assertEqual(one.read(), two.read())

    def test_tampered_file(self):
        run_command('traj', self.config, self.out('t'))
        with open(self.out('t/traj_heterodyne.csv'), 'a') as fp:
            fp.write('extra\n')
        self.assertEqual(RunManifest.verify(self.out('t')),
                         ['traj_heterodyne.csv'])

    def test_sweep(self):
        config = replace(self.config, trials=100)
        status, manifest = run_command('sweep', config, self.out('s'))
        self.assertEqual(status, 0)
        rows = read_outputs(self.out('s/sweep.csv'), 'csv')
        self.assertEqual(len(rows), 4)
        self.assertEqual(list(rows[0]), SWEEP_FIELDS)

    def test_sweep_row_error(self):
        failed = [SweepRow(mean_photon_number=10.0, references={},
                           error='no mean direction')]
        with mock.patch.object(harness, 'sweep_photon_number',
                               return_value=failed):
            status, manifest = run_command('sweep', self.config,
                                           self.out('s'))
        self.assertEqual(status, 2)
        self.assertEqual(manifest.errors, ['N=10.0: no mean direction'])
        self.assertEqual(read_outputs(self.out('s/sweep.csv'), 'csv'), [])

    def test_polar(self):
        config = replace(self.config, ensemble_size=20, n_steps=64)
        status, _ = run_command('polar', config, self.out('p'))
        self.assertEqual(status, 0)
        self.assertEqual(len(read_outputs(self.out('p/polar.csv'), 'csv')), 4)

    def test_unknown_subcommand(self):
        with self.assertRaises(ValueError):
            run_command('plot', self.config, self.out('x'))


class test_main(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_success(self):
        out = os.path.join(self.directory, 'run')
        self.assertEqual(main(['traj', '--config', CONFIG, '--out', out,
                               '--seed', '7', '--workers', '1']), 0)
        with open(os.path.join(out, 'manifest.json')) as fp:
            self.assertEqual(json.load(fp)['master_seed'], 7)

    def test_invalid_config(self):
        path = os.path.join(self.directory, 'bad.yaml')
        with open(path, 'w') as fp:
            fp.write('pulse: {mean_photon_number: -1}\n')
        self.assertEqual(main(['dist', '--config', path, '--out',
                               self.directory]), 1)

    def test_invalid_override(self):
        self.assertEqual(main(['dist', '--config', CONFIG, '--trials', '1',
                               '--out', self.directory]), 1)

    def test_unwritable_output(self):
        blocker = os.path.join(self.directory, 'file')
        with open(blocker, 'w') as fp:
            fp.write('x')
        self.assertEqual(main(['traj', '--config', CONFIG, '--out',
                               blocker, '--workers', '1']), 2)

    def test_missing_config(self):
        self.assertEqual(main(['traj', '--config',
                               os.path.join(self.directory, 'none.yaml')]), 2)

    def test_unknown_subcommand(self):
        with self.assertRaises(SystemExit):
            main(['plot'])


if __name__ == '__main__':
    unittest.main()
