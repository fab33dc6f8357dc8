#!/bin/env python
""" Unit tests for the experiment configuration. """
import os
import math
import pathlib
import unittest

from dyne.lab import Dyne
from dyne.lab.config import load_config, resolve, ExperimentConfig
from dyne.lab.errors import ConfigError

HERE = os.path.dirname(__file__)


class test_defaults(unittest.TestCase):

    def test_minimal_document(self):
        config = load_config('pulse: {mean_photon_number: 50}\n'
                             'policies: [{kind: adaptive}]\n')
        self.assertEqual(config.pulse.mean_photon_number, 50.0)
        self.assertEqual(config.noise.efficiency, 1.0)
        self.assertEqual(config.noise.electronic_noise_ratio, 0.0)
        self.assertTrue(math.isinf(config.loop.slew_limit))
        self.assertEqual(config.loop.delay_steps, 0)
        self.assertIsNone(config.loop.initial_lo_phase)
        self.assertEqual(config.n_steps, 4096)
        self.assertEqual(config.policies, (Dyne('adaptive'),))

    def test_no_document(self):
        self.assertEqual(load_config(), ExperimentConfig())
        self.assertEqual(load_config(''), ExperimentConfig())

    def test_fixture_file(self):
        path = os.path.join(HERE, 'experiment.yaml')
        config = load_config(path)
        self.assertEqual(config, load_config(pathlib.Path(path)))
        self.assertEqual(config.pulse.true_phase, 0.7)
        self.assertEqual(config.policy('heterodyne').describe(),
                         {'kind': 'heterodyne', 'beat_cycles': 90.0})
        self.assertEqual(config.block_size, 64)
        self.assertEqual(config.phase_rule, 'fixed')
        self.assertEqual(config.photon_numbers, (10.0, 50.0))
        with self.assertRaises(LookupError):
            config.policy('fixed')

    def test_echo_reloads(self):
        config = load_config(os.path.join(HERE, 'experiment.yaml'))
        self.assertEqual(resolve(config.as_dict()).as_dict(), config.as_dict())


class test_presets(unittest.TestCase):

    def test_apparatus_preset(self):
        config = load_config(preset='paper-apparatus')
        self.assertAlmostEqual(config.noise.electronic_noise_ratio,
                               10 ** -0.6)
        self.assertAlmostEqual(config.loop.slew_product, 75.0)
        self.assertAlmostEqual(config.loop.bandwidth_product, 75.0)
        self.assertEqual(config.policy('heterodyne').describe(),
                         {'kind': 'heterodyne', 'beat_cycles': 90.0})
        self.assertEqual(config.ensemble_size, 150)
        self.assertEqual(config.preset, 'paper-apparatus')

    def test_document_wins_over_preset(self):
        config = load_config('preset: paper-apparatus\n'
                             'loop: {slew_product: 25}\n')
        self.assertAlmostEqual(config.loop.slew_product, 25.0)
        self.assertAlmostEqual(config.noise.electronic_noise_ratio,
                               10 ** -0.6)

    def test_ideal(self):
        self.assertTrue(math.isinf(
            load_config(preset='ideal').loop.slew_limit))
        self.assertTrue(load_config(preset='ideal').loop.ideal)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError) as cm:
            load_config(preset='lab-bench')
        self.assertEqual(cm.exception.key, 'preset')


class test_overrides(unittest.TestCase):

    def test_seed_and_trials(self):
        config = load_config(os.path.join(HERE, 'experiment.yaml'),
                             overrides={'master_seed': 5, 'trials': 10,
                                        'output': {'format': 'jsonl'}})
        self.assertEqual(config.master_seed, 5)
        self.assertEqual(config.trials, 10)
        self.assertEqual(config.output_format, 'jsonl')
        self.assertEqual(config.output_directory, 'out')


class test_errors(unittest.TestCase):

    def assertKey(self, text, key):
        with self.assertRaises(ConfigError) as cm:
            load_config(text)
        self.assertEqual(cm.exception.key, key)
        self.assertIn(key, str(cm.exception))
        return cm.exception

    def test_negative_photon_number(self):
        error = self.assertKey('pulse: {mean_photon_number: -1}\n',
                               'pulse.mean_photon_number')
        self.assertIn('mean_photon_number', str(error))

    def test_unknown_keys(self):
        self.assertKey('noise: {gain: 2}\n', 'noise.gain')
        self.assertKey('colour: blue\n', 'colour')
        self.assertKey('policies: [{kind: adaptive, beat_cycles: 3}]\n',
                       'policies[0].beat_cycles')

    def test_bad_values(self):
        self.assertKey('noise: {efficiency: 0}\n', 'noise.efficiency')
        self.assertKey('noise: {electronic_noise_ratio: -0.5}\n',
                       'noise.electronic_noise_ratio')
        self.assertKey('loop: {slew_product: 0}\n', 'loop.slew_product')
        self.assertKey('loop: {bandwidth_product: -3}\n',
                       'loop.bandwidth_product')
        self.assertKey('loop: {delay_steps: 1.5}\n', 'loop.delay_steps')
        self.assertKey('grid: {n_steps: 1}\n', 'grid.n_steps')
        self.assertKey('trials: true\n', 'trials')
        self.assertKey('phase_rule: sometimes\n', 'phase_rule')
        self.assertKey('dist: {tail_threshold: 3.5}\n', 'dist.tail_threshold')
        self.assertKey('sweep: {photon_numbers: [50, 10]}\n',
                       'sweep.photon_numbers')
        self.assertKey('output: {format: xml}\n', 'output.format')
        self.assertKey('master_seed: -3\n', 'master_seed')

    def test_bad_policies(self):
        self.assertKey('policies: [{kind: canonical}]\n', 'policies[0].kind')
        self.assertKey('policies: [adaptive, {kind: het, beat_cycles: 0}]\n',
                       'policies[1]')
        self.assertKey('policies: []\n', 'policies')

    def test_unparsable(self):
        with self.assertRaises(ConfigError):
            load_config('pulse: {mean_photon_number: [\n')
        with self.assertRaises(ConfigError):
            load_config('- just\n- a list\n')


if __name__ == '__main__':
    unittest.main()
