"""Experiment configuration

Configurations are YAML documents. Every section is optional; missing keys
take the documented defaults, unknown keys are rejected and every error names
the dotted key at fault.

YAML Example
------------

    preset: paper-apparatus
    pulse:
        mean_photon_number: 50
        true_phase: 0.0
    noise:
        efficiency: 1.0
        electronic_noise_ratio: 0.0
    loop:
        slew_product: .inf
        bandwidth_product: .inf
        delay_steps: 0
        initial_lo_phase: uniform
    policies:
        - kind: adaptive
        - kind: heterodyne
          beat_cycles: 90
    grid:
        n_steps: 4096
    trials: 2000
    ensemble_size: 150
    phase_rule: random-per-ensemble
    master_seed: 0
    sweep:
        photon_numbers: [10, 50, 300]
    output:
        directory: out
        format: csv
"""

import os
import copy
import math
import numbers
import logging
import pathlib
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import yaml

from dyne.lab import Dyne
from dyne.lab.errors import ConfigError, DomainError
from dyne.lab.models import (PulseParams, NoiseModel, LoopModel,
                             DEFAULT_DURATION)
from dyne.lab.engine import DEFAULT_N_STEPS

# create a logger for this module
log = logging.getLogger(__name__)

PHASE_RULES = ('fixed', 'random-per-ensemble')
WEIGHTINGS = ('ensemble', 'trial')
FORMATS = ('csv', 'jsonl')

# allowed keys per section; None marks a scalar top-level key
SCHEMA = {
    'preset': None,
    'pulse': ('mean_photon_number', 'true_phase', 'duration'),
    'noise': ('efficiency', 'electronic_noise_ratio'),
    'loop': ('slew_product', 'slew_limit', 'bandwidth_product', 'delay_steps',
             'initial_lo_phase'),
    'policies': None,
    'grid': ('n_steps', 'block_size'),
    'trials': None,
    'ensemble_size': None,
    'phase_rule': None,
    'ensemble_weighting': None,
    'master_seed': None,
    'traj': ('count',),
    'dist': ('n_bins', 'tail_threshold'),
    'sweep': ('photon_numbers',),
    'polar': ('n_phases', 'ensembles_per_phase'),
    'output': ('directory', 'format'),
}

POLICY_KEYS = {
    'adaptive': (),
    'heterodyne': ('beat_cycles',),
    'fixed': ('phase',),
}

PRESETS = {
    'ideal': {},
    # 6 dB shot-noise clearance, 1.5 MHz slew-limited feedback bandwidth and
    # 1.8 MHz detuning over a 50 us pulse, ensembles of 150 pulses
    'paper-apparatus': {
        'pulse': {'duration': 50e-6},
        'noise': {'electronic_noise_ratio': 10 ** (-6 / 10.0)},
        'loop': {'slew_product': 75, 'bandwidth_product': 75},
        'policies': [{'kind': 'adaptive'},
                     {'kind': 'heterodyne', 'beat_cycles': 90}],
        'ensemble_size': 150,
    },
}

DEFAULT_POLICIES = ({'kind': 'adaptive'},
                    {'kind': 'heterodyne', 'beat_cycles': 90.0})


@dataclass(frozen=True)
class ExperimentConfig:
    '''Fully validated experiment description'''

    pulse: PulseParams = field(
        default_factory=lambda: PulseParams(mean_photon_number=50.0))
    noise: NoiseModel = field(default_factory=NoiseModel)
    loop: LoopModel = field(default_factory=LoopModel)
    policies: Tuple[Dyne, ...] = field(
        default_factory=lambda: tuple(Dyne.from_dict(p)
                                      for p in DEFAULT_POLICIES))
    n_steps: int = DEFAULT_N_STEPS
    block_size: int = 1024
    trials: int = 2000
    ensemble_size: int = 150
    phase_rule: str = 'random-per-ensemble'
    ensemble_weighting: str = 'ensemble'
    master_seed: int = 0
    traj_count: int = 3
    n_bins: int = 64
    tail_threshold: float = 2.5
    photon_numbers: Tuple[float, ...] = (10.0, 50.0, 300.0)
    n_phases: int = 12
    ensembles_per_phase: int = 20
    output_directory: str = 'out'
    output_format: str = 'csv'
    preset: Optional[str] = None

    def policy(self, token):
        '''First configured policy declared under ``token``'''
        for policy in self.policies:
            if policy.token == token:
                return policy
        raise LookupError("No '{t}' policy configured".format(t=token))

    def with_photon_number(self, mean_photon_number):
        return replace(self, pulse=replace(
            self.pulse, mean_photon_number=mean_photon_number))

    def with_phase(self, true_phase):
        return replace(self, pulse=replace(self.pulse, true_phase=true_phase))

    def as_dict(self):
        '''JSON-safe echo, loadable again by :func:`load_config`'''
        slew = self.loop.slew_product
        bandwidth = self.loop.bandwidth_product
        return {
            'pulse': {'mean_photon_number': self.pulse.mean_photon_number,
                      'true_phase': self.pulse.true_phase,
                      'duration': self.pulse.duration},
            'noise': {'efficiency': self.noise.efficiency,
                      'electronic_noise_ratio':
                          self.noise.electronic_noise_ratio},
            'loop': {'slew_product': 'inf' if math.isinf(slew) else slew,
                     'bandwidth_product': ('inf' if math.isinf(bandwidth)
                                           else bandwidth),
                     'delay_steps': self.loop.delay_steps,
                     'initial_lo_phase': ('uniform'
                                          if self.loop.initial_lo_phase is None
                                          else self.loop.initial_lo_phase)},
            'policies': [p.describe() for p in self.policies],
            'grid': {'n_steps': self.n_steps, 'block_size': self.block_size},
            'trials': self.trials,
            'ensemble_size': self.ensemble_size,
            'phase_rule': self.phase_rule,
            'ensemble_weighting': self.ensemble_weighting,
            'master_seed': self.master_seed,
            'traj': {'count': self.traj_count},
            'dist': {'n_bins': self.n_bins,
                     'tail_threshold': self.tail_threshold},
            'sweep': {'photon_numbers': list(self.photon_numbers)},
            'polar': {'n_phases': self.n_phases,
                      'ensembles_per_phase': self.ensembles_per_phase},
            'output': {'directory': self.output_directory,
                       'format': self.output_format},
        }


def _merge(base, update):
    '''Deep merge of mappings; lists and scalars in ``update`` win'''
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _number(value, key, integer=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError('expected a number, got {v!r}'.format(v=value),
                          key=key)
    if integer:
        if not float(value).is_integer():
            raise ConfigError('expected an integer, got {v!r}'.format(v=value),
                              key=key)
        return int(value)
    if not math.isfinite(value):
        raise ConfigError('expected a finite number, got {v!r}'.format(v=value),
                          key=key)
    return float(value)


def _at_least(value, minimum, key, integer=True):
    value = _number(value, key, integer=integer)
    if value < minimum:
        raise ConfigError('must be >= {m}, got {v}'.format(m=minimum, v=value),
                          key=key)
    return value


def _choice(value, choices, key):
    if value not in choices:
        raise ConfigError('expected one of {c}, got {v!r}'.format(
            c=', '.join(choices), v=value), key=key)
    return value


def _section(document, name):
    section = document.get(name, {})
    if section is None:
        return {}
    if not isinstance(section, dict):
        raise ConfigError('expected a mapping', key=name)
    for key in section:
        if key not in SCHEMA[name]:
            raise ConfigError('unknown key', key='{s}.{k}'.format(s=name,
                                                                   k=key))
    return section


def _build(component, key, **kwargs):
    '''Instantiate a component, turning domain errors into ConfigError'''
    try:
        return component(**kwargs)
    except DomainError as e:
        raise ConfigError(str(e), key=key) from None


def _slew_product(value, key):
    if value is None:
        return math.inf
    if isinstance(value, str) and value.lower() in ('inf', 'infinity'):
        return math.inf
    if isinstance(value, float) and value == math.inf:
        return math.inf
    value = _number(value, key)
    if not value > 0:
        raise ConfigError('must be positive, got {v}'.format(v=value), key=key)
    return value


def _policies(value):
    if not isinstance(value, list) or not value:
        raise ConfigError('expected a non-empty list of policies',
                          key='policies')
    policies = []
    for position, spec in enumerate(value):
        key = 'policies[{i}]'.format(i=position)
        if isinstance(spec, str):
            spec = {'kind': spec}
        if not isinstance(spec, dict):
            raise ConfigError('expected a mapping', key=key)
        spec = dict(spec)
        kind = spec.pop('kind', 'adaptive')
        try:
            policy = Dyne(kind)
        except LookupError as e:
            raise ConfigError(str(e), key=key + '.kind') from None
        for name, parameter in spec.items():
            if name not in POLICY_KEYS[policy.token]:
                raise ConfigError('unknown key', key='{k}.{n}'.format(k=key,
                                                                      n=name))
            spec[name] = _number(parameter, '{k}.{n}'.format(k=key, n=name))
        policies.append(_build(Dyne, key, kind=kind, **spec))
    return tuple(policies)


def resolve(document, preset=None):
    '''Validate a parsed configuration mapping

    Arguments
    ---------

        document (dict): parsed YAML mapping

        preset (str): preset applied under the document, overriding the
                      document's own ``preset`` key

    Raises
    ------

        ConfigError: naming the offending key
    '''
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError('configuration must be a mapping')
    for key in document:
        if key not in SCHEMA:
            raise ConfigError('unknown key', key=str(key))

    preset = preset or document.get('preset')
    if preset is not None:
        _choice(preset, tuple(PRESETS), 'preset')
        document = _merge(PRESETS[preset], document)
        log.debug("Applied preset '{p}'".format(p=preset))

    pulse = _section(document, 'pulse')
    noise = _section(document, 'noise')
    loop = _section(document, 'loop')
    grid = _section(document, 'grid')
    traj = _section(document, 'traj')
    dist = _section(document, 'dist')
    sweep = _section(document, 'sweep')
    polar = _section(document, 'polar')
    output = _section(document, 'output')

    kwargs = {'preset': preset}

    kwargs['pulse'] = _build(
        PulseParams, 'pulse.mean_photon_number',
        mean_photon_number=_number(pulse.get('mean_photon_number', 50.0),
                                   'pulse.mean_photon_number'),
        true_phase=_number(pulse.get('true_phase', 0.0), 'pulse.true_phase'),
        duration=_number(pulse.get('duration', DEFAULT_DURATION),
                         'pulse.duration'))

    efficiency = _number(noise.get('efficiency', 1.0), 'noise.efficiency')
    if not 0 < efficiency <= 1:
        raise ConfigError('must lie in (0, 1], got {e}'.format(e=efficiency),
                          key='noise.efficiency')
    kwargs['noise'] = _build(
        NoiseModel, 'noise.electronic_noise_ratio',
        efficiency=efficiency,
        electronic_noise_ratio=_number(noise.get('electronic_noise_ratio', 0.0),
                                       'noise.electronic_noise_ratio'))

    if 'slew_product' in loop and 'slew_limit' in loop:
        raise ConfigError('give slew_product or slew_limit, not both',
                          key='loop.slew_limit')
    if 'slew_limit' in loop:
        slew_limit = _slew_product(loop['slew_limit'], 'loop.slew_limit')
    else:
        slew_limit = 2 * math.pi * _slew_product(loop.get('slew_product'),
                                                 'loop.slew_product')
    initial = loop.get('initial_lo_phase', 'uniform')
    if initial == 'uniform':
        initial = None
    else:
        initial = _number(initial, 'loop.initial_lo_phase')
    kwargs['loop'] = _build(
        LoopModel, 'loop.delay_steps',
        slew_limit=slew_limit,
        bandwidth=2 * math.pi * _slew_product(
            loop.get('bandwidth_product'), 'loop.bandwidth_product'),
        delay_steps=_at_least(loop.get('delay_steps', 0), 0,
                              'loop.delay_steps'),
        initial_lo_phase=initial)

    if 'policies' in document:
        kwargs['policies'] = _policies(document['policies'])

    kwargs['n_steps'] = _at_least(grid.get('n_steps', DEFAULT_N_STEPS), 2,
                                  'grid.n_steps')
    kwargs['block_size'] = _at_least(grid.get('block_size', 1024), 1,
                                     'grid.block_size')
    kwargs['trials'] = _at_least(document.get('trials', 2000), 2, 'trials')
    kwargs['ensemble_size'] = _at_least(document.get('ensemble_size', 150), 2,
                                        'ensemble_size')
    kwargs['phase_rule'] = _choice(
        document.get('phase_rule', 'random-per-ensemble'), PHASE_RULES,
        'phase_rule')
    kwargs['ensemble_weighting'] = _choice(
        document.get('ensemble_weighting', 'ensemble'), WEIGHTINGS,
        'ensemble_weighting')
    seed = _at_least(document.get('master_seed', 0), 0, 'master_seed')
    if seed >= 2 ** 64:
        raise ConfigError('must fit in 64 bits', key='master_seed')
    kwargs['master_seed'] = seed

    kwargs['traj_count'] = _at_least(traj.get('count', 3), 1, 'traj.count')
    kwargs['n_bins'] = _at_least(dist.get('n_bins', 64), 2, 'dist.n_bins')
    threshold = _number(dist.get('tail_threshold', 2.5), 'dist.tail_threshold')
    if not 0 < threshold < math.pi:
        raise ConfigError('must lie in (0, pi), got {t}'.format(t=threshold),
                          key='dist.tail_threshold')
    kwargs['tail_threshold'] = threshold

    grid_values = sweep.get('photon_numbers', [10.0, 50.0, 300.0])
    if not isinstance(grid_values, list) or not grid_values:
        raise ConfigError('expected a non-empty list',
                          key='sweep.photon_numbers')
    grid_values = tuple(_number(v, 'sweep.photon_numbers')
                        for v in grid_values)
    if any(v <= 0 for v in grid_values):
        raise ConfigError('photon numbers must be positive',
                          key='sweep.photon_numbers')
    if any(b <= a for a, b in zip(grid_values, grid_values[1:])):
        raise ConfigError('photon numbers must be strictly increasing',
                          key='sweep.photon_numbers')
    kwargs['photon_numbers'] = grid_values

    kwargs['n_phases'] = _at_least(polar.get('n_phases', 12), 2,
                                   'polar.n_phases')
    kwargs['ensembles_per_phase'] = _at_least(
        polar.get('ensembles_per_phase', 20), 2, 'polar.ensembles_per_phase')

    kwargs['output_directory'] = str(output.get('directory', 'out'))
    kwargs['output_format'] = _choice(output.get('format', 'csv'), FORMATS,
                                      'output.format')

    return ExperimentConfig(**kwargs)


def load_config(source=None, preset=None, overrides=None):
    '''Load and validate a configuration

    Arguments
    ---------

        source: path to a YAML file, inline YAML text, or None for defaults

        preset (str): ``ideal`` or ``paper-apparatus``

        overrides (dict): mapping merged over the document (CLI flags)

    Raises
    ------

        ConfigError: parse or validation failure
        OSError: unreadable file
    '''
    text = ''
    if isinstance(source, pathlib.PurePath) or (
            isinstance(source, str) and '\n' not in source
            and (os.path.isfile(source)
                 or source.strip().endswith(('.yaml', '.yml')))):
        path = os.fspath(source)
        log.debug("Reading configuration from '{p}'".format(p=path))
        with open(path) as fp:
            text = fp.read()
    elif source is not None:
        text = source

    try:
        document = yaml.safe_load(text) if text else {}
    except yaml.YAMLError as e:
        raise ConfigError('could not parse configuration: {e}'.format(e=e))

    if document is None:
        document = {}
    if overrides:
        if not isinstance(document, dict):
            raise ConfigError('configuration must be a mapping')
        document = _merge(document, overrides)
    return resolve(document, preset=preset)
