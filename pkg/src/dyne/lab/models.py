"""Parameter types for the signal, the detector, the feedback loop and the
random streams driving a simulation"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dyne.lab.core import wrap_phase
from dyne.lab.errors import DomainError

# physical length of one normalized pulse, in seconds
DEFAULT_DURATION = 50e-6

# stream namespaces under one master seed
NOISE_STREAM = 0
PHASE_STREAM = 1


@dataclass(frozen=True)
class PulseParams:
    '''Flat-envelope coherent pulse

    Amplitude sqrt(N) over the normalized interval [0, 1]. ``duration`` is
    metadata only; all rates enter the simulation as products with it.
    '''

    mean_photon_number: float
    true_phase: float = 0.0
    duration: float = DEFAULT_DURATION

    def __post_init__(self):
        if not (math.isfinite(self.mean_photon_number)
                and self.mean_photon_number >= 0):
            raise DomainError('mean_photon_number must be a finite value '
                              '>= 0, got {n}'.format(n=self.mean_photon_number))
        if not self.duration > 0:
            raise DomainError('duration must be positive, got '
                              '{d}'.format(d=self.duration))
        object.__setattr__(self, 'true_phase', wrap_phase(self.true_phase))


@dataclass(frozen=True)
class NoiseModel:
    '''Detection efficiency eta and electronic-to-shot noise power ratio r'''

    efficiency: float = 1.0
    electronic_noise_ratio: float = 0.0

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise DomainError('efficiency must lie in (0, 1], got '
                              '{e}'.format(e=self.efficiency))
        if not (math.isfinite(self.electronic_noise_ratio)
                and self.electronic_noise_ratio >= 0):
            raise DomainError('electronic_noise_ratio must be >= 0, got '
                              '{r}'.format(r=self.electronic_noise_ratio))

    @classmethod
    def from_shot_noise_clearance(cls, decibels, efficiency=1.0):
        '''Noise model for a detector whose shot noise sits ``decibels``
        above its electronic noise floor'''
        return cls(efficiency=efficiency,
                   electronic_noise_ratio=10 ** (-decibels / 10.0))

    def effective_photon_number(self, mean_photon_number):
        '''eta * N / (1 + r)'''
        return (self.efficiency * mean_photon_number
                / (1.0 + self.electronic_noise_ratio))


@dataclass(frozen=True)
class LoopModel:
    '''Imperfect feedback actuator

    ``slew_limit`` is in radians per normalized time (``math.inf`` for an
    ideal actuator). ``bandwidth`` is the angular corner of a first-order
    response in front of the slew limiter, also per normalized time: each
    step closes a fraction 1 - exp(-bandwidth dt) of the remaining arc.
    ``initial_lo_phase`` of None draws a uniform phase per
    trajectory.
    '''

    slew_limit: float = math.inf
    delay_steps: int = 0
    initial_lo_phase: Optional[float] = None
    bandwidth: float = math.inf

    def __post_init__(self):
        if not self.slew_limit > 0:
            raise DomainError('slew_limit must be positive, got '
                              '{s}'.format(s=self.slew_limit))
        if not self.bandwidth > 0:
            raise DomainError('bandwidth must be positive, got '
                              '{b}'.format(b=self.bandwidth))
        if int(self.delay_steps) != self.delay_steps or self.delay_steps < 0:
            raise DomainError('delay_steps must be an integer >= 0, got '
                              '{d}'.format(d=self.delay_steps))
        object.__setattr__(self, 'delay_steps', int(self.delay_steps))
        if self.initial_lo_phase is not None:
            object.__setattr__(self, 'initial_lo_phase',
                               wrap_phase(self.initial_lo_phase))

    @classmethod
    def from_slew_product(cls, slew_product, **kwargs):
        '''Build from a bandwidth x pulse-length product (cycles per pulse)'''
        if slew_product is None or math.isinf(slew_product):
            return cls(slew_limit=math.inf, **kwargs)
        return cls(slew_limit=2 * math.pi * slew_product, **kwargs)

    @classmethod
    def from_bandwidth_product(cls, bandwidth_product, **kwargs):
        '''Build a first-order loop from its corner frequency x pulse length
        (cycles per pulse)'''
        if bandwidth_product is None or math.isinf(bandwidth_product):
            return cls(bandwidth=math.inf, **kwargs)
        return cls(bandwidth=2 * math.pi * bandwidth_product, **kwargs)

    @property
    def slew_product(self):
        return self.slew_limit / (2 * math.pi)

    @property
    def bandwidth_product(self):
        return self.bandwidth / (2 * math.pi)

    @property
    def ideal(self):
        return math.isinf(self.slew_limit) and math.isinf(self.bandwidth)


@dataclass(frozen=True)
class RngStream:
    '''One independent random stream per trajectory

    A (master_seed, stream_index, namespace) triple fully determines the
    generator; distinct indices give statistically independent streams.
    '''

    master_seed: int
    stream_index: int
    namespace: int = NOISE_STREAM

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise DomainError('master_seed must be an unsigned 64-bit '
                              'integer, got {s}'.format(s=self.master_seed))
        if self.stream_index < 0:
            raise DomainError('stream_index must be >= 0, got '
                              '{i}'.format(i=self.stream_index))

    def generator(self):
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed),
            spawn_key=(int(self.namespace), int(self.stream_index)))
        return np.random.default_rng(seq)
