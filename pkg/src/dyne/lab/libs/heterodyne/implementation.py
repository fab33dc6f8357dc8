import math
import logging

import numpy as np

from dyne.lab.core import EstimatorKind, wrap_phase
from dyne.lab.errors import DomainError
from dyne.lab.implementation import Implementation as PolicyImplementation

# create a logger for this module
log = logging.getLogger(__name__)

# 1.8 MHz detuning over a 50 us pulse
DEFAULT_BEAT_CYCLES = 90.0


class Implementation(PolicyImplementation):
    '''Heterodyne policy

    The LO is detuned from the signal: its phase ramps linearly through
    ``beat_cycles`` full turns over the pulse, starting from the initial LO
    phase. The ramp is a synthesizer detuning rather than a feedback
    command, so it is not subject to the actuator slew limit.

    With an integer number of beat half-cycles B vanishes and arg A is the
    I/Q demodulation of the photocurrent beat note.

    YAML Example
    ------------

        policies:
            - kind: heterodyne
              beat_cycles: 90
    '''

    token = 'heterodyne'
    estimators = (EstimatorKind.IQ,)
    actuated = False

    def __init__(self, beat_cycles=DEFAULT_BEAT_CYCLES):
        if not (math.isfinite(beat_cycles) and beat_cycles > 0):
            raise DomainError('beat_cycles must be positive, got '
                              '{c}'.format(c=beat_cycles))
        self.beat_cycles = float(beat_cycles)

    def parameters(self):
        return {'beat_cycles': self.beat_cycles}

    def lo_command(self, acc, t, fallback):
        return wrap_phase(np.add(fallback, 2 * np.pi * self.beat_cycles * t))
