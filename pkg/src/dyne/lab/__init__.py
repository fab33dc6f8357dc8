"""dyne.lab simulates single-shot optical phase measurements on weak coherent
pulses: adaptive homodyne feedback, heterodyne and fixed-quadrature homodyne,
with the ensemble statistics needed to compare them"""

# metadata
__version__ = '1.0.0'
__contact__ = 'dynelab-maintainers@users.noreply.github.com'


# For abstract
from genie.abstract import Lookup
import dyne.lab.libs
from dyne.lab.libs import canonical_token

from dyne.lab.core import (EstimatorKind, DyneAccumulators, EstimateResult,
                           wrap_phase, accumulate_step, feedback_phase,
                           estimate_mark1, estimate_mark2, estimate_iq,
                           estimate_photon_number)
from dyne.lab.errors import (DyneError, DomainError, AmbiguousEstimate,
                             DegenerateMean, ConfigError)
from dyne.lab.models import PulseParams, NoiseModel, LoopModel, RngStream


class Dyne(object):
    '''Dyne

    Used for picking the right policy implementation from its token
    (``adaptive``, ``heterodyne``, ``fixed`` or one of their aliases)

    It also overwrites __getattribute__ to go look in the picked
    implementation

    Example
    -------

        >>> from dyne.lab import Dyne
        >>> Dyne('heterodyne', beat_cycles=90).headline
        <EstimatorKind.IQ: 'iq'>
    '''

    def __init__(self, kind='adaptive', **kwargs):
        '''__init__ instantiates the implementation declared for ``kind``'''

        # Set up abstraction for this policy
        lookup = Lookup(policy=canonical_token(kind))
        _implementation = lookup.libs.implementation.Implementation
        self._implementation = _implementation(**kwargs)

    @classmethod
    def from_dict(cls, spec):
        '''Build from a configuration mapping such as
        ``{'kind': 'heterodyne', 'beat_cycles': 90}``'''
        spec = dict(spec)
        return cls(spec.pop('kind', 'adaptive'), **spec)

    def __getattribute__(self, name):
        '''Redirect specific names to the picked implementation'''

        if name in ['token', 'estimators', 'actuated', 'headline',
                    'parameters', 'describe', 'initial_lo', 'lo_command',
                    'estimate']:
            return getattr(self._implementation, name)

        # Send the rest to normal __getattribute__
        return super().__getattribute__(name)

    def __eq__(self, other):
        return self._implementation == other

    def __hash__(self):
        return hash(self._implementation)

    def __repr__(self):
        return 'Dyne({i!r})'.format(i=self._implementation)
