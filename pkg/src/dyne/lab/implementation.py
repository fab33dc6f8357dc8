import logging

from dyne.lab.core import estimate


# create a logger for this module
log = logging.getLogger(__name__)


class Implementation(object):
    '''Policy BaseClass

    Baseclass for local-oscillator policies. A policy decides the LO phase
    held at the start of a pulse, the phase commanded after every step, and
    which final estimators apply to the records it produces.

    YAML Example
    ------------

        policies:
            - kind: adaptive
            - kind: heterodyne
              beat_cycles: 90
            - kind: fixed
              phase: 1.5708

    Example
    -------

        >>> from dyne.lab import Dyne
        >>> policy = Dyne('heterodyne', beat_cycles=90)
        >>> policy.lo_command(acc, t=0.25, fallback=0.0)
        3.141592653589793
    '''

    # abstraction token, set by every implementation
    token = None

    # final estimators for records of this policy, headline last
    estimators = ()

    # whether commands pass through the slew-limited actuator
    actuated = True

    @property
    def headline(self):
        '''Estimator reported as the policy's result'''
        return self.estimators[-1]

    def parameters(self):
        '''Policy parameters, as they appear in a configuration'''
        return {}

    def describe(self):
        '''Configuration mapping that rebuilds this policy'''
        return dict(kind=self.token, **self.parameters())

    def initial_lo(self, fallback):
        '''LO phase held before the first command is applied'''
        return fallback

    def lo_command(self, acc, t, fallback):
        '''LO phase commanded from the accumulators at normalized time t'''

        raise NotImplementedError

    def estimate(self, acc, fallback=None):
        '''Evaluate every estimator of this policy

        Returns a dict of EstimatorKind to EstimateResult.
        '''
        return {kind: estimate(acc, kind, fallback=fallback)
                for kind in self.estimators}

    def __eq__(self, other):
        describe = getattr(other, 'describe', None)
        return describe is not None and self.describe() == describe()

    def __hash__(self):
        return hash(tuple(sorted(self.describe().items())))

    def __repr__(self):
        params = ', '.join('{k}={v!r}'.format(k=k, v=v)
                           for k, v in self.parameters().items())
        return '{c}<{t}>({p})'.format(c=type(self).__name__, t=self.token,
                                      p=params)
