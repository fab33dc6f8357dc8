import logging

import numpy as np

from dyne.lab.core import EstimatorKind, wrap_phase
from dyne.lab.implementation import Implementation as PolicyImplementation

# create a logger for this module
log = logging.getLogger(__name__)


class Implementation(PolicyImplementation):
    '''Fixed-quadrature homodyne policy

    The LO is held at ``phase`` for the whole pulse, initial LO included.
    Records carry Mark I and Mark II estimates, Mark I being the headline:
    with a constant LO, A + B conj(A) vanishes identically and every Mark II
    estimate is ambiguous.

    Since A = exp(i phase) times the real integrated charge, the Mark I
    headline can only be ``phase`` or ``phase + pi``. It records the sign
    of the measured quadrature and nothing finer, so wrapped variances of
    this policy are not comparable with the adaptive or heterodyne ones.
    The policy is kept as the non-adaptive homodyne reference for
    trajectory records and histograms.

    YAML Example
    ------------

        policies:
            - kind: fixed
              phase: 1.5708
    '''

    token = 'fixed'
    estimators = (EstimatorKind.MARK2, EstimatorKind.MARK1)

    def __init__(self, phase=np.pi / 2):
        self.phase = wrap_phase(phase)

    def parameters(self):
        return {'phase': self.phase}

    def _held(self, like):
        return wrap_phase(np.zeros_like(np.asarray(like, dtype=float))
                          + self.phase)

    def initial_lo(self, fallback):
        return self._held(fallback)

    def lo_command(self, acc, t, fallback):
        return self._held(fallback)
