import logging

from dyne.lab.core import EstimatorKind, feedback_phase
from dyne.lab.implementation import Implementation as PolicyImplementation

# create a logger for this module
log = logging.getLogger(__name__)


class Implementation(PolicyImplementation):
    '''Adaptive dyne policy

    Homodyne detection whose LO is driven, after every step, to
    arg A + pi/2 so that it measures the quadrature orthogonal to the
    running phase estimate. Before any photocurrent has been integrated
    (A = 0) the fallback phase, normally the random initial LO phase, is
    held.

    Records are estimated with Mark I (arg A) and Mark II
    (arg(A + B conj(A))); Mark II is the headline estimator.

    YAML Example
    ------------

        policies:
            - kind: adaptive
    '''

    token = 'adaptive'
    estimators = (EstimatorKind.MARK1, EstimatorKind.MARK2)

    def lo_command(self, acc, t, fallback):
        return feedback_phase(acc, fallback)
