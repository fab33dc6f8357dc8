"""Deterministic mathematics of dyne records

Phase arithmetic, the (A, B) accumulators that summarize a photocurrent and
local-oscillator history, the feedback rule and the Mark I / Mark II / I-Q
final estimators.

Every function accepts either scalars or numpy arrays (one entry per
trajectory of a block) and returns the same shape it was given; scalar inputs
give Python floats back.

    A_t = integral of I(s) exp(i Phi(s)) ds
    B_t = -integral of exp(2i Phi(s)) ds
"""

import enum
import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from dyne.lab.errors import AmbiguousEstimate, DomainError

# create a logger for this module
log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

# Mark II magnitudes at or below this fraction of max(1, |A|) are ambiguous
AMBIGUITY_TOLERANCE = 1e-12

# slack allowed on the normalized pulse length
ELAPSED_TOLERANCE = 1e-9


class EstimatorKind(str, enum.Enum):
    '''Final phase estimators'''

    MARK1 = 'mark1'
    MARK2 = 'mark2'
    IQ = 'iq'


def _out(value):
    '''Return python scalars for 0-d results, arrays otherwise'''
    value = np.asarray(value)
    if value.ndim == 0:
        return value.item()
    return value


def wrap_phase(x):
    '''Shift x by a multiple of 2*pi into the canonical range (-pi, pi]

    Values already inside the range are returned untouched, which makes the
    operation idempotent.

    Raises
    ------
        DomainError: if any entry of x is not finite
    '''
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError('Cannot wrap a non-finite phase: {x}'.format(x=x))

    inside = (x > -np.pi) & (x <= np.pi)
    shifted = np.pi - np.mod(np.pi - x, TWO_PI)
    # np.mod may round up to 2*pi for tiny negative arguments
    shifted = np.where(shifted <= -np.pi, shifted + TWO_PI, shifted)
    return _out(np.where(inside, x, shifted))


def phase_difference(a, b):
    '''wrap(a - b)'''
    return wrap_phase(np.subtract(a, b))


@dataclass(frozen=True)
class DyneAccumulators:
    '''Running (A, B) pair and the normalized time already integrated

    ``A`` and ``B`` are complex scalars for a single trajectory or complex
    arrays for a block of trajectories sharing the same time grid.
    '''

    A: Any = 0j
    B: Any = 0j
    elapsed: float = 0.0

    @classmethod
    def zeros(cls, size=None):
        '''Empty accumulators, for one trajectory or a block of ``size``'''
        if size is None:
            return cls()
        return cls(A=np.zeros(size, dtype=complex),
                   B=np.zeros(size, dtype=complex),
                   elapsed=0.0)


def accumulate_step(acc, charge, lo_phase, dt,
                    tolerance=ELAPSED_TOLERANCE):
    '''Fold one time step of photocurrent into the accumulators

        A' = A + exp(i lo_phase) * charge
        B' = B - exp(2i lo_phase) * dt
        elapsed' = elapsed + dt

    Arguments
    ---------

        acc (DyneAccumulators): accumulators before the step

        charge: integrated photocurrent I*dt over the step

        lo_phase: local oscillator phase held during the step

        dt (float): normalized step length

    Raises
    ------

        DomainError: dt <= 0, elapsed beyond the pulse, or non-finite input
    '''
    if not dt > 0:
        raise DomainError('Time step must be positive, got {dt}'.format(dt=dt))
    elapsed = acc.elapsed + dt
    if elapsed > 1.0 + tolerance:
        raise DomainError('Accumulating past the end of the pulse '
                          '(elapsed {e})'.format(e=elapsed))

    charge = np.asarray(charge, dtype=float)
    lo_phase = np.asarray(lo_phase, dtype=float)
    if not (np.all(np.isfinite(charge)) and np.all(np.isfinite(lo_phase))):
        raise DomainError('Non-finite charge or LO phase in accumulate_step')

    phasor = np.exp(1j * lo_phase)
    return DyneAccumulators(A=_out(acc.A + phasor * charge),
                            B=_out(acc.B - phasor * phasor * dt),
                            elapsed=elapsed)


def feedback_phase(acc, fallback):
    '''LO phase that measures the quadrature orthogonal to arg A

    Returns wrap(arg A + pi/2), or ``fallback`` wherever A is exactly zero.
    '''
    A = np.asarray(acc.A, dtype=complex)
    zero = A == 0
    # arg(0) is never used
    phase = np.angle(np.where(zero, 1.0, A)) + np.pi / 2
    return wrap_phase(np.where(zero, fallback, phase))


@dataclass(frozen=True)
class EstimateResult:
    '''Final phase estimate of one record (or a block of records)

    ``ambiguous`` flags entries whose phasor fell below tolerance; their
    ``phi_hat`` is the fallback phase supplied to :func:`estimate`.
    '''

    phi_hat: Any
    magnitude: Any
    estimator_kind: EstimatorKind
    ambiguous: Any = False


def _estimator_phasor(acc, kind):
    A = np.asarray(acc.A, dtype=complex)
    if kind is EstimatorKind.MARK2:
        B = np.asarray(acc.B, dtype=complex)
        z = A + B * np.conj(A)
        tolerance = AMBIGUITY_TOLERANCE * np.maximum(1.0, np.abs(A))
    else:
        z = A
        tolerance = np.zeros(A.shape)
    return z, tolerance


def estimate(acc, kind, fallback=None):
    '''Evaluate a final estimator on the accumulators

    Arguments
    ---------

        acc (DyneAccumulators): accumulators at the end of the pulse

        kind (EstimatorKind): estimator to evaluate

        fallback: substitute phase for ambiguous entries. When omitted an
                  ambiguous entry raises instead.

    Raises
    ------

        AmbiguousEstimate: ambiguous entry and no fallback given
    '''
    kind = EstimatorKind(kind)
    z, tolerance = _estimator_phasor(acc, kind)
    magnitude = np.abs(z)
    ambiguous = magnitude <= tolerance

    phi_hat = wrap_phase(np.angle(np.where(ambiguous, 1.0, z)))
    if np.any(ambiguous):
        if fallback is None:
            raise AmbiguousEstimate(
                '{k} estimate is ambiguous (magnitude {m:.3g})'.format(
                    k=kind.value, m=float(np.min(magnitude))),
                magnitude=float(np.min(magnitude)))
        phi_hat = np.where(ambiguous, wrap_phase(fallback), phi_hat)

    return EstimateResult(phi_hat=_out(phi_hat),
                          magnitude=_out(magnitude),
                          estimator_kind=kind,
                          ambiguous=_out(ambiguous))


def estimate_mark1(acc):
    '''Running estimator arg A'''
    return estimate(acc, EstimatorKind.MARK1)


def estimate_mark2(acc):
    '''History-corrected estimator arg(A + B conj(A))

    Cancels the conjugate-phasor term a time-varying LO leaves in A, so a
    noiseless record gives sqrt(N) exp(i phi) (1 - |B|^2) exactly.
    '''
    return estimate(acc, EstimatorKind.MARK2)


def estimate_iq(acc):
    '''I/Q demodulation of a heterodyne record, arg A'''
    return estimate(acc, EstimatorKind.IQ)


def estimate_photon_number(acc, noise):
    '''Photon number from the heterodyne amplitude

    N = (|A|^2 - (1 + r) * elapsed) / eta, unbiased when B vanishes (integer
    number of beat half-cycles).
    '''
    A = np.asarray(acc.A, dtype=complex)
    shot = (1.0 + noise.electronic_noise_ratio) * acc.elapsed
    return _out((np.abs(A) ** 2 - shot) / noise.efficiency)
