"""Stochastic trajectory generator

Discretizes the pulse on a uniform grid of ``n_steps`` over [0, 1] and runs
the feedback loop with Euler-Maruyama steps. The order inside step k is:

    1. actuator output Phi_k from the delayed command
    2. shot/electronic noise draw dW_k
    3. charge I_k dt = 2 sqrt(eta N) cos(phi - Phi_k) dt + sqrt(1 + r) dW_k
    4. accumulate_step
    5. next command from the policy

For coherent inputs the balanced photocurrent is exactly Gaussian with that
mean, so the model holds at any photon number.

Trajectories are simulated in blocks: every array below has one row per
trajectory, while each trajectory still draws from its own RngStream.
"""

import math
import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from dyne.lab.core import (DyneAccumulators, EstimateResult, accumulate_step,
                           phase_difference, wrap_phase, ELAPSED_TOLERANCE)
from dyne.lab.errors import DomainError

# create a logger for this module
log = logging.getLogger(__name__)

DEFAULT_N_STEPS = 4096


def photocurrent_increment(pulse, noise, lo_phase, dt, dW, true_phase=None):
    '''Integrated balanced photocurrent over one step

        I dt = 2 sqrt(eta N) cos(phi - Phi) dt + sqrt(1 + r) dW

    Arguments
    ---------

        pulse (PulseParams): signal description

        noise (NoiseModel): efficiency and electronic noise ratio

        lo_phase: LO phase Phi held during the step

        dt (float): normalized step length

        dW: Wiener increment(s) ~ Normal(0, dt)

        true_phase: per-trajectory signal phases overriding
                    ``pulse.true_phase``
    '''
    if not dt > 0:
        raise DomainError('Time step must be positive, got {dt}'.format(dt=dt))
    phi = pulse.true_phase if true_phase is None else true_phase
    amplitude = 2.0 * math.sqrt(noise.efficiency * pulse.mean_photon_number)
    scale = math.sqrt(1.0 + noise.electronic_noise_ratio)
    charge = (amplitude * np.cos(np.subtract(phi, lo_phase)) * dt
              + scale * np.asarray(dW, dtype=float))
    if np.ndim(charge) == 0:
        return float(charge)
    return charge


def apply_actuator(commanded, previous, loop, dt):
    '''Move the LO from ``previous`` toward ``commanded``

    Travels along the shorter arc by at most slew_limit * dt. Antipodal
    targets are approached in the +phase direction. A finite loop bandwidth
    first scales the arc down to the first-order response over dt.
    '''
    if not dt > 0:
        raise DomainError('Time step must be positive, got {dt}'.format(dt=dt))
    if loop.ideal:
        return wrap_phase(commanded)

    max_step = loop.slew_limit * dt
    gap = np.asarray(phase_difference(commanded, previous))
    if not math.isinf(loop.bandwidth):
        gap = gap * -math.expm1(-loop.bandwidth * dt)
        return wrap_phase(np.add(previous, np.clip(gap, -max_step, max_step)))
    step = np.clip(gap, -max_step, max_step)
    reached = np.abs(gap) <= max_step
    moved = wrap_phase(np.add(previous, step))
    return wrap_phase(np.where(reached, commanded, moved))


def lo_command(policy, acc, t, fallback):
    '''LO phase the policy commands at normalized time t'''
    if not -ELAPSED_TOLERANCE <= t <= 1.0 + ELAPSED_TOLERANCE:
        raise DomainError('Command time {t} outside the pulse'.format(t=t))
    return policy.lo_command(acc, t, fallback)


@dataclass(frozen=True)
class TrajectoryRecord:
    '''Record of one simulated pulse

    ``photocurrent`` holds the charges I_k dt and ``lo_phase`` the actuated
    Phi_k; both are only kept for full records. ``command_source[k]`` is the
    step whose data produced the command applied at step k (-1 while the
    initial LO phase holds).
    '''

    n_steps: int
    true_phase: float
    initial_lo_phase: float
    final_acc: DyneAccumulators
    photocurrent: Optional[np.ndarray] = None
    lo_phase: Optional[np.ndarray] = None
    command_source: Optional[np.ndarray] = None

    @property
    def dt(self):
        return 1.0 / self.n_steps

    @property
    def times(self):
        return np.arange(self.n_steps) * self.dt

    def rows(self, trajectory=0):
        '''Per-step rows: trajectory, step, time, lo_phase, charge'''
        if self.lo_phase is None:
            raise ValueError('Trajectory was not recorded in full')
        for step, (time, phase, charge) in enumerate(
                zip(self.times, self.lo_phase, self.photocurrent)):
            yield {'trajectory': trajectory,
                   'step': step,
                   'time': float(time),
                   'lo_phase': float(phase),
                   'charge': float(charge)}


@dataclass(frozen=True)
class BlockResult:
    '''Outcome of a block of trajectories simulated together'''

    n_steps: int
    stream_indices: np.ndarray
    true_phase: np.ndarray
    initial_lo_phase: np.ndarray
    final_acc: DyneAccumulators
    estimates: Dict[Any, EstimateResult]
    photocurrent: Optional[np.ndarray] = None
    lo_phase: Optional[np.ndarray] = None
    command_source: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.stream_indices)

    def record(self, i):
        '''TrajectoryRecord of the i-th trajectory of the block'''
        acc = DyneAccumulators(A=complex(self.final_acc.A[i]),
                               B=complex(self.final_acc.B[i]),
                               elapsed=self.final_acc.elapsed)
        full = self.lo_phase is not None
        return TrajectoryRecord(
            n_steps=self.n_steps,
            true_phase=float(self.true_phase[i]),
            initial_lo_phase=float(self.initial_lo_phase[i]),
            final_acc=acc,
            photocurrent=self.photocurrent[i] if full else None,
            lo_phase=self.lo_phase[i] if full else None,
            command_source=self.command_source)

    def estimate(self, i):
        '''Scalar EstimateResults of the i-th trajectory'''
        return {kind: EstimateResult(phi_hat=float(result.phi_hat[i]),
                                     magnitude=float(result.magnitude[i]),
                                     estimator_kind=kind,
                                     ambiguous=bool(result.ambiguous[i]))
                for kind, result in self.estimates.items()}


def _draw(streams, n_steps, noiseless):
    '''Initial LO draws and standard normals, one row per stream'''
    initial = np.empty(len(streams))
    normals = np.zeros((len(streams), n_steps))
    for row, stream in enumerate(streams):
        generator = stream.generator()
        # the initial phase is always drawn first so the noise path does not
        # depend on whether it is used
        initial[row] = generator.uniform(-np.pi, np.pi)
        if not noiseless:
            normals[row] = generator.standard_normal(n_steps)
    return initial, normals


def simulate_batch(pulse, noise, loop, policy, n_steps, streams,
                   record_full=False, noiseless=False, true_phases=None):
    '''Simulate one trajectory per stream on a shared time grid

    Arguments
    ---------

        pulse (PulseParams): signal; ``true_phases`` overrides its phase per
                             trajectory

        noise (NoiseModel): detector model

        loop (LoopModel): actuator slew limit, delay and initial LO phase

        policy (Dyne or Implementation): LO policy

        n_steps (int): grid size, at least 2

        streams (list of RngStream): one per trajectory

        record_full (bool): keep per-step photocurrent and LO phase

        noiseless (bool): force every dW to zero

    Returns
    -------

        BlockResult
    '''
    if int(n_steps) != n_steps or n_steps < 2:
        raise DomainError('n_steps must be an integer >= 2, got '
                          '{n}'.format(n=n_steps))
    n_steps = int(n_steps)
    streams = list(streams)
    if not streams:
        raise DomainError('At least one stream is required')

    size = len(streams)
    dt = 1.0 / n_steps
    delay = loop.delay_steps

    drawn, normals = _draw(streams, n_steps, noiseless)
    dW = math.sqrt(dt) * normals

    if loop.initial_lo_phase is None:
        fallback = np.asarray(wrap_phase(drawn))
    else:
        fallback = np.full(size, loop.initial_lo_phase)
    if true_phases is None:
        phases = np.full(size, pulse.true_phase)
    else:
        phases = np.asarray(wrap_phase(np.broadcast_to(true_phases, size)))

    initial = np.asarray(policy.initial_lo(fallback), dtype=float)
    actual = initial
    acc = DyneAccumulators.zeros(size)

    pending = deque()
    command_source = np.empty(n_steps, dtype=int)
    if record_full:
        lo_record = np.empty((size, n_steps))
        charge_record = np.empty((size, n_steps))

    log.debug('Simulating {m} trajectories of {n} steps with policy '
              '{p!r}'.format(m=size, n=n_steps, p=policy))

    for k in range(n_steps):
        if not policy.actuated:
            # open-loop LO programs are evaluated on the grid, not queued
            source = k - 1
            if k == 0:
                target = initial
            else:
                target = np.asarray(lo_command(policy, acc, acc.elapsed,
                                               fallback), dtype=float)
        elif len(pending) > delay:
            source, target = pending.popleft()
        else:
            source, target = -1, initial

        if policy.actuated:
            actual = np.asarray(apply_actuator(target, actual, loop, dt))
        else:
            actual = target

        charge = photocurrent_increment(pulse, noise, actual, dt, dW[:, k],
                                        true_phase=phases)
        acc = accumulate_step(acc, charge, actual, dt)

        command_source[k] = source
        if record_full:
            lo_record[:, k] = actual
            charge_record[:, k] = charge

        if policy.actuated and k < n_steps - 1:
            command = lo_command(policy, acc, acc.elapsed, fallback)
            pending.append((k, np.asarray(command, dtype=float)))

    acc = DyneAccumulators(A=np.atleast_1d(acc.A), B=np.atleast_1d(acc.B),
                           elapsed=acc.elapsed)
    estimates = policy.estimate(acc, fallback=fallback)
    estimates = {kind: EstimateResult(
                     phi_hat=np.atleast_1d(result.phi_hat),
                     magnitude=np.atleast_1d(result.magnitude),
                     estimator_kind=kind,
                     ambiguous=np.atleast_1d(result.ambiguous))
                 for kind, result in estimates.items()}

    return BlockResult(
        n_steps=n_steps,
        stream_indices=np.array([s.stream_index for s in streams]),
        true_phase=phases,
        initial_lo_phase=np.asarray(initial, dtype=float),
        final_acc=acc,
        estimates=estimates,
        photocurrent=charge_record if record_full else None,
        lo_phase=lo_record if record_full else None,
        command_source=command_source)


def simulate_trajectory(pulse, noise, loop, policy, n_steps, rng,
                        record_full=False, noiseless=False):
    '''Simulate a single pulse

    Returns
    -------

        (TrajectoryRecord, dict of EstimatorKind to EstimateResult)

    Ambiguous estimates are not errors: they carry the initial LO phase as
    their ``phi_hat`` and ``ambiguous=True``.
    '''
    block = simulate_batch(pulse, noise, loop, policy, n_steps, [rng],
                           record_full=record_full, noiseless=noiseless)
    return block.record(0), block.estimate(0)
