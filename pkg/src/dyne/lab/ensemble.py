"""Ensembles, photon-number sweeps and signal-phase studies

Trials are independent trajectories with stream indices 0 ... trials - 1.
They are cut into fixed blocks of ``config.block_size`` consecutive indices
and the blocks are spread over a process pool; since block composition never
depends on the number of workers, results are identical for any worker
count.

Consecutive trials are grouped into ensembles of ``config.ensemble_size``
sharing one signal phase: the configured phase (``phase_rule: fixed``) or
one drawn uniformly per ensemble (``phase_rule: random-per-ensemble``).
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from dyne.lab import Dyne
from dyne.lab.core import (EstimatorKind, estimate_photon_number,
                           phase_difference, wrap_phase)
from dyne.lab.engine import simulate_batch
from dyne.lab.errors import DegenerateMean, DomainError, DyneError
from dyne.lab.models import RngStream, PHASE_STREAM
from dyne.lab.stats import (EnsembleStats, EnsembleSummary, Histogram,
                            build_histogram, interquartile_width,
                            merge_summaries, phase_slope, reference_curves,
                            tail_fraction, wrapped_variance)
from dyne.lab.utils import blocks

# create a logger for this module
log = logging.getLogger(__name__)


def _simulate_block(task):
    '''Worker entry point, kept at module level so it pickles'''
    (pulse, noise, loop, policy, n_steps, master_seed, indices, phases,
     noiseless) = task
    streams = [RngStream(master_seed, int(index)) for index in indices]
    return simulate_batch(pulse, noise, loop, policy, n_steps, streams,
                          noiseless=noiseless, true_phases=phases)


def simulate_indices(config, policy, indices, true_phases, workers=1,
                     noiseless=False):
    '''Simulate the trajectories ``indices`` and return their BlockResults
    in index order'''
    indices = np.asarray(indices, dtype=np.int64)
    true_phases = np.asarray(true_phases, dtype=float)
    tasks = [(config.pulse, config.noise, config.loop, policy,
              config.n_steps, config.master_seed, chunk,
              true_phases[start:start + len(chunk)], noiseless)
             for start, chunk in zip(range(0, len(indices),
                                           config.block_size),
                                     blocks(indices, config.block_size))]

    log.debug('Scheduling {t} blocks of up to {b} trajectories on {w} '
              'workers'.format(t=len(tasks), b=config.block_size, w=workers))
    if workers <= 1 or len(tasks) <= 1:
        return [_simulate_block(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_simulate_block, tasks))


def ensemble_phases(config, n_ensembles, offset=0):
    '''Signal phase of every ensemble'''
    if config.phase_rule == 'fixed':
        return np.full(n_ensembles, config.pulse.true_phase)
    draws = [RngStream(config.master_seed, offset + e, PHASE_STREAM)
             .generator().uniform(-np.pi, np.pi) for e in range(n_ensembles)]
    return np.asarray(wrap_phase(np.asarray(draws)), dtype=float).reshape(-1)


@dataclass(frozen=True)
class EnsembleResult:
    '''Statistics of one estimator of one policy over an ensemble run

    ``stats`` pools every trial after rotating each ensemble onto the
    configured signal phase; ``ensemble_variances`` are the wrapped
    variances of the individual ensembles about their own means, averaged
    into ``ensemble_variance`` with equal weight per ensemble or per trial.
    '''

    policy: str
    estimator: EstimatorKind
    stats: EnsembleStats
    histogram: Histogram
    estimates: np.ndarray
    true_phases: np.ndarray
    ensemble_variances: np.ndarray
    ensemble_variance: float
    ensemble_stderr: float
    tail_fraction: float
    interquartile_width: float
    photon_number: float = math.nan

    def as_dict(self):
        row = {'policy': self.policy, 'estimator': self.estimator.value}
        row.update(self.stats.as_dict())
        row.update({'ensemble_variance': self.ensemble_variance,
                    'ensemble_stderr': self.ensemble_stderr,
                    'ensembles': int(self.ensemble_variances.size),
                    'tail_fraction': self.tail_fraction,
                    'interquartile_width': self.interquartile_width,
                    'photon_number': self.photon_number})
        return row


@dataclass(frozen=True)
class EnsembleReport:
    '''Every EnsembleResult of a run, policies in configuration order'''

    results: Tuple[EnsembleResult, ...]

    def result(self, token, kind=None):
        '''Result of policy ``token`` for estimator ``kind`` (the policy's
        headline estimator when omitted)'''
        policy = Dyne(token)
        kind = policy.headline if kind is None else EstimatorKind(kind)
        for result in self.results:
            if result.policy == policy.token and result.estimator is kind:
                return result
        raise LookupError('No {k} result for policy {t!r}'.format(
            k=kind.value, t=token))

    def __iter__(self):
        return iter(self.results)


def _ensemble_variances(phases, ensemble_of, n_ensembles):
    variances, sizes = [], []
    for e in range(n_ensembles):
        members = phases[ensemble_of == e]
        if members.size < 2:
            continue
        try:
            variances.append(wrapped_variance(members))
        except DegenerateMean:
            log.warning('Ensemble {e} has no mean direction, '
                        'skipped'.format(e=e))
            continue
        sizes.append(members.size)
    return np.asarray(variances), np.asarray(sizes)


def _summarize(config, policy, kind, blocks_, ensemble_of, n_ensembles):
    indices = np.concatenate([b.stream_indices for b in blocks_])
    raw = np.concatenate([b.estimates[kind].phi_hat for b in blocks_])
    truth = np.concatenate([b.true_phase for b in blocks_])

    # rotate every ensemble onto the configured phase before pooling
    if config.phase_rule == 'fixed':
        aligned = [b.estimates[kind].phi_hat for b in blocks_]
    else:
        aligned = [np.atleast_1d(wrap_phase(
            b.estimates[kind].phi_hat - b.true_phase
            + config.pulse.true_phase)) for b in blocks_]
    summary = merge_summaries(
        EnsembleSummary.from_arrays(b.stream_indices, phases,
                                    b.estimates[kind].ambiguous)
        for b, phases in zip(blocks_, aligned))
    stats = summary.finalize()
    if stats.ambiguous_count:
        log.warning('{c} ambiguous {k} estimates for policy {p!r}'.format(
            c=stats.ambiguous_count, k=kind.value, p=policy.token))

    variances, sizes = _ensemble_variances(raw, ensemble_of, n_ensembles)
    averaged, spread = math.nan, math.nan
    if variances.size:
        weights = sizes if config.ensemble_weighting == 'trial' else None
        averaged = float(np.average(variances, weights=weights))
    if variances.size > 1:
        spread = float(np.std(variances, ddof=1) / math.sqrt(variances.size))

    photon_number = math.nan
    if kind is EstimatorKind.IQ:
        photon_number = float(np.mean(np.concatenate([
            np.atleast_1d(estimate_photon_number(b.final_acc, config.noise))
            for b in blocks_])))

    center = stats.circular_mean
    return EnsembleResult(
        policy=policy.token,
        estimator=kind,
        stats=stats,
        histogram=build_histogram(summary.phases, center, config.n_bins),
        estimates=raw[np.argsort(indices, kind='stable')],
        true_phases=truth[np.argsort(indices, kind='stable')],
        ensemble_variances=variances,
        ensemble_variance=averaged,
        ensemble_stderr=spread,
        tail_fraction=tail_fraction(summary.phases, center,
                                    config.tail_threshold),
        interquartile_width=interquartile_width(summary.phases, center),
        photon_number=photon_number)


def run_ensemble(config, trials=None, master_seed=None, workers=1,
                 policies=None, index_offset=0, noiseless=False):
    '''Simulate ``trials`` independent pulses for every policy

    Arguments
    ---------

        config (ExperimentConfig): validated configuration

        trials (int): overrides ``config.trials``

        master_seed (int): overrides ``config.master_seed``

        workers (int): process count; results do not depend on it

        policies (list): overrides ``config.policies``

        index_offset (int): first stream index, used to keep studies built
                            from several ensemble runs independent

    Returns
    -------

        EnsembleReport

    Raises
    ------

        DomainError: fewer than two trials
        DegenerateMean: pooled estimates have no mean direction
    '''
    if trials is not None:
        config = replace(config, trials=int(trials))
    if master_seed is not None:
        config = replace(config, master_seed=int(master_seed))
    if config.trials < 2:
        raise DomainError('At least two trials are required, got '
                          '{t}'.format(t=config.trials))
    policies = config.policies if policies is None else tuple(policies)

    n_ensembles = -(-config.trials // config.ensemble_size)
    offsets = np.arange(config.trials)
    ensemble_of = offsets // config.ensemble_size
    phases = ensemble_phases(config, n_ensembles,
                             offset=index_offset // config.ensemble_size)
    indices = index_offset + offsets

    results = []
    for policy in policies:
        log.info("Running ensemble for policy '{p}' with {t} trials at "
                 "N={n}".format(p=policy.token, t=config.trials,
                                n=config.pulse.mean_photon_number))
        blocks_ = simulate_indices(config, policy, indices,
                                   phases[ensemble_of], workers=workers,
                                   noiseless=noiseless)
        for kind in policy.estimators:
            results.append(_summarize(config, policy, kind, blocks_,
                                      ensemble_of, n_ensembles))
    return EnsembleReport(results=tuple(results))


@dataclass(frozen=True)
class SweepRow:
    '''Adaptive (Mark II) against heterodyne (I/Q) at one photon number'''

    mean_photon_number: float
    references: dict
    adaptive: Optional[EnsembleResult] = None
    heterodyne: Optional[EnsembleResult] = None
    error: Optional[str] = None

    def rows(self):
        '''One output row per policy'''
        for result in (self.adaptive, self.heterodyne):
            if result is None:
                continue
            yield {'N': self.mean_photon_number,
                   'policy': result.policy,
                   'estimator': result.estimator.value,
                   'wrapped_variance': result.stats.wrapped_variance,
                   'holevo_variance': result.stats.holevo_variance,
                   'stderr': result.stats.stderr,
                   'ensemble_variance': result.ensemble_variance,
                   'het_limit': self.references['heterodyne_limit'],
                   'het_absolute': self.references['heterodyne_absolute'],
                   'fund_limit': self.references['fundamental_limit'],
                   'ambiguous_count': result.stats.ambiguous_count}


def _sweep_policies(config):
    try:
        adaptive = config.policy('adaptive')
    except LookupError:
        adaptive = Dyne('adaptive')
    try:
        heterodyne = config.policy('heterodyne')
    except LookupError:
        heterodyne = Dyne('heterodyne')
    return adaptive, heterodyne


def sweep_photon_number(config, photon_numbers=None, trials=None,
                        master_seed=None, workers=1):
    '''One SweepRow per photon number

    A failing row keeps its ``error`` message and the sweep carries on.
    '''
    photon_numbers = (config.photon_numbers if photon_numbers is None
                      else tuple(photon_numbers))
    if not photon_numbers:
        raise DomainError('Photon-number grid is empty')
    if not all(n > 0 for n in photon_numbers):
        raise DomainError('Photon numbers must be positive, got '
                          '{g}'.format(g=list(photon_numbers)))
    if list(photon_numbers) != sorted(photon_numbers):
        raise DomainError('Photon numbers must be sorted ascending, got '
                          '{g}'.format(g=list(photon_numbers)))
    adaptive, heterodyne = _sweep_policies(config)

    rows = []
    for n in photon_numbers:
        references = {}
        try:
            references = reference_curves(n, config.noise)
            report = run_ensemble(config.with_photon_number(n), trials=trials,
                                  master_seed=master_seed, workers=workers,
                                  policies=[adaptive, heterodyne])
        except DyneError as e:
            log.warning('Sweep row N={n} failed: {e}'.format(n=n, e=e))
            rows.append(SweepRow(mean_photon_number=n, references=references,
                                 error=str(e)))
            continue
        rows.append(SweepRow(
            mean_photon_number=n,
            references=references,
            adaptive=report.result('adaptive', EstimatorKind.MARK2),
            heterodyne=report.result('heterodyne', EstimatorKind.IQ)))
    return rows


@dataclass(frozen=True)
class PhaseStudy:
    '''Adaptive variance against signal phase, heterodyne as reference band

    Each signal phase gets ``ensembles_per_phase`` ensembles at that fixed
    phase. ``slope`` is the least-squares slope of the per-ensemble adaptive
    variances against phase.
    '''

    phases: np.ndarray
    adaptive_variances: np.ndarray
    adaptive_stderr: np.ndarray
    heterodyne_variances: np.ndarray
    ensemble_phases: np.ndarray
    ensemble_variances: np.ndarray
    slope: float
    slope_stderr: float

    @property
    def heterodyne_band(self):
        '''(mean, one-sigma spread) of heterodyne variance across phases'''
        return (float(np.mean(self.heterodyne_variances)),
                float(np.std(self.heterodyne_variances, ddof=1)))

    def rows(self):
        mean, sigma = self.heterodyne_band
        for phase, variance, stderr, het in zip(
                self.phases, self.adaptive_variances, self.adaptive_stderr,
                self.heterodyne_variances):
            yield {'phase': float(phase),
                   'adaptive_variance': float(variance),
                   'adaptive_stderr': float(stderr),
                   'heterodyne_variance': float(het),
                   'heterodyne_band_lower': mean - sigma,
                   'heterodyne_band_upper': mean + sigma,
                   'slope': self.slope,
                   'slope_stderr': self.slope_stderr}


def phase_study(config, n_phases=None, ensembles_per_phase=None,
                master_seed=None, workers=1):
    '''Ensembles at equally spaced fixed signal phases 2*pi*j/n_phases'''
    n_phases = config.n_phases if n_phases is None else int(n_phases)
    per_phase = (config.ensembles_per_phase if ensembles_per_phase is None
                 else int(ensembles_per_phase))
    trials = per_phase * config.ensemble_size
    adaptive, heterodyne = _sweep_policies(config)
    base = replace(config, phase_rule='fixed', trials=trials)
    if master_seed is not None:
        base = replace(base, master_seed=int(master_seed))

    grid = 2 * np.pi * np.arange(n_phases) / n_phases
    adaptive_variances, adaptive_stderr, heterodyne_variances = [], [], []
    points_x, points_y = [], []
    for j, phase in enumerate(grid):
        log.info('Phase study: signal phase {p:.4f} ({j}/{n})'.format(
            p=phase, j=j + 1, n=n_phases))
        report = run_ensemble(base.with_phase(float(phase)),
                              workers=workers,
                              policies=[adaptive, heterodyne],
                              index_offset=j * trials)
        ours = report.result('adaptive', EstimatorKind.MARK2)
        theirs = report.result('heterodyne', EstimatorKind.IQ)
        adaptive_variances.append(ours.ensemble_variance)
        adaptive_stderr.append(ours.ensemble_stderr)
        heterodyne_variances.append(theirs.ensemble_variance)
        points_x.extend([phase] * ours.ensemble_variances.size)
        points_y.extend(ours.ensemble_variances)

    slope, slope_stderr = phase_slope(points_x, points_y)
    return PhaseStudy(phases=grid,
                      adaptive_variances=np.asarray(adaptive_variances),
                      adaptive_stderr=np.asarray(adaptive_stderr),
                      heterodyne_variances=np.asarray(heterodyne_variances),
                      ensemble_phases=np.asarray(points_x),
                      ensemble_variances=np.asarray(points_y),
                      slope=slope,
                      slope_stderr=slope_stderr)


def phase_offsets(result):
    '''Estimation errors wrap(phi_hat - phi) of an EnsembleResult'''
    return np.atleast_1d(phase_difference(result.estimates,
                                          result.true_phases))
