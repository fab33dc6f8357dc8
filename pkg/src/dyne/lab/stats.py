"""Circular statistics of single-shot phase estimates

Phases are radians; deviations are always wrapped into (-pi, pi] before use.
Two dispersion measures are reported side by side:

    holevo variance   R^-2 - 1, R the resultant length
    wrapped variance  mean of wrap(phi - circular mean)^2

The wrapped variance is the headline quantity; the two agree for
concentrated samples and part ways once tails reach towards pi.
"""

import math
import logging
import functools
from dataclasses import dataclass

import numpy as np
from scipy import stats as scistats

from dyne.lab.core import phase_difference, wrap_phase
from dyne.lab.errors import DegenerateMean, DomainError

# create a logger for this module
log = logging.getLogger(__name__)

RESULTANT_TOLERANCE = 1e-9

# batches used for the standard error of a variance
DEFAULT_BATCHES = 30


def _phases(phases):
    phases = np.asarray(phases, dtype=float).ravel()
    if phases.size == 0:
        raise DomainError('Phase sample is empty')
    return phases


def resultant(phases):
    '''Mean unit phasor of the sample'''
    return complex(np.mean(np.exp(1j * _phases(phases))))


def resultant_length(phases):
    return abs(resultant(phases))


def _checked_resultant(phases, tolerance):
    mean = resultant(phases)
    if abs(mean) <= tolerance:
        raise DegenerateMean('Resultant length {r:.3g} too small for a '
                             'circular mean'.format(r=abs(mean)),
                             resultant_length=abs(mean))
    return mean


def circular_mean(phases, tolerance=RESULTANT_TOLERANCE):
    '''Argument of the summed unit phasors

    Raises
    ------

        DegenerateMean: resultant length at or below ``tolerance``
    '''
    return wrap_phase(np.angle(_checked_resultant(phases, tolerance)))


def holevo_variance(phases, tolerance=RESULTANT_TOLERANCE):
    '''R^-2 - 1'''
    length = abs(_checked_resultant(phases, tolerance))
    return max(length ** -2 - 1.0, 0.0)


def deviations(phases, center):
    '''wrap(phi - center) for every sample'''
    return np.atleast_1d(phase_difference(_phases(phases), center))


def wrapped_variance(phases, center=None):
    '''Mean squared wrapped deviation from ``center``

    ``center`` defaults to the circular mean of the sample, whose
    DegenerateMean propagates.
    '''
    if center is None:
        center = circular_mean(phases)
    return float(np.mean(deviations(phases, center) ** 2))


def batch_standard_error(phases, center=None, n_batches=DEFAULT_BATCHES):
    '''Standard error of the wrapped variance from contiguous batches

    Heavy tails at low photon number rule out chi-square error bars, so the
    sample is cut into ``min(n_batches, n // 2)`` batches and the spread of
    their variances is used. NaN for fewer than four samples.
    '''
    phases = _phases(phases)
    batches = min(n_batches, phases.size // 2)
    if batches < 2:
        return math.nan
    if center is None:
        center = circular_mean(phases)
    squared = deviations(phases, center) ** 2
    means = np.array([chunk.mean()
                      for chunk in np.array_split(squared, batches)])
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def tail_fraction(phases, center, threshold):
    '''Fraction of samples further than ``threshold`` from ``center``'''
    if not 0 < threshold < np.pi:
        raise DomainError('threshold must lie in (0, pi), got '
                          '{t}'.format(t=threshold))
    return float(np.mean(np.abs(deviations(phases, center)) > threshold))


def interquartile_width(phases, center):
    '''Spread between the quartiles of the wrapped deviations'''
    upper, lower = np.percentile(deviations(phases, center), [75, 25])
    return float(upper - lower)


@dataclass(frozen=True)
class Histogram:
    '''Counts of wrapped deviations in equal bins over (-pi, pi]

    Bins are closed on the right, so a deviation of exactly pi falls in the
    top bin.
    '''

    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    def rows(self):
        for lower, upper, count in zip(self.bin_edges[:-1],
                                       self.bin_edges[1:], self.counts):
            yield {'bin_lower': float(lower),
                   'bin_upper': float(upper),
                   'count': int(count)}


def build_histogram(phases, center, n_bins):
    '''Histogram of wrap(phi - center)'''
    if int(n_bins) != n_bins or n_bins < 2:
        raise DomainError('n_bins must be an integer >= 2, got '
                          '{n}'.format(n=n_bins))
    edges = np.linspace(-np.pi, np.pi, int(n_bins) + 1)
    offsets = deviations(phases, center)
    bins = np.clip(np.searchsorted(edges, offsets, side='left') - 1,
                   0, int(n_bins) - 1)
    counts = np.bincount(bins, minlength=int(n_bins))
    return Histogram(bin_edges=edges, counts=counts, total=int(offsets.size))


def reference_curves(mean_photon_number, noise):
    '''Large-N asymptotic variance limits for a coherent pulse

    Returns a dict with

        fundamental_limit    1 / (4 N_eff)
        heterodyne_limit     1 / (2 N_eff), electronic noise included
        heterodyne_absolute  1 / (2 eta N), electronic noise ignored

    where N_eff = eta N / (1 + r).
    '''
    if not mean_photon_number > 0:
        raise DomainError('mean_photon_number must be positive for reference '
                          'curves, got {n}'.format(n=mean_photon_number))
    n_eff = noise.effective_photon_number(mean_photon_number)
    return {'fundamental_limit': 1.0 / (4.0 * n_eff),
            'heterodyne_limit': 1.0 / (2.0 * n_eff),
            'heterodyne_absolute': 1.0 / (2.0 * noise.efficiency
                                          * mean_photon_number)}


def phase_slope(signal_phases, variances):
    '''Least-squares slope of variance against signal phase

    Returns (slope, standard error of the slope).
    '''
    fit = scistats.linregress(np.asarray(signal_phases, dtype=float),
                              np.asarray(variances, dtype=float))
    return float(fit.slope), float(fit.stderr)


@dataclass(frozen=True)
class EnsembleStats:
    '''Summary of an ensemble of single-shot estimates'''

    n: int
    circular_mean: float
    holevo_variance: float
    wrapped_variance: float
    resultant_length: float
    ambiguous_count: int = 0
    stderr: float = math.nan

    @classmethod
    def from_phases(cls, phases, ambiguous=None):
        '''Compute every statistic of a sample

        Raises
        ------

            DegenerateMean: sample has no usable mean direction
        '''
        phases = _phases(phases)
        mean = circular_mean(phases)
        return cls(n=int(phases.size),
                   circular_mean=mean,
                   holevo_variance=holevo_variance(phases),
                   wrapped_variance=wrapped_variance(phases, mean),
                   resultant_length=resultant_length(phases),
                   ambiguous_count=(0 if ambiguous is None
                                    else int(np.count_nonzero(ambiguous))),
                   stderr=batch_standard_error(phases, mean))

    def as_dict(self):
        return {'n': self.n,
                'circular_mean': self.circular_mean,
                'holevo_variance': self.holevo_variance,
                'wrapped_variance': self.wrapped_variance,
                'resultant_length': self.resultant_length,
                'ambiguous_count': self.ambiguous_count,
                'stderr': self.stderr}


@dataclass(frozen=True)
class EnsembleSummary:
    '''Partial ensemble, mergeable in any grouping and order

    Keeps every estimate keyed by its trajectory index; ``finalize`` orders
    them by index, so the resulting EnsembleStats never depends on how the
    partial summaries were produced or combined.
    '''

    indices: np.ndarray
    phases: np.ndarray
    ambiguous: np.ndarray

    @classmethod
    def from_arrays(cls, indices, phases, ambiguous=None):
        indices = np.asarray(indices, dtype=np.int64).ravel()
        phases = np.asarray(phases, dtype=float).ravel()
        if ambiguous is None:
            ambiguous = np.zeros(phases.size, dtype=bool)
        ambiguous = np.asarray(ambiguous, dtype=bool).ravel()
        if not indices.size == phases.size == ambiguous.size:
            raise DomainError('indices, phases and ambiguous flags differ in '
                              'length')
        order = np.argsort(indices, kind='stable')
        indices = indices[order]
        if np.any(np.diff(indices) == 0):
            raise DomainError('Duplicate trajectory index in summary')
        return cls(indices=indices, phases=phases[order],
                   ambiguous=ambiguous[order])

    @classmethod
    def empty(cls):
        return cls.from_arrays([], [], [])

    def __len__(self):
        return int(self.indices.size)

    def merge(self, other):
        return EnsembleSummary.from_arrays(
            np.concatenate([self.indices, other.indices]),
            np.concatenate([self.phases, other.phases]),
            np.concatenate([self.ambiguous, other.ambiguous]))

    def finalize(self):
        return EnsembleStats.from_phases(self.phases, self.ambiguous)


def merge_summaries(summaries):
    '''Fold any number of partial summaries into one'''
    return functools.reduce(EnsembleSummary.merge, summaries,
                            EnsembleSummary.empty())
