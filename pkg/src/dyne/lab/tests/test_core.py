#!/bin/env python
""" Unit tests for the dyne.lab accumulators and estimators. """
import math
import unittest

import numpy as np

from dyne.lab.core import (DyneAccumulators, EstimatorKind, wrap_phase,
                           phase_difference, accumulate_step, feedback_phase,
                           estimate, estimate_mark1, estimate_mark2,
                           estimate_iq, estimate_photon_number)
from dyne.lab.errors import AmbiguousEstimate, DomainError
from dyne.lab.models import NoiseModel


def noiseless_accumulators(lo_phases, true_phase, mean_photon_number):
    '''Accumulate the noiseless charges 2 sqrt(N) cos(phi - Phi) dt

    ``lo_phases`` has one row per record and one column per step.
    '''
    lo_phases = np.atleast_2d(lo_phases)
    dt = 1.0 / lo_phases.shape[1]
    acc = DyneAccumulators.zeros(lo_phases.shape[0])
    for k in range(lo_phases.shape[1]):
        charge = (2 * math.sqrt(mean_photon_number)
                  * np.cos(true_phase - lo_phases[:, k]) * dt)
        acc = accumulate_step(acc, charge, lo_phases[:, k], dt)
    return acc


def piecewise_lo(rng, count, n_steps, max_segments=8):
    '''Random piecewise-constant LO trajectories on the step grid'''
    rows = np.empty((count, n_steps))
    for row in rows:
        segments = rng.integers(2, max_segments + 1)
        cuts = np.sort(rng.choice(np.arange(1, n_steps), segments - 1,
                                  replace=False))
        for segment, phase in zip(np.split(np.arange(n_steps), cuts),
                                  rng.uniform(-np.pi, np.pi, segments)):
            row[segment] = phase
    return rows


class test_wrap_phase(unittest.TestCase):

    def test_examples(self):
        self.assertAlmostEqual(wrap_phase(3 * np.pi / 2), -np.pi / 2)
        self.assertEqual(wrap_phase(-np.pi), np.pi)
        self.assertEqual(wrap_phase(0.3), 0.3)
        self.assertEqual(wrap_phase(np.pi), np.pi)

    def test_non_finite(self):
        with self.assertRaises(DomainError):
            wrap_phase(math.nan)
        with self.assertRaises(DomainError):
            wrap_phase([0.0, math.inf])

    def test_idempotent(self):
        x = np.random.default_rng(1).uniform(-50, 50, 1000)
        once = wrap_phase(x)
        np.testing.assert_array_equal(wrap_phase(once), once)
        self.assertTrue(np.all((once > -np.pi) & (once <= np.pi)))

    def test_periodic(self):
        for x in (0.7, -2.1, 3.0, -0.01):
            for k in range(-3, 4):
                self.assertLess(
                    abs(phase_difference(wrap_phase(x + 2 * np.pi * k),
                                         wrap_phase(x))), 1e-9)

    def test_array_shape(self):
        out = wrap_phase(np.array([[4.0, -4.0], [0.0, 1.0]]))
        self.assertEqual(out.shape, (2, 2))


class test_accumulate_step(unittest.TestCase):

    def test_quadrature_step(self):
        acc = accumulate_step(DyneAccumulators(), 0.02, np.pi / 2, 0.01)
        self.assertAlmostEqual(acc.A, 0.02j)
        self.assertAlmostEqual(acc.B, 0.01)
        self.assertAlmostEqual(acc.elapsed, 0.01)

    def test_real_axis_step(self):
        acc = accumulate_step(DyneAccumulators(), 0.04, 0.0, 0.01)
        self.assertAlmostEqual(acc.A, 0.04)
        self.assertAlmostEqual(acc.B, -0.01)

    def test_linearity(self):
        two = accumulate_step(
            accumulate_step(DyneAccumulators(), 0.03, 1.1, 0.01),
            -0.05, 1.1, 0.01)
        one = accumulate_step(DyneAccumulators(), -0.02, 1.1, 0.02)
        self.assertAlmostEqual(two.A, one.A)
        self.assertAlmostEqual(two.B, one.B)
        self.assertAlmostEqual(two.elapsed, one.elapsed)

    def test_bad_step(self):
        with self.assertRaises(DomainError):
            accumulate_step(DyneAccumulators(), 0.1, 0.0, 0.0)
        with self.assertRaises(DomainError):
            accumulate_step(DyneAccumulators(elapsed=0.995), 0.1, 0.0, 0.01)
        with self.assertRaises(DomainError):
            accumulate_step(DyneAccumulators(), math.nan, 0.0, 0.01)

    def test_b_bounded_by_elapsed(self):
        rng = np.random.default_rng(7)
        acc = DyneAccumulators()
        previous = 0.0
        for phase, charge in zip(rng.uniform(-np.pi, np.pi, 200),
                                 rng.normal(0, 0.1, 200)):
            acc = accumulate_step(acc, charge, phase, 1 / 200)
            self.assertLessEqual(abs(acc.B), acc.elapsed + 1e-12)
            self.assertGreaterEqual(acc.elapsed, previous)
            previous = acc.elapsed


class test_feedback_phase(unittest.TestCase):

    def test_examples(self):
        self.assertAlmostEqual(feedback_phase(DyneAccumulators(A=1 + 0j), 0.0),
                               np.pi / 2)
        self.assertAlmostEqual(feedback_phase(DyneAccumulators(A=1j), 0.0),
                               np.pi)
        self.assertEqual(feedback_phase(DyneAccumulators(A=0j), -1.25), -1.25)

    def test_block_mixes_fallback(self):
        acc = DyneAccumulators(A=np.array([0j, 1 + 0j]), B=np.zeros(2))
        np.testing.assert_allclose(feedback_phase(acc, np.array([0.4, 0.4])),
                                   [0.4, np.pi / 2])


class test_estimators(unittest.TestCase):

    def test_mark1(self):
        acc = DyneAccumulators(A=3 * np.exp(0.7j))
        result = estimate_mark1(acc)
        self.assertAlmostEqual(result.phi_hat, 0.7)
        self.assertAlmostEqual(result.magnitude, 3.0)
        self.assertIs(result.estimator_kind, EstimatorKind.MARK1)
        doubled = estimate_mark1(DyneAccumulators(A=6 * np.exp(0.7j)))
        self.assertAlmostEqual(doubled.phi_hat, result.phi_hat)
        with self.assertRaises(AmbiguousEstimate):
            estimate_mark1(DyneAccumulators())

    def test_mark2_examples(self):
        acc = DyneAccumulators(A=2 * np.exp(1.0j), B=0j)
        self.assertAlmostEqual(estimate_mark2(acc).phi_hat, 1.0)
        with self.assertRaises(AmbiguousEstimate):
            estimate_mark2(DyneAccumulators(A=math.sqrt(2) + 0j, B=-1 + 0j))

    def test_mark2_reduces_to_mark1(self):
        acc = DyneAccumulators(A=-0.3 + 0.8j, B=0j)
        self.assertEqual(estimate_mark2(acc).phi_hat,
                         estimate_mark1(acc).phi_hat)

    def test_iq(self):
        acc = DyneAccumulators(A=0.2 - 1.1j, B=0.1j)
        self.assertEqual(estimate_iq(acc).phi_hat, estimate_mark1(acc).phi_hat)
        self.assertIs(estimate_iq(acc).estimator_kind, EstimatorKind.IQ)
        with self.assertRaises(AmbiguousEstimate):
            estimate_iq(DyneAccumulators())

    def test_fallback_flags_ambiguous(self):
        acc = DyneAccumulators(A=np.array([math.sqrt(2), 1j]),
                               B=np.array([-1 + 0j, 0j]), elapsed=1.0)
        result = estimate(acc, EstimatorKind.MARK2, fallback=np.full(2, 0.5))
        np.testing.assert_array_equal(result.ambiguous, [True, False])
        self.assertEqual(result.phi_hat[0], 0.5)
        self.assertAlmostEqual(result.phi_hat[1], np.pi / 2)

    def test_two_segment_record(self):
        # Phi = 0 on [0, 1/2), pi/2 on [1/2, 1], N = 4, phi = 1
        lo = np.concatenate([np.zeros(512), np.full(512, np.pi / 2)])
        acc = noiseless_accumulators(lo, 1.0, 4.0)
        self.assertAlmostEqual(complex(acc.A[0]), 2 * np.exp(1.0j))
        self.assertAlmostEqual(complex(acc.B[0]), 0j)
        self.assertAlmostEqual(estimate_mark2(acc).phi_hat[0], 1.0)

    def test_constant_lo_is_ambiguous(self):
        acc = noiseless_accumulators(np.zeros(256), np.pi / 4, 1.0)
        self.assertAlmostEqual(complex(acc.A[0]), math.sqrt(2))
        self.assertAlmostEqual(complex(acc.B[0]), -1)
        with self.assertRaises(AmbiguousEstimate):
            estimate_mark2(acc)

    def test_noiseless_exactness(self):
        rng = np.random.default_rng(2002)
        lo = piecewise_lo(rng, 100, 8192)
        phases = rng.uniform(-np.pi, np.pi, 100)
        N = 10.0
        dt = 1.0 / lo.shape[1]
        acc = DyneAccumulators.zeros(100)
        for k in range(lo.shape[1]):
            charge = 2 * math.sqrt(N) * np.cos(phases - lo[:, k]) * dt
            acc = accumulate_step(acc, charge, lo[:, k], dt)
        usable = np.abs(acc.B) <= 0.99
        self.assertGreater(np.count_nonzero(usable), 50)

        # A + B conj(A) = sqrt(N) exp(i phi) (1 - |B|^2)
        z = acc.A + acc.B * np.conj(acc.A)
        expected = math.sqrt(N) * np.exp(1j * phases) * (1 - np.abs(acc.B) ** 2)
        np.testing.assert_allclose(z[usable], expected[usable], atol=1e-9)

        result = estimate(acc, EstimatorKind.MARK2, fallback=np.zeros(100))
        errors = np.abs(phase_difference(result.phi_hat, phases))
        self.assertLess(np.max(errors[usable]), 1e-3)


class test_symmetries(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(11)
        self.lo = rng.uniform(-np.pi, np.pi, 300)
        self.charges = rng.normal(0.05, 0.06, 300)

    def accumulate(self, lo, charges):
        acc = DyneAccumulators()
        for phase, charge in zip(lo, charges):
            acc = accumulate_step(acc, charge, phase, 1 / 300)
        return acc

    def test_equivariance(self):
        delta = 1.234
        acc = self.accumulate(self.lo, self.charges)
        shifted = self.accumulate(wrap_phase(self.lo + delta), self.charges)
        self.assertAlmostEqual(shifted.A, np.exp(1j * delta) * acc.A,
                               places=12)
        self.assertAlmostEqual(shifted.B, np.exp(2j * delta) * acc.B,
                               places=12)
        self.assertLess(abs(phase_difference(
            estimate_mark2(shifted).phi_hat,
            estimate_mark2(acc).phi_hat + delta)), 1e-12)

    def test_scale_invariance(self):
        acc = self.accumulate(self.lo, self.charges)
        scaled = self.accumulate(self.lo, 3.5 * self.charges)
        for estimator in (estimate_mark1, estimate_mark2, estimate_iq):
            self.assertLess(abs(phase_difference(estimator(scaled).phi_hat,
                                                 estimator(acc).phi_hat)),
                            1e-12)


class test_photon_number(unittest.TestCase):

    def test_noiseless_heterodyne(self):
        n_steps = 1000
        lo = 0.3 + 2 * np.pi * 5 * np.arange(n_steps) / n_steps
        acc = noiseless_accumulators(lo, -0.8, 25.0)
        self.assertLess(abs(complex(acc.B[0])), 1e-9)
        self.assertAlmostEqual(estimate_iq(acc).phi_hat[0], -0.8)
        # noiseless record: no shot-noise floor to subtract
        self.assertAlmostEqual(float(np.abs(acc.A[0]) ** 2), 25.0)
        self.assertAlmostEqual(
            estimate_photon_number(acc, NoiseModel())[0], 24.0)


if __name__ == '__main__':
    unittest.main()
