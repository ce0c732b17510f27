import math

import numpy as np
from django.test import SimpleTestCase, tag

from waveform.channel import (
    LinkSetup,
    SerAccumulator,
    SoftLimiter,
    add_awgn,
    calibrate_power_factor,
    clipped_fraction,
    frequency_noise_power,
    power_increase_db,
    receive,
    run_ser_curve,
    soft_limit,
)
from waveform.constellation import (
    QamConstellation,
    lattice_step,
    map_symbols,
    theoretical_ser,
)
from waveform.montecarlo import block_rng
from waveform.ti import TiConfig
from waveform.transform import ChirpParams, daft, idaft, make_plan


def sample_setup(**params):
    defaults = {
        "plan": make_plan(16, 4),
        "constellation": QamConstellation(order=16),
        "ti_config": None,
        "limiter": SoftLimiter(),
    }
    defaults.update(params)

    return LinkSetup(**defaults)


def random_signal(seed, n_samples, scale=1.0):
    rng = np.random.default_rng(seed)
    return scale * (
        rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)
    )


class SoftLimiterTests(SimpleTestCase):
    def setUp(self):
        self.limiter = SoftLimiter(clip_amplitude=1.5)

    def test_signal_below_threshold_is_unchanged(self):
        samples = random_signal(1, 64, scale=0.1)
        samples = samples[np.abs(samples) < 1.5]

        np.testing.assert_array_equal(
            soft_limit(samples, self.limiter), samples
        )

    def test_double_threshold_clips_to_threshold(self):
        sample = 3.0 * np.exp(0.4j)

        (limited,) = soft_limit([sample], self.limiter)

        self.assertAlmostEqual(abs(limited), 1.5)
        self.assertAlmostEqual(np.angle(limited), 0.4)

    def test_per_sample_oracle(self):
        samples = random_signal(2, 256)

        limited = soft_limit(samples, self.limiter)

        np.testing.assert_allclose(
            np.abs(limited), np.minimum(np.abs(samples), 1.5), rtol=1e-12
        )
        np.testing.assert_allclose(
            np.angle(limited), np.angle(samples), atol=1e-12
        )

    def test_idempotent_and_never_amplifies(self):
        samples = random_signal(3, 256)

        once = soft_limit(samples, self.limiter)
        twice = soft_limit(once, self.limiter)

        np.testing.assert_allclose(twice, once, rtol=1e-12)
        self.assertTrue(np.all(np.abs(once) <= np.abs(samples) + 1e-12))

    def test_disabled_limiter(self):
        samples = random_signal(4, 32, scale=100.0)

        self.assertFalse(SoftLimiter().enabled)
        np.testing.assert_array_equal(
            soft_limit(samples, SoftLimiter()), samples
        )
        self.assertEqual(clipped_fraction(samples, SoftLimiter()), 0.0)

    def test_from_db(self):
        """Test 4.5 dB above E_s = 2 gives sqrt(10^0.45 * 2)"""
        limiter = SoftLimiter.from_db(4.5, 2.0)

        self.assertAlmostEqual(
            limiter.clip_amplitude, math.sqrt(10**0.45 * 2)
        )

    def test_clipped_fraction(self):
        fraction = clipped_fraction([0.5, 2.0, 1.5, 0.1], self.limiter)

        self.assertEqual(fraction, 0.5)

    def test_non_positive_threshold_rejected(self):
        with self.assertRaises(ValueError):
            SoftLimiter(clip_amplitude=0.0)


class AwgnTests(SimpleTestCase):
    def test_zero_noise_is_identity(self):
        samples = random_signal(5, 16)

        noisy = add_awgn(samples, 0.0, np.random.default_rng(0))

        np.testing.assert_array_equal(noisy, samples)
        self.assertIsNot(noisy, samples)

    def test_variance(self):
        """Test 1e5 draws: total variance within 2%, each axis N0/2"""
        noise = add_awgn(np.zeros(100_000), 0.3, np.random.default_rng(6))

        self.assertAlmostEqual(np.var(noise) / 0.3, 1.0, delta=0.02)
        self.assertAlmostEqual(np.var(noise.real) / 0.15, 1.0, delta=0.03)
        self.assertAlmostEqual(np.var(noise.imag) / 0.15, 1.0, delta=0.03)

    def test_negative_noise_power_rejected(self):
        with self.assertRaises(ValueError):
            add_awgn(np.zeros(4), -1.0, np.random.default_rng(0))

    def test_frequency_noise_power(self):
        """Test L^2 E_s / (Es/N0) at 10 dB"""
        self.assertAlmostEqual(frequency_noise_power(10.0, 8, 1.0), 6.4)


class ReceiveTests(SimpleTestCase):
    def setUp(self):
        self.constellation = QamConstellation(order=64)
        self.delta = lattice_step(self.constellation)
        self.plan = make_plan(32, 4, ChirpParams.afdm(32))

    def test_noiseless_loopback_with_arbitrary_injection(self):
        rng = np.random.default_rng(7)
        draw = map_symbols(rng, self.constellation, 32)
        b = rng.integers(-4, 5, 32) + 1j * rng.integers(-4, 5, 32)

        samples = idaft(self.plan, draw.symbols + self.delta * b)
        observation = daft(self.plan, samples) / self.plan.oversampling

        np.testing.assert_array_equal(
            receive(observation, self.delta, self.constellation),
            draw.indices,
        )

    def test_noiseless_loopback_without_injection(self):
        draw = map_symbols(np.arange(32), self.constellation)

        samples = idaft(self.plan, draw.symbols)
        observation = daft(self.plan, samples) / self.plan.oversampling

        np.testing.assert_array_equal(
            receive(observation, self.delta, self.constellation),
            draw.indices,
        )

    def test_overwhelming_noise_approaches_uniform_guessing(self):
        """Test SER -> (M - 1) / M as N0 grows"""
        constellation = QamConstellation(order=4)
        delta = lattice_step(constellation)
        rng = np.random.default_rng(8)
        draw = map_symbols(rng, constellation, 20_000)

        noisy = add_awgn(draw.symbols, 1e6, rng)
        detected = receive(noisy, delta, constellation)

        self.assertAlmostEqual(
            np.mean(detected != draw.indices), 0.75, delta=0.015
        )


class PowerIncreaseTests(SimpleTestCase):
    def test_no_injection_is_zero_db(self):
        symbols = random_signal(9, 64).reshape(4, 16)

        with self.assertLogs("waveform.channel", level="WARNING"):
            increase = power_increase_db(symbols, np.zeros((4, 16)), 2.0)

        self.assertEqual(increase, 0.0)

    def test_ratio_of_energies(self):
        symbols = np.ones((1, 2))
        b = np.array([[1, 0]])

        with self.assertLogs("waveform.channel", level="WARNING"):
            increase = power_increase_db(symbols, b, 1.0)

        self.assertAlmostEqual(increase, 10 * math.log10(5 / 2))


class SerAccumulatorTests(SimpleTestCase):
    def test_merge_and_rate(self):
        first = SerAccumulator([0.0, 10.0])
        second = SerAccumulator([0.0, 10.0])
        first.accumulate(0, 5, 100)
        second.accumulate(0, 15, 100)
        second.accumulate(1, 2, 200)

        first.merge(second)

        np.testing.assert_allclose(first.ser(), [0.1, 0.01])

    def test_empty_bucket_reports_zero(self):
        self.assertEqual(SerAccumulator([5.0]).ser().tolist(), [0.0])


class LinkSetupTests(SimpleTestCase):
    def test_no_scheme_injects_nothing(self):
        setup = sample_setup()

        self.assertFalse(np.any(setup.inject(np.ones(16))))
        self.assertEqual(calibrate_power_factor(setup, 10, 0), 1.0)

    def test_delta_follows_constellation(self):
        setup = sample_setup()

        self.assertAlmostEqual(setup.delta, lattice_step(setup.constellation))

    def test_limiter_plan_defaults_to_injection_plan(self):
        setup = sample_setup()

        self.assertIs(setup.limiter_plan, setup.plan)

    def test_limiter_plan_at_symbol_rate(self):
        setup = sample_setup(limiter_oversampling=1)

        self.assertEqual(setup.limiter_plan.oversampling, 1)
        self.assertEqual(setup.limiter_plan.n_subcarriers, 16)

    def test_modulo_only_under_tone_injection(self):
        """Test a value beyond the outer edge folds only with TI active"""
        plain = sample_setup()
        injected = sample_setup(ti_config=TiConfig())
        corner = int(np.argmax(plain.constellation.points.real))
        beyond = plain.constellation.points[corner] + 0.45 * plain.delta

        self.assertEqual(plain.demodulate(np.array([beyond]))[0], corner)
        self.assertEqual(
            injected.demodulate(np.array([beyond]))[0],
            receive(beyond, injected.delta, injected.constellation),
        )
        self.assertNotEqual(
            injected.demodulate(np.array([beyond]))[0], corner
        )

    def test_calibrated_factor_is_at_least_one(self):
        setup = sample_setup(ti_config=TiConfig(max_iters=5, n_peaks=4))

        with self.assertLogs("waveform.channel", level="INFO"):
            factor = calibrate_power_factor(setup, 20, 3)

        self.assertGreaterEqual(factor, 1.0)


class SerCurveTests(SimpleTestCase):
    def test_matches_analytic_ser_without_limiter(self):
        """Test b = 0 and no limiter against the square-QAM AWGN SER"""
        setup = sample_setup(plan=make_plan(64, 2))
        es_n0_db = [10.0, 14.0]

        accumulator = run_ser_curve(setup, es_n0_db, 200, seed=11)

        expected = theoretical_ser(setup.constellation, es_n0_db)
        for measured, analytic, total in zip(
            accumulator.ser(), expected, accumulator.totals
        ):
            std_error = math.sqrt(analytic * (1 - analytic) / total)
            self.assertLess(abs(measured - analytic), 4 * std_error)

    def test_distortionless_without_limiter_and_noise(self):
        """Test SER = 0 for any injection when nothing distorts the link"""
        setup = sample_setup(
            constellation=QamConstellation(order=64),
            ti_config=TiConfig(max_iters=5, n_peaks=4),
        )

        accumulator = run_ser_curve(
            setup, [300.0], 20, seed=12, calibration_blocks=10
        )

        self.assertEqual(accumulator.errors.tolist(), [0])
        self.assertEqual(accumulator.totals.tolist(), [20 * 16])

    def test_limiter_raises_error_floor(self):
        setup = sample_setup(
            plan=make_plan(64, 4),
            constellation=QamConstellation(order=64),
            limiter=SoftLimiter.from_db(3.0),
        )

        accumulator = run_ser_curve(setup, [300.0], 50, seed=13)

        self.assertGreater(accumulator.errors[0], 0)

    def test_symbol_rate_amplifier_without_distortion(self):
        """Test a symbol-rate link with injection and no limiter is exact"""
        setup = sample_setup(
            constellation=QamConstellation(order=64),
            ti_config=TiConfig(max_iters=5, n_peaks=4),
            limiter_oversampling=1,
        )

        accumulator = run_ser_curve(
            setup, [300.0], 20, seed=15, calibration_blocks=10
        )

        self.assertEqual(accumulator.errors.tolist(), [0])

    def test_symbol_rate_limiter_clips_more_in_band(self):
        """Test the same limiter costs more symbols at the symbol rate"""
        errors = {}
        for oversampling in (1, 8):
            setup = sample_setup(
                plan=make_plan(64, 8),
                constellation=QamConstellation(order=64),
                limiter=SoftLimiter.from_db(3.0),
                limiter_oversampling=oversampling,
            )

            accumulator = run_ser_curve(setup, [300.0], 200, seed=16)

            errors[oversampling] = accumulator.errors[0]

        self.assertGreater(errors[1], errors[8])

    @tag("slow")
    def test_normalized_transmit_power_matches_symbol_energy(self):
        """Test mean power per sample after normalization within 1% of E_s"""
        setup = sample_setup(
            plan=make_plan(64, 4),
            constellation=QamConstellation(order=64),
            ti_config=TiConfig(max_iters=10, n_peaks=8),
        )
        factor = calibrate_power_factor(setup, 2000, seed=14)
        powers = []
        for block_index in range(2000):
            symbols = map_symbols(
                block_rng(14, block_index), setup.constellation, 64
            ).symbols
            samples = idaft(
                setup.plan, symbols + setup.delta * setup.inject(symbols)
            )
            powers.append(np.mean(np.abs(samples) ** 2) / factor)

        self.assertAlmostEqual(np.mean(powers), 1.0, delta=0.01)
