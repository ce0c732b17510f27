import os
import tempfile
from dataclasses import replace

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from experiments.config import ConfigError, ExperimentConfig
from experiments.config_file import emit, load, parse
from waveform.ti import Scheme
from waveform.transform import ChirpParams


def sample_config(**params):
    defaults = {
        "n_subcarriers": 16,
        "oversampling": 4,
        "constellation_order": 16,
        "n_filtered": 8,
        "n_blocks": 20,
        "calibration_blocks": 10,
        "es_n0_db": (10.0, 20.0),
    }
    defaults.update(params)

    return ExperimentConfig.from_settings(**defaults)


class ExperimentConfigTests(SimpleTestCase):
    def test_defaults_come_from_settings(self):
        config = ExperimentConfig.from_settings()
        defaults = settings.TONE_INJECTION

        self.assertEqual(config.n_subcarriers, defaults["N_SUBCARRIERS"])
        self.assertEqual(config.seed, defaults["SEED"])
        self.assertEqual(config.es_n0_db, tuple(defaults["ES_N0_DB"]))

    @override_settings(
        TONE_INJECTION={**settings.TONE_INJECTION, "N_PEAKS": 40}
    )
    def test_settings_override(self):
        self.assertEqual(ExperimentConfig.from_settings().n_peaks, 40)

    def test_dataclass_defaults_match_settings(self):
        self.assertEqual(ExperimentConfig(), ExperimentConfig.from_settings())

    def test_afdm_alpha2_alone_keeps_default_alpha1(self):
        config = sample_config(waveform="AFDM", alpha2=0.25)

        self.assertEqual(config.chirp, ChirpParams(1 / 32, 0.25))
        self.assertEqual(config.plan(64).chirp, ChirpParams(1 / 128, 0.25))

    def test_afdm_chirp_defaults_to_half_over_n(self):
        config = sample_config(waveform="AFDM")

        self.assertEqual(config.chirp.alpha1, 1 / 32)
        self.assertEqual(config.plan(64).chirp.alpha1, 1 / 128)

    def test_explicit_chirp_kept_for_other_sizes(self):
        config = sample_config(waveform="AFDM", alpha1=0.01)

        self.assertEqual(config.plan(64).chirp.alpha1, 0.01)

    def test_ofdm_plan_has_no_chirp(self):
        self.assertTrue(sample_config().plan().chirp.is_ofdm)

    def test_no_scheme_has_no_ti_config(self):
        self.assertIsNone(sample_config(scheme="none").ti_config())

    def test_ti_config_fields(self):
        ti_config = sample_config(scheme="FCR", max_iters=7).ti_config()

        self.assertIs(ti_config.scheme, Scheme.FCR)
        self.assertEqual(ti_config.max_iters, 7)
        self.assertEqual(ti_config.n_filtered, 8)

    def test_scaling_rule_per_block_size(self):
        config = sample_config(scaling_rule=True, oversampling=8)

        ti_config = config.ti_config(n_subcarriers=256)

        self.assertEqual((ti_config.n_peaks, ti_config.n_filtered), (16, 32))


class ConfigFileTests(SimpleTestCase):
    def test_round_trip(self):
        config = sample_config(
            waveform="AFDM",
            alpha1=0.015625,
            scheme="FCR",
            dfs_enabled=False,
            n_values=(16, 32),
            limiter_enabled=False,
            limiter_oversampling=2,
            seed=2**64 - 1,
        )

        self.assertEqual(parse(emit(config)), config)

    def test_missing_keys_keep_base_values(self):
        base = sample_config()

        config = parse("[ti]\nmax_iters = 3\n", base)

        self.assertEqual(config, replace(base, max_iters=3))

    def test_lists_and_booleans(self):
        config = parse(
            "[channel]\nes_n0_db = 0, 7.5\nlimiter_enabled = false\n",
            sample_config(),
        )

        self.assertEqual(config.es_n0_db, (0.0, 7.5))
        self.assertFalse(config.limiter_enabled)

    def test_unknown_key_rejected(self):
        with self.assertRaisesMessage(ConfigError, "n_pekas"):
            parse("[ti]\nn_pekas = 3\n", sample_config())

    def test_unknown_section_rejected(self):
        with self.assertRaisesMessage(ConfigError, "unknown section"):
            parse("[receiver]\nmode = fast\n", sample_config())

    def test_malformed_file_rejected(self):
        with self.assertRaises(ConfigError):
            parse("max_iters = 3\n", sample_config())

    def test_invalid_values_name_their_field(self):
        cases = (
            ("[waveform]\nn_subcarriers = 1\n", "n_subcarriers"),
            ("[constellation]\nconstellation_order = 32\n",
             "constellation_order"),
            ("[ti]\nscheme = XYZ\n", "scheme"),
            ("[ti]\nbeta = 0\n", "beta"),
            ("[waveform]\nalpha1 = 0.1\n", "alpha1"),
            ("[waveform]\nwaveform = AFDM\nalpha2 = 1.0\n", "alpha2"),
            ("[ti]\nscheme = FCR\nn_filtered = 17\n", "n_filtered"),
            ("[montecarlo]\nseed = -1\n", "seed"),
            ("[channel]\nlimiter_oversampling = 3\n",
             "limiter_oversampling"),
        )
        for text, field_name in cases:
            with self.subTest(field=field_name):
                with self.assertRaises(ConfigError) as raised:
                    parse(text, sample_config())

                self.assertIn(field_name, raised.exception.errors)
                self.assertIn(field_name, str(raised.exception))

    def test_scaling_rule_skips_filter_size_check(self):
        config = parse(
            "[ti]\nscheme = FCR\nn_filtered = 64\nscaling_rule = true\n",
            sample_config(),
        )

        self.assertTrue(config.scaling_rule)

    def test_load_from_file(self):
        with tempfile.NamedTemporaryFile(
            "w", suffix=".ini", delete=False
        ) as config_file:
            config_file.write("[montecarlo]\nn_blocks = 5\n")
        try:
            config = load(config_file.name, sample_config())
        finally:
            os.remove(config_file.name)

        self.assertEqual(config.n_blocks, 5)

    def test_missing_file_rejected(self):
        with self.assertRaisesMessage(ConfigError, "invalid config"):
            load("/nonexistent/experiment.ini")


class ConfigErrorTests(SimpleTestCase):
    def test_diagnostic_lists_every_message(self):
        error = ConfigError({"beta": ["must be positive"], "seed": "bad"})

        self.assertEqual(
            error.diagnostic(),
            "invalid config: beta: must be positive; seed: bad",
        )
