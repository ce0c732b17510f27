"""
Experiment drivers behind the management commands. Each returns a
``Report`` (CSV header and rows); block work runs through
``waveform.montecarlo.map_blocks`` so output does not depend on the
number of workers.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from django.conf import settings

from experiments.config import ConfigError, ExperimentConfig
from waveform.channel import (
    LinkSetup,
    SoftLimiter,
    power_increase_db,
    run_ser_curve,
)
from waveform.constellation import fourth_moment_ratio, map_symbols
from waveform.montecarlo import block_rng, map_blocks
from waveform.peaks import (
    CcdfAccumulator,
    block_power_covariances,
    default_grid,
    empirical_power_covariance,
    mean_power,
    papr_db,
    power_covariance_closed_form,
)
from waveform.ti import Scheme, solve
from waveform.transform import idaft

logger = logging.getLogger(__name__)

POWER_SCHEMES = ("none", Scheme.CR.value, Scheme.FCR.value)


@dataclass
class Report:
    header: tuple
    rows: list = field(default_factory=list)


def _link_setup(config: ExperimentConfig, scheme=None, n_subcarriers=None):
    return LinkSetup(
        plan=config.plan(n_subcarriers),
        constellation=config.constellation,
        ti_config=config.ti_config(scheme, n_subcarriers),
    )


def _draw(setup: LinkSetup, seed: int, block_index: int):
    rng = block_rng(seed, block_index)
    return map_symbols(rng, setup.constellation, setup.plan.n_subcarriers)


def _papr_block(setup: LinkSetup, seed: int, block_index: int):
    symbols = _draw(setup, seed, block_index).symbols
    samples = idaft(setup.plan, symbols + setup.delta * setup.inject(symbols))
    # reference is the original E_s, not the TI-inflated average
    return (
        papr_db(samples, setup.constellation.avg_energy),
        mean_power(samples),
    )


def run_ccdf(config: ExperimentConfig, workers: int = 1) -> Report:
    setup = _link_setup(config)
    logger.info(
        "CCDF: %s N=%d L=%d scheme=%s, %d blocks on %d workers",
        config.waveform, config.n_subcarriers, config.oversampling,
        config.scheme, config.n_blocks, workers,
    )
    outcomes = map_blocks(
        partial(_papr_block, setup, config.seed), config.n_blocks, workers
    )
    accumulator = CcdfAccumulator(
        default_grid(*settings.TONE_INJECTION["CCDF_GRID_DB"])
    )
    for papr_value, block_power in outcomes:
        accumulator.accumulate(papr_value, block_power)
    query = accumulator.query(1e-3)
    logger.info(
        "PAPR at CCDF 1e-3: %.2f dB%s; mean block power %.4f",
        query.threshold_db,
        " (low confidence)" if query.low_confidence else "",
        accumulator.mean_block_power,
    )
    return Report(
        header=("threshold_db", "ccdf"),
        rows=list(zip(accumulator.grid_db.tolist(), accumulator.ccdf())),
    )


def run_ser(config: ExperimentConfig, workers: int = 1) -> Report:
    setup = _link_setup(config)
    if config.limiter_enabled:
        limiter = SoftLimiter.from_db(
            config.limiter_threshold_db, setup.constellation.avg_energy
        )
    else:
        limiter = SoftLimiter()
    setup = LinkSetup(
        plan=setup.plan,
        constellation=setup.constellation,
        ti_config=setup.ti_config,
        limiter=limiter,
        limiter_oversampling=config.limiter_oversampling,
    )
    logger.info(
        "SER: scheme=%s limiter=%s at L=%d, %d blocks on %d workers",
        config.scheme, limiter.clip_amplitude, config.limiter_oversampling,
        config.n_blocks, workers,
    )
    accumulator = run_ser_curve(
        setup,
        config.es_n0_db,
        config.n_blocks,
        config.seed,
        workers=workers,
        calibration_blocks=config.calibration_blocks,
    )
    return Report(
        header=("es_n0_db", "ser", "symbols"),
        rows=list(
            zip(
                accumulator.es_n0_db.tolist(),
                accumulator.ser().tolist(),
                accumulator.totals.tolist(),
            )
        ),
    )


def _injection_block(setup: LinkSetup, seed: int, block_index: int):
    symbols = _draw(setup, seed, block_index).symbols
    return symbols, setup.inject(symbols)


def run_power(config: ExperimentConfig, workers: int = 1) -> Report:
    report = Report(header=("scheme", "power_increase_db"))
    for scheme in POWER_SCHEMES:
        setup = _link_setup(config, scheme)
        pairs = map_blocks(
            partial(_injection_block, setup, config.seed),
            config.n_blocks,
            workers,
        )
        increase = power_increase_db(
            np.array([pair[0] for pair in pairs]),
            np.array([pair[1] for pair in pairs]),
            setup.delta,
        )
        logger.info("Power increase of %s: %.3f dB", scheme, increase)
        report.rows.append((scheme, increase))
    return report


def covariance_lags(oversampling: int, n_samples: int) -> list:
    """1..L, the lags where the closed form goes from peak to zero."""
    return [lag for lag in range(1, oversampling + 1) if lag % n_samples]


def _covariance_block(setup: LinkSetup, lags, seed: int, block_index: int):
    symbols = _draw(setup, seed, block_index).symbols
    samples = idaft(setup.plan, symbols)
    sigma_sq = setup.constellation.avg_energy
    return [
        float(block_power_covariances(samples, lag, sigma_sq)[0])
        for lag in lags
    ]


def run_covcheck(config: ExperimentConfig, workers: int = 1) -> Report:
    setup = _link_setup(config, "none")
    plan, constellation = setup.plan, setup.constellation
    lags = covariance_lags(plan.oversampling, plan.n_samples)
    per_block = np.array(
        map_blocks(
            partial(_covariance_block, setup, lags, config.seed),
            config.n_blocks,
            workers,
        )
    )
    sigma_sq = constellation.avg_energy
    kurtosis = fourth_moment_ratio(constellation)
    report = Report(
        header=(
            "delta_n",
            "empirical_cov",
            "closed_form",
            "rel_error",
            "raw_cov",
            "std_error",
        )
    )
    for column, lag in enumerate(lags):
        estimate = empirical_power_covariance(
            per_block[:, column], sigma_sq, plan.n_subcarriers, kurtosis
        )
        closed_form = power_covariance_closed_form(
            lag, plan.oversampling, plan.n_subcarriers, sigma_sq
        )
        if closed_form > 0:
            rel_error = abs(estimate.corrected - closed_form) / closed_form
        else:
            rel_error = math.nan
        report.rows.append(
            (
                lag,
                estimate.corrected,
                closed_form,
                rel_error,
                estimate.raw,
                estimate.std_error,
            )
        )
    return report


def _complexity_block(setup: LinkSetup, seed: int, block_index: int):
    symbols = _draw(setup, seed, block_index).symbols
    ti_result = solve(
        symbols,
        setup.plan,
        setup.ti_config,
        setup.delta,
        setup.constellation.avg_energy,
    )
    counters = ti_result.counters
    return (
        max(counters.nwcs_per_ranking, default=0),
        len(counters.nwcs_per_ranking),
        counters.nwcs_evaluations,
        counters.iterations,
        counters.leaves,
    )


def run_complexity(config: ExperimentConfig, workers: int = 1) -> Report:
    if config.scheme == "none":
        raise ConfigError(
            {"scheme": ["complexity needs a tone-injection scheme"]}
        )
    report = Report(
        header=(
            "n_subcarriers",
            "per_iter_nwcs",
            "total_nwcs",
            "iterations",
            "leaves",
            "mean_per_iter_nwcs",
            "n_peaks",
            "n_candidates",
        )
    )
    for n_subcarriers in config.n_values or (config.n_subcarriers,):
        setup = _link_setup(config, n_subcarriers=n_subcarriers)
        counts = map_blocks(
            partial(_complexity_block, setup, config.seed),
            config.n_blocks,
            workers,
        )
        n_blocks = len(counts)
        rankings = sum(count[1] for count in counts)
        total_nwcs = sum(count[2] for count in counts)
        ti_config = setup.ti_config
        n_candidates = (
            ti_config.n_filtered
            if ti_config.scheme is Scheme.FCR
            else n_subcarriers
        )
        report.rows.append(
            (
                n_subcarriers,
                max(count[0] for count in counts),
                total_nwcs / n_blocks,
                sum(count[3] for count in counts) / n_blocks,
                sum(count[4] for count in counts) / n_blocks,
                total_nwcs / rankings if rankings else 0.0,
                ti_config.n_peaks,
                n_candidates,
            )
        )
    return report
