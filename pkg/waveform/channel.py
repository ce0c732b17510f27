"""
Soft-limiter power amplifier, frequency-domain AWGN, the tone-injection
receiver and the SER / transmit-power measurements built on them.

The amplifier samples the waveform at an oversampling factor L_pa dividing
L (the injection plan's L unless set). Es/N0 is the per-subcarrier
detection SNR: the noise w of y = A x + w is drawn with variance
L_pa^2 E_s / (Es/N0), so after the receiver divides by L_pa each
subcarrier sees noise of variance E_s / (Es/N0).
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, partial

import numpy as np

from waveform.constellation import (
    QamConstellation,
    detect,
    lattice_step,
    map_symbols,
    modulo_recover,
)
from waveform.montecarlo import CALIBRATION_STREAM, block_rng, map_blocks
from waveform.ti import TiConfig, solve
from waveform.transform import TransformPlan, daft, decimated_plan, idaft

logger = logging.getLogger(__name__)

RECOMMENDED_ENSEMBLE = 10_000


@dataclass(frozen=True)
class SoftLimiter:
    clip_amplitude: float = math.inf

    def __post_init__(self):
        if not self.clip_amplitude > 0:
            raise ValueError(
                f"clip_amplitude must be positive, got {self.clip_amplitude}"
            )

    @classmethod
    def from_db(cls, threshold_db: float, avg_energy: float = 1.0):
        """Amplitude threshold sqrt(10^(dB/10) E_s) above average power."""
        return cls(math.sqrt(10.0 ** (threshold_db / 10.0) * avg_energy))

    @property
    def enabled(self) -> bool:
        return math.isfinite(self.clip_amplitude)


def soft_limit(samples, limiter: SoftLimiter) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.complex128)
    if not limiter.enabled:
        return samples.copy()
    magnitude = np.abs(samples)
    over = magnitude >= limiter.clip_amplitude
    clipped = samples.copy()
    clipped[over] = limiter.clip_amplitude * np.exp(
        1j * np.angle(samples[over])
    )
    return clipped


def clipped_fraction(samples, limiter: SoftLimiter) -> float:
    if not limiter.enabled:
        return 0.0
    return float(np.mean(np.abs(samples) >= limiter.clip_amplitude))


def add_awgn(samples, noise_power: float, rng: np.random.Generator):
    """Circularly-symmetric complex Gaussian noise, variance N0 per entry."""
    if noise_power < 0:
        raise ValueError(f"noise_power must be >= 0, got {noise_power}")
    samples = np.asarray(samples, dtype=np.complex128)
    if noise_power == 0:
        return samples.copy()
    noise = rng.standard_normal((2,) + samples.shape)
    return samples + math.sqrt(noise_power / 2) * (noise[0] + 1j * noise[1])


def receive(observation, delta: float, constellation: QamConstellation):
    """Per-subcarrier modulo recovery followed by nearest-point detection."""
    return detect(modulo_recover(observation, delta), constellation)


def frequency_noise_power(
    es_n0_db: float, oversampling: int, avg_energy: float = 1.0
) -> float:
    return oversampling**2 * avg_energy / 10.0 ** (es_n0_db / 10.0)


def power_increase_db(symbols, b, delta: float) -> float:
    """10 log10(E||s + delta b||^2 / E||s||^2) over a stack of blocks."""
    symbols = np.atleast_2d(np.asarray(symbols, dtype=np.complex128))
    b = np.atleast_2d(np.asarray(b, dtype=np.complex128))
    if len(symbols) < RECOMMENDED_ENSEMBLE:
        logger.warning(
            "Power increase measured over %d blocks (recommended >= %d)",
            len(symbols), RECOMMENDED_ENSEMBLE,
        )
    injected = np.sum(np.abs(symbols + delta * b) ** 2)
    original = np.sum(np.abs(symbols) ** 2)
    return 10.0 * math.log10(injected / original)


@dataclass
class SerAccumulator:
    es_n0_db: np.ndarray
    errors: np.ndarray = None
    totals: np.ndarray = None

    def __post_init__(self):
        self.es_n0_db = np.asarray(self.es_n0_db, dtype=np.float64)
        if self.errors is None:
            self.errors = np.zeros(len(self.es_n0_db), dtype=np.int64)
        if self.totals is None:
            self.totals = np.zeros(len(self.es_n0_db), dtype=np.int64)

    def accumulate(self, bucket: int, n_errors: int, n_symbols: int):
        self.errors[bucket] += n_errors
        self.totals[bucket] += n_symbols

    def merge(self, other: "SerAccumulator"):
        self.errors += other.errors
        self.totals += other.totals

    def ser(self) -> np.ndarray:
        return np.divide(
            self.errors,
            self.totals,
            out=np.zeros(len(self.errors)),
            where=self.totals > 0,
        )


@dataclass(frozen=True)
class LinkSetup:
    """Everything a block of the link simulation needs."""

    plan: TransformPlan
    constellation: QamConstellation
    ti_config: TiConfig = None
    limiter: SoftLimiter = field(default_factory=SoftLimiter)
    limiter_oversampling: int = None

    @property
    def delta(self) -> float:
        return lattice_step(self.constellation)

    @cached_property
    def limiter_plan(self) -> TransformPlan:
        """Plan of the samples the amplifier sees, the TI plan by default"""
        if self.limiter_oversampling is None:
            return self.plan
        return decimated_plan(self.plan, self.limiter_oversampling)

    def inject(self, symbols) -> np.ndarray:
        """b for one block, all-zero without tone injection"""
        if self.ti_config is None:
            return np.zeros(self.plan.n_subcarriers, dtype=np.complex128)
        return solve(
            symbols,
            self.plan,
            self.ti_config,
            self.delta,
            self.constellation.avg_energy,
        ).b

    def demodulate(self, observation) -> np.ndarray:
        """Modulo receiver under tone injection, plain detection without."""
        if self.ti_config is None:
            return detect(observation, self.constellation)
        return receive(observation, self.delta, self.constellation)


def _calibration_block(setup: LinkSetup, seed: int, block_index: int):
    rng = block_rng(seed, block_index, CALIBRATION_STREAM)
    symbols = map_symbols(
        rng, setup.constellation, setup.plan.n_subcarriers
    ).symbols
    b = setup.inject(symbols)
    return (
        float(np.sum(np.abs(symbols + setup.delta * b) ** 2)),
        float(np.sum(np.abs(symbols) ** 2)),
    )


def calibrate_power_factor(
    setup: LinkSetup, n_blocks: int, seed: int, workers: int = 1
) -> float:
    """Average transmit power increase factor F of the scheme (linear)."""
    if setup.ti_config is None:
        return 1.0
    energies = map_blocks(
        partial(_calibration_block, setup, seed), n_blocks, workers
    )
    injected = math.fsum(energy[0] for energy in energies)
    original = math.fsum(energy[1] for energy in energies)
    factor = injected / original
    logger.info(
        "Calibrated power increase %.3f dB over %d blocks",
        10 * math.log10(factor), n_blocks,
    )
    return factor


def _ser_block(
    setup: LinkSetup, es_n0_db, power_factor: float, seed: int, block_index
):
    rng = block_rng(seed, block_index)
    draw = map_symbols(rng, setup.constellation, setup.plan.n_subcarriers)
    b = setup.inject(draw.symbols)
    gain = math.sqrt(power_factor)
    limiter_plan = setup.limiter_plan
    transmitted = idaft(limiter_plan, draw.symbols + setup.delta * b) / gain
    amplified = soft_limit(transmitted, setup.limiter)
    spectrum = daft(limiter_plan, amplified)
    n_errors = []
    for snr_db in es_n0_db:
        noise_power = frequency_noise_power(
            snr_db, limiter_plan.oversampling, setup.constellation.avg_energy
        )
        observation = add_awgn(spectrum, noise_power, rng)
        observation *= gain / limiter_plan.oversampling
        detected = setup.demodulate(observation)
        n_errors.append(int(np.count_nonzero(detected != draw.indices)))
    return n_errors, clipped_fraction(transmitted, setup.limiter)


def run_ser_curve(
    setup: LinkSetup,
    es_n0_db,
    n_blocks: int,
    seed: int,
    workers: int = 1,
    calibration_blocks: int = RECOMMENDED_ENSEMBLE,
) -> SerAccumulator:
    """
    Monte-Carlo SER over an Es/N0 grid: map, inject, normalize transmit
    power by the calibrated increase, transform, soft-limit, transform
    back, add noise, scale by 1/L and detect.
    """
    es_n0_db = [float(snr_db) for snr_db in es_n0_db]
    power_factor = calibrate_power_factor(
        setup, calibration_blocks, seed, workers
    )
    block_outcomes = map_blocks(
        partial(_ser_block, setup, es_n0_db, power_factor, seed),
        n_blocks,
        workers,
    )
    accumulator = SerAccumulator(es_n0_db)
    for n_errors, _ in block_outcomes:
        for bucket, count in enumerate(n_errors):
            accumulator.accumulate(bucket, count, setup.plan.n_subcarriers)
    if block_outcomes:
        logger.info(
            "Soft limiter clipped %.4f%% of samples",
            100 * np.mean([outcome[1] for outcome in block_outcomes]),
        )
    return accumulator
