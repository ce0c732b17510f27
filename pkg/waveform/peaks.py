"""
Local peaks, peak power and PAPR, CCDF accumulation and the closed-form
power covariance of neighbouring oversampled samples.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PeakSet:
    """
    Local-peak sample indices sorted by descending magnitude (ascending
    index among equal magnitudes), with magnitudes and angles cached.
    """

    indices: np.ndarray
    magnitudes: np.ndarray
    angles: np.ndarray

    def __len__(self):
        return len(self.indices)


def find_local_peaks(samples) -> PeakSet:
    """Indices n with |x_n| >= both cyclic neighbours."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.size == 0:
        raise ValueError("cannot find peaks of an empty signal")
    magnitude = np.abs(samples)
    is_peak = (magnitude >= np.roll(magnitude, 1)) & (
        magnitude >= np.roll(magnitude, -1)
    )
    indices = np.flatnonzero(is_peak)
    order = np.lexsort((indices, -magnitude[indices]))
    indices = indices[order]
    return PeakSet(
        indices=indices,
        magnitudes=magnitude[indices],
        angles=np.angle(samples[indices]),
    )


def top_peaks(peaks: PeakSet, n_peaks: int) -> PeakSet:
    if n_peaks < 1:
        raise ValueError(f"n_peaks must be >= 1, got {n_peaks}")
    if n_peaks >= len(peaks):
        return peaks
    return PeakSet(
        indices=peaks.indices[:n_peaks],
        magnitudes=peaks.magnitudes[:n_peaks],
        angles=peaks.angles[:n_peaks],
    )


def peak_power(samples) -> float:
    return float(np.max(np.abs(np.asarray(samples)) ** 2))


def mean_power(samples) -> float:
    return float(np.mean(np.abs(np.asarray(samples)) ** 2))


def papr_db(samples, avg_power_ref: float) -> float:
    if avg_power_ref <= 0:
        raise ValueError(
            f"avg_power_ref must be positive, got {avg_power_ref}"
        )
    return 10.0 * math.log10(peak_power(samples) / avg_power_ref)


class CcdfQuery(NamedTuple):
    threshold_db: float
    low_confidence: bool


def default_grid(start=0.0, stop=14.0, step=0.1) -> np.ndarray:
    n_points = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(n_points), 10)


@dataclass
class CcdfAccumulator:
    """Exceedance counts of PAPR values over a fixed dB grid."""

    grid_db: np.ndarray = field(default_factory=default_grid)
    counts: np.ndarray = None
    total: int = 0
    mean_power_sum: float = 0.0

    def __post_init__(self):
        self.grid_db = np.asarray(self.grid_db, dtype=np.float64)
        if self.counts is None:
            self.counts = np.zeros(len(self.grid_db), dtype=np.int64)

    def accumulate(self, papr_db_value: float, block_mean_power=None):
        self.counts += self.grid_db < papr_db_value
        self.total += 1
        if block_mean_power is not None:
            self.mean_power_sum += block_mean_power

    def merge(self, other: "CcdfAccumulator"):
        if not np.array_equal(self.grid_db, other.grid_db):
            raise ValueError("cannot merge accumulators on different grids")
        self.counts += other.counts
        self.total += other.total
        self.mean_power_sum += other.mean_power_sum

    def ccdf(self) -> np.ndarray:
        if self.total == 0:
            return np.zeros(len(self.grid_db))
        return self.counts / self.total

    @property
    def mean_block_power(self) -> float:
        return self.mean_power_sum / self.total if self.total else 0.0

    def query(self, probability: float) -> CcdfQuery:
        """
        Smallest threshold whose empirical CCDF is <= probability, linearly
        interpolated between grid points.
        """
        if not 0.0 < probability <= 1.0:
            raise ValueError(
                f"probability must be in (0, 1], got {probability}"
            )
        low_confidence = self.total < 10.0 / probability
        if low_confidence:
            logger.warning(
                "CCDF query at %g uses only %d blocks", probability, self.total
            )
        curve = self.ccdf()
        below = np.flatnonzero(curve <= probability)
        if below.size == 0:
            return CcdfQuery(float(self.grid_db[-1]), True)
        first = int(below[0])
        if first == 0:
            return CcdfQuery(float(self.grid_db[0]), low_confidence)
        upper_db, lower_db = self.grid_db[first - 1], self.grid_db[first]
        upper_p, lower_p = curve[first - 1], curve[first]
        fraction = (upper_p - probability) / (upper_p - lower_p)
        return CcdfQuery(
            float(upper_db + fraction * (lower_db - upper_db)), low_confidence
        )


def power_covariance_closed_form(
    delta_n: int, oversampling: int, n_subcarriers: int, sigma_sq: float
) -> float:
    """sigma^4 |sin(pi dn / L) / (N sin(pi dn / (LN)))|^2"""
    n_samples = oversampling * n_subcarriers
    if delta_n % n_samples == 0:
        raise ValueError(
            f"delta_n must not be a multiple of LN={n_samples}, got {delta_n}"
        )
    if delta_n % oversampling == 0:
        return 0.0
    numerator = math.sin(math.pi * delta_n / oversampling)
    denominator = n_subcarriers * math.sin(math.pi * delta_n / n_samples)
    return sigma_sq**2 * (numerator / denominator) ** 2


class CovarianceEstimate(NamedTuple):
    raw: float
    corrected: float
    std_error: float


def block_power_covariances(samples, delta_n: int, sigma_sq: float):
    """
    Per-block mean over n of (|x_n|^2 - sigma^2)(|x_{n+dn}|^2 - sigma^2),
    cyclic in n, for a stack of blocks along axis 0.
    """
    centered = np.abs(np.atleast_2d(samples)) ** 2 - sigma_sq
    shifted = np.roll(centered, -delta_n, axis=-1)
    return np.mean(centered * shifted, axis=-1)


def empirical_power_covariance(
    block_covariances, sigma_sq: float, n_subcarriers: int, kurtosis: float
) -> CovarianceEstimate:
    """
    Combine per-block statistics into the Monte-Carlo covariance.

    Finite constellations add the lag-independent fourth-cumulant term
    (kappa - 2) sigma^4 / N to the Gaussian closed form; ``corrected``
    has it removed.
    """
    block_covariances = np.asarray(block_covariances, dtype=np.float64)
    raw = float(np.mean(block_covariances))
    if len(block_covariances) > 1:
        std_error = float(
            np.std(block_covariances, ddof=1)
            / math.sqrt(len(block_covariances))
        )
    else:
        std_error = math.inf
    cumulant = (kurtosis - 2.0) * sigma_sq**2 / n_subcarriers
    return CovarianceEstimate(raw, raw - cumulant, std_error)
