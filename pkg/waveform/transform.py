"""
Oversampled discrete affine Fourier transforms.

The inverse transform of a block of N symbols onto LN time samples is

    x_n = 1/sqrt(N) * sum_k s_k * exp(j2pi(alpha1 n^2 + kn/(LN) + alpha2 k^2))

factorized as D_t F_L^H D_f with unimodular chirp diagonals D_t, D_f and
an LN-point FFT. OFDM is the zero-chirp special case. Both directions use
the 1/sqrt(N) scaling, so daft(idaft(s)) == L * s.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


class Rotation(enum.IntEnum):
    """Quarter-turn unit of a tone-injection candidate, in tie-break order."""

    PLUS_ONE = 0
    MINUS_ONE = 1
    PLUS_J = 2
    MINUS_J = 3

    @property
    def unit(self) -> complex:
        return (1 + 0j, -1 + 0j, 1j, -1j)[self]

    @property
    def angle(self) -> float:
        return (0.0, math.pi, math.pi / 2, -math.pi / 2)[self]

    @classmethod
    def from_unit(cls, unit) -> "Rotation":
        for rotation in cls:
            if rotation.unit == complex(unit):
                return rotation
        raise ValueError(f"{unit!r} is not one of +1, -1, +j, -j")


@dataclass(frozen=True, order=True)
class CandidateId:
    """One column of the candidate matrix [I, -I, jI, -jI]."""

    subcarrier: int
    rotation: Rotation

    def __post_init__(self):
        if not isinstance(self.rotation, Rotation):
            object.__setattr__(
                self, "rotation", Rotation.from_unit(self.rotation)
            )

    def column(self, n_subcarriers: int) -> int:
        """Column index into the N x 4N candidate matrix."""
        return int(self.rotation) * n_subcarriers + self.subcarrier


@dataclass(frozen=True)
class ChirpParams:
    alpha1: float = 0.0
    alpha2: float = 0.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {rate}")

    @classmethod
    def ofdm(cls) -> "ChirpParams":
        return cls()

    @classmethod
    def afdm(cls, n_subcarriers: int) -> "ChirpParams":
        """AFDM chirp used in the simulations: alpha1 = 1/(2N), alpha2 = 0"""
        return cls(alpha1=1.0 / (2 * n_subcarriers), alpha2=0.0)

    @property
    def is_ofdm(self) -> bool:
        return self.alpha1 == 0.0 and self.alpha2 == 0.0


def _chirp_table(rate: float, length: int) -> np.ndarray:
    indices = np.arange(length, dtype=np.float64)
    # exp is 1-periodic in cycles; reducing first keeps precision at large n
    cycles = np.mod(rate * indices * indices, 1.0)
    table = np.exp(2j * np.pi * cycles)
    table.setflags(write=False)
    return table


@dataclass(frozen=True, eq=False)
class TransformPlan:
    n_subcarriers: int
    oversampling: int
    chirp: ChirpParams
    time_phase: np.ndarray
    freq_phase: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.n_subcarriers * self.oversampling

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.n_subcarriers)

    def __repr__(self):
        return (
            f"TransformPlan(N={self.n_subcarriers}, L={self.oversampling}, "
            f"alpha1={self.chirp.alpha1}, alpha2={self.chirp.alpha2})"
        )


def make_plan(
    n_subcarriers: int, oversampling: int, chirp: ChirpParams = None
) -> TransformPlan:
    if chirp is None:
        chirp = ChirpParams()
    if int(n_subcarriers) != n_subcarriers or n_subcarriers < 2:
        raise ValueError(
            f"n_subcarriers must be an integer >= 2, got {n_subcarriers}"
        )
    if int(oversampling) != oversampling or oversampling < 1:
        raise ValueError(
            f"oversampling must be an integer >= 1, got {oversampling}"
        )
    n_subcarriers, oversampling = int(n_subcarriers), int(oversampling)
    plan = TransformPlan(
        n_subcarriers=n_subcarriers,
        oversampling=oversampling,
        chirp=chirp,
        time_phase=_chirp_table(chirp.alpha1, n_subcarriers * oversampling),
        freq_phase=_chirp_table(chirp.alpha2, n_subcarriers),
    )
    logger.debug("Built %r", plan)
    return plan


def decimated_plan(plan: TransformPlan, oversampling: int) -> TransformPlan:
    """
    Plan at a lower oversampling factor L' dividing L, sampling the same
    waveform: idaft(decimated, s) equals idaft(plan, s)[::L // L'].
    """
    if oversampling < 1 or plan.oversampling % oversampling:
        raise ValueError(
            f"oversampling must divide {plan.oversampling}, got {oversampling}"
        )
    if oversampling == plan.oversampling:
        return plan
    ratio = plan.oversampling // oversampling
    chirp = ChirpParams(
        math.fmod(plan.chirp.alpha1 * ratio * ratio, 1.0), plan.chirp.alpha2
    )
    return make_plan(plan.n_subcarriers, oversampling, chirp)


def _check_length(array: np.ndarray, expected: int, what: str):
    if array.shape[-1] != expected:
        raise ValueError(
            f"{what} must have length {expected}, got {array.shape[-1]}"
        )


def idaft(plan: TransformPlan, symbols) -> np.ndarray:
    """
    Inverse oversampled DAFT of one block (or a stack of blocks along the
    leading axes) of N symbols.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    _check_length(symbols, plan.n_subcarriers, "symbol block")
    padded = np.zeros(symbols.shape[:-1] + (plan.n_samples,), np.complex128)
    padded[..., : plan.n_subcarriers] = symbols * plan.freq_phase
    # numpy's ifft carries 1/(LN); the transform wants 1/sqrt(N)
    samples = np.fft.ifft(padded, axis=-1)
    samples *= plan.n_samples * plan.scale
    return plan.time_phase * samples


def daft(plan: TransformPlan, samples) -> np.ndarray:
    """Forward transform A x, the adjoint of idaft (A A^H = L I)."""
    samples = np.asarray(samples, dtype=np.complex128)
    _check_length(samples, plan.n_samples, "time signal")
    spectrum = np.fft.fft(np.conj(plan.time_phase) * samples, axis=-1)
    spectrum = spectrum[..., : plan.n_subcarriers] * plan.scale
    return np.conj(plan.freq_phase) * spectrum


def _check_candidate(plan: TransformPlan, cand: CandidateId):
    if not 0 <= cand.subcarrier < plan.n_subcarriers:
        raise ValueError(
            f"subcarrier {cand.subcarrier} outside [0, {plan.n_subcarriers})"
        )


def _carrier(plan: TransformPlan, subcarrier: int, sample_indices):
    # k*n reduced modulo LN in integer arithmetic before exponentiation
    residues = np.mod(
        np.asarray(sample_indices, dtype=np.int64) * subcarrier,
        plan.n_samples,
    )
    return np.exp(2j * np.pi * residues / plan.n_samples)


def candidate_time_column(
    plan: TransformPlan, cand: CandidateId, delta: float
) -> np.ndarray:
    """
    Time-domain column of C = delta A^H [I, -I, jI, -jI] for one
    candidate; every sample has magnitude delta / sqrt(N).
    """
    _check_candidate(plan, cand)
    carrier = _carrier(plan, cand.subcarrier, np.arange(plan.n_samples))
    weight = (
        delta * plan.scale * cand.rotation.unit
        * plan.freq_phase[cand.subcarrier]
    )
    return weight * plan.time_phase * carrier


def candidate_phases(
    plan: TransformPlan, sample_indices, subcarriers
) -> np.ndarray:
    """
    Unit phasors exp(j psi[n, k]) of the +1 candidate columns, one row per
    sample index and one column per subcarrier.
    """
    sample_indices = np.asarray(sample_indices, dtype=np.int64)
    subcarriers = np.asarray(subcarriers, dtype=np.int64)
    residues = np.mod(
        np.multiply.outer(sample_indices, subcarriers), plan.n_samples
    )
    return (
        plan.time_phase[sample_indices][:, np.newaxis]
        * plan.freq_phase[subcarriers][np.newaxis, :]
        * np.exp(2j * np.pi * residues / plan.n_samples)
    )


def _wrap(angle: float) -> float:
    wrapped = math.remainder(angle, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


def candidate_phase_at(
    plan: TransformPlan, cand: CandidateId, sample_index: int
) -> float:
    """Angle of candidate column entry at one sample, in (-pi, pi]."""
    _check_candidate(plan, cand)
    if not 0 <= sample_index < plan.n_samples:
        raise ValueError(
            f"sample index {sample_index} outside [0, {plan.n_samples})"
        )
    residue = (cand.subcarrier * sample_index) % plan.n_samples
    angle = (
        float(np.angle(plan.time_phase[sample_index]))
        + 2 * math.pi * residue / plan.n_samples
        + float(np.angle(plan.freq_phase[cand.subcarrier]))
        + cand.rotation.angle
    )
    return _wrap(angle)
