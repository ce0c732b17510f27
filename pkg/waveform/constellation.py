"""
Square-QAM mapping and detection, the tone-injection lattice step and the
receiver-side modulo recovery.

Labels are per-axis reflected Gray codes: symbol index m splits into
(row_label << bits/2) | col_label, the label at axis position p is
p ^ (p >> 1), and position 0 is the most negative coordinate. Index 0 is
therefore the lower-left corner of the grid.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import special


class GaussianInteger(NamedTuple):
    re: int
    im: int

    def __complex__(self):
        return complex(self.re, self.im)


class SymbolDraw(NamedTuple):
    indices: np.ndarray
    symbols: np.ndarray


def _gray_positions(side: int) -> np.ndarray:
    """Axis position of every Gray label, i.e. the inverse Gray map."""
    positions = np.empty(side, dtype=np.int64)
    for position in range(side):
        positions[position ^ (position >> 1)] = position
    return positions


@dataclass(frozen=True)
class QamConstellation:
    order: int = 64
    avg_energy: float = 1.0
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bits = math.log2(self.order) if self.order > 0 else 0.5
        if self.order < 4 or bits != int(bits) or int(bits) % 2:
            raise ValueError(
                f"order must be a square power of two >= 4, got {self.order}"
            )
        if self.avg_energy <= 0:
            raise ValueError(
                f"avg_energy must be positive, got {self.avg_energy}"
            )
        object.__setattr__(self, "points", self._build_points())

    @classmethod
    def with_min_distance(
        cls, order: int, min_distance: float
    ) -> "QamConstellation":
        return cls(
            order=order, avg_energy=min_distance**2 * (order - 1) / 6
        )

    @property
    def side(self) -> int:
        return math.isqrt(self.order)

    @property
    def min_distance(self) -> float:
        return math.sqrt(6 * self.avg_energy / (self.order - 1))

    def _build_points(self) -> np.ndarray:
        side = self.side
        half_bits = int(math.log2(side))
        positions = _gray_positions(side)
        labels = np.arange(self.order)
        coordinate = (
            2 * positions[labels & (side - 1)] - (side - 1),
            2 * positions[labels >> half_bits] - (side - 1),
        )
        points = (coordinate[0] + 1j * coordinate[1]) * self.min_distance / 2
        points.setflags(write=False)
        return points


def lattice_step(constellation: QamConstellation) -> float:
    """delta = d * sqrt(M)"""
    return constellation.min_distance * constellation.side


def map_symbols(source, constellation: QamConstellation, n_symbols=None):
    """
    Map symbol indices onto constellation points.

    ``source`` is either a numpy Generator, in which case ``n_symbols``
    uniform i.i.d. indices are drawn, or an array of indices.
    """
    if isinstance(source, np.random.Generator):
        if n_symbols is None or n_symbols < 1:
            raise ValueError("n_symbols must be >= 1 when drawing symbols")
        indices = source.integers(0, constellation.order, size=n_symbols)
    else:
        indices = np.asarray(source, dtype=np.int64)
        if indices.size and (
            indices.min() < 0 or indices.max() >= constellation.order
        ):
            raise ValueError(
                f"symbol indices must lie in [0, {constellation.order})"
            )
    return SymbolDraw(indices, constellation.points[indices])


def modulo_recover(value, delta: float):
    """
    Remove delta-scaled Gaussian integers, per component, into the
    half-open cell [-delta/2, delta/2).
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    value = np.asarray(value, dtype=np.complex128)
    real = value.real - delta * np.floor(value.real / delta + 0.5)
    imag = value.imag - delta * np.floor(value.imag / delta + 0.5)
    recovered = real + 1j * imag
    return recovered[()] if recovered.ndim == 0 else recovered


def detect(value, constellation: QamConstellation):
    """Nearest-point detection; equal distances resolve to the lower index."""
    value = np.asarray(value, dtype=np.complex128)
    distances = np.abs(value[..., np.newaxis] - constellation.points)
    detected = np.argmin(distances, axis=-1)
    return int(detected) if detected.ndim == 0 else detected


def fourth_moment_ratio(constellation: QamConstellation) -> float:
    """kappa = E|s|^4 / E_s^2 for uniformly used points."""
    power = np.abs(constellation.points) ** 2
    return float(np.mean(power**2) / constellation.avg_energy**2)


def theoretical_ser(constellation: QamConstellation, es_n0_db):
    """Exact square-QAM symbol error rate over AWGN."""
    es_n0 = 10.0 ** (np.asarray(es_n0_db, dtype=np.float64) / 10.0)
    argument = np.sqrt(es_n0 * 3.0 / (constellation.order - 1.0))
    q_value = 0.5 * special.erfc(argument / np.sqrt(2.0))
    per_axis = 2.0 * (1.0 - 1.0 / constellation.side) * q_value
    return 1.0 - (1.0 - per_axis) ** 2
