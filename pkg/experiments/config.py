"""
Experiment configuration shared by every harness command.

Field names double as the keys of the INI experiment files (see
``experiments.config_file``).
"""
from dataclasses import dataclass
from typing import Optional

from django.conf import settings

from waveform import ti
from waveform.constellation import QamConstellation
from waveform.transform import ChirpParams, make_plan


class ConfigError(Exception):
    """Invalid experiment configuration; ``errors`` maps field to messages"""

    def __init__(self, errors):
        self.errors = errors
        super().__init__(self.diagnostic())

    def diagnostic(self) -> str:
        if not isinstance(self.errors, dict):
            return f"invalid config: {self.errors}"
        lines = []
        for name, messages in self.errors.items():
            if not isinstance(messages, (list, tuple)):
                messages = [messages]
            lines.extend(f"{name}: {message}" for message in messages)
        return "invalid config: " + "; ".join(lines)


def _default(key):
    return settings.TONE_INJECTION[key]


@dataclass(frozen=True)
class ExperimentConfig:
    waveform: str = "OFDM"
    n_subcarriers: int = 256
    oversampling: int = 8
    alpha1: Optional[float] = None
    alpha2: Optional[float] = None
    constellation_order: int = 64
    scheme: str = "CR"
    beta: float = 4.0
    max_iters: int = 20
    n_peaks: int = 16
    n_filtered: int = 32
    clip_threshold_db: float = 5.0
    dfs_enabled: bool = True
    scaling_rule: bool = False
    n_blocks: int = 10000
    seed: int = 20260
    n_values: tuple = ()
    es_n0_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    limiter_enabled: bool = True
    limiter_threshold_db: float = 4.5
    limiter_oversampling: int = 1
    calibration_blocks: int = 10000
    output: str = ""

    @classmethod
    def from_settings(cls, **overrides) -> "ExperimentConfig":
        """Defaults from ``settings.TONE_INJECTION``"""
        defaults = {
            "waveform": _default("WAVEFORM"),
            "n_subcarriers": _default("N_SUBCARRIERS"),
            "oversampling": _default("OVERSAMPLING"),
            "constellation_order": _default("CONSTELLATION_ORDER"),
            "scheme": _default("SCHEME"),
            "beta": _default("BETA"),
            "max_iters": _default("MAX_ITERS"),
            "n_peaks": _default("N_PEAKS"),
            "n_filtered": _default("N_FILTERED"),
            "clip_threshold_db": _default("CLIP_THRESHOLD_DB"),
            "dfs_enabled": _default("DFS_ENABLED"),
            "n_blocks": _default("N_BLOCKS"),
            "seed": _default("SEED"),
            "es_n0_db": tuple(_default("ES_N0_DB")),
            "limiter_threshold_db": _default("LIMITER_THRESHOLD_DB"),
            "limiter_oversampling": _default("LIMITER_OVERSAMPLING"),
            "calibration_blocks": _default("CALIBRATION_BLOCKS"),
        }
        defaults.update(overrides)
        return cls(**defaults)

    def chirp_for(self, n_subcarriers: int) -> ChirpParams:
        """
        AFDM chirp of an N-subcarrier block: an omitted alpha1 is 1/(2N)
        and an omitted alpha2 is 0, whatever the other rate is.
        """
        if self.waveform == "OFDM":
            return ChirpParams.ofdm()
        default = ChirpParams.afdm(n_subcarriers)
        return ChirpParams(
            default.alpha1 if self.alpha1 is None else self.alpha1,
            default.alpha2 if self.alpha2 is None else self.alpha2,
        )

    @property
    def chirp(self) -> ChirpParams:
        return self.chirp_for(self.n_subcarriers)

    def plan(self, n_subcarriers=None):
        n_subcarriers = n_subcarriers or self.n_subcarriers
        return make_plan(
            n_subcarriers, self.oversampling, self.chirp_for(n_subcarriers)
        )

    @property
    def constellation(self) -> QamConstellation:
        return QamConstellation(order=self.constellation_order)

    def ti_config(self, scheme=None, n_subcarriers=None):
        """TiConfig of ``scheme`` (default: the configured one), None for
        no injection."""
        scheme = scheme or self.scheme
        if scheme == "none":
            return None
        n_peaks, n_filtered = self.n_peaks, self.n_filtered
        if self.scaling_rule:
            n_peaks, n_filtered = ti.scaling_rule(
                n_subcarriers or self.n_subcarriers, self.oversampling
            )
        return ti.TiConfig(
            beta=self.beta,
            max_iters=self.max_iters,
            n_peaks=n_peaks,
            n_filtered=n_filtered,
            clip_threshold_db=self.clip_threshold_db,
            scheme=ti.Scheme(scheme),
            dfs_enabled=self.dfs_enabled,
        )

