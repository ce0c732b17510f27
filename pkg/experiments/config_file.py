"""
INI form of ``ExperimentConfig``.

    [waveform]
    waveform = AFDM
    n_subcarriers = 256

    [ti]
    scheme = FCR

Keys are named after the config fields; unknown sections or keys are
errors. Keys absent from a file keep their base (settings) values.
"""
import configparser

from experiments.config import ConfigError, ExperimentConfig
from experiments.serializers import ExperimentConfigSerializer

SECTIONS = {
    "waveform": (
        "waveform", "n_subcarriers", "oversampling", "alpha1", "alpha2",
    ),
    "constellation": ("constellation_order",),
    "ti": (
        "scheme",
        "beta",
        "max_iters",
        "n_peaks",
        "n_filtered",
        "clip_threshold_db",
        "dfs_enabled",
        "scaling_rule",
    ),
    "montecarlo": ("n_blocks", "seed", "n_values"),
    "channel": (
        "es_n0_db",
        "limiter_enabled",
        "limiter_threshold_db",
        "limiter_oversampling",
        "calibration_blocks",
    ),
    "output": ("output",),
}
LIST_KEYS = ("n_values", "es_n0_db")


def _read_sections(text: str) -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, default_section="__defaults__"
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as error:
        raise ConfigError({"config": [str(error)]}) from error
    flat = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError({section: ["unknown section"]})
        for key, text_value in parser.items(section):
            if key not in SECTIONS[section]:
                raise ConfigError({key: [f"unknown key in [{section}]"]})
            if key in LIST_KEYS:
                flat[key] = [
                    entry.strip()
                    for entry in text_value.split(",")
                    if entry.strip()
                ]
            elif key in ("alpha1", "alpha2") and not text_value.strip():
                flat[key] = None
            else:
                flat[key] = text_value.strip()
    return flat


def parse(text: str, base: ExperimentConfig = None) -> ExperimentConfig:
    if base is None:
        base = ExperimentConfig.from_settings()
    raw = dict(ExperimentConfigSerializer(base).data)
    raw.update(_read_sections(text))
    serializer = ExperimentConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise ConfigError(dict(serializer.errors))
    return serializer.save()


def load(path, base: ExperimentConfig = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as config_file:
            text = config_file.read()
    except OSError as error:
        raise ConfigError({"config": [str(error)]}) from error
    return parse(text, base)


def _format(field_value) -> str:
    if isinstance(field_value, bool):
        return "true" if field_value else "false"
    if isinstance(field_value, float):
        return repr(field_value)
    if isinstance(field_value, (list, tuple)):
        return ", ".join(_format(entry) for entry in field_value)
    return str(field_value)


def emit(config: ExperimentConfig) -> str:
    fields = ExperimentConfigSerializer(config).data
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            if fields.get(key) is None:
                continue
            lines.append(f"{key} = {_format(fields[key])}".rstrip())
        lines.append("")
    return "\n".join(lines)
