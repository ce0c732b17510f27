from rest_framework import serializers

from experiments.config import ExperimentConfig
from waveform.constellation import QamConstellation
from waveform.ti import TiConfig

MAX_SEED = 2**64 - 1


class ExperimentConfigSerializer(serializers.Serializer):
    waveform = serializers.ChoiceField(choices=("OFDM", "AFDM"))
    n_subcarriers = serializers.IntegerField(min_value=2)
    oversampling = serializers.IntegerField(min_value=1)
    alpha1 = serializers.FloatField(
        min_value=0.0, allow_null=True, required=False, default=None
    )
    alpha2 = serializers.FloatField(
        min_value=0.0, allow_null=True, required=False, default=None
    )
    constellation_order = serializers.IntegerField(min_value=4)
    scheme = serializers.ChoiceField(choices=("none", "CR", "FCR"))
    beta = serializers.FloatField()
    max_iters = serializers.IntegerField(min_value=1)
    n_peaks = serializers.IntegerField(min_value=1)
    n_filtered = serializers.IntegerField(min_value=1)
    clip_threshold_db = serializers.FloatField()
    dfs_enabled = serializers.BooleanField()
    scaling_rule = serializers.BooleanField(default=False)
    n_blocks = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(min_value=0, max_value=MAX_SEED)
    n_values = serializers.ListField(
        child=serializers.IntegerField(min_value=2),
        allow_empty=True,
        default=list,
    )
    es_n0_db = serializers.ListField(
        child=serializers.FloatField(), allow_empty=False
    )
    limiter_enabled = serializers.BooleanField(default=True)
    limiter_threshold_db = serializers.FloatField()
    limiter_oversampling = serializers.IntegerField(min_value=1, default=1)
    calibration_blocks = serializers.IntegerField(min_value=1)
    output = serializers.CharField(
        allow_blank=True, required=False, default=""
    )

    @staticmethod
    def _validate_chirp_rate(rate):
        if rate is not None and rate >= 1.0:
            raise serializers.ValidationError(
                "chirp rate must be in available range: [0, 1)"
            )
        return rate

    def validate_alpha1(self, alpha1):
        return self._validate_chirp_rate(alpha1)

    def validate_alpha2(self, alpha2):
        return self._validate_chirp_rate(alpha2)

    def validate_constellation_order(self, constellation_order):
        try:
            QamConstellation(order=constellation_order)
        except ValueError as error:
            raise serializers.ValidationError(str(error))
        return constellation_order

    def validate(self, attrs):
        data = super(ExperimentConfigSerializer, self).validate(attrs=attrs)
        if attrs["waveform"] == "OFDM" and any(
            attrs.get(name) for name in ("alpha1", "alpha2")
        ):
            raise serializers.ValidationError(
                {"alpha1": "chirp rates apply to the AFDM waveform only"}
            )
        if attrs["oversampling"] % attrs["limiter_oversampling"]:
            raise serializers.ValidationError(
                {
                    "limiter_oversampling": "limiter_oversampling must "
                    "divide oversampling"
                }
            )
        check_filter = attrs["scheme"] == "FCR" and not attrs["scaling_rule"]
        TiConfig.validate_config(
            attrs,
            serializers.ValidationError,
            n_subcarriers=(
                min([attrs["n_subcarriers"], *attrs["n_values"]])
                if check_filter
                else None
            ),
        )
        return data

    def create(self, validated_data):
        validated_data["n_values"] = tuple(validated_data["n_values"])
        validated_data["es_n0_db"] = tuple(validated_data["es_n0_db"])
        return ExperimentConfig(**validated_data)
