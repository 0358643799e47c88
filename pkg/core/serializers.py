"""
Serializers that validate the parameters of every CLI command.

Each command has one serializer; unknown keys are rejected and every
numeric parameter is checked against the preconditions of the operation
it feeds, so that nothing invalid reaches dispatch.
"""
import math
from typing import Any, Dict, List

from django.conf import settings
from rest_framework import serializers

from estimators.domain import EstimatorTag
from increments.domain import RegimeTag
from nonhomogeneous.domain import BUILTIN_INTENSITIES

from core.exceptions import DomainError


def positive(value: float) -> None:
    """Reject zero, negatives, nan and infinities."""
    if not (math.isfinite(value) and value > 0):
        raise serializers.ValidationError('must be a positive finite number')


class FloatListField(serializers.ListField):
    """A list of floats given either as a list or as a comma-separated string."""
    child = serializers.FloatField(validators=[positive])

    def to_internal_value(self, data: Any) -> List[float]:
        if isinstance(data, str):
            data = [item for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)


class LabelListField(serializers.ListField):
    """Comma-separated labels, as typed on the command line."""
    child = serializers.CharField()

    def to_internal_value(self, data: Any) -> List[str]:
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)


class CommandSerializer(serializers.Serializer):
    """Base for command parameters: `output` is common, extra keys are errors."""
    output = serializers.CharField(required=False, allow_null=True, default=None)

    def to_internal_value(self, data: Any) -> Dict[str, Any]:
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ['unknown parameter'] for key in unknown})
        return super().to_internal_value(data)


class SeededCommandSerializer(CommandSerializer):
    seed = serializers.IntegerField(min_value=0, default=0)


class SimulateSerializer(SeededCommandSerializer):
    theta = serializers.FloatField(validators=[positive])
    T = serializers.FloatField(validators=[positive])
    delta = serializers.FloatField(validators=[positive])
    replica = serializers.IntegerField(min_value=0, default=0)
    intensity = serializers.ChoiceField(
        choices=sorted(BUILTIN_INTENSITIES), required=False, allow_null=True, default=None
    )

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        if attrs['delta'] > attrs['T']:
            raise serializers.ValidationError({'delta': ['step must not exceed the horizon T']})
        return attrs


class PmfSerializer(CommandSerializer):
    x = serializers.FloatField(validators=[positive])
    k_max = serializers.IntegerField(min_value=0, default=30)


class FisherCurveSerializer(CommandSerializer):
    theta = serializers.FloatField(validators=[positive], default=1.0)
    deltas = FloatListField(min_length=1)
    n = serializers.IntegerField(min_value=1, default=lambda: settings.SCALE_INFERENCE['DEFAULT_INCREMENTS'])


class DeficiencyCurveSerializer(CommandSerializer):
    x_min = serializers.FloatField(validators=[positive], default=0.05)
    x_max = serializers.FloatField(validators=[positive], default=10.0)
    points = serializers.IntegerField(min_value=2, default=200)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        if not attrs['x_min'] < attrs['x_max']:
            raise serializers.ValidationError({'x_max': ['must be larger than x_min']})
        return attrs


class EstimateSerializer(CommandSerializer):
    method = serializers.CharField()
    input = serializers.CharField()
    T = serializers.FloatField(validators=[positive], required=False)
    delta = serializers.FloatField(validators=[positive], required=False)
    bracket = FloatListField(required=False, min_length=2, max_length=2)

    def validate_method(self, value: str) -> str:
        try:
            return EstimatorTag.from_label(value).label
        except DomainError as exc:
            raise serializers.ValidationError(exc.message) from exc

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        bracket = attrs.get('bracket')
        if bracket is not None:
            if attrs['method'] != EstimatorTag.MLE.label:
                raise serializers.ValidationError({'bracket': ['a bracket applies to MLE only']})
            if not bracket[0] < bracket[1]:
                raise serializers.ValidationError({'bracket': ['lower end must be below upper end']})
        return attrs


class McStudySerializer(SeededCommandSerializer):
    theta = serializers.FloatField(validators=[positive], default=1.0)
    deltas = FloatListField(min_length=1)
    n = serializers.IntegerField(min_value=1, default=lambda: settings.SCALE_INFERENCE['DEFAULT_INCREMENTS'])
    replicas = serializers.IntegerField(min_value=2, default=lambda: settings.SCALE_INFERENCE['DEFAULT_REPLICAS'])
    estimators = LabelListField(min_length=1, default=lambda: [tag.label for tag in EstimatorTag])
    workers = serializers.IntegerField(min_value=1, default=lambda: settings.SCALE_INFERENCE['DEFAULT_WORKERS'])
    persist = serializers.BooleanField(default=False)

    def validate_deltas(self, value: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise serializers.ValidationError('steps must be strictly increasing')
        return value

    def validate_estimators(self, value: List[str]) -> List[str]:
        try:
            labels = [EstimatorTag.from_label(label).label for label in value]
        except DomainError as exc:
            raise serializers.ValidationError(exc.message) from exc
        if len(set(labels)) != len(labels):
            raise serializers.ValidationError('estimators must not repeat')
        return labels


class GaussDistanceSerializer(CommandSerializer):
    theta = serializers.FloatField(validators=[positive], default=1.0)
    deltas = FloatListField(min_length=1)
    spectral = serializers.BooleanField(default=True)


class NonhomogInfoSerializer(CommandSerializer):
    REGIMES = ['all'] + [tag.value for tag in RegimeTag]

    intensity = serializers.ChoiceField(choices=sorted(BUILTIN_INTENSITIES), default='linear')
    theta = serializers.FloatField(validators=[positive], default=1.0)
    T = serializers.FloatField(validators=[positive])
    delta = serializers.FloatField(validators=[positive])
    regime = serializers.CharField(default='all')
    theta_max = serializers.FloatField(validators=[positive], default=100.0)

    def validate_regime(self, value: str) -> str:
        if value.strip().lower() == 'all':
            return 'all'
        try:
            return RegimeTag.from_label(value).value
        except DomainError as exc:
            raise serializers.ValidationError(exc.message) from exc

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        if attrs['delta'] > attrs['T']:
            raise serializers.ValidationError({'delta': ['step must not exceed the horizon T']})
        if attrs['theta'] > attrs['theta_max']:
            raise serializers.ValidationError({'theta': ['must not exceed theta_max']})
        return attrs
