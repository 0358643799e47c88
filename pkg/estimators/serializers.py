"""
Serializers for estimator output.
"""
from rest_framework import serializers


class EstimateResultSerializer(serializers.Serializer):
    """JSON view of an EstimateResult."""
    value = serializers.FloatField()
    stderr = serializers.FloatField(allow_null=True)
    avar = serializers.FloatField(allow_null=True)
    method = serializers.CharField(source='method.label')
    converged = serializers.BooleanField()
    iterations = serializers.IntegerField()
    flags = serializers.ListField(child=serializers.CharField())
