"""
Monte Carlo study models.
"""
from typing import List

from django.core.exceptions import ValidationError
from django.core.validators import MinValueValidator
from django.db import models

from estimators.domain import EstimatorTag
from increments.domain import ModelParams, SamplingScheme


class ExperimentConfig(models.Model):
    """
    Design of a variance study: for every step in the grid, `replicas`
    series of `n_per_scheme` increments each.
    """
    ESTIMATOR_CHOICES = [(tag.label, tag.label) for tag in EstimatorTag]

    theta = models.FloatField(help_text="Jump intensity used to simulate")
    delta_grid = models.JSONField(default=list, help_text="Strictly increasing sampling steps")
    n_per_scheme = models.PositiveIntegerField(
        validators=[MinValueValidator(1)],
        help_text="Increments per replica, the same at every step"
    )
    replicas = models.PositiveIntegerField(validators=[MinValueValidator(2)])
    seed = models.BigIntegerField(default=0, validators=[MinValueValidator(0)])
    estimators = models.JSONField(default=list, help_text="Subset of QV, OneStep, MLE")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'experiment_configs'
        ordering = ['-created_at']

    def __str__(self) -> str:
        return f"theta={self.theta} steps={self.delta_grid} n={self.n_per_scheme} x{self.replicas}"

    def clean(self) -> None:
        """Check the invariants the fields cannot express."""
        errors = {}
        if not (isinstance(self.theta, (int, float)) and self.theta > 0):
            errors['theta'] = 'theta must be positive'
        grid = self.delta_grid
        if not isinstance(grid, list) or not grid:
            errors['delta_grid'] = 'the step grid must be a nonempty list'
        elif not all(isinstance(d, (int, float)) and d > 0 for d in grid):
            errors['delta_grid'] = 'steps must be positive numbers'
        elif any(b <= a for a, b in zip(grid, grid[1:])):
            errors['delta_grid'] = 'steps must be strictly increasing'
        labels = {tag.label for tag in EstimatorTag}
        if not self.estimators or any(e not in labels for e in self.estimators):
            errors['estimators'] = f'estimators must be a nonempty subset of {sorted(labels)}'
        elif len(set(self.estimators)) != len(self.estimators):
            errors['estimators'] = 'estimators must not repeat'
        if errors:
            raise ValidationError(errors)

    def get_params(self) -> ModelParams:
        return ModelParams(self.theta)

    def get_schemes(self) -> List[SamplingScheme]:
        """One scheme per step with the number of increments held fixed."""
        return [SamplingScheme.from_count(self.n_per_scheme, step) for step in self.delta_grid]

    def get_estimator_tags(self) -> List[EstimatorTag]:
        return [EstimatorTag.from_label(label) for label in self.estimators]


class StudyRow(models.Model):
    """
    Empirical variance of one estimator at one step, with the
    theoretical comparators.
    """
    config = models.ForeignKey(ExperimentConfig, on_delete=models.CASCADE, related_name='rows')
    position = models.PositiveIntegerField(default=0)
    delta = models.FloatField()
    estimator = models.CharField(max_length=10, choices=ExperimentConfig.ESTIMATOR_CHOICES)
    empirical_variance = models.FloatField(null=True, blank=True)
    theoretical_inverse_info = models.FloatField()
    qv_theoretical_variance = models.FloatField()
    ks_statistic = models.FloatField(null=True, blank=True)
    mean_estimate = models.FloatField(null=True, blank=True)
    mc_stderr = models.FloatField(null=True, blank=True, help_text="Jackknife error of the empirical variance")
    replicas_used = models.PositiveIntegerField(default=0)
    failure_rate = models.FloatField(default=0.0)
    flagged = models.BooleanField(default=False)

    class Meta:
        db_table = 'study_rows'
        ordering = ['config', 'position']
        unique_together = ['config', 'delta', 'estimator']

    def __str__(self) -> str:
        return f"{self.estimator} at delta={self.delta}: var={self.empirical_variance}"

    def get_variance_ratio(self) -> float:
        """Empirical variance over the efficient bound."""
        if self.empirical_variance is None:
            return float('nan')
        return self.empirical_variance / self.theoretical_inverse_info
