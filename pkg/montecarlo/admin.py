"""
Admin configuration for montecarlo app.
"""
from django.contrib import admin
from django.utils.html import format_html

from .models import ExperimentConfig, StudyRow


class StudyRowInline(admin.TabularInline):
    model = StudyRow
    extra = 0
    fields = ['delta', 'estimator', 'empirical_variance', 'theoretical_inverse_info', 'ks_statistic', 'flagged']
    readonly_fields = fields
    can_delete = False


@admin.register(ExperimentConfig)
class ExperimentConfigAdmin(admin.ModelAdmin):
    """Admin interface for ExperimentConfig model."""
    list_display = ['id', 'theta', 'delta_grid', 'n_per_scheme', 'replicas', 'seed', 'estimators', 'created_at']
    list_filter = ['created_at']
    readonly_fields = ['created_at']
    inlines = [StudyRowInline]


@admin.register(StudyRow)
class StudyRowAdmin(admin.ModelAdmin):
    """Admin interface for StudyRow model."""
    list_display = [
        'config',
        'delta',
        'estimator',
        'empirical_variance',
        'theoretical_inverse_info',
        'variance_ratio_display',
        'failure_rate',
        'flagged_display',
    ]
    list_filter = ['estimator', 'flagged']
    ordering = ['config', 'position']

    def variance_ratio_display(self, obj: StudyRow) -> str:
        return f"{obj.get_variance_ratio():.4f}"
    variance_ratio_display.short_description = 'Var / bound'

    def flagged_display(self, obj: StudyRow) -> str:
        if obj.flagged:
            return format_html('<span style="color: red;">flagged</span>')
        return format_html('<span style="color: green;">ok</span>')
    flagged_display.short_description = 'Status'
