# Generated by Django 5.2.4

import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentConfig',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('theta', models.FloatField(help_text='Jump intensity used to simulate')),
                ('delta_grid', models.JSONField(default=list, help_text='Strictly increasing sampling steps')),
                ('n_per_scheme', models.PositiveIntegerField(help_text='Increments per replica, the same at every step', validators=[django.core.validators.MinValueValidator(1)])),
                ('replicas', models.PositiveIntegerField(validators=[django.core.validators.MinValueValidator(2)])),
                ('seed', models.BigIntegerField(default=0, validators=[django.core.validators.MinValueValidator(0)])),
                ('estimators', models.JSONField(default=list, help_text='Subset of QV, OneStep, MLE')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'experiment_configs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='StudyRow',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('position', models.PositiveIntegerField(default=0)),
                ('delta', models.FloatField()),
                ('estimator', models.CharField(choices=[('QV', 'QV'), ('OneStep', 'OneStep'), ('MLE', 'MLE')], max_length=10)),
                ('empirical_variance', models.FloatField(blank=True, null=True)),
                ('theoretical_inverse_info', models.FloatField()),
                ('qv_theoretical_variance', models.FloatField()),
                ('ks_statistic', models.FloatField(blank=True, null=True)),
                ('mean_estimate', models.FloatField(blank=True, null=True)),
                ('mc_stderr', models.FloatField(blank=True, help_text='Jackknife error of the empirical variance', null=True)),
                ('replicas_used', models.PositiveIntegerField(default=0)),
                ('failure_rate', models.FloatField(default=0.0)),
                ('flagged', models.BooleanField(default=False)),
                ('config', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='montecarlo.experimentconfig')),
            ],
            options={
                'db_table': 'study_rows',
                'ordering': ['config', 'position'],
                'unique_together': {('config', 'delta', 'estimator')},
            },
        ),
    ]
