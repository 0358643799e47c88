"""
Management command to run a Monte Carlo variance study.
"""
import argparse

from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand


class Command(ScaleInferenceCommand):
    help = 'Compare empirical estimator variances with the information bounds across steps'
    command_name = 'mc_study'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--theta', type=float, help='Jump intensity (default 1)')
        parser.add_argument('--deltas', required=True, help='Comma-separated increasing steps')
        parser.add_argument('--n', type=int, help='Increments per replica (default DEFAULT_INCREMENTS)')
        parser.add_argument('--replicas', type=int, help='Replicas per step (default DEFAULT_REPLICAS)')
        parser.add_argument('--seed', type=int, help='Master seed (default 0)')
        parser.add_argument('--estimators', help='Comma-separated subset of QV,OneStep,MLE (default all)')
        parser.add_argument('--workers', type=int, help='Replica blocks per step; never changes the output')
        parser.add_argument(
            '--persist',
            action=argparse.BooleanOptionalAction,
            help='Store the configuration and rows in the database',
        )
