"""
Management command for the information through scales.
"""
from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand


class Command(ScaleInferenceCommand):
    help = 'Fisher information and its micro/macro limits for a fixed number of increments'
    command_name = 'fisher_curve'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--theta', type=float, help='Jump intensity (default 1)')
        parser.add_argument('--deltas', required=True, help='Comma-separated sampling steps')
        parser.add_argument('--n', type=int, help='Increments per step (default DEFAULT_INCREMENTS)')
