"""
Management command for the QV deficiency curve.
"""
from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand


class Command(ScaleInferenceCommand):
    help = 'Per-increment information and QV deficiency ratio on a log-spaced grid of x'
    command_name = 'deficiency_curve'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--x-min', type=float, help='Smallest x (default 0.05)')
        parser.add_argument('--x-max', type=float, help='Largest x (default 10)')
        parser.add_argument('--points', type=int, help='Grid size (default 200)')
