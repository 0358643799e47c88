"""
Management command to simulate an increment series.
"""
from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand
from nonhomogeneous.domain import BUILTIN_INTENSITIES


class Command(ScaleInferenceCommand):
    help = 'Simulate the increments of the symmetric jump process and write them as CSV'
    command_name = 'simulate'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--theta', type=float, required=True, help='Jump intensity')
        parser.add_argument('--T', dest='T', type=float, required=True, help='Observation horizon')
        parser.add_argument('--delta', type=float, required=True, help='Sampling step')
        parser.add_argument('--seed', type=int, help='Random seed (default 0)')
        parser.add_argument('--replica', type=int, help='Replica index of the random stream (default 0)')
        parser.add_argument(
            '--intensity',
            choices=sorted(BUILTIN_INTENSITIES),
            help='Simulate a time-dependent intensity instead of a constant one',
        )
