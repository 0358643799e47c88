"""
Management command for the information under a time-dependent intensity.
"""
from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand
from nonhomogeneous.domain import BUILTIN_INTENSITIES


class Command(ScaleInferenceCommand):
    help = 'Limit Fisher information in each regime for a built-in intensity'
    command_name = 'nonhomog_info'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--intensity', choices=sorted(BUILTIN_INTENSITIES), help='Default linear')
        parser.add_argument('--theta', type=float, help='Jump intensity parameter (default 1)')
        parser.add_argument('--T', dest='T', type=float, required=True, help='Observation horizon')
        parser.add_argument('--delta', type=float, required=True, help='Sampling step')
        parser.add_argument('--regime', help='microscopic, intermediate, macroscopic or all (default)')
        parser.add_argument('--theta-max', type=float, help='Upper end of the parameter set (default 100)')
