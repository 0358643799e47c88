"""
Management command to tabulate the increment law.
"""
from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand


class Command(ScaleInferenceCommand):
    help = 'Write the exact increment pmf at x = theta * delta for |k| <= k-max'
    command_name = 'pmf'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--x', type=float, required=True, help='Product theta * delta')
        parser.add_argument('--k-max', type=int, help='Largest |k| (default 30)')
