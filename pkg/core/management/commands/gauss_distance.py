"""
Management command for the L2 distance between the jittered law and its Gaussian limit.
"""
import argparse

from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand


class Command(ScaleInferenceCommand):
    help = 'L2 distance between the jittered increment density and the normal density'
    command_name = 'gauss_distance'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--theta', type=float, help='Jump intensity (default 1)')
        parser.add_argument('--deltas', required=True, help='Comma-separated sampling steps')
        parser.add_argument(
            '--spectral',
            action=argparse.BooleanOptionalAction,
            help='Also compute the distance through the characteristic function (default on)',
        )
