"""
Management command to estimate theta from an increment CSV.
"""
from django.core.management.base import CommandParser

from core.management.base import ScaleInferenceCommand


class Command(ScaleInferenceCommand):
    help = 'Estimate the jump intensity from a series written by simulate'
    command_name = 'estimate'

    def add_parameters(self, parser: CommandParser) -> None:
        parser.add_argument('--method', required=True, help='qv, onestep (os) or mle')
        parser.add_argument('--input', required=True, help='Increment CSV')
        parser.add_argument('--T', dest='T', type=float, help='Horizon; read from the CSV header if omitted')
        parser.add_argument('--delta', type=float, help='Step; read from the CSV header if omitted')
        parser.add_argument('--bracket', help='MLE search interval as lo,hi')
