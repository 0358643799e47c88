"""
Base class for the CLI commands: options become a parameter dict that is
validated and dispatched by CliService.
"""
from typing import Any, Dict

from django.core.management.base import BaseCommand, CommandParser

from core.services import CliService

# options every Django command carries; they are not command parameters
DJANGO_OPTIONS = frozenset({
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color',
    'force_color', 'skip_checks', 'stdout', 'stderr',
})


class ScaleInferenceCommand(BaseCommand):
    """A command that maps its options onto one CliService command."""
    command_name = ''

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument(
            '--output',
            help="Output file; a bare name goes to OUTPUT_DIR, '-' writes to stdout",
        )
        self.add_parameters(parser)

    def add_parameters(self, parser: CommandParser) -> None:
        """Declare the command's own flags."""

    def handle(self, *args: Any, **options: Any) -> None:
        raw: Dict[str, Any] = {
            key: value for key, value in options.items()
            if key not in DJANGO_OPTIONS and value is not None
        }
        # error records on stderr stay plain JSON
        self.stderr.style_func = None
        code = CliService.run(
            self.command_name,
            raw,
            stdout=self.stdout,
            stderr=self.stderr,
            notify=lambda message: self.stdout.write(self.style.SUCCESS(message)),
        )
        if code:
            raise SystemExit(code)
