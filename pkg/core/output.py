"""
Writers shared by every command: CSV with a provenance header, and JSON.
"""
import csv
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, TextIO, Union

from django.conf import settings

from core.exceptions import OutputError

STDOUT = '-'


def format_value(value: Any) -> str:
    """17 significant digits for floats so that output is byte-reproducible."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        return f'{value:.17g}'
    if value is None:
        return ''
    return str(value)


def provenance_lines(command: str, parameters: Mapping[str, Any], seed: Optional[int]) -> List[str]:
    """Header lines that make an output file regenerable from itself."""
    flags = ' '.join(
        _flag(key, value) for key, value in sorted(parameters.items()) if value is not None
    )
    return [
        f'command: {command} {flags}'.rstrip(),
        f'seed: {"" if seed is None else seed}'.rstrip(),
        f'version: {settings.VERSION}',
        f'parameters: {json.dumps(_jsonable(parameters), sort_keys=True)}',
    ]


def _flag(key: str, value: Any) -> str:
    name = key.replace('_', '-')
    if isinstance(value, bool):
        return f'--{name}' if value else f'--no-{name}'
    return f'--{name} {_flag_value(value)}'


def _flag_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ','.join(format_value(v) for v in value)
    return format_value(value)


def _jsonable(parameters: Mapping[str, Any]) -> Dict[str, Any]:
    return {
        key: list(value) if isinstance(value, tuple) else value
        for key, value in parameters.items()
    }


def resolve_output_path(output: Optional[str], default_name: str) -> Union[str, Path]:
    """'-' means stdout; a missing path or bare file name goes to OUTPUT_DIR."""
    if output == STDOUT:
        return STDOUT
    output_dir = Path(settings.SCALE_INFERENCE['OUTPUT_DIR'])
    if not output:
        return output_dir / default_name
    path = Path(output)
    if path.parent == Path('.') and not str(output).startswith('.'):
        return output_dir / path
    return path


@contextmanager
def open_output(target: Union[str, Path], stdout: Optional[TextIO] = None) -> Iterator[TextIO]:
    """Open a text stream for writing; OSError becomes OutputError."""
    if target == STDOUT:
        yield stdout or sys.stdout
        return
    path = Path(target)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        stream = path.open('w', encoding='utf-8', newline='')
    except OSError as exc:
        raise OutputError(f'cannot open {path} for writing: {exc}', path=str(path)) from exc
    try:
        with stream:
            yield stream
    except OSError as exc:
        raise OutputError(f'writing {path} failed: {exc}', path=str(path)) from exc


def write_csv(
    stream: TextIO,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    provenance: Sequence[str] = (),
) -> int:
    """Write '#' provenance lines, the header and the rows. Returns the row count."""
    for line in provenance:
        stream.write(f'# {line}\n')
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([format_value(value) for value in row])
        count += 1
    return count


def write_json(stream: TextIO, payload: Any) -> None:
    stream.write(json.dumps(payload, sort_keys=True, indent=2) + '\n')
