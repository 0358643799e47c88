"""
CSV format of an increment series: '#' provenance lines, the header
`index,increment`, then one row per increment with index counting from 1.
"""
import csv
import json
import logging
from typing import Any, Dict, Optional, Sequence, TextIO

import numpy as np

from core.exceptions import DomainError, ValidationError
from core.output import write_csv
from .domain import IncrementSeries, SamplingScheme

logger = logging.getLogger(__name__)

HEADER = ('index', 'increment')


def write_series(stream: TextIO, series: IncrementSeries, provenance: Sequence[str] = ()) -> int:
    """Write a series; returns the number of rows."""
    rows = ((i, int(v)) for i, v in enumerate(series.values, start=1))
    return write_csv(stream, HEADER, rows, provenance)


def _header_parameters(comments: Sequence[str]) -> Dict[str, Any]:
    for line in comments:
        body = line.lstrip('#').strip()
        if body.startswith('parameters:'):
            try:
                parameters = json.loads(body[len('parameters:'):])
            except json.JSONDecodeError:
                logger.warning('ignoring malformed parameters line in series header')
                return {}
            return parameters if isinstance(parameters, dict) else {}
    return {}


def read_series(
    stream: TextIO,
    horizon: Optional[float] = None,
    step: Optional[float] = None,
) -> IncrementSeries:
    """Parse a series. Missing horizon or step are taken from the provenance header."""
    comments = []
    lines = []
    for line in stream:
        if line.startswith('#'):
            comments.append(line)
        elif line.strip():
            lines.append(line)

    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or tuple(cell.strip() for cell in header) != HEADER:
        raise ValidationError(f'expected header {",".join(HEADER)}, got {header}')

    values = []
    for expected_index, row in enumerate(reader, start=1):
        if len(row) != 2:
            raise ValidationError(f'row {expected_index} has {len(row)} fields', row=expected_index)
        try:
            index, increment = int(row[0]), int(row[1])
        except ValueError:
            raise ValidationError(f'row {expected_index} is not a pair of integers', row=expected_index) from None
        if index != expected_index:
            raise ValidationError(f'expected index {expected_index}, got {index}', row=expected_index)
        values.append(increment)
    if not values:
        raise ValidationError('the series is empty')

    parameters = _header_parameters(comments)
    horizon = horizon if horizon is not None else parameters.get('T')
    step = step if step is not None else parameters.get('delta')
    if horizon is None or step is None:
        raise ValidationError('horizon T and step delta are required for an increment series')
    try:
        scheme = SamplingScheme(horizon=float(horizon), step=float(step))
        return IncrementSeries(values=np.asarray(values, dtype=np.int64), scheme=scheme)
    except DomainError as exc:
        raise ValidationError(exc.message, **exc.context) from exc
