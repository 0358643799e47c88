"""
Command dispatch for the batch CLI.

A command is validated into a CliConfig, computed in full, and only then
written out, so a failing computation never leaves a truncated file.
"""
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, TextIO, Tuple, Type, Union

import numpy as np

from core.exceptions import OutputError, ScaleInferenceError, ValidationError
from core.output import STDOUT, open_output, provenance_lines, resolve_output_path, write_csv, write_json
from core.serializers import (
    CommandSerializer,
    DeficiencyCurveSerializer,
    EstimateSerializer,
    FisherCurveSerializer,
    GaussDistanceSerializer,
    McStudySerializer,
    NonhomogInfoSerializer,
    PmfSerializer,
    SimulateSerializer,
)
from estimators.domain import EstimatorTag
from estimators.serializers import EstimateResultSerializer
from estimators.services import EstimatorService
from fisher.services import FisherService
from gaussianization.services import GaussianizationService
from increments.csvio import read_series, write_series
from increments.domain import IncrementSeries, ModelParams, RegimeTag, SamplingScheme
from increments.services import IncrementLawService
from montecarlo.models import ExperimentConfig
from montecarlo.services import STUDY_HEADER, VarianceStudyService
from nonhomogeneous.domain import builtin_intensity
from nonhomogeneous.services import NonHomogeneousService

logger = logging.getLogger(__name__)

# parameters that never change the content of an output file
NON_PROVENANCE = frozenset({'output', 'workers', 'persist'})


@dataclass
class CliConfig:
    """A validated command invocation."""
    command: str
    parameters: Dict[str, Any]
    output_path: Union[str, Path]
    seed: Optional[int] = None


@dataclass
class CommandOutput:
    """What a command produced: CSV rows, a series or a JSON payload, plus a human summary."""
    header: Sequence[str] = ()
    rows: List[Sequence[Any]] = field(default_factory=list)
    payload: Optional[Dict[str, Any]] = None
    series: Optional[IncrementSeries] = None
    summary: str = ''


def _simulate(params: Dict[str, Any]) -> CommandOutput:
    scheme = SamplingScheme(horizon=params['T'], step=params['delta'])
    if params.get('intensity'):
        model = builtin_intensity(params['intensity'])
        series = NonHomogeneousService.sample_increments_nh(
            model, params['theta'], scheme, params['seed'], replica=params['replica']
        )
    else:
        series = IncrementLawService.sample_increments(
            ModelParams(params['theta']), scheme, params['seed'], replica=params['replica']
        )
    return CommandOutput(series=series, summary=f'{len(series)} increments simulated')


def _pmf(params: Dict[str, Any]) -> CommandOutput:
    k_max = params['k_max']
    rows = [(k, IncrementLawService.pmf(params['x'], k)) for k in range(-k_max, k_max + 1)]
    return CommandOutput(header=('k', 'pmf'), rows=rows, summary=f'pmf at x={params["x"]:g} for |k| <= {k_max}')


def _fisher_curve(params: Dict[str, Any]) -> CommandOutput:
    points = FisherService.information_through_scales(params['theta'], params['deltas'], params['n'])
    rows = [
        (p.delta, p.horizon, p.info, p.info_micro, p.info_macro, p.qv_inverse_variance)
        for p in points
    ]
    return CommandOutput(
        header=('delta', 'horizon', 'info', 'info_micro', 'info_macro', 'qv_inverse_variance'),
        rows=rows,
        summary=f'information at {len(rows)} steps',
    )


def _deficiency_curve(params: Dict[str, Any]) -> CommandOutput:
    grid = np.geomspace(params['x_min'], params['x_max'], params['points'])
    points = FisherService.info_curve(grid)
    best = max(points, key=lambda p: p.ratio)
    return CommandOutput(
        header=('x', 'psi', 'ratio'),
        rows=[(p.x, p.psi, p.ratio) for p in points],
        summary=f'maximum ratio {best.ratio:.4f} at x={best.x:.3f}',
    )


def _estimate(params: Dict[str, Any]) -> CommandOutput:
    path = Path(params['input'])
    try:
        with path.open(encoding='utf-8') as stream:
            data = read_series(stream, horizon=params.get('T'), step=params.get('delta'))
    except OSError as exc:
        raise OutputError(f'cannot read {path}: {exc}', path=str(path)) from exc

    method = EstimatorTag.from_label(params['method'])
    if method is EstimatorTag.MLE and params.get('bracket'):
        lower, upper = params['bracket']
        result = EstimatorService.mle_estimate(data, bracket=(lower, upper))
    else:
        result = EstimatorService.estimate(method, data)
    return CommandOutput(
        payload=dict(EstimateResultSerializer(result).data),
        summary=f'{method.label} estimate {result.value:.6g} from {len(data)} increments',
    )


def _mc_study(params: Dict[str, Any]) -> CommandOutput:
    config = ExperimentConfig(
        theta=params['theta'],
        delta_grid=list(params['deltas']),
        n_per_scheme=params['n'],
        replicas=params['replicas'],
        seed=params['seed'],
        estimators=list(params['estimators']),
    )
    rows = VarianceStudyService.run_variance_study(config, workers=params['workers'])
    if params['persist']:
        VarianceStudyService.persist_study(config, rows)
        logger.info('stored study %s with %d rows', config.pk, len(rows))
    flagged = sum(1 for row in rows if row.flagged)
    return CommandOutput(
        header=STUDY_HEADER,
        rows=VarianceStudyService.study_table(rows),
        summary=f'{len(rows)} study rows, {flagged} flagged',
    )


def _gauss_distance(params: Dict[str, Any]) -> CommandOutput:
    scan = GaussianizationService.distance_scan(params['theta'], params['deltas'], spectral=params['spectral'])
    return CommandOutput(
        header=('delta', 'l2_direct', 'l2_spectral', 'delta_times_l2'),
        rows=[(row.delta, row.l2_direct, row.l2_spectral, row.delta_times_l2) for row in scan],
        summary=f'L2 distance at {len(scan)} steps',
    )


def _nonhomog_info(params: Dict[str, Any]) -> CommandOutput:
    model = builtin_intensity(params['intensity'], params['theta_max'])
    scheme = SamplingScheme(horizon=params['T'], step=params['delta'])
    regimes = list(RegimeTag) if params['regime'] == 'all' else [RegimeTag(params['regime'])]
    rows = [
        (regime.value, NonHomogeneousService.info_nonhomog(regime, model, params['theta'], scheme))
        for regime in regimes
    ]
    return CommandOutput(
        header=('regime', 'information'),
        rows=rows,
        summary=f'{model.name} intensity, {len(rows)} regime(s)',
    )


Handler = Callable[[Dict[str, Any]], CommandOutput]

COMMANDS: Dict[str, Tuple[Type[CommandSerializer], Handler, str]] = {
    'simulate': (SimulateSerializer, _simulate, 'increments.csv'),
    'pmf': (PmfSerializer, _pmf, 'pmf.csv'),
    'fisher_curve': (FisherCurveSerializer, _fisher_curve, 'fisher_curve.csv'),
    'deficiency_curve': (DeficiencyCurveSerializer, _deficiency_curve, 'deficiency_curve.csv'),
    'estimate': (EstimateSerializer, _estimate, 'estimate.json'),
    'mc_study': (McStudySerializer, _mc_study, 'mc_study.csv'),
    'gauss_distance': (GaussDistanceSerializer, _gauss_distance, 'gauss_distance.csv'),
    'nonhomog_info': (NonhomogInfoSerializer, _nonhomog_info, 'nonhomog_info.csv'),
}


class CliService:
    """Service class for validating and dispatching CLI commands."""

    @staticmethod
    def build_config(command: str, raw: Mapping[str, Any]) -> CliConfig:
        """Validate raw parameters; raises ValidationError listing every bad field."""
        name = command.replace('-', '_')
        if name not in COMMANDS:
            raise ValidationError(f'unknown command {command!r}', choices=sorted(COMMANDS))
        serializer_class, _, default_name = COMMANDS[name]
        serializer = serializer_class(data=dict(raw))
        if not serializer.is_valid():
            raise ValidationError(
                f'invalid parameters for {name}',
                fields=json.loads(json.dumps(serializer.errors)),
            )
        parameters = dict(serializer.validated_data)
        output = parameters.pop('output', None)
        return CliConfig(
            command=name,
            parameters=parameters,
            output_path=resolve_output_path(output, default_name),
            seed=parameters.get('seed'),
        )

    @staticmethod
    def execute(config: CliConfig, stdout: Optional[TextIO] = None) -> str:
        """Run the command and write its output; returns the summary line."""
        _, handler, _ = COMMANDS[config.command]
        logger.info('running %s', config.command)
        result = handler(config.parameters)

        with open_output(config.output_path, stdout) as stream:
            if result.payload is not None:
                write_json(stream, result.payload)
            else:
                provenance = provenance_lines(
                    config.command,
                    {k: v for k, v in config.parameters.items() if k not in NON_PROVENANCE},
                    config.seed,
                )
                if result.series is not None:
                    write_series(stream, result.series, provenance)
                else:
                    write_csv(stream, result.header, result.rows, provenance)
        logger.info('%s written to %s', config.command, config.output_path)
        return result.summary

    @staticmethod
    def dispatch(
        config: CliConfig,
        stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None,
        notify: Optional[Callable[[str], None]] = None,
    ) -> int:
        """Run a validated command; returns the process exit status."""
        try:
            summary = CliService.execute(config, stdout)
        except ScaleInferenceError as exc:
            return CliService.report(exc, stderr)
        if notify is not None and config.output_path != STDOUT:
            notify(f'{summary}; output in {config.output_path}')
        return 0

    @staticmethod
    def run(
        command: str,
        raw: Mapping[str, Any],
        stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None,
        notify: Optional[Callable[[str], None]] = None,
    ) -> int:
        """Validate and dispatch in one call."""
        try:
            config = CliService.build_config(command, raw)
        except ScaleInferenceError as exc:
            return CliService.report(exc, stderr)
        return CliService.dispatch(config, stdout, stderr, notify)

    @staticmethod
    def report(error: ScaleInferenceError, stderr: Optional[TextIO] = None) -> int:
        """Write the machine-readable error record; returns its exit code."""
        logger.debug('command failed: %s', error.message)
        (stderr or sys.stderr).write(json.dumps(error.as_record(), sort_keys=True, default=str) + '\n')
        return error.exit_code
