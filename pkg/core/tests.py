"""
Tests for the CLI: output helpers, parameter validation and the commands.
"""
import csv
import io
import json
import math
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Tuple
from unittest import mock

from django.core.management import call_command
from django.test import SimpleTestCase, TestCase, override_settings

from increments.csvio import read_series
from increments.domain import ModelParams, SamplingScheme
from increments.services import IncrementLawService
from montecarlo.models import ExperimentConfig, StudyRow
from .exceptions import ConvergenceError, ValidationError
from .output import STDOUT, format_value, provenance_lines, resolve_output_path
from .services import CliService


def read_csv(text: str) -> Tuple[List[str], List[Dict[str, str]]]:
    """Split a CSV output into its provenance lines and its rows."""
    lines = text.splitlines()
    comments = [line for line in lines if line.startswith('#')]
    body = [line for line in lines if line and not line.startswith('#')]
    return comments, list(csv.DictReader(body))


def run_command(name: str, **options: Any) -> Tuple[int, str, str]:
    """call_command wrapper returning (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    try:
        call_command(name, stdout=out, stderr=err, **options)
    except SystemExit as exc:
        return int(exc.code), out.getvalue(), err.getvalue()
    return 0, out.getvalue(), err.getvalue()


class OutputHelpersTest(SimpleTestCase):
    """Test value formatting, provenance and output paths."""

    def test_format_value(self) -> None:
        self.assertEqual(format_value(0.1), '0.10000000000000001')
        self.assertEqual(format_value(math.nan), 'nan')
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(True), 'true')
        self.assertEqual(format_value(3), '3')

    def test_provenance_lines(self) -> None:
        lines = provenance_lines('mc_study', {'deltas': [0.5, 2.0], 'spectral': False, 'n': 10}, 7)
        self.assertEqual(lines[0], 'command: mc_study --deltas 0.5,2 --n 10 --no-spectral')
        self.assertEqual(lines[1], 'seed: 7')
        self.assertEqual(lines[2], 'version: 1.0.0')
        self.assertEqual(json.loads(lines[3][len('parameters:'):]), {'deltas': [0.5, 2.0], 'spectral': False, 'n': 10})

    def test_resolve_output_path(self) -> None:
        with override_settings(SCALE_INFERENCE={'OUTPUT_DIR': Path('/tmp/scale-out')}):
            self.assertEqual(resolve_output_path(None, 'pmf.csv'), Path('/tmp/scale-out/pmf.csv'))
            self.assertEqual(resolve_output_path('curve.csv', 'pmf.csv'), Path('/tmp/scale-out/curve.csv'))
            self.assertEqual(resolve_output_path('sub/curve.csv', 'pmf.csv'), Path('sub/curve.csv'))
            self.assertEqual(resolve_output_path(STDOUT, 'pmf.csv'), STDOUT)


class BuildConfigTest(SimpleTestCase):
    """Test parameter validation before dispatch."""

    def test_defaults_are_filled_in(self) -> None:
        config = CliService.build_config('deficiency-curve', {'output': '-'})
        self.assertEqual(config.command, 'deficiency_curve')
        self.assertEqual(config.parameters, {'x_min': 0.05, 'x_max': 10.0, 'points': 200})
        self.assertEqual(config.output_path, STDOUT)

    def test_list_parameters_from_strings(self) -> None:
        config = CliService.build_config('mc_study', {'deltas': '0.01, 0.6,50', 'estimators': 'qv,os', 'n': 100})
        self.assertEqual(config.parameters['deltas'], [0.01, 0.6, 50.0])
        self.assertEqual(config.parameters['estimators'], ['QV', 'OneStep'])
        self.assertEqual(config.seed, 0)

    def test_unknown_key_rejected(self) -> None:
        with self.assertRaises(ValidationError) as ctx:
            CliService.build_config('pmf', {'x': 1.0, 'bogus': 2})
        self.assertIn('bogus', ctx.exception.context['fields'])

    def test_unknown_command_rejected(self) -> None:
        with self.assertRaises(ValidationError):
            CliService.build_config('plot', {})

    def test_invalid_values_rejected(self) -> None:
        cases = [
            ('simulate', {'theta': 1.0, 'T': 1.0, 'delta': 2.0}, 'delta'),
            ('simulate', {'theta': 0.0, 'T': 10.0, 'delta': 1.0}, 'theta'),
            ('pmf', {'x': float('nan')}, 'x'),
            ('deficiency_curve', {'x_min': 5.0, 'x_max': 1.0}, 'x_max'),
            ('mc_study', {'deltas': '1,0.5'}, 'deltas'),
            ('mc_study', {'deltas': '1', 'replicas': 1}, 'replicas'),
            ('mc_study', {'deltas': '1', 'estimators': 'QV,qv'}, 'estimators'),
            ('estimate', {'method': 'ols', 'input': 'x.csv'}, 'method'),
            ('estimate', {'method': 'qv', 'input': 'x.csv', 'bracket': '0.1,2'}, 'bracket'),
            ('estimate', {'method': 'mle', 'input': 'x.csv', 'bracket': '2,0.1'}, 'bracket'),
            ('nonhomog_info', {'T': 10.0, 'delta': 1.0, 'regime': 'mesoscopic'}, 'regime'),
            ('nonhomog_info', {'T': 10.0, 'delta': 1.0, 'theta': 200.0}, 'theta'),
        ]
        for command, raw, key in cases:
            with self.subTest(command=command, raw=raw):
                with self.assertRaises(ValidationError) as ctx:
                    CliService.build_config(command, raw)
                self.assertIn(key, ctx.exception.context['fields'])


class CommandsTest(SimpleTestCase):
    """Test the management commands end to end."""

    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_deficiency_curve_maximum(self) -> None:
        target = self.dir / 'curve.csv'
        code, out, _ = run_command('deficiency_curve', x_min=0.05, x_max=10.0, points=200, output=str(target))
        self.assertEqual(code, 0)
        self.assertIn('maximum ratio', out)

        comments, rows = read_csv(target.read_text())
        self.assertTrue(comments[0].startswith('# command: deficiency_curve'))
        self.assertIn('# version: 1.0.0', comments)
        self.assertEqual(len(rows), 200)
        best = max(rows, key=lambda row: float(row['ratio']))
        self.assertAlmostEqual(float(best['ratio']), 1.2297, delta=0.005)
        self.assertAlmostEqual(float(best['x']), 0.600, delta=0.02)

    def test_estimate_all_zero_series_is_degenerate(self) -> None:
        series = self.dir / 'increments.csv'
        series.write_text('index,increment\n' + ''.join(f'{i},0\n' for i in range(1, 101)))
        target = self.dir / 'estimate.json'
        code, _, _ = run_command('estimate', method='qv', input=str(series), T=100.0, delta=1.0, output=str(target))
        self.assertEqual(code, 0)
        payload = json.loads(target.read_text())
        self.assertEqual(payload['value'], 0.0)
        self.assertEqual(payload['method'], 'QV')
        self.assertIn('degenerate', payload['flags'])
        self.assertIsNone(payload['stderr'])

    def test_simulate_then_estimate(self) -> None:
        series = self.dir / 'increments.csv'
        code, _, _ = run_command('simulate', theta=2.0, T=500.0, delta=0.5, seed=3, output=str(series))
        self.assertEqual(code, 0)
        comments, rows = read_csv(series.read_text())
        self.assertIn('# seed: 3', comments)
        self.assertEqual(len(rows), 1000)

        for method in ('qv', 'onestep', 'mle'):
            with self.subTest(method=method):
                target = self.dir / f'{method}.json'
                code, _, _ = run_command('estimate', method=method, input=str(series), output=str(target))
                self.assertEqual(code, 0)
                payload = json.loads(target.read_text())
                self.assertTrue(payload['converged'])
                self.assertLess(abs(payload['value'] - 2.0), 5 * payload['stderr'])

    def test_simulate_is_reproducible(self) -> None:
        first, second = self.dir / 'a.csv', self.dir / 'b.csv'
        for target in (first, second):
            run_command('simulate', theta=1.0, T=50.0, delta=1.0, seed=11, intensity='linear', output=str(target))
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_simulate_writes_series_format(self) -> None:
        code, out, _ = run_command('simulate', theta=1.0, T=40.0, delta=2.0, seed=5, output='-')
        self.assertEqual(code, 0)
        parsed = read_series(io.StringIO(out), horizon=40.0, step=2.0)
        expected = IncrementLawService.sample_increments(ModelParams(1.0), SamplingScheme(horizon=40.0, step=2.0), seed=5)
        self.assertEqual(parsed.values.tolist(), expected.values.tolist())

    def test_pmf_to_stdout(self) -> None:
        code, out, _ = run_command('pmf', x=1.0, k_max=2, output='-')
        self.assertEqual(code, 0)
        _, rows = read_csv(out)
        self.assertEqual([int(row['k']) for row in rows], [-2, -1, 0, 1, 2])
        values = [float(row['pmf']) for row in rows]
        self.assertEqual(values, values[::-1])
        self.assertAlmostEqual(values[2], math.exp(-1.0) * 1.2660658777520082, places=12)

    def test_fisher_curve(self) -> None:
        code, out, _ = run_command('fisher_curve', theta=1.0, deltas='0.01,0.6,50', n=1000, output='-')
        self.assertEqual(code, 0)
        _, rows = read_csv(out)
        self.assertEqual(list(rows[0]), ['delta', 'horizon', 'info', 'info_micro', 'info_macro', 'qv_inverse_variance'])
        for row in rows:
            self.assertAlmostEqual(float(row['horizon']), 1000 * float(row['delta']))
            self.assertLessEqual(float(row['qv_inverse_variance']), float(row['info']) * (1 + 1e-9))

    def test_gauss_distance_without_spectral_route(self) -> None:
        code, out, _ = run_command('gauss_distance', theta=1.0, deltas='10,100', spectral=False, output='-')
        self.assertEqual(code, 0)
        comments, rows = read_csv(out)
        self.assertIn('--no-spectral', comments[0])
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[0]['l2_spectral'], 'nan')
        self.assertGreater(float(rows[0]['l2_direct']), float(rows[1]['l2_direct']))

    def test_gauss_distance_at_large_steps(self) -> None:
        code, out, err = run_command('gauss_distance', theta=1.0, deltas='100,1000', output='-')
        self.assertEqual(code, 0, msg=err)
        comments, rows = read_csv(out)
        self.assertIn('--spectral', comments[0])
        for row in rows:
            direct, spectral = float(row['l2_direct']), float(row['l2_spectral'])
            self.assertTrue(math.isfinite(spectral))
            self.assertLessEqual(abs(direct - spectral), 1e-4 * direct)

    def test_nonhomog_info_constant_intensity(self) -> None:
        code, out, _ = run_command('nonhomog_info', intensity='constant', theta=2.0, T=10.0, delta=0.5, output='-')
        self.assertEqual(code, 0)
        _, rows = read_csv(out)
        info = {row['regime']: float(row['information']) for row in rows}
        self.assertEqual(set(info), {'microscopic', 'intermediate', 'macroscopic'})
        self.assertAlmostEqual(info['microscopic'], 5.0, places=8)
        self.assertAlmostEqual(info['macroscopic'], 0.5 * 10.0 / 0.5 / 4.0, places=8)

    def test_invalid_value_exits_2(self) -> None:
        code, _, err = run_command('pmf', x=-1.0, output='-')
        self.assertEqual(code, 2)
        record = json.loads(err)
        self.assertEqual(record['error'], 'ValidationError')
        self.assertEqual(record['exit_code'], 2)
        self.assertIn('x', record['fields'])

    def test_unknown_key_exits_2(self) -> None:
        err = io.StringIO()
        self.assertEqual(CliService.run('pmf', {'x': 1.0, 'colour': 'red'}, stderr=err), 2)
        self.assertIn('colour', json.loads(err.getvalue())['fields'])

    def test_numeric_failure_exits_3(self) -> None:
        target = self.dir / 'curve.csv'
        failure = ConvergenceError('quadrature did not converge', residual=1.0)
        with mock.patch('core.services.FisherService.info_curve', side_effect=failure):
            code, _, err = run_command('deficiency_curve', output=str(target))
        self.assertEqual(code, 3)
        self.assertEqual(json.loads(err)['error'], 'ConvergenceError')
        self.assertFalse(target.exists())

    def test_unwritable_path_exits_4(self) -> None:
        blocker = self.dir / 'file'
        blocker.write_text('')
        code, _, err = run_command('pmf', x=1.0, output=str(blocker / 'sub' / 'pmf.csv'))
        self.assertEqual(code, 4)
        self.assertEqual(json.loads(err)['error'], 'OutputError')

    def test_missing_input_exits_4(self) -> None:
        code, _, _ = run_command('estimate', method='qv', input=str(self.dir / 'missing.csv'), output='-')
        self.assertEqual(code, 4)

    def test_malformed_input_exits_2(self) -> None:
        series = self.dir / 'bad.csv'
        series.write_text('index,increment\n1,zero\n')
        code, _, _ = run_command('estimate', method='qv', input=str(series), T=1.0, delta=1.0, output='-')
        self.assertEqual(code, 2)


class McStudyCommandTest(TestCase):
    """Test the study command, which may write to the database."""

    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.options = {
            'theta': 1.0,
            'deltas': '0.1,1',
            'n': 200,
            'replicas': 8,
            'seed': 7,
            'estimators': 'QV,OneStep',
        }

    def test_runs_are_byte_identical_across_worker_counts(self) -> None:
        first, second = self.dir / 'a.csv', self.dir / 'b.csv'
        self.assertEqual(run_command('mc_study', workers=1, output=str(first), **self.options)[0], 0)
        self.assertEqual(run_command('mc_study', workers=3, output=str(second), **self.options)[0], 0)
        self.assertEqual(first.read_bytes(), second.read_bytes())

        comments, rows = read_csv(first.read_text())
        self.assertIn('# seed: 7', comments)
        self.assertFalse(any('workers' in line for line in comments))
        self.assertEqual([(row['delta'], row['estimator']) for row in rows][:2], [('0.10000000000000001', 'QV'), ('0.10000000000000001', 'OneStep')])
        self.assertEqual(len(rows), 4)

    def test_persist_stores_rows(self) -> None:
        code, _, _ = run_command('mc_study', persist=True, output=str(self.dir / 'study.csv'), **self.options)
        self.assertEqual(code, 0)
        config = ExperimentConfig.objects.get()
        self.assertEqual(config.delta_grid, [0.1, 1.0])
        self.assertEqual(StudyRow.objects.filter(config=config).count(), 4)

    def test_without_persist_nothing_is_stored(self) -> None:
        run_command('mc_study', output=str(self.dir / 'study.csv'), **self.options)
        self.assertFalse(ExperimentConfig.objects.exists())
