import json
import os
import shutil
import tempfile
from io import StringIO
from unittest.mock import patch

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase


MIN_MAX_SPEC = {
    'n': 2,
    'states': [
        {'actions': [{'name': 'pick', 'inner': [{'payoff': 0, 'row': [1, 0]},
                                                {'payoff': 0, 'row': [0, 1]}]}]},
        {'actions': [{'name': 'first', 'inner': [{'payoff': 0, 'row': [1, 0]}]},
                     {'name': 'second', 'inner': [{'payoff': 0, 'row': [0, 1]}]}]},
    ],
}

ONE_STATE_SPEC = {
    'n': 1,
    'states': [{'actions': [{'inner': [{'payoff': 5, 'row': [1]}]}]}],
}

SCENARIOS = 'label,weight,bond,stock\nboom,0.25,1,3\nbase,0.5,1,1\nbust,0.25,1,-2\n'


class MinimaxCommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def write(self, name, content):
        path = os.path.join(self.tmpdir, name)
        with open(path, 'w') as stream:
            stream.write(content if isinstance(content, str) else json.dumps(content))
        return path

    def run_command(self, *args):
        out = StringIO()
        call_command('minimax', *args, '--reproducible', '--seed', '42', stdout=out)
        return json.loads(out.getvalue())

    def assertReturnCode(self, code, *args):
        with self.assertRaises(CommandError) as raised:
            self.run_command(*args)
        self.assertEqual(raised.exception.returncode, code)
        return raised.exception


class CheckCommandTest(MinimaxCommandTestCase):
    def test_builtin_operator(self):
        report = self.run_command('check', '--operator', 'top', '--n', '3', '--samples', '300')
        self.assertEqual(report['command'], 'check')
        self.assertEqual(report['samples'], 300)
        self.assertEqual(report['seed'], 42)
        self.assertEqual(len(report['reports']), 7)
        self.assertTrue(all(entry['holds'] for entry in report['reports']))
        self.assertNotIn('generated_at', report)

    def test_spec(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        report = self.run_command('check', '--input', path, '--samples', '300')
        self.assertEqual(report['suite']['name'], 'GunawardenaKeane')
        self.assertTrue(report['suite']['consistent'])
        self.assertTrue(report['suite']['left_holds'] and report['suite']['right_holds'])

    def test_property_failure(self):
        self.assertReturnCode(1, 'check', '--operator', 'negation', '--n', '2',
                              '--samples', '200')

    def test_invalid_spec(self):
        spec = dict(ONE_STATE_SPEC, states=[{'actions': [{'inner': [{'payoff': 5,
                                                                      'row': [0.5]}]}]}])
        self.assertReturnCode(2, 'check', '--input', self.write('bad.json', spec))
        self.assertReturnCode(2, 'check', '--input', self.write('broken.json', '{"n": '))

    def test_missing_file(self):
        self.assertReturnCode(3, 'check', '--input', os.path.join(self.tmpdir, 'nope.json'))

    def test_timestamp(self):
        out = StringIO()
        call_command('minimax', 'check', '--operator', 'max', '--n', '2', '--samples', '50',
                     stdout=out)
        self.assertIn('generated_at', json.loads(out.getvalue()))

    def test_output_file(self):
        path = os.path.join(self.tmpdir, 'report.json')
        out = StringIO()
        call_command('minimax', 'check', '--operator', 'min', '--n', '2', '--samples', '50',
                     '--reproducible', '--output', path, stdout=out)
        self.assertEqual(out.getvalue(), '')
        with open(path) as stream:
            self.assertEqual(json.load(stream)['target'], 'min')


class ApproxCommandTest(MinimaxCommandTestCase):
    def test_min_max(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        report = self.run_command('approx', '--input', path, '--epsilon', '0.5',
                                  '--samples', '500')
        self.assertTrue(report['verification']['holds'])
        self.assertLessEqual(report['verification']['max_upper_excess'], 0.5)
        self.assertEqual(report['representation']['n'], 2)
        self.assertEqual(len(report['representation']['states']), 2)

    def test_same_seed_same_report(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        args = ('approx', '--input', path, '--epsilon', '0.5', '--samples', '200')
        self.assertEqual(self.run_command(*args), self.run_command(*args))

    def test_payments_need_force(self):
        path = self.write('spec.json', ONE_STATE_SPEC)
        self.assertReturnCode(2, 'approx', '--input', path, '--epsilon', '0.5')
        report = self.run_command('approx', '--input', path, '--epsilon', '0.5',
                                  '--samples', '200', '--force-recursive')
        self.assertEqual(report['representation']['states'][0][0]['vertices'], [[1.0]])

    def test_bad_epsilon(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        self.assertReturnCode(2, 'approx', '--input', path, '--epsilon', '0')
        self.assertReturnCode(2, 'approx', '--input', path, '--epsilon=-1')


class IterateCommandTest(MinimaxCommandTestCase):
    def test_one_state(self):
        path = self.write('spec.json', ONE_STATE_SPEC)
        report = self.run_command('iterate', '--input', path, '--x0', '0', '--steps', '3')
        self.assertEqual(report['iterates'], [[0.0], [5.0], [10.0], [15.0]])

    def test_min_max(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        report = self.run_command('iterate', '--input', path, '--x0', '1,3', '--steps', '2')
        self.assertEqual(report['iterates'], [[1.0, 3.0], [3.0, 1.0], [3.0, 1.0]])

    def test_bad_vector(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        self.assertReturnCode(2, 'iterate', '--input', path, '--x0', '1,x')
        self.assertReturnCode(2, 'iterate', '--input', path, '--x0', '1,2,3')
        self.assertReturnCode(2, 'iterate', '--input', path, '--steps=-1')


class RepresentCommandTest(MinimaxCommandTestCase):
    def test_min_max(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        report = self.run_command('represent', '--input', path, '--epsilon', '0.5',
                                  '--x0', '1,3')
        self.assertEqual(report['dropped'], [0, 0])
        self.assertEqual(report['evaluation']['direct'], [3.0, 1.0])
        self.assertGreaterEqual(report['evaluation']['value'][0], 3.0)
        self.assertGreaterEqual(report['evaluation']['value'][1], 1.0)
        self.assertEqual(report['net']['epsilon'], 0.5)
        self.assertEqual(len(report['net']['points']), report['net_size'])
        solved = report['evaluation']['minimax']
        self.assertEqual(len(solved), 2)
        for i, result in enumerate(solved):
            self.assertEqual(result['x'], [1.0, 3.0])
            self.assertGreaterEqual(result['value'], report['evaluation']['direct'][i] - 1e-9)
            self.assertEqual(sum(result['argmax_p']), 1.0)
            self.assertEqual(result['argmax_p'][result['argmax_index']], 1.0)


class RiskCommandTest(MinimaxCommandTestCase):
    def test_worst_case(self):
        path = self.write('scenarios.csv', SCENARIOS)
        report = self.run_command('risk', '--input', path)
        self.assertEqual(report['atoms'], ['boom', 'base', 'bust'])
        results = {entry['position']: entry for entry in report['results']}
        self.assertEqual(results['bond']['mu'], -1.0)
        self.assertEqual(results['stock']['mu'], 2.0)
        for entry in results.values():
            self.assertAlmostEqual(entry['minimax'], entry['mu'])
            self.assertAlmostEqual(entry['homogeneous_minimax'], entry['mu'])
            self.assertGreaterEqual(entry['homogeneous_residual'], -1e-9)

    def test_homogeneous_undershoot(self):
        path = self.write('scenarios.csv', SCENARIOS)
        with patch('minimax.management.commands.minimax.homogeneous_risk_minimax_eval',
                   side_effect=lambda mu, ynet, X, tol=None: mu(X) - 1.0):
            error = self.assertReturnCode(1, 'risk', '--input', path)
        self.assertIn('homogeneous', str(error))

    def test_sphere_net(self):
        path = self.write('scenarios.csv', SCENARIOS)
        report = self.run_command('risk', '--input', path, '--measure', 'min_max',
                                  '--ynet', 'sphere', '--epsilon', '0.5')
        for entry in report['results']:
            self.assertGreaterEqual(entry['residual'], -1e-9)

    def test_space_file(self):
        path = self.write('scenarios.csv', 'label,stock\nup,2\ndown,-1\n')
        space = self.write('space.json', {'atoms': ['up', 'down'], 'weights': [0.5, 0.5]})
        report = self.run_command('risk', '--input', path, '--space', space,
                                  '--measure', 'expectation')
        self.assertEqual(report['results'][0]['mu'], -0.5)
        self.assertReturnCode(2, 'risk', '--input', path)

    def test_bad_csv(self):
        path = self.write('scenarios.csv', 'label,weight,stock\nup,0.5,2\ndown,0.5,lots\n')
        error = self.assertReturnCode(2, 'risk', '--input', path)
        self.assertIn('lots', str(error))


class OracleCommandTest(MinimaxCommandTestCase):
    def test_vertices(self):
        report = self.run_command('oracle', '--kind', 'vertices', '--a=-1,2')
        self.assertTrue(report['agree'])
        self.assertEqual(len(report['vertices']), 2)

    def test_shapley(self):
        path = self.write('spec.json', MIN_MAX_SPEC)
        report = self.run_command('oracle', '--kind', 'shapley', '--input', path, '--x0', '1,3')
        self.assertTrue(report['agree'])
        self.assertEqual(report['values'], [3.0, 1.0])
        self.assertEqual(report['choices'], [[0, 1], [0, 0]])

    def test_missing_normal(self):
        self.assertReturnCode(2, 'oracle', '--kind', 'vertices')
