import logging
import os

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone

from rest_framework.exceptions import ParseError, ValidationError
from rest_framework.parsers import JSONParser

from api.renderers import JSONReportRenderer, ScenarioCSVParser
from api.serializers import (
    AxiomReportSerializer, EpsNetSerializer, GameSpecSerializer, PaymentFreeRepSerializer,
    RepresentationResultSerializer, RiskSpaceSerializer, SandwichReportSerializer,
    SuiteResultSerializer, load,
)
from minimax import axioms, oracle
from minimax.approximation import approximate_payment_free, verify_sandwich
from minimax.core import SampleConfig, Tolerance
from minimax.exceptions import AxiomPrecheckFailed, MinimaxError
from minimax.games import (
    build_payment_free_representation, eval_payment_free_rep, payment_free_from_spec,
    shapley_eval, shapley_trace, spec_operator, value_iteration,
)
from minimax.norms import SPHERE, epsilon_net
from minimax.representation import YNet, halfspace_simplex_extremes, minimax_solve
from minimax.risk import (
    build_measure, homogeneous_risk_minimax_eval, load_scenarios, risk_minimax_eval,
)


logger = logging.getLogger(__name__)

# exit codes
PROPERTY_FAILURE = 1
INPUT_ERROR = 2
IO_ERROR = 3

SUITE_NAMES = {
    'ct': axioms.CRANDALL_TARTAR,
    'gk': axioms.GUNAWARDENA_KEANE,
    'gk-sub': axioms.SUBHOMOGENEOUS_GK,
    'msh': axioms.MONOTONE_SUBHOMOGENEOUS,
}


def vector_argument(text):
    try:
        return [float(value) for value in text.split(',')]
    except ValueError:
        raise CommandError('not a comma-separated list of numbers: %r' % text,
                           returncode=INPUT_ERROR)


class Command(BaseCommand):
    help = 'Check, represent and approximate Shapley operators and risk measures'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True)

        check = self.add_subcommand(subparsers, 'check', 'Run the sampled property checks')
        check.add_argument('--operator', choices=sorted(axioms.BUILTIN_OPERATORS),
                           help='Check a built-in operator instead of a game spec')
        check.add_argument('--n', type=int, default=3, help='Dimension for --operator')
        check.add_argument('--suite', choices=sorted(SUITE_NAMES),
                           help='Equivalence suite (default gk, or gk-sub for substochastic specs)')

        approx = self.add_subcommand(subparsers, 'approx',
                                     'Approximate a payment-free operator by a finite one')
        approx.add_argument('--epsilon', type=float, required=True)
        approx.add_argument('--force-recursive', action='store_true',
                            help='Zero the payoffs instead of rejecting the spec')

        iterate = self.add_subcommand(subparsers, 'iterate', 'Value iteration')
        iterate.add_argument('--x0', type=vector_argument)
        iterate.add_argument('--steps', type=int, default=1)

        represent = self.add_subcommand(subparsers, 'represent',
                                        'Build the representation over a sphere net')
        represent.add_argument('--epsilon', type=float, default=0.25)
        represent.add_argument('--x0', type=vector_argument)
        represent.add_argument('--force-recursive', action='store_true')

        risk = self.add_subcommand(subparsers, 'risk', 'Evaluate risk measures on scenarios')
        risk.add_argument('--space', help='RiskSpace JSON file (weights may come from the CSV)')
        risk.add_argument('--measure', default='worst_case',
                          choices=['worst_case', 'expectation', 'min_max'])
        risk.add_argument('--ynet', default='positions', choices=['positions', 'sphere'])
        risk.add_argument('--epsilon', type=float, default=0.25,
                          help='Net spacing for --ynet sphere')

        spot = self.add_subcommand(subparsers, 'oracle', 'Compare a fast path with its oracle')
        spot.add_argument('--kind', required=True, choices=['vertices', 'shapley'])
        spot.add_argument('--a', type=vector_argument, help='Half-space normal for vertices')
        spot.add_argument('--x0', type=vector_argument, help='Point for shapley')

    def add_subcommand(self, subparsers, name, help_text):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument('--input', help='Input file (JSON spec, or CSV scenarios for risk)')
        sub.add_argument('--output', help='Write the report here instead of stdout')
        sub.add_argument('--seed', type=int)
        sub.add_argument('--samples', type=int)
        sub.add_argument('--tol', type=float)
        sub.add_argument('--reproducible', action='store_true',
                         help='Leave out the generated_at timestamp')
        return sub

    def handle(self, *args, **options):
        subcommand = options['subcommand']
        logger.info('minimax %s started', subcommand)
        self.options = options
        self.tol = self.get_tolerance(options['tol'])
        try:
            report, failure = getattr(self, 'handle_%s' % subcommand)(options)
        except ValidationError as exc:
            logger.warning('invalid input for %s: %s', subcommand, exc.detail)
            raise CommandError('invalid input: %s' % exc.detail, returncode=INPUT_ERROR)
        except ParseError as exc:
            logger.warning('unreadable input for %s: %s', subcommand, exc.detail)
            raise CommandError('cannot parse input: %s' % exc.detail, returncode=INPUT_ERROR)
        except AxiomPrecheckFailed as exc:
            raise CommandError(str(exc), returncode=PROPERTY_FAILURE)
        except (MinimaxError, ValueError) as exc:
            logger.warning('%s rejected its input: %s', subcommand, exc)
            raise CommandError(str(exc), returncode=INPUT_ERROR)

        report = dict({'command': subcommand}, **report)
        if not options['reproducible']:
            report['generated_at'] = timezone.now().isoformat()
        self.emit(report, options['output'])
        logger.info('minimax %s finished%s', subcommand, ' with failures' if failure else '')
        if failure:
            raise CommandError(failure, returncode=PROPERTY_FAILURE)

    # -- plumbing

    def get_tolerance(self, value):
        if value is None:
            return Tolerance.default()
        try:
            return Tolerance(value, value)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=INPUT_ERROR)

    def get_seed(self):
        if self.options['seed'] is not None:
            return self.options['seed']
        env = os.environ.get('SHAPLEY_MINIMAX_SEED')
        if env:
            try:
                return int(env)
            except ValueError:
                raise CommandError('SHAPLEY_MINIMAX_SEED is not an integer: %r' % env,
                                   returncode=INPUT_ERROR)
        return settings.MINIMAX_SEED

    def sample_config(self, n):
        return SampleConfig.default(n, count=self.options['samples'], seed=self.get_seed())

    def read(self, path, parser):
        if not path:
            raise CommandError('--input is required', returncode=INPUT_ERROR)
        try:
            with open(path, 'rb') as stream:
                return parser.parse(stream)
        except OSError as exc:
            logger.exception('cannot read %s', path)
            raise CommandError('cannot read %s: %s' % (path, exc), returncode=IO_ERROR)

    def read_spec(self, path):
        return load(GameSpecSerializer, self.read(path, JSONParser()))

    def emit(self, report, path):
        text = JSONReportRenderer().render(report)
        if not path:
            self.stdout.write(text, ending='')
            return
        try:
            with open(path, 'w') as output:
                output.write(text)
        except OSError as exc:
            logger.exception('cannot write %s', path)
            raise CommandError('cannot write %s: %s' % (path, exc), returncode=IO_ERROR)

    def payment_free_spec(self, spec, force):
        if spec.payment_free:
            return spec
        if not force:
            raise CommandError('the spec has nonzero payoffs; use --force-recursive to zero them',
                               returncode=INPUT_ERROR)
        return payment_free_from_spec(spec)

    # -- subcommands

    def handle_check(self, options):
        if options['operator']:
            f = axioms.builtin_operator(options['operator'], options['n'])
            subprobability = False
        else:
            spec = self.read_spec(options['input'])
            f = spec_operator(spec)
            subprobability = spec.subprobability
        suite = options['suite'] or ('gk-sub' if subprobability else 'gk')
        cfg = self.sample_config(f.n)
        reports = axioms.check_axioms(f, axioms.AXIOMS, cfg, self.tol)
        report = {'target': f.label, 'n': f.n, 'seed': cfg.seed, 'samples': cfg.count,
                  'reports': AxiomReportSerializer(reports, many=True).data}
        failure = None
        if f.n == f.m:
            result = axioms.equivalence_suite(f, SUITE_NAMES[suite], cfg, self.tol)
            report['suite'] = SuiteResultSerializer(result).data
            if not (result.consistent and result.left_holds and result.right_holds):
                failure = 'suite %s does not hold for %s' % (result.suite, f.label)
        else:
            held = {r.axiom: r.holds for r in reports}
            left, right = axioms.SUITES[SUITE_NAMES[suite]]
            if not all(held[axiom] for axiom in left + right):
                failure = 'suite %s does not hold for %s' % (SUITE_NAMES[suite], f.label)
        return report, failure

    def handle_approx(self, options):
        if not options['epsilon'] > 0:
            raise CommandError('--epsilon must be positive', returncode=INPUT_ERROR)
        spec = self.payment_free_spec(self.read_spec(options['input']),
                                      options['force_recursive'])
        F = spec_operator(spec)
        cfg = self.sample_config(spec.n)
        G = approximate_payment_free(F, options['epsilon'], cfg, self.tol)
        verification = verify_sandwich(F, G, options['epsilon'], cfg, self.tol)
        report = {
            'representation': PaymentFreeRepSerializer(G).data,
            'verification': SandwichReportSerializer(verification).data,
        }
        failure = None
        if not verification.holds:
            failure = 'sandwich fails at epsilon %g' % options['epsilon']
        return report, failure

    def handle_iterate(self, options):
        spec = self.read_spec(options['input'])
        if options['steps'] < 0:
            raise CommandError('--steps must be nonnegative', returncode=INPUT_ERROR)
        x0 = options['x0'] if options['x0'] is not None else np.zeros(spec.n)
        iterates = value_iteration(spec, x0, options['steps'])
        return {'steps': options['steps'], 'iterates': iterates.tolist()}, None

    def handle_represent(self, options):
        if not options['epsilon'] > 0:
            raise CommandError('--epsilon must be positive', returncode=INPUT_ERROR)
        spec = self.payment_free_spec(self.read_spec(options['input']),
                                      options['force_recursive'])
        F = spec_operator(spec)
        net = epsilon_net(SPHERE, options['epsilon'], spec.n)
        ynet = YNet(net.points)
        rep = build_payment_free_representation(F, ynet, self.tol)
        report = {'epsilon': options['epsilon'], 'net_size': len(net),
                  'net': EpsNetSerializer(net).data,
                  'dropped': list(rep.dropped),
                  'representation': PaymentFreeRepSerializer(rep).data}
        failure = None
        if options['x0'] is not None:
            x0 = np.array(options['x0'])
            value = eval_payment_free_rep(rep, x0)
            direct = F(x0)
            report['evaluation'] = {'x': x0.tolist(), 'value': value.tolist(),
                                    'direct': direct.tolist()}
            # per state, the top-norm minimax over the same net and its optimal pair
            solved = [minimax_solve(F.coordinate(i), ynet, x0) for i in range(spec.n)]
            report['evaluation']['minimax'] = RepresentationResultSerializer(
                solved, many=True).data
            if np.any(value < direct - self.tol.allowance(float(np.abs(direct).max()))):
                failure = 'representation undershoots the operator at x0'
        return report, failure

    def handle_risk(self, options):
        space = None
        if options['space']:
            space = load(RiskSpaceSerializer, self.read(options['space'], JSONParser()))
        rows = self.read(options['input'], ScenarioCSVParser())
        space, positions = load_scenarios(rows, space)
        mu = build_measure(options['measure'], space)
        if options['ynet'] == 'sphere':
            ynet = epsilon_net(SPHERE, options['epsilon'], space.n).points
        else:
            ynet = np.array(list(positions.values()))
        results = []
        failure = None
        for name, X in positions.items():
            direct = mu(X)
            entry = {'position': name, 'X': X.tolist(), 'mu': direct}
            entry['minimax'] = risk_minimax_eval(mu, ynet, X)
            entry['residual'] = entry['minimax'] - direct
            if entry['residual'] < -self.tol.allowance(direct):
                failure = 'minimax representation undershoots %s at %s' % (mu.label, name)
            if mu.positively_homogeneous:
                entry['homogeneous_minimax'] = homogeneous_risk_minimax_eval(
                    mu, ynet, X, tol=self.tol)
                entry['homogeneous_residual'] = entry['homogeneous_minimax'] - direct
                if entry['homogeneous_residual'] < -self.tol.allowance(direct):
                    failure = ('homogeneous minimax representation undershoots %s at %s'
                               % (mu.label, name))
            results.append(entry)
        report = {'measure': options['measure'], 'atoms': list(space.atoms),
                  'weights': space.weights.tolist(), 'ynet': options['ynet'],
                  'results': results}
        return report, failure

    def handle_oracle(self, options):
        if options['kind'] == 'vertices':
            if options['a'] is None:
                raise CommandError('--a is required for --kind vertices', returncode=INPUT_ERROR)
            expected = oracle.vertex_enumeration_simplex_halfspace(options['a'], self.tol)
            fast = halfspace_simplex_extremes(options['a'], self.tol)
            agree = _same_rows(expected, fast, self.tol.abs_tol)
            report = {'a': options['a'], 'vertices': expected.tolist(),
                      'fast_path': fast.tolist(), 'agree': agree}
        else:
            spec = self.read_spec(options['input'])
            x0 = options['x0'] if options['x0'] is not None else np.zeros(spec.n)
            values, choices = oracle.exhaustive_minimax(spec, x0, with_indices=True)
            fast = shapley_eval(spec, x0)
            trace = [(outcome.outer, outcome.inner) for outcome in shapley_trace(spec, x0)]
            agree = bool(np.array_equal(values, fast)) and trace == choices
            report = {'x': list(x0), 'values': values.tolist(),
                      'choices': [list(choice) for choice in choices],
                      'fast_path': fast.tolist(), 'agree': agree}
        return report, None if agree else 'fast path and oracle disagree'


def _same_rows(left, right, tol):
    if left.shape != right.shape:
        return False
    return all(np.any(np.abs(right - row).max(axis=1) <= tol) for row in left)
