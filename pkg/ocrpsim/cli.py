"""
cli: the ocrpsim command line.

    ocrpsim run --experiment skewer-equivalence --seed 1 --output out
    ocrpsim run --config campaign.json --workers 8
    ocrpsim dump skewer --alpha 0.5 --start 1,2 --level-max 1 --seed 3
    ocrpsim dump jccp --alpha 0.5 --n0 3 --seed 3
    ocrpsim list-experiments

run exits with 0 when every report passes, 1 when one fails and 2 on
invalid parameters. dump writes JSON lines to stdout (or --out).
"""
import argparse
import json
import logging
import sys

from .core import (RandomSource, parse_composition, trajectory_records,
                   write_records)
from .default_setup import (quick_setup, get_experiment_dic,
                            resolve_experiments)
from .experiment_controller import Controller
from .experiment_templates import ExperimentData
from .jccp import build_forward
from .ocrp import OcrpParams, ocrp_trajectory_sample
from .skewer import skewer_trajectory_sample

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT = 'ocrpsim-results'


def parse_grid(text):
    '''
    '0.3,0.5' -> [0.3, 0.5].
    '''
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('not a list of numbers: {}'.format(
            text))


def parse_value(text):
    '''
    A --set value: JSON if it parses, a list of numbers for '1,2', else
    the string itself.
    '''
    try:
        return json.loads(text)
    except ValueError:
        pass
    if ',' in text:
        try:
            return parse_grid(text)
        except argparse.ArgumentTypeError:
            pass
    return text


def parse_assignment(text):
    key, sep, value = text.partition('=')
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(
            'expected KEY=VALUE, got {}'.format(text))
    return key.strip().replace('-', '_'), parse_value(value.strip())


# Parameter flags of run: (flag, type).
parameter_flags = [
    ('alpha', float), ('theta', float), ('start', str), ('samples', int),
    ('levels', parse_grid), ('alpha-grid', parse_grid),
    ('lambda-grid', parse_grid), ('theta-grid', parse_grid),
    ('n', int), ('mass-cap', int), ('gamma', float), ('depth', int),
    ('step', float), ('repeats', int), ('t', float), ('z', float),
    ('a', float),
]


def make_parser():
    parser = argparse.ArgumentParser(
        prog='ocrpsim',
        description='Simulation and verification of up-down ordered '
                    'Chinese Restaurant Processes.')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='log at DEBUG level')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='run verification campaigns')
    run.add_argument('--config', help='flat JSON configuration file')
    run.add_argument('--experiment', '-e', action='append',
                     help='experiment name or alias (repeatable, or comma '
                          'separated, or "all")')
    run.add_argument('--seed', type=int)
    run.add_argument('--workers', type=int,
                     help='worker processes (default: $OCRPSIM_WORKERS '
                          'or 1)')
    run.add_argument('--output', '-o', help='output directory')
    for flag, kind in parameter_flags:
        run.add_argument('--' + flag, type=kind, default=None)
    run.add_argument('--set', action='append', type=parse_assignment,
                     default=[], metavar='KEY=VALUE',
                     help='any other campaign parameter')

    dump = commands.add_parser('dump', help='write one sample path as '
                                            'JSON lines')
    dump.add_argument('kind', choices=['jccp', 'skewer', 'ocrp'])
    dump.add_argument('--alpha', type=float, default=0.5)
    dump.add_argument('--theta', type=float, default=0.)
    dump.add_argument('--start', default='1',
                      help='composition, e.g. 1,2 (jccp uses the first '
                           'part as the initial table size)')
    dump.add_argument('--n0', type=int, default=None,
                      help='initial table size, same as --start N')
    dump.add_argument('--level-max', type=float, default=None)
    dump.add_argument('--seed', type=int, default=0)
    dump.add_argument('--out', help='output file (default: stdout)')

    commands.add_parser('list-experiments',
                        help='list the campaigns and their aliases')
    return parser


def _grid_fallback(experiments, config):
    '''
    --alpha 0.5 means alpha_grid [0.5] for campaigns that scan a grid
    (same for theta), unless a selected campaign takes the scalar.
    '''
    parameters = [get_experiment_dic()[name]['parameters']
                  for name in resolve_experiments(experiments)]
    for key in ('alpha', 'theta'):
        grid = key + '_grid'
        if key not in config or grid in config:
            continue
        if not any(key in p for p in parameters) and \
                any(grid in p for p in parameters):
            config[grid] = [config.pop(key)]


def run_command(args):
    config = {}
    if args.config:
        with open(args.config, 'r') as infile:
            config = json.load(infile)
        if not isinstance(config, dict):
            raise ValueError('{} is not a JSON object'.format(args.config))

    experiments = config.pop('experiment', None)
    if args.experiment:
        experiments = ','.join(args.experiment)
    if not experiments:
        raise ValueError('no experiment given (use --experiment or a '
                         'config file)')
    seed = args.seed if args.seed is not None else config.pop('seed', None)
    config.pop('seed', None)
    workers = args.workers if args.workers is not None \
        else config.pop('workers', None)
    config.pop('workers', None)
    output = args.output or config.pop('output', None) or DEFAULT_OUTPUT
    config.pop('output', None)

    for flag, _ in parameter_flags:
        value = getattr(args, flag.replace('-', '_'))
        if value is not None:
            config[flag.replace('-', '_')] = value
    config.update(dict(args.set))
    _grid_fallback(experiments, config)

    setup = quick_setup(experiments, seed=seed, workers=workers,
                        output=output, **config)
    controller = Controller(setup)
    controller.run()
    controller.write()
    for report in controller.reports:
        print('{:<28} {}'.format(report.experiment,
                                 'PASS' if report.passed else 'FAIL'))
    return controller.exit_code


def dump_records(kind, alpha, theta, start, level_max, seed):
    '''
    The JSON-lines records of one sample path of the given kind.
    '''
    params = OcrpParams(alpha, theta)
    start = parse_composition(start)
    rng = RandomSource(seed).generator
    if kind == 'jccp':
        if not start:
            raise ValueError('jccp needs a positive initial size')
        return build_forward(start[0], params, rng, level_max).marked \
            .to_records()
    if level_max is None:
        raise ValueError('{} needs --level-max'.format(kind))
    if kind == 'skewer':
        trajectory = skewer_trajectory_sample(rng, start, params, level_max)
    else:
        trajectory = ocrp_trajectory_sample(rng, start, params, level_max)
    return list(trajectory_records(trajectory))


def dump_command(args):
    start = str(args.n0) if args.n0 is not None else args.start
    records = dump_records(args.kind, args.alpha, args.theta, start,
                           args.level_max, args.seed)
    if args.out:
        with open(args.out, 'w') as outfile:
            write_records(records, outfile)
    else:
        write_records(records, sys.stdout)
    return 0


def list_command(args):
    aliases = {}
    for alias, template in get_experiment_dic().items():
        if alias != template['name']:
            aliases.setdefault(template['name'], []).append(alias)
    for name, template in ExperimentData().available_experiment_dic.items():
        print('{:<26} {:<14} {}'.format(name, ','.join(aliases.get(name, [])),
                                        template['description']))
    return 0


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    commands = {'run': run_command, 'dump': dump_command,
                'list-experiments': list_command}
    try:
        return commands[args.command](args)
    except ValueError as error:
        logger.debug('invalid input', exc_info=True)
        print('error: {}'.format(error), file=sys.stderr)
        return 2
    except RuntimeError as error:
        # Only dump gets here; run turns these into failed reports.
        logger.error('%s', error)
        return 1


if __name__ == '__main__':
    sys.exit(main())
