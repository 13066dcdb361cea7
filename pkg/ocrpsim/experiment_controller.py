"""
Experiment_controller: a controller to take a setup, run its campaigns
as black boxes and write the results: report.json (one record per
report, with run metadata kept apart so that two runs of the same setup
differ only there), summary.csv (one row per check) and plotdata/*.csv
(the series campaigns return for plotting).
"""
import csv
import datetime
import json
import logging
import os
import subprocess

from .core import InsufficientCountsError
from .experiment_setup import Setup
from .stats import ExperimentReport

logger = logging.getLogger(__name__)

# Leading columns of summary.csv, the rest follow in sorted order.
summary_columns = ['experiment', 'check', 'passed']


def build_id():
    '''
    git describe of the source tree, or the package version outside a
    git checkout.
    '''
    from . import __version__
    try:
        out = subprocess.run(
            ['git', 'describe', '--always', '--dirty'],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True, text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return __version__
    if out.returncode or not out.stdout.strip():
        return __version__
    return out.stdout.strip()


class Controller:

    def __init__(self, setup=None, filename=None, seed=None, output=None):
        """
        setup: a Setup, or the filename of a saved one.
        filename: alias for a setup filename.
        seed: overrides the seed of a setup loaded from file.
        output: overrides the output directory of the setup.
        """
        if filename is not None:
            setup = filename
        if isinstance(setup, str):
            setup = Setup(filename=setup, seed=seed)
        if setup is None:
            raise ValueError('A controller needs a setup')
        self.setup = setup
        self.output = output if output is not None else setup.output
        self.reports = []

    def run(self, names=None):
        """
        Runs the named campaigns (default: all in the setup) and returns
        their reports. A campaign that cannot produce a verdict (no
        absorption within the event budget, an unreliable oracle, too few
        counts for a test) gives a failed report carrying the error.
        """
        names = list(self.setup.experiment_set) if names is None else names
        for name in names:
            if name not in self.setup.experiment_set:
                raise ValueError('{} is not in the setup'.format(name))
            parameters = self.setup.experiment_set[name]
            function = self.setup.experiment_dic[name]['function']
            logger.info('running %s with seed %s on %s workers', name,
                        self.setup.seed, self.setup.workers)
            try:
                reports = function(name, seed=self.setup.seed,
                                   workers=self.setup.workers, **parameters)
            except (InsufficientCountsError, RuntimeError) as error:
                logger.error('%s failed: %s', name, error)
                report = ExperimentReport(name, dict(parameters), False)
                report.notes.append('{}: {}'.format(type(error).__name__,
                                                    error))
                reports = [report]
            for report in reports:
                report.parameters.setdefault('seed', self.setup.seed)
                logger.info('%s: %s', name,
                            'pass' if report.passed else 'fail')
            self.reports += reports
        return self.reports

    @property
    def passed(self):
        return bool(self.reports) and all(r.passed for r in self.reports)

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def metadata(self):
        return {
            'timestamp': datetime.datetime.now(
                datetime.timezone.utc).isoformat(),
            'build': build_id(),
            'config': self.setup.to_config(),
        }

    def write(self, output=None):
        """
        Writes report.json, summary.csv and plotdata/*.csv into output
        (default: the setup's output directory). Returns the directory.
        """
        output = output or self.output
        if not output:
            raise ValueError('No output directory given')
        os.makedirs(output, exist_ok=True)

        data = {'reports': [r.to_dict() for r in self.reports],
                'passed': self.passed,
                'metadata': self.metadata()}
        with open(os.path.join(output, 'report.json'), 'w') as outfile:
            outfile.write(json.dumps(data, sort_keys=True, indent=2))
            outfile.write('\n')

        rows = [row for r in self.reports for row in r.rows()]
        extra = sorted({k for row in rows for k in row} - set(summary_columns))
        with open(os.path.join(output, 'summary.csv'), 'w',
                  newline='') as outfile:
            writer = csv.DictWriter(outfile, summary_columns + extra)
            writer.writeheader()
            writer.writerows(rows)

        for k, report in enumerate(self.reports):
            for key, series in report.series.items():
                if not series:
                    continue
                directory = os.path.join(output, 'plotdata')
                os.makedirs(directory, exist_ok=True)
                filename = os.path.join(directory, '{}_{}_{}.csv'.format(
                    report.experiment, k, key))
                with open(filename, 'w', newline='') as outfile:
                    writer = csv.DictWriter(outfile, list(series[0]))
                    writer.writeheader()
                    writer.writerows(series)

        logger.info('wrote %d reports to %s', len(self.reports), output)
        return output
