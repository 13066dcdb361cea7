"""
Setup: a class to make and store setup files.
Setup files contain everything the experiment controller needs to run a
set of campaigns: the experiment names, the seed, the number of worker
processes, the output directory and the parameter values.

On disk a setup is one flat JSON document,
    {"experiment": [...], "seed": 1, "workers": 4, "output": "out",
     "alpha": 0.5, ...}
where every key other than the first four is a parameter, applied to
each listed experiment that takes it.
"""
import json

from .experiment_templates import ExperimentData
from .setup_functions import make_experiment_set, validate_parameters


class Setup:

    def __init__(
            self, filename=None,
            seed=None, workers=1, output=None,
            experiment_dic=None, experiment_set=None):

        if filename is not None:
            self.load(filename, seed)
        else:
            self.seed = seed
            self.workers = workers
            self.output = output
            self.experiment_dic = experiment_dic or {}
            self.experiment_set = experiment_set or {}
        self.validate()

    @classmethod
    def from_config(cls, config, seed=None):
        '''
        A setup from a flat configuration dictionary.
        '''
        config = dict(config)
        names = config.pop('experiment', None)
        if not names:
            raise ValueError('A setup needs at least one experiment')
        if isinstance(names, str):
            names = [n.strip() for n in names.split(',') if n.strip()]
        file_seed = config.pop('seed', None)
        seed = seed if seed is not None else file_seed
        if seed is None:
            raise ValueError('''
                We require a non-null seed for a setup
                loaded from a configuration.''')
        workers = config.pop('workers', 1)
        output = config.pop('output', None)

        ed = ExperimentData()
        unknown = [n for n in names if n not in ed.available_experiment_dic]
        if unknown:
            raise ValueError('Unknown experiments {}'.format(unknown))
        experiment_dic = {n: ed.available_experiment_dic[n] for n in names}
        return cls(seed=int(seed), workers=workers, output=output,
                   experiment_dic=experiment_dic,
                   experiment_set=make_experiment_set(
                       names, experiment_dic, **config))

    def load(self, filename, seed=None):
        with open(filename, 'r') as infile:
            config = json.load(infile)
        setup = Setup.from_config(config, seed)
        self.seed = setup.seed
        self.workers = setup.workers
        self.output = setup.output
        self.experiment_dic = setup.experiment_dic
        self.experiment_set = setup.experiment_set

    def validate(self):
        if self.workers is not None and int(self.workers) < 1:
            raise ValueError('workers must be at least 1, got {}'.format(
                self.workers))
        for name, parameters in self.experiment_set.items():
            if name not in self.experiment_dic:
                raise ValueError('No template for experiment {}'.format(name))
            validate_parameters(name, parameters)

    def to_config(self):
        """
        The flat configuration of this setup: the run keys and every
        parameter that differs from its default. Experiments taking such
        a parameter must agree on it, as the flat format keeps one value
        per key.
        """
        config = {'experiment': list(self.experiment_set),
                  'seed': self.seed, 'workers': self.workers,
                  'output': self.output}
        changed = {key for name, parameters in self.experiment_set.items()
                   for key, value in parameters.items()
                   if value != self.experiment_dic[name]['parameters'].get(
                       key)}
        for key in sorted(changed):
            values = [parameters[key]
                      for parameters in self.experiment_set.values()
                      if key in parameters]
            if any(value != values[0] for value in values):
                raise ValueError('experiments disagree on {}: {}'.format(
                    key, values))
            config[key] = values[0]
        return config

    def save(self, filename):
        with open(filename, 'w') as outfile:
            json.dump(self.to_config(), outfile, sort_keys=True, indent=2)
