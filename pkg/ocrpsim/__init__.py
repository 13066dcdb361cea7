__version__ = '0.1'

from .jccp import Builder
from .experiment_controller import Controller
from .experiment_setup import Setup
