"""Exact solvers for recoverable robust representatives multi-selection under budgeted uncertainty."""

from .adversary import adv_brute, adv_k0, adv_solve, adversary_value, cut_value
from .core import Instance, InstanceError, ParseError, Scenario, load_instance, read_instance, \
    save_instance, validate, write_instance
from .generators import GeneratorSpec, builtin, gen_random, gen_reduction
from .incremental import inc_brute, inc_solve
from .solvers import rec_brute, solve_m1, solve_m2
from .special_case import adv_closed_form, solve_special

__version__ = "0.1.0"
