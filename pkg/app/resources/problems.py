"""Command-line parameter types: problems, beta grids and step sizes"""
import os
from fractions import Fraction

import click
import numpy as np

from app.common.errors import RangeError
from app.common.oracles import BSC_PREFIX, DECOMPOSABLE, bsc_problem, decomposable_problem
from app.common.probability import load_problem


def resolve_problem(source):
    """bsc:<alpha>, decomposable, a path to a problem JSON file or inline JSON"""
    if source.startswith(BSC_PREFIX):
        try:
            return bsc_problem(float(source[len(BSC_PREFIX):]))
        except (ValueError, RangeError) as err:
            raise click.BadParameter("bad BSC crossover in {!r}: {}".format(source, err), param_hint='--problem')
    if source == DECOMPOSABLE:
        return decomposable_problem()
    if not os.path.exists(source) and not source.lstrip().startswith('{'):
        raise click.BadParameter("no builtin problem or file named {!r}".format(source), param_hint='--problem')
    return load_problem(source)


class GridType(click.ParamType):
    """Either start:stop:num (inclusive) or a comma separated list of values"""
    name = 'grid'

    def convert(self, value, param, ctx):
        if isinstance(value, np.ndarray):
            return value
        text = value.strip()
        try:
            if ':' in text:
                start, stop, num = text.split(':')
                grid = np.linspace(float(start), float(stop), int(num))
            else:
                grid = np.array([float(item) for item in text.split(',') if item.strip()])
        except ValueError:
            self.fail("{!r} is neither start:stop:num nor a list of numbers".format(value), param, ctx)
        if grid.size == 0:
            self.fail("the grid is empty", param, ctx)
        return grid


class StepType(click.ParamType):
    """A real number, also written as a fraction such as -103/32"""
    name = 'step'

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        try:
            return float(Fraction(str(value).strip()))
        except (ValueError, ZeroDivisionError):
            self.fail("{!r} is not a number or fraction".format(value), param, ctx)


GRID = GridType()
STEP = StepType()
