import click

from app import app
from app.common.ba import ba_iterate, initial_encoder
from app.common.probability import mutual_informations
from app.common.reduction import effective_cardinality
from app.common.utils import setting
from app.resources.output import (info_cells, info_columns, output_options, root_cells, root_columns,
                                  run_manifest, translate_errors, write_table)
from app.resources.problems import resolve_problem


@app.cli.command('ba-solve')
@click.option('--problem', required=True, help='bsc:<alpha>, decomposable or a problem JSON file')
@click.option('--beta', type=click.FloatRange(min=0, min_open=True), required=True)
@click.option('--clusters', type=click.IntRange(min=1), default=2, show_default=True)
@click.option('--init', type=click.Choice(['uniform', 'random']), default='uniform', show_default=True)
@click.option('--seed', type=int, default=None, help='Seed for --init random')
@click.option('--stop', type=click.FloatRange(min=0, min_open=True), default=None)
@click.option('--max-iter', type=click.IntRange(min=1), default=None)
@output_options
@translate_errors
def ba_solve(problem, beta, clusters, init, seed, stop, max_iter, out, as_json, bits):
    """Run BA-IB to convergence at a single beta"""
    prob = resolve_problem(problem)
    stop = setting(stop, 'BA_STOP')
    max_iter = setting(max_iter, 'BA_MAX_ITER')
    result = ba_iterate(initial_encoder(prob, clusters, init, seed), prob, beta, stop, max_iter)
    info = mutual_informations(result.encoder, prob)

    header = (['beta'] + info_columns(bits)
              + ['iterations', 'converged', 'final_change', 'effective_cardinality']
              + root_columns(clusters, prob.n_y))
    row = ([beta] + info_cells(info, bits)
           + [result.iterations, result.converged, result.final_change, effective_cardinality(result.root)]
           + root_cells(result.root, clusters))
    settings = {'beta': beta, 'clusters': clusters, 'init': init, 'seed': seed, 'stop': stop,
                'max_iter': max_iter, 'bits': bits}
    write_table('ba_solve', run_manifest('ba-solve', prob, settings, out), header, [row], out, as_json)
