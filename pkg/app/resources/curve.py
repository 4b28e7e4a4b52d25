import click
import numpy as np

from app import app
from app.common.ba import ba_iterate, info_point, initial_encoder
from app.common.errors import NearBifurcationError
from app.common.ode import solve_ib_ode
from app.common.oracles import bsc_alpha, mrs_gerber_curve, oracle_for
from app.common.probability import InfoPoint, mutual_informations
from app.common.tracker import TrackerConfig, ibrt1, interpolate_offgrid
from app.resources.output import (info_cells, info_columns, output_options, run_manifest, translate_errors,
                                  write_table)
from app.resources.problems import GRID, STEP, resolve_problem
from app.resources.track import initial_root


def _oracle_points(prob, betas):
    oracle = oracle_for(prob)
    if oracle is None:
        raise click.BadParameter("no exact solution is known for {}".format(prob.name), param_hint='--method')
    return [info_point(oracle(beta), prob, beta) for beta in betas]


def _anneal_points(prob, betas, clusters):
    """BA-IB to convergence at each beta, from the largest beta down, warm-started from the previous encoder"""
    order = np.argsort(-betas, kind='stable')
    encoder = initial_encoder(prob, clusters)
    points = [None] * len(betas)
    for index in order:
        result = ba_iterate(encoder, prob, betas[index])
        encoder = result.encoder
        points[index] = mutual_informations(encoder, prob)
    return points


def _track_points(prob, betas, clusters, cfg):
    """Tracks from the largest beta and evaluates each requested beta by a single Euler
    step from the nearest grid record above it"""
    beta0 = float(np.max(betas))
    records = ibrt1(prob, beta0, initial_root(prob, beta0, 'auto', clusters, cfg), cfg)
    grid = np.array([record.beta for record in records])
    points = []
    for beta in betas:
        record = records[int(np.flatnonzero(grid >= beta - 1e-12)[-1])]
        if record.root.n_clusters == 1 or abs(record.beta - beta) <= 1e-12:
            points.append(info_point(record.root, prob, beta))
            continue
        try:
            solution = solve_ib_ode(record.root, prob, record.beta)
        except NearBifurcationError as err:
            solution = err.solution
        points.append(info_point(interpolate_offgrid(record, solution, beta, cfg.delta_beta), prob, beta))
    return points


@app.cli.command('curve')
@click.option('--problem', required=True, help='bsc:<alpha>, decomposable or a problem JSON file')
@click.option('--method', type=click.Choice(['track', 'ba_anneal', 'oracle']), default='track', show_default=True)
@click.option('--betas', type=GRID, default=None, help='beta grid, start:stop:num or a list')
@click.option('--i-x-grid', type=GRID, default=None, help='I_X grid in nats (oracle method only)')
@click.option('--delta-beta', type=STEP, default=None, help='Tracking step size')
@click.option('--clusters', type=click.IntRange(min=1), default=None, help='Clusters of a BA start (default |X|)')
@output_options
@translate_errors
def curve(problem, method, betas, i_x_grid, delta_beta, clusters, out, as_json, bits):
    """Points of the IB curve on a beta grid, or the exact curve on an I_X grid"""
    if (betas is None) == (i_x_grid is None):
        raise click.UsageError("give exactly one of --betas and --i-x-grid")
    if betas is not None and np.any(betas <= 0):
        raise click.BadParameter("beta values must be positive", param_hint='--betas')
    if delta_beta is not None and delta_beta >= 0:
        raise click.BadParameter("the step size must be negative", param_hint='--delta-beta')
    prob = resolve_problem(problem)
    clusters = clusters or prob.n_x

    if i_x_grid is not None:
        alpha = bsc_alpha(prob)
        if method != 'oracle' or alpha is None:
            raise click.UsageError("--i-x-grid needs --method oracle on a bsc:<alpha> problem")
        points = [InfoPoint(i_x=float(i_x), i_y=mrs_gerber_curve(alpha, i_x)) for i_x in i_x_grid]
        rows = [[float('nan')] + info_cells(point, bits) for point in points]
    else:
        if method == 'oracle':
            points = _oracle_points(prob, betas)
        elif method == 'ba_anneal':
            points = _anneal_points(prob, betas, clusters)
        else:
            cfg = TrackerConfig.from_config(app.config, delta_beta=delta_beta)
            points = _track_points(prob, betas, clusters, cfg)
        rows = [[beta] + info_cells(point, bits) for beta, point in zip(betas, points)]

    settings = {'method': method, 'betas': betas, 'i_x_grid': i_x_grid, 'clusters': clusters,
                'delta_beta': delta_beta if delta_beta is not None else app.config['TRACK_DELTA_BETA'],
                'bits': bits}
    write_table('curve', run_manifest('curve', prob, settings, out), ['beta'] + info_columns(bits), rows,
                out, as_json)
