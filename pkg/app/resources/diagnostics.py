"""Derivative accuracy and Jacobian spectrum scans along a beta grid"""
import logging

import click
import numpy as np

from app import app
from app.common.ba import ba_iterate, encoder_from_decoder, initial_encoder
from app.common.deriv import ba_jacobian_log_decoder, s_matrix
from app.common.errors import IBError, NearBifurcationError
from app.common.numerics import eigenvalues, sigma_min
from app.common.ode import solve_ib_ode
from app.common.oracles import derivative_oracle_for, oracle_for
from app.common.reduction import reduce_root
from app.common.utils import best_permutation, flatten_log_root
from app.resources.output import output_options, run_manifest, translate_errors, write_table
from app.resources.problems import GRID, resolve_problem

logger = logging.getLogger(__name__)

FD_BETA_STEP = 1e-4


def _reduced_root(prob, beta, oracle, clusters):
    if oracle is not None:
        root = oracle(beta)
    else:
        root = ba_iterate(initial_encoder(prob, clusters), prob, beta).root
    return reduce_root(root).root


def _path_derivative(prob, root, beta):
    """Central difference of the root path in log coordinates, following the root with BA-IB"""
    stop = app.config['BRUTE_FORCE_POLISH_STOP']
    sides = []
    for shifted in (beta + FD_BETA_STEP, beta - FD_BETA_STEP):
        enc, _ = encoder_from_decoder(root, prob, shifted)
        other = ba_iterate(enc, prob, shifted, stop=stop).root
        if other.n_clusters != root.n_clusters:
            return None
        perm = best_permutation(root.decoders, other.decoders)
        sides.append(flatten_log_root(other.decoders[:, perm], other.marginal[perm]))
    return (sides[0] - sides[1]) / (2.0 * FD_BETA_STEP)


def _derivative(prob, root, beta):
    if root.n_clusters == 1:
        return np.zeros(prob.n_y + 1)
    try:
        return solve_ib_ode(root, prob, beta).v
    except NearBifurcationError as err:
        return err.solution.v


@app.cli.command('deriv-check')
@click.option('--problem', required=True, help='bsc:<alpha>, decomposable or a problem JSON file')
@click.option('--betas', type=GRID, required=True, help='beta grid, start:stop:num or a list')
@click.option('--clusters', type=click.IntRange(min=1), default=None, help='Clusters of a BA root (default |X|)')
@output_options
@translate_errors
def deriv_check(problem, betas, clusters, out, as_json, bits):
    """Sup-norm error of the IB ODE's derivative against the exact or a finite-difference derivative"""
    prob = resolve_problem(problem)
    clusters = clusters or prob.n_x
    oracle = oracle_for(prob)
    exact = derivative_oracle_for(prob)
    if exact is None:
        click.echo("note: no exact derivative for {}; comparing against finite differences in beta "
                   "(step {:g})".format(prob.name, FD_BETA_STEP), err=True)

    rows = []
    for beta in betas:
        try:
            root = _reduced_root(prob, beta, oracle, clusters)
            v = _derivative(prob, root, beta)
            if root.n_clusters == 1:
                reference, kind = np.zeros_like(v), 'trivial'
            elif exact is not None and exact(beta).size == v.size:
                reference, kind = exact(beta), 'oracle'
            else:
                reference, kind = _path_derivative(prob, root, beta), 'finite_difference'
            error = float('nan') if reference is None else float(np.max(np.abs(v - reference)))
        except IBError as err:
            logger.warning("deriv-check failed at beta=%g: %s", beta, err)
            error, kind = float('nan'), 'failed'
        rows.append([float(beta), error, kind])

    settings = {'betas': betas, 'clusters': clusters, 'fd_beta_step': FD_BETA_STEP}
    write_table('deriv_check', run_manifest('deriv-check', prob, settings, out),
                ['beta', 'linf_error', 'reference'], rows, out, as_json)


@app.cli.command('eig-scan')
@click.option('--problem', required=True, help='bsc:<alpha>, decomposable or a problem JSON file')
@click.option('--betas', type=GRID, required=True, help='beta grid, start:stop:num or a list')
@click.option('--clusters', type=click.IntRange(min=1), default=2, show_default=True,
              help='Dimension of the representation')
@click.option('--seed', type=int, default=None, help='Base seed; grid point i uses seed + i')
@output_options
@translate_errors
def eig_scan(problem, betas, clusters, seed, out, as_json, bits):
    """Eigenvalues of the BA-IB Jacobian and sigma_min(I - S) at BA-IB roots on a fixed number of clusters"""
    prob = resolve_problem(problem)
    seed = app.config['BA_SEED'] if seed is None else seed
    stop = app.config['EIG_SCAN_BA_STOP']
    order = clusters * (prob.n_y + 1)

    rows = []
    for index, beta in enumerate(betas):
        try:
            root = ba_iterate(initial_encoder(prob, clusters, 'random', seed + index), prob, beta, stop=stop).root
            values = eigenvalues(ba_jacobian_log_decoder(root, prob, beta).matrix)
            s = s_matrix(root, prob, beta)
            metric = sigma_min(np.eye(s.shape[0]) - s)
            gap = float(np.min(np.abs(1.0 - values)))
        except IBError as err:
            logger.warning("eig-scan failed at beta=%g: %s", beta, err)
            values = np.full(order, np.nan, dtype=complex)
            metric, gap = float('nan'), float('nan')
        cells = [part for value in values for part in (float(value.real), float(value.imag))]
        rows.append([float(beta), metric, gap] + cells)

    header = ['beta', 'sigma_min', 'min_abs_one_minus_eig']
    header += [name.format(i) for i in range(order) for name in ('eig_{}_re', 'eig_{}_im')]
    settings = {'betas': betas, 'clusters': clusters, 'seed': seed, 'ba_stop': stop}
    write_table('eig_scan', run_manifest('eig-scan', prob, settings, out), header, rows, out, as_json)
