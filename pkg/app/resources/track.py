import click

from app import app
from app.common.ba import ba_iterate, initial_encoder
from app.common.oracles import oracle_for
from app.common.reduction import reduce_root
from app.common.tracker import TrackerConfig, ibrt1
from app.resources.output import (info_cells, info_columns, output_options, root_cells, root_columns,
                                  run_manifest, translate_errors, write_table)
from app.resources.problems import STEP, resolve_problem


def initial_root(prob, beta0, init, clusters, cfg):
    """Reduced starting root at beta0, from the exact solution or from BA-IB"""
    oracle = oracle_for(prob)
    if init == 'oracle' and oracle is None:
        raise click.BadParameter("no exact solution is known for {}".format(prob.name), param_hint='--init')
    if init == 'oracle' or (init == 'auto' and oracle is not None):
        root = oracle(beta0)
    else:
        result = ba_iterate(initial_encoder(prob, clusters or prob.n_x), prob, beta0,
                            cfg.ba_stop, cfg.ba_max_iter)
        root = result.root
    return reduce_root(root, cfg.delta1, cfg.delta2).root


@app.cli.command('track')
@click.option('--problem', required=True, help='bsc:<alpha>, decomposable or a problem JSON file')
@click.option('--beta0', type=click.FloatRange(min=0, min_open=True), required=True)
@click.option('--delta-beta', type=STEP, default=None, help='Negative step size, e.g. -103/3200')
@click.option('--delta1', type=float, default=None, help='Mass threshold of root reduction')
@click.option('--delta2', type=float, default=None, help='Merge threshold of root reduction')
@click.option('--delta3', type=float, default=None, help='Singularity threshold on sigma_min(I - S)')
@click.option('--settle-threshold', type=click.FloatRange(min=0), default=None,
              help='Converge BA-IB at every step while sigma_min(I - S) is below this')
@click.option('--corrector-steps', type=click.IntRange(min=0), default=None)
@click.option('--init', type=click.Choice(['auto', 'ba', 'oracle']), default='auto', show_default=True)
@click.option('--clusters', type=click.IntRange(min=1), default=None, help='Clusters of a BA start (default |X|)')
@click.option('--no-singularity-check', is_flag=True, help='Never merge clusters on a nearly singular ODE')
@output_options
@translate_errors
def track(problem, beta0, delta_beta, delta1, delta2, delta3, settle_threshold, corrector_steps, init, clusters,
          no_singularity_check, out, as_json, bits):
    """Track the optimal root from beta0 down to beta = 0"""
    if delta_beta is not None and delta_beta >= 0:
        raise click.BadParameter("the step size must be negative", param_hint='--delta-beta')
    prob = resolve_problem(problem)
    cfg = TrackerConfig.from_config(app.config, delta_beta=delta_beta, delta1=delta1, delta2=delta2,
                                    delta3=delta3, settle_threshold=settle_threshold,
                                    corrector_steps=corrector_steps,
                                    singularity_check=False if no_singularity_check else None)
    root0 = initial_root(prob, beta0, init, clusters, cfg)
    records = ibrt1(prob, beta0, root0, cfg)

    width = root0.n_clusters
    header = (['beta'] + info_columns(bits)
              + ['cluster_count', 'event', 'singular_metric', 'ode_condition']
              + root_columns(width, prob.n_y))
    rows = [[record.beta] + info_cells(record.info, bits)
            + [record.root.n_clusters, record.event, record.singular_metric, record.ode_condition]
            + root_cells(record.root, width)
            for record in records]
    settings = {'beta0': beta0, 'delta_beta': cfg.delta_beta, 'delta1': cfg.delta1, 'delta2': cfg.delta2,
                'delta3': cfg.delta3, 'settle_threshold': cfg.settle_threshold, 'ba_stop': cfg.ba_stop, 'ba_max_iter': cfg.ba_max_iter,
                'corrector_steps': cfg.corrector_steps, 'singularity_check': cfg.singularity_check,
                'init': init, 'clusters': clusters, 'bits': bits}
    write_table('track', run_manifest('track', prob, settings, out), header, rows, out, as_json)
