import click

from app import app
from app.common.oracles import bsc_alpha, bsc_critical_beta
from app.common.tracker import order_study
from app.resources.output import output_options, run_manifest, translate_errors, write_table
from app.resources.problems import STEP, resolve_problem


@app.cli.command('order-study')
@click.option('--problem', default='bsc:0.3', show_default=True, help='A bsc:<alpha> problem')
@click.option('--beta0', type=click.FloatRange(min=0, min_open=True), default=32.0, show_default=True)
@click.option('--beta-end', type=float, default=None, help='Lower end of the error window (default beta_c + 0.1)')
@click.option('--step', type=STEP, default='-103/32', show_default=True, help='Largest step size')
@click.option('--halvings', type=click.IntRange(min=1), default=8, show_default=True,
              help='Number of step sizes, each half the previous')
@click.option('--corrector-steps', type=click.IntRange(min=0), multiple=True, default=(0, 1), show_default=True)
@click.option('--anneal-steps', type=click.IntRange(min=1), multiple=True, default=(1,), show_default=True)
@click.option('--max-workers', type=click.IntRange(min=1), default=None,
              help='Worker processes (default IBRT_MAX_WORKERS or all cores)')
@click.option('--fit-points', type=click.IntRange(min=2), default=None,
              help='Fit slopes on this many smallest steps (default all)')
@output_options
@translate_errors
def order_study_command(problem, beta0, beta_end, step, halvings, corrector_steps, anneal_steps, max_workers,
                        fit_points, out, as_json, bits):
    """Error by step size of Euler tracking and of reverse annealing on a BSC"""
    if step >= 0:
        raise click.BadParameter("the step size must be negative", param_hint='--step')
    prob = resolve_problem(problem)
    alpha = bsc_alpha(prob)
    if alpha is None:
        raise click.BadParameter("order studies need a bsc:<alpha> problem", param_hint='--problem')
    beta_end = bsc_critical_beta(alpha) + 0.1 if beta_end is None else beta_end
    if not beta_end < beta0:
        raise click.BadParameter("must lie below --beta0", param_hint='--beta-end')
    steps = [step / 2 ** k for k in range(halvings)]

    study = order_study(alpha, beta0, beta_end, steps, tuple(corrector_steps), tuple(anneal_steps),
                        max_workers=max_workers, fit_points=fit_points)
    rows = [[row.step, row.method, row.sup_error, study.slopes[row.method]] for row in study.rows]
    settings = {'beta0': beta0, 'beta_end': beta_end, 'steps': steps, 'corrector_steps': list(corrector_steps),
                'anneal_steps': list(anneal_steps), 'max_workers': max_workers, 'fit_points': fit_points}
    write_table('order_study', run_manifest('order-study', prob, settings, out),
                ['step', 'method', 'sup_error', 'fitted_slope'], rows, out, as_json)
