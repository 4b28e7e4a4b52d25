"""First-order root tracking for the IB.

Starting from an optimal root at beta0, the tracker walks a fixed grid of
decreasing beta values. Each step solves the IB ODE, takes an Euler step in
log-decoder coordinates and applies a few BA-IB iterations as a corrector.
Clusters that lose their mass or collide are removed by root reduction, and
a nearly singular ODE triggers the singularity heuristic, which merges the
two fastest moving clusters. While sigma_min(I - S) is below settle_threshold
the corrector runs BA-IB to convergence instead, so that the root does not
drift past a bifurcation undetected."""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from app.common.ba import ba_iterate, ba_step_decoder, encoder_from_decoder, info_point
from app.common.errors import CannotReduceError, InputError, RangeError, StepTooLargeError
from app.common.ode import solve_ib_ode
from app.common.oracles import bsc_exact_root, bsc_problem
from app.common.probability import DecoderRoot, InfoPoint
from app.common.reduction import reduce_root
from app.common.utils import aligned_distance, setting

logger = logging.getLogger(__name__)

EVENT_NONE = 'none'
EVENT_REDUCED = 'reduced'
EVENT_SINGULARITY = 'singularity_handled'
EVENT_TRIVIAL = 'converged_trivial'


@dataclass(frozen=True)
class TrackerConfig:
    delta_beta: float
    delta1: float = 1e-2
    delta2: float = 1e-2
    delta3: float = 1e-2
    ba_stop: float = 1e-8
    ba_max_iter: int = 100000
    corrector_steps: int = 1
    singularity_check: bool = True
    settle_threshold: float = 1e-1

    def __post_init__(self):
        if not self.delta_beta < 0:
            raise InputError("The step size must be negative, got {!r}".format(self.delta_beta))
        for name in ('delta1', 'delta2', 'delta3'):
            if not 0 < getattr(self, name) < 1:
                raise InputError("{} must lie in (0, 1), got {!r}".format(name, getattr(self, name)))
        if self.corrector_steps < 0:
            raise InputError("corrector_steps must be non-negative")
        if self.settle_threshold < 0:
            raise InputError("settle_threshold must be non-negative")

    @classmethod
    def from_config(cls, config, **overrides):
        """Tracker settings from an app config, with keyword overrides (None means keep the config value)"""
        values = dict(delta_beta=config['TRACK_DELTA_BETA'],
                      delta1=config['REDUCTION_DELTA1'],
                      delta2=config['REDUCTION_DELTA2'],
                      delta3=config['SINGULARITY_DELTA3'],
                      ba_stop=config['BA_STOP'],
                      ba_max_iter=config['BA_MAX_ITER'],
                      corrector_steps=config['CORRECTOR_STEPS'],
                      singularity_check=config['SINGULARITY_CHECK'],
                      settle_threshold=config['SINGULARITY_SETTLE'])
        values.update((key, value) for key, value in overrides.items() if value is not None)
        return cls(**values)


@dataclass(frozen=True)
class TrackRecord:
    beta: float
    root: DecoderRoot
    info: InfoPoint
    event: str = EVENT_NONE
    ode_condition: float = float('nan')
    singular_metric: float = float('nan')
    ba_converged: bool = True


def beta_grid(beta0, delta_beta):
    """beta0 + n delta_beta for n = 0..N, where N is the first index with beta_N <= |delta_beta|"""
    if not delta_beta < 0:
        raise InputError("The step size must be negative, got {!r}".format(delta_beta))
    step = abs(delta_beta)
    last = max(int(np.ceil(beta0 / step - 1.0 - 1e-9)), 0)
    return beta0 + delta_beta * np.arange(last + 1)


def euler_step(root, v, delta_beta):
    """Advances log p(y|x-hat) and log p(x-hat) by delta_beta * v, then renormalizes"""
    if delta_beta == 0:
        return root
    if not np.all(np.isfinite(v.v)):
        raise StepTooLargeError("ODE solution is not finite")
    with np.errstate(over='ignore', divide='ignore'):
        decoders = np.exp(np.log(root.decoders) + delta_beta * v.decoder_derivatives)
        marginal = np.exp(np.log(root.marginal) + delta_beta * v.marginal_derivatives)
    if not (np.all(np.isfinite(decoders)) and np.all(np.isfinite(marginal))) \
            or np.any(decoders.sum(axis=0) <= 0) or marginal.sum() <= 0:
        raise StepTooLargeError("Euler step of {} overflowed; use a smaller step".format(delta_beta))
    return DecoderRoot.normalized(decoders, marginal, root.beta + delta_beta)


def interpolate_offgrid(record, v, beta_target, delta_beta):
    """A single Euler extrapolation from a grid record to a beta within one step of it"""
    if abs(beta_target - record.beta) > abs(delta_beta) * (1.0 + 1e-12):
        raise RangeError("beta={} is more than one step away from the record at beta={}".format(
            beta_target, record.beta))
    return euler_step(record.root, v, beta_target - record.beta)


def _settle(prob, root, beta, cfg):
    """Regenerates the encoder at beta and runs BA-IB to convergence"""
    enc, _ = encoder_from_decoder(root, prob, beta)
    return ba_iterate(enc, prob, beta, stop=cfg.ba_stop, max_iter=cfg.ba_max_iter)


def _merge_fastest(root, v):
    speeds = np.max(np.abs(v.decoder_derivatives), axis=0)
    first, second = sorted(int(i) for i in np.argsort(-speeds, kind='stable')[:2])
    decoders = np.array(root.decoders)
    marginal = np.array(root.marginal)
    decoders[:, first] = 0.5 * (decoders[:, first] + decoders[:, second])
    marginal[first] += marginal[second]
    return DecoderRoot.normalized(np.delete(decoders, second, axis=1), np.delete(marginal, second), root.beta)


def handle_singularity(prob, root, v, beta_next, cfg):
    """Replaces the two clusters whose log-decoders move fastest by their mean, then
    regenerates the encoder and converges BA-IB at beta_next"""
    if root.n_clusters < 2:
        raise CannotReduceError("A root on a single cluster cannot be reduced further")
    return _settle(prob, _merge_fastest(root, v), beta_next, cfg).root


def _record(prob, root, beta, event=EVENT_NONE, converged=True):
    root = root if root.beta == beta else replace(root, beta=float(beta))
    return TrackRecord(beta=float(beta), root=root, info=info_point(root, prob, beta), event=event,
                       ba_converged=converged)


def ibrt1(prob, beta0, root0, cfg):
    """Tracks an optimal root from beta0 down the grid beta0 + n delta_beta.
    Returns one TrackRecord per grid point. A record's ODE diagnostics are those
    of the solve made at its own beta."""
    if not prob.strictly_positive:
        logger.warning("Problem %s is not strictly positive; log-decoder derivatives may not exist",
                       prob.name)
    grid = beta_grid(beta0, cfg.delta_beta)
    root = root0
    records = [_record(prob, root, grid[0])]

    n = 0
    while n + 1 < len(grid) and root.n_clusters > 1:
        beta, beta_next = grid[n], grid[n + 1]
        solution = solve_ib_ode(root, prob, beta)
        records[-1] = replace(records[-1], ode_condition=solution.condition,
                              singular_metric=solution.singular_metric)

        event, converged = EVENT_NONE, True
        if cfg.singularity_check and solution.singular_metric < cfg.delta3:
            result = _settle(prob, _merge_fastest(root, solution), beta_next, cfg)
            root, converged, event = result.root, result.converged, EVENT_SINGULARITY
            logger.info("Singularity at beta=%g (sigma_min %.3e); continuing on %d clusters",
                        beta, solution.singular_metric, root.n_clusters)
        else:
            report = reduce_root(euler_step(root, solution, beta_next - beta), cfg.delta1, cfg.delta2)
            root = report.root
            if not report.changed and solution.singular_metric < cfg.settle_threshold:
                # close to a bifurcation a single corrector step lags behind the root
                result = _settle(prob, root, beta_next, cfg)
                converged = result.converged
                report = reduce_root(result.root, cfg.delta1, cfg.delta2)
                root = report.root
                logger.debug("Settled at beta=%g (sigma_min %.3e)", beta_next, solution.singular_metric)
            if report.changed:
                result = _settle(prob, root, beta_next, cfg)
                root, converged, event = result.root, result.converged, EVENT_REDUCED
                logger.info("Root reduced to %d clusters at beta=%g", root.n_clusters, beta_next)

        for _ in range(cfg.corrector_steps):
            root = ba_step_decoder(root, prob, beta_next)
        n += 1
        records.append(_record(prob, root, beta_next, event, converged))

    if n + 1 < len(grid):
        logger.info("Trivial root reached at beta=%g", grid[n])
    while n + 1 < len(grid):
        n += 1
        records.append(_record(prob, DecoderRoot.trivial(prob, grid[n]), grid[n], EVENT_TRIVIAL))
    return records


#######################
# Baselines
#######################

def _fixed_grid(beta0, delta_beta, beta_end):
    """Grid points above beta_end, closed by beta_end itself"""
    if beta_end > beta0:
        raise InputError("beta_end={} lies above beta0={}".format(beta_end, beta0))
    grid = beta_grid(beta0, delta_beta)
    grid = grid[grid > beta_end + 1e-9 * abs(delta_beta)]
    if not len(grid):
        return np.array([float(beta_end)])
    return np.append(grid, float(beta_end))


def track_fixed_support(prob, beta0, root0, delta_beta, corrector_steps, beta_end):
    """Euler steps followed by corrector_steps BA-IB iterations, without reduction
    or singularity handling. Returns (beta, root) pairs; the last step is shortened
    to land on beta_end."""
    grid = _fixed_grid(beta0, delta_beta, beta_end)
    root = root0
    path = [(float(grid[0]), root)]
    for beta, beta_next in zip(grid[:-1], grid[1:]):
        solution = solve_ib_ode(root, prob, beta)
        root = euler_step(root, solution, beta_next - beta)
        for _ in range(corrector_steps):
            root = ba_step_decoder(root, prob, beta_next)
        path.append((float(beta_next), root))
    return path


def anneal(prob, beta0, root0, delta_beta, ba_steps, beta_end):
    """Reverse deterministic annealing: ba_steps BA-IB iterations per grid point, no Euler term"""
    grid = _fixed_grid(beta0, delta_beta, beta_end)
    root = root0
    path = [(float(grid[0]), root)]
    for beta_next in grid[1:]:
        for _ in range(ba_steps):
            root = ba_step_decoder(root, prob, beta_next)
        path.append((float(beta_next), root))
    return path


#######################
# Order of accuracy
#######################

@dataclass(frozen=True)
class OrderStudyRow:
    step: float
    method: str
    sup_error: float


@dataclass(frozen=True)
class OrderStudy:
    rows: list
    slopes: dict


def method_label(kind, steps):
    if kind == 'euler':
        return 'euler' if steps == 0 else 'euler+{}ba'.format(steps)
    return 'anneal-{}ba'.format(steps)


def _sup_error(alpha, path, checkpoints):
    """Largest aligned decoder error at the path points nearest to each checkpoint"""
    betas = np.array([beta for beta, _ in path])
    errors = []
    for target in checkpoints:
        beta, root = path[int(np.argmin(np.abs(betas - target)))]
        errors.append(aligned_distance(bsc_exact_root(alpha, beta).root.decoders, root.decoders))
    return max(errors)


def _study_run(task):
    alpha, beta0, beta_end, step, kind, steps, checkpoints = task
    prob = bsc_problem(alpha)
    root0 = bsc_exact_root(alpha, beta0).root
    if kind == 'euler':
        path = track_fixed_support(prob, beta0, root0, step, steps, beta_end)
    else:
        path = anneal(prob, beta0, root0, step, steps, beta_end)
    error = _sup_error(alpha, path, checkpoints)
    return OrderStudyRow(step=float(step), method=method_label(kind, steps), sup_error=float(error))


def fitted_slope(steps, errors, fit_points=None):
    """Least-squares slope of log error against log |step|, over the fit_points smallest steps"""
    pairs = sorted((abs(s), e) for s, e in zip(steps, errors) if e > 0 and np.isfinite(e))
    if fit_points:
        pairs = pairs[:fit_points]
    if len(pairs) < 2:
        return float('nan')
    sizes, errs = zip(*pairs)
    return float(np.polyfit(np.log(sizes), np.log(errs), 1)[0])


def _worker_count(max_workers):
    if max_workers is not None:
        return max_workers
    if os.environ.get('IBRT_MAX_WORKERS'):
        return int(os.environ['IBRT_MAX_WORKERS'])
    return setting(None, 'ORDER_STUDY_MAX_WORKERS')


def order_study(alpha, beta0, beta_end, steps, corrector_steps_list=(0, 1), anneal_steps_list=(1,),
                max_workers=None, fit_points=None):
    """Sup-norm decoder error against the BSC oracle over [beta_end, beta0] for each
    step size and method, with the fitted convergence order per method.
    Every run is measured at the same checkpoints: the grid of the coarsest step
    down to beta_end, and beta_end itself."""
    if not steps:
        raise InputError("An order study needs at least one step size")
    fit_points = setting(fit_points, 'ORDER_STUDY_FIT_POINTS')
    coarsest = max(abs(step) for step in steps)
    checkpoints = tuple(float(beta) for beta in _fixed_grid(beta0, -coarsest, beta_end))
    tasks = [(alpha, beta0, beta_end, step, 'euler', k, checkpoints)
             for step in steps for k in corrector_steps_list]
    tasks += [(alpha, beta0, beta_end, step, 'anneal', k, checkpoints)
              for step in steps for k in anneal_steps_list]
    workers = _worker_count(max_workers)
    logger.debug("Order study: %d runs on %s workers", len(tasks), workers or 'all')

    if workers == 1:
        rows = [_study_run(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_study_run, tasks))
    rows.sort(key=lambda row: (row.step, row.method))

    slopes = {}
    for method in sorted({row.method for row in rows}):
        chosen = [row for row in rows if row.method == method]
        slopes[method] = fitted_slope([row.step for row in chosen], [row.sup_error for row in chosen],
                                      fit_points)
    return OrderStudy(rows=rows, slopes=slopes)
