"""Ground truth for testing root tracking.

- the binary symmetric channel BSC(alpha) with a uniform source, solved in closed form up to
  one scalar equation for the encoder crossover delta
- the decomposable problem p(y|x) p(x) = diag(0.3, 0.7) whose optimal roots switch support at beta = 1
- a brute-force Lagrangian minimizer for tiny problems
"""
import functools
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq
from scipy.special import rel_entr

from app.common.ba import ba_iterate
from app.common.errors import BranchError, RangeError, TooLargeError
from app.common.probability import (DecoderRoot, Encoder, IBProblem, binary_convolution, binary_entropy,
                                    lagrangian)
from app.common.utils import setting

logger = logging.getLogger(__name__)

BSC_PREFIX = 'bsc:'
DECOMPOSABLE = 'decomposable'
_S_LOW, _S_HIGH = 2e-16, 1.0 - 2e-16


@dataclass(frozen=True)
class BscSolution:
    alpha: float
    beta: float
    delta: float
    encoder: Encoder
    root: DecoderRoot
    beta_c: float


@dataclass(frozen=True)
class BscDerivative:
    """Exact beta-derivatives on the nontrivial BSC branch"""
    decoders: np.ndarray
    log_vector: np.ndarray
    encoder: np.ndarray
    log_encoder: np.ndarray
    dbeta_ddelta: float


#######################
# Binary symmetric channel
#######################

def _check_alpha(alpha):
    if not 0 < alpha < 0.5:
        raise RangeError("BSC crossover must lie in (0, 1/2), got {!r}".format(alpha))


def bsc_problem(alpha):
    _check_alpha(alpha)
    return IBProblem([[1.0 - alpha, alpha], [alpha, 1.0 - alpha]], [0.5, 0.5],
                     name='{}{!r}'.format(BSC_PREFIX, float(alpha)))


def bsc_critical_beta(alpha):
    """1 / (1 - 2 alpha)^2, computed from the shortest decimal of alpha so that bsc:0.3 gives 6.25"""
    _check_alpha(alpha)
    slope = 1 - 2 * Fraction(repr(float(alpha)))
    return float(1 / slope ** 2)


def on_trivial_branch(alpha, beta):
    """True up to beta_c, with a relative tolerance of CRITICAL_BETA_RTOL"""
    return beta <= bsc_critical_beta(alpha) * (1.0 + setting(None, 'CRITICAL_BETA_RTOL'))


def bsc_delta(alpha, beta):
    """Encoder crossover of the optimal BSC root.

    Solves beta (1-2 alpha) log[(1 - a*d)/(a*d)] = log[(1-d)/d] for d in (0, 1/2),
    written in s = 1 - 2d where both logs become 2 atanh terms."""
    if on_trivial_branch(alpha, beta):
        return 0.5
    slope = 1.0 - 2.0 * alpha

    def balance(s):
        return beta * slope * np.arctanh(slope * s) - np.arctanh(s)

    if balance(_S_LOW) <= 0:
        return 0.5 - _S_LOW / 2.0
    if balance(_S_HIGH) >= 0:
        return (1.0 - _S_HIGH) / 2.0
    s = brentq(balance, _S_LOW, _S_HIGH, xtol=1e-16, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    return (1.0 - s) / 2.0


def bsc_exact_root(alpha, beta):
    """Exact optimal root of BSC(alpha) at beta, represented on two clusters.
    Below beta_c both clusters sit at the trivial p(y) = (1/2, 1/2)."""
    delta = bsc_delta(alpha, beta)
    convolved = binary_convolution(alpha, delta)
    encoder = Encoder([[1.0 - delta, delta], [delta, 1.0 - delta]])
    root = DecoderRoot([[1.0 - convolved, convolved], [convolved, 1.0 - convolved]], [0.5, 0.5], beta)
    return BscSolution(alpha=float(alpha), beta=float(beta), delta=delta, encoder=encoder, root=root,
                       beta_c=bsc_critical_beta(alpha))


def bsc_exact_derivative(alpha, beta):
    """d/d beta of the BSC root by the chain rule through delta.
    Raises BranchError on the trivial branch, where the root does not move."""
    if on_trivial_branch(alpha, beta):
        raise BranchError("beta={} is not above beta_c={}".format(beta, bsc_critical_beta(alpha)))
    solution = bsc_exact_root(alpha, beta)
    delta = solution.delta
    slope = 1.0 - 2.0 * alpha
    s = 1.0 - 2.0 * delta

    # beta(delta) = L / (slope M) with L = 2 atanh(s), M = 2 atanh(slope s)
    lhs = 2.0 * np.arctanh(s)
    rhs = 2.0 * np.arctanh(slope * s)
    dlhs = -4.0 / (1.0 - s * s)
    drhs = -4.0 * slope / (1.0 - (slope * s) ** 2)
    dbeta_ddelta = (dlhs * rhs - lhs * drhs) / (slope * rhs ** 2)
    ddelta = 1.0 / dbeta_ddelta

    swap = np.array([[-1.0, 1.0], [1.0, -1.0]])
    decoders = slope * swap * ddelta
    encoder = swap * ddelta
    log_decoders = decoders / solution.root.decoders
    log_vector = np.concatenate([log_decoders.T.ravel(), np.zeros(2)])
    return BscDerivative(decoders=decoders, log_vector=log_vector, encoder=encoder,
                         log_encoder=encoder / solution.encoder.p_xhat_given_x, dbeta_ddelta=dbeta_ddelta)


def inverse_binary_entropy(value):
    """The d in [0, 1/2] with h(d) = value"""
    if value <= 0:
        return 0.0
    if value >= np.log(2.0):
        return 0.5
    return brentq(lambda d: binary_entropy(d) - value, 0.0, 0.5, xtol=1e-16, maxiter=500)


def mrs_gerber_curve(alpha, i_x):
    """Exact BSC IB curve I_Y(I_X) = ln2 - h(alpha * h^-1(ln2 - I_X)), in nats"""
    _check_alpha(alpha)
    ln2 = np.log(2.0)
    if i_x < -1e-12 or i_x > ln2 + 1e-12:
        raise RangeError("I_X={!r} is outside [0, ln 2]".format(i_x))
    delta = inverse_binary_entropy(ln2 - min(max(i_x, 0.0), ln2))
    return ln2 - binary_entropy(binary_convolution(alpha, delta))


#######################
# Decomposable problem
#######################

def decomposable_problem():
    return IBProblem(np.eye(2), [0.3, 0.7], name=DECOMPOSABLE)


def decomposable_root(beta):
    """Optimal root of the decomposable problem: trivial below beta = 1,
    supported on the simplex vertices from beta = 1 on"""
    if beta < 1.0:
        return DecoderRoot.trivial(decomposable_problem(), beta)
    return DecoderRoot(np.eye(2), [0.3, 0.7], beta)


#######################
# Dispatch
#######################

def _bsc_root(alpha, beta):
    return bsc_exact_root(alpha, beta).root


def _bsc_log_derivative(alpha, beta):
    if on_trivial_branch(alpha, beta):
        return np.zeros(6)
    return bsc_exact_derivative(alpha, beta).log_vector


def bsc_alpha(prob):
    """Crossover of a builtin BSC problem, None for any other problem"""
    if not prob.name.startswith(BSC_PREFIX):
        return None
    try:
        return float(prob.name[len(BSC_PREFIX):])
    except ValueError:
        return None


def oracle_for(prob):
    """Callable beta -> exact optimal root for the builtin problems, None otherwise"""
    alpha = bsc_alpha(prob)
    if alpha is not None:
        return functools.partial(_bsc_root, alpha)
    if prob.name == DECOMPOSABLE:
        return decomposable_root
    return None


def derivative_oracle_for(prob):
    """Callable beta -> exact log-decoder derivative vector of the oracle root, None when unknown"""
    alpha = bsc_alpha(prob)
    if alpha is not None:
        return functools.partial(_bsc_log_derivative, alpha)
    return None


#######################
# Brute force
#######################

def _batch_lagrangian(batch, prob, beta):
    """Lagrangian of a stack of encoders (K x T x |X|)"""
    marginal = batch @ prob.p_x
    i_x = np.sum(prob.p_x[None, None, :] * rel_entr(batch, marginal[:, :, None]), axis=(1, 2))
    joint = np.einsum('yx,ktx->kyt', prob.joint, batch)
    product = prob.p_y[None, :, None] * marginal[:, None, :]
    i_y = np.sum(rel_entr(joint, product), axis=(1, 2))
    return i_x - beta * i_y


def brute_force_root(prob, beta, n_clusters, resolution=101):
    """Minimizes I(X;X-hat) - beta I(Y;X-hat) over a grid of encoders, then polishes the
    best grid point with BA-IB. Returns (encoder, Lagrangian value).

    The grid takes each encoder column p(x-hat_0|x) from linspace(0, 1, resolution).
    The first column is the outer loop and the rest are vectorized; the lowest flat
    index wins ties. Zero-mass clusters are dropped before polishing."""
    if prob.n_x > setting(None, 'BRUTE_FORCE_MAX_X') \
            or n_clusters > setting(None, 'BRUTE_FORCE_MAX_CLUSTERS') \
            or resolution > setting(None, 'BRUTE_FORCE_MAX_RESOLUTION'):
        raise TooLargeError("Brute force is limited to |X| <= {}, T <= {} and resolution <= {}".format(
            setting(None, 'BRUTE_FORCE_MAX_X'), setting(None, 'BRUTE_FORCE_MAX_CLUSTERS'),
            setting(None, 'BRUTE_FORCE_MAX_RESOLUTION')))
    if n_clusters < 1 or resolution < 2:
        raise RangeError("Need at least one cluster and a resolution of at least 2")

    if n_clusters == 1:
        best = np.ones((1, prob.n_x))
    else:
        values = np.linspace(0.0, 1.0, resolution)
        rest = np.array(list(itertools.product(values, repeat=prob.n_x - 1))).reshape(-1, prob.n_x - 1)
        best, best_value = None, np.inf
        for first in values:
            top = np.hstack([np.full((rest.shape[0], 1), first), rest])
            batch = np.stack([top, 1.0 - top], axis=1)
            scores = _batch_lagrangian(batch, prob, beta)
            k = int(np.argmin(scores))
            if scores[k] < best_value:
                best, best_value = batch[k], scores[k]
        logger.debug("Brute force grid minimum %.12g at beta=%g", best_value, beta)

    best = best[best @ prob.p_x > 0]
    result = ba_iterate(Encoder(best / best.sum(axis=0, keepdims=True)), prob, beta,
                        stop=setting(None, 'BRUTE_FORCE_POLISH_STOP'))
    return result.encoder, lagrangian(result.encoder, prob, beta)
