"""Blahut-Arimoto for the Information Bottleneck, in encoder and in decoder coordinates.

One BA cycle maps an encoder to its cluster marginal, inverse encoder and
decoder (Bayes and the Markov chain Y - X - X-hat), and a decoder/marginal
pair back to an encoder through the partition function Z(x, beta)."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

from app.common.errors import DivergenceInfiniteError, ZeroMassClusterError
from app.common.probability import DecoderRoot, Encoder, mutual_informations
from app.common.utils import setting, split_log_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BAResult:
    root: DecoderRoot
    encoder: Encoder
    inverse_encoder: np.ndarray
    iterations: int
    converged: bool
    final_change: float


#######################
# Array-level maps
#######################

def divergence_matrix(prob, decoders):
    """|X| x T matrix of D_KL[p(y|x) || p(y|x-hat)], +inf where the decoder misses the support.
    Decoders of strictly positive problems are floored before taking logs."""
    channel = prob.p_y_given_x
    decoders = np.asarray(decoders, dtype=float)
    if prob.strictly_positive:
        decoders = np.maximum(decoders, setting(None, 'DECODER_FLOOR'))
    with np.errstate(divide='ignore', invalid='ignore'):
        log_decoders = np.log(decoders)
        cross = np.where(channel[:, :, None] > 0,
                         channel[:, :, None] * log_decoders[:, None, :], 0.0).sum(axis=0)
    neg_entropy = xlogy(channel, channel).sum(axis=0)
    return neg_entropy[:, None] - cross


def log_encoder(prob, decoders, marginal, beta):
    """log p(x-hat|x) from a (possibly unnormalized) decoder/marginal pair.
    Returns (log encoder T x |X|, log Z of length |X|, divergence matrix |X| x T)."""
    divergences = divergence_matrix(prob, decoders)
    with np.errstate(divide='ignore'):
        log_marginal = np.log(np.asarray(marginal, dtype=float))
    with np.errstate(invalid='ignore'):
        exponent = log_marginal[:, None] - beta * divergences.T
    exponent = np.where(np.isnan(exponent), -np.inf, exponent)
    log_z = logsumexp(exponent, axis=0)
    if np.any(~np.isfinite(log_z)):
        bad = int(np.flatnonzero(~np.isfinite(log_z))[0])
        raise DivergenceInfiniteError(
            "No cluster of positive mass has a finite divergence from p(y|x_{})".format(bad))
    return exponent - log_z[None, :], log_z, divergences


def bayes_cycle(prob, encoder_matrix):
    """Marginal, inverse encoder (|X| x T) and decoder (|Y| x T) generated by an encoder"""
    marginal = encoder_matrix @ prob.p_x
    empty = np.flatnonzero(marginal <= 0)
    if empty.size:
        raise ZeroMassClusterError(int(empty[0]))
    inverse = encoder_matrix.T * prob.p_x[:, None] / marginal[None, :]
    decoders = prob.p_y_given_x @ inverse
    return marginal, inverse, decoders


def ba_operator_log_decoder(x, prob, beta, n_clusters):
    """BA_beta on flat log coordinates (log p(y|x-hat) x-hat major, then log p(x-hat)).
    Defined for unnormalized inputs as well; outputs are always normalized."""
    log_decoders, log_marginal = split_log_vector(x, n_clusters, prob.n_y)
    log_enc, _, _ = log_encoder(prob, np.exp(log_decoders), np.exp(log_marginal), beta)
    marginal, _, decoders = bayes_cycle(prob, np.exp(log_enc))
    with np.errstate(divide='ignore'):
        return np.concatenate([np.log(decoders).T.ravel(), np.log(marginal)])


#######################
# BA-IB operations
#######################

def decoder_from_encoder(enc, prob, beta):
    """Returns the decoder root generated by an encoder, together with its inverse encoder"""
    marginal, inverse, decoders = bayes_cycle(prob, enc.p_xhat_given_x)
    decoders = decoders / decoders.sum(axis=0, keepdims=True)
    return DecoderRoot(decoders, marginal / marginal.sum(), beta), inverse


def encoder_from_decoder(root, prob, beta=None):
    """Returns the encoder generated by a decoder root and the partition function Z(x, beta)"""
    beta = root.beta if beta is None else beta
    log_enc, log_z, _ = log_encoder(prob, root.decoders, root.marginal, beta)
    matrix = np.exp(log_enc)
    return Encoder(matrix / matrix.sum(axis=0, keepdims=True)), np.exp(log_z)


def ba_step_decoder(root, prob, beta=None):
    """A single BA-IB cycle decoder -> encoder -> decoder"""
    beta = root.beta if beta is None else beta
    enc, _ = encoder_from_decoder(root, prob, beta)
    new_root, _ = decoder_from_encoder(enc, prob, beta)
    return new_root


def initial_encoder(prob, n_clusters, method='uniform', seed=None):
    """Initial encoder for BA-IB. Columns are Dirichlet(1) draws: 'uniform' uses the
    configured BA_SEED, 'random' the given seed."""
    if method == 'uniform':
        seed = setting(None, 'BA_SEED')
    elif method != 'random':
        raise ValueError("Unknown initialization method {!r}".format(method))
    rng = np.random.default_rng(seed)
    matrix = rng.dirichlet(np.ones(n_clusters), size=prob.n_x).T
    return Encoder(matrix / matrix.sum(axis=0, keepdims=True))


def ba_iterate(init, prob, beta, stop=None, max_iter=None):
    """Runs BA-IB until the encoder moves less than stop in L-infinity, or max_iter cycles"""
    stop = setting(stop, 'BA_STOP')
    max_iter = setting(max_iter, 'BA_MAX_ITER')
    if stop <= 0 or max_iter < 1:
        raise ValueError("Need stop > 0 and max_iter >= 1")

    matrix = init.p_xhat_given_x
    converged = False
    change = np.inf
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        marginal, _, decoders = bayes_cycle(prob, matrix)
        log_enc, _, _ = log_encoder(prob, decoders, marginal, beta)
        new_matrix = np.exp(log_enc)
        new_matrix /= new_matrix.sum(axis=0, keepdims=True)
        change = float(np.max(np.abs(new_matrix - matrix)))
        matrix = new_matrix
        if change < stop:
            converged = True
            break

    if not converged:
        logger.warning("BA-IB did not converge at beta=%g after %d iterations (change %.3e)",
                       beta, iterations, change)
    else:
        logger.debug("BA-IB converged at beta=%g in %d iterations", beta, iterations)

    enc = Encoder(matrix)
    root, inverse = decoder_from_encoder(enc, prob, beta)
    return BAResult(root=root, encoder=enc, inverse_encoder=inverse, iterations=iterations,
                    converged=converged, final_change=change)


def info_point(root, prob, beta=None):
    """Information-plane point of a decoder root, through the encoder it generates"""
    enc, _ = encoder_from_decoder(root, prob, beta)
    return mutual_informations(enc, prob)
