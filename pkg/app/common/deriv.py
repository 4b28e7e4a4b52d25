"""First-order derivatives of the BA-IB operator in log-decoder coordinates.

Everything here is evaluated with the distributions one BA cycle produces
from the given root (encoder, inverse encoder, decoder and marginal after
the step). At an IB root these coincide with the root itself.

Flat layout: log p(y|x-hat) with x-hat major and y minor, followed by
log p(x-hat). Derivatives with respect to log p(x-hat') hold the joint
p(y, x-hat') fixed, so the input decoder column x-hat' moves opposite to it."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from app.common.ba import ba_operator_log_decoder, bayes_cycle, log_encoder
from app.common.errors import PositivityError, ShapeMismatchError, ZeroMassClusterError
from app.common.numerics import eigenvalues
from app.common.utils import flatten_log_root, setting, split_log_vector


@dataclass(frozen=True)
class DerivTensors:
    """A (T x T), B (T x T x |Y|), C (T x T x |Y| x |Y|) and D (T x |Y| x |Y|), indexed
    [x-hat, x-hat', y, y'], plus the post-step decoders they sum up to"""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    decoders: np.ndarray


@dataclass(frozen=True)
class BAJacobian:
    matrix: np.ndarray
    n_clusters: int
    n_y: int

    def decoder_index(self, y, cluster):
        return cluster * self.n_y + y

    def marginal_index(self, cluster):
        return self.n_clusters * self.n_y + cluster

    @property
    def n_decoder(self):
        return self.n_clusters * self.n_y

    @property
    def upper_left(self):
        return self.matrix[:self.n_decoder, :self.n_decoder]

    @property
    def upper_right(self):
        return self.matrix[:self.n_decoder, self.n_decoder:]

    @property
    def lower_left(self):
        return self.matrix[self.n_decoder:, :self.n_decoder]

    @property
    def lower_right(self):
        return self.matrix[self.n_decoder:, self.n_decoder:]


class StepQuantities(NamedTuple):
    encoder: np.ndarray
    inverse_encoder: np.ndarray
    decoders: np.ndarray
    marginal: np.ndarray
    divergences: np.ndarray


def step_quantities(root, prob, beta=None, require_positive=False):
    """Distributions generated by one BA cycle from the root; divergences are those of the input decoders"""
    beta = root.beta if beta is None else beta
    if require_positive and (np.any(root.decoders <= 0) or np.any(root.marginal <= 0)):
        raise PositivityError("Log-decoder coordinates need strictly positive decoders and marginal")
    log_enc, _, divergences = log_encoder(prob, root.decoders, root.marginal, beta)
    encoder = np.exp(log_enc)
    encoder /= encoder.sum(axis=0, keepdims=True)
    marginal, inverse, decoders = bayes_cycle(prob, encoder)
    return StepQuantities(encoder, inverse, decoders, marginal, divergences)


def _divide(numerator, denominator):
    return np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator > 0)


def _tensors(prob, step):
    channel = prob.p_y_given_x
    enc, inv = step.encoder, step.inverse_encoder
    a = np.einsum('xt,sx->ts', inv, enc)
    b = np.einsum('yx,sx,xt->tsy', channel, enc, inv)
    c = np.einsum('yx,zx,sx,xt->tsyz', channel, channel, enc, inv)
    d = _divide(np.einsum('yx,zx,xt->tyz', channel, channel, inv),
                np.broadcast_to(step.decoders.T[:, :, None], (enc.shape[0], prob.n_y, prob.n_y)))
    return DerivTensors(A=a, B=b, C=c, D=d, decoders=step.decoders)


def deriv_tensors(root, prob, beta=None):
    return _tensors(prob, step_quantities(root, prob, beta))


def _jacobian_from(tensors, beta):
    a, b, c, d, q = tensors.A, tensors.B, tensors.C, tensors.D, tensors.decoders
    n_clusters, n_y = a.shape[0], q.shape[0]
    eye = np.eye(n_clusters)

    # rows (x-hat, y), columns (x-hat', y')
    upper_left = beta * (b[:, None, :, :]
                         - eye[:, None, :, None] * q.T[:, None, None, :]
                         + eye[:, None, :, None] * d[:, :, None, :]
                         - np.transpose(c, (0, 2, 1, 3)) / q.T[:, :, None, None])
    upper_right = (1.0 - beta) * (a[:, None, :] - np.transpose(b, (0, 2, 1)) / q.T[:, :, None])
    lower_left = beta * (eye[:, :, None] * q.T[:, None, :] - b)
    lower_right = (1.0 - beta) * (eye - a)

    n_dec = n_clusters * n_y
    return np.block([[upper_left.reshape(n_dec, n_dec), upper_right.reshape(n_dec, n_clusters)],
                     [lower_left.reshape(n_clusters, n_dec), lower_right]])


def ba_jacobian_log_decoder(root, prob, beta=None):
    """Jacobian of BA_beta in log-decoder coordinates, assembled from the A, B, C, D tensors"""
    beta = root.beta if beta is None else beta
    tensors = _tensors(prob, step_quantities(root, prob, beta, require_positive=True))
    return BAJacobian(_jacobian_from(tensors, beta), root.n_clusters, prob.n_y)


def _partials_from(step, prob):
    channel = prob.p_y_given_x
    # G[x, t] = D_{x,t} - sum_s p(s|x) D_{x,s}
    gap = step.divergences - np.sum(step.encoder.T * step.divergences, axis=1, keepdims=True)
    weighted = step.inverse_encoder * gap
    decoder_part = weighted.sum(axis=0)[None, :] - (channel @ weighted) / step.decoders
    marginal_part = -weighted.sum(axis=0)
    return np.concatenate([decoder_part.T.ravel(), marginal_part]), gap


def beta_partials_log_decoder(root, prob, beta=None):
    """Explicit beta-derivative of BA_beta's output in log coordinates, inputs held fixed"""
    beta = root.beta if beta is None else beta
    partials, _ = _partials_from(step_quantities(root, prob, beta, require_positive=True), prob)
    return partials


def beta_partials_encoder(root, prob, beta=None):
    """Explicit beta-derivative of log p(x-hat|x), a T x |X| matrix"""
    step = step_quantities(root, prob, beta)
    gap = step.divergences - np.sum(step.encoder.T * step.divergences, axis=1, keepdims=True)
    return -gap.T


def s_matrix(root, prob, beta=None):
    """The order T|Y| matrix whose unit eigenvalues mirror those of BA's Jacobian:
    S[(y,t),(y',t')] = sum_x p(x|t) [beta p(y|x)/p(y|t) + 1 - 2 beta] p(y'|x) [delta_tt' - p(t'|x)]"""
    beta = root.beta if beta is None else beta
    step = step_quantities(root, prob, beta, require_positive=True)
    channel = prob.p_y_given_x
    n_clusters, n_y = root.n_clusters, prob.n_y

    weight = step.inverse_encoder.T[:, None, :] * (
        beta * channel[None, :, :] / step.decoders.T[:, :, None] + 1.0 - 2.0 * beta)
    diagonal = np.einsum('tyx,zx->tyz', weight, channel)
    off = np.einsum('tyx,zx,sx->tysz', weight, channel, step.encoder)
    s = np.eye(n_clusters)[:, None, :, None] * diagonal[:, :, None, :] - off
    return s.reshape(n_clusters * n_y, n_clusters * n_y)


def kernel_lift(v, beta, n_y):
    """Lifts a left kernel vector of I - S to one of I - J by appending
    u_t = (1 - beta)/beta * sum_y v_{y,t}"""
    v = np.asarray(v, dtype=float)
    if v.size % n_y:
        raise ShapeMismatchError("Vector of length {} is not a multiple of |Y| = {}".format(v.size, n_y))
    u = (1.0 - beta) / beta * v.reshape(-1, n_y).sum(axis=1)
    return np.concatenate([v, u])


#######################
# Cluster stability
#######################

def _cluster_step(root, prob, cluster, beta):
    if not 0 <= cluster < root.n_clusters:
        raise ShapeMismatchError("No cluster {} in a root on {} clusters".format(cluster, root.n_clusters))
    if root.marginal[cluster] <= 0:
        raise ZeroMassClusterError(cluster)
    return step_quantities(root, prob, beta)


def cx_matrix(root, prob, cluster, beta=None):
    """C_X(x-hat)[x, x'] = sum_y p(y|x) p(y|x') p(x'|x-hat) / p(y|x-hat)"""
    step = _cluster_step(root, prob, cluster, beta)
    channel = prob.p_y_given_x
    ratio = _divide(channel, np.broadcast_to(step.decoders[:, cluster:cluster + 1], channel.shape))
    return np.einsum('yx,yz,z->xz', ratio, channel, step.inverse_encoder[:, cluster])


def v_matrix(root, prob, cluster, beta=None):
    """V(x-hat)[x, x'] = sum_y p(x',y) p(x,y) p(x-hat|x) / (p(y,x-hat) p(x')), the transpose of C_X"""
    step = _cluster_step(root, prob, cluster, beta)
    joint = prob.joint
    joint_cluster = step.decoders[:, cluster] * step.marginal[cluster]
    ratio = _divide(joint, np.broadcast_to(joint_cluster[:, None], joint.shape))
    return np.einsum('yz,yx,x->xz', joint, ratio, step.encoder[cluster]) / prob.p_x[None, :]


def is_merging_condition(root, prob, cluster, tol=1e-4, beta=None):
    """True when 1/beta lies within tol of an eigenvalue of C_X"""
    beta = root.beta if beta is None else beta
    values = eigenvalues(cx_matrix(root, prob, cluster, beta))
    return bool(np.min(np.abs(values - 1.0 / beta)) < tol)


#######################
# Coordinate exchange
#######################

def exchange_dec_to_enc(v, root, prob, beta=None):
    """d log p(x-hat|x)/d beta (T x |X|) from the log-decoder derivative vector v"""
    beta = root.beta if beta is None else beta
    v = np.asarray(v, dtype=float)
    n_clusters = root.n_clusters
    if v.size != n_clusters * (prob.n_y + 1):
        raise ShapeMismatchError("Expected a vector of length {}, got {}".format(
            n_clusters * (prob.n_y + 1), v.size))
    step = step_quantities(root, prob, beta)
    v_dec, v_mrg = split_log_vector(v, n_clusters, prob.n_y)
    enc_t = step.encoder.T

    through_decoders = prob.p_y_given_x.T @ v_dec
    decoder_term = beta * (through_decoders - np.sum(enc_t * through_decoders, axis=1, keepdims=True))
    marginal_term = (1.0 - beta) * (v_mrg[None, :] - (enc_t @ v_mrg)[:, None])
    gap = step.divergences - np.sum(enc_t * step.divergences, axis=1, keepdims=True)
    return (decoder_term + marginal_term - gap).T


def exchange_enc_to_dec(v_enc, root, prob, beta=None):
    """Log-decoder derivative vector from d log p(x-hat|x)/d beta"""
    step = step_quantities(root, prob, beta)
    v_enc = np.asarray(v_enc, dtype=float)
    if v_enc.shape != step.encoder.shape:
        raise ShapeMismatchError("Expected a {} matrix, got {}".format(step.encoder.shape, v_enc.shape))
    weighted = step.inverse_encoder * v_enc.T
    marginal_part = weighted.sum(axis=0)
    decoder_part = (prob.p_y_given_x @ weighted) / step.decoders - marginal_part[None, :]
    return np.concatenate([decoder_part.T.ravel(), marginal_part])


#######################
# Finite differences
#######################

def _perturbation(column, n_clusters, n_y):
    direction = np.zeros(n_clusters * (n_y + 1))
    direction[column] = 1.0
    if column >= n_clusters * n_y:
        cluster = column - n_clusters * n_y
        direction[cluster * n_y:(cluster + 1) * n_y] = -1.0
    return direction


def finite_difference_jacobian(root, prob, beta=None, step=None):
    """Central differences of BA_beta in log coordinates, column by column"""
    beta = root.beta if beta is None else beta
    step = setting(step, 'FINITE_DIFFERENCE_STEP')
    x0 = flatten_log_root(root.decoders, root.marginal)
    n_clusters = root.n_clusters
    columns = []
    for column in range(x0.size):
        direction = _perturbation(column, n_clusters, prob.n_y)
        plus = ba_operator_log_decoder(x0 + step * direction, prob, beta, n_clusters)
        minus = ba_operator_log_decoder(x0 - step * direction, prob, beta, n_clusters)
        columns.append((plus - minus) / (2.0 * step))
    return np.stack(columns, axis=1)


def finite_difference_beta_partials(root, prob, beta=None, step=None):
    beta = root.beta if beta is None else beta
    step = setting(step, 'FINITE_DIFFERENCE_STEP')
    x0 = flatten_log_root(root.decoders, root.marginal)
    plus = ba_operator_log_decoder(x0, prob, beta + step, root.n_clusters)
    minus = ba_operator_log_decoder(x0, prob, beta - step, root.n_clusters)
    return (plus - minus) / (2.0 * step)
