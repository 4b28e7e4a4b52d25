"""Probability containers and information measures for finite alphabets.

Matrices are laid out column-per-conditioning-value: column j of
p_y_given_x is p(.|x_j), column t of a decoder matrix is p(.|x-hat_t),
and column j of an encoder matrix is p(.|x_j) over the clusters.
All information quantities are in nats."""
import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr, rel_entr

from app.common.errors import (DivergenceInfiniteError, NormalizationError, ProblemFormatError,
                               ShapeMismatchError)
from app.common.utils import setting


def _frozen(values):
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


def _check_columns(matrix, what, atol):
    sums = matrix.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums - 1.0) > atol)
    if bad.size:
        raise NormalizationError("{} column {} sums to {!r}, not 1".format(what, bad[0], sums[bad[0]]))


@dataclass(frozen=True)
class IBProblem:
    """A finite IB problem p(y|x) p(x). Records whether p(y|x) is strictly positive."""
    p_y_given_x: np.ndarray
    p_x: np.ndarray
    name: str = 'custom'
    strictly_positive: bool = field(init=False)

    def __post_init__(self):
        channel = _frozen(self.p_y_given_x)
        p_x = _frozen(self.p_x)
        if channel.ndim != 2 or p_x.ndim != 1 or channel.shape[1] != p_x.shape[0]:
            raise ShapeMismatchError("p_y_given_x of shape {} does not match p_x of length {}".format(
                channel.shape, p_x.shape))
        if np.any(channel < 0):
            raise ProblemFormatError("p_y_given_x has negative entries")
        atol = setting(None, 'NORMALIZATION_ATOL')
        sums = channel.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > atol)
        if bad.size:
            raise ProblemFormatError("p_y_given_x column {} sums to {!r}, not 1".format(bad[0], sums[bad[0]]),
                                     index=int(bad[0]))
        if np.any(p_x <= 0):
            raise ProblemFormatError("p_x must be strictly positive",
                                     index=int(np.flatnonzero(p_x <= 0)[0]))
        if abs(p_x.sum() - 1.0) > atol:
            raise ProblemFormatError("p_x sums to {!r}, not 1".format(p_x.sum()))
        object.__setattr__(self, 'p_y_given_x', channel)
        object.__setattr__(self, 'p_x', p_x)
        object.__setattr__(self, 'strictly_positive', bool(np.all(channel > 0)))

    @property
    def n_x(self):
        return self.p_x.shape[0]

    @property
    def n_y(self):
        return self.p_y_given_x.shape[0]

    @property
    def p_y(self):
        return self.p_y_given_x @ self.p_x

    @property
    def joint(self):
        """p(y, x) as a |Y| x |X| matrix"""
        return self.p_y_given_x * self.p_x[None, :]


@dataclass(frozen=True)
class Encoder:
    p_xhat_given_x: np.ndarray

    def __post_init__(self):
        matrix = _frozen(self.p_xhat_given_x)
        if matrix.ndim != 2:
            raise ShapeMismatchError("Encoder must be a T x |X| matrix")
        if np.any(matrix < 0):
            raise NormalizationError("Encoder has negative entries")
        _check_columns(matrix, 'Encoder', setting(None, 'NORMALIZATION_ATOL'))
        object.__setattr__(self, 'p_xhat_given_x', matrix)

    @property
    def n_clusters(self):
        return self.p_xhat_given_x.shape[0]


@dataclass(frozen=True)
class DecoderRoot:
    """Cluster decoders p(y|x-hat) with their marginal p(x-hat), at a given beta"""
    decoders: np.ndarray
    marginal: np.ndarray
    beta: float

    def __post_init__(self):
        decoders = _frozen(self.decoders)
        marginal = _frozen(self.marginal)
        if decoders.ndim != 2 or marginal.ndim != 1 or decoders.shape[1] != marginal.shape[0]:
            raise ShapeMismatchError("Decoders of shape {} do not match a marginal of length {}".format(
                decoders.shape, marginal.shape))
        if not self.beta > 0:
            raise NormalizationError("beta must be positive, got {!r}".format(self.beta))
        atol = setting(None, 'NORMALIZATION_ATOL')
        if np.any(decoders < 0) or np.any(marginal < 0):
            raise NormalizationError("Decoder root has negative entries")
        _check_columns(decoders, 'Decoder', atol)
        if abs(marginal.sum() - 1.0) > atol:
            raise NormalizationError("Marginal sums to {!r}, not 1".format(marginal.sum()))
        object.__setattr__(self, 'decoders', decoders)
        object.__setattr__(self, 'marginal', marginal)
        object.__setattr__(self, 'beta', float(self.beta))

    @property
    def n_clusters(self):
        return self.marginal.shape[0]

    @property
    def n_y(self):
        return self.decoders.shape[0]

    @classmethod
    def normalized(cls, decoders, marginal, beta):
        """Builds a root after renormalizing decoder columns and the marginal"""
        decoders = np.asarray(decoders, dtype=float)
        marginal = np.asarray(marginal, dtype=float)
        return cls(decoders / decoders.sum(axis=0, keepdims=True), marginal / marginal.sum(), beta)

    @classmethod
    def trivial(cls, prob, beta, n_clusters=1):
        """The trivial root, optionally represented on several identical clusters"""
        decoders = np.repeat(prob.p_y[:, None], n_clusters, axis=1)
        return cls(decoders, np.full(n_clusters, 1.0 / n_clusters), beta)


@dataclass(frozen=True)
class InfoPoint:
    i_x: float
    i_y: float


# Information measures
def entropy(p):
    return float(np.sum(entr(np.asarray(p, dtype=float))))


def binary_entropy(d):
    return entropy([d, 1.0 - d])


def binary_convolution(a, b):
    return a * (1.0 - b) + b * (1.0 - a)


def kl_divergence(p, q):
    """D_KL[p||q] in nats with the 0 ln 0 = 0 convention"""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeMismatchError("Distributions of lengths {} and {}".format(p.shape, q.shape))
    if np.any((p > 0) & (q <= 0)):
        raise DivergenceInfiniteError("q vanishes where p is positive")
    return max(float(np.sum(rel_entr(p, q))), 0.0)


def to_bits(nats):
    return nats / np.log(2.0)


def mutual_informations(enc, prob):
    """(I(X;X-hat), I(Y;X-hat)) of an encoder, using the Markov decoder for the latter"""
    matrix = enc.p_xhat_given_x
    if matrix.shape[1] != prob.n_x:
        raise ShapeMismatchError("Encoder over {} symbols for a problem over {}".format(
            matrix.shape[1], prob.n_x))
    marginal = matrix @ prob.p_x
    i_x = float(np.sum(prob.p_x[None, :] * rel_entr(matrix, marginal[:, None])))
    # p(y, x-hat) directly; zero-mass clusters contribute nothing
    joint_y_xhat = prob.joint @ matrix.T
    i_y = float(np.sum(rel_entr(joint_y_xhat, prob.p_y[:, None] * marginal[None, :])))
    i_x = max(i_x, 0.0)
    i_y = min(max(i_y, 0.0), i_x)
    return InfoPoint(i_x=i_x, i_y=i_y)


def lagrangian(enc, prob, beta):
    info = mutual_informations(enc, prob)
    return info.i_x - beta * info.i_y


# Problem files
def load_problem(source, name=None):
    """Loads a problem from a JSON string or a path to a JSON file:
    {"p_x": [...], "p_y_given_x": [[row for y_0], [row for y_1], ...]}"""
    text = source
    if os.path.exists(source):
        name = name or os.path.basename(source)
        with open(source) as problem_file:
            text = problem_file.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProblemFormatError("Malformed problem JSON at line {}, column {}: {}".format(
            err.lineno, err.colno, err.msg), line=err.lineno, column=err.colno)

    if not isinstance(data, dict) or 'p_x' not in data or 'p_y_given_x' not in data:
        raise ProblemFormatError("Problem JSON needs the fields 'p_x' and 'p_y_given_x'")
    try:
        channel = np.array(data['p_y_given_x'], dtype=float)
        p_x = np.array(data['p_x'], dtype=float)
    except (TypeError, ValueError) as err:
        raise ProblemFormatError("Problem JSON holds non-numeric entries: {}".format(err))
    return IBProblem(channel, p_x, name=name or data.get('name', 'custom'))
