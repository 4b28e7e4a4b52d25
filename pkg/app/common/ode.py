"""The IB ODE: implicit derivatives of an IB root with respect to beta.

At a root p = BA_beta(p), differentiating gives (I - J) v = D_beta BA with
J the Jacobian of BA_beta in log-decoder coordinates. The right-hand side
is assembled from the root itself and cross-checked against the explicit
beta-partials of the operator, which agree at fixed points."""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from app.common.ba import log_encoder
from app.common.deriv import ba_jacobian_log_decoder, beta_partials_log_decoder, s_matrix
from app.common.errors import NearBifurcationError, PositivityError, SingularMatrixError
from app.common.numerics import lu_solve, sigma_min
from app.common.utils import setting, split_log_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OdeSolution:
    v: np.ndarray
    condition: float
    singular_metric: float
    residual: float
    rhs: np.ndarray
    rhs_mismatch: float
    n_clusters: int
    n_y: int

    @property
    def decoder_derivatives(self):
        """d log p(y|x-hat)/d beta as a |Y| x T matrix"""
        return split_log_vector(self.v, self.n_clusters, self.n_y)[0]

    @property
    def marginal_derivatives(self):
        return split_log_vector(self.v, self.n_clusters, self.n_y)[1]


def ode_rhs(root, prob, beta=None):
    """Right-hand side of (I - J) v = rhs, built from the root's own decoders, marginal and
    the encoder they generate"""
    beta = root.beta if beta is None else beta
    log_enc, _, divergences = log_encoder(prob, root.decoders, root.marginal, beta)
    encoder = np.exp(log_enc)
    inverse = encoder.T * prob.p_x[:, None] / root.marginal[None, :]
    gap = divergences - np.sum(encoder.T * divergences, axis=1, keepdims=True)
    weighted = inverse * gap
    decoder_part = weighted.sum(axis=0)[None, :] - (prob.p_y_given_x @ weighted) / root.decoders
    return np.concatenate([decoder_part.T.ravel(), -weighted.sum(axis=0)])


def solve_ib_ode(root, prob, beta=None, singular_threshold=0.0):
    """Solves the IB ODE at a root for v = (d log p(y|x-hat)/d beta, d log p(x-hat)/d beta).

    The root should be reduced and differentiable in beta; neither is checked here.
    Raises NearBifurcationError when sigma_min(I - S) < singular_threshold or when the
    system is exactly singular. The error carries the solution computed anyway.
    The default threshold of 0 refuses exact singularity only; the tracker compares
    singular_metric against its own delta3 and settle_threshold."""
    beta = root.beta if beta is None else beta
    if np.any(root.decoders <= 0) or np.any(root.marginal <= 0):
        raise PositivityError("The IB ODE needs strictly positive decoders and marginal")

    jacobian = ba_jacobian_log_decoder(root, prob, beta)
    system = np.eye(jacobian.matrix.shape[0]) - jacobian.matrix
    rhs = ode_rhs(root, prob, beta)
    mismatch = float(np.max(np.abs(rhs - beta_partials_log_decoder(root, prob, beta))))
    if mismatch > setting(None, 'RHS_CONSISTENCY_ATOL'):
        logger.debug("ODE right-hand side differs from the beta-partials by %.3e at beta=%g; "
                     "the point is not a fixed point", mismatch, beta)

    s = s_matrix(root, prob, beta)
    metric = sigma_min(np.eye(s.shape[0]) - s)

    singular = False
    try:
        report = lu_solve(system, rhs)
        v, condition = report.solution, report.condition
    except SingularMatrixError:
        v = scipy.linalg.lstsq(system, rhs)[0]
        condition = np.inf
        singular = True
    residual = float(np.max(np.abs(system @ v - rhs))) if v.size else 0.0

    solution = OdeSolution(v=v, condition=float(condition), singular_metric=metric, residual=residual,
                           rhs=rhs, rhs_mismatch=mismatch, n_clusters=root.n_clusters, n_y=prob.n_y)
    if singular or metric < singular_threshold:
        raise NearBifurcationError(metric, solution)
    return solution
