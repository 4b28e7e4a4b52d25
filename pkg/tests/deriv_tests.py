#!flask/bin/python
import os
import unittest
import sys

import numpy as np
from numpy.testing import assert_allclose

# Set path to parent directory
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from sample_data.problems import THREE_BY_TWO, random_problem, random_root

from app import app
from app.common.ba import ba_iterate, initial_encoder
from app.common.deriv import (ba_jacobian_log_decoder, beta_partials_encoder, beta_partials_log_decoder,
                              cx_matrix, deriv_tensors, exchange_dec_to_enc, exchange_enc_to_dec,
                              finite_difference_beta_partials, finite_difference_jacobian,
                              is_merging_condition, kernel_lift, s_matrix, v_matrix)
from app.common.errors import PositivityError, ShapeMismatchError, ZeroMassClusterError
from app.common.numerics import eigenvalues, left_null_vector, nullity
from app.common.oracles import (bsc_critical_beta, bsc_exact_derivative, bsc_exact_root, bsc_problem,
                                decomposable_problem, decomposable_root)
from app.common.probability import DecoderRoot, load_problem
from app.common.reduction import reduce_root


class DerivativeTests(unittest.TestCase):
  """This class tests the derivatives of the BA-IB operator"""

  def setUp(self):
    app.config['TESTING'] = True
    self.prob = bsc_problem(0.3)
    self.root = bsc_exact_root(0.3, 10.0).root
    self.three = load_problem(THREE_BY_TWO)
    # an arbitrary positive point that is not a root
    self.off_root = DecoderRoot([[0.8, 0.35], [0.2, 0.65]], [0.4, 0.6], 3.0)

  #######################
  # Jacobian
  #######################

  def test_tensors_at_trivial_root(self):
    """On a single cluster A is one and B is p(y)"""
    tensors = deriv_tensors(DecoderRoot.trivial(self.prob, 4.0), self.prob)
    assert_allclose(tensors.A, [[1.0]])
    assert_allclose(tensors.B[0, 0], self.prob.p_y)
    assert tensors.C.shape == (1, 1, 2, 2) and tensors.D.shape == (1, 2, 2)

  def test_tensor_sums(self):
    """C sums over y' to B, B over y to A, and C over x-hat' and y' to the decoders"""
    rng = np.random.default_rng(7)
    points = [(self.prob, self.root), (self.three, self._three_root())]
    points += [(self.three, random_root(rng, 2, 3, rng.uniform(1.0, 20.0))) for _ in range(2)]
    points += [(random_problem(rng, 4, 3), random_root(rng, 3, 2, 5.0)) for _ in range(2)]
    for prob, root in points:
      tensors = deriv_tensors(root, prob)
      assert_allclose(tensors.C.sum(axis=3), tensors.B, atol=1e-12)
      assert_allclose(tensors.B.sum(axis=2), tensors.A, atol=1e-12)
      assert_allclose(tensors.C.sum(axis=(1, 3)), tensors.decoders.T, atol=1e-12)
      assert_allclose(tensors.A.sum(axis=1), 1.0, atol=1e-12)
    assert_allclose(deriv_tensors(self.root, self.prob).decoders, self.root.decoders, atol=1e-10)

  def test_jacobian_matches_finite_differences(self):
    """The assembled Jacobian agrees with central differences at a root"""
    jacobian = ba_jacobian_log_decoder(self.root, self.prob)
    assert jacobian.matrix.shape == (6, 6)
    assert_allclose(jacobian.matrix, finite_difference_jacobian(self.root, self.prob), atol=1e-6)

  def test_jacobian_off_root(self):
    """Agreement with finite differences holds away from roots too"""
    jacobian = ba_jacobian_log_decoder(self.off_root, self.three)
    assert_allclose(jacobian.matrix, finite_difference_jacobian(self.off_root, self.three), atol=1e-6)

  def test_jacobian_blocks(self):
    """Block accessors split decoder and marginal coordinates"""
    jacobian = ba_jacobian_log_decoder(self.root, self.prob)
    assert jacobian.upper_left.shape == (4, 4)
    assert jacobian.upper_right.shape == (4, 2)
    assert jacobian.lower_left.shape == (2, 4)
    assert jacobian.lower_right.shape == (2, 2)
    assert jacobian.decoder_index(1, 1) == 3 and jacobian.marginal_index(1) == 5

  def test_trivial_jacobian_vanishes(self):
    """BA-IB maps everything to the trivial root on one cluster"""
    jacobian = ba_jacobian_log_decoder(DecoderRoot.trivial(self.prob, 4.0), self.prob)
    assert np.max(np.abs(jacobian.matrix)) < 1e-14

  def test_jacobian_needs_positivity(self):
    """Log coordinates do not exist on the simplex boundary"""
    with self.assertRaises(PositivityError):
      ba_jacobian_log_decoder(decomposable_root(2.0), decomposable_problem())

  #######################
  # Beta partials
  #######################

  def test_beta_partials(self):
    """Explicit beta-derivatives agree with central differences"""
    assert_allclose(beta_partials_log_decoder(self.root, self.prob),
                    finite_difference_beta_partials(self.root, self.prob), atol=1e-6)
    assert_allclose(beta_partials_log_decoder(self.off_root, self.three),
                    finite_difference_beta_partials(self.off_root, self.three), atol=1e-6)

  def test_beta_partials_trivial(self):
    """Nothing depends on beta on a single cluster"""
    trivial = DecoderRoot.trivial(self.prob, 4.0)
    assert np.max(np.abs(beta_partials_log_decoder(trivial, self.prob))) < 1e-14
    assert np.max(np.abs(beta_partials_encoder(trivial, self.prob))) < 1e-14

  #######################
  # S matrix
  #######################

  def test_kernel_lift_identity(self):
    """Left-multiplying I - J by a lifted vector reproduces v (I - S)"""
    rng = np.random.default_rng(3)
    for prob, root in ((self.prob, self.root), (self.three, self._three_root())):
      jacobian = ba_jacobian_log_decoder(root, prob).matrix
      s = s_matrix(root, prob)
      v = rng.normal(size=s.shape[0])
      lifted = kernel_lift(v, root.beta, prob.n_y) @ (np.eye(jacobian.shape[0]) - jacobian)
      reduced = v @ (np.eye(s.shape[0]) - s)
      n_dec = s.shape[0]
      assert_allclose(lifted[:n_dec], reduced, atol=1e-10)
      expected = (1.0 - root.beta) / root.beta * reduced.reshape(-1, prob.n_y).sum(axis=1)
      assert_allclose(lifted[n_dec:], expected, atol=1e-10)

  def test_s_singular_at_bifurcation(self):
    """At beta_c the duplicated trivial BSC root makes I - S singular"""
    root = DecoderRoot.trivial(self.prob, 6.25, n_clusters=2)
    s = s_matrix(root, self.prob)
    assert nullity(np.eye(4) - s, 1e-8) >= 1
    away = s_matrix(DecoderRoot.trivial(self.prob, 5.0, n_clusters=2), self.prob)
    assert nullity(np.eye(4) - away, 1e-8) == 0

  def test_kernel_lift_shape(self):
    """Vectors must come in whole clusters"""
    with self.assertRaises(ShapeMismatchError):
      kernel_lift(np.ones(3), 2.0, 2)

  def test_kernels_correspond(self):
    """I - S and I - J have kernels of one dimension, and lifting maps one onto the other"""
    rng = np.random.default_rng(13)
    points = []
    for seed in range(5):
      prob = random_problem(rng, 3, 3)
      result = ba_iterate(initial_encoder(prob, 3, 'random', seed=seed), prob, rng.uniform(2.0, 20.0))
      points.append((prob, reduce_root(result.root).root))
    points.append((self.prob, bsc_exact_root(0.3, 6.25).root))
    singular = 0
    for prob, root in points:
      n_dec = root.n_clusters * prob.n_y
      i_minus_s = np.eye(n_dec) - s_matrix(root, prob)
      i_minus_j = np.eye(n_dec + root.n_clusters) - ba_jacobian_log_decoder(root, prob).matrix
      dimension = nullity(i_minus_s, 1e-6)
      assert dimension == nullity(i_minus_j, 1e-6)
      if not dimension:
        continue
      singular += 1
      lifted = kernel_lift(left_null_vector(i_minus_s), root.beta, prob.n_y)
      assert np.max(np.abs(lifted @ i_minus_j)) < 1e-6
      v, u = lifted[:n_dec].reshape(root.n_clusters, prob.n_y), lifted[n_dec:]
      assert np.max(np.abs(v.sum(axis=0))) < 1e-8
      assert abs(u.sum()) < 1e-8
    assert singular >= 1

  #######################
  # Cluster stability
  #######################

  def test_cx_matrix_trivial(self):
    """On the trivial BSC root C_X is W^T W with eigenvalues 1 and (1 - 2 alpha)^2"""
    root = DecoderRoot.trivial(self.prob, 6.25)
    cx = cx_matrix(root, self.prob, 0)
    assert_allclose(cx, [[0.58, 0.42], [0.42, 0.58]], atol=1e-14)
    assert_allclose(np.sort(eigenvalues(cx).real), [0.16, 1.0], atol=1e-14)

  def test_merging_condition(self):
    """1/beta meets an eigenvalue of C_X exactly at beta_c"""
    assert is_merging_condition(DecoderRoot.trivial(self.prob, 6.25), self.prob, 0)
    assert not is_merging_condition(DecoderRoot.trivial(self.prob, 5.0), self.prob, 0)

  def test_cx_eigenvalue_crossing(self):
    """Bisection on the trivial BSC root puts the crossing of 1/beta and C_X at beta_c,
    where the gap on the exact root path closes"""
    def gap(root):
      return np.min(eigenvalues(cx_matrix(root, self.prob, 0)).real) - 1.0 / root.beta

    low, high = 5.0, 8.0
    for _ in range(60):
      middle = 0.5 * (low + high)
      if gap(DecoderRoot.trivial(self.prob, middle, n_clusters=2)) < 0:
        low = middle
      else:
        high = middle
    assert abs(0.5 * (low + high) - bsc_critical_beta(0.3)) < 1e-3

    near = gap(bsc_exact_root(0.3, 6.2501).root)
    assert gap(bsc_exact_root(0.3, 7.0).root) < near < 0
    assert abs(near) < 1e-3

  def test_v_matrix_transposes_cx(self):
    """V and C_X are transposes of each other"""
    for cluster in (0, 1):
      assert_allclose(v_matrix(self.root, self.prob, cluster), cx_matrix(self.root, self.prob, cluster).T,
                      atol=1e-12)

  def test_cx_matrix_errors(self):
    """Unknown clusters and empty clusters are refused"""
    with self.assertRaises(ShapeMismatchError):
      cx_matrix(self.root, self.prob, 2)
    empty = DecoderRoot([[0.7, 0.5], [0.3, 0.5]], [1.0, 0.0], 10.0)
    with self.assertRaises(ZeroMassClusterError):
      cx_matrix(empty, self.prob, 1)

  #######################
  # Coordinate exchange
  #######################

  def test_exchange_matches_exact_derivatives(self):
    """Both exchange directions reproduce the exact BSC derivatives"""
    exact = bsc_exact_derivative(0.3, 10.0)
    assert_allclose(exchange_dec_to_enc(exact.log_vector, self.root, self.prob), exact.log_encoder, atol=1e-8)
    assert_allclose(exchange_enc_to_dec(exact.log_encoder, self.root, self.prob), exact.log_vector, atol=1e-8)

  def test_uniform_encoder_shift(self):
    """Shifting every log-encoder entry by c leaves decoders still and moves the marginal by c"""
    v = exchange_enc_to_dec(np.full((2, 2), 0.25), self.root, self.prob)
    assert_allclose(v[:4], 0.0, atol=1e-14)
    assert_allclose(v[4:], 0.25, atol=1e-14)

  def test_exchange_shapes(self):
    """Vectors of the wrong size are refused"""
    with self.assertRaises(ShapeMismatchError):
      exchange_dec_to_enc(np.ones(5), self.root, self.prob)
    with self.assertRaises(ShapeMismatchError):
      exchange_enc_to_dec(np.ones((3, 2)), self.root, self.prob)

  def _three_root(self):
    result = ba_iterate(initial_encoder(self.three, 2), self.three, 20.0, stop=1e-13)
    return result.root


if __name__ == '__main__':
  unittest.main()
