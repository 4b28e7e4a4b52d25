#!flask/bin/python
import os
import unittest
import sys

import numpy as np
from numpy.testing import assert_allclose

# Set path to parent directory
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app import app
from app.common.deriv import beta_partials_log_decoder
from app.common.errors import NearBifurcationError, PositivityError
from app.common.ode import ode_rhs, solve_ib_ode
from app.common.oracles import (bsc_exact_derivative, bsc_exact_root, bsc_problem, decomposable_problem,
                                decomposable_root)
from app.common.probability import DecoderRoot


class IBOdeTests(unittest.TestCase):
  """This class tests the IB ODE solver"""

  def setUp(self):
    app.config['TESTING'] = True
    self.prob = bsc_problem(0.3)

  def test_matches_exact_derivative(self):
    """The ODE reproduces the exact BSC derivative in log coordinates"""
    for beta in (7.0, 10.0, 32.0):
      solution = solve_ib_ode(bsc_exact_root(0.3, beta).root, self.prob)
      assert_allclose(solution.v, bsc_exact_derivative(0.3, beta).log_vector, atol=1e-8)
      assert solution.residual < 1e-12

  def test_matches_oracle_path(self):
    """Central differences of the exact root path agree with v"""
    h = 1e-4
    for beta in (8.0, 12.0):
      solution = solve_ib_ode(bsc_exact_root(0.3, beta).root, self.prob)
      upper = np.log(bsc_exact_root(0.3, beta + h).root.decoders)
      lower = np.log(bsc_exact_root(0.3, beta - h).root.decoders)
      difference = (upper - lower) / (2 * h)
      assert_allclose(solution.decoder_derivatives, difference,
                      rtol=1e-5, atol=1e-5 * np.max(np.abs(difference)))

  def test_trivial_root(self):
    """A single cluster does not move"""
    solution = solve_ib_ode(DecoderRoot.trivial(self.prob, 3.0), self.prob)
    assert np.max(np.abs(solution.v)) < 1e-14
    assert abs(solution.singular_metric - 1.0) < 1e-14
    assert solution.decoder_derivatives.shape == (2, 1)
    assert solution.marginal_derivatives.shape == (1,)

  def test_diverges_near_bifurcation(self):
    """Derivatives blow up just above beta_c"""
    near = solve_ib_ode(bsc_exact_root(0.3, 6.26).root, self.prob)
    far = solve_ib_ode(bsc_exact_root(0.3, 32.0).root, self.prob)
    assert np.max(np.abs(near.v)) >= 1e3 * np.max(np.abs(far.v))
    assert near.singular_metric < far.singular_metric

  def test_swap_antisymmetry(self):
    """Swapping the two BSC clusters negates the decoder derivatives"""
    solution = solve_ib_ode(bsc_exact_root(0.3, 10.0).root, self.prob)
    derivatives = solution.decoder_derivatives
    assert_allclose(derivatives[::-1, ::-1], derivatives, atol=1e-12)
    assert_allclose(solution.marginal_derivatives, 0.0, atol=1e-12)

  def test_rhs_consistency(self):
    """The root-form right-hand side equals the beta-partials at roots only"""
    root = bsc_exact_root(0.3, 10.0).root
    solution = solve_ib_ode(root, self.prob)
    assert solution.rhs_mismatch < 1e-10
    off = DecoderRoot([[0.8, 0.35], [0.2, 0.65]], [0.4, 0.6], 10.0)
    mismatch = np.max(np.abs(ode_rhs(off, self.prob) - beta_partials_log_decoder(off, self.prob)))
    assert mismatch > 1e-6

  def test_refuses_near_bifurcation(self):
    """A positive threshold turns a nearly singular system into an error carrying the solution"""
    root = DecoderRoot.trivial(self.prob, 6.25, n_clusters=2)
    with self.assertRaises(NearBifurcationError) as ctx:
      solve_ib_ode(root, self.prob, singular_threshold=1e-2)
    assert ctx.exception.singular_metric < 1e-8
    assert ctx.exception.solution is not None
    assert ctx.exception.solution.v.shape == (6,)

  def test_default_threshold_only_refuses_singular_systems(self):
    """By default a nearly singular system is solved; any positive threshold above sigma_min refuses it"""
    root = bsc_exact_root(0.3, 6.26).root
    solution = solve_ib_ode(root, self.prob)
    assert 0 < solution.singular_metric < app.config['SINGULARITY_SETTLE']
    with self.assertRaises(NearBifurcationError) as ctx:
      solve_ib_ode(root, self.prob, singular_threshold=2 * solution.singular_metric)
    assert_allclose(ctx.exception.solution.v, solution.v)

  def test_needs_positive_root(self):
    """Boundary roots have no log-decoder derivative"""
    with self.assertRaises(PositivityError):
      solve_ib_ode(decomposable_root(2.0), decomposable_problem())


if __name__ == '__main__':
  unittest.main()
