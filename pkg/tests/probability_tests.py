#!flask/bin/python
import os
import tempfile
import unittest
import sys

import numpy as np
from numpy.testing import assert_allclose

# Set path to parent directory
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from sample_data.problems import BSC_03, MALFORMED, MISSING_FIELD, NOT_NORMALIZED, THREE_BY_TWO

from app import app
from app.common.errors import (DivergenceInfiniteError, NormalizationError, ProblemFormatError,
                               ShapeMismatchError)
from app.common.probability import (DecoderRoot, Encoder, IBProblem, binary_convolution, binary_entropy,
                                    entropy, kl_divergence, lagrangian, load_problem, mutual_informations,
                                    to_bits)

LN2 = np.log(2.0)


class ProbabilityTests(unittest.TestCase):
  """This class tests problems, roots and information measures"""

  def setUp(self):
    app.config['TESTING'] = True
    self.bsc = IBProblem([[0.7, 0.3], [0.3, 0.7]], [0.5, 0.5])

  #######################
  # Problems and roots
  #######################

  def test_problem_properties(self):
    """p(y), the joint and the positivity flag are derived from the channel"""
    assert self.bsc.n_x == 2 and self.bsc.n_y == 2
    assert_allclose(self.bsc.p_y, [0.5, 0.5])
    assert_allclose(self.bsc.joint, [[0.35, 0.15], [0.15, 0.35]])
    assert self.bsc.strictly_positive
    assert not IBProblem(np.eye(2), [0.3, 0.7]).strictly_positive

  def test_problem_validation(self):
    """Bad columns report their index, bad shapes are shape errors"""
    with self.assertRaises(ProblemFormatError) as ctx:
      IBProblem([[0.7, 0.4], [0.3, 0.7]], [0.5, 0.5])
    assert ctx.exception.index == 1
    with self.assertRaises(ProblemFormatError) as ctx:
      IBProblem([[1.0, 1.0]], [1.0, 0.0])
    assert ctx.exception.index == 1
    with self.assertRaises(ShapeMismatchError):
      IBProblem([[1.0, 1.0]], [1.0])

  def test_decoder_root_validation(self):
    """Decoder roots must be normalized and have a positive beta"""
    with self.assertRaises(NormalizationError):
      DecoderRoot([[0.5, 0.5], [0.6, 0.5]], [0.5, 0.5], 1.0)
    with self.assertRaises(NormalizationError):
      DecoderRoot([[0.5], [0.5]], [1.0], 0.0)
    with self.assertRaises(ShapeMismatchError):
      DecoderRoot([[0.5], [0.5]], [0.5, 0.5], 1.0)
    root = DecoderRoot.normalized([[1.0, 3.0], [1.0, 1.0]], [2.0, 6.0], 2.0)
    assert_allclose(root.decoders, [[0.5, 0.75], [0.5, 0.25]])
    assert_allclose(root.marginal, [0.25, 0.75])

  def test_trivial_root(self):
    """The trivial root repeats p(y) on every cluster with equal masses"""
    root = DecoderRoot.trivial(self.bsc, 3.0, n_clusters=2)
    assert root.n_clusters == 2
    assert_allclose(root.decoders, [[0.5, 0.5], [0.5, 0.5]])
    assert_allclose(root.marginal, [0.5, 0.5])

  #######################
  # Information measures
  #######################

  def test_entropies(self):
    """Entropies in nats with 0 ln 0 = 0"""
    assert abs(binary_entropy(0.5) - LN2) < 1e-15
    assert binary_entropy(0.0) == 0.0
    assert abs(entropy([0.25] * 4) - 2 * LN2) < 1e-15
    assert abs(binary_convolution(0.3, 0.5) - 0.5) < 1e-15
    assert abs(binary_convolution(0.3, 0.0) - 0.3) < 1e-15
    assert abs(to_bits(LN2) - 1.0) < 1e-15

  def test_kl_divergence(self):
    """KL vanishes on equal arguments and is infinite off the support"""
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
    expected = 0.5 * np.log(0.5 / 0.25) + 0.5 * np.log(0.5 / 0.75)
    assert abs(kl_divergence([0.5, 0.5], [0.25, 0.75]) - expected) < 1e-15
    assert abs(kl_divergence([0.0, 1.0], [0.5, 0.5]) - LN2) < 1e-15
    with self.assertRaises(DivergenceInfiniteError):
      kl_divergence([0.5, 0.5], [1.0, 0.0])

  def test_mutual_informations(self):
    """The identity encoder keeps everything, a single cluster keeps nothing"""
    info = mutual_informations(Encoder(np.eye(2)), self.bsc)
    assert abs(info.i_x - LN2) < 1e-14
    assert abs(info.i_y - (LN2 - binary_entropy(0.3))) < 1e-14
    trivial = mutual_informations(Encoder([[1.0, 1.0]]), self.bsc)
    assert trivial.i_x == 0.0 and trivial.i_y == 0.0

  def test_lagrangian(self):
    """I_X - beta I_Y of the identity encoder"""
    value = lagrangian(Encoder(np.eye(2)), self.bsc, 2.0)
    assert abs(value - (LN2 - 2.0 * (LN2 - binary_entropy(0.3)))) < 1e-14

  #######################
  # Problem files
  #######################

  def test_load_problem_string(self):
    """Problems load from JSON text"""
    prob = load_problem(BSC_03)
    assert prob.name == 'bsc-file'
    assert_allclose(prob.p_y_given_x, [[0.7, 0.3], [0.3, 0.7]])
    other = load_problem(THREE_BY_TWO, name='three')
    assert other.name == 'three' and other.n_x == 3 and other.n_y == 2

  def test_load_problem_file(self):
    """Problems load from a file, named after it"""
    with tempfile.TemporaryDirectory() as folder:
      path = os.path.join(folder, 'three.json')
      with open(path, 'w') as problem_file:
        problem_file.write(THREE_BY_TWO)
      prob = load_problem(path)
    assert prob.name == 'three.json'
    assert_allclose(prob.p_x, [0.2, 0.3, 0.5])

  def test_load_problem_errors(self):
    """Syntax errors carry their line, normalization errors their column index"""
    with self.assertRaises(ProblemFormatError) as ctx:
      load_problem(MALFORMED)
    assert ctx.exception.line == 3
    assert 'line 3' in str(ctx.exception)
    with self.assertRaises(ProblemFormatError) as ctx:
      load_problem(NOT_NORMALIZED)
    assert ctx.exception.index == 1
    with self.assertRaises(ProblemFormatError):
      load_problem(MISSING_FIELD)


if __name__ == '__main__':
  unittest.main()
