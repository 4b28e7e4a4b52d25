# Problem JSON strings and random problems used by the tests
import numpy as np

from app.common.probability import DecoderRoot, IBProblem

BSC_03 = """{
    "name": "bsc-file",
    "p_x": [0.5, 0.5],
    "p_y_given_x": [[0.7, 0.3],
                    [0.3, 0.7]]
}"""

THREE_BY_TWO = """{
    "p_x": [0.2, 0.3, 0.5],
    "p_y_given_x": [[0.9, 0.5, 0.15],
                    [0.1, 0.5, 0.85]]
}"""

# the closing bracket of p_x is missing on line 3
MALFORMED = """{
    "p_x": [0.5, 0.5,
    "p_y_given_x": [[0.7, 0.3], [0.3, 0.7]]
}"""

NOT_NORMALIZED = """{
    "p_x": [0.5, 0.5],
    "p_y_given_x": [[0.7, 0.4],
                    [0.3, 0.7]]
}"""

MISSING_FIELD = """{
    "p_y_given_x": [[1.0]]
}"""


def random_problem(rng, n_x, n_y):
    """A strictly positive problem with Dirichlet(2) channel columns and source"""
    return IBProblem(rng.dirichlet(np.full(n_y, 2.0), size=n_x).T, rng.dirichlet(np.full(n_x, 2.0)),
                     name='random')


def random_root(rng, n_y, n_clusters, beta):
    """A strictly positive decoder root, not a fixed point of BA-IB"""
    return DecoderRoot(rng.dirichlet(np.full(n_y, 2.0), size=n_clusters).T,
                       rng.dirichlet(np.full(n_clusters, 2.0)), beta)
