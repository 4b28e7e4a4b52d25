# common utils
import itertools

import numpy as np

from app import app


def setting(value, key):
    """Returns value unless it is None, in which case the app config value is used"""
    return app.config[key] if value is None else value


# Flat layout of log coordinates: decoder entries x-hat major, y minor, then marginals.
def decoder_index(y, cluster, n_y):
    return cluster * n_y + y


def marginal_index(cluster, n_clusters, n_y):
    return n_clusters * n_y + cluster


def flatten_log_root(decoders, marginal):
    with np.errstate(divide='ignore'):
        return np.concatenate([np.log(decoders).T.ravel(), np.log(marginal)])


def split_log_vector(x, n_clusters, n_y):
    """Splits a flat vector into its (|Y| x T) decoder part and its marginal part"""
    x = np.asarray(x, dtype=float)
    n_dec = n_clusters * n_y
    return x[:n_dec].reshape(n_clusters, n_y).T, x[n_dec:]


def best_permutation(reference, candidate):
    """Returns the cluster permutation of candidate (columns) closest to reference in L-infinity"""
    n_clusters = reference.shape[1]
    best, best_error = None, np.inf
    for perm in itertools.permutations(range(n_clusters)):
        error = np.max(np.abs(reference - candidate[:, list(perm)]))
        if error < best_error:
            best, best_error = list(perm), error
    return best


def aligned_distance(reference, candidate):
    """L-infinity distance between two column-clustered matrices, up to relabelling of clusters.
    Matrices on different cluster counts are infinitely far apart."""
    if reference.shape != candidate.shape:
        return np.inf
    perm = best_permutation(reference, candidate)
    return float(np.max(np.abs(reference - candidate[:, perm])))
