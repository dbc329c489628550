"""Causal discovery with structural Hawkes processes.

Counts are (bins x nodes) integer arrays; graphs are lists of (source, target)
name pairs. Configuration dicts use the same keys as the JSON config files of
the `shp` command-line tool.
"""

import json

import numpy as np

from ._shp import (
    NumericError,
    ShpError,
    ShpIoError,
    ValidationError,
    compare_graphs,
    dispersion_check,
)
from . import _shp

__all__ = [
    "simulate",
    "log_likelihood",
    "fit",
    "search",
    "threshold_graph",
    "compare_graphs",
    "run_experiment",
    "bivariate_gap",
    "dispersion_check",
    "ShpError",
    "ValidationError",
    "ShpIoError",
    "NumericError",
]


def _dump(config):
    return json.dumps(config or {})


def simulate(config=None, seed=None):
    """Random DAG, parameters and binned counts. Returns a dict."""
    return _shp._simulate(_dump(config), seed)


def log_likelihood(counts, delta, alpha, mu, beta, edges, node_names=None):
    return _shp._log_likelihood(np.asarray(counts), delta, np.asarray(alpha, dtype=float), list(mu),
                                float(beta), list(edges), node_names)


def fit(counts, delta, edges, config=None, node_names=None):
    """MM fit of strengths and rates on a fixed DAG."""
    return _shp._fit(np.asarray(counts), delta, list(edges), _dump(config), node_names)


def search(counts, delta, config=None, threads=1, node_names=None):
    """Penalized hill climbing from the empty graph."""
    return _shp._search(np.asarray(counts), delta, _dump(config), threads, node_names)


def threshold_graph(counts, delta, tau=0.1, config=None, node_names=None):
    return _shp._threshold_graph(np.asarray(counts), delta, tau, _dump(config), node_names)


def run_experiment(spec, threads=1):
    """Parameter sweep; `spec` follows the experiment config schema."""
    return json.loads(_shp._experiment(_dump(spec), threads))


def bivariate_gap(alpha, mu_x, mu_y, n, trials, seed=0):
    return json.loads(_shp._bivariate_gap(alpha, mu_x, mu_y, n, trials, seed))
