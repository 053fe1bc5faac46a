"""Python access to the nlheat library.

Kernels are given as a short name (``gaussian``, ``gaussian2``, ``laplace``,
``tent``) or as a descriptor dict.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    Error,
    NumericError,
    ResourceError,
    classify,
    gaussian_log_v,
    phi_gaussian,
    set_max_workers,
)

__version__ = _core.__version__


def _k(kernel):
    return kernel if isinstance(kernel, str) else json.dumps(kernel)


def _v(x):
    return [float(x)] if isinstance(x, (int, float)) else [float(c) for c in x]


def kernel(kernel):
    """Normalized descriptor of a kernel."""
    return json.loads(_core.kernel_json(_k(kernel)))


def density(kernel, x):
    return _core.kernel_density(_k(kernel), _v(x))


def fourier(kernel, p):
    return _core.kernel_fourier(_k(kernel), _v(p))


def heat_kernel(kernel, t, n=4096, L=64.0, route="series", eps=1e-12):
    """ln v on a lattice; returns a dict with x, log_v, rel_error, mass, ..."""
    return _core.heat_kernel(_k(kernel), float(t), int(n), float(L), route, float(eps))


def rate(kernel, r):
    """(I(r), grad I(r))."""
    return _core.rate(_k(kernel), _v(r))


def phi(kernel, r):
    """(xi_r, Phi(r))."""
    return _core.phi(_k(kernel), _v(r))


def predict_log_v(kernel, x, t, band=2.0):
    """(predicted ln v, predictor kind, bound_only)."""
    return _core.predict_log_v(_k(kernel), _v(x), float(t), float(band))


def simulate(config):
    """Monte Carlo estimate; config is a dict with the simulate keys."""
    return json.loads(_core.simulate(json.dumps(config)))


def validate(suite="all", seed=20261015, paths=100000):
    return json.loads(_core.validate(suite, int(seed), int(paths)))


__all__ = [
    "ConfigError", "DomainError", "Error", "NumericError", "ResourceError",
    "classify", "density", "fourier", "gaussian_log_v", "heat_kernel", "kernel",
    "phi", "phi_gaussian", "predict_log_v", "rate", "set_max_workers", "simulate",
    "validate",
]
