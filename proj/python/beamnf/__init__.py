"""Normal form and stability tools for the nonlinear beam equation on the torus.

Thin wrappers over the C++ core; JSON reports come back as dicts.
"""

import json as _json

from ._beamnf import (
    ConfigError,
    DegenerateSpectrumError,
    DimensionError,
    DomainError,
    NumericalError,
    assemble_K,
    classes,
    classify_set,
    classify_spectrum,
    eigen_perturbation,
    linear_growth_rate,
    simulate,
    symplectic_diagonalize,
    validate_config,
)
from . import _beamnf


def geometry(A):
    return _json.loads(_beamnf.geometry_json(A))


def normal_form(A, m, rho, nu=0.01, cutoff=2.0, reading="literal"):
    return _json.loads(_beamnf.normal_form_json(A, m, rho, nu, cutoff, reading))


def spectrum(A, m, rho, reading="literal"):
    return classify_spectrum(assemble_K(A, m, rho, reading), classes(A))


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def run_report(config, out_dir):
    return [str(p) for p in _beamnf.run_report(_text(config), str(out_dir))]


def run_sweep(config, out_dir):
    return [str(p) for p in _beamnf.run_sweep(_text(config), str(out_dir))]
