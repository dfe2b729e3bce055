"""Numerical lab for weighted drift-diffusion operators near a boundary.

The package evaluates Hardy-type barriers, the vector-field certificates that
produce them, quadrature checks of the resulting inequalities, essential
self-adjointness criteria and a one-dimensional Weyl endpoint oracle.
"""

import os as _os

# HARDY_THREADS caps the BLAS/OpenMP pools; it has to be set before numpy loads.
_threads = _os.environ.get("HARDY_THREADS")
if _threads and _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .barriers import BarrierSpec, barrier_eval, barrier_profile, iterlog_chain, magic_identity_residual  # noqa: E402
from .coefficients import CoefficientModel, assumption_audit, rotate_model, schur_decompose  # noqa: E402
from .config import ProblemConfig, parse_config  # noqa: E402
from .criteria import EsaVerdict, ars2_model, check_criterion, layer_infimum  # noqa: E402
from .errors import HardyLabError  # noqa: E402
from .geometry import Domain, distance_bundle  # noqa: E402
from .quadform import Grid, HardyGap, hardy_gap, min_gap_eigen, random_bump  # noqa: E402
from .vectorfield import AnsatzField, remainder_audit, vf_certificate  # noqa: E402
from .weyl import SturmLiouville1D, euler_classify, log_euler_classify, numeric_classify  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "AnsatzField", "BarrierSpec", "CoefficientModel", "Domain", "EsaVerdict", "Grid", "HardyGap",
    "HardyLabError", "ProblemConfig", "SturmLiouville1D", "ars2_model", "assumption_audit",
    "barrier_eval", "barrier_profile", "check_criterion", "distance_bundle", "euler_classify",
    "hardy_gap", "iterlog_chain", "layer_infimum", "log_euler_classify", "magic_identity_residual",
    "min_gap_eigen", "numeric_classify", "parse_config", "random_bump", "remainder_audit",
    "rotate_model", "schur_decompose", "vf_certificate",
]
