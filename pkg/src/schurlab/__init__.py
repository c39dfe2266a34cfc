"""Perturbation lab for Schur decompositions of small dense complex matrices."""

from importlib import resources
from pathlib import Path

from .errors import (InvalidInputError, InvariantViolation, NumericFailure, PairingFailure,
                     RankAmbiguityWarning)
from .gaps import Subspace, gap, kernel_semigap_ratio, semigap
from .hessenberg import (HessenbergChain, SchurParams, factor_unitary,
                         hessenberg_from_first_column, hessenberg_from_params,
                         params_from_first_column)
from .jordan import GkProfile, dual_sequence, gk_profile, predict_deflation
from .linalg import operator_norm, svd
from .schur import SchurForm, eigenpairs, eigenvalues, schur_decompose
from .stability import (backward_reconstruct, forward_demo_perturb, forward_gap_lower_bound,
                        holder_ratio, match_eigenvalues, measure_backward)

__version__ = "0.1.0"


def data_path(name: str) -> Path:
    """Path of a bundled matrix JSON file, e.g. ``data_path("jordan_4_3_2.json")``."""
    return Path(str(resources.files(__package__) / "data" / name))


__all__ = [
    "GkProfile", "HessenbergChain", "InvalidInputError", "InvariantViolation",
    "NumericFailure", "PairingFailure", "RankAmbiguityWarning", "SchurForm", "SchurParams",
    "Subspace", "backward_reconstruct", "data_path", "dual_sequence", "eigenpairs",
    "eigenvalues", "factor_unitary", "forward_demo_perturb", "forward_gap_lower_bound", "gap",
    "gk_profile", "hessenberg_from_first_column", "hessenberg_from_params", "holder_ratio",
    "kernel_semigap_ratio", "match_eigenvalues", "measure_backward", "operator_norm",
    "params_from_first_column", "predict_deflation", "schur_decompose", "semigap", "svd",
]
