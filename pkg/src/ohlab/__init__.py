"""Numerical laboratory for self-dual matrix norms, variational means,
two-sided decomposition norms and free moment combinatorics.

Modules:
  numkit   quadrature grids for the arcsine-type measures, dense linear algebra
  opspace  column/row/self-dual norms of matrix tuples and the variational sup form
  pwmean   variational means of commuting positive pairs
  kfunc    decomposition (sum) norms, corner estimates, matrix coset norms
  freeprob non-crossing pairings, covariance forms, truncated Fock models
  labcli   command line experiments with pass/fail reports
"""

from . import freeprob, kfunc, labcli, numkit, opspace, pwmean
from .freeprob import (
    CovarianceForm,
    PairPartition,
    TruncatedFock,
    build_semicircular,
    catalan,
    covariance_from_densities,
    enumerate_ncp,
    oh_pairing,
    speicher_moment,
    vacuum_moment,
    voiculescu_check,
)
from .kfunc import (
    DiscreteKSpace,
    GElement,
    g_tensor_diag_lower,
    g_tensor_norm_upper,
    k_quotient_norm,
    kk_dual_norm,
    kk_t_norm,
    l2_plus2_norm,
    quotient_norm_l1,
)
from .numkit import QuadGrid, hermitian_eig, integrate, make_grid, schatten_norm, spectral_norm
from .opspace import MatrixTuple, column_norm, oh_norm, oh_norm_sup_form, row_norm
from .pwmean import CommutingPair, alpha_mean, geomean_form, pw_dual, pw_primal

__version__ = "0.1.0"

__all__ = [
    "CommutingPair",
    "CovarianceForm",
    "DiscreteKSpace",
    "GElement",
    "MatrixTuple",
    "PairPartition",
    "QuadGrid",
    "TruncatedFock",
    "alpha_mean",
    "build_semicircular",
    "catalan",
    "column_norm",
    "covariance_from_densities",
    "enumerate_ncp",
    "freeprob",
    "g_tensor_diag_lower",
    "g_tensor_norm_upper",
    "geomean_form",
    "hermitian_eig",
    "integrate",
    "k_quotient_norm",
    "kfunc",
    "kk_dual_norm",
    "kk_t_norm",
    "l2_plus2_norm",
    "labcli",
    "make_grid",
    "numkit",
    "oh_norm",
    "oh_norm_sup_form",
    "oh_pairing",
    "opspace",
    "pw_dual",
    "pw_primal",
    "pwmean",
    "quotient_norm_l1",
    "row_norm",
    "schatten_norm",
    "spectral_norm",
    "speicher_moment",
    "vacuum_moment",
    "voiculescu_check",
]
