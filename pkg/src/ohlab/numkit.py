"""Dense complex linear algebra and quadrature for the arcsine-type measures.

The base measure is the probability measure mu with density 1/(pi*sqrt(t(1-t)))
on [0,1]; its singular companions are nu1 = t^{-1} dmu and nu2 = (1-t)^{-1} dmu.
Grids substitute t = sin^2(theta), under which mu becomes the uniform measure
(2/pi) dtheta, so cell masses are exact and midpoint quadrature of a smooth
bounded integrand converges spectrally (the theta-integrand extends evenly
across both endpoints).

nu1/nu2 have infinite total mass near t=0 / t=1; callers integrating against
them must either clip the region away from the singular endpoint or supply an
integrand vanishing fast enough there.

Matrices are plain 2-D complex numpy arrays; ``as_matrix`` validates shape and
finiteness.  Inner products are antilinear in the first argument throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import asin, pi, sqrt

import numpy as np

__all__ = [
    "QuadGrid",
    "as_matrix",
    "conj",
    "hermitian_eig",
    "integrate",
    "kron",
    "make_grid",
    "schatten_norm",
    "spectral_norm",
]

_WEIGHT_NAMES = ("mu", "nu1", "nu2")


def as_matrix(a) -> np.ndarray:
    """Validate and return a as a 2-D complex array with finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


@dataclass(frozen=True)
class QuadGrid:
    """Midpoint grid in theta = arcsin(sqrt(t)) coordinates.

    nodes      : t-values in (0,1), midpoints of the theta-cells
    mu_weights : exact mu-masses of the cells; they sum to the mu-mass
                 of ``region`` (1 for the full interval)
    t_edges    : t-values of the cell boundaries (resolution+1 of them)
    region     : closed subinterval [lo, hi] of [0,1] covered by the grid
    """

    nodes: np.ndarray
    mu_weights: np.ndarray
    t_edges: np.ndarray
    region: tuple[float, float]
    resolution: int

    @property
    def nu1_weights(self) -> np.ndarray:
        """Per-node masses for nu1 = t^{-1} dmu (finite on clipped regions)."""
        return self.mu_weights / self.nodes

    @property
    def nu2_weights(self) -> np.ndarray:
        """Per-node masses for nu2 = (1-t)^{-1} dmu."""
        return self.mu_weights / (1.0 - self.nodes)

    def weights(self, weight: str) -> np.ndarray:
        if weight == "mu":
            return self.mu_weights
        if weight == "nu1":
            return self.nu1_weights
        if weight == "nu2":
            return self.nu2_weights
        raise ValueError(f"unknown weight {weight!r}, expected one of {_WEIGHT_NAMES}")


def make_grid(resolution: int, region: tuple[float, float] = (0.0, 1.0)) -> QuadGrid:
    """Build a midpoint quadrature grid for mu on ``region``.

    The theta-interval [arcsin(sqrt(lo)), arcsin(sqrt(hi))] is split into
    ``resolution`` equal cells; nodes are the cell midpoints mapped back to t
    and weights are the exact mu-masses (2/pi) * dtheta of the cells.
    """
    if int(resolution) != resolution or resolution < 2:
        raise ValueError(f"resolution must be an integer >= 2, got {resolution}")
    lo, hi = float(region[0]), float(region[1])
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"region must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]")
    theta = np.linspace(asin(sqrt(lo)), asin(sqrt(hi)), int(resolution) + 1)
    mid = 0.5 * (theta[:-1] + theta[1:])
    nodes = np.sin(mid) ** 2
    weights = (2.0 / pi) * np.diff(theta)
    t_edges = np.sin(theta) ** 2
    for arr in (nodes, weights, t_edges):
        arr.flags.writeable = False
    return QuadGrid(nodes, weights, t_edges, (lo, hi), int(resolution))


def integrate(f, grid: QuadGrid, weight: str = "mu") -> float:
    """Quadrature of f against mu, nu1 or nu2 on the grid.

    f may be a callable evaluated at the nodes or an array of node values.
    """
    vals = np.asarray(f(grid.nodes) if callable(f) else f, dtype=complex)
    if np.isscalar(f) or vals.ndim == 0:
        vals = np.full_like(grid.nodes, complex(f), dtype=complex)
    if vals.shape != grid.nodes.shape:
        raise ValueError(f"f has shape {vals.shape}, expected {grid.nodes.shape}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand has non-finite node values")
    out = np.sum(vals * grid.weights(weight))
    return float(out.real) if abs(out.imag) < 1e-14 * (1 + abs(out)) else complex(out)


def spectral_norm(a) -> float:
    """Largest singular value."""
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def schatten_norm(a, p) -> float:
    """Schatten p-norm from singular values; p = inf gives the spectral norm."""
    m = as_matrix(a)
    if p != np.inf and p < 1:
        raise ValueError(f"Schatten norm requires p >= 1, got p={p}")
    s = np.linalg.svd(m, compute_uv=False)
    if p == np.inf:
        return float(s[0]) if s.size else 0.0
    return float(np.sum(s ** p) ** (1.0 / p))


def hermitian_eig(a):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector matrix V with A V = V diag).
    Rejects inputs whose measured asymmetry ||A - A*||_F exceeds
    1e-10 * max(1, ||A||_F).
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError("hermitian_eig requires a square matrix")
    asym = float(np.linalg.norm(m - m.conj().T))
    scale = max(1.0, float(np.linalg.norm(m)))
    if asym > 1e-10 * scale:
        raise ValueError(
            f"matrix is not Hermitian: ||A - A*||_F = {asym:.3e} "
            f"(tolerance {1e-10 * scale:.3e})"
        )
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w, v


def kron(a, b) -> np.ndarray:
    """Kronecker product."""
    return np.kron(as_matrix(a), as_matrix(b))


def conj(a) -> np.ndarray:
    """Entrywise complex conjugate."""
    return np.conj(as_matrix(a))
