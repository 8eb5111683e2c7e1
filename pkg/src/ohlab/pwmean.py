"""Variational means of commuting positive matrix pairs.

For commuting positive definite A, B the geometric mean has the integral
representation

    <x, A#B x> = integral of <x, (t A^{-1} + (1-t) B^{-1})^{-1} x> dmu(t)

against the arcsine-type probability measure mu, which per joint eigenvalue
pair (a, b) reduces to the scalar identity

    integral of dmu(t) / (t/a + (1-t)/b)  =  sqrt(a b).

``pw_primal`` discretizes this directly.  ``pw_dual`` evaluates the companion
lower form: eliminating the pointwise variable of the variational problem by
its stationarity condition leaves, per eigenvalue, the multiplier expression

    sigma = integral of b dmu(t) / (t b + (1-t) a),    value = b |y~|^2 / sigma,

and sigma * (quadrature of the primal integrand) = a b holds exactly node by
node, so primal and dual bracket the true value ever tighter as the grid is
refined.  ``alpha_mean`` replaces mu by the weight t^{-alpha} (1-t)^{alpha-1}
(normalized numerically) and produces the weighted mean a^{1-alpha} b^alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .numkit import QuadGrid, as_matrix, hermitian_eig

__all__ = [
    "CommutingPair",
    "alpha_mean",
    "alpha_normalization",
    "geomean_form",
    "pw_dual",
    "pw_primal",
]


@dataclass(frozen=True)
class CommutingPair:
    """A pair of commuting positive definite matrices in a joint eigenbasis.

    basis   : unitary whose columns are joint eigenvectors
    a_eigs  : eigenvalues of A in basis order (strictly positive)
    b_eigs  : eigenvalues of B in basis order (strictly positive)
    """

    basis: np.ndarray
    a_eigs: np.ndarray
    b_eigs: np.ndarray

    def __post_init__(self):
        u = as_matrix(self.basis)
        a = np.asarray(self.a_eigs, dtype=float)
        b = np.asarray(self.b_eigs, dtype=float)
        m = u.shape[0]
        if u.shape != (m, m) or a.shape != (m,) or b.shape != (m,):
            raise ValueError("basis must be m x m with m eigenvalues per matrix")
        defect = float(np.linalg.norm(u.conj().T @ u - np.eye(m)))
        if defect > 1e-10 * m:
            raise ValueError(f"basis is not unitary: ||U*U - I||_F = {defect:.3e}")
        if np.any(a <= 0) or np.any(b <= 0):
            raise ValueError("both matrices must be strictly positive definite")
        object.__setattr__(self, "basis", u)
        object.__setattr__(self, "a_eigs", a)
        object.__setattr__(self, "b_eigs", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def a_matrix(self) -> np.ndarray:
        return (self.basis * self.a_eigs) @ self.basis.conj().T

    def b_matrix(self) -> np.ndarray:
        return (self.basis * self.b_eigs) @ self.basis.conj().T

    @classmethod
    def from_matrices(cls, a, b, tol: float = 1e-10) -> "CommutingPair":
        """Joint-diagonalize commuting Hermitian positive definite A, B.

        Rejects pairs whose commutator norm exceeds tol * ||A||_F ||B||_F.
        Degenerate eigenvalue clusters of A are re-diagonalized in B.
        """
        a = as_matrix(a)
        b = as_matrix(b)
        comm = float(np.linalg.norm(a @ b - b @ a))
        bound = tol * np.linalg.norm(a) * np.linalg.norm(b)
        if comm > bound:
            raise ValueError(
                f"matrices do not commute: ||AB - BA||_F = {comm:.3e} > {bound:.3e}"
            )
        aw, v = hermitian_eig(a)
        bt = v.conj().T @ b @ v
        # within each near-degenerate cluster of A, rotate to diagonalize B
        scale = max(abs(aw[0]), abs(aw[-1]), 1e-300)
        i = 0
        m = len(aw)
        while i < m:
            j = i + 1
            while j < m and aw[j] - aw[j - 1] <= 1e-8 * scale:
                j += 1
            if j - i > 1:
                _, q = hermitian_eig(0.5 * (bt[i:j, i:j] + bt[i:j, i:j].conj().T))
                v[:, i:j] = v[:, i:j] @ q
            i = j
        bw = np.real(np.diag(v.conj().T @ b @ v))
        return cls(v, aw, bw)


def _coords(pair: CommutingPair, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (pair.dim,):
        raise ValueError(f"vector must have shape ({pair.dim},), got {x.shape}")
    return pair.basis.conj().T @ x


def geomean_form(pair: CommutingPair, x) -> float:
    """Exact quadratic form <x, A#B x> = sum sqrt(a_i b_i) |x~_i|^2."""
    xt = _coords(pair, x)
    return float(np.sum(np.sqrt(pair.a_eigs * pair.b_eigs) * np.abs(xt) ** 2))


def pw_primal(pair: CommutingPair, x, grid: QuadGrid) -> float:
    """Quadrature of <x, (t A^{-1} + (1-t) B^{-1})^{-1} x> against mu."""
    xt = _coords(pair, x)
    t = grid.nodes[:, None]
    w = grid.mu_weights[:, None]
    q = np.sum(w / (t / pair.a_eigs + (1.0 - t) / pair.b_eigs), axis=0)
    return float(np.sum(q * np.abs(xt) ** 2))


def pw_dual(pair: CommutingPair, y, grid: QuadGrid, reg: float = 0.0) -> float:
    """Multiplier form of the mean: sum_i b_i |y~_i|^2 / (sigma_i + reg).

    sigma_i = quadrature of b_i/(t b_i + (1-t) a_i) against mu.  Raises
    RuntimeError if some sigma_i + reg is too small to divide by, reporting
    the eigenvalue spread that caused it.
    """
    if reg < 0:
        raise ValueError("reg must be nonnegative")
    yt = _coords(pair, y)
    t = grid.nodes[:, None]
    w = grid.mu_weights[:, None]
    a, b = pair.a_eigs, pair.b_eigs
    sigma = np.sum(w * b / (t * b + (1.0 - t) * a), axis=0)
    denom = sigma + reg
    if np.any(denom < 1e-300):
        spread = float(np.max(a) / np.min(a) * np.max(b) / np.min(b))
        raise RuntimeError(
            f"dual multiplier underflow (eigenvalue spread ~{spread:.1e}); "
            "pass a positive reg"
        )
    return float(np.sum(b * np.abs(yt) ** 2 / denom))


def _alpha_cell_masses(alpha: float, grid: QuadGrid) -> np.ndarray:
    """Exact cell masses of t^{-alpha} (1-t)^{alpha-1} dt on the grid cells.

    Computed through the regularized incomplete beta function; returned
    unnormalized, in units of the full-interval mass.
    """
    return np.diff(betainc(1.0 - alpha, alpha, grid.t_edges))


def alpha_normalization(alpha: float, grid: QuadGrid) -> float:
    """Numerical total mass of the alpha-weight on the grid's region.

    For the full interval this equals 1 in the regularized units used here;
    the corresponding unregularized constant is B(1-alpha, alpha)
    = pi / sin(pi alpha), which tests cross-check by direct quadrature.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(np.sum(_alpha_cell_masses(alpha, grid)))


def alpha_mean(pair: CommutingPair, alpha: float, x, grid: QuadGrid) -> float:
    """Weighted-mean quadratic form, per eigenvalue a^{1-alpha} b^alpha.

    Cell weights are exact masses of t^{-alpha} (1-t)^{alpha-1} dt (via the
    incomplete beta function, so the endpoint singularities cost no accuracy),
    normalized so that scalars a = b = 1 give exactly 1.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    xt = _coords(pair, x)
    masses = _alpha_cell_masses(alpha, grid)
    weights = masses / np.sum(masses)
    t = grid.nodes[:, None]
    w = weights[:, None]
    q = np.sum(w / (t / pair.a_eigs + (1.0 - t) / pair.b_eigs), axis=0)
    return float(np.sum(q * np.abs(xt) ** 2))
