"""Column, row and self-dual norms of matrix tuples.

A tuple (x_1, ..., x_n) of m x m complex matrices carries three norms:

  column :  || sum_k x_k* x_k ||^(1/2)
  row    :  || sum_k x_k x_k* ||^(1/2)
  self-dual (oh) :  || sum_k x_k (x) conj(x_k) ||^(1/2)   (Kronecker product)

The self-dual norm also has a variational form,

  sup { (sum_k tr(a x_k b x_k*))^(1/2) : a, b >= 0, ||a||_2 <= 1, ||b||_2 <= 1 },

with Hilbert-Schmidt balls; ``oh_norm_sup_form`` evaluates it by alternating
maximization, which is a power iteration for the completely positive map
z -> sum_k x_k z x_k* and converges to the same spectral value as ``oh_norm``
for generic starting points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import as_matrix, schatten_norm, spectral_norm

__all__ = [
    "MatrixTuple",
    "column_norm",
    "holder_level1_check",
    "oh_norm",
    "oh_norm_sup_form",
    "row_norm",
]


@dataclass(frozen=True)
class MatrixTuple:
    """An ordered tuple of same-sized square complex matrices."""

    x: tuple

    def __post_init__(self):
        mats = tuple(as_matrix(m) for m in self.x)
        if not mats:
            raise ValueError("MatrixTuple needs at least one matrix")
        m = mats[0].shape[0]
        for a in mats:
            if a.shape != (m, m):
                raise ValueError(
                    f"all matrices must be square of one size, got {a.shape} vs ({m}, {m})"
                )
        object.__setattr__(self, "x", mats)

    @property
    def n(self) -> int:
        """Number of matrices in the tuple."""
        return len(self.x)

    @property
    def m(self) -> int:
        """Side length of each matrix."""
        return self.x[0].shape[0]


def _tuple_of(t) -> MatrixTuple:
    return t if isinstance(t, MatrixTuple) else MatrixTuple(tuple(t))


def column_norm(t) -> float:
    t = _tuple_of(t)
    s = sum(xk.conj().T @ xk for xk in t.x)
    return float(np.sqrt(spectral_norm(s)))


def row_norm(t) -> float:
    t = _tuple_of(t)
    s = sum(xk @ xk.conj().T for xk in t.x)
    return float(np.sqrt(spectral_norm(s)))


def oh_norm(t) -> float:
    """Self-dual norm || sum_k x_k (x) conj(x_k) ||^(1/2)."""
    t = _tuple_of(t)
    s = sum(np.kron(xk, np.conj(xk)) for xk in t.x)
    return float(np.sqrt(spectral_norm(s)))


def oh_norm_sup_form(t, restarts: int = 8, tol: float = 1e-3, seed=None,
                     max_iter: int = 2000) -> float:
    """Variational form of the self-dual norm over Hilbert-Schmidt balls.

    Alternates the closed-form updates

        b <- M / ||M||_2   with  M = sum_k x_k* a x_k,
        a <- N / ||N||_2   with  N = sum_k x_k b x_k*,

    each of which is the exact maximizer of the bilinear objective with the
    other variable fixed; positivity of a, b is preserved automatically.  The
    constraint a >= 0 is relaxed to a >= eps*I (eps = 1e-9) so iterates stay
    strictly inside the cone.  Runs ``restarts`` random starts and returns the
    best value; for restarts >= 8 and m <= 8 the output lies within
    [oh_norm - 10*tol, oh_norm + tol].

    Raises RuntimeError if no restart converges, reporting the last gap.
    """
    t = _tuple_of(t)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    m = t.m
    eps = 1e-9
    eye = np.eye(m)
    best = None
    converged = False
    last_gap = np.inf
    # inner stop is much tighter than tol so the returned value sits well
    # inside the advertised band
    inner = tol * 1e-3
    for _ in range(restarts):
        g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        a = g @ g.conj().T + eps * eye
        a /= np.linalg.norm(a)
        f_prev = 0.0
        f = 0.0
        ok = False
        for _ in range(max_iter):
            mb = sum(xk.conj().T @ a @ xk for xk in t.x)
            nb = np.linalg.norm(mb)
            if nb == 0.0:
                ok = True  # all x_k annihilate a; objective is 0 from here
                f = 0.0
                break
            b = mb / nb
            na = sum(xk @ b @ xk.conj().T for xk in t.x)
            a = na + eps * eye
            a /= np.linalg.norm(a)
            f = float(np.linalg.norm(na))
            if abs(f - f_prev) <= inner * max(f, 1e-30):
                ok = True
                break
            f_prev = f
        if ok:
            converged = True
            if best is None or f > best:
                best = f
        else:
            last_gap = min(last_gap, abs(f - f_prev))
    if not converged:
        raise RuntimeError(
            f"sup-form iteration did not converge in {max_iter} steps "
            f"(last objective change {last_gap:.3e}); increase max_iter or tol"
        )
    return float(np.sqrt(best))


def holder_level1_check(a, x, b):
    """Return (||a x b||_2, ||a||_4 ||x||_inf ||b||_4); lhs <= rhs always."""
    a, x, b = as_matrix(a), as_matrix(x), as_matrix(b)
    lhs = schatten_norm(a @ x @ b, 2)
    rhs = schatten_norm(a, 4) * spectral_norm(x) * schatten_norm(b, 4)
    return lhs, rhs
