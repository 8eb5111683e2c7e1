"""Moment combinatorics and a truncated Fock-space model for semicircular families.

Even mixed moments of a semicircular family factor over non-crossing pair
partitions: the m-th joint moment of letters w_1 ... w_m is the sum over all
non-crossing pairings of products of the two-letter covariances.  The same
numbers arise as vacuum expectation values of sums of creation and
annihilation operators on the full Fock space; truncating the Fock space at
word length L reproduces every moment of order <= 2L exactly, so the two
routes cross-check each other.

The letter space carries a covariance kernel C; the model maps it
isometrically onto the standard orthonormal Fock space via the positive
square root C^(1/2), so creation by h acts with coefficient vector C^(1/2) h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .numkit import QuadGrid, as_matrix

__all__ = [
    "CovarianceForm",
    "PairPartition",
    "TruncatedFock",
    "arcsine_orthonormal_family",
    "build_semicircular",
    "catalan",
    "covariance_from_densities",
    "enumerate_ncp",
    "non_crossing",
    "oh_pairing",
    "speicher_moment",
    "vacuum_moment",
    "voiculescu_check",
]

_MAX_MOMENT = 20


def catalan(k: int) -> int:
    """k-th Catalan number."""
    if k < 0:
        raise ValueError("catalan needs k >= 0")
    return math.comb(2 * k, k) // (k + 1)


def non_crossing(pairs) -> bool:
    """True if no two pairs (i, j), (k, l) interleave as i < k < j < l."""
    ps = sorted(tuple(sorted(p)) for p in pairs)
    for a in range(len(ps)):
        i, j = ps[a]
        for b in range(a + 1, len(ps)):
            k, l = ps[b]
            if i < k < j < l:
                return False
    return True


@dataclass(frozen=True)
class PairPartition:
    """A pairing of {1, ..., m} into m/2 disjoint pairs (1-based, i < j)."""

    m: int
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted((min(i, j), max(i, j)) for i, j in self.pairs))
        flat = sorted(k for p in pairs for k in p)
        if flat != list(range(1, self.m + 1)):
            raise ValueError(f"pairs {pairs} do not partition 1..{self.m}")
        object.__setattr__(self, "pairs", pairs)

    def is_non_crossing(self) -> bool:
        return non_crossing(self.pairs)


@lru_cache(maxsize=None)
def _ncp_zero_based(m: int) -> tuple:
    """All non-crossing pairings of range(m) as tuples of (i, j), 0-based."""
    if m == 0:
        return ((),)
    out = []
    # position 0 pairs with an odd position j so both gaps have even size
    for j in range(1, m, 2):
        for inner in _ncp_zero_based(j - 1):
            inner_shift = tuple((a + 1, b + 1) for a, b in inner)
            for outer in _ncp_zero_based(m - j - 1):
                outer_shift = tuple((a + j + 1, b + j + 1) for a, b in outer)
                out.append(((0, j),) + inner_shift + outer_shift)
    return tuple(out)


def enumerate_ncp(m: int) -> list:
    """All non-crossing pair partitions of {1, ..., m}; empty for odd m.

    The count for even m is the Catalan number C(m/2).  Guarded at m <= 20
    (C(10) = 16796 partitions).
    """
    if int(m) != m or m < 0:
        raise ValueError(f"m must be a nonnegative integer, got {m}")
    if m > _MAX_MOMENT:
        raise ValueError(f"m = {m} exceeds the supported maximum {_MAX_MOMENT}")
    if m % 2 == 1:
        return []
    return [
        PairPartition(m, tuple((i + 1, j + 1) for i, j in pairs))
        for pairs in _ncp_zero_based(m)
    ]


@lru_cache(maxsize=None)
def _ncp_index_arrays(m: int):
    """Left and right pair positions of all pairings, stacked as (P, m/2) arrays."""
    raw = _ncp_zero_based(m)
    left = np.array([[p[0] for p in pairs] for pairs in raw], dtype=np.intp)
    right = np.array([[p[1] for p in pairs] for pairs in raw], dtype=np.intp)
    return left, right


@dataclass(frozen=True)
class CovarianceForm:
    """Two-letter covariance kernel of a semicircular family.

    matrix[i, j] is the joint second moment of letters i and j.  The kernel
    must be positive semidefinite on the real span: the symmetric part of
    the matrix has to be real with nonnegative eigenvalues.
    """

    matrix: np.ndarray

    def __post_init__(self):
        c = as_matrix(self.matrix)
        if c.shape[0] != c.shape[1]:
            raise ValueError("covariance matrix must be square")
        scale = max(1.0, float(np.abs(c).max()))
        sym = 0.5 * (c + c.T)
        if float(np.abs(sym.imag).max(initial=0.0)) > 1e-10 * scale:
            raise ValueError("covariance energy of real combinations is not real")
        eigs = np.linalg.eigvalsh(sym.real)
        if eigs.size and eigs[0] < -1e-10 * scale:
            raise ValueError(
                f"covariance is not positive semidefinite on the real span "
                f"(least eigenvalue {eigs[0]:.3e})"
            )
        object.__setattr__(self, "matrix", c)

    @property
    def index_dim(self) -> int:
        return self.matrix.shape[0]

    def pair_value(self, i: int, j: int) -> complex:
        n = self.index_dim
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"letter indices must lie in [0, {n}), got ({i}, {j})")
        return complex(self.matrix[i, j])

    @classmethod
    def diagonal(cls, variances) -> "CovarianceForm":
        v = np.asarray(variances, dtype=float)
        return cls(np.diag(v).astype(complex))


def speicher_moment(cov: CovarianceForm, word) -> complex:
    """Joint moment of the letters in ``word`` by summing over pairings.

    Sums, over all non-crossing pair partitions of the positions, the
    products of pair_value at the paired letters; odd lengths give 0.
    """
    word = np.asarray(word, dtype=np.intp)
    if word.ndim != 1:
        raise ValueError("word must be a flat index sequence")
    m = word.shape[0]
    if m == 0:
        return 1.0 + 0.0j
    if m > _MAX_MOMENT:
        raise ValueError(f"word length {m} exceeds the supported maximum {_MAX_MOMENT}")
    n = cov.index_dim
    if np.any(word < 0) or np.any(word >= n):
        raise ValueError(f"word letters must lie in [0, {n})")
    if m % 2 == 1:
        return 0.0 + 0.0j
    left, right = _ncp_index_arrays(m)
    vals = cov.matrix[word[left], word[right]]
    return complex(np.sum(np.prod(vals, axis=1)))


def covariance_from_densities(fns, grid: QuadGrid, d1, d2) -> CovarianceForm:
    """Covariance of the family with pair kernel

        C[i, j] = integral (f_i conj(f_j) d1 + conj(f_i) f_j d2) dmu.

    fns are callables of t or arrays of node values; d1, d2 are nonnegative
    density node values against mu.
    """

    def node_values(obj):
        return np.asarray(obj(grid.nodes) if callable(obj) else obj, dtype=complex)

    rows = [node_values(f) for f in fns]
    for r in rows:
        if r.shape != grid.nodes.shape:
            raise ValueError("density functions must match the grid node count")
    fmat = np.vstack(rows)
    d1v = np.asarray(d1(grid.nodes) if callable(d1) else d1, dtype=float)
    d2v = np.asarray(d2(grid.nodes) if callable(d2) else d2, dtype=float)
    if np.any(d1v < 0) or np.any(d2v < 0):
        raise ValueError("densities d1, d2 must be nonnegative")
    w = grid.mu_weights
    c = (fmat * (d1v * w)) @ fmat.conj().T + (fmat.conj() * (d2v * w)) @ fmat.T
    return CovarianceForm(c)


def oh_pairing(f, g, grid: QuadGrid, d1, d2) -> complex:
    """Bilinear pairing integral f g sqrt(d1 d2) dmu (no conjugation)."""

    def node_values(obj, kind=complex):
        return np.asarray(obj(grid.nodes) if callable(obj) else obj, dtype=kind)

    fv = node_values(f)
    gv = node_values(g)
    d1v = node_values(d1, float)
    d2v = node_values(d2, float)
    if np.any(d1v < 0) or np.any(d2v < 0):
        raise ValueError("densities d1, d2 must be nonnegative")
    return complex(np.sum(fv * gv * np.sqrt(d1v * d2v) * grid.mu_weights))


def arcsine_orthonormal_family(count: int) -> list:
    """First ``count`` members of an orthonormal family in L2(mu).

    phi_0 = 1 and phi_k(t) = sqrt(2) cos(2 k arcsin(sqrt(t))); in the
    theta-substitution these are plain cosines, so the family is exactly
    orthonormal for mu.
    """
    if count < 1:
        raise ValueError("count must be >= 1")

    def make(k):
        if k == 0:
            return lambda t: np.ones_like(np.asarray(t, dtype=float))
        return lambda t: math.sqrt(2.0) * np.cos(2.0 * k * np.arcsin(np.sqrt(t)))

    return [make(k) for k in range(count)]


# ---------------------------------------------------------------------------
# truncated Fock model


@dataclass(frozen=True)
class TruncatedFock:
    """Words of length <= depth over index_dim letters with covariance cov.

    The basis consists of all words over {0, ..., index_dim - 1} ordered by
    length and then lexicographically; word_at / index_of convert between
    words and basis positions.  cov.matrix must be Hermitian positive
    semidefinite here, since it serves as the Gram matrix of the letters.
    """

    index_dim: int
    depth: int
    cov: CovarianceForm

    def __post_init__(self):
        n, depth = int(self.index_dim), int(self.depth)
        if n < 1 or depth < 0:
            raise ValueError("need index_dim >= 1 and depth >= 0")
        if n != self.cov.index_dim:
            raise ValueError(
                f"covariance is over {self.cov.index_dim} letters, expected {n}"
            )
        c = self.cov.matrix
        if float(np.linalg.norm(c - c.conj().T)) > 1e-10 * max(1.0, float(np.abs(c).max())):
            raise ValueError("letter Gram matrix must be Hermitian")
        evals, evecs = np.linalg.eigh(c)
        if evals[0] < -1e-12 * max(1.0, evals[-1]):
            raise ValueError("letter Gram matrix must be positive semidefinite")
        w_factor = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
        sizes = [n ** l for l in range(depth + 1)]
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        dim = int(offsets[-1])
        if dim > 5e7:
            raise ValueError(
                f"truncated space would need {dim} basis words; lower depth or index_dim"
            )
        # creation edges: prepending letter k maps the level-l block onto the
        # stride-n^l slice of level l+1
        rows, cols, letters = [], [], []
        for l in range(depth):
            parents = offsets[l] + np.arange(sizes[l])
            for k in range(n):
                rows.append(offsets[l + 1] + k * sizes[l] + np.arange(sizes[l]))
                cols.append(parents)
                letters.append(np.full(sizes[l], k, dtype=np.intp))
        object.__setattr__(self, "index_dim", n)
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "_w_factor", w_factor)
        object.__setattr__(self, "_offsets", offsets)
        object.__setattr__(self, "_dim", dim)
        object.__setattr__(self, "_rows", np.concatenate(rows) if rows else np.empty(0, np.intp))
        object.__setattr__(self, "_cols", np.concatenate(cols) if cols else np.empty(0, np.intp))
        object.__setattr__(self, "_letters", np.concatenate(letters) if letters else np.empty(0, np.intp))

    @property
    def dim(self) -> int:
        """Number of basis words, (n^(depth+1) - 1)/(n - 1)."""
        return self._dim

    def index_of(self, word) -> int:
        word = tuple(int(k) for k in word)
        if len(word) > self.depth:
            raise ValueError(f"word longer than depth {self.depth}")
        idx = 0
        for k in word:
            if not 0 <= k < self.index_dim:
                raise ValueError(f"letter {k} out of range")
            idx = idx * self.index_dim + k
        return int(self._offsets[len(word)] + idx)

    def word_at(self, index: int) -> tuple:
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} out of range [0, {self.dim})")
        l = int(np.searchsorted(self._offsets, index, side="right") - 1)
        rem = index - int(self._offsets[l])
        word = []
        for _ in range(l):
            word.append(rem % self.index_dim)
            rem //= self.index_dim
        return tuple(reversed(word))

    def basis_words(self):
        """Iterate all basis words in index order."""
        for i in range(self.dim):
            yield self.word_at(i)


def build_semicircular(fock: TruncatedFock, h) -> sp.csr_matrix:
    """Sparse matrix of s(h) = creation(h) + annihilation(h) on the model.

    h is a coefficient vector over the letters; its image under the positive
    square root of the Gram matrix gives the coefficients in the orthonormal
    frame, one per creation edge.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (fock.index_dim,):
        raise ValueError(f"h must have shape ({fock.index_dim},), got {h.shape}")
    coeff = fock._w_factor @ h
    data = coeff[fock._letters]
    cr = sp.csr_matrix((data, (fock._rows, fock._cols)), shape=(fock.dim, fock.dim))
    return (cr + cr.conj().T).tocsr()


def vacuum_moment(fock: TruncatedFock, ops) -> complex:
    """Vacuum expectation <vac, op_1 ... op_k vac> of a product of operators."""
    v = np.zeros(fock.dim, dtype=complex)
    v[0] = 1.0
    for op in reversed(list(ops)):
        if op.shape != (fock.dim, fock.dim):
            raise ValueError(f"operator shape {op.shape} does not match dim {fock.dim}")
        v = op @ v
    return complex(v[0])


def _sym_spectral_norm(s, seed: int = 0) -> float:
    """Largest |eigenvalue| of a sparse Hermitian matrix, deterministically."""
    dim = s.shape[0]
    if dim <= 16:
        # too small for a Lanczos solve; sp.csr_matrix.toarray is exact here
        return float(np.max(np.abs(np.linalg.eigvalsh(s.toarray()))))
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim)
    try:
        vals = eigsh(s, k=1, which="LM", v0=v0, return_eigenvectors=False, tol=1e-12)
        return float(abs(vals[0]))
    except Exception:
        # power iteration on s^2 as a fallback
        v = v0 / np.linalg.norm(v0)
        lam = 0.0
        for _ in range(1000):
            w = s @ (s @ v)
            nrm = float(np.linalg.norm(w))
            if nrm == 0.0:
                return 0.0
            v = w / nrm
            if abs(nrm - lam) <= 1e-13 * max(1.0, nrm):
                lam = nrm
                break
            lam = nrm
        return math.sqrt(lam)


def voiculescu_check(n: int, cov: CovarianceForm, depth: int, seed: int = 0):
    """Truncated norm of a sum of free semicirculars against its additive cap.

    Requires a diagonal covariance (off-diagonal correlations would break
    freeness of the letters).  Returns (lhs, rhs) with

        lhs = || sum_k s(e_k) ||  on the depth-truncated model,
        rhs = max_k 2 sqrt(v_k) + 2 sqrt(sum_k v_k),

    where v_k are the letter variances.  lhs <= rhs always; for unit
    variances lhs equals 2 sqrt(n) cos(pi/(depth + 2)) exactly.
    """
    if cov.index_dim != n:
        raise ValueError(f"covariance is over {cov.index_dim} letters, expected {n}")
    c = cov.matrix
    off = c - np.diag(np.diag(c))
    if float(np.abs(off).max(initial=0.0)) > 1e-12 * max(1.0, float(np.abs(c).max())):
        raise ValueError("voiculescu_check needs a diagonal covariance (free letters)")
    v = np.real(np.diag(c))
    if np.any(v < 0):
        raise ValueError("variances must be nonnegative")
    fock = TruncatedFock(n, depth, cov)
    s = build_semicircular(fock, np.ones(n))
    lhs = _sym_spectral_norm(s, seed=seed)
    rhs = 2.0 * math.sqrt(float(v.max(initial=0.0))) + 2.0 * math.sqrt(float(v.sum()))
    return lhs, rhs
