"""Gram matrix of the representers, its spectral factorization, and the
positivity cutoff that guards against round-off eigenvalues.

The inner product of two representers is the integral of the product of their
second derivatives, evaluated on the shared sampling grid of the basis so the
whole matrix is assembled as one weighted product.  The matrix is severely
ill-conditioned by nature; downstream code therefore works with the
eigendecomposition rather than any triangular factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProblemError
from .quadrature import IntegrationConfig
from .riesz import RieszBasis

__all__ = ["GramFactorization", "assemble_gram", "spectral_factorize", "positivity_cutoff"]


@dataclass(frozen=True)
class GramFactorization:
    """Spectral factorization of a symmetric Gram matrix.

    Attributes
    ----------
    matrix : ndarray
        The symmetric matrix that was factorized (stored as given).
    eigenvalues : ndarray
        Eigenvalues sorted by decreasing value.
    eigenvectors : ndarray
        Orthonormal eigenvectors as columns, matching ``eigenvalues``; each
        column is sign-fixed so its largest-magnitude component is positive.
    cutoff : int
        Positivity cutoff N: number of leading eigenvalues accepted as
        positive.
    cond_estimate : float
        lambda_1 / |lambda_min| (inf when the smallest eigenvalue vanishes).
    negative_tail : bool
        True when the smallest eigenvalue is non-positive, i.e. the
        condition estimate refers to a sign-flipped magnitude.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cutoff: int
    cond_estimate: float
    negative_tail: bool

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def N(self) -> int:
        """Alias for the positivity cutoff."""
        return self.cutoff


def assemble_gram(basis: RieszBasis, cfg: IntegrationConfig | None = None) -> np.ndarray:
    """Assemble the symmetric matrix of pairwise inner products.

    Entry (p, q) is the integral of the product of the memoized second
    derivatives of representers p and q on the basis sampling grid.  The
    result is explicitly symmetrized: quadrature round-off breaks exact
    symmetry and symmetric eigensolvers require it.

    ``cfg`` overrides the grid resolution (a fresh sampling pass is run when
    it differs from the basis configuration).
    """
    if cfg is not None and cfg != basis.cfg:
        basis = RieszBasis(basis.spec, cfg)
    S = basis.second_samples
    G = (S * basis.grid.weights) @ S.T
    return 0.5 * (G + G.T)


def spectral_factorize(G: np.ndarray, rel_threshold: float = 0.0) -> GramFactorization:
    """Factorize a symmetric matrix into sign-fixed, descending eigenpairs.

    Parameters
    ----------
    G : ndarray
        Symmetric matrix with finite entries.
    rel_threshold : float
        Relative positivity threshold passed to :func:`positivity_cutoff`;
        the default keeps every strictly positive eigenvalue.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {G.shape}")
    if not np.isfinite(G).all():
        raise ValueError("matrix contains non-finite entries")
    if not np.array_equal(G, G.T):
        raise ValueError("matrix must be symmetric as stored")
    lam, U = np.linalg.eigh(G)
    lam = lam[::-1].copy()
    U = U[:, ::-1].copy()
    # Deterministic sign convention: largest-magnitude component positive.
    lead = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[lead, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U *= signs
    N = positivity_cutoff(lam, rel_threshold=rel_threshold)
    tail = lam[-1]
    if tail == 0.0:
        cond = np.inf
    else:
        cond = float(lam[0] / abs(tail))
    return GramFactorization(
        matrix=G,
        eigenvalues=lam,
        eigenvectors=U,
        cutoff=N,
        cond_estimate=cond,
        negative_tail=bool(tail <= 0.0),
    )


def positivity_cutoff(eigenvalues, rel_threshold: float = 0.0) -> int:
    """Largest N such that the leading N eigenvalues exceed the threshold.

    The sequence must be sorted in decreasing order.  The default threshold
    of zero keeps every strictly positive eigenvalue; a relative policy
    ``lambda > rel_threshold * lambda_1`` can be selected instead.

    Raises
    ------
    DegenerateProblemError
        If the largest eigenvalue is not positive.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0 or lam[0] <= 0.0:
        raise DegenerateProblemError("no positive eigenvalue: degenerate Gram matrix")
    threshold = rel_threshold * lam[0]
    return int(np.sum(lam > threshold))
