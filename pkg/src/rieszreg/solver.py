"""Minimal-norm and truncated-eigendecomposition solutions.

The data vector lives in block order; coefficients are expansions in the
representer basis.  All truncation sweeps operate on the projected data
(eigenvector transposed times data), which is computed once per data vector:
residual norms come from tail sums of the projections, solution norms from
eigenvalue-weighted prefix sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gram import GramFactorization
from .quadrature import IntegrationConfig, integrate_with_breakpoints
from .rkhs import boundary_lift
from .riesz import ProblemSpec, RieszBasis

__all__ = [
    "DataVector",
    "RegularizedSolution",
    "coefficients_full",
    "coefficients_teig",
    "coefficients_teig_pinv",
    "residual_norm",
    "w_norm",
    "w_norm_quadratic",
    "evaluate_solution",
    "solution_sweep",
    "orthonormal_function",
    "apply_forward",
    "solve_at",
]


@dataclass(frozen=True)
class DataVector:
    """Collocation data in block order, optionally tagged with its noise."""

    values: np.ndarray
    label: str = "exact"
    noise_norm: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.label not in ("exact", "noisy"):
            raise ValueError(f"label must be 'exact' or 'noisy', got {self.label!r}")

    @property
    def size(self) -> int:
        return self.values.size


def _values(g) -> np.ndarray:
    return np.asarray(getattr(g, "values", g), dtype=float)


@dataclass(frozen=True)
class RegularizedSolution:
    """A truncated solution: coefficients plus its two natural norms."""

    kappa: int
    coeffs: np.ndarray
    w_norm: float
    residual: float
    basis: RieszBasis

    def evaluate(self, grid) -> np.ndarray:
        return evaluate_solution(self.basis, self.coeffs, grid)

    def to_dict(self, grid=None) -> dict:
        out = {
            "kappa": int(self.kappa),
            "coeffs": [float(c) for c in self.coeffs],
            "w_norm": float(self.w_norm),
            "residual": float(self.residual),
        }
        if grid is not None:
            grid = np.asarray(grid, dtype=float)
            out["grid"] = [float(t) for t in grid]
            out["values"] = [float(v) for v in self.evaluate(grid)]
        return out


def projections(fac: GramFactorization, g) -> np.ndarray:
    """Projected data: eigenvector basis coordinates of the data vector."""
    return fac.eigenvectors.T @ _values(g)


def coefficients_teig(fac: GramFactorization, g, kappa: int) -> np.ndarray:
    """Coefficients of the rank-``kappa`` truncated eigendecomposition solution.

    Sums the leading ``kappa`` eigen-components of the data, each divided by
    its eigenvalue.  Requires ``1 <= kappa <= fac.cutoff``.
    """
    if not 1 <= kappa <= fac.cutoff:
        raise ValueError(f"kappa must be in [1, {fac.cutoff}], got {kappa}")
    proj = projections(fac, g)
    U = fac.eigenvectors[:, :kappa]
    return U @ (proj[:kappa] / fac.eigenvalues[:kappa])


def coefficients_teig_pinv(fac: GramFactorization, g, kappa: int) -> np.ndarray:
    """Same solution through the explicit pseudoinverse of the truncated
    eigenvalue matrix; kept as an independent cross-check of the summed form."""
    if not 1 <= kappa <= fac.cutoff:
        raise ValueError(f"kappa must be in [1, {fac.cutoff}], got {kappa}")
    lam_dag = np.zeros(fac.size)
    lam_dag[:kappa] = 1.0 / fac.eigenvalues[:kappa]
    U = fac.eigenvectors
    return (U * lam_dag) @ (U.T @ _values(g))


def coefficients_full(fac: GramFactorization, g) -> np.ndarray:
    """Coefficients of the untruncated solution.

    The expansion stops at the positivity cutoff rather than the matrix
    size, so round-off eigenvalues of the wrong sign never enter.
    """
    return coefficients_teig(fac, g, fac.cutoff)


def residual_norm(fac: GramFactorization, g, kappa: int) -> float:
    """Euclidean norm of the data residual of the rank-``kappa`` solution.

    Uses the tail-sum identity: the squared residual equals the sum of the
    squared projections with index above ``kappa``.  Monotone non-increasing
    in ``kappa``; zero at full size.
    """
    if not 0 <= kappa <= fac.size:
        raise ValueError(f"kappa must be in [0, {fac.size}], got {kappa}")
    proj = projections(fac, g)
    return float(np.sqrt(np.sum(proj[kappa:] ** 2)))


def w_norm(fac: GramFactorization, coeffs) -> float:
    """Solution norm of a coefficient vector in the working space.

    Computed as the Euclidean norm of the eigenvalue-square-root-weighted
    projections, using only the eigenpairs up to the positivity cutoff.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    N = fac.cutoff
    proj = fac.eigenvectors[:, :N].T @ coeffs
    return float(np.linalg.norm(np.sqrt(fac.eigenvalues[:N]) * proj))


def w_norm_quadratic(fac: GramFactorization, coeffs) -> float:
    """Cross-check form of :func:`w_norm` via the quadratic form c' G c."""
    coeffs = np.asarray(coeffs, dtype=float)
    q = float(coeffs @ fac.matrix @ coeffs)
    return float(np.sqrt(max(q, 0.0)))


def evaluate_solution(basis: RieszBasis, coeffs, grid) -> np.ndarray:
    """Evaluate the solution on a grid: representer expansion plus lift.

    Grid points must lie inside the problem interval.  With zero
    coefficients this returns the boundary lift alone, and the endpoint
    values are met exactly since every representer vanishes there.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    coeffs = np.asarray(coeffs, dtype=float)
    E = basis.values_on(grid)
    lift = boundary_lift(grid, basis.spec.iv, basis.spec.bv)
    return E @ coeffs + lift


def solution_sweep(fac: GramFactorization, basis: RieszBasis, g, grid):
    """All truncated solutions on one grid at once.

    Returns
    -------
    F : ndarray, shape (cutoff, len(grid))
        Row ``k`` holds the rank-(k+1) solution values.
    C : ndarray, shape (size, cutoff)
        Column ``k`` holds the rank-(k+1) coefficient vector.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    proj = projections(fac, g)
    N = fac.cutoff
    C = np.cumsum(
        fac.eigenvectors[:, :N] * (proj[:N] / fac.eigenvalues[:N])[None, :], axis=1
    )
    E = basis.values_on(grid)
    lift = boundary_lift(grid, basis.spec.iv, basis.spec.bv)
    F = C.T @ E.T + lift[None, :]
    return F, C


def orthonormal_function(fac: GramFactorization, basis: RieszBasis, ell: int, y):
    """Value of the ell-th orthonormal (singular) function at y.

    The function is the eigenvalue-normalized eigenvector combination of the
    representers; it is exposed for diagnostics and testing only, the
    regularized solution path never constructs it explicitly.
    """
    if not 1 <= ell <= fac.cutoff:
        raise ValueError(f"ell must be in [1, {fac.cutoff}], got {ell}")
    u = fac.eigenvectors[:, ell - 1] / np.sqrt(fac.eigenvalues[ell - 1])
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = basis.values_on(y_arr) @ u
    return float(out[0]) if np.ndim(y) == 0 else out


def apply_forward(
    ps: ProblemSpec,
    f,
    cfg: IntegrationConfig = IntegrationConfig(),
    breakpoints=(),
) -> np.ndarray:
    """Forward map: collocation functionals applied to a function.

    Computes the integral of ``k_l(x_{l,i}, t) f(t)`` over the interval for
    every equation and node, by direct quadrature, honoring the supplied
    integrand breakpoints.  Returns the block-ordered vector.
    """
    out = np.empty(ps.size)
    for ell, sl in enumerate(ps.block_slices):
        kern = ps.kernels[ell]
        nodes = ps.nodes[ell]
        vals = integrate_with_breakpoints(
            lambda t: kern(nodes[:, None], t[None, :]) * np.asarray(f(t), dtype=float)[None, :],
            ps.iv.a,
            ps.iv.b,
            list(breakpoints),
            cfg,
        )
        out[sl] = np.atleast_1d(vals)
    return out


def solve_at(fac: GramFactorization, basis: RieszBasis, g, kappa: int) -> RegularizedSolution:
    """Bundle the rank-``kappa`` solution with its norms."""
    coeffs = coefficients_teig(fac, g, kappa)
    return RegularizedSolution(
        kappa=int(kappa),
        coeffs=coeffs,
        w_norm=w_norm(fac, coeffs),
        residual=residual_norm(fac, g, kappa),
        basis=basis,
    )
