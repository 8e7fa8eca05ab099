"""Gauss-Legendre quadrature with panel subdivision and breakpoint handling.

All integrands are expected to be numpy-vectorized: they receive an ndarray of
abscissae ``t`` of shape ``(nt,)`` and must return an array whose last axis has
length ``nt`` (scalar constants are broadcast).  Array-valued integrands are
integrated component-wise, which lets callers batch many integrals that share
the same abscissae into a single call.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonFiniteIntegrandError

__all__ = [
    "QuadratureRule",
    "IntegrationConfig",
    "gauss_legendre_rule",
    "integrate",
    "integrate_with_breakpoints",
    "PanelGrid",
]

# Relative-difference floor: treats integrals of magnitude below this as zero
# when judging panel-doubling convergence.
_ABS_FLOOR = 1e-300


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a Gauss-Legendre rule on [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class IntegrationConfig:
    """Settings for panel-doubled integration.

    Parameters
    ----------
    order : int
        Points per panel (Gauss-Legendre order), at least 2.
    max_panel_doublings : int
        Maximum number of panel doublings before accepting the last estimate.
    rel_tol : float
        Relative difference between successive refinements that stops the
        doubling.
    grid_panels : int
        Number of uniform panels used for the fixed sampling grid
        (:class:`PanelGrid`) on which representer derivatives are memoized.
    """

    order: int = 64
    max_panel_doublings: int = 6
    rel_tol: float = 1e-12
    grid_panels: int = 8

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")
        if self.rel_tol <= 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_panel_doublings < 0:
            raise ValueError("max_panel_doublings must be non-negative")
        if self.grid_panels < 1:
            raise ValueError("grid_panels must be at least 1")


@lru_cache(maxsize=None)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_rule(order: int) -> QuadratureRule:
    """Return the ``order``-point Gauss-Legendre rule on [-1, 1].

    Deterministic for a given order; nodes are strictly increasing and
    symmetric about zero, weights are positive and sum to 2.
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    x, w = _leggauss(int(order))
    return QuadratureRule(order=int(order), nodes=x, weights=w)


def _panel_nodes(a: float, b: float, panels: int, order: int):
    """Nodes and weights of a composite rule with uniform panels on [a, b]."""
    x, w = _leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _evaluate(f, nodes: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(nodes), dtype=float)
    if vals.ndim == 0:
        vals = np.full(nodes.shape, float(vals))
    if vals.shape[-1] != nodes.shape[0]:
        raise ValueError(
            f"integrand returned shape {vals.shape}, expected last axis {nodes.shape[0]}"
        )
    bad = ~np.isfinite(vals)
    if bad.any():
        j = int(np.nonzero(bad.reshape(-1, nodes.shape[0]).any(axis=0))[0][0])
        raise NonFiniteIntegrandError(nodes[j])
    return vals


def integrate(f, a: float, b: float, cfg: IntegrationConfig = IntegrationConfig()):
    """Integrate ``f`` over [a, b] by panel-doubled Gauss-Legendre quadrature.

    Panels are doubled until two successive estimates differ relatively by
    less than ``cfg.rel_tol`` (with an absolute floor to tolerate zero
    integrals), or ``cfg.max_panel_doublings`` is reached; the last estimate
    is returned.  Scalar integrands yield a float, array-valued integrands an
    ndarray.

    Raises
    ------
    NonFiniteIntegrandError
        If the integrand evaluates to a non-finite value; the offending
        abscissa is attached to the exception.
    """
    if not a < b:
        raise ValueError(f"integration requires a < b, got [{a}, {b}]")
    prev = None
    panels = 1
    for _ in range(cfg.max_panel_doublings + 1):
        nodes, weights = _panel_nodes(a, b, panels, cfg.order)
        est = _evaluate(f, nodes) @ weights
        if prev is not None:
            diff = np.max(np.abs(est - prev))
            scale = max(float(np.max(np.abs(est))), _ABS_FLOOR)
            if diff <= cfg.rel_tol * scale:
                prev = est
                break
        prev = est
        panels *= 2
    return float(prev) if np.ndim(prev) == 0 else prev


def integrate_with_breakpoints(
    f, a: float, b: float, breakpoints, cfg: IntegrationConfig = IntegrationConfig()
):
    """Integrate ``f`` over [a, b], splitting at interior breakpoints.

    The integral is evaluated as the sum of :func:`integrate` over each
    subinterval, so kinks of the integrand can be isolated at subinterval
    boundaries.  With an empty breakpoint list this is exactly
    ``integrate(f, a, b, cfg)``.
    """
    pts = np.atleast_1d(np.asarray(breakpoints, dtype=float))
    if pts.size == 0:
        return integrate(f, a, b, cfg)
    if np.any(np.diff(pts) <= 0):
        raise ValueError(f"breakpoints must be strictly increasing, got {pts}")
    if pts[0] <= a or pts[-1] >= b:
        raise ValueError(f"breakpoints must lie strictly inside ({a}, {b})")
    edges = np.concatenate([[a], pts, [b]])
    total = integrate(f, edges[0], edges[1], cfg)
    for lo, hi in zip(edges[1:-1], edges[2:]):
        total = total + integrate(f, lo, hi, cfg)
    return total


class PanelGrid:
    """Fixed composite Gauss-Legendre grid with polynomial reconstruction.

    The grid partitions [a, b] into uniform panels carrying an ``order``-point
    Gauss-Legendre rule each.  Functions sampled on the grid are treated as
    panelwise polynomials (degree ``order - 1``), which supports three exact
    operations on the interpolant: evaluation anywhere (barycentric form),
    full integration, and integration over a prefix interval [a, y].  The
    prefix integrals are what make kernel pairings with piecewise-linear
    weight factors fast without losing the kink location.
    """

    def __init__(self, a: float, b: float, order: int = 64, panels: int = 8):
        if not a < b:
            raise ValueError(f"PanelGrid requires a < b, got [{a}, {b}]")
        self.a = float(a)
        self.b = float(b)
        self.order = int(order)
        self.panels = int(panels)
        x, w = _leggauss(self.order)
        self.unit_nodes = x
        self.unit_weights = w
        self.edges = np.linspace(self.a, self.b, self.panels + 1)
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])
        self.half_widths = 0.5 * (self.edges[1:] - self.edges[:-1])
        self.nodes = (mid[:, None] + self.half_widths[:, None] * x[None, :]).ravel()
        self.weights = (self.half_widths[:, None] * w[None, :]).ravel()
        # Barycentric weights for Gauss-Legendre nodes (exact up to scale).
        self.barycentric = ((-1.0) ** np.arange(self.order)) * np.sqrt((1 - x**2) * w)

    @property
    def size(self) -> int:
        return self.panels * self.order

    def _panel_of(self, z: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self.edges, z, side="right") - 1, 0, self.panels - 1)

    def _interp_matrix(self, panel: int, z: np.ndarray) -> np.ndarray:
        """Rows map panel samples to interpolant values at points ``z``."""
        mid = 0.5 * (self.edges[panel] + self.edges[panel + 1])
        u = (z - mid) / self.half_widths[panel]
        diff = u[:, None] - self.unit_nodes[None, :]
        hit = np.abs(diff) < 1e-15
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = self.barycentric[None, :] / diff
            M = coef / coef.sum(axis=1, keepdims=True)
        rows = hit.any(axis=1)
        if rows.any():
            M[rows] = hit[rows].astype(float)
        return M

    def interpolate(self, samples: np.ndarray, z) -> np.ndarray:
        """Evaluate the panelwise interpolant of ``samples`` at points ``z``.

        ``samples`` has shape ``(..., panels * order)``; the result has shape
        ``(..., len(z))``.
        """
        samples = np.asarray(samples, dtype=float)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        S = samples.reshape(samples.shape[:-1] + (self.panels, self.order))
        out = np.empty(samples.shape[:-1] + z.shape)
        panel = self._panel_of(z)
        for k in np.unique(panel):
            sel = panel == k
            M = self._interp_matrix(int(k), z[sel])
            out[..., sel] = S[..., k, :] @ M.T
        return out

    def integral(self, samples: np.ndarray) -> np.ndarray:
        """Integral of the interpolant over the whole interval."""
        return np.asarray(samples, dtype=float) @ self.weights

    def prefix_integral(self, samples: np.ndarray, ys) -> np.ndarray:
        """Integral of the interpolant over [a, y] for each y in ``ys``.

        Full panels left of y use the precomputed panel sums; the partial
        panel is re-quadratured by mapping the unit rule onto [edge, y] and
        evaluating the panel interpolant there, which is exact for the
        panelwise polynomial.
        """
        samples = np.asarray(samples, dtype=float)
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        S = samples.reshape(samples.shape[:-1] + (self.panels, self.order))
        panel_sums = (S @ self.unit_weights) * self.half_widths
        csum = np.concatenate(
            [np.zeros(panel_sums.shape[:-1] + (1,)), np.cumsum(panel_sums, axis=-1)],
            axis=-1,
        )
        out = np.empty(samples.shape[:-1] + ys.shape)
        panel = self._panel_of(ys)
        for j, (y, k) in enumerate(zip(ys, panel)):
            lo = self.edges[k]
            half = 0.5 * (y - lo)
            sub = (0.5 * (y + lo)) + half * self.unit_nodes
            M = self._interp_matrix(int(k), sub)
            vals = S[..., k, :] @ M.T
            out[..., j] = csum[..., k] + (vals @ self.unit_weights) * half
        return out
