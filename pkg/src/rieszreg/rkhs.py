"""The working Hilbert space: functions on [a, b] vanishing at both endpoints
with square-integrable second derivative, normed by the L2 norm of f''.

Point evaluation in this space is represented by a kernel G_y whose second
derivative is piecewise linear with a kink at z = y; everything here is built
from that kernel: evaluation of its second derivative, the kernel values
themselves, reproduction of function values from second derivatives, the
linear lift that absorbs inhomogeneous boundary values, and the corresponding
shift of collocation data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import IntegrationConfig, PanelGrid, integrate_with_breakpoints

__all__ = [
    "Interval",
    "BoundaryValues",
    "reproducing_kernel_second",
    "reproducing_kernel_value",
    "boundary_lift",
    "reproduce_value",
    "kernel_pair_integral",
    "shift_rhs",
]


@dataclass(frozen=True)
class Interval:
    """Closed interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ValueError(f"invalid interval [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    def contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        return bool(np.all((t >= self.a) & (t <= self.b)))

    def require(self, t, name: str = "point"):
        if not self.contains(t):
            raise ValueError(f"{name} outside [{self.a}, {self.b}]")


@dataclass(frozen=True)
class BoundaryValues:
    """Prescribed values f(a) = f0 and f(b) = f1."""

    f0: float
    f1: float

    def __post_init__(self):
        if not (np.isfinite(self.f0) and np.isfinite(self.f1)):
            raise ValueError("boundary values must be finite")


def reproducing_kernel_second(y, z, iv: Interval):
    """Second derivative G_y''(z) of the evaluation kernel at y.

    Piecewise linear in z with a kink at z = y::

        (z - a)(y - b) / (b - a)   for a <= z < y
        (y - a)(z - b) / (b - a)   for y <= z <= b

    Vanishes identically when y is an endpoint.  Vectorized in both
    arguments under broadcasting.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    iv.require(y, "y")
    iv.require(z, "z")
    lower = (z - iv.a) * (y - iv.b)
    upper = (y - iv.a) * (z - iv.b)
    out = np.where(z < y, lower, upper) / iv.width
    return float(out) if out.ndim == 0 else out


def reproducing_kernel_value(
    x: float, y: float, iv: Interval, cfg: IntegrationConfig = IntegrationConfig()
) -> float:
    """Kernel value G(x, y) = integral of G_x''(z) G_y''(z) over [a, b].

    Symmetric in (x, y); the two kinks are declared as quadrature
    breakpoints.
    """
    iv.require(x, "x")
    iv.require(y, "y")
    bps = sorted({float(x), float(y)} - {iv.a, iv.b})
    return float(
        integrate_with_breakpoints(
            lambda z: reproducing_kernel_second(x, z, iv) * reproducing_kernel_second(y, z, iv),
            iv.a,
            iv.b,
            bps,
            cfg,
        )
    )


def boundary_lift(t, iv: Interval, bv: BoundaryValues):
    """Linear function matching the prescribed endpoint values.

    gamma(t) = (b - t)/(b - a) * f0 + (t - a)/(b - a) * f1.
    """
    t = np.asarray(t, dtype=float)
    iv.require(t, "t")
    out = ((iv.b - t) * bv.f0 + (t - iv.a) * bv.f1) / iv.width
    return float(out) if out.ndim == 0 else out


def reproduce_value(
    f_second, y: float, iv: Interval, cfg: IntegrationConfig = IntegrationConfig()
) -> float:
    """Recover f(y) from its second derivative via the evaluation kernel.

    Computes the integral of G_y''(z) f''(z) with a breakpoint at z = y.
    Exact (up to quadrature) for any f in the space, i.e. any f vanishing at
    both endpoints.
    """
    iv.require(y, "y")
    bps = [] if y in (iv.a, iv.b) else [float(y)]
    return float(
        integrate_with_breakpoints(
            lambda z: reproducing_kernel_second(y, z, iv) * np.asarray(f_second(z), dtype=float),
            iv.a,
            iv.b,
            bps,
            cfg,
        )
    )


def kernel_pair_integral(grid: PanelGrid, samples: np.ndarray, ys) -> np.ndarray:
    """Pair grid samples of u with the evaluation kernel: f(y) = int G_y'' u.

    Splitting at the kink gives two prefix-type integrals with linear weight
    factors::

        f(y) = (y-b)/(b-a) * int_a^y (z-a) u dz  +  (y-a)/(b-a) * int_y^b (z-b) u dz

    Both are computed exactly for the panelwise interpolant of ``samples``,
    so the kink never crosses a quadrature panel.  ``samples`` may carry
    leading batch axes; the result has shape ``(..., len(ys))``.
    """
    a, b = grid.a, grid.b
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    samples = np.asarray(samples, dtype=float)
    left = grid.prefix_integral((grid.nodes - a) * samples, ys)
    zb = (grid.nodes - b) * samples
    right = np.expand_dims(grid.integral(zb), -1) - grid.prefix_integral(zb, ys)
    return ((ys - b) * left + (ys - a) * right) / (b - a)


def shift_rhs(ps, g, cfg: IntegrationConfig = IntegrationConfig()) -> np.ndarray:
    """Shift collocation data to the homogeneous-boundary formulation.

    For each equation the shift amount is the forward image of the boundary
    lift plus any problem-specific data offset; closed forms registered on
    the problem are used when available, quadrature otherwise.  With zero
    boundary values and no offset the data is returned unchanged.

    Parameters
    ----------
    ps : ProblemSpec
        Problem description (kernels, nodes, boundary values, optional
        closed-form shift).
    g : ndarray
        Data vector of length ``ps.size`` in block order.

    Returns
    -------
    ndarray
        Shifted data vector, same length and block order.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (ps.size,):
        raise ValueError(f"data vector has shape {g.shape}, expected ({ps.size},)")
    out = g.copy()
    iv, bv = ps.iv, ps.bv
    trivial = bv.f0 == 0.0 and bv.f1 == 0.0
    for ell, sl in enumerate(ps.block_slices):
        nodes = ps.nodes[ell]
        analytic = None if ps.analytic_shift is None else ps.analytic_shift[ell]
        if analytic is not None:
            out[sl] -= np.asarray(analytic(nodes), dtype=float)
            continue
        if ps.data_offset is not None and ps.data_offset[ell] is not None:
            out[sl] -= np.asarray(ps.data_offset[ell](nodes), dtype=float)
        if not trivial:
            kern = ps.kernels[ell]
            lift = lambda t: boundary_lift(t, iv, bv)
            vals = integrate_with_breakpoints(
                lambda t: kern(nodes[:, None], t[None, :]) * lift(t)[None, :],
                iv.a,
                iv.b,
                [],
                cfg,
            )
            out[sl] -= vals
    return out
