"""Construction and evaluation of the representers of the collocation
functionals.

Each collocation functional f -> integral of k_l(x_{l,i}, t) f(t) dt is
represented in the working space by a function eta_{l,i} whose second
derivative is the kernel-weighted integral of the evaluation kernel's second
derivative.  Closed forms registered on the problem are used when available;
otherwise the integrals are evaluated by breakpoint-aware quadrature and
memoized on a fixed sampling grid shared with the Gram assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import IntegrationConfig, PanelGrid, integrate_with_breakpoints
from .rkhs import BoundaryValues, Interval, kernel_pair_integral, reproducing_kernel_second

__all__ = ["ProblemSpec", "RieszBasis", "representer_second", "representer_value", "build_basis"]


@dataclass(frozen=True)
class ProblemSpec:
    """Description of one overdetermined collocation system.

    Parameters
    ----------
    iv : Interval
        Integration interval [a, b] of the unknown function.
    bv : BoundaryValues
        Prescribed endpoint values of the solution.
    kernels : tuple of callables
        One bivariate kernel ``k(x, t)`` per equation, numpy-vectorized.
    nodes : tuple of ndarrays
        Collocation nodes per equation.
    collocation_ranges : tuple of (float, float)
        Admissible node range per equation.
    rhs_exact : ndarray, optional
        Exact data at the nodes, block order.
    rhs_funcs : tuple of callables, optional
        Exact data as functions of x (used by projection-style baselines).
    analytic_second, analytic_value : tuples of callables, optional
        Closed forms ``(x, z) -> eta''`` and ``(x, y) -> eta`` per equation;
        ``None`` entries fall back to quadrature.
    analytic_shift : tuple of callables, optional
        Closed-form shift amount per equation (forward image of the boundary
        lift plus any data offset), subtracted from raw data.
    data_offset : tuple of callables, optional
        Additive data correction per equation that is independent of the
        boundary lift (e.g. an analytic tail of a truncated domain).
    truth : callable, optional
        Exact solution, when known.
    truth_breakpoints : tuple of floats
        Kink/jump locations of the truth, declared to data-generating
        quadrature.
    """

    iv: Interval
    bv: BoundaryValues
    kernels: tuple
    nodes: tuple
    collocation_ranges: tuple = ()
    rhs_exact: np.ndarray | None = None
    rhs_funcs: tuple | None = None
    analytic_second: tuple | None = None
    analytic_value: tuple | None = None
    analytic_shift: tuple | None = None
    data_offset: tuple | None = None
    truth: object = None
    truth_breakpoints: tuple = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(np.asarray(x, dtype=float) for x in self.nodes))
        if len(self.kernels) != len(self.nodes):
            raise ValueError("kernels and nodes must have one entry per equation")
        if len(self.nodes) == 0:
            raise ValueError("at least one equation is required")
        for ell, xs in enumerate(self.nodes):
            if xs.size < 1:
                raise ValueError(f"equation {ell + 1} has no collocation nodes")
            if self.collocation_ranges:
                c, d = self.collocation_ranges[ell]
                if np.any(xs < c) or np.any(xs > d):
                    raise ValueError(
                        f"equation {ell + 1} nodes outside collocation range [{c}, {d}]"
                    )
        if self.rhs_exact is not None:
            rhs = np.asarray(self.rhs_exact, dtype=float)
            if rhs.shape != (self.size,):
                raise ValueError(f"rhs_exact has shape {rhs.shape}, expected ({self.size},)")
            object.__setattr__(self, "rhs_exact", rhs)

    @property
    def m(self) -> int:
        """Number of equations."""
        return len(self.kernels)

    @property
    def block_sizes(self) -> tuple:
        return tuple(len(xs) for xs in self.nodes)

    @property
    def size(self) -> int:
        """Total number of collocation functionals across all equations."""
        return sum(self.block_sizes)

    @property
    def block_slices(self) -> tuple:
        offsets = np.concatenate([[0], np.cumsum(self.block_sizes)])
        return tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))

    def index_of(self, ell: int, i: int) -> int:
        """Flat 1-based index j = i + N_{ell-1} of node i of equation ell."""
        if not 1 <= ell <= self.m:
            raise ValueError(f"equation index {ell} out of range 1..{self.m}")
        if not 1 <= i <= self.block_sizes[ell - 1]:
            raise ValueError(f"node index {i} out of range 1..{self.block_sizes[ell - 1]}")
        return i + sum(self.block_sizes[: ell - 1])

    def block_of(self, j: int) -> tuple:
        """Inverse of :meth:`index_of`: flat 1-based j -> (ell, i)."""
        if not 1 <= j <= self.size:
            raise ValueError(f"flat index {j} out of range 1..{self.size}")
        for ell, sl in enumerate(self.block_slices, start=1):
            if j - 1 < sl.stop:
                return ell, j - sl.start
        raise AssertionError("unreachable")


def _second_integrand(ps: ProblemSpec, ell: int, z: float):
    """Integrand in t of the defining integral of eta'' at a fixed z.

    Returns a matrix-valued function producing one row per node of equation
    ``ell``; the kink sits at t = z.
    """
    xs = ps.nodes[ell - 1]
    kern = ps.kernels[ell - 1]

    def f(t):
        w = reproducing_kernel_second(t, np.full_like(t, z), ps.iv)
        return kern(xs[:, None], t[None, :]) * w[None, :]

    return f


def _second_block_at(ps: ProblemSpec, ell: int, z: float, cfg: IntegrationConfig) -> np.ndarray:
    """eta''_{ell, i}(z) for all nodes i of one equation, by quadrature."""
    bps = [] if z in (ps.iv.a, ps.iv.b) else [float(z)]
    return np.atleast_1d(
        integrate_with_breakpoints(_second_integrand(ps, ell, z), ps.iv.a, ps.iv.b, bps, cfg)
    )


def representer_second(
    ps: ProblemSpec,
    ell: int,
    i: int,
    z,
    cfg: IntegrationConfig = IntegrationConfig(),
    force_quadrature: bool = False,
):
    """Second derivative eta''_{ell,i}(z) of one representer.

    Uses the problem's registered closed form when available, otherwise
    integrates the kernel against the evaluation kernel's second derivative
    over t, with the kink at t = z declared as a breakpoint.  Indices
    ``ell`` and ``i`` are 1-based.
    """
    ps.index_of(ell, i)
    ps.iv.require(np.asarray(z, dtype=float), "z")
    x = ps.nodes[ell - 1][i - 1]
    analytic = None if ps.analytic_second is None else ps.analytic_second[ell - 1]
    if analytic is not None and not force_quadrature:
        out = np.asarray(analytic(x, np.asarray(z, dtype=float)), dtype=float)
        return float(out) if out.ndim == 0 else out
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.array([_second_block_at(ps, ell, zz, cfg)[i - 1] for zz in z_arr])
    return float(out[0]) if np.ndim(z) == 0 else out


def representer_value(
    ps: ProblemSpec,
    ell: int,
    i: int,
    y,
    cfg: IntegrationConfig = IntegrationConfig(),
    force_quadrature: bool = False,
):
    """Value eta_{ell,i}(y) of one representer.

    Uses the registered closed form when available; otherwise evaluates the
    nested quadrature: the outer integral over z carries a breakpoint at
    z = y, and eta'' inside is itself obtained as in
    :func:`representer_second`.  Vanishes at both endpoints.
    """
    ps.index_of(ell, i)
    ps.iv.require(np.asarray(y, dtype=float), "y")
    x = ps.nodes[ell - 1][i - 1]
    analytic = None if ps.analytic_value is None else ps.analytic_value[ell - 1]
    if analytic is not None and not force_quadrature:
        out = np.asarray(analytic(x, np.asarray(y, dtype=float)), dtype=float)
        return float(out) if out.ndim == 0 else out
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))

    def value_at(yy: float) -> float:
        def outer(z):
            w = reproducing_kernel_second(np.full_like(z, yy), z, ps.iv)
            sec = np.array(
                [
                    representer_second(ps, ell, i, zz, cfg, force_quadrature=force_quadrature)
                    for zz in z
                ]
            )
            return w * sec

        bps = [] if yy in (ps.iv.a, ps.iv.b) else [float(yy)]
        return float(integrate_with_breakpoints(outer, ps.iv.a, ps.iv.b, bps, cfg))

    out = np.array([value_at(yy) for yy in y_arr])
    return float(out[0]) if np.ndim(y) == 0 else out


class RieszBasis:
    """All representers of a problem with memoized second derivatives.

    The second derivatives are sampled once on a fixed composite
    Gauss-Legendre grid; Gram assembly, norm evaluation and solution
    evaluation all reuse those samples.  Closed-form representers are sampled
    from their formulas, the rest by quadrature, vectorized over the nodes of
    each equation.  Instances are immutable after construction and safe to
    share across threads.
    """

    def __init__(self, spec: ProblemSpec, cfg: IntegrationConfig = IntegrationConfig()):
        self.spec = spec
        self.cfg = cfg
        self.grid = PanelGrid(spec.iv.a, spec.iv.b, cfg.order, cfg.grid_panels)
        blocks = []
        for ell in range(1, spec.m + 1):
            xs = spec.nodes[ell - 1]
            analytic = None if spec.analytic_second is None else spec.analytic_second[ell - 1]
            if analytic is not None:
                blocks.append(np.asarray(analytic(xs[:, None], self.grid.nodes[None, :]), dtype=float))
            else:
                cols = [_second_block_at(spec, ell, z, cfg) for z in self.grid.nodes]
                blocks.append(np.column_stack(cols))
        self.second_samples = np.vstack(blocks)
        self._value_cache: dict = {}

    @property
    def size(self) -> int:
        return self.spec.size

    def index_of(self, ell: int, i: int) -> int:
        return self.spec.index_of(ell, i)

    def block_of(self, j: int) -> tuple:
        return self.spec.block_of(j)

    def eval_second(self, j: int, z):
        """eta''_j at z (flat 1-based j): closed form or grid interpolant."""
        ell, i = self.spec.block_of(j)
        analytic = None if self.spec.analytic_second is None else self.spec.analytic_second[ell - 1]
        if analytic is not None:
            x = self.spec.nodes[ell - 1][i - 1]
            out = np.asarray(analytic(x, np.asarray(z, dtype=float)), dtype=float)
        else:
            out = self.grid.interpolate(self.second_samples[j - 1], z)
            out = out if np.ndim(z) else out[0]
        return float(out) if np.ndim(out) == 0 else out

    def eval_value(self, j: int, y):
        """eta_j at y (flat 1-based j): closed form or kernel pairing."""
        ell, i = self.spec.block_of(j)
        analytic = None if self.spec.analytic_value is None else self.spec.analytic_value[ell - 1]
        if analytic is not None:
            x = self.spec.nodes[ell - 1][i - 1]
            out = np.asarray(analytic(x, np.asarray(y, dtype=float)), dtype=float)
            return float(out) if out.ndim == 0 else out
        out = kernel_pair_integral(self.grid, self.second_samples[j - 1], y)
        return float(out[0]) if np.ndim(y) == 0 else out

    def values_on(self, ys) -> np.ndarray:
        """Matrix of representer values, shape ``(len(ys), size)``.

        Cached per evaluation grid; columns follow the flat block order.
        """
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        self.spec.iv.require(ys, "grid point")
        key = ys.tobytes()
        cached = self._value_cache.get(key)
        if cached is not None:
            return cached
        cols = np.empty((ys.size, self.size))
        for ell, sl in enumerate(self.spec.block_slices, start=1):
            analytic = None if self.spec.analytic_value is None else self.spec.analytic_value[ell - 1]
            if analytic is not None:
                xs = self.spec.nodes[ell - 1]
                cols[:, sl] = np.asarray(analytic(xs[None, :], ys[:, None]), dtype=float)
            else:
                cols[:, sl] = kernel_pair_integral(self.grid, self.second_samples[sl], ys).T
        self._value_cache[key] = cols
        return cols


def build_basis(ps: ProblemSpec, cfg: IntegrationConfig = IntegrationConfig()) -> RieszBasis:
    """Construct the representer basis for a problem."""
    return RieszBasis(ps, cfg)
