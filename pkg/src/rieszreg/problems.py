"""Built-in problem suite: two artificial two-equation systems, a
frequency-domain electromagnetic induction (FDEM) conductivity model, and a
box-function Galerkin baseline used for accuracy comparisons.

Closed forms for representers and data shifts are registered wherever they
exist; every registered formula is cross-checked against the quadrature path
by the test suite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from .quadrature import IntegrationConfig, gauss_legendre_rule
from .rkhs import BoundaryValues, Interval
from .riesz import ProblemSpec
from .solver import apply_forward

__all__ = [
    "FdemConfig",
    "TruthProfile",
    "test_problem_1",
    "test_problem_2",
    "truth_profile",
    "fdem_problem",
    "GalerkinBaseline",
    "galerkin_baseline",
    "problem_names",
    "build_problem",
]

_LOG2 = np.log(2.0)
_LOG4 = np.log(4.0)


# ---------------------------------------------------------------------------
# Test problem 1: kernels x/(t+1) and cos(x t) on [0, 1], solution t^2 + 1.
# ---------------------------------------------------------------------------

def _tp1_eta1_second(x, z):
    return x * ((1 - z) * np.log1p(z) - z * np.log(4.0 / (1 + z) ** 2))


def _tp1_eta2_second(x, z):
    return (z * np.cos(x) - np.cos(x * z) - z + 1) / x**2


def _tp1_eta1_value(x, y):
    return (x / 36.0) * (
        6 * (1 + y) ** 3 * np.log1p(y)
        - y * (y**2 * (5 + 12 * _LOG2) + 15 * y + 4 * (9 * _LOG2 - 5))
    )


def _tp1_eta2_value(x, y):
    return y * (y - 1) / (6 * x**2) * ((y + 1) * np.cos(x) - y + 2) + (
        y * (1 - np.cos(x)) - 1 + np.cos(x * y)
    ) / x**4


def test_problem_1(n: int, cfg: IntegrationConfig = IntegrationConfig()) -> ProblemSpec:
    """Two-equation system on [0, 1] with exact solution t^2 + 1.

    Nodes are x_i = 0.1 + 0.9 (i-1)/(n-1) for both equations; boundary
    values 1 and 2; closed forms registered for both equations' representers
    and data shifts.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    xs = 0.1 + 0.9 * np.arange(n) / (n - 1)
    rhs1 = lambda x: x * (_LOG4 - 0.5)
    rhs2 = lambda x: 2.0 / x**3 * (x * np.cos(x) + (x**2 - 1) * np.sin(x))
    return ProblemSpec(
        iv=Interval(0.0, 1.0),
        bv=BoundaryValues(1.0, 2.0),
        kernels=(
            lambda x, t: x / (t + 1.0),
            lambda x, t: np.cos(x * t),
        ),
        nodes=(xs, xs.copy()),
        collocation_ranges=((0.0, 1.0), (0.0, 1.0)),
        rhs_exact=np.concatenate([rhs1(xs), rhs2(xs)]),
        rhs_funcs=(rhs1, rhs2),
        analytic_second=(_tp1_eta1_second, _tp1_eta2_second),
        analytic_value=(_tp1_eta1_value, _tp1_eta2_value),
        # Forward image of the lift t + 1: equation 1 integrates to x exactly,
        # equation 2 to (cos x - 1)/x^2 + 2 sin x / x.
        analytic_shift=(
            lambda x: np.asarray(x, dtype=float),
            lambda x: (np.cos(x) - 1) / x**2 + 2 * np.sin(x) / x,
        ),
        truth=lambda t: np.asarray(t) ** 2 + 1.0,
        label="tp1",
    )


# ---------------------------------------------------------------------------
# Test problem 2: kernels e^{x cos t} and x t + e^{x t} on [0, pi],
# solution sin t.  Equation 1 has no closed-form representers.
# ---------------------------------------------------------------------------

def _tp2_eta2_second(x, z):
    return (
        z * (1 - np.exp(np.pi * x)) / (np.pi * x**2)
        + x * z * (z**2 - np.pi**2) / 6.0
        + (np.exp(x * z) - 1) / x**2
    )


def _tp2_eta2_value(x, y):
    return (
        np.pi**2 * x * y / 36.0 * (0.7 * np.pi**2 - y**2)
        + y / (6 * np.pi * x**4) * (1 - np.exp(np.pi * x)) * (x**2 * y**2 + 6)
        + np.pi * y / (6 * x**2) * (np.exp(np.pi * x) + 2)
        + y**2 / 2.0 * (x * y**3 / 60.0 - 1 / x**2)
        + (np.exp(x * y) - 1) / x**4
    )


def test_problem_2(n: int, cfg: IntegrationConfig = IntegrationConfig()) -> ProblemSpec:
    """Two-equation system on [0, pi] with exact solution sin t.

    Nodes are x_i = 0.1 + (pi/2 - 0.1)(i-1)/(n-1); the solution vanishes at
    both endpoints so the boundary lift is zero.  Only equation 2 has
    closed-form representers; equation 1 is handled by quadrature.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    xs = 0.1 + (np.pi / 2 - 0.1) * np.arange(n) / (n - 1)
    rhs1 = lambda x: 2.0 * np.sinh(x) / x
    rhs2 = lambda x: np.pi * x + (1 + np.exp(np.pi * x)) / (1 + x**2)
    return ProblemSpec(
        iv=Interval(0.0, np.pi),
        bv=BoundaryValues(0.0, 0.0),
        kernels=(
            lambda x, t: np.exp(x * np.cos(t)),
            lambda x, t: x * t + np.exp(x * t),
        ),
        nodes=(xs, xs.copy()),
        collocation_ranges=((0.0, np.pi / 2), (0.0, np.pi / 2)),
        rhs_exact=np.concatenate([rhs1(xs), rhs2(xs)]),
        rhs_funcs=(rhs1, rhs2),
        analytic_second=(None, _tp2_eta2_second),
        analytic_value=(None, _tp2_eta2_value),
        analytic_shift=None,  # zero boundary values: data needs no shift
        truth=np.sin,
        label="tp2",
    )


# ---------------------------------------------------------------------------
# FDEM conductivity model on [0, z0].
# ---------------------------------------------------------------------------

def _theta(z, h):
    return np.sqrt(4.0 * (z + h) ** 2 + 1.0)


def _kernel_vertical(u):
    return 4.0 * u / (4.0 * u**2 + 1.0) ** 1.5


def _kernel_horizontal(u):
    return 2.0 - 4.0 * u / np.sqrt(4.0 * u**2 + 1.0)


@dataclass(frozen=True)
class FdemConfig:
    """Geometry of the induction sounding: truncation depth and coil heights.

    ``heights`` defaults to h_i = 0.1 + 0.9 (i-1)/(n-1) meters.  ``alpha``
    and ``beta`` (surface and deep conductivity) default to the values the
    chosen truth profile prescribes.
    """

    z0: float = 4.0
    n: int = 10
    heights: np.ndarray | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.z0 <= 0:
            raise ValueError(f"z0 must be positive, got {self.z0}")
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.heights is not None:
            hs = np.asarray(self.heights, dtype=float)
            if np.any(hs <= 0):
                raise ValueError("heights must be positive")
            object.__setattr__(self, "heights", hs)

    def resolved_heights(self) -> np.ndarray:
        if self.heights is not None:
            return self.heights
        return 0.1 + 0.9 * np.arange(self.n) / (self.n - 1)


@dataclass(frozen=True)
class TruthProfile:
    """A conductivity depth profile with its boundary values."""

    name: str
    evaluate: object
    alpha: float
    beta: float
    breakpoints: tuple = ()

    def __call__(self, z):
        return self.evaluate(z)


def truth_profile(name: str) -> TruthProfile:
    """Built-in conductivity profiles.

    ``sigma1``: smooth Gaussian bump e^{-(z-1)^2} + 1.
    ``sigma2``: linear ramp to 1 m depth, exponential decay below.
    ``sigma3``: step profile with plateau 2 on [0.5, 1.5].
    """
    if name == "sigma1":
        return TruthProfile(
            name="sigma1",
            evaluate=lambda z: np.exp(-((np.asarray(z, dtype=float) - 1.0) ** 2)) + 1.0,
            alpha=float(np.exp(-1) + 1),
            beta=float(np.exp(-9) + 1),
        )
    if name == "sigma2":

        def sigma2(z):
            z = np.asarray(z, dtype=float)
            return np.where(z <= 1.0, 0.8 * z + 0.2, 0.8 * np.exp(-(np.maximum(z, 1.0) - 1.0)) + 0.2)

        return TruthProfile(
            name="sigma2",
            evaluate=sigma2,
            alpha=0.2,
            beta=float(0.2 + 0.8 * np.exp(-3)),
            breakpoints=(1.0,),
        )
    if name == "sigma3":

        def sigma3(z):
            z = np.asarray(z, dtype=float)
            return np.where((z >= 0.5) & (z <= 1.5), 2.0, 0.2)

        return TruthProfile(
            name="sigma3",
            evaluate=sigma3,
            alpha=0.2,
            beta=0.2,
            breakpoints=(0.5, 1.5),
        )
    raise ValueError(f"unknown truth profile {name!r}")


def _fdem_eta1_second(z0):
    def f(h, x):
        return 0.5 * (
            (1 - x / z0) * np.arcsinh(2 * h)
            - np.arcsinh(2 * (x + h))
            + (x / z0) * np.arcsinh(2 * (z0 + h))
        )

    return f


def _fdem_eta2_second(z0):
    eta1 = _fdem_eta1_second(z0)

    def f(h, x):
        return 0.5 * (
            2 * x * (x - z0)
            + x * (1 + h / z0) * _theta(z0, h)
            - (x + h) * _theta(x, h)
            + h * (1 - x / z0) * _theta(0.0, h)
            + eta1(h, x)
        )

    return f


def _fdem_eta1_value(z0):
    def f(h, y):
        t0, tz, ty = _theta(0.0, h), _theta(z0, h), _theta(y, h)
        as0 = np.arcsinh(2 * h)
        asz = np.arcsinh(2 * (z0 + h))
        asy = np.arcsinh(2 * (y + h))
        out = (3.0 / 16.0) * ((y + h) * ty - y * (1 + h / z0) * tz + h * (y / z0 - 1) * t0)
        out = out + 0.5 * (
            (0.5 * (y / z0 - 1) * (0.125 - h**2 - y**2 / 3) + y / 3 * (y - z0)) * as0
            + (-(y / (2 * z0)) * (0.125 - h**2 - y**2 / 3) + y * (h + z0 / 3)) * asz
            + 0.5 * (0.125 - (y + h) ** 2) * asy
        )
        return out

    return f


def _fdem_eta2_value(z0):
    def f(h, y):
        t0, tz, ty = _theta(0.0, h), _theta(z0, h), _theta(y, h)
        as0 = np.arcsinh(2 * h)
        asz = np.arcsinh(2 * (z0 + h))
        asy = np.arcsinh(2 * (y + h))
        poly = (1.0 / (192 * z0)) * (
            z0 * (h * (13 - 8 * (3 * h * y + h**2 + 3 * y**2)) + y * (13 - 8 * y**2)) * ty
            + y
            * (
                h * (8 * (3 * h * z0 + h**2 + 2 * y**2 + z0**2) - 13)
                + z0 * (8 * (2 * y**2 - z0**2) - 13)
            )
            * tz
            + h
            * (
                z0 * (8 * (h**2 + 6 * y**2 - 4 * y * z0) - 13)
                + y * (13 - 8 * (h**2 + 2 * y**2))
            )
            * t0
            + 16 * y * z0 * (y**3 - 2 * y**2 * z0 + z0**3)
        )
        trig = (1.0 / (128 * z0)) * (
            (y - z0) * (1 - 16 * (h**2 + y**2 / 3 - 2 * y * z0 / 3)) * as0
            + z0 * (1 - 16 * (y + h) ** 2) * asy
            - y * (1 - 16 * (h**2 + y**2 / 3 + 2 * h * z0 + 2 * z0**2 / 3)) * asz
        )
        return poly + trig

    return f


def fdem_problem(
    cfg: FdemConfig,
    truth: TruthProfile,
    quad: IntegrationConfig = IntegrationConfig(),
) -> ProblemSpec:
    """Two-orientation induction sounding on a truncated depth interval.

    The unknown conductivity is assumed constant (= beta) below z0, which
    turns the half-line model into one on [0, z0] with an analytic additive
    tail in the data.  Synthetic device readings are generated by the
    forward map applied to the truth plus that tail.  A negative
    conductivity profile is physically inconsistent and triggers a warning.
    """
    z0 = float(cfg.z0)
    hs = cfg.resolved_heights()
    alpha = cfg.alpha if cfg.alpha is not None else truth.alpha
    beta = cfg.beta if cfg.beta is not None else truth.beta

    kernels = (
        lambda h, z: _kernel_vertical(h + z),
        lambda h, z: _kernel_horizontal(h + z),
    )
    offset1 = lambda h: beta / _theta(z0, h)
    offset2 = lambda h: beta * (_theta(z0, h) - 2 * (h + z0))

    # Closed-form shift: analytic tail plus the forward image of the lift.
    def shift1(h):
        return alpha / _theta(0.0, h) + (alpha - beta) / (2 * z0) * (
            np.arcsinh(2 * h) - np.arcsinh(2 * (z0 + h))
        )

    def shift2(h):
        return (
            ((alpha - beta) * h / (2 * z0) + alpha) * _theta(0.0, h)
            - (alpha - beta) / 2 * (h / z0 + 1) * _theta(z0, h)
            - 2 * beta * h
            + z0 * (alpha - beta)
            + (alpha - beta) / (4 * z0) * (np.arcsinh(2 * h) - np.arcsinh(2 * (z0 + h)))
        )

    ps = ProblemSpec(
        iv=Interval(0.0, z0),
        bv=BoundaryValues(alpha, beta),
        kernels=kernels,
        nodes=(hs, hs.copy()),
        collocation_ranges=((0.0, np.inf), (0.0, np.inf)),
        analytic_second=(_fdem_eta1_second(z0), _fdem_eta2_second(z0)),
        analytic_value=(_fdem_eta1_value(z0), _fdem_eta2_value(z0)),
        analytic_shift=(shift1, shift2),
        data_offset=(offset1, offset2),
        truth=truth.evaluate,
        truth_breakpoints=tuple(b for b in truth.breakpoints if 0.0 < b < z0),
        label=f"fdem:{truth.name}",
    )
    probe = np.linspace(0.0, z0, 257)
    if np.any(np.asarray(truth.evaluate(probe)) < 0):
        warnings.warn("conductivity profile is negative on [0, z0]", stacklevel=2)
    forward = apply_forward(ps, truth.evaluate, quad, breakpoints=ps.truth_breakpoints)
    offsets = np.concatenate([offset1(hs), offset2(hs)])
    return replace(ps, rhs_exact=forward + offsets)


# ---------------------------------------------------------------------------
# Galerkin box-function baseline for test problem 2.
# ---------------------------------------------------------------------------

@dataclass
class GalerkinBaseline:
    """Stacked box-function Galerkin discretization of test problem 2.

    ``matrix`` is 2n-by-n (both equations), ``rhs`` the matching data
    vector.  ``solve`` uses a dense QR factorization without any
    regularization; a rank-deficiency flag switches to minimum-norm least
    squares.  ``evaluate`` expands coefficients as the piecewise-constant
    function they represent.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    n: int
    t_width: float
    rank_deficient: bool = False

    def solve(self) -> np.ndarray:
        Q, R = np.linalg.qr(self.matrix)
        diag = np.abs(np.diag(R))
        if np.any(diag == 0.0):
            self.rank_deficient = True
            coeffs, *_ = np.linalg.lstsq(self.matrix, self.rhs, rcond=None)
            return coeffs
        return sla.solve_triangular(R, Q.T @ self.rhs)

    def evaluate(self, coeffs: np.ndarray, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        idx = np.minimum((grid / self.t_width).astype(int), self.n - 1)
        return coeffs[idx] / np.sqrt(self.t_width)


def galerkin_baseline(n: int, t_order: int = 2) -> GalerkinBaseline:
    """Box-function Galerkin discretization of both equations of problem 2.

    Orthonormal boxes of width pi/n in t and pi/(2n) in x.  Matrix entries
    integrate the kernels exactly in x (both kernels admit elementary
    x-antiderivatives) and with a fixed ``t_order``-point Gauss rule per box
    in t; data projections use the same per-box rule.  This fixed low-order
    box convention follows the classical discretization of this test
    problem; no refinement is applied, so the discretization error of the
    baseline is part of what the comparison measures.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    a, b = 0.0, np.pi
    cx, dx = 0.0, np.pi / 2
    ht = (b - a) / n
    hx = (dx - cx) / n
    rule = gauss_legendre_rule(t_order)
    xg, wg = rule.nodes, rule.weights
    scale = 1.0 / np.sqrt(hx * ht)

    def xint1(x0, x1, t):
        # integral over [x0, x1] of e^{x cos t} dx
        c = np.cos(t)
        safe = np.where(np.abs(c) < 1e-14, 1.0, c)
        return np.where(
            np.abs(c) > 1e-14, (np.exp(x1 * safe) - np.exp(x0 * safe)) / safe, x1 - x0
        )

    def xint2(x0, x1, t):
        # integral over [x0, x1] of (x t + e^{x t}) dx
        t = np.asarray(t, dtype=float)
        safe = np.where(np.abs(t) < 1e-14, 1.0, t)
        return np.where(
            np.abs(t) < 1e-14,
            x1 - x0,
            t * (x1**2 - x0**2) / 2 + (np.exp(x1 * safe) - np.exp(x0 * safe)) / safe,
        )

    def rhs1(x):
        x = np.asarray(x, dtype=float)
        safe = np.where(np.abs(x) < 1e-14, 1.0, x)
        return np.where(np.abs(x) < 1e-14, 2.0, 2.0 * np.sinh(safe) / safe)

    def rhs2(x):
        return np.pi * x + (1 + np.exp(np.pi * x)) / (1 + np.asarray(x, dtype=float) ** 2)

    blocks = []
    data = []
    for xint, rhs in ((xint1, rhs1), (xint2, rhs2)):
        A = np.zeros((n, n))
        for j in range(n):
            tn = a + j * ht + ht / 2 + ht / 2 * xg
            wtn = ht / 2 * wg
            for i in range(n):
                x0, x1 = cx + i * hx, cx + (i + 1) * hx
                A[i, j] = (xint(x0, x1, tn) @ wtn) * scale
        blocks.append(A)
        bv = np.array(
            [
                (hx / 2 * wg) @ rhs(cx + i * hx + hx / 2 + hx / 2 * xg) / np.sqrt(hx)
                for i in range(n)
            ]
        )
        data.append(bv)
    return GalerkinBaseline(
        matrix=np.vstack(blocks), rhs=np.concatenate(data), n=n, t_width=ht
    )


# ---------------------------------------------------------------------------
# Name-based access for the command line.
# ---------------------------------------------------------------------------

def problem_names() -> tuple:
    return ("tp1", "tp2", "fdem:sigma1", "fdem:sigma2", "fdem:sigma3")


def build_problem(
    name: str,
    n: int,
    z0: float = 4.0,
    cfg: IntegrationConfig = IntegrationConfig(),
) -> ProblemSpec:
    """Build a problem by CLI name: tp1, tp2, or fdem:<profile>."""
    if name == "tp1":
        return test_problem_1(n, cfg)
    if name == "tp2":
        return test_problem_2(n, cfg)
    if name.startswith("fdem:"):
        profile = truth_profile(name.split(":", 1)[1])
        return fdem_problem(FdemConfig(z0=z0, n=n), profile, cfg)
    raise ValueError(f"unknown problem {name!r}; known: {', '.join(problem_names())}")
