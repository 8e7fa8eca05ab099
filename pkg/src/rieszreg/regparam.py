"""Truncation-parameter selection: discrepancy principle, L-curve corner,
and the error-minimizing oracle for synthetic experiments.

Noise generation is fully deterministic and platform-portable: a SplitMix64
stream feeds a Box-Muller transform, so a seed pins the exact noise vector
bit for bit across runs and machines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InsufficientCurveError
from .gram import GramFactorization
from .riesz import RieszBasis
from .solver import DataVector, _values, projections, solution_sweep

__all__ = [
    "NoiseModel",
    "ParamSelectionReport",
    "standard_normals",
    "add_noise",
    "discrepancy_kappa",
    "LCurve",
    "lcurve_points",
    "CornerResult",
    "lcurve_corner",
    "kappa_best",
    "select_parameters",
]

_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_MIX2 = np.uint64(0x94D4A2C62BE9D7C5)


@dataclass(frozen=True)
class NoiseModel:
    """Record of one synthetic noise realization."""

    delta: float
    seed: int
    realized_norm: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")


def _splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of the SplitMix64 stream for ``seed``."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _SM64_GAMMA
    z = (z ^ (z >> np.uint64(30))) * _SM64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _SM64_MIX2
    return z ^ (z >> np.uint64(31))


def standard_normals(seed: int, count: int) -> np.ndarray:
    """Deterministic standard normal variates.

    Uniform doubles are taken from the top 53 bits of a SplitMix64 stream
    and paired through the Box-Muller transform, so the output depends only
    on the seed, never on library RNG internals.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return np.empty(0)
    m = (count + 1) // 2
    bits = _splitmix64(seed, 2 * m)
    u1 = ((bits[:m] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53  # (0, 1]
    u2 = (bits[m:] >> np.uint64(11)).astype(np.float64) * 2.0**-53  # [0, 1)
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return out[:count]


def add_noise(g_exact, delta: float, seed: int):
    """Contaminate exact data with scaled Gaussian noise.

    The noise vector is ``delta / sqrt(N) * ||g|| * w`` with ``w`` standard
    normal, so its expected Euclidean norm is close to ``delta * ||g||``.
    Returns the noisy :class:`DataVector` (carrying the realized noise norm)
    and the :class:`NoiseModel` record.
    """
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    values = _values(g_exact)
    if delta == 0.0:
        noisy = DataVector(values.copy(), label="noisy", noise_norm=0.0)
        return noisy, NoiseModel(delta=0.0, seed=seed, realized_norm=0.0)
    w = standard_normals(seed, values.size)
    e = (delta / np.sqrt(values.size)) * np.linalg.norm(values) * w
    realized = float(np.linalg.norm(e))
    noisy = DataVector(values + e, label="noisy", noise_norm=realized)
    return noisy, NoiseModel(delta=float(delta), seed=int(seed), realized_norm=realized)


def discrepancy_kappa(
    fac: GramFactorization, g, noise_norm: float, tau: float = 1.1
) -> int:
    """Smallest truncation index whose residual drops below ``tau * noise``.

    Scans 1..cutoff using the tail-sum residual of the projected data.  When
    no index satisfies the bound, the cutoff itself is returned (callers can
    detect this through :func:`select_parameters`, which flags it).
    """
    if noise_norm <= 0:
        raise ValueError(f"noise_norm must be positive, got {noise_norm}")
    if tau <= 1:
        raise ValueError(f"tau must exceed 1, got {tau}")
    proj = projections(fac, g)
    tails = np.sqrt(np.cumsum((proj**2)[::-1])[::-1])  # tails[k] = residual of rank k
    bound = tau * noise_norm
    for kappa in range(1, fac.cutoff + 1):
        res = tails[kappa] if kappa < fac.size else 0.0
        if res <= bound:
            return kappa
    return fac.cutoff


class LCurve(NamedTuple):
    """Log-log residual/solution-norm curve over the truncation index."""

    points: np.ndarray  # (K, 2): (log residual, log solution norm)
    kappas: np.ndarray  # (K,): truncation index of each point
    dropped: int  # trailing zero-residual points removed before the log


def lcurve_points(fac: GramFactorization, g) -> LCurve:
    """Points (log residual, log solution norm) for every truncation index.

    Trailing points with exactly zero residual cannot enter the log-log
    plane and are dropped; the count is recorded on the result.

    Raises
    ------
    InsufficientCurveError
        If fewer than three usable points remain.
    """
    if fac.cutoff < 3:
        raise InsufficientCurveError(f"need at least 3 points, have {fac.cutoff}")
    proj = projections(fac, g)
    N = fac.cutoff
    tails_sq = np.concatenate([np.cumsum((proj**2)[::-1])[::-1][1:], [0.0]])
    residuals = np.sqrt(tails_sq[:N])
    wnorms = np.sqrt(np.cumsum(proj[:N] ** 2 / fac.eigenvalues[:N]))
    usable = N
    while usable > 0 and residuals[usable - 1] == 0.0:
        usable -= 1
    dropped = N - usable
    if usable < 3:
        raise InsufficientCurveError(
            f"only {usable} usable points after dropping {dropped} zero-residual points"
        )
    pts = np.column_stack([np.log(residuals[:usable]), np.log(wnorms[:usable])])
    return LCurve(points=pts, kappas=np.arange(1, usable + 1), dropped=dropped)


class CornerResult(NamedTuple):
    index: int  # position within the supplied points
    kappa: int  # truncation index of the corner point
    degenerate: bool  # no convex corner was found; last point returned
    candidates: tuple  # candidate positions considered in the final stage


# Wedge products of unit segment vectors below this magnitude are treated as
# straight continuation, not a turn (guards against round-off on collinear
# curves).
_TURN_TOL = 1e-12


def _corner_prune(P: np.ndarray):
    """Adaptive pruning corner search on log-log points.

    Candidate corners are collected from pruned sub-curves made of the p
    longest segments, with p doubling per round (starting at min(5, K-1)).
    Each round contributes (a) the sharpest convex junction of the pruned
    curve and (b) the curve point nearest the intersection of its dominant
    horizontal and vertical directions.  The final corner is the candidate
    with the sharpest convex turn on the candidate polyline.
    """
    K = len(P)
    V = P[1:] - P[:-1]
    lengths = np.hypot(V[:, 0], V[:, 1])
    W = V / np.where(lengths > 0, lengths, 1.0)[:, None]
    order = np.argsort(-lengths)
    candidates: set = set()
    convex = False
    p = min(5, K - 1)
    while p < 2 * (K - 1):
        chosen = np.sort(order[: min(p, K - 1)])
        Wk = W[chosen]
        if len(chosen) > 1:
            wedge = Wk[:-1, 0] * Wk[1:, 1] - Wk[1:, 0] * Wk[:-1, 1]
            k = int(np.argmin(wedge))
            if wedge[k] < -_TURN_TOL:
                convex = True
                candidates.add(int(chosen[k]) + 1)
        slope = np.abs(Wk[:, 1])
        flat = int(chosen[int(np.argmin(slope))])
        steep = int(chosen[int(np.argmax(slope))])
        ideal = np.array([P[min(steep + 1, K - 1), 0], P[flat, 1]])
        dist2 = np.sum((P - ideal) ** 2, axis=1)
        candidates.add(int(np.argmin(dist2)))
        p *= 2
    if not convex:
        return K - 1, True, tuple(sorted(candidates))
    candidates.add(K - 1)
    cand = np.array(sorted(c for c in candidates if c > 0))
    poly = np.vstack([P[0], P[cand]])
    Vp = poly[1:] - poly[:-1]
    lp = np.hypot(Vp[:, 0], Vp[:, 1])
    Wp = Vp / np.where(lp > 0, lp, 1.0)[:, None]
    wedge = Wp[:-1, 0] * Wp[1:, 1] - Wp[1:, 0] * Wp[:-1, 1]
    if wedge.size == 0 or np.min(wedge) >= -_TURN_TOL:
        return int(cand[-1]), True, tuple(int(c) for c in cand)
    return int(cand[int(np.argmin(wedge))]), False, tuple(int(c) for c in cand)


def _corner_curvature(P: np.ndarray):
    """Fallback: maximum-curvature point by finite differences on the curve."""
    K = len(P)
    best, best_curv = K - 1, 0.0
    for j in range(1, K - 1):
        u = P[j] - P[j - 1]
        w = P[j + 1] - P[j]
        cross = u[0] * w[1] - u[1] * w[0]
        du, dw, dv = np.linalg.norm(u), np.linalg.norm(w), np.linalg.norm(P[j + 1] - P[j - 1])
        if du * dw * dv == 0:
            continue
        if cross / (du * dw) >= -_TURN_TOL:  # concave or straight: no corner here
            continue
        curv = 2.0 * abs(cross) / (du * dw * dv)
        if curv > best_curv:
            best, best_curv = j, curv
    return best, best_curv == 0.0


def lcurve_corner(curve, method: str = "prune") -> CornerResult:
    """Locate the corner of a discrete L-curve.

    Parameters
    ----------
    curve : LCurve or ndarray
        Either the result of :func:`lcurve_points` or a plain (K, 2) array
        of log-log points ordered by increasing truncation index.
    method : str
        ``"prune"`` for the adaptive pruning search (default) or
        ``"curvature"`` for the finite-difference maximum-curvature
        fallback.

    Returns
    -------
    CornerResult
        Corner position, its truncation index, and a degeneracy flag (set
        when the points never turn convexly, e.g. collinear data; the last
        index is returned in that case).
    """
    if isinstance(curve, LCurve):
        P, kappas = curve.points, curve.kappas
    else:
        P = np.asarray(curve, dtype=float)
        kappas = np.arange(1, len(P) + 1)
    if len(P) < 3:
        raise InsufficientCurveError(f"need at least 3 points, got {len(P)}")
    if method == "prune":
        idx, degenerate, cands = _corner_prune(P)
    elif method == "curvature":
        idx, degenerate = _corner_curvature(P)
        cands = (idx,)
    else:
        raise ValueError(f"unknown corner method {method!r}")
    return CornerResult(
        index=int(idx), kappa=int(kappas[idx]), degenerate=bool(degenerate), candidates=cands
    )


def kappa_best(
    fac: GramFactorization,
    basis: RieszBasis,
    g,
    truth,
    metric: str = "grid-l2",
    grid_points: int = 1000,
) -> int:
    """Truncation index minimizing the error against a known truth.

    Metrics: ``"grid-l2"`` (default) and ``"grid-max"`` compare the
    reconstruction with the truth on a uniform grid; ``"w-norm"`` compares
    coefficient vectors through the solution norm, taking the full
    coefficients of the problem's exact data as reference (the truth must
    then lie in the representer span for the reference to be meaningful).
    """
    iv = basis.spec.iv
    if metric in ("grid-l2", "grid-max"):
        grid = np.linspace(iv.a, iv.b, grid_points)
        F, _ = solution_sweep(fac, basis, g, grid)
        diff = F - np.asarray(truth(grid), dtype=float)[None, :]
        if metric == "grid-l2":
            h = (iv.b - iv.a) / (grid_points - 1)
            errs = np.sqrt(np.sum(diff**2, axis=1) * h)
        else:
            errs = np.max(np.abs(diff), axis=1)
    elif metric == "w-norm":
        if basis.spec.rhs_exact is None:
            raise ValueError("w-norm metric requires a problem with exact data")
        from .rkhs import shift_rhs

        g_ref = shift_rhs(basis.spec, basis.spec.rhs_exact, basis.cfg)
        proj_ref = projections(fac, g_ref)
        proj = projections(fac, g)
        N = fac.cutoff
        lam = fac.eigenvalues[:N]
        # ||L (c_ref - c^(kappa))||: prefix terms differ, tail keeps c_ref mass.
        head = (proj_ref[:N] - proj[:N]) / np.sqrt(lam)
        tail = proj_ref[:N] / np.sqrt(lam)
        errs = np.array(
            [
                np.sqrt(np.sum(head[:k] ** 2) + np.sum(tail[k:] ** 2))
                for k in range(1, N + 1)
            ]
        )
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return int(np.argmin(errs)) + 1


@dataclass
class ParamSelectionReport:
    """Outcome of automatic truncation-parameter selection."""

    tau: float
    kappa_d: int | None = None
    kappa_lc: int | None = None
    kappa_best: int | None = None
    discrepancy_satisfied: bool = True
    lcurve_degenerate: bool = False
    dropped_points: int = 0
    lcurve_points: list = field(default_factory=list)
    discrepancy_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "kappa_d": self.kappa_d,
            "kappa_lc": self.kappa_lc,
            "kappa_best": self.kappa_best,
            "discrepancy_satisfied": self.discrepancy_satisfied,
            "lcurve_degenerate": self.lcurve_degenerate,
            "dropped_points": self.dropped_points,
            "lcurve_points": [[float(a), float(b)] for a, b in self.lcurve_points],
            "discrepancy_trace": [[int(k), float(r)] for k, r in self.discrepancy_trace],
        }


def select_parameters(
    fac: GramFactorization,
    basis: RieszBasis,
    g,
    noise_norm: float | None = None,
    truth=None,
    tau: float = 1.1,
    metric: str = "grid-l2",
    corner_method: str = "prune",
) -> ParamSelectionReport:
    """Run every applicable selection rule and collect the evidence.

    The discrepancy rule needs a positive ``noise_norm``; the oracle rule
    needs a ``truth``.  The L-curve always runs (when at least three usable
    points exist).
    """
    report = ParamSelectionReport(tau=tau)
    proj = projections(fac, g)
    tails = np.sqrt(np.concatenate([np.cumsum((proj**2)[::-1])[::-1][1:], [0.0]]))
    report.discrepancy_trace = [(k, float(tails[k - 1])) for k in range(1, fac.cutoff + 1)]
    if noise_norm is not None and noise_norm > 0:
        report.kappa_d = discrepancy_kappa(fac, g, noise_norm, tau)
        report.discrepancy_satisfied = bool(tails[report.kappa_d - 1] <= tau * noise_norm)
    try:
        curve = lcurve_points(fac, g)
        corner = lcurve_corner(curve, method=corner_method)
        report.kappa_lc = corner.kappa
        report.lcurve_degenerate = corner.degenerate
        report.dropped_points = curve.dropped
        report.lcurve_points = [tuple(p) for p in curve.points]
    except InsufficientCurveError:
        report.kappa_lc = None
    if truth is not None:
        report.kappa_best = kappa_best(fac, basis, g, truth, metric=metric)
    return report
