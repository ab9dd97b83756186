"""Delimiting points between the bulk and the tails of a unimodal density.

For each side of the mode three points are computed:

``pinf``
    inflection point, the root of ``f''`` nearest the mode;
``pmconv``
    point of maximum convexity, the argmax of ``f''``;
``pmcurv``
    point of maximum curvature, the argmax of
    ``kappa(t) = f''(t) / (1 + f'(t)**2)**1.5``.

Numeric solvers scan a 513-point grid that is log-spaced in the distance from
the mode, running out to the 1e-9 / 1 - 1e-9 quantiles, then refine the
bracket (bisection for roots, golden-section for maxima). Closed forms are
registered for the Gaussian, Student-t/Cauchy, Log-Normal and Exponential
families.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._search import bisect_root, golden_max, local_maxima, tail_grid
from .dist import DensityBundle, DistributionSpec, make_bundle

__all__ = [
    "DelimitingReport",
    "Method",
    "Side",
    "SidePoints",
    "closed_form_points",
    "curvature",
    "pinf",
    "pmconv",
    "pmcurv",
    "report",
]

GRID_POINTS = 513
TAIL_PROB = 1e-9
MODE_OFFSET = 1e-12
REL_TOL = 1e-10
TIE_TOL = 1e-12
SUB_POINTS = 65

POINTS = ("pinf", "pmconv", "pmcurv")


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC = "numeric"


def curvature(bundle: DensityBundle, t):
    """Signed curvature of the graph of the pdf at ``t``."""
    d1 = np.asarray(bundle.dpdf(t))
    d2 = np.asarray(bundle.d2pdf(t))
    k = d2 / (1.0 + d1 * d1) ** 1.5
    return float(k) if np.ndim(t) == 0 else k


def _curvature_slope_sign(bundle, t):
    # sign of kappa'(t): numerator of the quotient rule, up to a positive factor
    d1, d2, d3 = bundle.dpdf(t), bundle.d2pdf(t), bundle.deriv(t, 3)
    return d3 * (1 + d1 * d1) - 3 * d1 * d2 * d2


def _domain(bundle: DensityBundle, side: Side):
    """``(origin, end)`` of the truncated side domain, or None if it is empty."""
    theta = bundle.mode
    offset = MODE_OFFSET * (1 + abs(theta))
    lo, hi = bundle.support
    if Side(side) is Side.RIGHT:
        origin = theta + offset
        end = min(bundle.quantile(1 - TAIL_PROB), hi)
        return (origin, end) if end > origin else None
    origin = theta - offset
    end = max(bundle.quantile(TAIL_PROB), lo)
    return (origin, end) if end < origin else None


def _grid(bundle, side):
    dom = _domain(bundle, side)
    if dom is None:
        return None
    origin, end = dom
    # the first point sits at the excluded-mode offset, the rest fan out geometrically
    first = MODE_OFFSET * (1 + abs(bundle.mode))
    return tail_grid(bundle.mode, end, GRID_POINTS, first)


def pinf(bundle: DensityBundle, side: Side) -> float | None:
    """Inflection point on ``side``: the sign change of ``f''`` nearest the mode.

    Returns None when ``f''`` keeps its sign over the whole side domain.
    """
    grid = _grid(bundle, side)
    if grid is None:
        return None
    d2 = bundle.d2pdf(grid)
    sign = np.sign(d2)
    change = np.flatnonzero(sign[1:] * sign[:-1] < 0)
    exact = np.flatnonzero(sign == 0)
    k = change[0] if change.size else None
    if exact.size and (k is None or exact[0] <= k):
        return float(grid[exact[0]])
    if k is None:
        return None
    return bisect_root(lambda t: bundle.d2pdf(t), grid[k], grid[k + 1], fa=d2[k], rtol=REL_TOL)


def _argmax_on_side(bundle, side, fn, slope=None):
    """Grid scan + golden refinement of ``fn``; returns (point, tie_flag)."""
    grid = _grid(bundle, side)
    if grid is None:
        return None, False
    values = fn(grid)
    vmax = float(np.max(values))
    peaks = local_maxima(values)
    near = peaks[values[peaks] >= vmax - TIE_TOL * max(abs(vmax), np.finfo(float).tiny)]
    k = int(near[0])  # nearest the mode: the grid runs outward from it
    tie = near.size > 1

    lo_s, hi_s = bundle.support
    boundary = lo_s if Side(side) is Side.RIGHT else hi_s
    if k == 0 and bundle.mode == boundary:
        # supremum sits at the support boundary, which is also the mode
        return boundary, tie

    a = grid[k - 1] if k > 0 else bundle.mode
    b = grid[k + 1] if k + 1 < grid.size else grid[k]
    # the outer log-spaced cells are wide; rescan the bracket linearly before golden search
    sub = np.linspace(a, b, SUB_POINTS)
    j = int(np.argmax(fn(sub)))
    a, b = sub[max(j - 1, 0)], sub[min(j + 1, SUB_POINTS - 1)]
    lo, hi = min(a, b), max(a, b)
    x = golden_max(lambda t: float(fn(t)), lo, hi, rtol=REL_TOL)
    if slope is not None:
        x = _polish(slope, x, lo, hi)
    return x, tie


def _polish(slope, x, lo, hi):
    """Tighten a maximizer to the sign change of its slope near ``x``.

    Golden-section search on a noisy objective stalls near sqrt(noise); a root
    of the slope is resolved to the slope's own accuracy.
    """
    w = 1e-4 * (1 + abs(x))
    a, b = max(lo, x - w), min(hi, x + w)
    sa, sb = slope(a), slope(b)
    if sa > 0 > sb:
        return bisect_root(slope, a, b, fa=sa, rtol=1e-15)
    return x


def _pmconv_flagged(bundle, side):
    return _argmax_on_side(bundle, side, bundle.d2pdf, lambda t: bundle.deriv(t, 3))


def _pmcurv_flagged(bundle, side):
    slope = lambda t: _curvature_slope_sign(bundle, t)
    return _argmax_on_side(bundle, side, lambda t: curvature(bundle, t), slope)


def pmconv(bundle: DensityBundle, side: Side) -> float | None:
    """Argmax of ``f''`` on ``side``; None only when the side domain is empty."""
    return _pmconv_flagged(bundle, side)[0]


def pmcurv(bundle: DensityBundle, side: Side) -> float | None:
    """Argmax of the curvature on ``side``; None only when the side domain is empty."""
    return _pmcurv_flagged(bundle, side)[0]


def closed_form_points(spec: DistributionSpec) -> dict[Side, dict[str, float | None]] | None:
    """Exact delimiting points where a formula is known.

    Returns ``{Side: {point_name: value}}``. A key that is present with value
    None means the point is known not to exist; a missing key means no
    formula is registered for it. Returns None for families without formulas.
    """
    p = spec.param_dict
    fam = spec.family
    if fam in ("gaussian", "studentt", "cauchy"):
        if fam == "gaussian":
            mu, sigma, inf_r, conv_r = p["mu"], p["sigma"], 1.0, math.sqrt(3.0)
        else:
            if fam == "cauchy":
                nu, mu, sigma = 1.0, p["loc"], p["scale"]
            else:
                nu, mu, sigma = p["nu"], p["mu"], p["sigma"]
            inf_r = math.sqrt(nu / (nu + 2))
            conv_r = math.sqrt(3 * nu / (nu + 2))
        return {
            Side.LEFT: {"pinf": mu - sigma * inf_r, "pmconv": mu - sigma * conv_r},
            Side.RIGHT: {"pinf": mu + sigma * inf_r, "pmconv": mu + sigma * conv_r},
        }
    if fam == "lognormal":
        mu, s = p["mu"], p["sigma"]
        conv = math.sqrt(3 + s * s)
        infl = math.sqrt(s * s + 4)
        return {
            Side.LEFT: {
                "pinf": math.exp((2 * mu - 3 * s * s - s * infl) / 2),
                "pmconv": math.exp(mu - 2 * s * s - s * conv),
            },
            Side.RIGHT: {
                "pinf": math.exp((2 * mu - 3 * s * s + s * infl) / 2),
                "pmconv": math.exp(mu - 2 * s * s + s * conv),
            },
        }
    if fam == "exponential":
        lam = p["rate"]
        # kappa = lam * u / (1 + u^2)^1.5 with u = lam^2 exp(-lam x) is maximal at u^2 = 1/2
        curv = math.log(2 * lam**4) / (2 * lam) if lam > 2 ** (-0.25) else 0.0
        return {
            Side.LEFT: {"pinf": None, "pmconv": None, "pmcurv": None},
            Side.RIGHT: {"pinf": None, "pmconv": 0.0, "pmcurv": curv},
        }
    return None


@dataclass(frozen=True)
class SidePoints:
    pinf: float | None
    pmconv: float | None
    pmcurv: float | None
    cdf_at: dict[str, float | None]
    method: dict[str, Method]
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "pinf": self.pinf,
            "pmconv": self.pmconv,
            "pmcurv": self.pmcurv,
            "cdf_at": dict(self.cdf_at),
            "method": {k: m.value for k, m in self.method.items()},
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class DelimitingReport:
    spec: DistributionSpec
    mode: float
    left: SidePoints
    right: SidePoints
    modal_region_inf: tuple[float, float] | None = field(default=None)
    modal_region_conv: tuple[float, float] | None = field(default=None)

    def side(self, side: Side) -> SidePoints:
        return self.left if Side(side) is Side.LEFT else self.right

    def to_dict(self) -> dict:
        return {
            "family": self.spec.family,
            "params": self.spec.param_dict,
            "mode": self.mode,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "modal_region_inf": list(self.modal_region_inf) if self.modal_region_inf else None,
            "modal_region_conv": list(self.modal_region_conv) if self.modal_region_conv else None,
        }


_FLAGGED = {"pmconv": _pmconv_flagged, "pmcurv": _pmcurv_flagged}


def report(spec: DistributionSpec, numeric_only: bool = False) -> DelimitingReport:
    """All delimiting points of ``spec`` with their cdf values.

    Closed forms are used where registered unless ``numeric_only`` is set.
    """
    bundle = make_bundle(spec)
    closed = None if numeric_only else closed_form_points(spec)
    sides = {}
    for side in Side:
        known = closed.get(side, {}) if closed else {}
        values, methods, flagged = {}, {}, False
        for name in POINTS:
            if name in known:
                values[name], methods[name] = known[name], Method.CLOSED_FORM
                continue
            if name == "pinf":
                values[name] = pinf(bundle, side)
            else:
                values[name], tie = _FLAGGED[name](bundle, side)
                flagged = flagged or tie
            methods[name] = Method.NUMERIC
        cdf_at = {k: (None if v is None else float(bundle.cdf(v))) for k, v in values.items()}
        sides[side] = SidePoints(
            values["pinf"], values["pmconv"], values["pmcurv"], cdf_at, methods, flagged
        )

    left, right = sides[Side.LEFT], sides[Side.RIGHT]
    region_inf = (left.pinf, right.pinf) if None not in (left.pinf, right.pinf) else None
    region_conv = (left.pmconv, right.pmconv) if None not in (left.pmconv, right.pmconv) else None
    return DelimitingReport(spec, bundle.mode, left, right, region_inf, region_conv)
