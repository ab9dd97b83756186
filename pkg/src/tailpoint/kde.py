"""Gaussian-kernel estimators of density derivatives and sample delimiting points.

The ``r``-th derivative of the Gaussian kernel is ``(-1)**r He_r(x) phi(x)``
with ``He_r`` the probabilists' Hermite polynomial, so

    f_n^(r)(x) = (-1)**r / (sqrt(2 pi) n h**(r+1)) * sum_i He_r(u_i) exp(-u_i**2 / 2),
    u_i = (x - X_i) / h.

Bandwidths minimize the asymptotic mean integrated squared error (AMISE) and
need the roughness ``R(f^(r+2)) = int f^(r+2)(x)**2 dx`` of the target
density, either exactly (:func:`true_roughness`) or from a Gaussian reference
(:func:`normal_reference_roughness`).
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np
from scipy import integrate

from ._search import bisect_root, golden_max, tail_grid
from .delimit import Side
from .dist import DensityBundle

__all__ = [
    "DataFormatError",
    "IntegrationError",
    "KdeModel",
    "SamplePoints",
    "amise_bandwidth",
    "estimate_mode",
    "eval_deriv",
    "gaussian_kernel_roughness",
    "hermite",
    "normal_reference_roughness",
    "read_data",
    "sample_delimiting_points",
    "true_roughness",
]

HERMITE_MAX_ORDER = 10
KERNEL_CUTOFF = 38.0  # exp(-38**2 / 2) underflows to a subnormal
SCAN_POINTS = 2048
DOMAIN_PAD = 4.0  # bandwidths beyond the extreme observation
_SQRT_2PI = math.sqrt(2 * math.pi)


class IntegrationError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DataFormatError(ValueError):
    """A data file line could not be parsed as a finite number."""


def hermite(r: int, x):
    """Probabilists' Hermite polynomial ``He_r`` via ``He_{k+1} = x He_k - k He_{k-1}``."""
    if not 0 <= r <= HERMITE_MAX_ORDER:
        raise ValueError(f"Hermite order must be in 0..{HERMITE_MAX_ORDER}, got {r}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x
    if r == 0:
        out = prev
    else:
        for k in range(1, r):
            prev, cur = cur, x * cur - k * prev
        out = cur
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KdeModel:
    """A sample, a derivative order and a bandwidth.

    ``data`` is stored sorted as a read-only array.
    """

    data: np.ndarray
    order: int
    bandwidth: float

    def __post_init__(self):
        data = np.sort(np.asarray(self.data, dtype=float).ravel())
        if data.size < 1:
            raise ValueError("KdeModel needs at least one observation")
        if not np.all(np.isfinite(data)):
            raise ValueError("KdeModel data must be finite")
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not 0 <= self.order <= HERMITE_MAX_ORDER:
            raise ValueError(f"derivative order must be in 0..{HERMITE_MAX_ORDER}, got {self.order}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))

    def __call__(self, x):
        return eval_deriv(self, x)


@numba.njit(cache=True)
def _kernel_sums(points, data, h, r, cutoff):
    """``sum_i He_r(u_i) exp(-u_i**2 / 2)`` per point, over sorted ``data`` within the cutoff."""
    out = np.empty(points.size)
    for j in range(points.size):
        x = points[j]
        lo = np.searchsorted(data, x - cutoff * h)
        hi = np.searchsorted(data, x + cutoff * h, side="right")
        acc = 0.0
        for i in range(lo, hi):
            u = (x - data[i]) / h
            if r == 0:
                he = 1.0
            elif r == 1:
                he = u
            elif r == 2:
                he = u * u - 1.0
            else:
                prev, he = 1.0, u
                for k in range(1, r):
                    prev, he = he, u * he - k * prev
            acc += he * math.exp(-0.5 * u * u)
        out[j] = acc
    return out


def eval_deriv(model: KdeModel, x, cutoff: float | None = KERNEL_CUTOFF):
    """Estimate of the ``model.order``-th density derivative at ``x``.

    Observations more than ``cutoff`` bandwidths from ``x`` are skipped;
    pass ``cutoff=None`` to sum over every observation.
    """
    xa = np.asarray(x, dtype=float)
    data, h, r = model.data, model.bandwidth, model.order
    const = (-1) ** r / (_SQRT_2PI * data.size * h ** (r + 1))
    cut = math.inf if cutoff is None else float(cutoff)
    out = const * _kernel_sums(np.ascontiguousarray(xa.ravel()), data, h, r, cut)
    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def gaussian_kernel_roughness(r: int) -> float:
    """``R(phi^(r)) = (2r)! / (4**r r! 2 sqrt(pi))`` for the standard normal kernel."""
    if not 0 <= r <= HERMITE_MAX_ORDER:
        raise ValueError(f"order must be in 0..{HERMITE_MAX_ORDER}, got {r}")
    return math.factorial(2 * r) / (4**r * math.factorial(r) * 2 * math.sqrt(math.pi))


def normal_reference_roughness(order: int, scale: float) -> float:
    """``R(f^(order))`` for a normal density with standard deviation ``scale``."""
    return gaussian_kernel_roughness(order) / scale ** (2 * order + 1)


def amise_bandwidth(r: int, n: int, roughness_f: float) -> float:
    """AMISE-optimal bandwidth for the ``r``-th derivative estimator.

    ``h = [(2r+1) R(K^(r)) / (mu_2(K)^2 R(f^(r+2)))]^(1/(2r+5)) n^(-1/(2r+5))``
    with ``mu_2(K) = 1`` for the Gaussian kernel.

    Parameters
    ----------
    r : int
        Derivative order being estimated.
    n : int
        Sample size.
    roughness_f : float
        ``R(f^(r+2))`` of the target density.
    """
    if not roughness_f > 0:
        raise ValueError(f"roughness_f must be > 0, got {roughness_f}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    p = 1.0 / (2 * r + 5)
    return ((2 * r + 1) * gaussian_kernel_roughness(r) / roughness_f) ** p * n ** (-p)


def true_roughness(bundle: DensityBundle, order: int) -> float:
    """``int f^(order)(x)**2 dx`` over the 1e-8 .. 1 - 1e-8 quantile range."""
    if order not in (2, 3, 4):
        raise ValueError(f"order must be 2, 3 or 4, got {order}")
    lo, hi = bundle.quantile(1e-8), bundle.quantile(1 - 1e-8)
    probs = [1e-4, 1e-3, 0.01, 0.05, 0.15, 0.3, 0.5, 0.7, 0.85, 0.95, 0.99, 0.999, 1 - 1e-4]
    cuts = sorted({lo, hi, bundle.mode, *np.atleast_1d(bundle.quantile(np.array(probs)))})
    cuts = [c for c in cuts if lo <= c <= hi]
    integrand = lambda t: float(bundle.deriv(t, order)) ** 2
    # central pieces first, so tail pieces get an absolute tolerance scaled to the total
    pieces = sorted(zip(cuts[:-1], cuts[1:]), key=lambda ab: abs(0.5 * (ab[0] + ab[1]) - bundle.mode))
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in pieces:
            try:
                val, _ = integrate.quad(integrand, a, b, epsabs=1e-10 * total, epsrel=1e-10, limit=200)
            except integrate.IntegrationWarning as exc:
                raise IntegrationError(
                    f"roughness of order {order} for {bundle.spec} on [{a:.6g}, {b:.6g}]: {exc}"
                ) from None
            total += val
    return total


def estimate_mode(data, bandwidth: float | None = None) -> float:
    """Argmax of the kernel density estimate.

    Without ``bandwidth`` the AMISE rule for ``r = 0`` is applied with a
    normal-reference roughness from the sample standard deviation.
    """
    data = np.asarray(data, dtype=float)
    if bandwidth is None:
        sd = float(np.std(data, ddof=1))
        if not sd > 0:
            raise ValueError("cannot estimate a mode from constant data")
        bandwidth = amise_bandwidth(0, data.size, normal_reference_roughness(2, sd))
    model = KdeModel(data, 0, bandwidth)
    lo, hi = float(np.min(data)), float(np.max(data))
    grid = np.linspace(lo, hi, SCAN_POINTS) if hi > lo else np.array([lo])
    k = int(np.argmax(model(grid)))
    if grid.size == 1:
        return lo
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    return float(golden_max(lambda t: float(model(t)), a, b))


@dataclass(frozen=True)
class SamplePoints:
    pinf_n: float
    pmconv_n: float


def _scan_argmax(fn, slope, origin: float, end: float, first: float) -> float:
    grid = np.concatenate(([origin], tail_grid(origin, end, SCAN_POINTS - 1, first)))
    values = fn(grid)
    k = int(np.argmax(values))
    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, grid.size - 1)])
    sa = slope(a)
    if sa > 0 > slope(b):
        # the slope is an exact kernel sum, so its root pins the maximizer to rounding level
        return float(bisect_root(slope, a, b, fa=sa, rtol=1e-15))
    return float(golden_max(lambda t: float(fn(t)), a, b))


def sample_delimiting_points(
    data, mode_estimate: float, side: Side | str, h1: float, h2: float
) -> SamplePoints:
    """Sample inflection point and point of maximum convexity on one side.

    ``pinf_n`` maximizes ``-f_n'`` (right side) or ``f_n'`` (left side) with
    bandwidth ``h1``; ``pmconv_n`` maximizes ``f_n''`` with bandwidth ``h2``.
    The search runs from ``mode_estimate`` to a few bandwidths past the
    extreme observation on that side, over a 2048-point grid that is
    log-spaced in the distance from the mode. The bracket around the best
    grid point is refined by bisection on the next kernel derivative, with
    golden-section search as the fallback.
    """
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise ValueError("data must be nonempty")
    if Side(side) is Side.LEFT:
        pts = sample_delimiting_points(-data, -mode_estimate, Side.RIGHT, h1, h2)
        return SamplePoints(-pts.pinf_n, -pts.pmconv_n)

    m1 = KdeModel(data, 1, h1)
    m2 = KdeModel(data, 2, h2)
    top = float(m1.data[-1])
    out = []
    for model in (m1, m2):
        end = top + DOMAIN_PAD * model.bandwidth
        if not end > mode_estimate:
            raise ValueError(
                f"empty search domain: mode estimate {mode_estimate} is beyond the data on the right"
            )
        first = 1e-3 * model.bandwidth
        sign = -1.0 if model.order == 1 else 1.0
        fn = lambda t, m=model, s=sign: s * m(t)
        slope_model = KdeModel(m1.data, model.order + 1, model.bandwidth)
        slope = lambda t, m=slope_model, s=sign: s * m(t)
        out.append(_scan_argmax(fn, slope, mode_estimate, end, first))
    return SamplePoints(*out)


def read_data(source) -> np.ndarray:
    """Read one finite number per line from a path or text stream.

    Blank lines and lines starting with ``#`` are skipped. A single leading
    non-numeric line is treated as a CSV header; any other non-numeric or
    non-finite line raises :class:`DataFormatError` naming its line number.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    values = []
    seen_content = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
            continue
        if len([c for c in cells if c]) != 1:
            raise DataFormatError(f"line {lineno}: expected a single column, got {len(cells)}")
        cell = next(c for c in cells if c)
        try:
            value = float(cell)
        except ValueError:
            if not seen_content:
                seen_content = True  # header row
                continue
            raise DataFormatError(f"line {lineno}: not a number: {cell!r}") from None
        if not math.isfinite(value):
            raise DataFormatError(f"line {lineno}: value is not finite: {cell!r}")
        seen_content = True
        values.append(value)
    return np.asarray(values, dtype=float)
