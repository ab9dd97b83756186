"""One-dimensional bracketing, golden-section and grid-argmax helpers."""
from __future__ import annotations

import math

import numpy as np

_INVPHI = (math.sqrt(5) - 1) / 2


def bisect_root(fn, a: float, b: float, fa: float | None = None, rtol: float = 1e-10) -> float:
    """Root of ``fn`` in ``[a, b]`` given a sign change, to width ``rtol * (1 + |x|)``."""
    fa = fn(a) if fa is None else fa
    for _ in range(400):
        m = 0.5 * (a + b)
        if abs(b - a) < rtol * (1 + abs(m)) or m in (a, b):
            break
        fm = fn(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def golden_max(fn, a: float, b: float, rtol: float = 1e-10) -> float:
    """Maximizer of a unimodal ``fn`` on ``[a, b]`` by golden-section search."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(400):
        if abs(b - a) < rtol * (1 + abs(0.5 * (a + b))):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def tail_grid(origin: float, end: float, count: int, first: float) -> np.ndarray:
    """Points from ``origin`` towards ``end``, log-spaced in the distance to ``origin``.

    The first point sits ``first`` away from ``origin``; ``origin`` itself is excluded.
    """
    span = abs(end - origin)
    direction = 1.0 if end >= origin else -1.0
    first = min(first, span)
    return origin + direction * np.geomspace(first, span, count)


def local_maxima(values: np.ndarray) -> np.ndarray:
    """Indices of (weak) local maxima of a 1-d array, endpoints included."""
    v = np.asarray(values)
    left = np.r_[-np.inf, v[:-1]]
    right = np.r_[v[1:], -np.inf]
    return np.flatnonzero((v >= left) & (v >= right))
