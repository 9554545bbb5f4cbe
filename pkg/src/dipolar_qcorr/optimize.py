"""Deterministic golden-section search, vectorized over independent brackets."""

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, lo, hi, tol=1e-10, width=None):
    """Minimize ``f`` on each bracket ``[lo, hi]``.

    ``lo`` and ``hi`` may be scalars or equal-shape arrays; ``f`` must accept
    an array of abscissas of that shape and return values of the same shape.
    Every bracket runs the same number of iterations, enough to shrink a
    bracket of ``width`` (default: the widest one given) below ``tol``.
    Passing a fixed ``width`` makes each result independent of how brackets
    are batched. Ties keep the left point.

    Returns
    -------
    x, fx : ndarray
        Best interior point found and its value.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if width is None:
        width = float(np.max(hi - lo)) if lo.size else 0.0
    if width < 0 or np.any(hi < lo):
        raise ValueError("golden_section_min needs lo <= hi")
    n_iter = 0 if width <= tol else math.ceil(math.log(tol / width) / math.log(INV_PHI))

    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc = np.asarray(f(c), dtype=float)
    fd = np.asarray(f(d), dtype=float)
    for _ in range(n_iter):
        left = fc <= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        x_new = np.where(left, hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo))
        f_new = np.asarray(f(x_new), dtype=float)
        c, d, fc, fd = (
            np.where(left, x_new, d),
            np.where(left, c, x_new),
            np.where(left, f_new, fd),
            np.where(left, fc, f_new),
        )
    # Points can swap order through round-off; pick by value, left on ties.
    take_c = (fc < fd) | ((fc == fd) & (c <= d))
    return np.where(take_c, c, d), np.where(take_c, fc, fd)


def golden_section_max(f, lo, hi, tol=1e-10, width=None):
    x, fx = golden_section_min(lambda z: -np.asarray(f(z)), lo, hi, tol, width)
    return x, -fx
