"""Shared numerical kernel: stencils, quadrature, interpolation, norms.

All routines are deterministic and dtype-preserving (long-double input
stays long double; several consumers rely on that for deeply nested
difference stacks).
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import EvenPointCount, NonMonotoneData, TooFewPoints


def central_diff(values, spacing, axis=0):
    """Second-order central difference along ``axis``.

    Boundary samples cannot be differenced at second order and are
    returned as NaN so that norms naturally exclude them.
    """
    values = np.asarray(values)
    n = values.shape[axis]
    if n < 3:
        raise TooFewPoints(f"need >= 3 points along axis {axis}, got {n}")
    out = np.full_like(values, np.nan)
    plus = np.roll(values, -1, axis=axis)
    minus = np.roll(values, 1, axis=axis)
    core = (plus - minus) / (2 * spacing)
    sl = [slice(None)] * values.ndim
    sl[axis] = slice(1, -1)
    out[tuple(sl)] = core[tuple(sl)]
    return out


def simpson(values, spacing, axis=0):
    """Composite Simpson quadrature on a uniform grid with an odd point count."""
    values = np.asarray(values)
    n = values.shape[axis]
    if n < 3:
        raise TooFewPoints(f"need >= 3 points, got {n}")
    if n % 2 == 0:
        raise EvenPointCount(f"composite Simpson needs an odd point count, got {n}")
    w = np.ones(n, dtype=values.dtype)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    w = w * (spacing / 3)
    shape = [1] * values.ndim
    shape[axis] = n
    return np.sum(values * w.reshape(shape), axis=axis)


def cumulative_simpson(values, spacing):
    """Cumulative integral of 1D samples, one value per node, F[0] = 0.

    Each consecutive triple is fitted by a parabola; the two half-panel
    integrals are h(5*y0+8*y1-y2)/12 and h(-y0+8*y1+5*y2)/12.  Third-order
    accurate at every node, fourth-order at the odd-panel boundaries,
    which preserves strict monotonicity for smooth positive integrands.
    """
    y = np.asarray(values)
    n = y.shape[0]
    if n < 3:
        raise TooFewPoints(f"need >= 3 points, got {n}")
    h = spacing
    out = np.zeros_like(y)
    inc = np.empty(n - 1, dtype=y.dtype)
    # interval [i, i+1] integrated from the parabola through (i-1, i, i+1)
    # or (i, i+1, i+2), whichever keeps the stencil inside the data
    inc[0] = h * (5 * y[0] + 8 * y[1] - y[2]) / 12
    inc[1:] = h * (-y[:-2] + 8 * y[1:-1] + 5 * y[2:]) / 12
    out[1:] = np.cumsum(inc)
    return out


class MonotoneCubic:
    """C1 monotone cubic interpolant (Fritsch-Carlson limited slopes)
    of strictly increasing data, with a Newton-refined inverse."""

    def __init__(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.size < 2:
            raise NonMonotoneData("need at least two knots")
        if np.any(np.diff(xs) <= 0):
            raise NonMonotoneData("abscissae must be strictly increasing")
        if np.any(np.diff(ys) <= 0):
            raise NonMonotoneData("ordinates must be strictly increasing")
        self.xs = xs
        self.ys = ys
        self._interp = PchipInterpolator(xs, ys, extrapolate=False)
        self._deriv = self._interp.derivative()

    def __call__(self, x):
        return self._interp(x)

    def derivative(self, x):
        return self._deriv(x)

    def inverse(self, y, tol=1e-12, max_iter=60):
        """Solve f(x) = y on the tabulated range (bisection + Newton)."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(y_arr)
        for i, target in enumerate(y_arr.ravel()):
            if not (self.ys[0] - 1e-12 <= target <= self.ys[-1] + 1e-12):
                raise NonMonotoneData(
                    f"inverse target {target} outside range "
                    f"[{self.ys[0]}, {self.ys[-1]}]"
                )
            target = min(max(target, self.ys[0]), self.ys[-1])
            k = np.searchsorted(self.ys, target) - 1
            k = min(max(k, 0), self.xs.size - 2)
            lo, hi = self.xs[k], self.xs[k + 1]
            x = 0.5 * (lo + hi)
            for _ in range(max_iter):
                fx = float(self._interp(x)) - target
                if fx > 0:
                    hi = x
                else:
                    lo = x
                d = float(self._deriv(x))
                step = fx / d if d > 0 else np.inf
                x_new = x - step
                if not (lo <= x_new <= hi):
                    x_new = 0.5 * (lo + hi)
                if abs(x_new - x) < tol:
                    x = x_new
                    break
                x = x_new
            out.ravel()[i] = x
        return out[0] if np.isscalar(y) or np.ndim(y) == 0 else out.reshape(np.shape(y))


def monotone_cubic(xs, ys):
    """Factory for :class:`MonotoneCubic`."""
    return MonotoneCubic(xs, ys)


@dataclass
class ConvergenceReport:
    """Result of a grid-refinement study: fitted order of ln(norm) vs ln(h)."""

    h_values: list
    norms: list
    fitted_order: float
    target_order: float
    tolerance: float = 0.3

    @property
    def passed(self):
        return abs(self.fitted_order - self.target_order) <= self.tolerance

    def __str__(self):
        pairs = ", ".join(
            f"h={h:.3g}: {n:.3e}" for h, n in zip(self.h_values, self.norms)
        )
        return (
            f"order {self.fitted_order:.2f} (target {self.target_order}"
            f" +- {self.tolerance}) [{pairs}]"
        )


def fit_order(h_values, norms, target_order=2.0, tolerance=0.3):
    """Least-squares slope of ln(norm) against ln(h)."""
    h_values = [float(h) for h in h_values]
    norms = [float(n) for n in norms]
    if len(h_values) < 2 or len(h_values) != len(norms):
        raise TooFewPoints("need at least two (h, norm) pairs")
    if any(h2 >= h1 for h1, h2 in zip(h_values, h_values[1:])):
        raise NonMonotoneData("h values must be strictly decreasing")
    slope = np.polyfit(np.log(h_values), np.log(norms), 1)[0]
    return ConvergenceReport(h_values, norms, float(slope), target_order, tolerance)


def convergence_study(evaluator, h_values, target_order=2.0, tolerance=0.3):
    """Run ``evaluator(h)`` on each grid spacing and fit the order."""
    if len(h_values) < 3:
        raise TooFewPoints("need at least three grid levels")
    norms = [float(evaluator(h)) for h in h_values]
    return fit_order(h_values, norms, target_order, tolerance)


def trimmed_max(values, frac=0.1, min_cells=8):
    """Sup norm over a fixed interior fraction of a 2D grid function.

    The trim is a fraction of the grid extent per side (at least
    ``min_cells`` cells), so refinement studies measure the same physical
    subdomain at every level even though the NaN stencil margins shrink.
    """
    f = np.asarray(values)
    n0, n1 = f.shape
    m0 = max(int(round(frac * (n0 - 1))), min_cells)
    m1 = max(int(round(frac * (n1 - 1))), min_cells)
    core = f[m0 : n0 - m0, m1 : n1 - m1]
    return float(np.nanmax(np.abs(core)))
