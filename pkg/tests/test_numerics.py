import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralfield.errors import EvenPointCount, NonMonotoneData, TooFewPoints
from chiralfield.numerics import (
    MonotoneCubic,
    central_diff,
    convergence_study,
    cumulative_simpson,
    fit_order,
    simpson,
    trimmed_max,
)


class TestCentralDiff:
    def test_exact_on_quadratic(self):
        x = np.linspace(0, 1, 11)
        d = central_diff(3 * x**2 - 2 * x + 1, x[1] - x[0])
        assert np.allclose(d[1:-1], 6 * x[1:-1] - 2, atol=1e-12)

    def test_nan_margins(self):
        d = central_diff(np.linspace(0, 1, 5), 0.25)
        assert np.isnan(d[0]) and np.isnan(d[-1])
        assert not np.any(np.isnan(d[1:-1]))

    def test_second_order_on_sine(self):
        def norm_at(h):
            x = np.arange(0, 1 + h / 2, h)
            d = central_diff(np.sin(x), h)
            return np.nanmax(np.abs(d - np.cos(x)))

        report = convergence_study(norm_at, [0.01, 0.005, 0.0025], 2.0, 0.1)
        assert report.passed, str(report)

    def test_axis1(self):
        f = np.outer(np.ones(4), np.linspace(0, 1, 6)) ** 2
        d = central_diff(f, 0.2, axis=1)
        assert np.allclose(d[:, 1:-1], 2 * np.linspace(0, 1, 6)[1:-1], atol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            central_diff(np.array([1.0, 2.0]), 0.5)

    def test_preserves_longdouble(self):
        x = np.linspace(0, 1, 9, dtype=np.longdouble)
        assert central_diff(x**2, x[1] - x[0]).dtype == np.longdouble

    @given(
        a=st.floats(-10, 10),
        b=st.floats(-10, 10),
    )
    @settings(max_examples=30, deadline=None)
    def test_exact_on_affine(self, a, b):
        x = np.linspace(-1, 2, 7)
        d = central_diff(a * x + b, x[1] - x[0])
        assert np.allclose(d[1:-1], a, atol=1e-9 * max(1, abs(a), abs(b)))


class TestSimpson:
    def test_exact_on_cubic(self):
        x = np.linspace(0, 2, 21)
        val = simpson(x**3, x[1] - x[0])
        assert abs(val - 4.0) < 1e-12

    def test_sine_integral(self):
        x = np.linspace(0, np.pi, 129)
        assert abs(simpson(np.sin(x), x[1] - x[0]) - 2.0) < 1e-8

    def test_even_count_rejected(self):
        with pytest.raises(EvenPointCount):
            simpson(np.zeros(4), 0.1)

    def test_axis_selection(self):
        x = np.linspace(0, 1, 9)
        f = np.broadcast_to(x**2, (3, 9))
        vals = simpson(f, x[1] - x[0], axis=1)
        assert vals.shape == (3,)
        assert np.allclose(vals, 1 / 3, atol=1e-10)


class TestCumulativeSimpson:
    def test_endpoint_value(self):
        from math import erf, sqrt, pi

        x = np.linspace(0, 3, 301)
        cum = cumulative_simpson(np.exp(-(x**2)), x[1] - x[0])
        assert cum[0] == 0.0
        exact = sqrt(pi) / 2 * erf(3.0)
        # the cumulative scheme is third order globally, the paired
        # composite rule fourth
        assert abs(cum[-1] - exact) < 1e-6
        assert abs(simpson(np.exp(-(x**2)), x[1] - x[0]) - exact) < 1e-10

    def test_exact_on_quadratic(self):
        x = np.linspace(0, 1, 11)
        cum = cumulative_simpson(x**2, x[1] - x[0])
        assert np.allclose(cum, x**3 / 3, atol=1e-14)

    def test_monotone_for_positive_integrand(self):
        x = np.linspace(0, 5, 41)
        cum = cumulative_simpson(1 + np.sin(x) ** 2, x[1] - x[0])
        assert np.all(np.diff(cum) > 0)


class TestMonotoneCubic:
    def test_knot_interpolation(self):
        xs = np.linspace(0, 1, 9)
        ys = xs + xs**3
        m = MonotoneCubic(xs, ys)
        assert np.allclose(m(xs), ys, atol=1e-14)

    def test_no_overshoot(self):
        # shape preservation: values stay within the data range
        xs = np.linspace(0, 1, 6)
        ys = np.array([0.0, 0.01, 0.02, 0.98, 0.99, 1.0])
        m = MonotoneCubic(xs, ys)
        fine = m(np.linspace(0, 1, 1001))
        assert fine.min() >= -1e-12 and fine.max() <= 1 + 1e-12
        assert np.all(np.diff(fine) >= -1e-12)

    def test_inverse_round_trip(self):
        xs = np.linspace(0, 2, 21)
        m = MonotoneCubic(xs, np.sinh(xs))
        for x in (0.13, 0.77, 1.5, 1.93):
            assert abs(m.inverse(m(x)) - x) < 1e-10

    def test_rejects_non_monotone(self):
        with pytest.raises(NonMonotoneData):
            MonotoneCubic(np.array([0.0, 1, 2]), np.array([0.0, 2, 1]))
        with pytest.raises(NonMonotoneData):
            MonotoneCubic(np.array([0.0, 2, 1]), np.array([0.0, 1, 2]))

    def test_derivative_positive(self):
        xs = np.linspace(0, 1, 11)
        m = MonotoneCubic(xs, np.exp(xs))
        assert np.all(m.derivative(np.linspace(0.05, 0.95, 50)) > 0)


class TestFitOrder:
    def test_recovers_synthetic_order(self):
        hs = [0.1, 0.05, 0.025]
        norms = [3.0 * h**2.37 for h in hs]
        rep = fit_order(hs, norms, target_order=2.37, tolerance=0.01)
        assert abs(rep.fitted_order - 2.37) < 1e-10
        assert rep.passed

    def test_fail_flag(self):
        rep = fit_order([0.1, 0.05], [1.0, 0.5], target_order=2.0, tolerance=0.3)
        assert abs(rep.fitted_order - 1.0) < 1e-10
        assert not rep.passed

    def test_requires_decreasing_h(self):
        with pytest.raises(NonMonotoneData):
            fit_order([0.05, 0.1], [1, 2])


class TestTrimmedMax:
    def test_ignores_nan(self):
        vals = np.full((20, 20), 2.0)
        vals[0, :] = np.nan
        assert trimmed_max(vals) == 2.0

    def test_trims_margin(self):
        vals = np.ones((40, 40))
        vals[4, 4] = 100.0  # inside the 10% trim margin
        assert trimmed_max(vals, frac=0.2) == 1.0

    def test_keeps_interior_peak(self):
        vals = np.ones((40, 40))
        vals[20, 20] = 7.0
        assert trimmed_max(vals) == 7.0
