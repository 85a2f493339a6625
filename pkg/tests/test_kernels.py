import subprocess
import sys

import numpy as np
import pytest

from chiralfield import kernels


def profile(rng, npts):
    L = rng.uniform(-3, 3, npts)
    Lt = rng.uniform(-3, 3, npts)
    return L, Lt


CONFIGS = [
    ([-2.0], [1.0]),
    ([-2.0, 3.0], [1.0, 2.0]),
    ([-2.0, 3.0, -0.6], [1.0, 2.0, 0.7]),
    ([-2.0, 2.0], [1.0, 1.0]),
    ([0.5 + 0.8j, 0.5 - 0.8j], [1 + 0.5j, 1 - 0.5j]),
    ([-2.0], [-1.0]),
]


class TestFallback:
    @pytest.mark.parametrize("mus,cs", CONFIGS)
    def test_unit_determinant_and_real(self, mus, cs):
        rng = np.random.default_rng(7)
        L, Lt = profile(rng, 300)
        g11, g12, g22, max_imag = kernels.fallback_points(mus, cs, L, Lt)
        assert g11.dtype == np.float64 and g11.shape == (300,)
        assert max_imag < 1e-9
        assert np.max(np.abs(g11 * g22 - g12**2 - 1)) < 1e-11

    def test_scaling_survives_large_phases(self):
        # exponents ~ 200 overflow a naive assembly; the scaled one cannot
        L = np.array([200.0, -200.0, 0.0])
        Lt = np.array([-150.0, 150.0, 0.0])
        g11, g12, g22, _ = kernels.fallback_points([-2.0, 3.0], [1.0, 2.0],
                                                   L, Lt)
        assert np.all(np.isfinite(g11))
        assert np.max(np.abs(g11 * g22 - g12**2 - 1)) < 1e-9


@pytest.mark.skipif(not kernels.HAVE_NATIVE,
                    reason="compiled kernel not built")
class TestNativeAgreement:
    @pytest.mark.parametrize("mus,cs", CONFIGS)
    def test_matches_fallback(self, mus, cs):
        rng = np.random.default_rng(11)
        L, Lt = profile(rng, 500)
        ref = kernels.fallback_points(mus, cs, L, Lt)
        nat = kernels.native_points(mus, cs, L, Lt)
        for a, b in zip(ref[:3], nat[:3]):
            assert np.allclose(a, b, rtol=1e-13, atol=1e-13)
        assert nat[3] < 1e-9


class TestSelection:
    def test_kernel_label(self):
        assert kernels.KERNEL in ("native", "fallback")
        if kernels.HAVE_NATIVE:
            assert kernels.KERNEL == "native"

    def test_env_forces_fallback(self):
        code = ("import chiralfield.kernels as k; "
                "print(k.KERNEL)")
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True,
            env={"PATH": "/usr/bin:/bin", "CHIRAL_KERNEL": "fallback"},
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "fallback"
