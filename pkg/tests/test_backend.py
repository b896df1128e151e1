"""Cross-checks between the compiled core and the NumPy fallback, plus the
exactness contract of the constant-weight fast path."""
import os
import subprocess
import sys

import numpy as np
import pytest

from gpplab import _fallback, backend
from gpplab.dnorm import uniform_grid

HAVE_NATIVE = backend.using_native()

KINDS = [(_fallback.KIND_LAPLACE, "laplace"), (_fallback.KIND_GAUSSIAN, "gaussian")]


def _random_inputs(seed, n_s=4000, n_grid=257):
    rng = np.random.default_rng(seed)
    s = rng.normal(0.5, 4.0, n_s)
    t = uniform_grid(n_grid - 1)
    fabs = rng.uniform(0.1, 2.0, n_grid)
    return s, t, fabs


class TestFallbackInternals:
    @pytest.mark.parametrize("kind,name", KINDS)
    def test_const_equals_grid_with_unit_weights(self, kind, name):
        # the O(1)-per-draw constant path must reproduce the full grid
        # reduction bit for bit, including non-power-of-two grids
        for n_grid in (64, 100, 257, 1024):
            s, t, _ = _random_inputs(11, n_s=3000, n_grid=n_grid + 1)
            for beta in (0.3, 1.0, 2.7):
                ones = np.ones(n_grid + 1)
                sup_g, inf_g = _fallback.sup_inf_grid(kind, s, ones, t, beta)
                sup_c, inf_c = _fallback.sup_inf_const(kind, s, t, beta)
                assert np.array_equal(inf_c, inf_g), (name, n_grid, beta)
                assert np.array_equal(sup_c, sup_g), (name, n_grid, beta)

    @pytest.mark.parametrize("kind,name", KINDS)
    def test_grid_matches_paths_matrix(self, kind, name):
        s, t, fabs = _random_inputs(12, n_s=500)
        inv_g = np.full(len(s), 2.0)
        paths = _fallback.paths_matrix(kind, s, t, 1.3, inv_g)
        sup, inf = _fallback.sup_inf_grid(kind, s, np.ones(len(t)), t, 1.3)
        assert np.array_equal(paths.max(axis=1), sup * 2.0)
        assert np.array_equal(paths.min(axis=1), inf * 2.0)


@pytest.mark.skipif(not HAVE_NATIVE, reason="compiled core not built")
class TestNativeAgreement:
    @pytest.mark.parametrize("kind,name", KINDS)
    def test_kernel_pdf(self, kind, name):
        from gpplab import _native

        x = np.linspace(-30.0, 30.0, 10_001)
        assert np.allclose(_native.kernel_pdf(kind, x), _fallback.kernel_pdf(kind, x), rtol=1e-14)

    @pytest.mark.parametrize("kind,name", KINDS)
    def test_sup_inf_grid(self, kind, name):
        from gpplab import _native

        s, t, fabs = _random_inputs(13)
        for beta in (0.4, 1.0, 3.1):
            sup_n, inf_n = _native.sup_inf_grid(kind, s, fabs, t, beta)
            sup_f, inf_f = _fallback.sup_inf_grid(kind, s, fabs, t, beta)
            assert np.allclose(sup_n, sup_f, rtol=1e-13)
            assert np.allclose(inf_n, inf_f, rtol=1e-13)

    @pytest.mark.parametrize("kind,name", KINDS)
    def test_sup_inf_const(self, kind, name):
        from gpplab import _native

        s, t, _ = _random_inputs(14)
        sup_n, inf_n = _native.sup_inf_const(kind, s, t, 1.7)
        sup_f, inf_f = _fallback.sup_inf_const(kind, s, t, 1.7)
        assert np.allclose(sup_n, sup_f, rtol=1e-13)
        assert np.allclose(inf_n, inf_f, rtol=1e-13)

    @pytest.mark.parametrize("kind,name", KINDS)
    def test_native_const_equals_native_grid(self, kind, name):
        from gpplab import _native

        for n_grid in (100, 1024):
            s, t, _ = _random_inputs(15, n_s=3000, n_grid=n_grid + 1)
            ones = np.ones(n_grid + 1)
            sup_g, inf_g = _native.sup_inf_grid(kind, s, ones, t, 0.9)
            sup_c, inf_c = _native.sup_inf_const(kind, s, t, 0.9)
            assert np.array_equal(inf_c, inf_g)
            assert np.array_equal(sup_c, sup_g)

    def test_paths_matrix(self):
        from gpplab import _native

        s, t, _ = _random_inputs(16, n_s=200)
        inv_g = np.random.default_rng(1).uniform(0.5, 2.0, len(s))
        a = _native.paths_matrix(0, s, t, 1.1, inv_g)
        b = _fallback.paths_matrix(0, s, t, 1.1, inv_g)
        assert np.allclose(a, b, rtol=1e-13)


class TestSelection:
    def test_forced_fallback_subprocess(self):
        env = dict(os.environ, GPPLAB_FORCE_FALLBACK="1")
        out = subprocess.run(
            [sys.executable, "-c", "from gpplab import backend; print(backend.BACKEND)"],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        assert out.stdout.strip() == "fallback"

    def test_backend_reported(self):
        assert backend.BACKEND in ("native", "fallback")

    def test_fallback_statistics_match_current_backend(self, laplace):
        # end-to-end: exceedance counts agree across backends on one seed
        env = dict(os.environ, GPPLAB_FORCE_FALLBACK="1")
        code = (
            "import numpy as np\n"
            "from gpplab import laplace_kernel, build_generator\n"
            "from gpplab.processes import exceedance_scan\n"
            "gen = build_generator(laplace_kernel(), 1.0, 0.5)\n"
            "count, pos = exceedance_scan(gen, -0.05, 100000, np.random.default_rng(77))\n"
            "print(count, repr(float(pos.sum())))\n"
        )
        out = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
        )
        import numpy as np

        from gpplab import build_generator
        from gpplab.processes import exceedance_scan

        gen = build_generator(laplace, 1.0, 0.5)
        count, pos = exceedance_scan(gen, -0.05, 100_000, np.random.default_rng(77))
        got_count, got_sum = out.stdout.split()
        assert int(got_count) == count
        assert float(got_sum) == pytest.approx(float(pos.sum()), rel=1e-9)
