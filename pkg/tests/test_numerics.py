import math

import pytest

from gpplab import NoRootError
from gpplab.numerics import adaptive_simpson, expand_bracket, integrate_panels, invert_monotone


class TestAdaptiveSimpson:
    def test_polynomial(self):
        assert adaptive_simpson(lambda x: x * x, 0.0, 1.0, 1e-12) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_exponential(self):
        assert adaptive_simpson(math.exp, 0.0, 2.0, 1e-12) == pytest.approx(math.e**2 - 1.0, abs=1e-10)

    def test_kinked_integrand(self):
        # |x| has a kink at 0; adaptivity must still hit the exact value 1
        assert adaptive_simpson(abs, -1.0, 1.0, 1e-12) == pytest.approx(1.0, abs=1e-10)

    def test_orientation_and_empty(self):
        assert adaptive_simpson(math.sin, 1.0, 1.0) == 0.0
        assert adaptive_simpson(math.exp, 1.0, 0.0, 1e-12) == pytest.approx(1.0 - math.e, abs=1e-10)

    def test_panels_split_kinks(self):
        val = integrate_panels(lambda x: abs(x) + abs(x - 1.0), (-1.0, 0.0, 1.0, 2.0), 1e-12)
        assert val == pytest.approx(1.0 + 1.0 + 0.5 + 0.5 + 0.5 + 1.5, abs=1e-10)


class TestInvertMonotone:
    def test_cubic(self):
        root = invert_monotone(lambda x: x**3, 10.0, 0.0, 10.0, dfdx=lambda x: 3 * x * x)
        assert root == pytest.approx(10.0 ** (1.0 / 3.0), abs=1e-12)

    def test_without_derivative(self):
        root = invert_monotone(math.tanh, 0.5, -5.0, 5.0)
        assert root == pytest.approx(math.atanh(0.5), abs=1e-10)

    def test_no_root(self):
        with pytest.raises(NoRootError):
            invert_monotone(lambda x: x, 5.0, 0.0, 1.0)

    def test_exact_endpoint(self):
        assert invert_monotone(lambda x: x, 0.0, 0.0, 1.0) == 0.0


class TestExpandBracket:
    def test_brackets_tanh(self):
        lo, hi = expand_bracket(math.tanh, 0.9)
        assert math.tanh(lo) <= 0.9 <= math.tanh(hi)

    def test_unreachable_target(self):
        with pytest.raises(NoRootError):
            expand_bracket(math.tanh, 2.0)
