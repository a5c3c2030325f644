import math

import numpy as np
import pytest
from scipy.special import expi

from gapseries import (
    BracketError,
    DomainError,
    IntervalSet,
    MonotoneFn,
    QuadratureError,
    affine,
    builtin,
    check_class_tag,
    density_measure,
    exponential,
    h_log_measure,
    h_measure,
    identity,
    log_measure,
    log_shifted,
    numeric_inverse,
    power,
)

E = math.e


class TestIntervalSet:
    def test_sorted_and_merged(self):
        s = IntervalSet.from_pairs([(3.0, 4.0), (0.0, 1.5), (1.0, 2.0)])
        assert s.intervals == ((0.0, 2.0), (3.0, 4.0))

    def test_touching_kept_separate(self):
        s = IntervalSet.from_pairs([(0.0, 1.0), (1.0, 2.0)])
        assert len(s) == 2
        assert s.coalesce().intervals == ((0.0, 2.0),)

    def test_reject_empty_interval(self):
        with pytest.raises(ValueError):
            IntervalSet.from_pairs([(1.0, 1.0)])

    def test_membership_half_open_vs_closed(self):
        half = IntervalSet.from_pairs([(0.0, 1.0)])
        closed = IntervalSet.from_pairs([(0.0, 1.0)], include_right=True)
        assert half.contains(0.0) and not half.contains(1.0)
        assert closed.contains(1.0)
        assert not closed.contains(1.0000001)

    def test_total_length_and_bounds(self):
        s = IntervalSet.from_pairs([(0.0, 1.0), (2.0, 5.0)])
        assert s.total_length == 4.0
        assert s.bounds == (0.0, 5.0)
        assert IntervalSet.empty().bounds is None

    def test_set_algebra(self):
        a = IntervalSet.from_pairs([(0.0, 3.0), (5.0, 6.0)])
        b = IntervalSet.from_pairs([(2.0, 5.5)])
        assert a.intersection(b).intervals == ((2.0, 3.0), (5.0, 5.5))
        assert a.difference(b).intervals == ((0.0, 2.0), (5.5, 6.0))
        sym = a.symmetric_difference(b)
        assert sym.total_length == pytest.approx(a.total_length + b.total_length - 2 * 1.5)

    def test_log_image(self):
        s = IntervalSet.from_pairs([(1.0, E)])
        assert s.log_image().intervals == ((0.0, 1.0),)
        with pytest.raises(DomainError):
            IntervalSet.from_pairs([(-1.0, 2.0)]).log_image()


class TestHMeasure:
    def test_identity_is_lebesgue(self):
        assert h_measure(identity(), IntervalSet.from_pairs([(1.0, 3.0)])) == 2.0

    def test_square_two_intervals(self):
        s = IntervalSet.from_pairs([(0.0, 1.0), (2.0, 3.0)])
        assert h_measure(power(2.0), s) == 6.0

    def test_empty_set(self):
        assert h_measure(identity(), IntervalSet.empty()) == 0.0

    def test_domain_floor_enforced(self):
        with pytest.raises(DomainError):
            h_measure(identity(), IntervalSet.from_pairs([(-1.0, 0.5)]))

    def test_additive_over_disjoint_union(self, rng):
        h = power(2.0)
        for _ in range(50):
            a = np.sort(rng.uniform(0.0, 10.0, 6))
            parts = [IntervalSet.from_pairs([(a[2 * i], a[2 * i + 1])]) for i in range(3)]
            union = IntervalSet.from_pairs([(a[0], a[1]), (a[2], a[3]), (a[4], a[5])])
            assert h_measure(h, union) == pytest.approx(
                sum(h_measure(h, p) for p in parts), rel=1e-14
            )

    def test_monotone_under_inclusion(self, rng):
        h = exponential(0.3)
        for _ in range(50):
            a, b = np.sort(rng.uniform(0.0, 5.0, 2))
            if a == b:
                continue
            inner = IntervalSet.from_pairs([(a + 0.25 * (b - a), b - 0.25 * (b - a))])
            outer = IntervalSet.from_pairs([(a, b)])
            assert h_measure(h, inner) <= h_measure(h, outer)


class TestLogMeasure:
    def test_unit_interval(self):
        assert log_measure(IntervalSet.from_pairs([(1.0, E)])) == pytest.approx(1.0, abs=1e-15)

    def test_two_intervals(self):
        s = IntervalSet.from_pairs([(E, E**2), (E**3, E**4)])
        assert log_measure(s) == pytest.approx(2.0, abs=1e-12)

    def test_empty(self):
        assert log_measure(IntervalSet.empty()) == 0.0

    def test_strict_mode(self):
        s = IntervalSet.from_pairs([(0.5, 2.0)])
        assert log_measure(s) == pytest.approx(math.log(4.0))
        with pytest.raises(DomainError):
            log_measure(s, strict=True)

    def test_positive_endpoints_required(self):
        with pytest.raises(DomainError):
            log_measure(IntervalSet.from_pairs([(0.0, 1.0)]))


class TestHLogMeasure:
    def test_identity_density(self):
        assert h_log_measure(identity(), IntervalSet.from_pairs([(1.0, E)])) == pytest.approx(1.0, abs=1e-12)

    def test_square_closed_form(self):
        # integrand 2r/r = 2 on [1, 2)
        assert h_log_measure(power(2.0), IntervalSet.from_pairs([(1.0, 2.0)])) == pytest.approx(2.0, abs=1e-12)

    def test_exponential_against_expi(self):
        s = IntervalSet.from_pairs([(0.5, 4.0)])
        want = expi(4.0) - expi(0.5)
        assert h_log_measure(exponential(), s) == pytest.approx(want, rel=1e-12)

    def test_matches_log_measure_for_identity(self, rng):
        for _ in range(20):
            a, b = np.sort(rng.uniform(0.2, 8.0, 2))
            if b - a < 1e-3:
                continue
            s = IntervalSet.from_pairs([(a, b)])
            assert h_log_measure(identity(), s) == pytest.approx(log_measure(s), abs=1e-10)

    def test_substitution_identity(self, rng):
        # integral of h'(r)/r over [a,b) equals integral of h'(e^x) over [ln a, ln b)
        hs = [identity(), power(2.0), exponential()]
        for _ in range(100):
            a, b = np.sort(rng.uniform(0.5, 6.0, 2))
            if b - a < 1e-3:
                continue
            s = IntervalSet.from_pairs([(a, b)])
            for h in hs:
                lhs = h_log_measure(h, s, 1e-10)
                rhs = density_measure(lambda x: h.derivative(math.exp(x)), s.log_image(), 1e-10)
                assert abs(lhs - rhs) <= 1e-8

    def test_positive_endpoints_required(self):
        with pytest.raises(DomainError):
            h_log_measure(identity(), IntervalSet.from_pairs([(0.0, 1.0)]))

    def test_quadrature_error_carries_estimate(self):
        # a wildly oscillating handle defeats the quadrature budget
        nasty = MonotoneFn(lambda x: x, lambda x: 1.0 + math.sin(1.0 / (x - 1.0000001)) if x > 1 else 1.0)
        with pytest.raises(QuadratureError) as err:
            h_log_measure(nasty, IntervalSet.from_pairs([(1.0, 2.0)]), 1e-13)
        assert err.value.achieved > 0


class TestNumericInverse:
    def test_identity(self):
        assert numeric_inverse(identity(), 5.0, 1e-10) == pytest.approx(5.0, abs=1e-9)

    def test_square_root(self):
        assert numeric_inverse(power(2.0), 9.0, 1e-10) == pytest.approx(3.0, abs=1e-9)

    def test_round_trip(self, rng):
        f = exponential(0.7)
        for t in rng.uniform(1.5, 100.0, 100):
            x = numeric_inverse(f, float(t), 1e-9)
            assert abs(f.value(x) - t) <= 1e-9

    def test_below_range_raises(self):
        with pytest.raises(BracketError):
            numeric_inverse(exponential(), 0.5, 1e-10)  # e^x >= 1 on [0, inf)

    def test_monotone_fn_inv_uses_explicit_inverse(self):
        assert power(2.0).inv(16.0) == 4.0


class TestMonotoneFnLibrary:
    def test_builtin_dispatch(self):
        assert builtin("power", exponent=3.0).name == "power(3)"
        with pytest.raises(ValueError):
            builtin("nope")

    def test_class_tags(self):
        assert identity().class_tag == "L_plus"
        assert power(2.0).class_tag == "L_plus"
        assert power(0.5).class_tag == "L_minus"
        assert exponential().class_tag == "L_plus"
        assert log_shifted().class_tag == "L_minus"
        assert affine(2.0, 1.0).class_tag == "L_plus"

    def test_class_tag_spot_check(self):
        assert check_class_tag(power(2.0), 0.1, 10.0)
        assert check_class_tag(log_shifted(), 0.1, 10.0)
        wrong = MonotoneFn(lambda x: x**2, lambda x: 2 * x, "L_minus")
        assert not check_class_tag(wrong, 0.1, 10.0)

    def test_lagrange_bounds(self, rng):
        # non-decreasing derivative: increment <= width * h'(right end);
        # non-increasing: increment <= width * h'(left end)
        plus, minus = power(2.0), log_shifted()
        for _ in range(1000):
            a, b = np.sort(rng.uniform(0.01, 20.0, 2))
            if a == b:
                continue
            assert plus.value(b) - plus.value(a) <= (b - a) * plus.derivative(b) + 1e-12
            assert minus.value(b) - minus.value(a) <= (b - a) * minus.derivative(a) + 1e-12

    def test_explicit_derivative_vs_finite_difference(self):
        h = exponential(0.5)
        for x in (0.5, 2.0, 7.0):
            eps = 1e-6
            fd = (h.value(x + eps) - h.value(x - eps)) / (2 * eps)
            assert h.derivative(x) == pytest.approx(fd, rel=1e-8)
