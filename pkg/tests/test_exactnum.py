import json

import gmpy2
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from latline._context import temp_precision
from latline.exactnum import (
    BigFloat,
    LinearSurdForm,
    Rational,
    Surd,
    as_real,
    cf_expansion,
    floor_real,
    frac_dist,
    nearest_int,
    real_from_json,
    real_to_json,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=97)


def R(x):
    return as_real(mpq(x.numerator, x.denominator)) if hasattr(x, "numerator") else as_real(x)


class TestFracDist:
    def test_quarter_offset(self):
        assert frac_dist(Rational(11, 4)) == Rational(1, 4)

    def test_half_integer_tie_is_exactly_half(self):
        assert frac_dist(Rational(-1, 2)) == Rational(1, 2)

    def test_sqrt2(self):
        # high-precision sqrt(2) - 1, cross-checked at two precisions
        d = frac_dist(Surd(0, 1, 2))
        assert isinstance(d, Surd)
        assert d == Surd(-1, 1, 2)
        lo64 = d.to_mpfr(64)
        lo256 = d.to_mpfr(256)
        assert abs(float(lo64 - lo256)) < 1e-15
        assert str(lo256)[:12] == "0.4142135623"

    @given(rationals, st.integers(min_value=-30, max_value=30))
    def test_integer_shift_invariance(self, x, k):
        x = R(x)
        assert frac_dist(x + k) == frac_dist(x)

    @given(rationals)
    def test_negation_invariance_and_range(self, x):
        x = R(x)
        d = frac_dist(x)
        assert frac_dist(-x) == d
        assert Rational(0) <= d <= Rational(1, 2)

    @given(st.integers(min_value=-40, max_value=40), st.integers(min_value=-9, max_value=9),
           st.sampled_from([2, 3, 5, 7, 10]))
    def test_surd_shift_and_negation(self, p, q, d):
        x = Surd(p, mpq(q if q else 1, 3), d)
        assert frac_dist(-x) == frac_dist(x)
        assert frac_dist(x + 7) == frac_dist(x)
        assert Rational(0) <= frac_dist(x) <= Rational(1, 2)

    def test_precision_doubling_stability(self):
        # doubling the float precision shifts rendered surd distances < 2^-100
        for x in [Surd(0, 1, 2), Surd(mpq(3, 7), mpq(-5, 11), 3), Surd(12, mpq(1, 13), 5)]:
            d = frac_dist(x)
            with temp_precision(192):
                a = d.to_mpfr()
            with temp_precision(384):
                b = d.to_mpfr()
            assert abs(float(a - b)) < 2.0 ** -100


class TestFloorNearest:
    @given(rationals)
    def test_floor_matches_python(self, x):
        import math

        assert floor_real(R(x)) == math.floor(x)

    def test_floor_surd(self):
        assert floor_real(Surd(0, 1, 2)) == 1
        assert floor_real(Surd(0, -1, 2)) == -2
        assert floor_real(Surd(3, -2, 2)) == 0  # 0.1715...
        assert floor_real(Surd(0, 100, 2)) == 141

    @given(rationals)
    def test_nearest_is_nearest(self, x):
        xr = R(x)
        m, dist = nearest_int(xr)
        assert dist == abs(xr - m)
        for other in (m - 1, m + 1):
            assert abs(xr - other) >= dist


class TestArithmetic:
    def test_surd_field_closure(self):
        a = Surd(mpq(1, 2), mpq(3, 4), 5)
        b = Surd(-2, mpq(1, 3), 5)
        assert isinstance(a * b, (Surd, Rational))
        assert (a * b - b * a).sign() == 0
        assert a / a == Rational(1)
        assert (a + b) - b == a

    def test_conjugate_product_is_rational(self):
        a = Surd(3, 2, 2)
        conj = Surd(3, -2, 2)
        assert a * conj == Rational(1)  # 9 - 8

    def test_cross_surd_coerces_to_bigfloat(self):
        c = Surd(0, 1, 2) + Surd(0, 1, 3)
        assert isinstance(c, BigFloat)
        assert abs(float(c) - (2 ** 0.5 + 3 ** 0.5)) < 1e-12

    def test_squarefree_normalisation(self):
        assert Surd(0, 1, 8) == Surd(0, 2, 2)
        assert Surd(1, 1, 9) == Rational(4)  # sqrt(9) = 3

    @given(rationals, rationals)
    def test_exact_comparison_total_order(self, x, y):
        a, b = R(x), R(y)
        assert (a < b) == (x < y)
        assert (a == b) == (x == y)

    def test_surd_vs_rational_comparison_is_exact(self):
        # 239/169 < sqrt(2) < 577/408   (consecutive convergents)
        r2 = Surd(0, 1, 2)
        assert Rational(239, 169) < r2 < Rational(577, 408)
        assert not (r2 < Rational(239, 169))


class TestCF:
    def test_rational_terminates(self):
        e = cf_expansion(Rational(7, 3), 5)
        assert e.quotients == [2, 3]
        assert e.convergents == [mpq(2, 1), mpq(7, 3)]
        assert e.terminated

    def test_sqrt2(self):
        e = cf_expansion(Surd(0, 1, 2), 4)
        assert e.quotients == [1, 2, 2, 2, 2]
        assert e.convergents == [mpq(1), mpq(3, 2), mpq(7, 5), mpq(17, 12), mpq(41, 29)]
        assert not e.terminated

    def test_golden_ratio(self):
        e = cf_expansion(Surd(mpq(1, 2), mpq(1, 2), 5), 3)
        assert e.quotients == [1, 1, 1, 1]

    @given(st.sampled_from([2, 3, 5, 6, 7, 10, 13]), st.integers(min_value=2, max_value=12))
    def test_convergent_quality(self, d, n):
        # |x - p/q| < 1/(q q') for consecutive convergents
        x = Surd(0, 1, d)
        e = cf_expansion(x, n)
        for k in range(len(e.convergents) - 1):
            pq = e.convergents[k]
            qk = pq.denominator
            qk1 = e.convergents[k + 1].denominator
            assert abs(x - Rational(pq)) < Rational(1, qk * qk1)

    @given(st.sampled_from([2, 3, 5, 7]), st.integers(min_value=2, max_value=10))
    def test_dirichlet_quality_of_convergents(self, d, n):
        # q * <q x> < 1 for every convergent denominator q
        x = Surd(0, 1, d)
        e = cf_expansion(x, n)
        for pq in e.convergents:
            q = int(pq.denominator)
            assert Rational(q) * frac_dist(Rational(q) * x) < Rational(1)

    def test_negative_surd(self):
        x = Surd(0, -1, 2)  # -1.41421...; CF [-2; 1, 1, 2, 2, ...]
        e = cf_expansion(x, 4)
        assert e.quotients[0] == -2
        approx = float(e.convergents[-1])
        assert abs(approx - (-(2 ** 0.5))) < 1e-2


class TestLinearSurdForm:
    def test_exact_single_surd_sign(self):
        f = LinearSurdForm().add(mpq(-99), 1).add(mpq(70), 2)  # 70 sqrt2 - 99 < 0
        assert f.sign() == -1
        f = LinearSurdForm().add(mpq(99), 1).add(mpq(-70), 2)
        assert f.sign() == 1

    def test_two_surd_sign_via_bracketing(self):
        # 5 sqrt2 - 4 sqrt3 - 1/7 = 0.000354... > 0
        f = LinearSurdForm().add(mpq(5), 2).add(mpq(-4), 3).add(mpq(-1, 7))
        assert f.sign() == 1

    def test_zero_detection(self):
        f = LinearSurdForm().add(mpq(2), 2).add(mpq(-1), 8)  # 2 sqrt2 - sqrt8 = 0
        assert f.sign() == 0

    def test_from_real(self):
        f = LinearSurdForm.from_real(Surd(mpq(1, 3), 2, 5), scale=3)
        assert f.sign() == 1
        assert f.terms[1] == 1 and f.terms[5] == 6


class TestJSON:
    def test_round_trip_all_kinds(self):
        vals = [
            Rational(-(10 ** 30) + 7, 3),
            Surd(mpq(1, 3), mpq(-2, 7), 10),
            BigFloat(as_real(mpq(1, 3)).to_mpfr(256), 256),
        ]
        for v in vals:
            j = json.loads(json.dumps(real_to_json(v)))
            assert real_from_json(j) == v

    def test_bigfloat_records_precision(self):
        b = BigFloat(as_real(mpq(2, 3)).to_mpfr(160), 160)
        assert real_to_json(b)["bits"] == 160


class TestCoercion:
    def test_float_is_exact_dyadic(self):
        assert as_real(0.5) == Rational(1, 2)
        assert as_real(0.1) != Rational(1, 10)  # binary float artefact kept honest

    def test_int_and_fraction(self):
        from fractions import Fraction

        assert as_real(7) == Rational(7)
        assert as_real(Fraction(3, 4)) == Rational(3, 4)

    def test_hash_consistency_across_kinds(self):
        assert hash(as_real(mpq(1, 2))) == hash(BigFloat(as_real(mpq(1, 2)).to_mpfr()))
