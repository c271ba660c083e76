import math

import gmpy2
import pytest
from gmpy2 import mpfr, mpq

from latline._context import workprec
from latline.dioph import (
    PsiSpec,
    b_s_value,
    diophantine_margin,
    gallagher_scan,
    omega_dual_lower,
    omega_mult_lower,
    omega_simul_lower,
    psi_count,
)
from latline.exactnum import Rational, Surd, as_real, frac_dist

R2, R3 = Surd(0, 1, 2), Surd(0, 1, 3)


class TestMargin:
    def test_rational_collapses(self):
        m, q = diophantine_margin([Rational(1, 2)], mpq(1, 10), 10)
        assert float(m) == 0.0 and q == 2

    def test_sqrt2_stays_positive(self):
        m, q = diophantine_margin([R2], mpq(1, 10), 10_000)
        assert float(m) > 0.05

    def test_pair_stays_positive(self):
        m, q = diophantine_margin([R2, R3], mpq(1, 5), 10_000)
        assert float(m) > 0.05

    def test_margin_monotone_in_qmax(self):
        m1, _ = diophantine_margin([R2], mpq(1, 10), 100)
        m2, _ = diophantine_margin([R2], mpq(1, 10), 1000)
        assert m2 <= m1


class TestDualExponent:
    def test_rational_relation_flags_infinite(self):
        est = omega_dual_lower(Rational(1, 3), Rational(1, 7), 25)
        assert est.infinite and est.lower_bound is None
        assert est.best().quality == math.inf

    def test_sqrt_line_in_dirichlet_window(self):
        est = omega_dual_lower(R2, R3, 1000)
        # Dirichlet guarantees 2 from below; the standing hypothesis is < 5.
        # Small heights contribute lucky witnesses above 2; the frozen value
        # of the full scan is 3.2877... at (x, y) = (5, 4).
        assert 2.0 - 0.05 <= est.lower_bound < 5.0
        assert abs(est.lower_bound - 3.2877361325) < 1e-6
        assert est.best().datum == (5, 4)

    def test_same_surd_cancellation_line(self):
        est = omega_dual_lower(R2, Rational(1) - R2, 200)
        assert est.infinite or est.lower_bound >= 1.0  # x=y witnesses well-handled

    def test_monotone_in_hmax(self):
        e1 = omega_dual_lower(R2, R3, 100)
        e2 = omega_dual_lower(R2, R3, 400)
        assert e2.lower_bound >= e1.lower_bound - 1e-12


class TestNExponents:
    def test_rational_infinite(self):
        for fn in (omega_simul_lower, omega_mult_lower):
            est = fn(Rational(1, 3), Rational(2, 5), 100)
            assert est.infinite

    def test_dirichlet_floor_simultaneous(self):
        est = omega_simul_lower(R2, R3, 100_000)
        assert est.lower_bound >= 0.5 - 0.05

    def test_witness_transfer_to_multiplicative(self):
        # the same n that certifies w for the max certifies 2w for the product
        simul = omega_simul_lower(R2, R3, 10_000)
        mult = omega_mult_lower(R2, R3, 10_000)
        n = simul.best().datum[0]
        with workprec(256):
            da = frac_dist(as_real(n) * R2).to_mpfr(256)
            db = frac_dist(as_real(n) * R3).to_mpfr(256)
            w_mult_at_n = float(-gmpy2.log(da * db) / gmpy2.log(mpfr(n)))
        assert w_mult_at_n >= 2 * simul.best().quality - 1e-9
        assert mult.lower_bound >= w_mult_at_n - 1e-9

    def test_witness_recertification(self):
        est = omega_mult_lower(R2, R3, 50_000)
        for wit in est.witnesses:
            n = wit.datum[0]
            with workprec(512):
                da = frac_dist(as_real(n) * R2).to_mpfr(512)
                db = frac_dist(as_real(n) * R3).to_mpfr(512)
                w2 = float(-gmpy2.log(da * db) / gmpy2.log(mpfr(n)))
            assert abs(w2 - wit.quality) < 1e-6


class TestBs:
    def test_zero_vector_convention(self):
        r = b_s_value(0, 0, 0)
        assert float(r.value) == 1.0 and r.q == 1 and r.certified

    def test_half_half_at_s2(self):
        # q = 1 term: min(1, e^-1/(1/2), ...) = 2/e; q = 2: distances vanish,
        # so the term is 1/4 < 2/e and the scan certifies at q = 2
        r = b_s_value(mpq(1, 2), mpq(1, 2), 2)
        assert abs(float(r.value) - 2 / math.e) < 1e-12
        assert r.q == 1 and r.certified
        # brute force to q = 1000 agrees
        with workprec(192):
            decay = gmpy2.exp(mpfr(-1))
            best = mpfr(0)
            for q in range(1, 1001):
                terms = [mpfr(1) / (q * q)]
                for v in (mpq(1, 2), mpq(1, 2)):
                    d = frac_dist(Rational(q) * as_real(v))
                    if d.sign():
                        terms.append(decay / (q * d.to_mpfr(192)))
                best = max(best, min(terms))
            assert abs(float(best - r.value)) < 1e-15

    def test_monotone_in_s(self):
        prev = None
        for s in (0, 1, 2, 4, 8):
            r = b_s_value(R2, R3, s)
            if prev is not None:
                assert float(r.value) <= float(prev) + 1e-15
            prev = r.value

    def test_uncertified_flag(self):
        r = b_s_value(R2, R3, 0, hard_cap=1)
        assert not r.certified


class TestGallagher:
    def test_rational_hits_zero(self):
        g = gallagher_scan(Rational(1, 2), R3, 100)
        assert float(g.min_value) == 0.0 and g.argmin == 2

    def test_matches_full_exact_scan(self):
        # prefilter + certification must equal the plain full scan
        alpha, beta = R2, R3
        g = gallagher_scan(alpha, beta, 3000)
        with workprec(192):
            best, best_n, trace = None, None, []
            for n in range(2, 3001):
                da = frac_dist(as_real(n) * alpha).to_mpfr(192)
                db = frac_dist(as_real(n) * beta).to_mpfr(192)
                ln = gmpy2.log(mpfr(n))
                v = mpfr(n) * ln * ln * da * db
                if best is None or v < best:
                    best, best_n = v, n
                    trace.append((n, v))
        assert g.argmin == best_n
        assert [n for n, _ in g.trace] == [n for n, _ in trace]
        assert float(abs(g.min_value - best)) < 1e-30

    def test_running_min_monotone_and_precision_stable(self):
        beta = Surd(0, mpq(5, 64), 7)
        alpha = R2 * beta + R3
        g = gallagher_scan(alpha, beta, 50_000)
        vals = [v for _, v in g.trace]
        assert all(float(b) < float(a) for a, b in zip(vals, vals[1:]))
        with workprec(384):
            alpha2 = as_real(R2.to_mpfr(384) * beta.to_mpfr(384) + R3.to_mpfr(384))
        g2 = gallagher_scan(alpha2, beta, 50_000, bits=384)
        assert [n for n, _ in g.trace] == [n for n, _ in g2.trace]
        for (_, v1), (_, v2) in zip(g.trace, g2.trace):
            assert abs(float((as_real(v1) - as_real(v2)) / as_real(v1))) < 1e-20


class TestPsiCount:
    def test_zero_psi(self):
        assert psi_count(R2, R3, PsiSpec.constant(0), 50) == (0, [])

    def test_unit_psi_counts_everything(self):
        count, sols = psi_count(R2, R3, PsiSpec.constant(1), 50)
        assert count == 49 and sols == list(range(2, 51))

    def test_log_power_matches_direct_scan(self):
        psi = PsiSpec.log_power(1, 3)
        beta = Surd(0, mpq(9, 64), 7)
        alpha = R2 * beta + R3
        count, sols = psi_count(alpha, beta, psi, 5000)
        with workprec(192):
            direct = []
            for n in range(2, 5001):
                da = frac_dist(as_real(n) * alpha).to_mpfr(192)
                db = frac_dist(as_real(n) * beta).to_mpfr(192)
                if da * db < psi.value_mpfr(n):
                    direct.append(n)
        assert sols == direct

    def test_table_psi_is_step_function(self):
        psi = PsiSpec(kind="table", table=((2, mpq(1, 2)), (10, mpq(1, 4))))
        assert float(psi.value_mpfr(5)) == 0.5
        assert float(psi.value_mpfr(10)) == 0.25
        assert float(psi.value_mpfr(999)) == 0.25

    def test_table_must_decrease(self):
        with pytest.raises(ValueError):
            PsiSpec(kind="table", table=((2, 1), (5, 2)))
