import gmpy2
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from latline._context import workprec
from latline.intervals import IntervalSet


def iset(pairs):
    with workprec(192):
        return IntervalSet([(mpfr(a), mpfr(b)) for a, b in pairs])


ivs = st.lists(
    st.tuples(
        st.integers(min_value=-40, max_value=40), st.integers(min_value=0, max_value=15)
    ).map(lambda p: (p[0] / 4.0, p[0] / 4.0 + p[1] / 4.0)),
    max_size=6,
)


class TestAlgebra:
    def test_merge_touching(self):
        s = iset([(0, 1), (1, 2), (3, 4)])
        assert len(s) == 2
        assert float(s.measure()) == 3.0

    def test_empty(self):
        assert IntervalSet.empty().is_empty()
        assert float(IntervalSet.empty().measure()) == 0.0

    def test_intersection_basic(self):
        a = iset([(0, 2), (4, 6)])
        b = iset([(1, 5)])
        c = a.intersection(b)
        assert [(float(l), float(h)) for l, h in c] == [(1.0, 2.0), (4.0, 5.0)]

    @given(ivs, ivs)
    @settings(max_examples=200, deadline=None)
    def test_inclusion_exclusion(self, xs, ys):
        a, b = iset(xs), iset(ys)
        lhs = float(a.union(b).measure()) + float(a.intersection(b).measure())
        rhs = float(a.measure()) + float(b.measure())
        assert abs(lhs - rhs) < 1e-12

    @given(ivs, ivs)
    @settings(max_examples=100, deadline=None)
    def test_intersection_subset(self, xs, ys):
        a, b = iset(xs), iset(ys)
        c = a.intersection(b)
        assert float(c.measure()) <= min(float(a.measure()), float(b.measure())) + 1e-12

    def test_exhaustive_small_cases(self):
        # all pairs of single intervals with endpoints in a small grid
        import itertools

        grid = [0, 1, 2, 3]
        for a0, a1, b0, b1 in itertools.product(grid, repeat=4):
            if a1 < a0 or b1 < b0:
                continue
            A, B = iset([(a0, a1)]), iset([(b0, b1)])
            lhs = float(A.union(B).measure()) + float(A.intersection(B).measure())
            rhs = float(A.measure()) + float(B.measure())
            assert abs(lhs - rhs) < 1e-14

    def test_contains_point(self):
        s = iset([(0, 1), (2, 3)])
        with workprec(192):
            assert s.contains_point(mpfr("0.5"))
            assert s.contains_point(mpfr(2))
            assert not s.contains_point(mpfr("1.5"))

    def test_clip(self):
        s = iset([(0, 10)])
        with workprec(192):
            c = s.clip(mpfr(2), mpfr(3))
        assert float(c.measure()) == 1.0
