"""Exact scalar arithmetic: rationals, quadratic surds, and big floats.

Three representations, one interface:

* ``Rational`` wraps an exact fraction (gmpy2.mpq).
* ``Surd`` is p + q*sqrt(d) with rational p, q (q != 0) and squarefree d >= 2.
  Sums, products and quotients of surds over the same sqrt(d) stay exact;
  comparisons and floor/nearest-integer are decided with pure integer
  arithmetic (no rounding at all).
* ``BigFloat`` wraps an mpfr value and remembers the precision it was
  produced under.  Mixing incompatible exact kinds (say sqrt(2) with sqrt(3))
  coerces to BigFloat at the active working precision; that coercion is the
  only lossy step in the tower and it is always explicit in the result kind.

The one primitive everything downstream leans on is ``frac_dist``: distance
to the nearest integer.  For Rational and Surd inputs it is exact (the result
is again a Rational or Surd); for BigFloat it is correct at the input's own
precision.
"""

from __future__ import annotations

import json
from typing import Iterable, NamedTuple

import gmpy2
from gmpy2 import isqrt, mpfr, mpq, mpz

from ._context import precision_bits, workprec

__all__ = [
    "Real",
    "Rational",
    "Surd",
    "BigFloat",
    "as_real",
    "frac_dist",
    "nearest_int",
    "floor_real",
    "cf_expansion",
    "CFExpansion",
    "sqrt_bracket",
    "LinearSurdForm",
    "real_to_json",
    "real_from_json",
]


# ---------------------------------------------------------------------------
# squarefree normalisation


def _squarefree_split(d: int) -> tuple[int, int]:
    """Write d = s^2 * f with f squarefree (for the d sizes used here).

    Trial division up to 10^4 plus a perfect-square check of the cofactor.
    Radicands in this library are tiny (2, 3, 5, 7, 14, ...), so this is
    exhaustive in practice; a cofactor with a prime-square factor above 10^8
    would slip through, which we accept and document.
    """
    d = int(d)
    if d <= 0:
        raise ValueError("radicand must be positive")
    s, f = 1, 1
    n = d
    p = 2
    while p * p <= n and p < 10_000:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            f *= p
        p += 1 if p == 2 else 2
    r = isqrt(n)
    if r * r == n:
        s *= int(r)
    else:
        f *= n
    return s, f


def _sign_p_plus_q_sqrt_d(u: mpq, v: mpq, d: int) -> int:
    """Exact sign of u + v*sqrt(d) for rational u, v and non-square d >= 2."""
    if v == 0:
        return -1 if u < 0 else (1 if u > 0 else 0)
    if u == 0:
        return -1 if v < 0 else 1
    if u > 0 and v > 0:
        return 1
    if u < 0 and v < 0:
        return -1
    lhs = u * u
    rhs = v * v * d
    if lhs == rhs:
        # would force sqrt(d) rational; unreachable for squarefree d >= 2
        return 0
    cmp = 1 if lhs > rhs else -1
    return cmp if u > 0 else -cmp


def sqrt_bracket(d: int, bits: int) -> tuple[mpfr, mpfr]:
    """Certified enclosure lo <= sqrt(d) <= hi at the given precision."""
    with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
        lo = gmpy2.sqrt(mpfr(d))
    with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
        hi = gmpy2.sqrt(mpfr(d))
    return lo, hi


# ---------------------------------------------------------------------------
# the Real tower


class Real:
    """Common base for the three exact-scalar representations."""

    __slots__ = ()

    # subclasses define: _as_pair() for coercion, to_mpfr, kind

    def to_mpfr(self, bits: int | None = None) -> mpfr:
        raise NotImplementedError

    def __float__(self) -> float:
        return float(self.to_mpfr(64))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return _add(self, as_real(other))

    def __radd__(self, other):
        return _add(as_real(other), self)

    def __sub__(self, other):
        return _add(self, -as_real(other))

    def __rsub__(self, other):
        return _add(as_real(other), -self)

    def __mul__(self, other):
        return _mul(self, as_real(other))

    def __rmul__(self, other):
        return _mul(as_real(other), self)

    def __truediv__(self, other):
        return _div(self, as_real(other))

    def __rtruediv__(self, other):
        return _div(as_real(other), self)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __pow__(self, k):
        if not isinstance(k, (int, mpz)) or k < 0:
            raise TypeError("Real ** only supports nonnegative integer exponents")
        out = Rational(1)
        base = self
        k = int(k)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        raise NotImplementedError

    # -- comparisons (exact whenever both operands are exact kinds) ---------

    def _cmp(self, other: "Real") -> int:
        diff = _add(self, -other)
        return diff.sign()

    def __lt__(self, other):
        return self._cmp(as_real(other)) < 0

    def __le__(self, other):
        return self._cmp(as_real(other)) <= 0

    def __gt__(self, other):
        return self._cmp(as_real(other)) > 0

    def __ge__(self, other):
        return self._cmp(as_real(other)) >= 0

    def __eq__(self, other):
        try:
            r = as_real(other)
        except TypeError:
            return NotImplemented
        return self._cmp(r) == 0

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def bracket(self, bits: int | None = None) -> tuple[mpfr, mpfr]:
        """Certified enclosure of the value at the given precision."""
        raise NotImplementedError


class Rational(Real):
    """An exact fraction."""

    __slots__ = ("value",)

    def __init__(self, num, den=1):
        v = mpq(num, den)
        object.__setattr__(self, "value", v)

    def __setattr__(self, *a):
        raise AttributeError("Rational is immutable")

    kind = "rational"

    def sign(self) -> int:
        return -1 if self.value < 0 else (1 if self.value > 0 else 0)

    def __neg__(self):
        return Rational(-self.value)

    def to_mpfr(self, bits: int | None = None) -> mpfr:
        with workprec(bits):
            return mpfr(self.value)

    def bracket(self, bits: int | None = None) -> tuple[mpfr, mpfr]:
        b = bits or precision_bits()
        with gmpy2.context(precision=b, round=gmpy2.RoundDown):
            lo = mpfr(self.value)
        with gmpy2.context(precision=b, round=gmpy2.RoundUp):
            hi = mpfr(self.value)
        return lo, hi

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"Rational({self.value})"


class Surd(Real):
    """p + q*sqrt(d) with rational p, q != 0 and squarefree d >= 2."""

    __slots__ = ("p", "q", "d")

    def __new__(cls, p, q, d):
        p = mpq(p)
        q = mpq(q)
        s, f = _squarefree_split(int(d))
        q = q * s
        d = f
        if q == 0 or d == 1:
            # degenerate: collapses to a rational (sqrt(1) or zero weight)
            return Rational(p + q)
        self = object.__new__(cls)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "d", int(d))
        return self

    def __setattr__(self, *a):
        raise AttributeError("Surd is immutable")

    kind = "surd"

    def sign(self) -> int:
        return _sign_p_plus_q_sqrt_d(self.p, self.q, self.d)

    def __neg__(self):
        return Surd(-self.p, -self.q, self.d)

    def to_mpfr(self, bits: int | None = None) -> mpfr:
        with workprec(bits):
            return mpfr(self.p) + mpfr(self.q) * gmpy2.sqrt(mpfr(self.d))

    def bracket(self, bits: int | None = None) -> tuple[mpfr, mpfr]:
        b = bits or precision_bits()
        slo, shi = sqrt_bracket(self.d, b + 8)
        qlo, qhi = (self.q * slo, self.q * shi) if self.q > 0 else (self.q * shi, self.q * slo)
        with gmpy2.context(precision=b, round=gmpy2.RoundDown):
            lo = mpfr(qlo) + mpfr(self.p)
        with gmpy2.context(precision=b, round=gmpy2.RoundUp):
            hi = mpfr(qhi) + mpfr(self.p)
        return lo, hi

    def __hash__(self):
        return hash((self.p, self.q, self.d))

    def __repr__(self):
        return f"Surd({self.p} + {self.q}*sqrt({self.d}))"


class BigFloat(Real):
    """An mpfr value together with the precision it carries."""

    __slots__ = ("value", "bits")

    def __init__(self, value, bits: int | None = None):
        if bits is None:
            bits = value.precision if isinstance(value, mpfr) else precision_bits()
        with workprec(bits):
            v = mpfr(value)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "bits", int(bits))

    def __setattr__(self, *a):
        raise AttributeError("BigFloat is immutable")

    kind = "bigfloat"

    def sign(self) -> int:
        return -1 if self.value < 0 else (1 if self.value > 0 else 0)

    def __neg__(self):
        with workprec(self.bits):
            return BigFloat(-self.value, self.bits)

    def to_mpfr(self, bits: int | None = None) -> mpfr:
        with workprec(self.bits if bits is None else bits):
            return mpfr(self.value)

    def exact_mpq(self) -> mpq:
        """Every finite big float is an exact dyadic rational; return it."""
        m, e = self.value.as_mantissa_exp()
        return mpq(m) * (mpq(2) ** int(e))

    def bracket(self, bits: int | None = None) -> tuple[mpfr, mpfr]:
        return Rational(self.exact_mpq()).bracket(bits)

    def __hash__(self):
        return hash(self.exact_mpq())

    def __repr__(self):
        return f"BigFloat({self.value!r}, bits={self.bits})"


def as_real(x) -> Real:
    """Coerce ints, fractions, mpq/mpz/mpfr and floats into the Real tower."""
    if isinstance(x, Real):
        return x
    if isinstance(x, (int, mpz)):
        return Rational(x)
    if isinstance(x, mpq):
        return Rational(x)
    if isinstance(x, mpfr):
        return BigFloat(x)
    if isinstance(x, float):
        # floats are exact dyadic rationals; keep them exact
        return Rational(mpq(x))
    try:
        num, den = x.numerator, x.denominator
        return Rational(mpq(num, den))
    except AttributeError:
        raise TypeError(f"cannot interpret {x!r} as a Real")


# ---------------------------------------------------------------------------
# arithmetic kernels


def _to_bigfloat(x: Real) -> BigFloat:
    return x if isinstance(x, BigFloat) else BigFloat(x.to_mpfr())


def _add(a: Real, b: Real) -> Real:
    if isinstance(a, Rational) and isinstance(b, Rational):
        return Rational(a.value + b.value)
    if isinstance(a, Rational) and isinstance(b, Surd):
        return Surd(b.p + a.value, b.q, b.d)
    if isinstance(a, Surd) and isinstance(b, Rational):
        return Surd(a.p + b.value, a.q, a.d)
    if isinstance(a, Surd) and isinstance(b, Surd) and a.d == b.d:
        return Surd(a.p + b.p, a.q + b.q, a.d)
    fa, fb = _to_bigfloat(a), _to_bigfloat(b)
    with workprec(max(fa.bits, fb.bits)):
        return BigFloat(fa.value + fb.value)


def _mul(a: Real, b: Real) -> Real:
    if isinstance(a, Rational) and isinstance(b, Rational):
        return Rational(a.value * b.value)
    if isinstance(a, Rational) and isinstance(b, Surd):
        if a.value == 0:
            return Rational(0)
        return Surd(a.value * b.p, a.value * b.q, b.d)
    if isinstance(a, Surd) and isinstance(b, Rational):
        return _mul(b, a)
    if isinstance(a, Surd) and isinstance(b, Surd) and a.d == b.d:
        p = a.p * b.p + a.q * b.q * a.d
        q = a.p * b.q + a.q * b.p
        return Surd(p, q, a.d) if q != 0 else Rational(p)
    fa, fb = _to_bigfloat(a), _to_bigfloat(b)
    with workprec(max(fa.bits, fb.bits)):
        return BigFloat(fa.value * fb.value)


def _div(a: Real, b: Real) -> Real:
    if b.sign() == 0:
        raise ZeroDivisionError("division by zero Real")
    if isinstance(b, Rational):
        return _mul(a, Rational(1 / b.value))
    if isinstance(b, Surd):
        # multiply by the conjugate: 1/(p+q sqrt d) = (p - q sqrt d)/(p^2 - q^2 d)
        nrm = b.p * b.p - b.q * b.q * b.d
        inv = Surd(b.p / nrm, -b.q / nrm, b.d)
        return _mul(a, inv)
    fa, fb = _to_bigfloat(a), _to_bigfloat(b)
    with workprec(max(fa.bits, fb.bits)):
        return BigFloat(fa.value / fb.value)


# ---------------------------------------------------------------------------
# floor / nearest integer / distance to nearest integer


def _floor_mpq(x: mpq) -> mpz:
    return x.numerator // x.denominator


def _floor_surd(x: Surd) -> mpz:
    """Exact floor of p + q*sqrt(d) by integer bracketing of sqrt(d)."""
    k = 32
    while True:
        scale = mpz(1) << k
        t = isqrt(x.d * scale * scale)  # floor(sqrt(d) * 2^k)
        if x.q > 0:
            lo = x.p + x.q * mpq(t, scale)
            hi = x.p + x.q * mpq(t + 1, scale)
        else:
            lo = x.p + x.q * mpq(t + 1, scale)
            hi = x.p + x.q * mpq(t, scale)
        flo, fhi = _floor_mpq(lo), _floor_mpq(hi)
        if flo == fhi:
            return flo
        k *= 2
        if k > 1 << 20:  # unreachable: x is irrational
            raise RuntimeError("floor bracketing failed to converge")


def floor_real(x: Real) -> int:
    """Exact floor (BigFloat is floored as the dyadic rational it is)."""
    x = as_real(x)
    if isinstance(x, Rational):
        return int(_floor_mpq(x.value))
    if isinstance(x, Surd):
        return int(_floor_surd(x))
    return int(_floor_mpq(x.exact_mpq()))


def nearest_int(x: Real) -> tuple[int, Real]:
    """Nearest integer m to x and the exact distance |x - m|.

    Half-integers round down (m = floor(x + 1/2)); the distance is then
    exactly 1/2, and which neighbour is reported does not affect any
    downstream quantity.
    """
    x = as_real(x)
    m = floor_real(x + Rational(1, 2))
    dist = abs(x - Rational(m))
    return m, dist


def frac_dist(x: Real) -> Real:
    """Distance from x to the nearest integer, in [0, 1/2].

    Exact (result is Rational or Surd) for Rational and Surd inputs; for
    BigFloat inputs the result carries the input's precision.
    """
    return nearest_int(x)[1]


# ---------------------------------------------------------------------------
# continued fractions


class CFExpansion(NamedTuple):
    quotients: list[int]
    convergents: list[mpq]
    terminated: bool


def _cf_rational(x: mpq, n: int) -> tuple[list[int], bool]:
    quots: list[int] = []
    num, den = mpz(x.numerator), mpz(x.denominator)
    while den != 0 and len(quots) < n + 1:
        a = num // den
        quots.append(int(a))
        num, den = den, num - a * den
    return quots, den == 0


def _cf_surd(x: Surd, n: int) -> list[int]:
    """Partial quotients of a quadratic irrational, exactly.

    Uses the classical integer recurrence on (P + sqrt(D))/Q with
    Q | D - P^2; floors are taken with isqrt so no rounding is involved.
    """
    # write x = (A + B sqrt d)/C with integers A, B, C
    den = gmpy2.lcm(x.p.denominator, x.q.denominator)
    A = mpz(x.p * den)
    B = mpz(x.q * den)
    C = mpz(den)
    # fold |B| into the radicand so the surd part is +sqrt(D)
    D = B * B * x.d
    if B < 0:
        A, C = -A, -C
    P, Q = A, C
    if (D - P * P) % Q != 0:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    quots: list[int] = []
    sq = isqrt(D)
    for _ in range(n + 1):
        if Q > 0:
            a = (P + sq) // Q
        else:
            a = (-P - sq - 1) // (-Q)
        quots.append(int(a))
        P = a * Q - P
        Q = (D - P * P) // Q
    return quots


def _convergents(quots: Iterable[int]) -> list[mpq]:
    convs: list[mpq] = []
    p_prev, p = mpz(0), mpz(1)  # h_{-2}, h_{-1}
    q_prev, q = mpz(1), mpz(0)  # k_{-2}, k_{-1}
    for a in quots:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        convs.append(mpq(p, q))
    return convs


def cf_expansion(x: Real, n: int) -> CFExpansion:
    """Partial quotients a_0..a_n of x with their convergents p_k/q_k.

    Rational inputs terminate early: the finite expansion is returned with
    ``terminated=True``.  BigFloat inputs are expanded as the exact dyadic
    rational they represent (so the tail reflects the representation, not the
    underlying ideal value).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    x = as_real(x)
    if isinstance(x, Surd):
        quots = _cf_surd(x, n)
        return CFExpansion(quots, _convergents(quots), False)
    v = x.value if isinstance(x, Rational) else x.exact_mpq()
    quots, terminated = _cf_rational(v, n)
    return CFExpansion(quots, _convergents(quots), terminated)


# ---------------------------------------------------------------------------
# certified linear forms in several square roots


class LinearSurdForm:
    """A finite sum  r_0 + sum_i r_i * sqrt(d_i)  with exact rational r's.

    This is the shape of every boundary expression in the Bohr-set and
    counting enumerations (p2*a + q*b - p1 with a, b rational or quadratic).
    Signs are decided exactly when at most one distinct radical survives;
    otherwise by certified interval evaluation at escalating precision, which
    terminates whenever the value is nonzero.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, mpq] | None = None):
        self.terms: dict[int, mpq] = {}
        if terms:
            for d, r in terms.items():
                self.add(r, d)

    def add(self, coeff, d: int = 1) -> "LinearSurdForm":
        coeff = mpq(coeff)
        if coeff == 0:
            return self
        if d == 1:
            self.terms[1] = self.terms.get(1, mpq(0)) + coeff
        else:
            s, f = _squarefree_split(d)
            if f == 1:
                self.terms[1] = self.terms.get(1, mpq(0)) + coeff * s
            else:
                self.terms[f] = self.terms.get(f, mpq(0)) + coeff * s
        self.terms = {d: r for d, r in self.terms.items() if r != 0}
        return self

    @classmethod
    def from_real(cls, x: Real, scale=1) -> "LinearSurdForm":
        form = cls()
        x = as_real(x)
        scale = mpq(scale)
        if isinstance(x, Rational):
            form.add(scale * x.value)
        elif isinstance(x, Surd):
            form.add(scale * x.p)
            form.add(scale * x.q, x.d)
        elif isinstance(x, BigFloat):
            form.add(scale * x.exact_mpq())
        return form

    def add_real(self, x: Real, scale=1) -> "LinearSurdForm":
        other = LinearSurdForm.from_real(x, scale)
        for d, r in other.terms.items():
            self.add(r, d)
        return self

    def bracket(self, bits: int) -> tuple[mpfr, mpfr]:
        los, his = [], []
        for d, r in sorted(self.terms.items()):
            if d == 1:
                los.append((r, None))
                his.append((r, None))
            else:
                slo, shi = sqrt_bracket(d, bits + 8)
                if r > 0:
                    los.append((r, slo))
                    his.append((r, shi))
                else:
                    los.append((r, shi))
                    his.append((r, slo))
        with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
            lo = mpfr(0)
            for r, s in los:
                lo += mpfr(r) if s is None else mpfr(r) * s
        with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
            hi = mpfr(0)
            for r, s in his:
                hi += mpfr(r) if s is None else mpfr(r) * s
        return lo, hi

    def sign(self, max_bits: int = 1 << 16) -> int:
        """Exact sign; raises if undecidable below max_bits (never for
        genuinely irrational values or pure rationals)."""
        if not self.terms:
            return 0
        keys = [d for d in self.terms if d != 1]
        if not keys:
            r = self.terms[1]
            return -1 if r < 0 else 1
        if len(keys) == 1:
            return _sign_p_plus_q_sqrt_d(self.terms.get(1, mpq(0)), self.terms[keys[0]], keys[0])
        bits = 96
        while bits <= max_bits:
            lo, hi = self.bracket(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
        raise ArithmeticError("sign undecided at maximum precision")


# ---------------------------------------------------------------------------
# JSON round-trip (big integers as decimal strings)


def real_to_json(x: Real) -> dict:
    x = as_real(x)
    if isinstance(x, Rational):
        return {"kind": "rational", "num": str(x.value.numerator), "den": str(x.value.denominator)}
    if isinstance(x, Surd):
        return {
            "kind": "surd",
            "p": [str(x.p.numerator), str(x.p.denominator)],
            "q": [str(x.q.numerator), str(x.q.denominator)],
            "d": x.d,
        }
    m, e = x.value.as_mantissa_exp()
    return {"kind": "bigfloat", "mantissa": str(m), "exp": int(e), "bits": x.bits}


def real_from_json(obj: dict) -> Real:
    kind = obj["kind"]
    if kind == "rational":
        return Rational(mpq(int(obj["num"]), int(obj["den"])))
    if kind == "surd":
        p = mpq(int(obj["p"][0]), int(obj["p"][1]))
        q = mpq(int(obj["q"][0]), int(obj["q"][1]))
        return Surd(p, q, obj["d"])
    if kind == "bigfloat":
        bits = int(obj["bits"])
        with workprec(bits):
            v = mpfr(int(obj["mantissa"])) * mpfr(2) ** int(obj["exp"])
        return BigFloat(v, bits)
    raise ValueError(f"unknown Real kind {kind!r}")


def real_json_dumps(x: Real) -> str:
    return json.dumps(real_to_json(x), sort_keys=True)
