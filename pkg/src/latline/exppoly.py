"""Exact exponential polynomials in two flow parameters.

An ``ExpPoly`` is a finite sum  sum_k  c_k * e^{(kt_k/2) t + (ks_k/2) s}
with exact Real coefficients and half-integer exponent slopes stored as the
integer pairs (kt, ks).  The half-integer grid is exactly what the diagonal
flow matrices and their factorisations need (entries like e^{t}, e^{-t/2},
e^{s + t/2} appear; nothing finer ever does), and the ring is closed under
addition and multiplication, so identities between products of flow matrices
can be verified structurally, with zero tolerance.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

from ._context import workprec
from .exactnum import Rational, Real, as_real, real_from_json, real_to_json

__all__ = ["ExpPoly", "LinForm", "T", "S", "ExpRangeError"]


class ExpRangeError(ArithmeticError):
    """Numeric evaluation left the representable exponent range."""


class LinForm:
    """A half-integer linear form (kt/2) t + (ks/2) s, used as an exponent."""

    __slots__ = ("kt", "ks")

    def __init__(self, kt: int, ks: int):
        self.kt = int(kt)
        self.ks = int(ks)

    def __add__(self, other: "LinForm") -> "LinForm":
        return LinForm(self.kt + other.kt, self.ks + other.ks)

    def __sub__(self, other: "LinForm") -> "LinForm":
        return LinForm(self.kt - other.kt, self.ks - other.ks)

    def __neg__(self) -> "LinForm":
        return LinForm(-self.kt, -self.ks)

    def __mul__(self, k: int) -> "LinForm":
        return LinForm(self.kt * k, self.ks * k)

    __rmul__ = __mul__

    def half(self) -> "LinForm":
        if self.kt % 2 or self.ks % 2:
            raise ValueError("halving would leave the half-integer grid")
        return LinForm(self.kt // 2, self.ks // 2)

    def __eq__(self, other):
        return isinstance(other, LinForm) and (self.kt, self.ks) == (other.kt, other.ks)

    def __hash__(self):
        return hash((self.kt, self.ks))

    def __repr__(self):
        return f"LinForm({self.kt}/2 t + {self.ks}/2 s)"


T = LinForm(2, 0)  # the symbol t
S = LinForm(0, 2)  # the symbol s


class ExpPoly:
    """Finite sum of terms coeff * e^{(kt/2) t + (ks/2) s}."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, int], Real] | None = None):
        cleaned: dict[tuple[int, int], Real] = {}
        if terms:
            for key, coeff in terms.items():
                coeff = as_real(coeff)
                if coeff.sign() != 0:
                    cleaned[(int(key[0]), int(key[1]))] = coeff
        self.terms = cleaned

    # -- constructors --------------------------------------------------------

    @classmethod
    def const(cls, c) -> "ExpPoly":
        return cls({(0, 0): as_real(c)})

    @classmethod
    def exp(cls, form: LinForm, coeff=1) -> "ExpPoly":
        """coeff * e^{form}."""
        return cls({(form.kt, form.ks): as_real(coeff)})

    @classmethod
    def coerce(cls, x) -> "ExpPoly":
        if isinstance(x, ExpPoly):
            return x
        return cls.const(as_real(x))

    # -- ring operations -----------------------------------------------------

    def __add__(self, other) -> "ExpPoly":
        other = ExpPoly.coerce(other)
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            if key in out:
                merged = out[key] + coeff
                if merged.sign() == 0:
                    del out[key]
                else:
                    out[key] = merged
            else:
                out[key] = coeff
        return ExpPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "ExpPoly":
        return ExpPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "ExpPoly":
        return self + (-ExpPoly.coerce(other))

    def __rsub__(self, other) -> "ExpPoly":
        return ExpPoly.coerce(other) + (-self)

    def __mul__(self, other) -> "ExpPoly":
        other = ExpPoly.coerce(other)
        out: dict[tuple[int, int], Real] = {}
        for (kt1, ks1), c1 in self.terms.items():
            for (kt2, ks2), c2 in other.terms.items():
                key = (kt1 + kt2, ks1 + ks2)
                prod = c1 * c2
                if key in out:
                    merged = out[key] + prod
                    if merged.sign() == 0:
                        del out[key]
                    else:
                        out[key] = merged
                else:
                    if prod.sign() != 0:
                        out[key] = prod
        return ExpPoly(out)

    __rmul__ = __mul__

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {(0, 0)}

    def constant_value(self) -> Real:
        if not self.is_constant():
            raise ValueError("not a constant ExpPoly")
        return self.terms.get((0, 0), Rational(0))

    def single_term(self) -> tuple[tuple[int, int], Real]:
        if len(self.terms) != 1:
            raise ValueError("not a single-term ExpPoly")
        return next(iter(self.terms.items()))

    def __eq__(self, other):
        if not isinstance(other, (ExpPoly, Real, int)):
            return NotImplemented
        other = ExpPoly.coerce(other)
        if set(self.terms) != set(other.terms):
            return False
        return all(self.terms[k] == other.terms[k] for k in self.terms)

    def __hash__(self):
        return hash(frozenset((k, hash(c)) for k, c in self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "ExpPoly(0)"
        bits = []
        for (kt, ks), c in sorted(self.terms.items()):
            bits.append(f"({c!r})*E[{kt}/2 t + {ks}/2 s]")
        return "ExpPoly(" + " + ".join(bits) + ")"

    # -- evaluation ----------------------------------------------------------

    def eval(self, t, s, bits: int | None = None) -> mpfr:
        """Numeric value at (t, s) under the working precision.

        Raises ExpRangeError if any e^{...} overflows or underflows the mpfr
        exponent range (loud failure beats a silent inf/0).
        """
        with workprec(bits):
            tv = as_real(t).to_mpfr()
            sv = as_real(s).to_mpfr()
            total = mpfr(0)
            for (kt, ks), coeff in sorted(self.terms.items()):
                expo = (kt * tv + ks * sv) / 2
                term = gmpy2.exp(expo)
                if gmpy2.is_infinite(term) or gmpy2.is_nan(term) or (term == 0 and (kt, ks) != (0, 0)):
                    raise ExpRangeError(f"e^{{{kt}/2 t + {ks}/2 s}} out of range at t={t}, s={s}")
                total += coeff.to_mpfr() * term
            if gmpy2.is_infinite(total) or gmpy2.is_nan(total):
                raise ExpRangeError(f"overflow while summing ExpPoly at t={t}, s={s}")
            return total

    # -- serialisation -------------------------------------------------------

    def to_json(self) -> list:
        return [
            {"kt": kt, "ks": ks, "coeff": real_to_json(c)}
            for (kt, ks), c in sorted(self.terms.items())
        ]

    @classmethod
    def from_json(cls, obj: list) -> "ExpPoly":
        return cls({(int(t["kt"]), int(t["ks"])): real_from_json(t["coeff"]) for t in obj})


ExpPoly.zero = ExpPoly()
ExpPoly.one = ExpPoly.const(1)
