"""Unimodular lattices in R^3: certified shortest vectors and reduction.

The working objects are 3x3 bases whose entries may span e^{-90}..e^{+90},
so nothing here trusts doubles.  The kernel observation: an mpfr matrix is an
exact dyadic matrix, hence multiplying by a suitable 2^k turns the basis into
an *exact integer* lattice.  LLL (Lovasz factor 0.99) and a Fincke--Pohst
style enumeration then run in exact integer / rational arithmetic, the
sup-norm minimiser is a certificate, and norms come back as exact dyadic
rationals that can be compared against rational or quadratic thresholds with
no tolerance at all.

Sup-norm vs Euclidean: LLL and the enumeration tree prune in the Euclidean
norm; the bridge is ||v||_inf <= ||v||_2 <= sqrt(3)||v||_inf, so enumerating
the Euclidean ball of radius sqrt(3) * (best sup-norm so far) is exhaustive
for the sup-norm problem.  Ties are broken by the lexicographically smallest
coefficient vector whose first nonzero entry is positive.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import isqrt, mpfr, mpq, mpz

from ._context import precision_bits, workprec
from .errors import DEFAULT_CELL_BUDGET, BudgetError, SingularBasisError
from .exactnum import (
    BigFloat,
    LinearSurdForm,
    Rational,
    Real,
    Surd,
    as_real,
    real_from_json,
    real_to_json,
)

__all__ = [
    "Lattice3",
    "ShortVecResult",
    "BodyNorm",
    "SuccessiveMinima",
    "SiegelDecomposition",
    "sup_shortest_vector",
    "delta_of",
    "in_K_eps",
    "lll_reduce",
    "successive_minima",
    "siegel_reduce",
    "brute_force_shortest",
    "shortest_of_int_rows",
    "scaled_int_rows",
]

LOVASZ_DELTA = mpq(99, 100)


# ---------------------------------------------------------------------------
# exact integer kernel


def _round_q(x: mpq) -> mpz:
    """Nearest integer to a rational (half rounds toward +inf)."""
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def _isqrt_floor_q(x: mpq) -> mpz:
    """floor(sqrt(x)) for a nonnegative rational."""
    if x < 0:
        return mpz(0)
    return isqrt(x.numerator * x.denominator) // x.denominator


def _gram_of(rows) -> list[list[mpz]]:
    g = [[mpz(0)] * 3 for _ in range(3)]
    for i in range(3):
        ri = rows[i]
        for j in range(i + 1):
            rj = rows[j]
            g[i][j] = g[j][i] = ri[0] * rj[0] + ri[1] * rj[1] + ri[2] * rj[2]
    return g


def _gs_from_gram(G):
    """Gram--Schmidt squared lengths and mu coefficients from the (exact
    integer) Gram matrix, via its leading minors."""
    g00 = G[0][0]
    if g00 == 0:
        raise SingularBasisError("basis is singular")
    d1 = g00
    d2 = G[0][0] * G[1][1] - G[0][1] * G[0][1]
    d3 = (
        G[0][0] * (G[1][1] * G[2][2] - G[1][2] * G[1][2])
        - G[0][1] * (G[0][1] * G[2][2] - G[1][2] * G[0][2])
        + G[0][2] * (G[0][1] * G[1][2] - G[1][1] * G[0][2])
    )
    if d2 == 0 or d3 == 0:
        raise SingularBasisError("basis is singular")
    norms = [mpq(d1), mpq(d2, d1), mpq(d3, d2)]
    mu = [[mpq(0)] * 3 for _ in range(3)]
    mu[1][0] = mpq(G[1][0], g00)
    mu[2][0] = mpq(G[2][0], g00)
    # <b2, b1*> = G21 - mu10 G20;  n1 = d2/d1
    mu[2][1] = mpq(g00 * G[2][1] - G[1][0] * G[2][0], d2)
    return norms, mu


def _gram_schmidt_q(rows: Sequence[Sequence[mpz]]):
    return _gs_from_gram(_gram_of(rows))


def lll_int(rows: Sequence[Sequence[int]], delta: mpq = LOVASZ_DELTA):
    """Exact LLL on three integer row vectors.

    Returns (reduced_rows, U) with reduced = U @ original and det U = +-1.
    The Gram matrix is maintained incrementally: size reductions leave the
    orthogonalisation invariant, so only swaps trigger a recompute.
    """
    b = [[mpz(x) for x in r] for r in rows]
    U = [[mpz(1 if i == j else 0) for j in range(3)] for i in range(3)]
    G = _gram_of(b)
    norms, mu = _gs_from_gram(G)
    k = 1
    iterations = 0
    while k < 3:
        iterations += 1
        if iterations > 100_000:
            raise RuntimeError("LLL failed to terminate (pathological input?)")
        for j in range(k - 1, -1, -1):
            if 2 * abs(mu[k][j]) > 1:
                r = _round_q(mu[k][j])
                for c in range(3):
                    b[k][c] -= r * b[j][c]
                    U[k][c] -= r * U[j][c]
                # Gram update for row/column k
                gkk = G[k][k] - 2 * r * G[k][j] + r * r * G[j][j]
                for c in range(3):
                    if c != k:
                        G[k][c] -= r * G[j][c]
                        G[c][k] = G[k][c]
                G[k][k] = gkk
                # b* unchanged; only the mu row of k shifts
                for jp in range(j):
                    mu[k][jp] -= r * mu[j][jp]
                mu[k][j] -= r
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            G = _gram_of(b)
            norms, mu = _gs_from_gram(G)
            k = max(k - 1, 1)
    return b, U


def _sup_int(v: Sequence[mpz]) -> mpz:
    return max(abs(v[0]), abs(v[1]), abs(v[2]))


def _tie_key(c):
    # ties prefer small trailing coefficients, so the identity basis
    # resolves to e_1; signs (first nonzero already positive) break the rest
    return (abs(c[2]), abs(c[1]), abs(c[0]), int(c[2]), int(c[1]), int(c[0]))


def _canonical_coeffs(c: tuple) -> tuple:
    for x in c:
        if x != 0:
            return c if x > 0 else tuple(-y for y in c)
    return c


def _enumerate_leaves(b, norms, mu, rho2sq, budget, keep):
    """Walk the Fincke--Pohst tree over c3, c2, c1 (half-space only).

    ``keep(c, v, sup)`` is called at each nonzero leaf inside the Euclidean
    ball of squared radius rho2sq(); rho2sq is a callable so callers can
    shrink the ball as better vectors appear.
    """
    n0, n1, n2 = norms
    B3 = _isqrt_floor_q(rho2sq() / n2)
    est = 1
    for nn in (n0, n1, n2):
        est *= 2 * int(_isqrt_floor_q(rho2sq() / nn)) + 1
    if est > budget:
        raise BudgetError(f"enumeration box of ~{est} cells exceeds budget {budget}")
    c3 = 0  # half-space: one of each +-v pair is enough
    while c3 <= B3:
        rem2 = rho2sq() - c3 * c3 * n2
        if rem2 >= 0:
            center2 = -mu[2][1] * c3
            W2 = _isqrt_floor_q(rem2 / n1) + 1
            c2_lo = int(_round_q(center2) - W2)
            c2_hi = int(_round_q(center2) + W2)
            for c2 in range(c2_lo, c2_hi + 1):
                if c3 == 0 and c2 < 0:
                    continue
                w1 = c2 + mu[2][1] * c3
                rem1 = rem2 - w1 * w1 * n1
                if rem1 < 0:
                    continue
                center1 = -(mu[1][0] * c2 + mu[2][0] * c3)
                W1 = _isqrt_floor_q(rem1 / n0) + 1
                c1_lo = int(_round_q(center1) - W1)
                c1_hi = int(_round_q(center1) + W1)
                for c1 in range(c1_lo, c1_hi + 1):
                    if c3 == 0 and c2 == 0 and c1 <= 0:
                        continue
                    v = tuple(c1 * b[0][i] + c2 * b[1][i] + c3 * b[2][i] for i in range(3))
                    if v == (0, 0, 0):
                        continue
                    keep((c1, c2, c3), v, _sup_int(v))
        c3 += 1


def shortest_of_int_rows(rows: Sequence[Sequence[int]], budget: int = DEFAULT_CELL_BUDGET):
    """Exact sup-norm shortest vector of an integer-row lattice.

    Returns (coeffs, vector, norm) where coeffs refer to the *input* rows,
    canonicalised so the first nonzero coefficient is positive, with ties
    broken lexicographically.
    """
    b, U = lll_int(rows)
    norms, mu = _gram_schmidt_q(b)
    best = {"sup": min(_sup_int(r) for r in b), "entries": []}

    def rho2sq():
        return mpq(3) * best["sup"] * best["sup"]

    def keep(c_red, v, sup):
        if sup > best["sup"]:
            return
        c_orig = tuple(
            c_red[0] * U[0][i] + c_red[1] * U[1][i] + c_red[2] * U[2][i] for i in range(3)
        )
        c_orig = _canonical_coeffs(c_orig)
        if sup < best["sup"]:
            best["sup"] = sup
            best["entries"] = [(c_orig, v)]
        else:
            best["entries"].append((c_orig, v))

    _enumerate_leaves(b, norms, mu, rho2sq, budget, keep)
    if not best["entries"]:
        # unreachable: the enumeration ball always contains the best row
        raise RuntimeError("enumeration produced no candidate")
    entries = sorted(best["entries"], key=lambda e: _tie_key(e[0]))
    c = entries[0][0]
    v = tuple(
        c[0] * mpz(rows[0][i]) + c[1] * mpz(rows[1][i]) + c[2] * mpz(rows[2][i])
        for i in range(3)
    )
    return tuple(int(x) for x in c), v, best["sup"]


def enumerate_int_upto(rows, radius: int, budget: int = DEFAULT_CELL_BUDGET):
    """All nonzero lattice vectors (up to sign) with sup-norm <= radius.

    Returns a list of (coeffs_in_input_rows, vector, sup) with canonical
    coefficient signs; exactly one of {x, -x} is listed.
    """
    b, U = lll_int(rows)
    norms, mu = _gram_schmidt_q(b)
    rad = mpz(radius)
    out = []

    def rho2sq():
        return mpq(3) * rad * rad

    def keep(c_red, v, sup):
        if sup > rad:
            return
        c_orig = tuple(
            c_red[0] * U[0][i] + c_red[1] * U[1][i] + c_red[2] * U[2][i] for i in range(3)
        )
        cc = _canonical_coeffs(c_orig)
        if cc != c_orig:
            v = tuple(-x for x in v)
        out.append((tuple(int(x) for x in cc), v, sup))

    _enumerate_leaves(b, norms, mu, rho2sq, budget, keep)
    return out


# ---------------------------------------------------------------------------
# scaling Real / mpfr bases to exact integer lattices


def _entry_to_mpq(x) -> mpq:
    x = as_real(x)
    if isinstance(x, Rational):
        return x.value
    if isinstance(x, BigFloat):
        return x.exact_mpq()
    raise TypeError("entry is not rational/dyadic")


def scaled_int_rows(rows, bits: int | None = None):
    """Represent the given basis rows *exactly* as integer rows / 2^k.

    Rational and BigFloat entries are exact already; Surd entries are first
    rendered at the working precision (that rendering is the only rounding,
    and it is recorded by the returned BigFloat basis being what is solved).
    Returns (int_rows, k) with rows == int_rows * 2^-k exactly.
    """
    exact_rows = []
    for r in rows:
        er = []
        for x in r:
            x = as_real(x)
            if isinstance(x, Surd):
                x = BigFloat(x.to_mpfr(bits))
            er.append(_entry_to_mpq(x))
        exact_rows.append(er)
    denoms = [q.denominator for r in exact_rows for q in r]
    L = mpz(1)
    for d in denoms:
        L = gmpy2.lcm(L, d)
    # keep the scale a power of two when denominators are (dyadic floats),
    # otherwise use the exact lcm; either way the representation is exact
    if (L & (L - 1)) == 0:
        k = L.bit_length() - 1
        int_rows = [[mpz(q * L) for q in r] for r in exact_rows]
        return int_rows, ("pow2", k)
    int_rows = [[mpz(q * L) for q in r] for r in exact_rows]
    return int_rows, ("lcm", L)


def _norm_real(norm_int: mpz, scale) -> Real:
    kind, val = scale
    if kind == "pow2":
        return Rational(mpq(norm_int, mpz(1) << val))
    return Rational(mpq(norm_int, val))


# ---------------------------------------------------------------------------
# public lattice objects


@dataclasses.dataclass(frozen=True)
class ShortVecResult:
    coeffs: tuple[int, int, int]
    vector: tuple[Real, Real, Real]
    norm: Real  # exact dyadic/rational value of the sup-norm

    def norm_mpfr(self, bits: int | None = None) -> mpfr:
        return self.norm.to_mpfr(bits)


class Lattice3:
    """A unimodular lattice in R^3, given by three generator columns."""

    __slots__ = ("cols", "provenance")

    def __init__(self, cols, provenance: str = "", check: bool = True):
        cols = tuple(tuple(as_real(x) for x in col) for col in cols)
        if len(cols) != 3 or any(len(c) != 3 for c in cols):
            raise ValueError("need three generator columns of length three")
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "provenance", provenance)
        if check:
            self._check_unimodular()

    def __setattr__(self, *a):
        raise AttributeError("Lattice3 is immutable")

    @classmethod
    def from_matrix_rows(cls, rows, provenance: str = "", check: bool = True) -> "Lattice3":
        cols = [[rows[i][j] for i in range(3)] for j in range(3)]
        return cls(cols, provenance, check)

    def matrix_rows(self):
        return tuple(tuple(self.cols[j][i] for j in range(3)) for i in range(3))

    def det(self) -> Real:
        r = self.matrix_rows()
        det = as_real(0)
        for j, sgn in ((0, 1), (1, -1), (2, 1)):
            a, b = [c for c in range(3) if c != j]
            minor = r[1][a] * r[2][b] - r[1][b] * r[2][a]
            det = det + as_real(sgn) * r[0][j] * minor
        return det

    def _check_unimodular(self):
        d = self.det()
        if all(isinstance(x, Rational) for col in self.cols for x in col):
            if d != Rational(1):
                raise ValueError(f"basis determinant is {d!r}, not exactly 1")
            return
        tol = as_real(mpq(1)) / as_real(mpz(1) << (precision_bits() // 2))
        if not (abs(d - Rational(1)) <= tol):
            raise ValueError("basis determinant is not 1 to working precision")

    def to_json(self) -> dict:
        return {
            "basis": [[real_to_json(x) for x in row] for row in self.matrix_rows()],
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Lattice3":
        rows = [[real_from_json(x) for x in row] for row in obj["basis"]]
        return cls.from_matrix_rows(rows, obj.get("provenance", ""))

    def __repr__(self):
        return f"Lattice3(provenance={self.provenance!r})"


def _generator_rows(L: Lattice3):
    # kernel convention: one generator per row
    return [list(col) for col in L.cols]


def sup_shortest_vector(
    L: Lattice3, budget: int = DEFAULT_CELL_BUDGET, bits: int | None = None
) -> ShortVecResult:
    """Global sup-norm shortest vector (certified; exact arithmetic inside).

    Raises SingularBasisError for singular bases and BudgetError when the
    enumeration box would exceed ``budget`` cells.
    """
    rows = _generator_rows(L)
    int_rows, scale = scaled_int_rows(rows, bits)
    c, v, norm = shortest_of_int_rows(int_rows, budget)
    kind, val = scale
    den = (mpz(1) << val) if kind == "pow2" else val
    vec = tuple(Rational(mpq(x, den)) for x in v)
    return ShortVecResult(coeffs=c, vector=vec, norm=_norm_real(norm, scale))


def delta_of(L: Lattice3, budget: int = DEFAULT_CELL_BUDGET, bits: int | None = None) -> mpfr:
    """Cusp depth Delta = log(1 / shortest sup-norm); negative when the
    lattice has no vector shorter than 1."""
    res = sup_shortest_vector(L, budget, bits)
    with workprec(bits):
        return -gmpy2.log(res.norm.to_mpfr(bits))


def in_K_eps(L: Lattice3, eps, budget: int = DEFAULT_CELL_BUDGET, bits: int | None = None) -> bool:
    """Mahler compactum membership: no nonzero vector in the *closed*
    eps-ball, so equality of the shortest norm with eps means False."""
    eps = as_real(eps)
    if eps.sign() <= 0:
        raise ValueError("eps must be positive")
    res = sup_shortest_vector(L, budget, bits)
    form = LinearSurdForm.from_real(res.norm)
    form.add_real(eps, scale=-1)
    return form.sign() > 0


def lll_reduce(L: Lattice3, budget: int = DEFAULT_CELL_BUDGET, bits: int | None = None):
    """Lovasz-0.99 reduced basis of the same lattice.

    The unimodular change of basis is applied to the original Real entries
    (exactly, when they are exact kinds) and recorded in the provenance.
    """
    rows = _generator_rows(L)
    int_rows, _ = scaled_int_rows(rows, bits)
    _, U = lll_int(int_rows)
    new_cols = []
    for i in range(3):
        col = [as_real(0)] * 3
        for j in range(3):
            if U[i][j]:
                for k in range(3):
                    col[k] = col[k] + as_real(int(U[i][j])) * L.cols[j][k]
        new_cols.append(tuple(col))
    det_u = _det3_int(U)
    if det_u == -1:
        new_cols[0] = tuple(-x for x in new_cols[0])
    note = f"lll_reduce(U={[[int(x) for x in r] for r in U]})"
    prov = f"{L.provenance}; {note}" if L.provenance else note
    return Lattice3(new_cols, provenance=prov, check=False)


def _det3_int(M) -> int:
    return int(
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    )


def brute_force_shortest(L: Lattice3, box: int = 25, bits: int | None = None) -> ShortVecResult:
    """Independent oracle: direct scan over |c_i| <= box, no reduction.

    Only correct when the true minimiser lies in the box; used to cross-check
    the LLL + enumeration path on benign bases.  When the scaled basis fits
    int64 safely the scan is vectorised; otherwise it runs in exact bignum
    arithmetic.
    """
    import numpy as np

    rows = _generator_rows(L)
    int_rows, scale = scaled_int_rows(rows, bits)
    max_entry = max(abs(int(x)) for r in int_rows for x in r)
    if max_entry * box * 3 < 2 ** 62:
        rng = np.arange(-box, box + 1)
        c1g, c2g = np.meshgrid(rng, rng, indexing="ij")
        C12 = np.column_stack([c1g.ravel(), c2g.ravel()]).astype(np.int64)
        B = np.array([[int(x) for x in r] for r in int_rows], dtype=np.int64)
        best_sup_i = None
        ties = []
        for c3 in range(0, box + 1):  # one of each +-c pair
            if c3 == 0:
                keep = (C12[:, 1] > 0) | ((C12[:, 1] == 0) & (C12[:, 0] > 0))
                C_part = C12[keep]
            else:
                C_part = C12
            V = C_part @ B[:2] + c3 * B[2]
            sups = np.abs(V).max(axis=1)
            m = int(sups.min())
            if best_sup_i is None or m < best_sup_i:
                best_sup_i = m
                ties = [(int(c[0]), int(c[1]), c3) for c in C_part[sups == m]]
            elif m == best_sup_i:
                ties.extend((int(c[0]), int(c[1]), c3) for c in C_part[sups == m])
        best_sup = mpz(best_sup_i)
        best_cs = [(_canonical_coeffs(c), None) for c in ties]
    else:
        best_sup = None
        best_cs = []
        for c3 in range(0, box + 1):
            for c2 in range(-box, box + 1):
                for c1 in range(-box, box + 1):
                    if c3 == 0 and (c2 < 0 or (c2 == 0 and c1 <= 0)):
                        continue
                    v = tuple(
                        c1 * int_rows[0][i] + c2 * int_rows[1][i] + c3 * int_rows[2][i]
                        for i in range(3)
                    )
                    sup = _sup_int(v)
                    if best_sup is None or sup < best_sup:
                        best_sup = sup
                        best_cs = [(_canonical_coeffs((c1, c2, c3)), v)]
                    elif sup == best_sup:
                        best_cs.append((_canonical_coeffs((c1, c2, c3)), v))
    best_cs.sort(key=lambda e: _tie_key(e[0]))
    c = best_cs[0][0]
    v = tuple(
        c[0] * int_rows[0][i] + c[1] * int_rows[1][i] + c[2] * int_rows[2][i] for i in range(3)
    )
    kind, val = scale
    den = (mpz(1) << val) if kind == "pow2" else val
    vec = tuple(Rational(mpq(x, den)) for x in v)
    return ShortVecResult(coeffs=tuple(int(x) for x in c), vector=vec, norm=_norm_real(best_sup, scale))


# ---------------------------------------------------------------------------
# parallelepiped body norms and reduced successive minima


@dataclasses.dataclass(frozen=True)
class BodyNorm:
    """N(x) = max(|x1|/Q, |x2|/Q, |x1 a + x2 b - x3|/delta).

    The unit ball is the slab-box parallelepiped used by the Bohr-set cover;
    its volume is 8 Q^2 delta.
    """

    a: Real
    b: Real
    Q: Real
    delta: Real

    def __post_init__(self):
        object.__setattr__(self, "a", as_real(self.a))
        object.__setattr__(self, "b", as_real(self.b))
        object.__setattr__(self, "Q", as_real(self.Q))
        object.__setattr__(self, "delta", as_real(self.delta))
        if self.Q.sign() <= 0 or self.delta.sign() <= 0:
            raise SingularBasisError("body needs Q > 0 and delta > 0")

    def value(self, x: Sequence[int]) -> Real:
        x1, x2, x3 = (as_real(int(v)) for v in x)
        parts = [abs(x1) / self.Q, abs(x2) / self.Q, abs(x1 * self.a + x2 * self.b - x3) / self.delta]
        m = parts[0]
        for p in parts[1:]:
            if p > m:
                m = p
        return m

    def map_rows(self, bits: int | None = None):
        """Generator rows of T Z^3 where N(x) = ||T x||_inf."""
        a, b, Q, d = self.a, self.b, self.Q, self.delta
        one = as_real(1)
        return [
            [one / Q, as_real(0), a / d],
            [as_real(0), one / Q, b / d],
            [as_real(0), as_real(0), as_real(-1) / d],
        ]


@dataclasses.dataclass(frozen=True)
class SuccessiveMinima:
    lambdas: tuple[Real, Real, Real]
    vectors: tuple[tuple[int, int, int], ...]  # a Z-basis of Z^3

    def det(self) -> int:
        return _det3_int([list(v) for v in self.vectors])


def _gcd3(a, b, c) -> int:
    return int(gmpy2.gcd(gmpy2.gcd(mpz(a), mpz(b)), mpz(c)))


def _extendable_pair(u, w) -> bool:
    # {u, w} extends to a basis of Z^3 iff the 2x2 minors are coprime
    m1 = u[1] * w[2] - u[2] * w[1]
    m2 = u[2] * w[0] - u[0] * w[2]
    m3 = u[0] * w[1] - u[1] * w[0]
    if m1 == m2 == m3 == 0:
        return False
    return _gcd3(m1, m2, m3) == 1


def successive_minima(
    body: BodyNorm, budget: int = DEFAULT_CELL_BUDGET, bits: int | None = None
) -> SuccessiveMinima:
    """Reduced (directional) successive minima of the body, with vectors
    spanning Z^3 (det +-1): v1 is a shortest primitive point, v2 the shortest
    extending {v1} to a primitive pair, v3 the shortest completing a basis.
    """
    rows = body.map_rows(bits)
    int_rows, scale = scaled_int_rows(rows, bits)
    kind, val = scale
    den = (mpz(1) << val) if kind == "pow2" else val

    # natural search scale: covolume^(1/3); the axis vectors cap the ladder
    det = abs(
        int_rows[0][0] * (int_rows[1][1] * int_rows[2][2] - int_rows[1][2] * int_rows[2][1])
        - int_rows[0][1] * (int_rows[1][0] * int_rows[2][2] - int_rows[1][2] * int_rows[2][0])
        + int_rows[0][2] * (int_rows[1][0] * int_rows[2][1] - int_rows[1][1] * int_rows[2][0])
    )
    if det == 0:
        raise SingularBasisError("degenerate body")
    radius = max(int(gmpy2.iroot(det, 3)[0]), 1)
    axis_sup = max(
        _sup_int([int_rows[i][0], int_rows[i][1], int_rows[i][2]]) for i in range(3)
    )

    while True:
        cands = enumerate_int_upto(int_rows, radius, budget)
        cands.sort(key=lambda e: (e[2], _tie_key(e[0])))
        v1 = v2 = v3 = None
        for c, v, sup in cands:
            if _gcd3(*c) != 1:
                continue
            if v1 is None:
                v1 = (c, sup)
                continue
            if v2 is None:
                if _extendable_pair(v1[0], c):
                    v2 = (c, sup)
                continue
            M = [list(v1[0]), list(v2[0]), list(c)]
            if abs(_det3_int(M)) == 1:
                v3 = (c, sup)
                break
        if v3 is not None:
            lams = tuple(_norm_real(mpz(x[1]), scale) for x in (v1, v2, v3))
            vecs = (v1[0], v2[0], v3[0])
            return SuccessiveMinima(lambdas=lams, vectors=vecs)
        if radius > 8 * axis_sup:
            raise RuntimeError("successive minima ladder failed to complete")
        radius *= 2


# ---------------------------------------------------------------------------
# Siegel / Iwasawa reduction


@dataclasses.dataclass(frozen=True)
class SiegelDecomposition:
    k: tuple  # orthogonal 3x3 (mpfr rows)
    a: tuple  # diagonal entries (mpfr), increasing up to the documented slack
    n: tuple  # unit upper-triangular 3x3 (mpfr rows)
    gamma: tuple  # integer 3x3, det +1

    def reassemble(self, bits: int | None = None):
        with workprec(bits):
            ka = [[self.k[i][j] * self.a[j] for j in range(3)] for i in range(3)]
            kan = _mat_mul_mpfr(ka, self.n)
            g = [[mpfr(x) for x in row] for row in self.gamma]
            return _mat_mul_mpfr(kan, g)


def _mat_mul_mpfr(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def siegel_reduce(matrix_rows, bits: int | None = None) -> SiegelDecomposition:
    """g = k a n gamma with gamma in SL(3,Z), k orthogonal, |n_ij| <= 1/2 (+
    working-precision slack) and a_i <= sqrt(3) a_{i+1}.

    The diagonal ratio constant sqrt(3) is the Lovasz-0.99 guarantee
    (1/sqrt(0.99 - 1/4) = 1.1623...), documented as a relaxed Siegel domain:
    membership in *a* fixed Siegel set is all the cusp-depth comparisons use.
    """
    bits = bits or precision_bits()
    with workprec(bits):
        rows = [[as_real(x) for x in r] for r in matrix_rows]
        det = Lattice3.from_matrix_rows(rows, check=False).det()
        one = as_real(1)
        tol = as_real(mpq(1)) / as_real(mpz(1) << (bits // 2))
        if not (abs(det - one) <= tol):
            raise ValueError("siegel_reduce needs det = 1 to working precision")
        # columns are the lattice generators
        cols = [[rows[i][j] for i in range(3)] for j in range(3)]
        int_rows, _ = scaled_int_rows(cols, bits)
        _, U = lll_int(int_rows)
        if _det3_int(U) == -1:
            U = [[-x for x in U[0]], U[1], U[2]]
        # M = g U^T: columns are the reduced generators
        m_cols = []
        for i in range(3):
            col = [as_real(0)] * 3
            for j in range(3):
                if U[i][j]:
                    for kk in range(3):
                        col[kk] = col[kk] + as_real(int(U[i][j])) * cols[j][kk]
            m_cols.append([x.to_mpfr(bits) for x in col])
        # Gram-Schmidt on the reduced columns -> k, a, n
        q = []
        r = [[mpfr(0)] * 3 for _ in range(3)]
        for j in range(3):
            v = list(m_cols[j])
            for i in range(len(q)):
                r[i][j] = sum(q[i][kk] * m_cols[j][kk] for kk in range(3))
                for kk in range(3):
                    v[kk] -= r[i][j] * q[i][kk]
            nrm = gmpy2.sqrt(sum(x * x for x in v))
            if nrm == 0:
                raise SingularBasisError("lattice basis degenerated during QR")
            r[j][j] = nrm
            q.append([x / nrm for x in v])
        k_rows = tuple(tuple(q[j][i] for j in range(3)) for i in range(3))
        a_diag = tuple(r[j][j] for j in range(3))
        n_rows = tuple(
            tuple((r[i][j] / r[i][i]) if j > i else (mpfr(1) if i == j else mpfr(0)) for j in range(3))
            for i in range(3)
        )
        gamma = _int_inverse_unimodular([[int(U[j][i]) for j in range(3)] for i in range(3)])
        return SiegelDecomposition(k=k_rows, a=a_diag, n=n_rows, gamma=tuple(tuple(row) for row in gamma))


def _int_inverse_unimodular(M):
    d = _det3_int(M)
    if abs(d) != 1:
        raise ValueError("matrix is not unimodular")
    cof = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            a, b = [r for r in range(3) if r != i]
            c, e = [cc for cc in range(3) if cc != j]
            minor = M[a][c] * M[b][e] - M[a][e] * M[b][c]
            cof[j][i] = ((-1) ** (i + j)) * minor
    return [[d * cof[i][j] for j in range(3)] for i in range(3)]
