"""Diophantine exponent estimators and multiplicative scan statistics.

A shared pattern: scans over n up to 10^5..10^6 run a vectorised float64
prefilter whose rounding error is bounded explicitly, and every candidate the
prefilter flags is then recertified in exact / big-float arithmetic.  The
certified results are what gets reported; the prefilter only prunes, and its
error bound guarantees no record is pruned away.

Exponent estimators return *certified lower bounds* only: a finite search can
witness good approximations but can never bound an exponent from above, so
results are labelled ``lower_bound`` and carry the witnesses that certify
them.  An exact integer relation (possible only for rational data) is
reported as an infinite-exponent flag instead of a number.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from ._context import precision_bits, workprec
from .exactnum import LinearSurdForm, Rational, Real, Surd, as_real, frac_dist

__all__ = [
    "diophantine_margin",
    "ExponentEstimate",
    "Witness",
    "omega_dual_lower",
    "omega_simul_lower",
    "omega_mult_lower",
    "BsResult",
    "b_s_value",
    "GallagherScan",
    "gallagher_scan",
    "PsiSpec",
    "psi_count",
]


# ---------------------------------------------------------------------------
# float64 prefilter helpers


def _float_and_eps(x: Real) -> tuple[float, float]:
    """Double-precision image of x and a bound on |x - float(x)| / (1+|x|)."""
    xf = float(x.to_mpfr(64))
    return xf, 2.3e-16 * (abs(xf) + 1.0)


def _frac_dist_np(vals: np.ndarray) -> np.ndarray:
    return np.abs(vals - np.rint(vals))


# ---------------------------------------------------------------------------
# the Diophantine-condition margin


def diophantine_margin(vals: Sequence[Real], kappa, Qmax: int, bits: int | None = None):
    """min over 1 <= q <= Qmax of max_i q^{1/d + kappa} <q x_i>.

    A margin staying away from 0 as Qmax grows is *evidence* for the
    Diophantine property, never a proof; rational inputs collapse it to an
    exact 0 at the first common denominator.
    Returns (margin, q_argmin) with the margin an mpfr at working precision.
    """
    vals = [as_real(v) for v in vals]
    kappa = as_real(kappa)
    if Qmax < 1:
        raise ValueError("Qmax must be >= 1")
    if kappa.sign() <= 0:
        raise ValueError("kappa must be > 0")
    d = len(vals)
    with workprec(bits) as eff:
        expo = (Rational(1, d) + kappa).to_mpfr(eff)
        best = None
        best_q = None
        for q in range(1, Qmax + 1):
            qr = Rational(q)
            worst = None
            for x in vals:
                dist = frac_dist(qr * x).to_mpfr(eff)
                if worst is None or dist > worst:
                    worst = dist
            val = gmpy2.exp(expo * gmpy2.log(mpfr(q))) * worst
            if best is None or val < best:
                best, best_q = val, q
            if best == 0:
                break
        return best, best_q


# ---------------------------------------------------------------------------
# exponent estimators


@dataclasses.dataclass(frozen=True)
class Witness:
    datum: tuple  # (n,) or (x, y)
    quality: float  # the certified w this datum achieves

    def as_json(self):
        return {"datum": list(self.datum), "quality": repr(self.quality)}


@dataclasses.dataclass
class ExponentEstimate:
    kind: str  # "simultaneous" | "dual" | "multiplicative"
    lower_bound: float | None  # None iff infinite
    infinite: bool
    witnesses: list[Witness]
    search_bound: int

    def best(self) -> Witness | None:
        return self.witnesses[0] if self.witnesses else None


def _dist_real(x: Real, bits: int) -> Real:
    # exact for Rational / Surd; working-precision value otherwise
    return frac_dist(as_real(x))


def _is_exact_zero(*reals: Real) -> bool:
    form = LinearSurdForm()
    for r in reals:
        form.add_real(r)
    return form.sign() == 0


def _certify_quality(dist: Real, height: int, bits: int) -> float:
    """w = -log(<.>) / log(height), evaluated at working precision."""
    with workprec(bits):
        dv = dist.to_mpfr(bits)
        return float(-gmpy2.log(dv) / gmpy2.log(mpfr(height)))


_TOP_K = 12


def omega_dual_lower(a, b, Hmax: int, bits: int | None = None) -> ExponentEstimate:
    """Best dual-approximation exponent witnessed at heights |x|+|y| <= Hmax.

    Scans <x a + y b> over the full integer box (one of each +-(x,y) pair),
    excluding height 1 where the quality ratio is undefined.  An exact
    integer relation x a + y b in Z flips the infinite flag.
    """
    if Hmax < 2:
        raise ValueError("Hmax must be >= 2")
    a, b = as_real(a), as_real(b)
    bits = bits or precision_bits()
    af, _ = _float_and_eps(a)
    bf, _ = _float_and_eps(b)
    cands: list[tuple[float, int, int]] = []
    zero_hits: list[tuple[int, int]] = []
    for y in range(0, Hmax + 1):
        x_lo = -Hmax + y if y > 0 else 1
        xs = np.arange(x_lo, Hmax - y + 1)
        if xs.size == 0:
            continue
        heights = np.abs(xs) + y
        ok = heights >= 2
        vals = xs * af + y * bf
        dist = _frac_dist_np(vals)
        eps = (np.abs(xs) + y + 1) * 4e-16 * (abs(af) + abs(bf) + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = -np.log(np.maximum(dist - eps, 1e-300)) / np.log(np.maximum(heights, 2))
        suspicious = dist <= eps
        for i in np.nonzero(suspicious & ok)[0]:
            zero_hits.append((int(xs[i]), int(y)))
        take = np.argsort(w[ok])[-_TOP_K:]
        idx = np.nonzero(ok)[0][take]
        for i in idx:
            cands.append((float(w[i]), int(xs[i]), int(y)))
    # exact zero detection (integer relations)
    for x, y in zero_hits:
        form = LinearSurdForm.from_real(a, scale=x)
        form.add_real(b, scale=y)
        m = round(float(x * af + y * bf))
        form.add(mpq(-m))
        if form.sign() == 0:
            return ExponentEstimate(
                kind="dual",
                lower_bound=None,
                infinite=True,
                witnesses=[Witness((x, y), math.inf)],
                search_bound=Hmax,
            )
    witnesses = []
    for _, x, y in sorted(cands, reverse=True)[: 4 * _TOP_K]:
        dist = frac_dist(as_real(x) * a + as_real(y) * b)
        if dist.sign() == 0:
            continue  # would have been caught above for exact kinds
        w = _certify_quality(dist, abs(x) + abs(y), bits)
        witnesses.append(Witness((x, y), w))
    witnesses.sort(key=lambda w: (-w.quality, w.datum))
    witnesses = witnesses[:_TOP_K]
    lb = witnesses[0].quality if witnesses else 0.0
    return ExponentEstimate("dual", lb, False, witnesses, Hmax)


def _omega_scan_n(a, b, Nmax, combine, kind, bits):
    if Nmax < 2:
        raise ValueError("Nmax must be >= 2")
    a, b = as_real(a), as_real(b)
    bits = bits or precision_bits()
    af, _ = _float_and_eps(a)
    bf, _ = _float_and_eps(b)
    ns = np.arange(2, Nmax + 1, dtype=np.float64)
    d1 = _frac_dist_np(ns * af)
    d2 = _frac_dist_np(ns * bf)
    eps = ns * 4e-16 * (abs(af) + abs(bf) + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = combine(np.maximum(d1 - eps, 1e-300), np.maximum(d2 - eps, 1e-300)) / np.log(ns)
    # exact zero detection
    for i in np.nonzero((d1 <= eps) | (d2 <= eps))[0]:
        n = int(ns[i])
        za = _is_exact_zero(frac_dist(as_real(n) * a))
        zb = _is_exact_zero(frac_dist(as_real(n) * b))
        hit = (za and zb) if kind == "simultaneous" else (za or zb)
        if hit:
            return ExponentEstimate(kind, None, True, [Witness((n,), math.inf)], Nmax)
    order = np.argsort(w)[-4 * _TOP_K:]
    witnesses = []
    for i in reversed(order):
        n = int(ns[i])
        da = frac_dist(as_real(n) * a)
        db = frac_dist(as_real(n) * b)
        if da.sign() == 0 or db.sign() == 0:
            continue
        with workprec(bits):
            dav, dbv = da.to_mpfr(bits), db.to_mpfr(bits)
            if kind == "simultaneous":
                val = dav if dav > dbv else dbv
            else:
                val = dav * dbv
            q = float(-gmpy2.log(val) / gmpy2.log(mpfr(n)))
        witnesses.append(Witness((n,), q))
    witnesses.sort(key=lambda w: (-w.quality, w.datum))
    witnesses = witnesses[:_TOP_K]
    lb = witnesses[0].quality if witnesses else 0.0
    return ExponentEstimate(kind, lb, False, witnesses, Nmax)


def omega_simul_lower(a, b, Nmax: int, bits: int | None = None) -> ExponentEstimate:
    """Simultaneous exponent lower bound: max{<na>, <nb>} < n^{-w}."""
    return _omega_scan_n(
        a, b, Nmax, lambda d1, d2: -np.log(np.maximum(d1, d2)), "simultaneous", bits
    )


def omega_mult_lower(a, b, Nmax: int, bits: int | None = None) -> ExponentEstimate:
    """Multiplicative exponent lower bound: <na><nb> <= n^{-w}."""
    return _omega_scan_n(
        a, b, Nmax, lambda d1, d2: -(np.log(d1) + np.log(d2)), "multiplicative", bits
    )


# ---------------------------------------------------------------------------
# the equidistribution rate functional b_s


@dataclasses.dataclass(frozen=True)
class BsResult:
    value: mpfr
    q: int
    certified: bool


def b_s_value(v1, v2, s, hard_cap: int = 100_000, bits: int | None = None) -> BsResult:
    """max over q >= 1 of min{1/q^2, e^{-s/2}/(q <q v1>), e^{-s/2}/(q <q v2>)}.

    The 1/q^2 term strictly decreases, so the scan certifies the global max
    at the first q whose 1/q^2 drops below the running maximum.  Terms with
    <q v_i> = 0 are treated as +infinity and skipped in the min; if every
    term is infinite the q contributes 1/q^2.
    """
    v1, v2, s = as_real(v1), as_real(v2), as_real(s)
    if s.sign() < 0:
        raise ValueError("s must be >= 0")
    with workprec(bits) as eff:
        decay = gmpy2.exp(-s.to_mpfr(eff) / 2)
        best = None
        best_q = None
        for q in range(1, hard_cap + 1):
            inv_q2 = mpfr(1) / (mpfr(q) * mpfr(q))
            if best is not None and inv_q2 < best:
                return BsResult(best, best_q, True)
            terms = [inv_q2]
            for v in (v1, v2):
                dist = frac_dist(Rational(q) * v)
                if dist.sign() != 0:
                    terms.append(decay / (mpfr(q) * dist.to_mpfr(eff)))
            val = min(terms)
            if best is None or val > best:
                best, best_q = val, q
        return BsResult(best, best_q, False)


# ---------------------------------------------------------------------------
# Gallagher-style running minima


@dataclasses.dataclass(frozen=True)
class GallagherScan:
    min_value: mpfr
    argmin: int
    trace: tuple  # ((n, value_mpfr), ...) at each new running minimum
    precision: int


def _gallagher_value(n: int, alpha: Real, beta: Real, bits: int) -> mpfr:
    with workprec(bits):
        da = frac_dist(as_real(n) * alpha).to_mpfr(bits)
        db = frac_dist(as_real(n) * beta).to_mpfr(bits)
        ln = gmpy2.log(mpfr(n))
        return mpfr(n) * ln * ln * da * db


def gallagher_scan(alpha, beta, Nmax: int, bits: int | None = None) -> GallagherScan:
    """Running minimum of n (log n)^2 <n alpha> <n beta> over 2 <= n <= Nmax.

    The float64 prefilter keeps every n whose certified lower bound could
    undercut the certified upper bound of the running minimum; those
    candidates are then evaluated at working precision in order, which makes
    the reported trace identical to a full exact scan.
    """
    if Nmax < 2:
        raise ValueError("Nmax must be >= 2")
    alpha, beta = as_real(alpha), as_real(beta)
    bits = bits or precision_bits()
    af, _ = _float_and_eps(alpha)
    bf, _ = _float_and_eps(beta)
    ns = np.arange(2, Nmax + 1, dtype=np.float64)
    d1 = _frac_dist_np(ns * af)
    d2 = _frac_dist_np(ns * bf)
    eps = ns * 4e-16 * (abs(af) + abs(bf) + 2)
    factor = ns * np.log(ns) ** 2
    lower = factor * np.maximum(d1 - eps, 0.0) * np.maximum(d2 - eps, 0.0)
    upper = factor * (d1 + eps) * (d2 + eps)
    run_upper = np.minimum.accumulate(upper)
    prev_upper = np.concatenate(([np.inf], run_upper[:-1]))
    cand = np.nonzero(lower < prev_upper)[0]

    trace: list[tuple[int, mpfr]] = []
    best = None
    best_n = None
    for i in cand:
        n = int(ns[i])
        val = _gallagher_value(n, alpha, beta, bits)
        if best is None or val < best:
            best, best_n = val, n
            trace.append((n, val))
            if best == 0:
                break
    return GallagherScan(min_value=best, argmin=best_n, trace=tuple(trace), precision=bits)


# ---------------------------------------------------------------------------
# psi-approximation counting


@dataclasses.dataclass(frozen=True)
class PsiSpec:
    """A decreasing approximation function.

    kind "log_power": psi(n) = c / (n (log n)^gamma) on n >= 2 (decreasing
    for c > 0, gamma >= 0).  kind "table": a right-continuous step function
    through the given (n, value) pairs; constants are one-row tables.
    """

    kind: str
    c: Real = None  # type: ignore[assignment]
    gamma: Real = None  # type: ignore[assignment]
    table: tuple = ()

    def __post_init__(self):
        if self.kind == "log_power":
            object.__setattr__(self, "c", as_real(self.c))
            object.__setattr__(self, "gamma", as_real(self.gamma))
            if self.c.sign() < 0 or self.gamma.sign() < 0:
                raise ValueError("log_power psi needs c >= 0, gamma >= 0")
        elif self.kind == "table":
            tab = tuple(sorted((int(n), as_real(v)) for n, v in self.table))
            if not tab:
                raise ValueError("empty psi table")
            for (n1, v1), (n2, v2) in zip(tab, tab[1:]):
                if n1 == n2:
                    raise ValueError("duplicate n in psi table")
                if v2 > v1:
                    raise ValueError("psi table is not decreasing")
            object.__setattr__(self, "table", tab)
        else:
            raise ValueError(f"unknown psi kind {self.kind!r}")

    @classmethod
    def log_power(cls, c, gamma) -> "PsiSpec":
        return cls(kind="log_power", c=c, gamma=gamma)

    @classmethod
    def constant(cls, value) -> "PsiSpec":
        return cls(kind="table", table=((1, as_real(value)),))

    def value_mpfr(self, n: int, bits: int | None = None) -> mpfr:
        with workprec(bits) as eff:
            if self.kind == "log_power":
                if n < 2:
                    raise ValueError("log_power psi defined for n >= 2")
                ln = gmpy2.log(mpfr(n))
                return self.c.to_mpfr(eff) / (mpfr(n) * gmpy2.exp(self.gamma.to_mpfr(eff) * gmpy2.log(ln)))
            val = None
            for nk, vk in self.table:
                if nk <= n:
                    val = vk
            if val is None:
                raise ValueError(f"psi table does not cover n = {n}")
            return val.to_mpfr(eff)

    def value_float(self, n) -> float:
        if self.kind == "log_power":
            cf = float(self.c.to_mpfr(64))
            gf = float(self.gamma.to_mpfr(64))
            return cf / (n * math.log(n) ** gf)
        return float(self.value_mpfr(int(n), 64))

    def to_json(self) -> dict:
        from .exactnum import real_to_json

        if self.kind == "log_power":
            return {"kind": "log_power", "c": real_to_json(self.c), "gamma": real_to_json(self.gamma)}
        return {"kind": "table", "table": [[n, real_to_json(v)] for n, v in self.table]}


def psi_count(alpha, beta, psi: PsiSpec, Nmax: int, bits: int | None = None):
    """Count (and list) n in [2, Nmax] with <n alpha><n beta> < psi(n).

    Strict inequality, matching the displays this feeds; candidates within
    the prefilter's error band are recertified at working precision.
    """
    if Nmax < 2:
        raise ValueError("Nmax must be >= 2")
    alpha, beta = as_real(alpha), as_real(beta)
    bits = bits or precision_bits()
    af, _ = _float_and_eps(alpha)
    bf, _ = _float_and_eps(beta)
    ns = np.arange(2, Nmax + 1, dtype=np.float64)
    d1 = _frac_dist_np(ns * af)
    d2 = _frac_dist_np(ns * bf)
    eps = ns * 4e-16 * (abs(af) + abs(bf) + 2)
    prod_lo = np.maximum(d1 - eps, 0.0) * np.maximum(d2 - eps, 0.0)
    prod_hi = (d1 + eps) * (d2 + eps)
    psi_vals = np.array([psi.value_float(int(n)) for n in ns]) if psi.kind == "table" else None
    if psi_vals is None:
        cf = float(psi.c.to_mpfr(64))
        gf = float(psi.gamma.to_mpfr(64))
        psi_vals = cf / (ns * np.log(ns) ** gf)
    surely = prod_hi < psi_vals * (1 - 1e-9)
    maybe = (prod_lo < psi_vals * (1 + 1e-9)) & ~surely
    solutions = [int(n) for n in ns[surely]]
    for n in ns[maybe]:
        n = int(n)
        with workprec(bits):
            da = frac_dist(as_real(n) * alpha).to_mpfr(bits)
            db = frac_dist(as_real(n) * beta).to_mpfr(bits)
            if da * db < psi.value_mpfr(n, bits):
                solutions.append(n)
    solutions.sort()
    return len(solutions), solutions
