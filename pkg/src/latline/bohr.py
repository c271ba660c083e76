"""Dual Bohr sets, progression covers, and rational points near lines.

The dual Bohr set  B(delta; Q; a, b) = {(p2, q, p1) : |p2|,|q| <= Q,
|p2 a + q b - p1| <= delta}  is enumerated exactly: a vectorised float64 pass
produces the integer ranges, and every cell whose boundary expression lands
inside the float error band is re-decided with exact arithmetic on the linear
surd form p2 a + q b - p1.  The cover machinery scales the slab-box body by
lambda = (delta Q^2)^{1/3}, takes reduced successive minima, and certifies
containment of B in the progression through exact Cramer coordinates.

Boundary conventions: the Bohr-set inequalities are non-strict (<=); the
near-line counting windows are strict (<).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

from ._context import precision_bits, workprec
from .dioph import PsiSpec
from .errors import DEFAULT_CELL_BUDGET, BudgetError
from .exactnum import LinearSurdForm, Rational, Real, as_real, floor_real
from .lattice3 import BodyNorm, SuccessiveMinima, _det3_int, successive_minima

__all__ = [
    "BohrParams",
    "BohrSet",
    "GapCover",
    "enumerate_bohr",
    "bohr_oracle",
    "gap_cover",
    "certify_containment",
    "count_near_line",
    "count_near_line_oracle",
]


# ---------------------------------------------------------------------------
# exact floors of linear surd forms (boundary decisions)


def _exact_floor_form(form: LinearSurdForm, max_bits: int = 1 << 14) -> int:
    """floor of r0 + sum r_i sqrt(d_i), exactly."""
    keys = [d for d in form.terms if d != 1]
    if not keys:
        r = form.terms.get(1, mpq(0))
        return int(r.numerator // r.denominator)
    bits = 96
    while bits <= max_bits:
        lo, hi = form.bracket(bits)
        flo = int(gmpy2.floor(lo))
        fhi = int(gmpy2.floor(hi))
        if flo == fhi:
            return flo
        bits *= 2
    raise ArithmeticError("floor undecided at maximum precision (boundary tie?)")


def _exact_ceil_form(form: LinearSurdForm, max_bits: int = 1 << 14) -> int:
    neg = LinearSurdForm()
    for d, r in form.terms.items():
        neg.add(-r, d)
    return -_exact_floor_form(neg, max_bits)


def _line_form(a: Real, b: Real, p2: int, q: int, shift=0) -> LinearSurdForm:
    form = LinearSurdForm.from_real(a, scale=p2)
    form.add_real(b, scale=q)
    if shift:
        form.add_real(as_real(shift))
    return form


# ---------------------------------------------------------------------------
# Bohr set enumeration


@dataclasses.dataclass(frozen=True)
class BohrParams:
    a: Real
    b: Real
    Q: int
    delta: Real

    def __post_init__(self):
        object.__setattr__(self, "a", as_real(self.a))
        object.__setattr__(self, "b", as_real(self.b))
        object.__setattr__(self, "delta", as_real(self.delta))
        if self.Q < 1:
            raise ValueError("Q must be a positive integer")
        if self.delta.sign() <= 0:
            raise ValueError("delta must be positive")

    @property
    def regime_ok(self) -> bool:
        """Inside the cover lemma's regime Q/1000 > delta >= Q^-1/2 (log Q)^-3/2.

        Recorded, never enforced: enumeration is valid for any delta; only
        the cover guarantees need the regime.
        """
        df = float(self.delta.to_mpfr(64))
        q = self.Q
        return df < q / 1000.0 and df >= q ** -0.5 * math.log(q) ** -1.5 if q > 1 else False

    def to_json(self) -> dict:
        from .exactnum import real_to_json

        return {
            "a": real_to_json(self.a),
            "b": real_to_json(self.b),
            "Q": self.Q,
            "delta": real_to_json(self.delta),
            "regime_ok": self.regime_ok,
        }


@dataclasses.dataclass(frozen=True)
class BohrSet:
    params: BohrParams
    members: np.ndarray  # (n, 3) int64, rows (p2, q, p1), sorted lexicographically

    @property
    def count(self) -> int:
        return int(self.members.shape[0])

    def member_tuples(self) -> list[tuple[int, int, int]]:
        return [tuple(int(v) for v in row) for row in self.members]

    def recheck(self, row) -> bool:
        """Re-verify the three defining inequalities for one triple, exactly."""
        p2, q, p1 = (int(v) for v in row)
        if abs(p2) > self.params.Q or abs(q) > self.params.Q:
            return False
        upper = _line_form(self.params.a, self.params.b, p2, q, shift=-p1)
        upper.add_real(self.params.delta, scale=-1)
        if upper.sign() > 0:  # p2 a + q b - p1 > delta
            return False
        lower = _line_form(self.params.a, self.params.b, p2, q, shift=-p1)
        lower.add_real(self.params.delta)
        return lower.sign() >= 0  # p2 a + q b - p1 >= -delta

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "members": self.member_tuples()}


def enumerate_bohr(params: BohrParams, budget: int = DEFAULT_CELL_BUDGET) -> BohrSet:
    """Exhaustive, exact enumeration of the dual Bohr set.

    delta >= 1/2 is fine: every integer within delta of p2 a + q b is
    emitted, not just the nearest one.
    """
    Q = params.Q
    cells = (2 * Q + 1) ** 2
    if cells > budget:
        raise BudgetError(f"Bohr box has {cells} cells, budget {budget}")
    af = float(params.a.to_mpfr(64))
    bf = float(params.b.to_mpfr(64))
    df = float(params.delta.to_mpfr(64))
    # worst-case float error of p2*af + q*bf +- delta, with slack for the
    # rounding of a, b, delta themselves
    band = (abs(af) + abs(bf) + 2.0) * Q * 4e-16 + (abs(df) + 1.0) * 4e-16
    band = band * 4 + 1e-13

    qs = np.arange(-Q, Q + 1)
    chunks = []
    exact_cells: list[tuple[int, int]] = []
    for p2 in range(-Q, Q + 1):
        v = p2 * af + qs * bf
        hi = np.floor(v + df)
        lo = np.ceil(v - df)
        # boundary suspicion: v +- delta within the error band of an integer
        s_hi = np.abs((v + df) - np.rint(v + df)) <= band
        s_lo = np.abs((v - df) - np.rint(v - df)) <= band
        suspicious = s_hi | s_lo
        for i in np.nonzero(suspicious)[0]:
            exact_cells.append((p2, int(qs[i])))
        counts = (hi - lo + 1).astype(np.int64)
        counts[suspicious] = 0
        keep = counts > 0
        if np.any(keep):
            reps = counts[keep]
            q_rep = np.repeat(qs[keep], reps)
            p1_start = lo[keep].astype(np.int64)
            p1 = np.concatenate([np.arange(s, s + c) for s, c in zip(p1_start, reps)])
            p2_rep = np.full(q_rep.shape, p2, dtype=np.int64)
            chunks.append(np.column_stack([p2_rep, q_rep, p1]))
    extra_rows = []
    for p2, q in exact_cells:
        base = _line_form(params.a, params.b, p2, q)
        hi_form = LinearSurdForm({k: v for k, v in base.terms.items()})
        hi_form.add_real(params.delta)
        lo_form = LinearSurdForm({k: v for k, v in base.terms.items()})
        lo_form.add_real(params.delta, scale=-1)
        p1_hi = _exact_floor_form(hi_form)
        p1_lo = _exact_ceil_form(lo_form)
        for p1 in range(p1_lo, p1_hi + 1):
            extra_rows.append((p2, q, p1))
    if extra_rows:
        chunks.append(np.array(extra_rows, dtype=np.int64))
    if chunks:
        members = np.vstack(chunks)
        order = np.lexsort((members[:, 2], members[:, 1], members[:, 0]))
        members = members[order]
    else:
        members = np.empty((0, 3), dtype=np.int64)
    return BohrSet(params=params, members=members)


def bohr_oracle(params: BohrParams) -> list[tuple[int, int, int]]:
    """Independent double-loop enumeration in exact arithmetic (small Q)."""
    out = []
    for p2 in range(-params.Q, params.Q + 1):
        for q in range(-params.Q, params.Q + 1):
            hi_form = _line_form(params.a, params.b, p2, q)
            hi_form.add_real(params.delta)
            lo_form = _line_form(params.a, params.b, p2, q)
            lo_form.add_real(params.delta, scale=-1)
            p1_hi = _exact_floor_form(hi_form)
            p1_lo = _exact_ceil_form(lo_form)
            for p1 in range(p1_lo, p1_hi + 1):
                out.append((p2, q, p1))
    return sorted(out)


# ---------------------------------------------------------------------------
# generalized arithmetic progression cover


@dataclasses.dataclass(frozen=True)
class GapCover:
    v1: tuple[int, int, int]
    v2: tuple[int, int, int]
    v3: tuple[int, int, int]
    N1: int
    N2: int
    N3: int
    lam: mpfr  # (delta Q^2)^(1/3)
    minima: tuple  # reduced successive minima of the lambda^-1-scaled body
    C: int
    params: BohrParams
    minima_body: tuple = ()  # exact minima of the unscaled body

    @property
    def cardinality(self) -> int:
        return (2 * self.N1 + 1) * (2 * self.N2 + 1) * (2 * self.N3 + 1)

    def minima_product(self) -> Real:
        """lambda1 lambda2 lambda3 of the scaled body, as an exact Real."""
        prod = as_real(1)
        for lam in self.minima_body:
            prod = prod * lam
        return prod * as_real(self.params.delta) * as_real(self.params.Q) ** 2

    def to_json(self) -> dict:
        return {
            "v": [list(self.v1), list(self.v2), list(self.v3)],
            "N": [self.N1, self.N2, self.N3],
            "lambda": repr(self.lam),
            "minima": [repr(m) for m in self.minima],
            "C": self.C,
            "cardinality": self.cardinality,
            "params": self.params.to_json(),
        }


def gap_cover(params: BohrParams, C: int = 8, bits: int | None = None) -> GapCover:
    """Progression cover data for the Bohr set.

    The body is scaled by lambda = (delta Q^2)^{1/3} so its volume is 8;
    N_i = floor(C * lambda / lambda_i) then only depends on the unscaled
    body minima through C / lambda_i(body), which is floored exactly.
    """
    if C < 1:
        raise ValueError("C must be a positive integer")
    body = BodyNorm(params.a, params.b, params.Q, params.delta)
    mins = successive_minima(body, bits=bits)
    with workprec(bits) as eff:
        lam3 = params.delta.to_mpfr(eff) * mpfr(params.Q) ** 2
        lam = gmpy2.exp(gmpy2.log(lam3) / 3)
        minima_scaled = tuple(lam * m.to_mpfr(eff) for m in mins.lambdas)
    Ns = []
    for lam_i in mins.lambdas:
        # floor(C / lambda_i) with lambda_i an exact Rational of the body
        ratio = as_real(C) / lam_i
        Ns.append(max(floor_real(ratio), 0))
    return GapCover(
        v1=mins.vectors[0],
        v2=mins.vectors[1],
        v3=mins.vectors[2],
        N1=Ns[0],
        N2=Ns[1],
        N3=Ns[2],
        lam=lam,
        minima=minima_scaled,
        C=C,
        params=params,
        minima_body=mins.lambdas,
    )


def certify_containment(B: BohrSet, P: GapCover, max_violations: int = 100):
    """Cramer-certified containment of the Bohr set in the progression.

    Every member gets exact integer coordinates n with  n @ [v1 v2 v3]^T =
    member; ok iff |n_i| <= N_i throughout.  Returns (ok, violations).
    """
    M = np.array([P.v1, P.v2, P.v3], dtype=np.int64).T  # columns are v_i
    det = _det3_int(M.tolist())
    if abs(det) != 1:
        raise ValueError(f"cover basis has determinant {det}, not +-1")
    # adjugate gives the exact integer inverse up to the +-1 determinant
    adj = np.zeros((3, 3), dtype=np.int64)
    idx = [(1, 2), (0, 2), (0, 1)]
    for i in range(3):
        for j in range(3):
            r = [x for x in range(3) if x != j]
            c = [x for x in range(3) if x != i]
            minor = M[r[0], c[0]] * M[r[1], c[1]] - M[r[0], c[1]] * M[r[1], c[0]]
            adj[i, j] = (-1) ** (i + j) * minor
    inv = det * adj  # exact inverse since det = +-1
    if B.count == 0:
        return True, []
    # overflow guard for the int64 matmul
    if B.count and (np.abs(inv).max() * np.abs(B.members).max() * 3) >= 2 ** 62:
        coords = np.array(
            [[sum(int(inv[i, k]) * int(x[k]) for k in range(3)) for i in range(3)] for x in B.members],
            dtype=object,
        )
    else:
        coords = B.members @ inv.T
    bounds = np.array([P.N1, P.N2, P.N3])
    bad = np.abs(coords) > bounds
    bad_rows = np.nonzero(bad.any(axis=1))[0]
    violations = []
    for i in bad_rows[:max_violations]:
        violations.append((tuple(int(v) for v in B.members[i]), tuple(int(v) for v in coords[i])))
    return len(bad_rows) == 0, violations


# ---------------------------------------------------------------------------
# counting rational points near the line


def _psi_windows(t: int, m: int, psi: PsiSpec, bits: int):
    with workprec(bits):
        pv = psi.value_mpfr(2 ** t, bits)
        if pv == 0:
            return None, None
        w = gmpy2.sqrt(2 * pv)
        w1 = mpfr(2) ** m * w / mpfr(2) ** t
        w2 = mpfr(2) ** (-m) * w / mpfr(2) ** t
        return w1, w2


def count_near_line(t: int, m: int, a, b, interval, psi: PsiSpec, bits: int | None = None) -> int:
    """N(t, m): triples (q, p1, p2), 2^t <= q < 2^{t+1}, admitting a common
    beta in the interval with |a beta + b - p1/q| < 2^m sqrt(2 psi(2^t))/2^t
    and |beta - p2/q| < 2^{-m} sqrt(2 psi(2^t))/2^t (both strict).

    Exact: float64 ranges with an error band, borderline cells re-decided
    with exact floors.  Only a > 0 lines are supported on the fast path
    (a < 0 mirrors; a = 0 degenerates to a fixed target row).
    """
    bits = bits or precision_bits()
    a, b = as_real(a), as_real(b)
    lo, hi = (as_real(interval[0]), as_real(interval[1]))
    if not lo < hi:
        raise ValueError("interval must be nondegenerate")
    w1, w2 = _psi_windows(t, m, psi, bits)
    if w1 is None:
        return 0
    af, bf = float(a.to_mpfr(64)), float(b.to_mpfr(64))
    lof, hif = float(lo.to_mpfr(64)), float(hi.to_mpfr(64))
    w1f, w2f = float(w1), float(w2)
    if af <= 0:
        raise NotImplementedError("fast path assumes a > 0 (mirror the line)")
    total = 0
    band = 1e-11
    for q in range(2 ** t, 2 ** (t + 1)):
        # p2 strictly between q(lo - w2) and q(hi + w2)
        L2 = q * (lof - w2f)
        U2 = q * (hif + w2f)
        p2s = np.arange(math.floor(L2) + 1, math.ceil(U2))
        if p2s.size == 0:
            continue
        # beta window, clipped to the interval
        blo = np.maximum(p2s / q - w2f, lof)
        bhi = np.minimum(p2s / q + w2f, hif)
        ok = blo < bhi + band
        # p1 strictly between q(a*blo + b - w1) and q(a*bhi + b + w1)
        L1 = q * (af * blo + bf - w1f)
        U1 = q * (af * bhi + bf + w1f)
        counts = np.where(blo < bhi, np.ceil(U1) - np.floor(L1) - 1, 0).astype(np.int64)
        counts = np.maximum(counts, 0)
        # boundary suspicion: window collapse, or L1/U1 grazing an integer
        sus = ok & (
            (np.abs(L1 - np.rint(L1)) <= band * q)
            | (np.abs(U1 - np.rint(U1)) <= band * q)
            | (np.abs(blo - bhi) <= band)
        )
        total += int(counts[~sus].sum())
        for i in np.nonzero(sus)[0]:
            total += _count_p1_exact(q, int(p2s[i]), a, b, lo, hi, w1, w2, bits)
        # p2 values grazing the ends of the open range get an exact pass
        for edge_val in (L2, U2):
            if abs(edge_val - round(edge_val)) <= band * q:
                p2 = round(edge_val)
                if not (p2s[0] <= p2 <= p2s[-1]):
                    total += _count_p1_exact(q, p2, a, b, lo, hi, w1, w2, bits)
    return total


def _count_p1_exact(q, p2, a, b, lo, hi, w1, w2, bits) -> int:
    """Exact p1 count for one (q, p2) cell, via working-precision brackets."""
    with workprec(bits + 64):
        w2v = mpfr(w2)
        blo = as_real(p2) / as_real(q) - as_real(w2v)
        bhi = as_real(p2) / as_real(q) + as_real(w2v)
        blo_c = lo if lo > blo else blo  # max: window open, interval closed
        bhi_c = hi if hi < bhi else bhi
        open_lo = blo_c is blo
        open_hi = bhi_c is bhi
        if not (blo_c < bhi_c):
            return 0
        av, bv = a.to_mpfr(bits + 64), b.to_mpfr(bits + 64)
        L = mpfr(q) * (av * blo_c.to_mpfr(bits + 64) + bv - mpfr(w1))
        U = mpfr(q) * (av * bhi_c.to_mpfr(bits + 64) + bv + mpfr(w1))
        n_lo = int(gmpy2.floor(L)) + 1
        n_hi = int(gmpy2.ceil(U)) - 1
        return max(n_hi - n_lo + 1, 0)


def count_near_line_oracle(t, m, a, b, interval, psi: PsiSpec, bits: int | None = None) -> int:
    """Independent brute force: loop candidate triples, test the interval
    intersection for a common beta directly.  Practical for t <= 8."""
    bits = bits or precision_bits()
    a, b = as_real(a), as_real(b)
    lo, hi = as_real(interval[0]), as_real(interval[1])
    w1, w2 = _psi_windows(t, m, psi, bits)
    if w1 is None:
        return 0
    total = 0
    with workprec(bits):
        av = a.to_mpfr(bits)
        bv = b.to_mpfr(bits)
        lov, hiv = lo.to_mpfr(bits), hi.to_mpfr(bits)
        for q in range(2 ** t, 2 ** (t + 1)):
            qv = mpfr(q)
            p2_lo = int(gmpy2.floor(qv * (lov - w2))) + 1
            p2_hi = int(gmpy2.ceil(qv * (hiv + w2))) - 1
            for p2 in range(p2_lo, p2_hi + 1):
                bwin_lo = p2 / qv - w2
                bwin_hi = p2 / qv + w2
                p1_lo = int(gmpy2.floor(qv * (av * max(bwin_lo, lov) + bv - w1)))
                p1_hi = int(gmpy2.ceil(qv * (av * min(bwin_hi, hiv) + bv + w1)))
                for p1 in range(p1_lo, p1_hi + 1):
                    # beta must satisfy all three constraints simultaneously
                    lo3 = max(bwin_lo, lov, (p1 / qv - w1 - bv) / av)
                    hi3 = min(bwin_hi, hiv, (p1 / qv + w1 - bv) / av)
                    if lo3 < hi3:
                        total += 1
    return total
