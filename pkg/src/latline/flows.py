"""Flow matrices and their exact algebraic identities.

All group elements live in a 3x3 matrix algebra over the ExpPoly ring, so
products like a(t,s) u(f(x), x) stay symbolic in the two flow parameters and
identities between them are checked structurally (term-by-term), with no
tolerances.  Numeric orbit lattices are produced by evaluating the symbolic
product at concrete (t, s).

Conventions, fixed once and verified by tests rather than re-derived per
display:

* u(y, x) is upper unipotent with last column (y, x, 1);
* a(t,s) = diag(e^t, e^s, e^{-t-s});  xi(t) = diag(e^{2t}, e^{-t}, e^{-t});
  d(lam) = diag(1, e^lam, e^{-lam});  v(r) adds r to the (2,3) entry;
* the affine subgroup is written (g, w) = [[1, w], [0, g]] with the row
  vector w in the first row, multiplying by (g1, w1)(g2, w2) =
  (g1 g2, w1 g2 + w2);
* "residual of A against B" below always means  B * A^{-1}  for the
  factorisation (how far the structured product is from the orbit element)
  and  A * B^{-1}  for the shift conjugation; each reduces to a single
  off-diagonal exponential term and the tests pin both exactly.
"""

from __future__ import annotations

import dataclasses

import gmpy2
from gmpy2 import mpfr

from ._context import workprec
from .exactnum import BigFloat, Rational, Real, as_real
from .exppoly import ExpPoly, LinForm, S, T
from .lattice3 import Lattice3

__all__ = [
    "FlowPoint",
    "u_mat",
    "a_mat",
    "xi_mat",
    "d_small",
    "v_small",
    "aff_element",
    "aff_mul",
    "mat_mul",
    "mat_identity",
    "mat_det",
    "mat_eq",
    "orbit_lattice",
    "orbit_basis_mpfr",
    "conjugation_residual",
    "affine_factorization_residual",
    "assert_single_off_diagonal",
]

Matrix = tuple  # 3x3 tuple-of-tuples of ExpPoly


@dataclasses.dataclass(frozen=True)
class FlowPoint:
    """One evaluation point of the flow: times, line, base point, scale."""

    t: Real
    s: Real
    a: Real
    b: Real
    x: Real
    epsilon: Real = None  # type: ignore[assignment]

    def __post_init__(self):
        for name in ("t", "s", "a", "b", "x"):
            object.__setattr__(self, name, as_real(getattr(self, name)))
        if self.t.sign() < 0 or self.s.sign() < 0:
            raise ValueError("flow times t, s must be >= 0")
        if self.epsilon is not None:
            eps = as_real(self.epsilon)
            if not (Rational(0) < eps < Rational(1)):
                raise ValueError("epsilon must lie in (0, 1)")
            object.__setattr__(self, "epsilon", eps)


def _e(form: LinForm) -> ExpPoly:
    return ExpPoly.exp(form)


def _p(x) -> ExpPoly:
    return ExpPoly.coerce(x)


def mat_identity() -> Matrix:
    one, zero = ExpPoly.one, ExpPoly.zero
    return ((one, zero, zero), (zero, one, zero), (zero, zero, one))


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    return tuple(
        tuple(sum((A[i][k] * B[k][j] for k in range(3)), ExpPoly.zero) for j in range(3))
        for i in range(3)
    )


def mat_det(A: Matrix) -> ExpPoly:
    return (
        A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
        - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
        + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0])
    )


def mat_eq(A: Matrix, B: Matrix) -> bool:
    return all(A[i][j] == B[i][j] for i in range(3) for j in range(3))


def u_mat(y, x) -> Matrix:
    """Upper unipotent with last column (y, x, 1); y, x may be symbolic."""
    one, zero = ExpPoly.one, ExpPoly.zero
    return ((one, zero, _p(y)), (zero, one, _p(x)), (zero, zero, one))


def a_mat(sigma: LinForm = T, tau: LinForm = S) -> Matrix:
    """diag(e^sigma, e^tau, e^{-sigma-tau}); defaults give a(t, s)."""
    zero = ExpPoly.zero
    return (
        (_e(sigma), zero, zero),
        (zero, _e(tau), zero),
        (zero, zero, _e(-(sigma + tau))),
    )


def xi_mat(form: LinForm) -> Matrix:
    """diag(e^{2 form}, e^{-form}, e^{-form}); xi_mat(T) is xi(t)."""
    zero = ExpPoly.zero
    return ((_e(form * 2), zero, zero), (zero, _e(-form), zero), (zero, zero, _e(-form)))


def d_small(form: LinForm) -> Matrix:
    """diag(1, e^form, e^{-form})."""
    zero, one = ExpPoly.zero, ExpPoly.one
    return ((one, zero, zero), (zero, _e(form), zero), (zero, zero, _e(-form)))


def v_small(r) -> Matrix:
    """Lower-block unipotent: identity plus r in the (2,3) entry."""
    one, zero = ExpPoly.one, ExpPoly.zero
    return ((one, zero, zero), (zero, one, _p(r)), (zero, zero, one))


def aff_element(w1, w2) -> Matrix:
    """The affine element (I, (w1, w2)): row vector w in the first row."""
    one, zero = ExpPoly.one, ExpPoly.zero
    return ((one, _p(w1), _p(w2)), (zero, one, zero), (zero, zero, one))


def aff_mul(g1, w1: tuple, g2, w2: tuple):
    """Group law (g1, w1)(g2, w2) = (g1 g2, w1 g2 + w2) on 2x2 blocks."""
    g = tuple(
        tuple(sum((_p(g1[i][k]) * _p(g2[k][j]) for k in range(2)), ExpPoly.zero) for j in range(2))
        for i in range(2)
    )
    w = tuple(
        _p(w1[0]) * _p(g2[0][j]) + _p(w1[1]) * _p(g2[1][j]) + _p(w2[j]) for j in range(2)
    )
    return g, w


def aff_embed(g, w) -> Matrix:
    one, zero = ExpPoly.one, ExpPoly.zero
    return (
        (one, _p(w[0]), _p(w[1])),
        (zero, _p(g[0][0]), _p(g[0][1])),
        (zero, _p(g[1][0]), _p(g[1][1])),
    )


# ---------------------------------------------------------------------------
# orbit lattices


def orbit_symbolic(a, b, x) -> Matrix:
    """a(t,s) u(f(x), x) with f(x) = a x + b, symbolic in (t, s)."""
    a, b, x = as_real(a), as_real(b), as_real(x)
    return mat_mul(a_mat(), u_mat(a * x + b, x))


def orbit_basis_mpfr(t, s, x, a, b, bits: int | None = None):
    """Numeric basis rows of a(t,s) u(f(x), x); fast path for bulk scans."""
    with workprec(bits) as eff:
        tv, sv = as_real(t).to_mpfr(eff), as_real(s).to_mpfr(eff)
        et, es = gmpy2.exp(tv), gmpy2.exp(sv)
        emts = gmpy2.exp(-tv - sv)
        xv = as_real(x).to_mpfr(eff)
        fv = as_real(a).to_mpfr(eff) * xv + as_real(b).to_mpfr(eff)
        zero = mpfr(0)
        return [
            (et, zero, et * fv),
            (zero, es, es * xv),
            (zero, zero, emts),
        ]


def orbit_lattice(p: FlowPoint, bits: int | None = None) -> Lattice3:
    """The lattice a(t,s) u(f(x), x) Z^3 at a concrete flow point.

    The determinant is checked symbolically (it is the constant 1 before any
    evaluation), then the basis is evaluated at working precision.
    """
    sym = orbit_symbolic(p.a, p.b, p.x)
    if mat_det(sym) != ExpPoly.one:
        raise AssertionError("orbit basis determinant is not exactly 1")
    rows = orbit_basis_mpfr(p.t, p.s, p.x, p.a, p.b, bits)
    prov = f"a(t,s)u(f(x),x) at t={p.t!r}, s={p.s!r}, x={p.x!r}, line=({p.a!r}, {p.b!r})"
    return Lattice3.from_matrix_rows(rows, provenance=prov, check=False)


# ---------------------------------------------------------------------------
# the two exact identities


def _mat_inverse_from_factors(*factors: Matrix) -> Matrix:
    out = mat_identity()
    for f in factors:
        out = mat_mul(out, f)
    return out


def conjugation_residual(a, b, x0, r) -> Matrix:
    """Residual of the base-point shift x0 -> x0 + r e^{-2s-t}.

    Returns W = a(t,s) u(f(x0 + r e^{-2s-t}), .) * [v(r) a(t,s) u(f(x0), x0)]^{-1},
    symbolic in (t, s).  The contract (verified structurally by callers /
    tests): W = u(h, 0) with h = a * r * e^{t-s}, i.e. the only off-diagonal
    entry is (1,3) = a*r*e^{t-s}; the shift is exact for every r, the usual
    restriction |r| <= 3 merely keeps h small.
    """
    a, b, x0, r = (as_real(v) for v in (a, b, x0, r))
    if abs(r) > Rational(3):
        raise ValueError("shift parameter r must lie in [-3, 3]")
    shift = ExpPoly.exp(LinForm(-2, -4), r)  # r e^{-t-2s}
    x_new = ExpPoly.coerce(x0) + shift
    f_new = ExpPoly.coerce(a * x0 + b) + ExpPoly.exp(LinForm(-2, -4), a * r)
    A = mat_mul(a_mat(), u_mat(f_new, x_new))
    # [v(r) a(t,s) u(y, x)]^{-1} = u(-y, -x) a(-t,-s) v(-r)
    B_inv = _mat_inverse_from_factors(
        u_mat(-(a * x0 + b), -x0), a_mat(-T, -S), v_small(-r)
    )
    return mat_mul(A, B_inv)


def affine_factorization_residual(a, b, x) -> Matrix:
    """Residual of the horospherical factorisation of the orbit element.

    Returns W = xi(t/2) d(s + t/2) v(x) (I,(-a, b)) * [a(t,s) u(f(x), x)]^{-1},
    symbolic in (t, s).  The contract: W = (I, -a e^{t-s} e_1), i.e. the only
    off-diagonal entry is (1,2) = -a * e^{t-s}  (exponent key (2, -2) on the
    half-integer grid), which decays whenever t < s.
    """
    a, b, x = (as_real(v) for v in (a, b, x))
    H = mat_mul(
        mat_mul(xi_mat(T.half()), d_small(S + T.half())),
        mat_mul(v_small(x), aff_element(-a, b)),
    )
    G_inv = _mat_inverse_from_factors(u_mat(-(a * x + b), -x), a_mat(-T, -S))
    return mat_mul(H, G_inv)


def assert_single_off_diagonal(W: Matrix, pos: tuple[int, int], coeff, key: tuple[int, int]):
    """Check W is the identity plus exactly one off-diagonal single term.

    Raises AssertionError with a readable message otherwise; used by the
    acceptance tests with zero tolerance (structural equality).
    """
    coeff = as_real(coeff)
    for i in range(3):
        for j in range(3):
            entry = W[i][j]
            if i == j:
                if entry != ExpPoly.one:
                    raise AssertionError(f"diagonal entry ({i},{j}) is {entry!r}, not 1")
            elif (i, j) == pos:
                if coeff.sign() == 0:
                    if not entry.is_zero():
                        raise AssertionError(f"entry {pos} should vanish, got {entry!r}")
                else:
                    expect = ExpPoly({key: coeff})
                    if entry != expect:
                        raise AssertionError(f"entry {pos} is {entry!r}, expected {expect!r}")
            else:
                if not entry.is_zero():
                    raise AssertionError(f"unexpected nonzero entry at ({i},{j}): {entry!r}")
