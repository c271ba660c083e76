"""Batch driver: every experiment as a subcommand with reproducible output.

Each run writes RFC-4180 CSV (header row, 30-significant-digit decimals) plus
a JSON manifest recording every parameter, the precision, versions and wall
time, into the --out directory.  Runs never overwrite: existing filenames get
a numeric suffix, so parallel sweeps into one directory cannot clobber each
other.  Replaying the argv recorded in a manifest reproduces the CSV bytes.

Exit codes: 0 success, 1 budget exhaustion, 2 invalid arguments.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import re
import sys
import time

import gmpy2
from gmpy2 import mpfr, mpq

from . import __version__
from ._context import precision_bits, set_precision_bits, workprec
from .bohr import (
    BohrParams,
    bohr_oracle,
    certify_containment,
    count_near_line,
    count_near_line_oracle,
    enumerate_bohr,
    gap_cover,
)
from .dioph import (
    PsiSpec,
    b_s_value,
    gallagher_scan,
    omega_dual_lower,
    omega_mult_lower,
    omega_simul_lower,
)
from .dynlab import (
    ObservableSpec,
    anti_quadrant_delta,
    build_B_star,
    bstar_membership_recheck,
    grid_R,
    loglaw_excursion,
    noncritical_pairs,
    orbit_average,
    pairwise_ratio,
)
from .errors import DEFAULT_CELL_BUDGET, BudgetError
from .exactnum import BigFloat, Rational, Real, Surd, as_real
from .lattice3 import Lattice3, delta_of, siegel_reduce, sup_shortest_vector

SUBCOMMANDS = (
    "scan",
    "bohr",
    "count",
    "bstar",
    "pairwise",
    "equidist",
    "loglaw",
    "exponents",
    "reduce",
)


# ---------------------------------------------------------------------------
# value parsing / formatting


_SURD_RE = re.compile(
    r"^(?P<p>[+-]?\d+(?:/\d+)?)?(?P<sign>[+-])?(?:(?P<q>\d+(?:/\d+)?)\*)?sqrt\(?(?P<d>\d+)\)?$"
)


def parse_real(token: str) -> Real:
    """Parse a scalar token: rational p/q, surd p+q*sqrt(d), sqrtN, phi, or
    a decimal string (which becomes a BigFloat at the working precision)."""
    tok = token.strip().replace(" ", "")
    if tok in ("phi", "golden"):
        return Surd(mpq(1, 2), mpq(1, 2), 5)
    m = re.fullmatch(r"sqrt(\d+)", tok)
    if m:
        return Surd(0, 1, int(m.group(1)))
    if re.fullmatch(r"[+-]?\d+(/\d+)?", tok):
        return Rational(mpq(tok))
    m = _SURD_RE.match(tok)
    if m and "sqrt" in tok:
        p = mpq(m.group("p")) if m.group("p") else mpq(0)
        q = mpq(m.group("q")) if m.group("q") else mpq(1)
        if m.group("sign") == "-":
            q = -q
        return Surd(p, q, int(m.group("d")))
    if re.fullmatch(r"[+-]?\d*\.\d+(e[+-]?\d+)?", tok, re.IGNORECASE):
        print(f"note: decimal token {token!r} taken as a big float at "
              f"{precision_bits()} bits", file=sys.stderr)
        with workprec():
            return BigFloat(mpfr(tok))
    raise ValueError(f"cannot parse scalar token {token!r}")


def parse_line(spec: str):
    parts = spec.split(",")
    if len(parts) != 2:
        raise ValueError("line spec must be two comma-separated tokens")
    return parse_real(parts[0]), parse_real(parts[1])


def fmt(value) -> str:
    """30-significant-digit decimal rendering (deterministic)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Real):
        with workprec():
            return format(value.to_mpfr(), ".30g")
    if isinstance(value, (float, mpfr)):
        with workprec():
            return format(mpfr(value), ".30g")
    if isinstance(value, mpq):
        with workprec():
            return format(mpfr(value), ".30g")
    return str(value)


# ---------------------------------------------------------------------------
# output plumbing


def _unique_path(out_dir: str, name: str) -> str:
    base, ext = os.path.splitext(name)
    path = os.path.join(out_dir, name)
    k = 1
    while os.path.exists(path):
        k += 1
        path = os.path.join(out_dir, f"{base}-{k}{ext}")
    return path


class RunWriter:
    def __init__(self, args, subcommand: str):
        self.out_dir = args.out
        os.makedirs(self.out_dir, exist_ok=True)
        self.subcommand = subcommand
        self.params = {k: v for k, v in vars(args).items() if k not in ("func",)}
        self.outputs: list[str] = []
        self.t0 = time.monotonic()

    def write_csv(self, name: str, header: list[str], rows) -> str:
        path = _unique_path(self.out_dir, name)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
        self.outputs.append(os.path.basename(path))
        return path

    def finish(self, extra: dict | None = None) -> str:
        manifest = {
            "subcommand": self.subcommand,
            "parameters": {k: str(v) for k, v in self.params.items()},
            "precision_bits": precision_bits(),
            "version": __version__,
            "outputs": self.outputs,
            "wall_time_s": round(time.monotonic() - self.t0, 3),
        }
        if extra:
            manifest.update(extra)
        path = _unique_path(self.out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_scan(args) -> int:
    a, b = parse_line(args.line)
    beta = parse_real(args.beta)
    alpha = a * beta + b
    res = gallagher_scan(alpha, beta, args.nmax)
    rows = [(n, v) for n, v in res.trace]
    writer = RunWriter(args, "scan")
    writer.write_csv("scan.csv", ["n", "value"], rows)
    if args.check:
        bits2 = precision_bits() * 2
        with workprec(bits2):
            alpha2 = as_real(a.to_mpfr(bits2) * beta.to_mpfr(bits2) + b.to_mpfr(bits2))
        res2 = gallagher_scan(alpha2, beta, args.nmax, bits=bits2)
        if [n for n, _ in res.trace] != [n for n, _ in res2.trace]:
            print("check failed: record positions moved at doubled precision", file=sys.stderr)
            return 1
        for (_, v1), (_, v2) in zip(res.trace, res2.trace):
            with workprec(bits2):
                if v1 != 0 and abs(float((v1 - v2) / v1)) > 1e-20:
                    print("check failed: record value drift at doubled precision", file=sys.stderr)
                    return 1
    writer.finish({"argmin": res.argmin, "min_value": fmt(res.min_value)})
    print(f"scan: {len(rows)} records, min {fmt(res.min_value)} at n={res.argmin}")
    return 0


def _parse_delta_rule(rule: str, Q: int) -> Real:
    if rule.startswith("qpow:"):
        expo = mpq(rule.split(":", 1)[1].replace("-0.5", "-1/2"))
        if expo == mpq(-1, 2):
            return Rational(mpq(1, gmpy2.isqrt(Q))) if gmpy2.is_square(gmpy2.mpz(Q)) else as_real(
                Q ** -0.5
            )
        return as_real(float(Q) ** float(expo))
    return parse_real(rule)


def cmd_bohr(args) -> int:
    a, b = parse_line(args.line)
    ladder = [int(q) for q in args.q_ladder.split(",")]
    rows = []
    ok_all = True
    for Q in ladder:
        delta = _parse_delta_rule(args.delta, Q)
        params = BohrParams(a, b, Q, delta)
        B = enumerate_bohr(params, budget=args.budget_cells)
        cover = gap_cover(params, C=args.cover)
        ok, violations = certify_containment(B, cover)
        ok_all = ok_all and ok
        prod = cover.minima_product()
        rows.append((Q, delta, B.count, cover.cardinality, prod, ok))
    writer = RunWriter(args, "bohr")
    writer.write_csv(
        "bohr.csv", ["Q", "delta", "count_B", "count_P", "l1l2l3", "contained"], rows
    )
    if args.check:
        Q0 = min(16, min(ladder))
        delta = _parse_delta_rule(args.delta, Q0)
        params = BohrParams(a, b, Q0, delta)
        fast = enumerate_bohr(params).member_tuples()
        slow = bohr_oracle(params)
        if fast != slow:
            print("check failed: enumeration disagrees with oracle", file=sys.stderr)
            return 1
    writer.finish({"all_contained": ok_all})
    print(f"bohr: ladder {ladder}, containment {'ok' if ok_all else 'FAILED'}")
    return 0


def cmd_count(args) -> int:
    a, b = parse_line(args.line)
    c, gamma = (parse_real(x) for x in args.psi.split(","))
    psi = PsiSpec.log_power(c, gamma)
    t_lo, t_hi = (int(x) for x in args.t_range.split(":"))
    m_lo, m_hi = (int(x) for x in args.m_range.split(":"))
    ival = tuple(parse_real(x) for x in args.interval.split(","))
    rows = []
    for t in range(t_lo, t_hi + 1):
        for m in range(m_lo, m_hi + 1):
            n = count_near_line(t, m, a, b, ival, psi)
            with workprec():
                bound = mpfr(2) ** abs(m) * mpfr(2) ** (2 * t) * gmpy2.sqrt(
                    psi.value_mpfr(2 ** t)
                )
                rows.append((t, m, n, mpfr(n) / bound))
    writer = RunWriter(args, "count")
    writer.write_csv("count.csv", ["t", "m", "N", "ratio_to_bound"], rows)
    if args.check:
        for t in range(t_lo, min(t_hi, 8) + 1):
            for m in (m_lo, m_hi):
                if count_near_line(t, m, a, b, ival, psi) != count_near_line_oracle(
                    t, m, a, b, ival, psi
                ):
                    print(f"check failed: oracle mismatch at t={t}, m={m}", file=sys.stderr)
                    return 1
    writer.finish()
    print(f"count: {len(rows)} cells")
    return 0


def _bstar_cell(cell):
    (t, s, line_spec, eps_spec, j_spec, T1, max_centers, bits) = cell
    set_precision_bits(bits)
    a, b = parse_line(line_spec)
    eps = parse_real(eps_spec)
    J = tuple(parse_real(x) for x in j_spec.split(","))
    rep = build_B_star(t, s, eps, J, (a, b), T1=T1, max_centers=max_centers)
    rc = bstar_membership_recheck(rep) if rep.n_case_i else {"fail_floor": 0}
    return (
        t,
        s,
        rep.kappa,
        rep.fraction,
        float(rep.measure_estimate()),
        rc["fail_floor"],
    )


def cmd_bstar(args) -> int:
    c1, c2, smax = args.grid.split(",")
    grid = grid_R(parse_real(c1), parse_real(c2), int(smax))
    cells = [
        (t, s, args.line, args.eps, args.J, args.T1, args.max_centers, precision_bits())
        for (t, s) in grid.members
    ]
    if args.threads > 1:
        import concurrent.futures as cf

        with cf.ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_bstar_cell, cells))
    else:
        results = [_bstar_cell(c) for c in cells]
    results.sort(key=lambda r: (r[1], r[0]))
    rows = [(t, s, k, f, m) for (t, s, k, f, m, _) in results]
    writer = RunWriter(args, "bstar")
    writer.write_csv("bstar.csv", ["t", "s", "kappa", "fraction", "measure"], rows)
    if args.check:
        fails = sum(r[5] for r in results)
        if fails:
            print(f"check failed: {fails} membership recheck failures", file=sys.stderr)
            return 1
    writer.finish()
    print(f"bstar: {len(rows)} grid points")
    return 0


def cmd_pairwise(args) -> int:
    a, b = parse_line(args.line)
    c1, c2, smax = args.grid.split(",")
    c1r, c2r = parse_real(c1), parse_real(c2)
    grid = grid_R(c1r, c2r, int(smax))
    eps = parse_real(args.eps)
    J = tuple(parse_real(x) for x in args.J.split(","))
    reports = {}
    for (t, s) in grid.members:
        rep = build_B_star(t, s, eps, J, (a, b), T1=args.T1, max_centers=args.max_centers)
        if rep.n_case_i:
            reports[(t, s)] = rep
    pairs = noncritical_pairs(sorted(reports), c1r, c2r)
    rows = []
    for (p1, p2) in pairs:
        r1, r2 = reports[p1], reports[p2]
        cond = build_B_star(
            p2[0], p2[1], eps, J, (a, b), T1=args.T1,
            max_centers=args.max_centers // 2, restrict_to=r1.intervals,
        )
        if cond.n_processed == 0:
            continue
        ratio = pairwise_ratio(r1, r2, J, r2_conditioned=cond)
        rows.append((p1[0], p1[1], p2[0], p2[1], float(ratio)))
    writer = RunWriter(args, "pairwise")
    writer.write_csv("pairwise.csv", ["t", "s", "t2", "s2", "ratio"], rows)
    writer.finish()
    print(f"pairwise: {len(rows)} non-critical pairs")
    return 0


def cmd_equidist(args) -> int:
    a, b = parse_line(args.line)
    J = tuple(parse_real(x) for x in args.J.split(","))
    thetas = [parse_real(x) for x in args.thetas.split(",")]
    rows = []
    for theta in thetas:
        obs = ObservableSpec(kind="excursion_indicator", theta=theta)
        avg = orbit_average(obs, args.t, args.s, J, (a, b), args.samples)
        rows.append((args.t, float(theta.to_mpfr(64)), avg, "excursion_indicator"))
    writer = RunWriter(args, "equidist")
    writer.write_csv("equidist.csv", ["t", "theta", "average", "observable"], rows)
    if args.check:
        one = orbit_average(ObservableSpec(kind="constant_one"), args.t, args.s, J, (a, b), 100)
        if float(one) != 1.0:
            print("check failed: constant observable does not average to 1", file=sys.stderr)
            return 1
    writer.finish()
    print(f"equidist: {len(rows)} thetas at (t,s)=({args.t},{args.s})")
    return 0


def cmd_loglaw(args) -> int:
    a, b = parse_line(args.line)
    x = parse_real(args.x)
    R = math.e ** float(args.logR)
    res = loglaw_excursion(x, (a, b), R, grid_step=parse_real(args.grid_step).to_mpfr(64),
                           nscan=args.nscan)
    rows = [(nt, ratio, exact) for nt, ratio, exact in res.trace]
    writer = RunWriter(args, "loglaw")
    writer.write_csv("loglaw.csv", ["norm_t", "ratio", "exact"], rows)
    if args.check:
        sups = [r for _, r, _ in res.trace]
        if any(x2 < x1 for x1, x2 in zip(sups, sups[1:])):
            print("check failed: running sup decreased", file=sys.stderr)
            return 1
        aq = anti_quadrant_delta(x, (a, b), range(1, 21))
        if any(d < t - 1e-9 for t, d in aq):
            print("check failed: anti-quadrant depth below t", file=sys.stderr)
            return 1
    writer.finish({"sup_ratio": res.sup_ratio, "arg_t": list(res.arg_t)})
    print(f"loglaw: sup ratio {res.sup_ratio:.4f} at t={res.arg_t}")
    return 0


def cmd_exponents(args) -> int:
    a, b = parse_line(args.line)
    dual = omega_dual_lower(a, b, args.hmax)
    simul = omega_simul_lower(a, b, args.nmax)
    mult = omega_mult_lower(a, b, args.nmax)
    rows = []
    for est in (dual, simul, mult):
        wit = est.best()
        rows.append(
            (
                est.kind,
                "inf" if est.infinite else est.lower_bound,
                str(wit.datum) if wit else "",
                "inf" if est.infinite else (wit.quality if wit else ""),
                est.search_bound,
            )
        )
    writer = RunWriter(args, "exponents")
    writer.write_csv(
        "exponents.csv", ["kind", "lower_bound", "witness", "quality", "search_bound"], rows
    )
    if args.check:
        bits2 = precision_bits() * 2
        for est in (dual, simul, mult):
            if est.infinite:
                continue
            for wit in est.witnesses:
                q2 = _recertify_witness(est.kind, wit, a, b, bits2)
                if abs(q2 - wit.quality) > 1e-6:
                    print("check failed: witness recertification drift", file=sys.stderr)
                    return 1
    writer.finish()
    print(f"exponents: dual>={rows[0][1]}, simul>={rows[1][1]}, mult>={rows[2][1]}")
    return 0


def _recertify_witness(kind: str, wit, a, b, bits) -> float:
    from .exactnum import frac_dist

    with workprec(bits):
        if kind == "dual":
            x, y = wit.datum
            dist = frac_dist(as_real(x) * a + as_real(y) * b)
            return float(-gmpy2.log(dist.to_mpfr(bits)) / gmpy2.log(mpfr(abs(x) + abs(y))))
        (n,) = wit.datum
        da = frac_dist(as_real(n) * a).to_mpfr(bits)
        db = frac_dist(as_real(n) * b).to_mpfr(bits)
        val = max(da, db) if kind == "simultaneous" else da * db
        return float(-gmpy2.log(val) / gmpy2.log(mpfr(n)))


def cmd_reduce(args) -> int:
    import random

    rng = random.Random(args.seed)
    rows_out = []
    max_diff = 0.0
    for k in range(args.trials):
        M = _random_unimodular(rng)
        with workprec():
            sd = siegel_reduce([[as_real(x) for x in row] for row in M])
            L = Lattice3.from_matrix_rows(M, check=False)
            dlt = float(delta_of(L))
            a1 = float(sd.a[0])
            diff = abs(dlt - math.log(1 / a1))
            max_diff = max(max_diff, diff)
            rows_out.append((k, a1, float(sd.a[1]), float(sd.a[2]), dlt, diff))
    writer = RunWriter(args, "reduce")
    writer.write_csv(
        "reduce.csv", ["trial", "a1", "a2", "a3", "delta", "abs_diff"], rows_out
    )
    if args.check and max_diff > 3.0:
        print("check failed: Delta vs log(1/a1) discrepancy above 3", file=sys.stderr)
        return 1
    writer.finish({"max_diff": max_diff})
    print(f"reduce: {args.trials} trials, max |Delta - log(1/a1)| = {max_diff:.3f}")
    return 0


def _random_unimodular(rng) -> list[list[int]]:
    M = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    for _ in range(8):
        i, j = rng.sample(range(3), 2)
        c = rng.randint(-3, 3)
        for k in range(3):
            M[i][k] += c * M[j][k]
    det = (
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    )
    if det == -1:
        for k in range(3):
            M[k][0] = -M[k][0]
    return M


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="latline", description=__doc__)
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--precision-bits", type=int, default=192)
        p.add_argument("--budget-cells", type=int, default=DEFAULT_CELL_BUDGET)
        p.add_argument("--out", default="runs")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--check", action="store_true")

    p = sub.add_parser("scan", help="Gallagher running minima along the line")
    p.add_argument("--line", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--nmax", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bohr", help="dual Bohr sets and progression covers")
    p.add_argument("--line", required=True)
    p.add_argument("--q-ladder", default="64,256,1024")
    p.add_argument("--delta", default="qpow:-0.5")
    p.add_argument("--cover", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_bohr)

    p = sub.add_parser("count", help="rational points near the line")
    p.add_argument("--line", required=True)
    p.add_argument("--psi", default="1,3", help="c,gamma for psi = c/(n (log n)^gamma)")
    p.add_argument("--t-range", default="6:10")
    p.add_argument("--m-range", default="-2:2")
    p.add_argument("--interval", default="0,1")
    common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bstar", help="pruned excursion construction ladder")
    p.add_argument("--line", required=True)
    p.add_argument("--grid", default="2/5,9/20,40", help="c1,c2,smax")
    p.add_argument("--eps", default="1/2")
    p.add_argument("--J", default="0,1")
    p.add_argument("--T1", type=int, default=25)
    p.add_argument("--max-centers", type=int, default=400)
    common(p)
    p.set_defaults(func=cmd_bstar)

    p = sub.add_parser("pairwise", help="quasi-independence statistics")
    p.add_argument("--line", required=True)
    p.add_argument("--grid", default="2/5,9/20,40")
    p.add_argument("--eps", default="1/2")
    p.add_argument("--J", default="0,1")
    p.add_argument("--T1", type=int, default=25)
    p.add_argument("--max-centers", type=int, default=400)
    common(p)
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("equidist", help="orbit averages of excursion indicators")
    p.add_argument("--line", required=True)
    p.add_argument("--t", type=int, default=10)
    p.add_argument("--s", type=int, default=25)
    p.add_argument("--J", default="0,1")
    p.add_argument("--thetas", default="1/20,3/40,1/10,3/20,1/5,3/10")
    p.add_argument("--samples", type=int, default=20_000)
    common(p)
    p.set_defaults(func=cmd_equidist)

    p = sub.add_parser("loglaw", help="logarithm-law excursion scan")
    p.add_argument("--line", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--logR", type=float, default=15.0)
    p.add_argument("--grid-step", default="1/64")
    p.add_argument("--nscan", type=int, default=1_000_000)
    common(p)
    p.set_defaults(func=cmd_loglaw)

    p = sub.add_parser("exponents", help="Diophantine exponent lower bounds")
    p.add_argument("--line", required=True)
    p.add_argument("--hmax", type=int, default=1000)
    p.add_argument("--nmax", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("reduce", help="Siegel reduction diagnostics")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_reduce)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        set_precision_bits(args.precision_bits)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
