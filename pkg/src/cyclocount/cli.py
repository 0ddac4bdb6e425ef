"""Command-line front end: runs censuses, identity checks, class-group and
height computations, and the sieve, writing CSV/JSON artifacts.

Every report embeds the exact resolved job configuration, so a report file
identifies the run that produced it.  Exit codes: 0 success, 1 validation
failure, 2 internal invariant violation (e.g. a failed exact identity).

A JSON config file (--config) supplies defaults; explicit flags win.  The
checkpoint/cache directory defaults to $CYCLOCOUNT_CACHE_DIR or ".".
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from fractions import Fraction

import numpy as np

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INVARIANT = 2


def _cache_dir() -> str:
    return os.environ.get("CYCLOCOUNT_CACHE_DIR", ".")


def _parse_lambda(n, spec):
    from .family import LambdaSpec

    if spec in (None, "all"):
        return LambdaSpec.unrestricted(n)
    if spec == "real":
        return LambdaSpec.totally_real(n)
    if spec == "imaginary":
        return LambdaSpec.imaginary_only(n)
    data = json.loads(spec)
    wild = {int(p): [tuple(t) for t in v] for p, v in data.get("wild", {}).items()}
    arch = data.get("arch")
    return LambdaSpec(n, wild, arch)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=str)
        fh.write("\n")


def _job_config(args, command):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config") and v is not None}
    cfg["command"] = command
    return cfg


# ---------------------------------------------------------------------------
# enumerate (with conductor-interval checkpointing and a worker pool)
# ---------------------------------------------------------------------------


def _enumerate_interval(task):
    n, lam_spec, X, P, lo, hi = task
    from .family import enumerate_family

    lam = _parse_lambda(n, lam_spec)
    fields = enumerate_family(n, lam, X, P, range_limit=max(X, 10**7))
    rows = []
    for d in fields:
        if lo <= d.conductor < hi:
            r = d.to_row()
            rows.append([r["n"], r["f"], r["delta"], r["exponent_vector"], r["ram_primes"], r["arch_type"]])
    return rows


def cmd_enumerate(args):
    X = args.X
    P = tuple(int(p) for p in (args.split or []))
    ck_path = args.checkpoint or os.path.join(_cache_dir(), f"enumerate_n{args.n}_X{X}.ckpt.json")
    state = {"done": [], "rows": []}
    if args.resume and os.path.exists(ck_path):
        with open(ck_path) as fh:
            state = json.load(fh)
    fmax = int(round(X ** (1.0 / (args.n - 1)))) * 4 + 16  # conductor upper bound
    nchunks = max(args.workers * 4, 8)
    edges = [1 + (fmax * i) // nchunks for i in range(nchunks + 1)]
    intervals = [(lo, hi) for lo, hi in zip(edges, edges[1:]) if lo < hi]
    todo = [iv for iv in intervals if list(iv) not in state["done"]]
    tasks = [(args.n, args.lam, X, P, lo, hi) for lo, hi in todo]
    if args.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            results = list(ex.map(_enumerate_interval, tasks))
    else:
        results = [_enumerate_interval(t) for t in tasks]
    for iv, rows in zip(todo, results):
        state["rows"].extend(rows)
        state["done"].append(list(iv))
        with open(ck_path, "w") as fh:
            json.dump(state, fh)
    rows = sorted(state["rows"], key=lambda r: (r[2], r[1], r[3]))
    out = args.output or os.path.join(_cache_dir(), f"fields_n{args.n}_X{X}.csv")
    _write_csv(out, ["n", "f", "delta", "exponent_vector", "ram_primes", "arch_type"], rows)
    if args.jsonl:
        with open(args.jsonl, "w") as fh:
            for r in rows:
                fh.write(json.dumps(dict(zip(["n", "f", "delta", "exponent_vector", "ram_primes", "arch_type"], r))) + "\n")
    print(f"{len(rows)} fields -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def cmd_census(args):
    from .census import count_census, delta_product, leading_constant

    lam = _parse_lambda(args.n, args.lam)
    grid = args.grid or [args.X]
    P = tuple(int(p) for p in (args.split or []))
    res = count_census(args.n, lam, P, grid, range_limit=max(max(grid), 10**7))
    report = {
        "config": _job_config(args, "census"),
        "lambda": lam.digest(),
        "grid": list(res.grid),
        "counts": list(res.counts),
        "fitted_coefficient": res.fitted_coefficient,
    }
    if args.constant:
        lc = leading_constant(args.n, lam, tame_cutoff=max(10**5, min(max(grid), 10**6)))
        dp = float(delta_product(P, args.n))
        report["leading_constant"] = lc["value"]
        report["predicted_top"] = dp * lc["value"] * max(grid) ** (1.0 / (args.n - 1))
    out = args.output or os.path.join(_cache_dir(), f"census_n{args.n}.json")
    _write_json(out, report)
    print(f"N(X={res.grid[-1]}) = {res.counts[-1]}  -> {out}")
    if args.list_fields and args.n == 2:
        from .family import enumerate_family

        for d in enumerate_family(2, lam, max(grid), P, range_limit=10**7):
            sign = "-" if d.arch == "complex" else "+"
            print(f"  D = {sign}{d.discriminant}  f = {d.conductor}")
    return EXIT_OK


def cmd_zeta_check(args):
    from .zeta import coeffs_bruteforce, coeffs_eulerside

    lam = _parse_lambda(args.n, args.lam)
    P = tuple(int(p) for p in (args.split or []))
    bf = coeffs_bruteforce(args.n, lam, P, args.M)
    eu = coeffs_eulerside(args.n, lam, P, args.M)
    agree = int(np.sum(bf.coeffs == eu.coeffs)) - 0
    mism = np.nonzero(bf.coeffs != eu.coeffs)[0]
    report = {
        "config": _job_config(args, "zeta-check"),
        "M": args.M,
        "agree": int((bf.coeffs == eu.coeffs).sum()),
        "mismatches": [
            {"m": int(m), "brute": int(bf.coeffs[m]), "euler": int(eu.coeffs[m])}
            for m in mism[:50]
        ],
    }
    out = args.output or os.path.join(_cache_dir(), f"zeta_check_n{args.n}_M{args.M}.json")
    _write_json(out, report)
    if args.dump:
        rows = [(m, int(bf.coeffs[m]), "brute-force") for m in np.nonzero(bf.coeffs)[0]]
        rows += [(m, int(eu.coeffs[m]), "euler-side") for m in np.nonzero(eu.coeffs)[0]]
        _write_csv(args.dump, ["m", "a_m", "side"], rows)
    print(f"coefficients match: {args.M - len(mism)}/{args.M}")
    return EXIT_OK if len(mism) == 0 else EXIT_INVARIANT


def cmd_classgroup(args):
    from .classgroup import class_group, torsion_count

    ells = [int(x) for x in (args.ell or [2, 3])]
    rows = []
    for D in args.D:
        g = class_group(int(D), bound=args.bound)
        rows.append(
            [g.D, g.h, " ".join(map(str, g.divisors))]
            + [torsion_count(g.D, ell, g) for ell in ells]
        )
        print(f"D={g.D}: h={g.h}, divisors={list(g.divisors)}")
    out = args.output or os.path.join(_cache_dir(), "classgroups.csv")
    _write_csv(out, ["D", "h", "divisors"] + [f"cl{e}" for e in ells], rows)
    return EXIT_OK


def cmd_torsion_scan(args):
    from .census import torsion_scan

    rows = torsion_scan(args.ell, args.X, args.theta)
    out = args.output or os.path.join(_cache_dir(), f"torsion_scan_l{args.ell}.csv")
    _write_csv(
        out,
        ["lo", "hi", "fields", "exceptional", "proportion", "max_torsion"],
        [[r.lo, r.hi, r.fields, r.exceptional, f"{r.proportion:.6f}", r.max_torsion] for r in rows],
    )
    _write_json(
        out.replace(".csv", ".json"),
        {"config": _job_config(args, "torsion-scan"), "rows": [asdict(r) for r in rows]},
    )
    for r in rows:
        print(f"[{r.lo}, {r.hi}): {r.exceptional}/{r.fields} exceptional ({r.proportion:.4f})")
    return EXIT_OK


def cmd_sieve(args):
    from .sieve import SieveConfig, sieve_stats

    lam = _parse_lambda(args.n, args.lam)
    cfg = SieveConfig(args.n, args.X, args.z, lam)
    rep = sieve_stats(cfg)
    from .census import delta_local

    rows = []
    for p in rep.primes:
        dp = delta_local(p, args.n)
        rows.append([p, rep.counts[p], str(Fraction(rep.counts[p]) - dp * rep.N)])
    out = args.output or os.path.join(_cache_dir(), f"sieve_n{args.n}_X{args.X}_z{args.z}")
    _write_csv(out + ".csv", ["p", "A_p", "R_p"], rows)
    _write_json(
        out + ".json",
        {
            "config": _job_config(args, "sieve"),
            "N": rep.N,
            "U": str(rep.U),
            "mean": str(rep.mean),
            "S1": str(rep.S1),
            "S2": str(rep.S2),
            "exceptional_half_mean": rep.exceptional_half_mean,
            "rhs": str(rep.rhs),
            "inequality_holds": rep.inequality_holds,
        },
    )
    print(
        f"N={rep.N}  M(z)={float(rep.mean):.4f}  E(half-mean)={rep.exceptional_half_mean}"
        f"  bound={float(rep.rhs):.1f}  holds={rep.inequality_holds}"
    )
    return EXIT_OK if rep.inequality_holds else EXIT_INVARIANT


def cmd_heights(args):
    from .heights import count_small_generators, eta_upper_quadratic, mahler_measure

    if args.poly:
        coeffs = [int(c) for c in args.poly]
        val, err = mahler_measure(coeffs)
        print(f"M = {val!r} (error bound {err:.2e})")
        return EXIT_OK
    if args.eta_D is not None:
        est = eta_upper_quadratic(args.eta_D)
        print(f"eta_upper({est.D}) = {est.eta_upper} witness {est.witness} ratio {est.silverman_ratio:.4f}")
        return EXIT_OK
    rows = []
    X = 1
    while X <= args.X:
        rows.append([args.n, X, count_small_generators(args.n, X)])
        X *= 2
    out = args.output or os.path.join(_cache_dir(), f"heights_n{args.n}.csv")
    _write_csv(out, ["n", "X", "N_H"], rows)
    for r in rows:
        print(f"N_H({r[0]}, {r[1]}) = {r[2]}")
    return EXIT_OK


def cmd_constants(args):
    from .census import paper_constants

    pc = paper_constants(args.m, args.n)
    print(f"a = {pc.a}")
    print(f"b = {pc.b}")
    print(f"beta = {pc.beta}")
    print(f"delta_tilde = {pc.delta_tilde}")
    print(f"delta_prime = {pc.delta_prime}")
    print(f"(rho, tau, sigma) = ({pc.rho}, {pc.tau}, {pc.sigma})")
    if args.output:
        _write_json(
            args.output,
            {
                "config": _job_config(args, "constants"),
                **{k: str(v) for k, v in asdict(pc).items()},
            },
        )
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="cyclocount", description=__doc__)
    p.add_argument("--config", help="JSON file of default argument values")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_default=2):
        sp.add_argument("-n", type=int, default=n_default, help="degree of the cyclic fields")
        sp.add_argument("--lam", help="'all', 'real', 'imaginary', or a JSON local-condition spec")
        sp.add_argument("--output", "-o", help="output artifact path")

    sp = sub.add_parser("enumerate", help="list the fields with discriminant <= X")
    common(sp)
    sp.add_argument("-X", type=int, required=True)
    sp.add_argument("--split", nargs="*", help="primes required to split completely")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--checkpoint", help="checkpoint file (resumable)")
    sp.add_argument("--resume", action="store_true")
    sp.add_argument("--jsonl", help="also write line-delimited JSON here")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("census", help="count fields at one or more cutoffs")
    common(sp)
    sp.add_argument("-X", type=int)
    sp.add_argument("--grid", type=int, nargs="*")
    sp.add_argument("--split", nargs="*")
    sp.add_argument("--constant", action="store_true", help="also compute the leading constant")
    sp.add_argument("--list-fields", action="store_true")
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("zeta-check", help="brute-force vs Euler-side Dirichlet coefficients")
    common(sp)
    sp.add_argument("-M", type=int, default=1000)
    sp.add_argument("--split", nargs="*")
    sp.add_argument("--dump", help="CSV dump of (m, a_m, side)")
    sp.set_defaults(func=cmd_zeta_check)

    sp = sub.add_parser("classgroup", help="class groups of quadratic fields")
    sp.add_argument("D", type=int, nargs="+")
    sp.add_argument("--ell", nargs="*")
    sp.add_argument("--bound", type=int, default=10**8)
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_classgroup)

    sp = sub.add_parser("torsion-scan", help="dyadic scan of #Cl[ell] vs |D|^theta")
    sp.add_argument("--ell", type=int, default=3)
    sp.add_argument("-X", type=int, default=10**5)
    sp.add_argument("--theta", type=float, default=0.5 - 1 / 6)
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_torsion_scan)

    sp = sub.add_parser("sieve", help="split-prime sieve statistics and the 2nd-moment bound")
    common(sp)
    sp.add_argument("-X", type=int, required=True)
    sp.add_argument("-z", type=int, required=True)
    sp.set_defaults(func=cmd_sieve)

    sp = sub.add_parser("heights", help="Mahler measures, N_H counts, eta upper bounds")
    common(sp)
    sp.add_argument("-X", type=int, default=64)
    sp.add_argument("--poly", nargs="*", help="integer coefficients, constant term first")
    sp.add_argument("--eta-D", type=int, help="fundamental discriminant for eta search")
    sp.set_defaults(func=cmd_heights)

    sp = sub.add_parser("constants", help="exact exponent constants at (m, n)")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_constants)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            defaults = json.load(fh)
        for k, v in defaults.items():
            if getattr(args, k, None) is None:
                setattr(args, k, v)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except AssertionError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
