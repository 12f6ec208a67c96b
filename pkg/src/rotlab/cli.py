"""Batch command-line front end.

Every operation is a subcommand writing machine-readable JSON (or CSV) to
--out; human diagnostics go to stderr only.  Exit codes: 0 success, 1 bad
input, 2 precision/depth refusal.  Identical configurations produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from .cf_real import ConvergentTable, parse_stream_spec
from .circle_sets import (build_block_union, build_disjoint_family,
                          family_containment_check, mass_measure_check,
                          orbit_separation_check, quasi_independence_check,
                          SurrogateGeometry)
from .constructions import find_witness_sequence, validate_counterexample
from .criterion import (DecayPow, DeltaRule, evaluate_criterion,
                        khintchine_equivalence_check, khintchine_series,
                        kurzweil_condition_eval, omega_tau_profile,
                        _tower_terms)
from .errors import (DepthExceededError, InputError, PrecisionError,
                     RotlabError)
from .intervals import DEFAULT_BITS
from .jsonfmt import dumps, interval_json, parse_frac
from .laurent import (LaurentCF, laurent_criterion, laurent_norm_checks,
                      parse_degree_spec, parse_field_spec,
                      parse_poly_stream_spec)
from .montecarlo import dichotomy_estimate, window_measure
from .psi import parse_phi_spec, parse_psi_spec


def _write(args, text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args, payload: dict, csv_rows=None) -> None:
    if getattr(args, "format", "json") == "csv":
        if csv_rows is None:
            raise InputError("this subcommand has no CSV form")
        _write(args, _csv_text(csv_rows))
    else:
        _write(args, dumps(payload))


# -- subcommand handlers -----------------------------------------------------


def _cmd_cf(args):
    stream = parse_stream_spec(args.theta)
    table = ConvergentTable(stream)
    rows = []
    for k in range(args.k + 1):
        st = table.state(k)
        rows.append({"k": k, "a": table.a(k), "p": str(st.p), "q": str(st.q),
                     "dist": None if st.dist is None
                     else interval_json(st.dist)})
    payload = {"stream": stream.describe(), "rows": rows}
    csv_rows = [["k", "a", "p", "q", "dist_lo", "dist_hi"]]
    for r in rows:
        csv_rows.append([r["k"], r["a"], r["p"], r["q"]]
                        + (r["dist"] or ["", ""]))
    _emit(args, payload, csv_rows)


def _cmd_criterion(args):
    stream = parse_stream_spec(args.theta)
    seq = parse_psi_spec(args.psi)
    rep = evaluate_criterion(stream, seq, args.kmax, bits=args.bits)
    _emit(args, rep.to_json(), rep.csv_rows())


def _cmd_khintchine(args):
    stream = parse_stream_spec(args.theta)
    phi = parse_phi_spec(args.phi)
    if args.sandwich:
        rep = khintchine_equivalence_check(stream, phi, count=args.kmax,
                                           bits=args.bits)
        _emit(args, rep.to_json())
    else:
        rep = khintchine_series(stream, phi, args.kmax, bits=args.bits)
        _emit(args, rep.to_json())


def _cmd_omega_tau(args):
    stream = parse_stream_spec(args.theta)
    rep = omega_tau_profile(stream, parse_frac(args.tau), args.kmax,
                            bits=args.bits)
    _emit(args, rep.to_json())


def _cmd_kurzweil(args):
    seq = parse_psi_spec(args.psi)
    c_text, beta_text = args.decay.split(",")
    phi = DecayPow(parse_frac(c_text), int(beta_text))
    m_text, off_text = args.delta.split(",")
    delta = DeltaRule(int(m_text), int(off_text))
    if args.t.startswith("tower:"):
        b, r, n = (int(x) for x in args.t[6:].split(","))
        t_seq = _tower_terms(b, r, n)
    elif args.t.startswith("list:"):
        t_seq = [int(x) for x in args.t[5:].split(",")]
    else:
        raise InputError(f"cannot parse t spec {args.t!r}")
    rep = kurzweil_condition_eval(seq, phi, delta, t_seq, args.imax,
                                  bits=args.bits)
    _emit(args, rep.to_json())


def _cmd_sets(args):
    stream = parse_stream_spec(args.theta)
    seq = parse_psi_spec(args.psi)
    table = ConvergentTable(stream)
    geom = SurrogateGeometry(table, min_depth=args.k + 4)
    block = build_block_union(table, seq, args.k, cap=args.cap, geom=geom)
    fam = build_disjoint_family(table, seq, args.k, cap=args.cap, geom=geom)
    checks = {
        "separation": orbit_separation_check(table, args.k, geom=geom),
        "containment": family_containment_check(fam, table, seq, geom=geom),
        "block_bound": block.bound_holds,
    }
    if args.k >= 1:
        prev = build_disjoint_family(table, seq, args.k - 1, cap=args.cap,
                                     geom=geom)
        overlap = quasi_independence_check(fam, prev)
        checks["overlap_final"] = overlap.final_holds
    mass = mass_measure_check(table, seq, args.k, cap=args.cap)
    payload = {"k": args.k, "block_union": block.to_json(),
               "family": fam.to_json(), "checks": checks,
               "mass_inequality": mass.to_json()}
    _emit(args, payload, fam.union.csv_rows())


def _cmd_simulate(args):
    stream = parse_stream_spec(args.theta)
    seq = parse_psi_spec(args.psi)
    est = dichotomy_estimate(stream, seq, args.samples, args.nlo, args.nhi,
                             args.seed, bits=args.fp_bits, jobs=args.jobs)
    payload = est.to_json()
    _emit(args, payload, est.csv_rows())


def _cmd_window_measure(args):
    stream = parse_stream_spec(args.theta)
    seq = parse_psi_spec(args.psi)
    mu = window_measure(stream, seq, args.nlo, args.nhi, cap=args.cap)
    payload = {"window": [str(args.nlo), str(args.nhi)],
               "measure": interval_json(mu)}
    _emit(args, payload)


def _cmd_tseng(args):
    stream = parse_stream_spec(args.theta)
    wit = find_witness_sequence(stream, parse_frac(args.tau), args.blocks,
                                max_depth=args.max_depth)
    payload = {"witness": wit.to_json()}
    if args.validate:
        val = validate_counterexample(wit, stream, bits=args.bits)
        payload["validation"] = val.to_json()
    _emit(args, payload)


def _cmd_laurent_cf(args):
    field = parse_field_spec(args.field)
    src = parse_poly_stream_spec(field, args.A)
    cf = LaurentCF(src)
    rows = []
    for k in range(args.k + 1):
        st = cf.state(k)
        rows.append({"k": k, "P": st.P.to_json(), "Q": st.Q.to_json(),
                     "n": cf.n(k)})
    norm = laurent_norm_checks(cf, depth=min(args.k, 20))
    _emit(args, {"field": field.describe(), "rows": rows,
                 "norm_checks": norm.to_json()})


def _cmd_laurent_criterion(args):
    field = parse_field_spec(args.field)
    src = parse_poly_stream_spec(field, args.A)
    cf = LaurentCF(src)
    rep = laurent_criterion(cf, parse_degree_spec(args.l), args.kmax)
    _emit(args, rep.to_json(), rep.csv_rows())


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="rotlab",
        description="exact rotation/shrinking-target computations")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="-", help="output path (- = stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--bits", type=int, default=DEFAULT_BITS,
                       help="working precision for enclosures")

    p = sub.add_parser("cf", help="convergent table")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_cf)

    p = sub.add_parser("criterion", help="block-series partial sums")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.set_defaults(func=_cmd_criterion)

    p = sub.add_parser("khintchine", help="log-form series / sandwich check")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--sandwich", action="store_true",
                   help="two-sided comparison past k0 instead of the series")
    p.set_defaults(func=_cmd_khintchine)

    p = sub.add_parser("omega-tau", help="lower-bound profile")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.set_defaults(func=_cmd_omega_tau)

    p = sub.add_parser("kurzweil-cond", help="witness series + side condition")
    common(p)
    p.add_argument("--psi", required=True)
    p.add_argument("--decay", required=True, metavar="c,beta",
                   help="phi(n) = c/n^beta")
    p.add_argument("--delta", default="1,0", metavar="m,c",
                   help="delta(n) = m*n + c")
    p.add_argument("--t", required=True,
                   help="tower:b,r,count or list:t1,t2,...")
    p.add_argument("--imax", type=int, default=None)
    p.set_defaults(func=_cmd_kurzweil)

    p = sub.add_parser("sets", help="block union + calibrated family checks")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cap", type=int, default=10 ** 5)
    p.set_defaults(func=_cmd_sets)

    p = sub.add_parser("simulate", help="sampled dichotomy estimate")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--nlo", type=int, required=True)
    p.add_argument("--nhi", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--fp-bits", type=int, default=128,
                   help="fixed-point resolution")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("window-measure", help="exact union measure")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--nlo", type=int, required=True)
    p.add_argument("--nhi", type=int, required=True)
    p.add_argument("--cap", type=int, default=10 ** 5)
    p.set_defaults(func=_cmd_window_measure)

    p = sub.add_parser("tseng", help="witness construction (+ validation)")
    common(p)
    p.add_argument("--theta", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--max-depth", type=int, default=2048)
    p.add_argument("--validate", action="store_true")
    p.set_defaults(func=_cmd_tseng)

    p = sub.add_parser("laurent-cf", help="polynomial convergents + norms")
    common(p)
    p.add_argument("--field", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_laurent_cf)

    p = sub.add_parser("laurent-criterion", help="exact power-of-q series")
    common(p)
    p.add_argument("--field", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--l", required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.set_defaults(func=_cmd_laurent_criterion)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (DepthExceededError, PrecisionError) as err:
        print(f"refused: {err}", file=sys.stderr)
        return 2
    except (InputError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except RotlabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
