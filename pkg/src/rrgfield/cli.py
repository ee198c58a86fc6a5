"""Command line front end: `rrg words|simulate|limit|cov|spectra|validate`.

All outputs are CSV (comma separator, LF line ends, UTF-8, mandatory header)
or the JSON validation summary; worker count comes from RRG_THREADS.
"""

from __future__ import annotations

import argparse
import json
import sys


from rrgfield import acceptance
from rrgfield import cycles as cyc
from rrgfield import dynamics as dyn
from rrgfield import limitfield as lf
from rrgfield import spectra as spec
from rrgfield import tower as twr
from rrgfield import words as wds
from rrgfield.harness import (
    STREAM_LIMIT,
    STREAM_SIMULATE,
    ExperimentConfig,
    replica_rng,
    write_csv,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default="-")
    p.add_argument("--config", type=str, default=None,
                   help="JSON config file with ExperimentConfig keys; explicit flags win")


def _cfg_from(args: argparse.Namespace, **overrides) -> ExperimentConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            cfg = ExperimentConfig.from_json(f.read())
    else:
        cfg = ExperimentConfig(experiment=overrides.get("experiment", "cli"))
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    cfg.seed = args.seed
    cfg.validate()
    return cfg


def _emit(path: str, header: list[str], rows: list) -> None:
    if path == "-":
        print(",".join(header))
        for row in rows:
            print(",".join(str(x) for x in row))
    else:
        write_csv(path, header, rows)


def cmd_words(args: argparse.Namespace) -> int:
    table = wds.WordClassTable.build(args.d, args.k)
    rows = []
    for k in range(1, args.k + 1):
        for w in table.classes[k]:
            rows.append([wds.render(w), w.length, w.h, w.b, w.c, w.orbit_size()])
    _emit(args.out, ["word", "length", "h", "b", "c", "orbit_size"], rows)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    nt, ns = (int(x) for x in args.grid.lower().split("x"))
    table = wds.WordClassTable.build(args.d, args.kmax)
    rows = []
    for r in range(args.replicas):
        rng = replica_rng(args.seed, STREAM_SIMULATE, r)
        grid = dyn.field_grid(args.d, args.T, args.T0, args.S0, (nt, ns), rng)
        for it, t in enumerate(grid.ts):
            for js, s in enumerate(grid.ss):
                g = cyc.build_graph(grid.cells[it][js])
                counts = cyc.count_cycles_by_class(g, table)
                for w, c in sorted(counts.items(), key=lambda kv: (kv[0].length, kv[0].codes)):
                    rows.append([r, f"{t:.6g}", f"{s:.6g}", w.length, wds.render(w), c])
    _emit(args.out, ["replica", "t", "s", "k", "word", "count"], rows)
    return 0


def cmd_limit(args: argparse.Namespace) -> int:
    nt, ns = (int(x) for x in args.grid.lower().split("x"))
    L = args.L if args.L is not None else args.K + 8
    tables = lf.chain_tables(args.d, L)
    kept = [i for i in range(len(tables.words)) if tables.lengths[i] <= args.K]
    rows = []
    for r in range(args.replicas):
        rng = replica_rng(args.seed, STREAM_LIMIT, r)
        smp = lf.sample_limit_field(args.d, L, args.K, args.T0, args.S0, (nt, ns), rng, tables)
        for it, t in enumerate(smp.ts):
            for js, s in enumerate(smp.ss):
                for i in kept:
                    rows.append([r, f"{t:.6g}", f"{s:.6g}", wds.render(tables.words[i]),
                                 int(smp.counts[it, js, i])])
    _emit(args.out, ["replica", "t", "s", "word", "count"], rows)
    return 0


def cmd_cov(args: argparse.Namespace) -> int:
    with open(args.points, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    header = [h.strip() for h in lines[0].split(",")]
    expect = ["u1", "v1", "u2", "v2"] if args.mode == "G" else ["t1", "s1", "t2", "s2"]
    if header != expect:
        raise SystemExit(f"points file header must be {','.join(expect)}")
    rows_in = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    out_rows = []
    j = args.j
    k = args.k if args.k is not None else j
    if args.mode == "finite":
        out_header = expect + ["cov_lo", "cov_hi"]
        for t1, s1, t2, s2 in rows_in:
            v = lf.cov_finite_d(args.d, j, k, t1, s1, t2, s2)
            lo, hi = (v.lo, v.hi) if isinstance(v, lf.CovInterval) else (v, v)
            out_rows.append([t1, s1, t2, s2, f"{lo:.12g}", f"{hi:.12g}"])
    elif args.mode == "U":
        out_header = expect + ["cov"]
        for t1, s1, t2, s2 in rows_in:
            out_rows.append([t1, s1, t2, s2, f"{lf.cov_U(j, t1, s1, t2, s2):.12g}"])
    else:
        out_header = expect + ["cov"]
        for u1, v1, u2, v2 in rows_in:
            out_rows.append([u1, v1, u2, v2, f"{lf.cov_G(j, u1, v1, u2, v2):.12g}"])
    _emit(args.out, out_header, out_rows)
    return 0


def cmd_spectra(args: argparse.Namespace) -> int:
    rng = replica_rng(args.seed, 5, 0)
    g = cyc.build_graph([twr.Permutation.uniform(args.n, rng) for _ in range(args.d)])
    rep = spec.spectral_report(g, args.kmax)
    kf = min(args.kmax, 4)
    table = wds.WordClassTable.build(args.d, kf)
    counts = cyc.count_cycles_by_class(g, table)
    cks = {k: sum(v for w, v in counts.items() if w.length == k) for k in range(1, kf + 1)}
    rows = []
    for i, k in enumerate(rep.ks):
        tf = cyc.is_tangle_free(g, k, k) if k <= kf else ""
        ck = cks.get(k, "")
        rows.append([k, f"{rep.trace_gammas[i]:.9g}", rep.cnbws[i],
                     f"{rep.residuals[i]:.3e}", f"{rep.f_traces[i]:.9g}", ck, tf])
    _emit(args.out, ["k", "trace_gamma", "cnbw", "residual", "f_trace",
                     "cycle_count", "tangle_free"], rows)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    summary = acceptance.validate(args.suite, verbose=True)
    if args.out != "-":
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(summary.to_json() + "\n")
    else:
        print(summary.to_json())
    return 0 if summary.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rrg", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("words", help="emit word classes with statistics")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_words)

    p = sub.add_parser("simulate", help="finite-graph field cycle counts on a grid")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--T0", type=float, required=True)
    p.add_argument("--S0", type=float, required=True)
    p.add_argument("--grid", type=str, required=True, help="NTxNS")
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("limit", help="limiting PPP field counts on a grid")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--T0", type=float, required=True)
    p.add_argument("--S0", type=float, required=True)
    p.add_argument("--grid", type=str, required=True, help="NTxNS")
    p.add_argument("--replicas", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_limit)

    p = sub.add_parser("cov", help="closed-form covariances for a points file")
    p.add_argument("--mode", choices=["finite", "U", "G"], required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--points", type=str, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_cov)

    p = sub.add_parser("spectra", help="trace statistics of one sampled graph")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_spectra)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--suite", choices=["exact", "statistical", "all"], default="all")
    _add_common(p)
    p.set_defaults(fn=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
