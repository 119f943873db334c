"""Command line entry point: ``tvdual run|rate|diagnose|sweep``."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, harness, rates


def _parse_sweep(text):
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:steps, got {text!r}") from None
    if steps < 1:
        raise argparse.ArgumentTypeError("steps must be >= 1")
    return np.linspace(a, b, steps)


def _parse_seeds(text):
    try:
        lo, hi = (int(v) for v in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected k0..k1, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError("seed range is empty")
    return range(lo, hi + 1)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        harness._atomic_write(out, text)


def cmd_run(args):
    cfg = harness.ExperimentConfig.from_json(args.config)
    res = harness.run_experiment(cfg)
    out = Path(args.out)
    harness.write_trace_csv(out, harness.trace_table(res.trace, res.instance),
                            harness.run_metadata(res))
    harness.write_optimum(out.with_suffix(".opt.json"), res.instance)
    print(f"{cfg.algorithm}: final relative error {res.rel_error[-1]:.3e} -> {out}")


def cmd_rate(args):
    cols = ["c", "lambda"] + [f"gamma{i}" for i in range(1, 6)] + ["product", "feasible"]
    if args.c is not None:
        certs = [rates.certificate_for_step(args.c, args.mu, args.L, args.delta, args.B)]
    else:
        certs = rates.sweep(args.mu, args.L, args.delta, args.B, args.sweep)
        if not certs:
            raise ValueError("no step size in the sweep lies inside the certified interval")
    rows = [c.row() for c in certs]
    table = {k: [r[k] for r in rows] for k in cols}
    table["feasible"] = [int(v) for v in table["feasible"]]
    _emit(harness.table_to_csv(table, cols), args.out)


def cmd_diagnose(args):
    table = harness.read_trace_csv(args.trace)
    seqs = harness.sequences_from_table(table)
    opt, mu, L = harness.read_optimum(args.opt)
    side = harness.sidecar_path(args.trace)
    meta = json.loads(side.read_text()) if side.exists() else {}
    c = args.c if args.c is not None else meta.get("step")
    B = args.B if args.B is not None else meta.get("contraction", {}).get("B", 1)
    delta = args.delta if args.delta is not None else meta.get("contraction", {}).get("delta")
    if c is None or delta is None:
        raise ValueError("step size and delta are needed: pass --c/--delta or keep the sidecar")
    arrows = diagnostics.arrow_slacks(seqs, args.lam, mu=mu, L=L, c=c, delta=delta, B=B,
                                      startup_correction=args.startup_correction)
    rows = [a.row() for a in arrows]
    cols = ["arrow", "gamma", "omega", "lhs", "rhs", "slack"]
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join([r["arrow"]] + [repr(float(r[k])) for k in cols[1:]]))
    _emit("\n".join(lines) + "\n", args.out)


def cmd_sweep(args):
    cfg = harness.ExperimentConfig.from_json(args.config)
    rows = harness.sweep(cfg, args.seeds, jobs=args.jobs)
    cols = list(rows[0])
    text = harness.table_to_csv({k: [r[k] for r in rows] for k in cols if k != "algorithm"},
                                [k for k in cols if k != "algorithm"])
    _emit(text, args.out)
    med = harness.sweep_medians(rows)
    print(" ".join(f"median_{k}={v:.6g}" for k, v in med.items()), file=sys.stderr)


def build_parser():
    p = argparse.ArgumentParser(prog="tvdual", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment and write its trace CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    q = sub.add_parser("rate", help="certified rate and gains for a step size or a sweep")
    q.add_argument("--mu", type=float, required=True)
    q.add_argument("--L", type=float, required=True)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--B", type=int, default=1)
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--c", type=float)
    g.add_argument("--sweep", type=_parse_sweep, metavar="a:b:steps")
    q.add_argument("--out")
    q.set_defaults(func=cmd_rate)

    d = sub.add_parser("diagnose", help="arrow report for a PANDA trace")
    d.add_argument("--trace", required=True)
    d.add_argument("--opt", required=True)
    d.add_argument("--lambda", dest="lam", type=float, required=True)
    d.add_argument("--c", type=float)
    d.add_argument("--delta", type=float)
    d.add_argument("--B", type=int)
    d.add_argument("--startup-correction", action="store_true")
    d.add_argument("--out")
    d.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("sweep", help="repeat an experiment over a seed range")
    s.add_argument("--config", required=True)
    s.add_argument("--seeds", type=_parse_seeds, required=True, metavar="k0..k1")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, KeyError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"tvdual {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
