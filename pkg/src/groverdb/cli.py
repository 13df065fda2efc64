"""Command-line interface: ``groverdb build | search | sweep``."""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import discrim, qdb

SWEEP_HEADER = ["m", "p_grover", "gamma0_bound", "p_minerr", "cos_term", "sin_term"]


class CliError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.15g}"


def _parse_fields(text: str) -> list:
    specs = []
    for item in text.split(","):
        name, sep, dim = item.strip().partition(":")
        if not sep or not name:
            raise CliError(f"bad field spec {item!r}, expected name:dim")
        try:
            specs.append((name, int(dim)))
        except ValueError:
            raise CliError(f"bad dimension in field spec {item!r}") from None
    return specs


def _parse_known(text: str) -> dict:
    known = {}
    if not text:
        return known
    for item in text.split(","):
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise CliError(f"bad known assignment {item!r}, expected field=value")
        known[name.strip()] = value.strip()
    return known


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def cmd_build(args) -> int:
    specs = _parse_fields(args.fields)
    try:
        db = qdb.read_delimited(specs, args.input)
    except qdb.DatabaseError as exc:
        raise CliError(str(exc)) from None
    qdb.save(db, args.out)
    print(f"records: {len(db.records)}")
    return 0


def cmd_search(args) -> int:
    try:
        db = qdb.load(args.db)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load database: {exc}") from None
    unknown = [u.strip() for u in args.unknown.split(",")] if args.unknown else None
    try:
        task = db.task(_parse_known(args.known), unknown)
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc.args[0] if exc.args else exc)) from None

    steps = qdb.AUTO if args.steps == "auto" else int(args.steps)
    plan = qdb.plan(db, task, steps)
    names = [f.name for f in db.fields]

    out, close = _open_out(args.out)
    try:
        omega = fmt(plan.params.omega) if plan.params else "nan"
        m0 = fmt(plan.params.m0) if plan.params else "nan"
        out.write(f"# N={plan.N} K={plan.K} omega={omega} m0={m0} steps={plan.steps}\n")
        writer = csv.writer(out, lineterminator="\n")
        if not args.summary_only:
            writer.writerow(["trial", *names, "verified", "steps_used", "oracle_calls"])
        hits = 0
        for trial in range(args.trials):
            rng = np.random.default_rng(args.seed ^ trial)
            outcome = qdb.search(db, task, plan.steps, rng)
            hits += outcome.verified
            if not args.summary_only:
                values = db.describe(outcome.candidate)
                writer.writerow([
                    trial, *(values[n] for n in names),
                    int(outcome.verified), outcome.steps_used, outcome.oracle_calls,
                ])
        freq = hits / args.trials if args.trials else float("nan")
        out.write(f"# trials={args.trials} verified={hits} frequency={fmt(freq)}\n")
    finally:
        if close:
            out.close()
    return 0


def sweep_grid(m_max: float, samples_per_step: int) -> list:
    count = int(np.floor(m_max * samples_per_step + 1e-9))
    return [i / samples_per_step for i in range(count + 1)]


def render_sweep(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow([fmt(v) for v in (r.m, r.p_grover, r.gamma0, r.p_minerr, r.cos_term, r.sin_term)])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    if args.n < 2:
        raise CliError(f"--n must be at least 2, got {args.n}")
    if args.samples_per_step < 1:
        raise CliError("--samples-per-step must be positive")
    if args.m_max < 0:
        raise CliError("--m-max must be nonnegative")
    rows = discrim.sweep(args.n, sweep_grid(args.m_max, args.samples_per_step))
    out, close = _open_out(args.out)
    try:
        out.write(render_sweep(rows))
    finally:
        if close:
            out.close()
    return 0


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _steps(text: str) -> str:
    if text != "auto":
        try:
            if int(text) < 0:
                raise ValueError
        except ValueError:
            raise argparse.ArgumentTypeError("steps must be 'auto' or a nonnegative integer") from None
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groverdb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a database document from comma-separated text")
    p.add_argument("--fields", required=True, help="field specs, e.g. number:8,name:8")
    p.add_argument("--input", required=True, help="comma-separated file with a header naming the fields")
    p.add_argument("--out", required=True, help="database document to write")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("search", help="run programmable Grover searches")
    p.add_argument("--db", required=True)
    p.add_argument("--known", default="", help="fixed fields, e.g. number=555")
    p.add_argument("--unknown", default=None, help="fields to search (default: all not known)")
    p.add_argument("--steps", type=_steps, default="auto")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--summary-only", action="store_true", help="omit per-trial rows")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep", help="success probabilities versus step count")
    p.add_argument("--n", type=int, required=True, help="database size N")
    p.add_argument("--m-max", type=float, required=True)
    p.add_argument("--samples-per-step", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"groverdb {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
