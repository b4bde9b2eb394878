"""Command-line entry point.

Exit codes: 0 success, 1 property or bound violation, 2 usage/config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .adversary import (
    DeviceModel,
    EntangledSteering,
    NaiveRedeclare,
    helstrom_attack,
    n_a_max,
    naive_attack,
    snapped_attack,
    steering_attack,
)
from .analysis import SweepConfig, plan, sweep
from .errors import QbcError
from .identities import DEFAULT_LADDER, DEFAULT_TOL, identity_suite, ladder_up_to
from .protocol import HonestAlice, ProtocolParams, run_sessions
from .rng import DEFAULT_SEED
from .stats import wilson_half_width

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common(p: argparse.ArgumentParser, trials: int = 10_000):
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--trials", type=int, default=trials)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check every closed-form identity numerically")
    v.add_argument("--n-max", type=int, default=max(DEFAULT_LADDER))
    v.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _common(v)

    r = sub.add_parser("run", help="run honest protocol sessions")
    r.add_argument("--s", type=int, default=8)
    r.add_argument("--n-sim", type=int, default=256)
    r.add_argument("--b", type=int, choices=(0, 1), default=0)
    r.add_argument("--workers", type=int, default=1)
    _common(r, trials=1_000)

    a = sub.add_parser("attack", help="run a cheating strategy")
    a.add_argument("--strategy", choices=("naive", "steering", "snapped", "helstrom"), default="steering")
    a.add_argument("--n-a", type=int, default=8)
    a.add_argument("--s", type=int, default=8)
    a.add_argument("--n-sim", type=int, default=256)
    a.add_argument("--target-b", type=int, choices=(0, 1), default=1)
    a.add_argument("--delta", type=float, default=None)
    a.add_argument("--index-rule", choices=("same", "different", "random"), default="different")
    a.add_argument("--engine", choices=("tabulated", "session"), default="tabulated")
    _common(a)

    pl = sub.add_parser("plan", help="choose s for a target cheating probability")
    pl.add_argument("--p-max", type=float, required=True)
    grp = pl.add_mutually_exclusive_group(required=True)
    grp.add_argument("--n-a-max", type=int)
    grp.add_argument("--delta", type=float)
    _common(pl)

    sw = sub.add_parser("sweep", help="attack grid over (n_A, s)")
    sw.add_argument("--n-a", type=_int_list, default=(4, 8, 16))
    sw.add_argument("--s", type=_int_list, default=(1, 2, 4, 8))
    sw.add_argument("--strategy", choices=("steering", "naive", "helstrom"), default="steering")
    sw.add_argument("--target-b", type=int, choices=(0, 1), default=1)
    sw.add_argument("--n-sim", type=int, default=256)
    sw.add_argument("--budget", type=int, default=None)
    _common(sw)
    sw.set_defaults(format="csv")
    return parser


def _emit(text: str, out: Optional[Path]):
    sys.stdout.write(text)
    if out is not None:
        try:
            out.write_text(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {out}: {exc}") from None


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()})
    return buf.getvalue()


def _render(rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        return _rows_to_csv(rows)
    payload = rows[0] if len(rows) == 1 else rows
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_verify(args) -> int:
    if args.tol <= 0:
        raise ConfigError("--tol must be positive")
    ladder = ladder_up_to(args.n_max)
    if not ladder:
        raise ConfigError(f"--n-max {args.n_max} leaves an empty ladder (minimum 3)")
    results = identity_suite(ladder, args.tol)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  {res.name:<18} max_err={res.max_error:.3e}  tol={res.tol:.0e}  {res.description}")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} identity groups passed on n in {list(ladder)}")
    if args.out is not None:
        rows = [{"name": r.name, "max_error": r.max_error, "tol": r.tol, "passed": r.passed} for r in results]
        try:
            args.out.write_text(_render(rows, args.format) if args.format == "csv" else json.dumps(rows, indent=2) + "\n")
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from None
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_run(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    try:
        params = ProtocolParams(s=args.s, n_sim=args.n_sim, master_seed=args.seed)
    except QbcError as exc:
        raise ConfigError(str(exc)) from None
    ts = run_sessions(params, args.trials, lambda: HonestAlice(args.b), workers=args.workers)
    accepted = sum(t.verdict.accept for t in ts)
    print(f"accepted {accepted}/{len(ts)} honest sessions (s={args.s}, n_sim={args.n_sim}, seed={args.seed})")
    if args.out is not None:
        rows = [
            {"session": t.seeds[1], "b": t.committed[0], "accept": t.verdict.accept,
             "first_failure": t.verdict.first_failure, "indices": list(t.committed[1])}
            for t in ts
        ]
        try:
            args.out.write_text(_render(rows, args.format) if args.format == "csv" else json.dumps(rows) + "\n")
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK if accepted == len(ts) else EXIT_VIOLATION


def cmd_attack(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    if args.strategy == "helstrom":
        rep = helstrom_attack(args.n_sim, args.trials, args.seed, engine=args.engine)
        ok = abs(rep.acceptance_rate - rep.bound) <= wilson_half_width(rep.acceptances, rep.trials)
    else:
        params = ProtocolParams(s=args.s, n_sim=args.n_sim, master_seed=args.seed)
        if args.strategy == "naive":
            strat = NaiveRedeclare(commit_b=1 - args.target_b, announce_b=args.target_b,
                                   index_rule=args.index_rule)
            rep = naive_attack(params, strat, args.trials, engine=args.engine)
        else:
            device = DeviceModel(args.delta) if args.delta is not None else None
            strat = EntangledSteering(n_a=args.n_a, target_b=args.target_b, device=device)
            run = snapped_attack if args.strategy == "snapped" else steering_attack
            rep = run(params, strat, args.trials, engine=args.engine)
        ok = rep.within_bound
    _emit(_render([rep.as_dict()], args.format), args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_plan(args) -> int:
    if args.delta is not None:
        print(f"n_a_max={n_a_max(DeviceModel(args.delta))} (delta={args.delta})")
    result = plan(args.p_max, n_a_max=args.n_a_max, delta=args.delta)
    print(f"s={result.s_required} (p_max={args.p_max}, n_a_max={result.n_a_max}, "
          f"bound at s: {result.as_dict()['bound_at_s']:.6g})")
    if args.out is not None:
        try:
            args.out.write_text(_render([result.as_dict()], args.format))
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = SweepConfig(
        n_a_values=args.n_a, s_values=args.s, trials=args.trials, seed=args.seed,
        strategy=args.strategy, target_b=args.target_b, n_sim=args.n_sim, budget=args.budget,
    )
    if args.out is not None:
        # fail before spending the compute
        try:
            args.out.open("a").close()
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from None
    table = sweep(config)
    text = table.to_csv() if args.format == "csv" else table.to_json()
    _emit(text, args.out)
    for err in table.errors:
        print(f"cell n_a={err['n_a']} s={err['s']}: {err['error']}", file=sys.stderr)
    bounded = args.strategy != "helstrom"
    return EXIT_VIOLATION if bounded and not table.all_within_bounds() else EXIT_OK


COMMANDS = {"verify": cmd_verify, "run": cmd_run, "attack": cmd_attack, "plan": cmd_plan, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, QbcError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
