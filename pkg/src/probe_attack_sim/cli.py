"""Command-line entry point ``probe-attack-sim``.

Usage:
    probe-attack-sim table1                         # full miss-probability table
    probe-attack-sim table1 --rows 21:2,2021:4
    probe-attack-sim spectrum --N 21 --y 2 --format json
    probe-attack-sim simon --n 6 --s 101101 --attacked
    probe-attack-sim attack-shor --N 21 --y 2 --trials 10000
    probe-attack-sim detect --r-known 8 --L 9 --trials 5 --attacked
    probe-attack-sim stats --P 0.2074

Every command writes one CSV table or one JSON document. CSV rows carry a
``kind`` column where a command emits both per-item and summary records.
Exit codes: 0 success, 1 invalid input, 2 partial failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import attack, shor_spectrum, simon
from .errors import ResourceLimitError

__all__ = ["main", "build_parser"]

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_INVALID, EXIT_PARTIAL = 0, 1, 2


class UsageError(Exception):
    pass


def _raw(x: float | None) -> float | None:
    # 12 significant digits, round-tripped through float so JSON stays numeric.
    return None if x is None else float(f"{x:.12g}")


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(x) for x in v)
    return str(v)


def render(records: list[dict[str, Any]], fmt: str, meta: dict[str, Any] | None = None) -> str:
    if fmt == "json":
        doc: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        doc.update(meta or {})
        doc["records"] = records
        return json.dumps(doc, indent=2) + "\n"
    columns: list[str] = []
    for rec in records:
        for key in rec:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_csv_cell(rec.get(col)) for col in columns])
    return buf.getvalue()


def _parse_rows(spec: str) -> list[tuple[int, int]]:
    rows = []
    for item in spec.split(","):
        try:
            n, y = item.split(":")
            rows.append((int(n), int(y)))
        except ValueError:
            raise UsageError(f"bad --rows entry {item!r}, expected N:y") from None
    return rows


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def cmd_table1(args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    rows = _parse_rows(args.rows) if args.rows else shor_spectrum.TABLE1_ROWS
    records = []
    status = EXIT_OK
    for row in shor_spectrum.table1(rows):
        if row.error:
            status = EXIT_PARTIAL
        records.append(
            {
                "N": row.N, "L": row.L, "phi_N": row.phi_N, "y": row.y, "r": row.r,
                "A": row.A, "P_raw": _raw(row.P),
                "P_rounded": None if row.P is None else f"{row.P:.4f}",
                "error": row.error,
            }
        )
    return records, {"command": "table1"}, status


def cmd_spectrum(args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    _require(args, "N", "y")
    inst = shor_spectrum.build_instance(args.N, args.y, args.l)
    spec = shor_spectrum.spectrum(inst)
    members = set(spec.S)
    records: list[dict[str, Any]] = [
        {"kind": "point", "c": c, "prob": _raw(float(p)), "in_S": c in members}
        for c, p in enumerate(spec.probs)
    ]
    summary = {
        "N": inst.N, "y": inst.y, "l": inst.l, "L": inst.L, "q": inst.q, "r": inst.r,
        "A": inst.A, "P": _raw(spec.miss_probability), "S_size": len(spec.S),
        "S": list(spec.S), "total_prob": _raw(math.fsum(spec.probs)),
    }
    if args.format == "json":
        return records, {"command": "spectrum", "summary": summary}, EXIT_OK
    records.append({"kind": "summary", **summary})
    return records, {}, EXIT_OK


def _simon_function(args: argparse.Namespace, rng: np.random.Generator) -> simon.SimonFunction:
    n = args.n
    if args.s is None:
        s = int(rng.integers(1, 1 << n))
    else:
        if len(args.s) != n:
            raise UsageError(f"--s must have exactly {n} bits")
        s = simon.from_bits(args.s)
    seed = int(rng.integers(2**63))
    if s == 0:
        return simon.make_one_to_one(n, seed)
    return simon.make_two_to_one(n, s, seed)


def cmd_simon(args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    _require(args, "n")
    n = args.n
    if not 1 <= n <= simon.MAX_TABLE_BITS:
        raise UsageError(f"--n must be in [1, {simon.MAX_TABLE_BITS}]")
    m = args.m if args.m is not None else simon.default_budget(n)
    fmt = lambda v: None if v is None else simon.to_bits(v, n)  # noqa: E731
    records = []
    user_ok = attacker_ok = 0
    for trial, rng in enumerate(attack.trial_rngs(args.seed, args.trials)):
        f = _simon_function(args, rng)
        rec: dict[str, Any] = {"kind": "trial", "trial": trial, "true_s": fmt(f.s)}
        if args.attacked:
            t = simon.run_attacked_simon(f, rng, m, leak=args.leak)
            user = t.user
            rec.update(mode="attacked", user_verdict=user.verdict.value, user_s=fmt(user.s))
            rec["leaked_k"] = [fmt(k) for k in t.leaked_samples] if t.leaked else None
            if t.attacker is not None:
                rec.update(attacker_verdict=t.attacker.verdict.value, attacker_s=fmt(t.attacker.s))
                attacker_ok += t.attacker.matches(f.s)
        else:
            user = simon.run_simon(f, rng, m)
            rec.update(mode="honest", user_verdict=user.verdict.value, user_s=fmt(user.s))
            rec["samples"] = [fmt(k) for k in user.samples]
        user_ok += user.matches(f.s)
        records.append(rec)
    trials = max(args.trials, 1)
    summary: dict[str, Any] = {
        "kind": "summary", "n": n, "m": m, "trials": args.trials,
        "attacked": args.attacked, "user_correct_rate": _raw(user_ok / trials),
    }
    if args.attacked and args.leak:
        summary["attacker_correct_rate"] = _raw(attacker_ok / trials)
    records.append(summary)
    return records, {"command": "simon"}, EXIT_OK


def _chi_square_uniform(values: list[int], q: int) -> tuple[float, float]:
    from scipy import stats

    counts = np.bincount(np.asarray(values, dtype=np.int64), minlength=q)
    res = stats.chisquare(counts)
    return float(res.statistic), float(res.pvalue)


def cmd_attack_shor(args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    _require(args, "N", "y")
    inst = shor_spectrum.build_instance(args.N, args.y, 0)
    records = []
    user_ok = attacker_ok = honest_ok = 0
    user_cs = []
    for trial, seq in enumerate(attack.trial_seeds(args.seed, args.trials)):
        t = attack.run_attacked_shor(args.N, args.y, np.random.default_rng(seq), leak=args.leak)
        # A fresh generator on the same seed pairs the honest baseline with this trial.
        honest_ok += attack.run_honest_shor(args.N, args.y, np.random.default_rng(seq)).user_success
        user_ok += t.user_success
        attacker_ok += t.attacker_success
        user_cs.append(t.user_c)
        records.append(
            {
                "kind": "trial", "trial": trial, "l": t.instance.l, "user_c": t.user_c,
                "attacker_d": t.attacker_d, "leaked": t.leaked,
                "attacker_sum": t.attacker_sum, "user_recovered": t.user_recovered,
                "attacker_recovered": t.attacker_recovered,
            }
        )
    trials = max(args.trials, 1)
    chi2, pvalue = _chi_square_uniform(user_cs, inst.q) if args.trials else (None, None)
    records.append(
        {
            "kind": "summary", "N": args.N, "y": args.y, "q": inst.q, "r": inst.r,
            "trials": args.trials, "leak": args.leak,
            "user_success_rate": _raw(user_ok / trials),
            "attacker_success_rate": _raw(attacker_ok / trials),
            "honest_success_rate": _raw(honest_ok / trials),
            "user_c_chi2": _raw(chi2), "user_c_pvalue": _raw(pvalue),
            "P_reference": _raw(shor_spectrum.miss_probability(inst)),
        }
    )
    return records, {"command": "attack-shor"}, EXIT_OK


def cmd_detect(args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    _require(args, "r_known", "L")
    if args.L < 1 or args.L > shor_spectrum.MAX_SPECTRUM_BITS:
        raise UsageError(f"--L must be in [1, {shor_spectrum.MAX_SPECTRUM_BITS}]")
    q = 1 << args.L
    if args.r_known < 1 or args.r_known >= q or q % args.r_known:
        raise UsageError(f"--r-known must be a power of two dividing q = {q} and below it")
    sampler = attack.attacked_user_c if args.attacked else attack.honest_user_c
    rng = np.random.default_rng(args.seed)
    det = attack.detect_attack_shor(args.r_known, args.L, sampler, args.trials, rng)
    step = q // args.r_known
    records: list[dict[str, Any]] = [
        {"kind": "trial", "trial": i, "c": c, "violation": c % step != 0}
        for i, c in enumerate(det.outcomes)
    ]
    records.append(
        {
            "kind": "summary", "r_known": args.r_known, "L": args.L, "q": q,
            "trials": args.trials, "attacked": args.attacked, "verdict": det.verdict,
            "violations": len(det.violations),
            "offending_c": [c for _, c in det.violations],
        }
    )
    return records, {"command": "detect"}, EXIT_OK


def cmd_stats(args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    P = shor_spectrum.analytic_miss() if args.P is None else args.P
    if not 0.0 <= P < 1.0:
        raise UsageError(f"--P must lie in [0, 1), got {P}")
    st = attack.attacker_stats(P)
    record = {
        "P": _raw(st.P), "n_bar": _raw(st.n_bar), "sd": _raw(st.sd),
        "trials_per_illegal": _raw(st.trials_per_illegal),
        "illegal_prob": _raw(st.illegal_prob),
    }
    return [record], {"command": "stats"}, EXIT_OK


COMMANDS = {
    "table1": cmd_table1,
    "spectrum": cmd_spectrum,
    "simon": cmd_simon,
    "attack-shor": cmd_attack_shor,
    "detect": cmd_detect,
    "stats": cmd_stats,
}


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--trials", type=int, default=1)

    parser = argparse.ArgumentParser(
        prog="probe-attack-sim",
        description="Simulate Simon's and Shor's algorithms under an entangling-probe attack.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[common], help="miss probability P per (N, y)")
    p.add_argument("--rows", help="comma-separated N:y pairs (default: built-in table)")

    p = sub.add_parser("spectrum", parents=[common], help="Prob(c) for every c")
    p.add_argument("--N", type=int)
    p.add_argument("--y", type=int)
    p.add_argument("--l", type=int, default=0)

    p = sub.add_parser("simon", parents=[common], help="honest or attacked Simon runs")
    p.add_argument("--n", type=int)
    p.add_argument("--s", help="hidden shift as a bit string; all zeros for one-to-one")
    p.add_argument("--m", type=int, help="sample budget (default 4n)")
    p.add_argument("--attacked", action="store_true")
    p.add_argument("--leak", action=argparse.BooleanOptionalAction, default=True)

    p = sub.add_parser("attack-shor", parents=[common], help="attacked Shor transcripts")
    p.add_argument("--N", type=int)
    p.add_argument("--y", type=int)
    p.add_argument("--leak", action=argparse.BooleanOptionalAction, default=True)

    p = sub.add_parser("detect", parents=[common], help="known-period detection test")
    p.add_argument("--r-known", dest="r_known", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--attacked", action="store_true")

    p = sub.add_parser("stats", parents=[common], help="trial statistics from P")
    p.add_argument("--P", type=float)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.trials < 0:
        print("error: --trials must be >= 0", file=sys.stderr)
        return EXIT_INVALID
    try:
        records, meta, status = COMMANDS[args.command](args)
    except (UsageError, ValueError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = render(records, args.format, meta)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
