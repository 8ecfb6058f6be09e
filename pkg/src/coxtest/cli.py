"""Command line interface: ``coxtest {test,simulate,mc-level,mc-power,mc-limit,power-analytic}``.

Exit codes: 0 success, 1 usage error, 3 data error, 4 degenerate sample.
Test decisions are part of the report, never of the exit code.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from .engine import power_table, run_test
from .errors import (
    ContractViolation,
    DataError,
    DegenerateSampleError,
    DomainError,
    InvalidSampleError,
    ParameterError,
)
from .harness import (
    CSV_FIELDS,
    McConfig,
    drifted_sup_power,
    limit_law_check,
    run_trials,
    summarize,
)
from .io import (
    fmt,
    load_trajectories,
    read_id_list,
    window_rescale,
    write_json,
    write_rows_csv,
    write_trajectories,
)
from .rng import RngStream
from .simulate import CoxModel1, CoxModel2, HomPoisson, Weibull, make_model, simulate_set

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 3, 4

LEVEL_FIELDS = ("beta", "n", "alpha", "freq_s1", "se_s1", "freq_s2", "se_s2", "n_mc", "seed", "degenerate")
DEFAULT_NMC = {"cox1": 10_000, "cox2": 1_000}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop included) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            k = int(np.floor((stop - start) / step + 1e-9))
            return [round(start + i * step, 12) for i in range(k + 1)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use start:stop:step or a comma list") from None


def parse_list(text: str, kind=float) -> list:
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad list {text!r}") from None


def parse_params(text: str) -> dict:
    params = {}
    for item in filter(None, (s.strip() for s in (text or "").split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"bad parameter {item!r}; use key=value")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"bad value in {item!r}") from None
    return params


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")


def _emit(rows, fields, out, json_path=None, summary=None):
    fh = _open_out(out)
    try:
        write_rows_csv(rows, fh, fields)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if json_path:
        write_json(summary if summary is not None else {"rows": rows}, json_path)


def cmd_test(args):
    ids = read_id_list(args.include_empty) if args.include_empty else ()
    sample = load_trajectories(args.input, args.horizon, ids)
    if args.window:
        a, b = parse_list(args.window)
        sample = window_rescale(sample, a, b)
    report = run_test(sample, args.alpha).as_dict()
    if args.json:
        write_json(report, sys.stdout)
    elif args.csv:
        write_rows_csv([report], sys.stdout)
    else:
        width = max(map(len, report))
        for k, v in report.items():
            print(f"{k:<{width}}  {fmt(v)}")


def cmd_simulate(args):
    model = make_model(args.model, parse_params(args.params), args.horizon)
    sample = simulate_set(model, args.n, args.seed)
    ids = write_trajectories(sample, args.out)
    if args.ids_out:
        with open(args.ids_out, "w", encoding="utf-8") as fh:
            fh.write("".join(f"{i}\n" for i in ids))


def cmd_mc_level(args):
    rows, results = [], []
    for beta in parse_list(args.beta):
        for n in parse_list(args.n, int):
            model = Weibull(beta, args.horizon)
            stats = run_trials(model, n, args.nmc, args.seed, (0,), args.workers)
            for alpha in parse_list(args.alpha):
                res = summarize(stats, McConfig(model, n, args.nmc, alpha, args.seed, args.workers))
                results.append(res.as_dict())
                rows.append({
                    "beta": beta, "n": n, "alpha": alpha,
                    "freq_s1": res.reject_freq_s1, "se_s1": res.se_s1,
                    "freq_s2": res.reject_freq_s2, "se_s2": res.se_s2,
                    "n_mc": args.nmc, "seed": args.seed, "degenerate": res.degenerate_trials,
                })
    _emit(rows, LEVEL_FIELDS, args.out, args.json, {"rows": rows, "results": results})


def cmd_mc_power(args):
    cls = {"cox1": CoxModel1, "cox2": CoxModel2}[args.model]
    nmc = args.nmc or DEFAULT_NMC[args.model]
    grid = parse_grid(args.theta_grid)
    rows, results = [], []
    for n in parse_list(args.n, int):
        for j, theta in enumerate(grid):
            model = cls(theta, args.horizon)
            stats = run_trials(model, n, nmc, args.seed, (j,), args.workers)
            for alpha in parse_list(args.alpha):
                res = summarize(stats, McConfig(model, n, nmc, alpha, args.seed, args.workers))
                results.append(res.as_dict())
                rows.append(res.row(theta))
    _emit(rows, CSV_FIELDS, args.out, args.json, {"rows": rows, "results": results})


def cmd_mc_limit(args):
    cfg = McConfig(HomPoisson(args.rate, args.horizon), args.n, args.nmc, 0.05, args.seed, args.workers)
    rep = limit_law_check(cfg, threshold=args.threshold)
    doc = {
        "ks_t1": rep.ks_t1, "ks_t2": rep.ks_t2,
        "pvalue_t1": rep.pvalue_t1, "pvalue_t2": rep.pvalue_t2,
        "threshold": rep.threshold, "n": rep.n, "n_mc": rep.n_mc,
        "degenerate_trials": rep.degenerate_trials, "asymptotic": rep.asymptotic,
        "passed": rep.passed,
    }
    write_json(doc, sys.stdout)


def cmd_power_analytic(args):
    xs = parse_grid(args.x_grid)
    alphas = parse_list(args.alpha)
    fields = ["alpha", "x", "g1", "g2"]
    mc = None
    if args.mc_check:
        fields += ["g1_mc", "se_mc"]
        mc = drifted_sup_power(xs, args.lambda0, np.asarray(alphas), args.paths, args.steps,
                               RngStream(args.seed, 0))
    rows = []
    for a_idx, alpha in enumerate(alphas):
        table = power_table(xs, args.lambda0, alpha)
        for i, (x, g1, g2) in enumerate(table):
            row = {"alpha": alpha, "x": x, "g1": g1, "g2": g2}
            if mc is not None:
                p = mc[i, a_idx]
                row["g1_mc"] = p
                row["se_mc"] = float(np.sqrt(p * (1 - p) / args.paths))
            rows.append(row)
    _emit(rows, fields, args.out, args.json)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coxtest", description="Tests for the Poisson nature of Cox processes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run both tests on an event CSV")
    t.add_argument("--input", required=True, help="CSV with header traj_id,time")
    t.add_argument("--horizon", type=float, required=True)
    t.add_argument("--window", help="a,b: keep (a, b] and shift to (0, b-a]")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--include-empty", help="file listing trajectory ids, one per line")
    fmt_group = t.add_mutually_exclusive_group()
    fmt_group.add_argument("--json", action="store_true")
    fmt_group.add_argument("--csv", action="store_true")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="write simulated trajectories as CSV")
    s.add_argument("--model", required=True, choices=["hompoisson", "weibull", "cox1", "cox2", "localalt"])
    s.add_argument("--params", default="", help="e.g. beta=2 | theta=0.5 | lambda0=1,w=0.3,d_n=0.5")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--horizon", type=float, default=1.0)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--ids-out", help="also write every trajectory id (for --include-empty)")
    s.set_defaults(func=cmd_simulate)

    def mc_common(q):
        q.add_argument("--n", default="100", help="comma list of sample sizes")
        q.add_argument("--alpha", default="0.05", help="comma list of levels")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--horizon", type=float, default=1.0)
        q.add_argument("--workers", type=int, default=1)
        q.add_argument("--out", help="CSV path (default stdout)")
        q.add_argument("--json", help="also write a JSON summary here")

    lv = sub.add_parser("mc-level", help="level study under the Weibull null")
    lv.add_argument("--beta", default="1", help="comma list of Weibull shapes")
    lv.add_argument("--nmc", type=int, default=10_000)
    mc_common(lv)
    lv.set_defaults(func=cmd_mc_level)

    pw = sub.add_parser("mc-power", help="power curve under Cox model 1 or 2")
    pw.add_argument("--model", required=True, choices=["cox1", "cox2"])
    pw.add_argument("--theta-grid", default="0:1:0.1")
    pw.add_argument("--nmc", type=int, default=None, help="default 10000 (cox1) / 1000 (cox2)")
    mc_common(pw)
    pw.set_defaults(func=cmd_mc_power)

    lim = sub.add_parser("mc-limit", help="KS check of the null limit laws")
    lim.add_argument("--n", type=int, default=500)
    lim.add_argument("--nmc", type=int, default=2_000)
    lim.add_argument("--rate", type=float, default=1.0)
    lim.add_argument("--horizon", type=float, default=1.0)
    lim.add_argument("--threshold", type=float, default=0.05)
    lim.add_argument("--seed", type=int, default=0)
    lim.add_argument("--workers", type=int, default=1)
    lim.set_defaults(func=cmd_mc_limit)

    pa = sub.add_parser("power-analytic", help="asymptotic local power g1, g2 over an x grid")
    pa.add_argument("--lambda0", type=float, default=1.0)
    pa.add_argument("--alpha", default="0.05", help="comma list of levels")
    pa.add_argument("--x-grid", default="0:5:0.05")
    pa.add_argument("--mc-check", action="store_true", help="add a drifted Brownian Monte Carlo column")
    pa.add_argument("--paths", type=int, default=100_000)
    pa.add_argument("--steps", type=int, default=10_000)
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--out", help="CSV path (default stdout)")
    pa.add_argument("--json", help="also write a JSON summary here")
    pa.set_defaults(func=cmd_power_analytic)
    return p


def _fail(code, kind, msg):
    print(f"coxtest: {kind}: {msg}".replace("\n", " "), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage error", exc)
    except DegenerateSampleError as exc:
        return _fail(EXIT_DEGENERATE, "degenerate sample", exc)
    except (DataError, InvalidSampleError, DomainError, OSError) as exc:
        return _fail(EXIT_DATA, "data error", exc)
    except (ParameterError, ContractViolation) as exc:
        return _fail(EXIT_USAGE, "usage error", exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
