"""Command-line front end.

Every output embeds a run manifest. JSON outputs carry it under ``"manifest"``;
CSV outputs start with a ``# manifest: {...}`` comment line. Wall-clock fields
live under ``manifest["timestamp"]`` so two runs of the same command differ
only there.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .constructions import (
    bes_construction_value,
    brute_force_split_infimum,
    claim1_lower_bound,
    shattering_log_ratio,
    split_grid_slack,
)
from .guessing import (
    CostH,
    conditional_h_guesswork,
    guesswork,
    oblivious_cost,
    oblivious_expected_V_exact,
    optimal_guessing_distribution,
    simulate_memoryless_guessing,
)
from .leakage import (
    LeakageReport,
    _fmt,
    local_dp_leakage,
    maximal_leakage,
    mgl_bes_closed_form,
    mgl_upper_bound,
    oblivious_mgl,
    pointwise_guesswork_leakage,
    pointwise_oblivious_mgl,
    to_base,
)
from .optimize import OptimizerConfig, maximize_u_channel, parse_objective, seeded_bes_channel
from .prob_core import Distribution, ValidationError, channel_from_joint, erasure_source, load_joint, marginal_x

EXIT_OK, EXIT_INPUT, EXIT_NOCONV = 0, 2, 3


class RunManifest:
    def __init__(self, subcommand: str, args: argparse.Namespace):
        self.subcommand = subcommand
        self.flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
        self.input_checksum = None
        if getattr(args, "input", None):
            self.input_checksum = hashlib.sha256(Path(args.input).read_bytes()).hexdigest()
        self.seed = getattr(args, "seed", 0)
        self.started = dt.datetime.now(dt.timezone.utc)
        self._t0 = time.perf_counter()

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "flags": self.flags,
            "input_checksum": self.input_checksum,
            "version": __version__,
            "seed": self.seed,
            "timestamp": {
                "started": self.started.isoformat(),
                "duration_seconds": round(time.perf_counter() - self._t0, 6),
            },
        }


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, manifest: RunManifest, result: dict) -> None:
    _write(args, json.dumps({"manifest": manifest.to_dict(), "result": _fmt(result)}, indent=2) + "\n")


def _emit_csv(args, manifest: RunManifest, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if x is None else _fmt(x) for x in r])
    _write(args, buf.getvalue())


def _cfg(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts, max_iters=args.max_iters, tol=args.tol, seed=args.seed, u_size=args.u_size
    )


def _load(args):
    if not args.input:
        raise ValidationError("--input is required")
    return load_joint(args.input, args.format)


def erasure_parameter(j) -> float | None:
    """p if the source is BES(p) up to relabeling, else None.

    Allowed columns: one per input holding only that input's mass, and at
    most one erasure column with equal mass from both inputs.
    """
    w = j.pxy[:, j.py > 0]
    if w.shape[0] != 2 or not np.allclose(w.sum(axis=1), 0.5, atol=1e-12):
        return None
    shared = np.isclose(w[0], w[1], rtol=0, atol=1e-12)
    own = (w == 0).any(axis=0)
    if not np.all(shared | own) or shared.sum() > 1 or (w[0] > 0)[own].sum() > 1 or (w[1] > 0)[own].sum() > 1:
        return None
    p = float(2.0 * w[0, shared].sum())
    return p if p < 1.0 else None


def _rhos(args) -> list[float]:
    rhos = args.rho or [1.0]
    for r in rhos:
        if not r > 0:
            raise ValidationError(f"rho must be positive, got {r}")
    return rhos


# -- subcommands ----------------------------------------------------------


def cmd_report(args, manifest) -> int:
    j = _load(args)
    cfg = _cfg(args)
    rhos = _rhos(args)
    rep = LeakageReport(source=args.input, log_base=args.log_base, rhos=rhos)
    converged = True

    rep.add("guesswork_x", guesswork(marginal_x(j)), "closed_form", unit="count")
    rep.add("conditional_guesswork", conditional_h_guesswork(j), "closed_form", unit="count")
    rep.add("maximal_leakage", maximal_leakage(j), "closed_form")
    bound = mgl_upper_bound(j)
    rep.add("mgl_upper_bound", bound, "bound")
    p = erasure_parameter(j)
    if p is not None:
        rep.add("mgl_bes_closed_form", mgl_bes_closed_form(p), "closed_form", p=p)
    opt = maximize_u_channel(j, parse_objective("guesswork_ratio"), cfg)
    converged &= opt.converged
    rep.add(
        "maximal_guesswork_leakage",
        opt.best_value,
        "optimized",
        upper_bound=bound,
        gap=bound - opt.best_value,
        u_size=cfg.u_size,
        restarts=cfg.restarts,
        converged=opt.converged,
        note=f"lower estimate of the supremum at |U| = {cfg.u_size}",
    )
    for y in j.admissible_outputs():
        rep.add("pointwise_guesswork_leakage", pointwise_guesswork_leakage(j, y), "closed_form", y=y)
        for rho in rhos:
            rep.add("pointwise_oblivious_mgl", pointwise_oblivious_mgl(j, y, rho), "closed_form", y=y, rho=rho)
    for rho in rhos:
        e = oblivious_mgl(j, rho, cfg)
        converged &= e.parameters["converged"]
        rep.entries.append(e)
    rep.add("local_dp_leakage", local_dp_leakage(channel_from_joint(j)), "closed_form")
    _emit_json(args, manifest, rep.to_dict())
    return EXIT_OK if converged else EXIT_NOCONV


def cmd_bes_sweep(args, manifest) -> int:
    ps = args.p or [0.0, 0.25, 0.5, 0.75]
    ns = args.n or [2, 4, 8, 16, 64, 256, 1024]
    for p in ps:
        if not 0.0 <= p < 1.0:
            raise ValidationError(f"erasure probability must lie in [0, 1), got {p}")
    for n in ns:
        if n < 2 or n % 2:
            raise ValidationError(f"n must be an even integer >= 2, got {n}")
    rows, converged = [], True
    for p in ps:
        j = erasure_source(p)
        closed = 2.0 / (1.0 + p)
        for n in ns:
            value = bes_construction_value(n, p)
            opt_value = None
            if n <= args.max_opt_n:
                cfg = OptimizerConfig(
                    restarts=args.restarts, max_iters=args.max_iters, tol=args.tol, seed=args.seed, u_size=n
                )
                res = maximize_u_channel(j, parse_objective("guesswork_ratio"), cfg, [seeded_bes_channel(n)])
                converged &= res.converged
                opt_value = math.exp(res.best_value)
            rows.append([p, n, value, closed, opt_value, closed - value])
    _emit_csv(args, manifest, ["p", "n", "construction_value", "closed_form", "optimizer_value", "gap"], rows)
    return EXIT_OK if converged else EXIT_NOCONV


def cmd_shatter_converge(args, manifest) -> int:
    j = _load(args)
    y = args.y if args.y is not None else j.admissible_outputs()[0]
    if y not in j.y_labels:
        raise ValidationError(f"unknown output symbol {y!r}")
    if j.py[j.y_index(y)] <= 0:
        raise ValidationError(f"P_Y({y!r}) = 0")
    h = CostH.parse(args.h)
    ms = args.m or [10, 100, 1000, 10_000, 100_000]
    if any(m < 1 for m in ms):
        raise ValidationError("m must be positive")
    target = pointwise_guesswork_leakage(j, y)
    values = [shattering_log_ratio(j, y, h, m) for m in ms]
    flag = ""
    if math.isinf(target):
        finite = [v for v in values if math.isfinite(v)]
        if len(finite) < 2 or all(b > a for a, b in zip(finite, finite[1:])):
            flag = "inf-trend"
    rows = []
    for m, v in zip(ms, values):
        lv, lt = to_base(v, args.log_base), to_base(target, args.log_base)
        rows.append([m, lv, lt, lt - lv if math.isfinite(lt) else math.inf, flag])
    _emit_csv(args, manifest, ["m", "log_ratio", "target", "gap", "flag"], rows)
    return EXIT_OK


def _parse_dist(text: str) -> Distribution:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as e:
        raise ValidationError(f"cannot parse distribution {text!r}") from e
    return Distribution.of(vals)


def cmd_simulate_oblivious(args, manifest) -> int:
    if args.dist:
        P = _parse_dist(args.dist)
    else:
        P = marginal_x(_load(args))
    out = []
    for rho in _rhos(args):
        if args.phat:
            Phat = Distribution(P.labels, _parse_dist(args.phat).probs)
            if np.any((P.probs > 0) & (Phat.probs == 0)):
                raise ValidationError("supp(P) is not contained in supp(Phat)")
        else:
            Phat = optimal_guessing_distribution(P, rho)
        mean, se = simulate_memoryless_guessing(P, Phat, rho, args.trials, args.seed, args.threads)
        exact = oblivious_expected_V_exact(P, Phat, rho)
        if se > 0:
            z = (mean - exact) / se
        else:
            z = 0.0 if math.isclose(mean, exact, rel_tol=1e-12) else math.inf
        out.append(
            {
                "rho": rho,
                "empirical_mean": mean,
                "stderr": se,
                "exact": exact,
                "optimum": oblivious_cost(P, rho),
                "z": z,
                "guessing_distribution": Phat.probs.tolist(),
            }
        )
    _emit_json(args, manifest, {"distribution": P.probs.tolist(), "trials": args.trials, "results": out})
    return EXIT_OK


def cmd_claim1_check(args, manifest) -> int:
    if args.n not in (2, 4):
        raise ValidationError("n must be 2 or 4")
    slack = split_grid_slack(args.n, args.resolution)
    if args.dist:
        dists = [_parse_dist(args.dist)]
        if len(dists[0]) != args.n:
            raise ValidationError(f"distribution must have {args.n} entries")
    else:
        rng = np.random.default_rng(args.seed)
        dists = [Distribution.of(rng.dirichlet(np.ones(args.n))) for _ in range(args.samples)]
    samples = []
    for P in dists:
        lb = claim1_lower_bound(P)
        bf = brute_force_split_infimum(P, args.resolution)
        samples.append(
            {"p_u": P.probs.tolist(), "claim1_lower_bound": lb, "brute_force": bf, "violation": bf < lb - slack}
        )
    violations = sum(s["violation"] for s in samples)
    _emit_json(
        args,
        manifest,
        {"n": args.n, "resolution": args.resolution, "slack": slack, "violations": violations,
         "passed": violations == 0, "samples": samples},
    )
    return EXIT_OK


def cmd_optimize_channel(args, manifest) -> int:
    j = _load(args)
    rho = _rhos(args)[0]
    objective = parse_objective(args.objective, CostH.parse(args.h), args.y, rho)
    cfg = _cfg(args)
    res = maximize_u_channel(j, objective, cfg)
    bound = objective.upper_bound(j)
    d = res.to_dict()
    for k in ("best_value", "max_evaluated"):
        d[k] = to_base(d[k], args.log_base)
    d["trace"] = [to_base(v, args.log_base) for v in d["trace"]]
    d.update(
        objective=args.objective,
        upper_bound=to_base(bound, args.log_base),
        gap=to_base(bound - res.best_value, args.log_base),
        note=f"lower estimate of the supremum at |U| = {cfg.u_size}",
        log_base=args.log_base,
    )
    _emit_json(args, manifest, d)
    return EXIT_OK if res.converged else EXIT_NOCONV


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="joint source file (JSON or CSV)")
    common.add_argument("--format", choices=["json", "csv"], help="input format (default: from extension)")
    common.add_argument("--log-base", choices=["e", "2"], default="e")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--rho", type=float, action="append", help="guessing moment order (repeatable)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--threads", type=int, default=1)

    optim = argparse.ArgumentParser(add_help=False)
    optim.add_argument("--u-size", type=int, default=8)
    optim.add_argument("--restarts", type=int, default=32)
    optim.add_argument("--max-iters", type=int, default=2000)
    optim.add_argument("--tol", type=float, default=1e-9)

    p = argparse.ArgumentParser(prog="guessleak", description="Guesswork leakage measures for discrete sources")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("report", parents=[common, optim], help="every leakage measure for one source")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("bes-sweep", parents=[common, optim], help="erasure construction vs closed form")
    s.add_argument("--p", type=float, action="append", help="erasure probability (repeatable)")
    s.add_argument("--n", type=int, action="append", help="even construction size (repeatable)")
    s.add_argument("--max-opt-n", type=int, default=16, help="run the optimizer only for n up to this")
    s.set_defaults(func=cmd_bes_sweep)

    s = sub.add_parser("shatter-converge", parents=[common], help="shattering log-ratio vs block size")
    s.add_argument("--y", help="output symbol (default: first with positive mass)")
    s.add_argument("--h", default="power:1", help="cost: power:R, log, exp_over_linear, geometric:A, table:v1,v2,...")
    s.add_argument("--m", type=int, action="append", help="block size (repeatable)")
    s.set_defaults(func=cmd_shatter_converge)

    s = sub.add_parser("simulate-oblivious", parents=[common], help="Monte Carlo check of memoryless guessing")
    s.add_argument("--dist", help="comma-separated distribution instead of --input")
    s.add_argument("--phat", help="comma-separated guessing distribution (default: optimal)")
    s.add_argument("--trials", type=int, default=100_000)
    s.set_defaults(func=cmd_simulate_oblivious)

    s = sub.add_parser("claim1-check", parents=[common], help="split lower bound vs grid brute force")
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--resolution", type=int, default=40)
    s.add_argument("--dist", help="check one comma-separated P_U instead of random samples")
    s.set_defaults(func=cmd_claim1_check)

    s = sub.add_parser("optimize-channel", parents=[common, optim], help="maximize one objective over P_{U|X}")
    s.add_argument(
        "--objective", choices=["guesswork_ratio", "pointwise_ratio", "oblivious_ratio"], default="guesswork_ratio"
    )
    s.add_argument("--h", default="power:1")
    s.add_argument("--y", help="output symbol for pointwise_ratio")
    s.set_defaults(func=cmd_optimize_channel)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = RunManifest(args.command, args)
        return args.func(args, manifest)
    except (ValidationError, ValueError, KeyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
