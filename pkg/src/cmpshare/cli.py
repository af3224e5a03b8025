"""``cmpshare`` command line: model evaluation, design sweeps, trace simulation and fitting.

Exit codes: 0 success, 2 infeasible optimisation, 3 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import dse, fit
from .cachesim import SharingSpecError, TraceError, generate_trace, miss_curve, read_trace, simulate, write_trace
from .cachesim.sim import GeometryError
from .config import ConfigError, load
from .model import ModelDomainError, evaluate

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3

SWEEP_COLUMNS = ["x", "ipc", "n", "a_l1", "a_cpu", "a_l2", "power", "m_d", "feasible"]
CURVE_COLUMNS = ["l1_bytes", "mr_multicore", "mr_singlecore"]


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _kv(pairs) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in pairs)


def _num(v) -> str:
    return repr(float(v))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _out_path(args, cfg) -> str | None:
    return args.out or cfg.output_path or None


def _config(args):
    return load(args.config, args.set or (), args.seed)


def _config_pairs(c):
    return [("n", c.n), ("a_l1", c.a_l1), ("a_cpu", c.a_cpu), ("a_l2", c.a_l2)]


def cmd_eval(args) -> int:
    cfg = _config(args)
    res = evaluate(cfg.design, cfg.workload, cfg.tech, cfg.budgets)
    if args.json:
        doc = {"config": dict(_config_pairs(cfg.design)), "result": res.as_dict()}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = _kv(_config_pairs(cfg.design) + list(res.as_dict().items()))
    _emit(text, _out_path(args, cfg))
    return EXIT_OK


def _sweep_row(x, c, r, feasible):
    if c is None:
        nan = repr(math.nan)
        return [_num(x), nan, "0", nan, nan, nan, nan, nan, "0"]
    return [_num(x), _num(r.ipc), str(c.n), _num(c.a_l1), _num(c.a_cpu), _num(c.a_l2),
            _num(r.power), _num(r.m_d), "1" if feasible else "0"]


def cmd_sweep(args) -> int:
    cfg = _config(args)
    constraint = args.constraint or cfg.constraint
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    if args.mode == "budget":
        points = dse.sweep_area_budget(cfg.sweep_budgets, cfg.grid, cfg.workload, cfg.tech,
                                       cfg.budgets, constraint, cfg.dse_workers)
        out.writerow(SWEEP_COLUMNS)
        for p in points:
            out.writerow(_sweep_row(p.x, p.config, p.result, p.feasible))
        any_feasible = any(p.feasible for p in points)
    else:
        sweep = dse.sweep_l1_area(cfg.grid, cfg.workload, cfg.tech, cfg.budgets, constraint, cfg.dse_workers)
        on_envelope = {id(p) for p in sweep.envelope}
        out.writerow(SWEEP_COLUMNS + ["envelope"])
        for p in sweep.points:
            out.writerow(_sweep_row(p.x, p.config, p.result, True) + ["1" if id(p) in on_envelope else "0"])
        any_feasible = bool(sweep.points)
    _emit(buf.getvalue(), _out_path(args, cfg))
    if not any_feasible:
        print("error: no feasible design point", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _config(args)
    w = cfg.workload
    if w.mu_n <= 0 and not w.mu_n_asymptote:
        raise InputError("optimize compares against a no-sharing workload; set workload.mu_n > 0")
    constraint = args.constraint or cfg.constraint
    rep = dse.compare_sharing(cfg.grid, w, cfg.tech, cfg.budgets, constraint, cfg.dse_workers)
    pairs = [("constraint", constraint if constraint != "bw" else "bandwidth"), ("feasible", rep.feasible)]
    doc = {"constraint": pairs[0][1], "feasible": rep.feasible}
    for label, opt in (("sharing", rep.sharing), ("nosharing", rep.nosharing)):
        if opt.feasible:
            block = dict(_config_pairs(opt.config))
            block.update(ipc=opt.result.ipc, power=opt.result.power, m_d=opt.result.m_d)
            pairs += [(f"{label}.{k}", v) for k, v in block.items()]
            doc[label] = block
        else:
            pairs.append((f"{label}.feasible", False))
            doc[label] = None
    if rep.feasible:
        pairs += [("a_l1_opt_sharing", rep.a_l1_opt_sharing), ("a_l1_opt_nosharing", rep.a_l1_opt_nosharing),
                  ("relative_shift", rep.relative_shift)]
        doc.update(a_l1_opt_sharing=rep.a_l1_opt_sharing, a_l1_opt_nosharing=rep.a_l1_opt_nosharing,
                   relative_shift=rep.relative_shift)
    if args.json:
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = _kv(pairs)
        if rep.feasible:
            text += f"relative_shift_pct = {100 * rep.relative_shift:.6g}%\n"
    _emit(text, _out_path(args, cfg))
    if not rep.feasible:
        print("error: no feasible design point", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    cfg = _config(args)
    trace = generate_trace(cfg.sharing)
    out = _out_path(args, cfg)
    if out:
        write_trace(trace, out)
    else:
        buf = io.StringIO()
        write_trace(trace, buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    try:
        trace = read_trace(args.trace)
    except OSError as exc:
        raise InputError(f"cannot read trace {args.trace}: {exc.strerror or exc}") from None
    stats = simulate(trace, cfg.l1_geom, cfg.l2_geom)
    if args.json:
        doc = {name: {"accesses": c.accesses, "hits": c.hits, "misses": c.misses, "miss_rate": c.miss_rate}
               for name, c in stats.rows()}
        doc["l1_aggregate_miss_rate"] = stats.l1_miss_rate
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = stats.to_csv()
    _emit(text, _out_path(args, cfg))
    return EXIT_OK


def cmd_miss_curve(args) -> int:
    cfg = _config(args)
    points = miss_curve(cfg.sharing, cfg.curve_sizes, cfg.l2_geom, cfg.l1_geom.associativity, cfg.sim_workers)
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(CURVE_COLUMNS)
    for p in points:
        out.writerow([p.l1_bytes, _num(p.mr_multicore), _num(p.mr_singlecore)])
    _emit(buf.getvalue(), _out_path(args, cfg))
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _config(args)
    try:
        text = Path(args.samples).read_text()
    except OSError as exc:
        raise InputError(f"cannot read samples {args.samples}: {exc.strerror or exc}") from None
    alpha_bytes = args.alpha_bytes if args.alpha_bytes is not None else cfg.fit_alpha_bytes
    samples = fit.read_samples_csv(text, alpha_bytes)
    gamma = args.gamma if args.gamma is not None else cfg.fit_gamma
    cmp = fit.compare_models(samples, gamma)
    f1, f2 = cmp.fit1, cmp.fit2
    if args.free_gamma or cfg.fit_free_gamma:
        f2 = fit.fit_model2(samples, None)
    pairs = [
        ("model1.c", f1.c_hat), ("model1.gamma", f1.gamma_hat), ("model1.sse", f1.sse),
        ("model2.mu_n", f2.mu_n_hat), ("model2.c", f2.c_hat), ("model2.gamma", f2.gamma_hat),
        ("model2.sse", f2.sse), ("model2.mu", f2.mu_hat(cfg.fit_alpha)),
        ("sse_ratio", cmp.sse_ratio), ("preferred", cmp.preferred),
    ]
    if args.json:
        sys.stdout.write(json.dumps(dict(pairs), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(_kv(pairs))
    out = _out_path(args, cfg)
    if out:
        Path(out).write_text(fit.residuals_csv(f1, f2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="scenario file (section.key = value lines)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key; repeatable")
    common.add_argument("--out", help="output file (default: stdout, or output.path)")
    common.add_argument("--seed", type=lambda s: int(s, 0), help="trace generator seed (unsigned 64-bit)")
    common.add_argument("--json", action="store_true", help="JSON report instead of key = value text")

    p = _Parser(prog="cmpshare", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("eval", parents=[common], help="evaluate one design point").set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", parents=[common], help="IPC against area budget or L1 area (CSV)")
    sp.add_argument("--mode", choices=["budget", "l1"], default="budget")
    sp.add_argument("--constraint", choices=["power", "bw", "bandwidth", "both"])
    sp.set_defaults(func=cmd_sweep)

    op = sub.add_parser("optimize", parents=[common], help="optimal L1 area with and without sharing")
    op.add_argument("--constraint", choices=["power", "bw", "bandwidth", "both"])
    op.set_defaults(func=cmd_optimize)

    sub.add_parser("gen-trace", parents=[common], help="write a synthetic sharing trace").set_defaults(func=cmd_gen_trace)

    sm = sub.add_parser("simulate", parents=[common], help="replay a trace through the cache hierarchy")
    sm.add_argument("trace")
    sm.set_defaults(func=cmd_simulate)

    sub.add_parser("miss-curve", parents=[common], help="L1 miss rate vs size, multicore vs single core").set_defaults(
        func=cmd_miss_curve)

    fp = sub.add_parser("fit", parents=[common], help="fit the miss-rate laws to a_l1,miss_rate samples")
    fp.add_argument("samples")
    fp.add_argument("--gamma", type=float, help="fixed exponent (default fit.gamma)")
    fp.add_argument("--free-gamma", action="store_true", help="search the model-2 exponent in [0.3, 0.7]")
    fp.add_argument("--alpha-bytes", type=float, help="sizes are bytes; divide by this baseline size")
    fp.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceError, fit.FitError, ModelDomainError, SharingSpecError, GeometryError,
            InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
