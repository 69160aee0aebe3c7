"""Command-line entry point.

    hdmr reapprox    --in samples.csv --n 20 --out target.csv [--seed S] [--epsilon E] [--config C]
    hdmr reconstruct --in samples.csv --n 30 --out mixture.json [--config C]
    hdmr filter-sim  --out results.csv [--config C] [--runs R] [--steps T] [--seed S]
    hdmr bench       --out results.csv [--config C] [--runs R] ...   (5000-run defaults)
    hdmr oracle      SUITE [--out fixture.json]

Exit status is 0 on success, 1 when a run or oracle fails and 2 for bad
input or configuration.
"""

import argparse
import csv
import io
import logging
import os
import sys

from . import config as cfgmod
from .fileio import SampleSetError, atomic_write_text, read_sample_set, write_json, write_sample_set
from .harness import SimConfig, benchmark
from .oracles import SUITES, run_suite
from .reapprox import ReapproxConfig, hdmr
from .reconstruct import hellinger_s2, reconstruct, vmfm_logpdf

log = logging.getLogger("hdmr")


class UsageError(Exception):
    pass


def _fmt(x):
    return format(x, ".17g") if isinstance(x, float) else str(x)


def _user_config(args):
    user = cfgmod.load_config(args.config) if getattr(args, "config", None) else {}
    if getattr(args, "seed", None) is not None:
        user["seed"] = args.seed
    if getattr(args, "n", None) is not None:
        user.setdefault("reapprox", {})["n_target"] = args.n
    if getattr(args, "epsilon", None) is not None:
        user.setdefault("reapprox", {})["epsilon_override"] = args.epsilon
    return user


def _reapprox_config(cfg):
    r = cfg["reapprox"]
    if r["n_target"] is None:
        raise UsageError("the target size is required (--n or reapprox.n_target)")
    return ReapproxConfig(
        r["n_target"], init=r["init"], seed=cfg["seed"], epsilon_override=r["epsilon_override"],
        solver=cfgmod.solver_config(cfg), compute_d3=r["compute_d3"],
    )


def _report_path(out):
    stem, _ = os.path.splitext(out)
    return stem + ".report.json"


def cmd_reapprox(args):
    cfg = cfgmod.resolve_config(_user_config(args))
    rcfg = _reapprox_config(cfg)
    source, _ = read_sample_set(args.inp)
    target, rep = hdmr(source, rcfg)
    write_sample_set(args.out, target, weighted=False)
    report = {
        "input": args.inp,
        "output": args.out,
        "d": source.d,
        "source_size": source.m,
        "n_target": rcfg.n_target,
        "seed": cfg["seed"],
        "epsilon": rep.info["epsilon"],
        "D_init": rep.info["D_init"],
        "D_final": rep.info["D_final"],
        "d3_included": rep.info.get("d3_included", True),
        "solver": rep.as_dict(),
        "config": cfg,
    }
    write_json(args.report or _report_path(args.out), report)
    log.info("D %.6e -> %.6e in %d iterations (%s)", rep.info["D_init"], rep.info["D_final"],
             rep.iterations, rep.termination)
    return 0


def cmd_reconstruct(args):
    cfg = cfgmod.resolve_config(_user_config(args))
    rcfg = _reapprox_config(cfg)
    source, _ = read_sample_set(args.inp)
    target, rep = hdmr(source, rcfg)
    mix, mle = reconstruct(target, source, tol=cfg["reconstruct"]["tol"])
    out = {
        "d": mix.d,
        "n": mix.n,
        "means": mix.means.T.tolist(),
        "lambda": mix.lam,
        "mle": {
            "lambda_min": mle.lambda_min,
            "lambda_max": mle.lambda_max,
            "lambda0": mle.lambda0,
            "converged": mle.converged,
            "iterations": len(mle.iterates),
            "steps": mle.steps,
        },
        "reapprox": {"epsilon": rep.info["epsilon"], "D_init": rep.info["D_init"], "D_final": rep.info["D_final"],
                     "iterations": rep.iterations, "termination": rep.termination},
        "seed": cfg["seed"],
        "config": cfg,
    }
    ref = cfg["reconstruct"]["reference"]
    if ref is not None:
        if mix.d != 3:
            raise UsageError("Hellinger distances are computed on S^2 only (d = 3)")
        ref_log = cfgmod.reference_logpdf(ref)
        out["hellinger"] = hellinger_s2(lambda P: vmfm_logpdf(mix, P), ref_log,
                                        cfg["reconstruct"]["lattice_size"])
    write_json(args.out, out)
    return 0


CSV_COLUMNS = ("method", "samples", "rmse_rad", "runtime_ms_per_step", "runs", "steps", "seed")


def _table_csv(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in table:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _run_sim(args, sim_defaults):
    user = _user_config(args)
    sim = user.setdefault("sim", {})
    if args.runs is not None:
        sim["num_runs"] = args.runs
    if args.steps is not None:
        sim["num_steps"] = args.steps
    base = cfgmod.default_config()
    base["sim"].update(sim_defaults)
    cfg = cfgmod.resolve_config(user, base=base)
    sim_cfg = cfgmod.sim_config(cfg)
    results, table, series = benchmark(sim_cfg)
    atomic_write_text(args.out, _table_csv(table))
    stem, _ = os.path.splitext(args.out)
    write_json(stem + ".json", {
        "table": table,
        "series": series,
        "results": [r.as_dict() for r in results],
        "config": cfg,
    })
    return 0


def cmd_filter_sim(args):
    return _run_sim(args, {})


def cmd_bench(args):
    full = SimConfig.full_scale()
    return _run_sim(args, {"num_runs": full.num_runs, "n_w_list": full.n_w_list,
                           "pf_particles_list": full.pf_particles_list})


def cmd_oracle(args):
    if args.suite not in SUITES:
        raise UsageError(f"unknown oracle suite {args.suite!r}; available: {', '.join(sorted(SUITES))}")
    res = run_suite(args.suite)
    write_json(args.out or f"oracle-{args.suite}.json", res)
    status = "PASS" if res["passed"] else "FAIL"
    print(f"{status} {args.suite}: " + ", ".join(f"{k}={v:.3e}" for k, v in res.items() if k.startswith("max_")))
    return 0 if res["passed"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="hdmr", description="Dirac mixture reapproximation on hyperspheres.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_in=True, need_n=True):
        if need_in:
            sp.add_argument("--in", dest="inp", required=True, help="sample-set CSV")
        sp.add_argument("--out", required=True)
        if need_n:
            sp.add_argument("--n", type=int, help="target size")
            sp.add_argument("--epsilon", type=float, help="override the weighting parameter (> 2)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--config", help="YAML or JSON run configuration")

    sp = sub.add_parser("reapprox", help="compress a sample set into n equally weighted points")
    common(sp)
    sp.add_argument("--report", help="JSON report path (default: <out>.report.json)")
    sp.set_defaults(func=cmd_reapprox)

    sp = sub.add_parser("reconstruct", help="reapproximate, then fit a shared-concentration vMF mixture")
    common(sp)
    sp.set_defaults(func=cmd_reconstruct)

    for name, func, text in [("filter-sim", cmd_filter_sim, "filter benchmark at desk scale"),
                             ("bench", cmd_bench, "filter benchmark with 5000-run defaults")]:
        sp = sub.add_parser(name, help=text)
        common(sp, need_in=False, need_n=False)
        sp.add_argument("--runs", type=int)
        sp.add_argument("--steps", type=int)
        sp.set_defaults(func=func)

    sp = sub.add_parser("oracle", help="run a reference suite and write its values as JSON")
    sp.add_argument("suite", help=f"one of: {', '.join(sorted(SUITES))}")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except (SampleSetError, UsageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
