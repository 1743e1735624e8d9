"""Command-line entry point.

One verb per invocation; flags override config-file values, which
override the CSNC_SEED environment variable.  Exit codes: 0 success,
1 assertion or calibration failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness, precoder, re_analysis, sources
from .mathcore import Seed

CONFIG_SCHEMA_HELP = f"config schema version {harness.CONFIG_SCHEMA_VERSION}: " \
    "[experiment] section with N, n, k1, k2, m, m1, m2, sigma, D, master_seed, " \
    "seed_stream, kind_phi, kind_psi, network_mode, case, projection_family, " \
    "coeff_family, connect_prob, receivers, trials, amp_lo, amp_hi, " \
    "redraw_b_per_t, debias, xi_spatial, xi_temporal, xi_scale"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csnc",
        description="Compressive-sensing joint source-channel-network coding lab. " + CONFIG_SCHEMA_HELP,
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment config file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--output", help="output file path")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker process cap for trial batches")
        p.add_argument("-v", "--verbose", action="store_true")

    common(sub.add_parser("generate", help="draw a source ensemble and export it"))
    common(sub.add_parser("project", help="temporally project an ensemble and export Y"))
    common(sub.add_parser("simulate", help="run all configured trials and export records"))
    common(sub.add_parser("decode", help="rerun one trial deterministically, export reconstruction"))
    p = sub.add_parser("re-estimate", help="estimate the restricted-eigenvalue level of the transfer matrix")
    common(p)
    p.add_argument("--sparsity", type=int, help="cone sparsity (default k2)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--supports", type=int, default=50)
    p.add_argument("--vectors", type=int, default=50)
    p = sub.add_parser("cascade-check", help="probe the RE cascade inequalities")
    common(p)
    p.add_argument("--triples", type=int, default=20)
    p.add_argument("--vectors", type=int, default=50)
    p = sub.add_parser("trial", help="run a single trial and print its record")
    common(p)
    p.add_argument("--index", type=int, default=0, help="trial index")
    p = sub.add_parser("sweep", help="sweep one axis and export per-cell statistics")
    common(p)
    p.add_argument("--axis", required=True, choices=harness.SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated ascending values")
    p = sub.add_parser("calibrate", help="calibrate the budget constant c on pilot trials")
    common(p)
    p.add_argument("--pilot-trials", type=int, default=30)
    p.add_argument("--target", type=float, default=0.9)
    p = sub.add_parser("budget", help="evaluate the network-use budget formula")
    for flag in ("--k1", "--k2", "--n", "--N", "--m"):
        p.add_argument(flag, type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    return parser


def _load(args) -> harness.ExperimentConfig:
    """Config with seed precedence: --seed flag > config file > CSNC_SEED env var."""
    import re
    from dataclasses import replace

    cfg = harness.load_config(args.config)
    with open(args.config) as fh:
        file_has_seed = re.search(r"^\s*master_seed\s*=", fh.read(), re.M) is not None
    if args.seed is not None:
        cfg = replace(cfg, master_seed=Seed(args.seed))
    elif not file_has_seed and os.environ.get("CSNC_SEED"):
        cfg = replace(cfg, master_seed=Seed(int(os.environ["CSNC_SEED"])))
    return cfg


def _transfer_for(cfg, seed):
    return harness._make_transfer(cfg, seed)


def dispatch(args) -> int:
    verb = args.verb

    if verb == "budget":
        plan = harness.theorem_budget(args.c, args.k1, args.k2, args.n, args.N, args.m, args.sigma, args.D)
        baseline = harness.naive_baseline(args.n, args.N, args.m, args.sigma, args.D)
        print(f"c_use = {plan.c_use:.6g}")
        print(f"suggested m1 = {plan.m1}, m2 = {plan.m2}")
        print(f"naive baseline = {baseline:.6g}")
        return EXIT_OK

    cfg = _load(args)
    p = cfg.profile
    seed = cfg.master_seed
    out = args.output

    if verb == "generate":
        dicts = sources.make_dictionary_pair(cfg.kind_phi, cfg.kind_psi, p.n, p.N, seed.child(1))
        ens = sources.generate_ensemble(p, dicts, (cfg.amp_lo, cfg.amp_hi), seed.child(2))
        path = out or "ensemble.csv"
        sources.save_ensemble(ens, path, dicts, seed=seed.child(2), dict_seed=seed.child(1))
        report = sources.verify_assumption(ens, dicts)
        print(f"wrote {path} (+.meta); temporal_ok={report.temporal_ok} "
              f"spatial_ok={report.spatial_ok} worst_residual={report.worst_residual:.3g}")
        return EXIT_OK if (report.temporal_ok and report.spatial_ok) else EXIT_FAIL

    if verb == "project":
        dicts = sources.make_dictionary_pair(cfg.kind_phi, cfg.kind_psi, p.n, p.N, seed.child(1))
        ens = sources.generate_ensemble(p, dicts, (cfg.amp_lo, cfg.amp_hi), seed.child(2))
        op = precoder.make_projection(cfg.m1, p.n, cfg.projection_family, seed.child(3))
        Y = precoder.temporal_project(ens, op)
        path = out or "projected.csv"
        np.savetxt(path, Y, delimiter=",", fmt="%.17g")
        print(f"wrote {path} ({Y.shape[0]} x {Y.shape[1]})")
        return EXIT_OK

    if verb == "simulate":
        records = harness.run_trials(cfg, range(cfg.trials), workers=args.threads)
        path = out or "results.csv"
        harness.export_results(records, path)
        frac = sum(r.success for r in records) / len(records)
        harness.write_summary(path + ".summary.txt", {
            "trials": len(records),
            "success_fraction": f"{frac:.17g}",
            "median_max_distortion": f"{np.median([r.max_distortion for r in records]):.17g}",
            "c_use": records[0].c_use,
            "allowed_distortion": f"{cfg.D:.17g}",
        })
        print(f"wrote {path}; success fraction {frac:.3f}")
        return EXIT_OK

    if verb == "decode":
        record = harness.run_trial(cfg, 0)
        path = out or "decode.csv"
        harness.export_results([record], path)
        print(f"wrote {path}; max distortion {record.max_distortion:.6g} "
              f"(allowed {cfg.D:.6g}), support recovery {record.support_recovery_rate:.3f}")
        return EXIT_OK

    if verb == "trial":
        record = harness.run_trial(cfg, args.index)
        if out:
            harness.export_results([record], out)
        print(f"trial {args.index}: max_distortion={record.max_distortion:.6g} "
              f"c_use={record.c_use} support_recovery={record.support_recovery_rate:.3f} "
              f"success={record.success}")
        return EXIT_OK

    if verb == "re-estimate":
        tm = _transfer_for(cfg, seed.child(5, 0))
        k = args.sparsity or p.k2
        est = re_analysis.estimate_re(tm.G, k, args.alpha, args.supports, args.vectors, seed.child(9))
        if out:
            re_analysis.save_re_report(est, out)
        print(f"gamma_hat = {est.gamma_hat:.6g} over {est.samples_used} samples "
              f"(alpha={args.alpha:g}, k={k})")
        return EXIT_OK if est.gamma_hat > 0 else EXIT_FAIL

    if verb == "cascade-check":
        rng_seed = seed.child(10)
        total_left = total_right = total_skip = 0
        worst = float("inf")
        for i in range(args.triples):
            s = rng_seed.child(i)
            G = s.child(0).rng().normal(size=(cfg.m2, p.N))
            C1 = np.eye(cfg.m2) + 0.2 * s.child(1).rng().normal(size=(cfg.m2, cfg.m2)) / np.sqrt(cfg.m2)
            # C2 perturbation kept small so cone membership passes often
            C2 = np.eye(p.N) + 0.05 * s.child(2).rng().normal(size=(p.N, p.N)) / np.sqrt(p.N)
            support = tuple(np.sort(s.child(3).rng().choice(p.N, size=p.k2, replace=False)))
            spec = re_analysis.ConeSpec(p.N, support, 1.0)
            rep = re_analysis.cascade_check(G, C1, C2, spec, args.vectors, s.child(4))
            total_left += rep.violations_left
            total_right += rep.violations_right
            total_skip += rep.membership_skipped
            worst = min(worst, rep.worst_margin)
        print(f"triples={args.triples} vectors={args.vectors} "
              f"violations_left={total_left} violations_right={total_right} "
              f"membership_skipped={total_skip} worst_margin={worst:.3g}")
        return EXIT_OK if total_left == 0 and total_right == 0 else EXIT_FAIL

    if verb == "sweep":
        values = [float(v) for v in args.values.split(",")]
        result = harness.sweep(cfg, args.axis, values, workers=args.threads)
        path = out or f"sweep_{args.axis}.csv"
        harness.export_sweep(result, path)
        slope = "n/a" if result.slope is None else f"{result.slope:.4f}"
        print(f"wrote {path}; fitted slope {slope}")
        return EXIT_OK

    if verb == "calibrate":
        result = harness.calibrate_c(cfg, pilot_trials=args.pilot_trials,
                                     target=args.target, workers=args.threads)
        plan = result.plan
        baseline = harness.naive_baseline(p.n, p.N, cfg.m, cfg.sigma, cfg.D)
        print(f"c = {result.c:.6g} -> c_use = {plan.c_use:.6g} (m1={plan.m1}, m2={plan.m2}), "
              f"pilot success {result.success_fraction:.3f}")
        if out:
            harness.write_summary(out, {
                "c": f"{result.c:.17g}",
                "c_use": f"{plan.c_use:.17g}",
                "m1": plan.m1, "m2": plan.m2,
                "pilot_success_fraction": f"{result.success_fraction:.17g}",
                "naive_baseline": f"{baseline:.17g}",
                "budget_over_baseline": f"{plan.c_use / baseline:.17g}" if baseline > 0 else "inf",
                "calibration_target": f"{args.target:.17g}",
            })
        return EXIT_OK

    raise AssertionError(f"unhandled verb {verb}")  # parser prevents this


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return dispatch(args)
    except harness.CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
