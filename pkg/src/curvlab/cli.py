"""Command-line front end.

Subcommands: simulate (run the flow from a config file), bifurcation
(sweep the stationary family and emit the curve), stability-table (exact
verdict table), unduloid (reconstruct a single profile), verify (run a
named check suite).  Every command writes a manifest next to its outputs
and renders a figure alongside the delimited data.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConfigError, CurvlabError, IntegrationError
from .flow import (
    FlowConfig,
    InitialCondition,
    conservation_drift,
    integrate,
    log_linear_fit,
)
from .geometry import WeightModel
from .io import RunManifest, fmt_float, parse_config, write_csv, write_json
from .speeds import speed_from_name
from .stability import (
    build_report,
    linear_eigenvalue,
    stability_table,
)
from .unduloid import BifurcationSample, UnduloidParams, default_s_grid, eta_curve, profile
from .verify import run_suite
from . import plots

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTEGRATION = 2


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("CURVLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(
                f"CURVLAB_THREADS must be an integer, got {env!r}",
                key="CURVLAB_THREADS",
            )
    return 1


def _parse_weight(text: str, n: int) -> WeightModel:
    if text.startswith("mixed-volume:"):
        return WeightModel.mixed_volume(int(text.split(":", 1)[1]), n)
    if text.startswith("coeffs:"):
        text = text.split(":", 1)[1]
    parts = [float(p) for p in text.split(",")]
    return WeightModel(tuple(parts))


def _parse_modes(text: str):
    """"1:0.05,2:-0.01" -> [(1, 0.05), (2, -0.01)]"""
    modes = []
    if not text:
        return modes
    for chunk in text.split(","):
        m, amp = chunk.split(":")
        modes.append((int(m), float(amp)))
    return modes


_SIM_KEYS = {
    "n", "d", "grid_n", "speed", "weight", "initial", "radius",
    "radius_factor", "s", "modes", "t_end", "rtol", "atol", "mode",
    "record_every", "stepper", "dt", "grid_mode", "save_profiles",
    "fit_window",
}


def _flow_config_from_file(path) -> tuple[FlowConfig, dict]:
    raw = parse_config(path)
    for key in raw:
        if key not in _SIM_KEYS:
            raise ConfigError(f"unknown config key {key!r}", key=key)

    def need(key):
        if key not in raw:
            raise ConfigError(f"missing config key {key!r}", key=key)
        return raw[key]

    def typed(key, conv, default=None):
        if key not in raw:
            return default
        try:
            return conv(raw[key])
        except (ValueError, TypeError):
            raise ConfigError(
                f"config key {key!r} has invalid value {raw[key]!r}", key=key
            )

    n = typed("n", int)
    if n is None:
        raise ConfigError("missing config key 'n'", key="n")
    d = typed("d", float, 1.0)
    speed = speed_from_name(need("speed"), n, d)
    if not speed.supports_flow():
        raise ConfigError(
            f"speed {speed.name!r} carries only cylinder-path data and "
            "cannot drive the flow", key="speed",
        )
    weight = _parse_weight(need("weight"), n)
    family = need("initial")
    params = {}
    if "radius" in raw:
        params["radius"] = typed("radius", float)
    if "radius_factor" in raw:
        params["radius_factor"] = typed("radius_factor", float)
    if "s" in raw:
        params["s"] = typed("s", float)
    params["modes"] = _parse_modes(raw.get("modes", ""))
    try:
        cfg = FlowConfig(
            n_dim=n,
            d=d,
            n_points=typed("grid_n", int, 128),
            speed=speed,
            weight=weight,
            initial=InitialCondition(family, params),
            t_end=typed("t_end", float, 1.0),
            rtol=typed("rtol", float, 1e-8),
            atol=typed("atol", float, 1e-8),
            mode=raw.get("mode", "full"),
            record_every=typed("record_every", float, 0.01),
            stepper=raw.get("stepper", "erk54"),
            dt=typed("dt", float),
            grid_mode=raw.get("grid_mode", "spectral-cosine"),
        )
    except CurvlabError as exc:
        raise ConfigError(str(exc), key=None)
    return cfg, raw


def cmd_simulate(args) -> int:
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    try:
        cfg, raw = _flow_config_from_file(args.config)
    except ConfigError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outputs = []
    exit_code = EXIT_OK
    termination = None
    try:
        traj = integrate(cfg)
    except IntegrationError as exc:
        report = {
            "status": "integration-error",
            "message": str(exc),
            "last_time": exc.last_time,
        }
        rp = os.path.join(outdir, "report.json")
        write_json(rp, report)
        outputs.append(rp)
        _manifest(args, "simulate", raw, outputs, outdir)
        print(f"error: integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    termination = traj.termination_reason
    if termination is not None:
        exit_code = EXIT_INTEGRATION

    csv_path = os.path.join(outdir, "trajectory.csv")
    write_csv(csv_path, ["time", "wvol", "sup_dev"],
              [(t, wv, sd) for t, wv, sd in
               zip(traj.times, traj.wvol, traj.sup_dev)])
    outputs.append(csv_path)

    if raw.get("save_profiles", "false").lower() in ("true", "1", "yes"):
        g = cfg.grid()
        for idx, state in enumerate(traj.states):
            pp = os.path.join(outdir, f"profile_{idx:04d}.csv")
            write_csv(pp, ["z", "rho"], list(zip(g.z, state)))
            outputs.append(pp)

    report = {
        "status": "terminated-early" if termination else "ok",
        "termination_reason": termination,
        "eta": traj.eta,
        "wvol_initial": traj.wvol[0],
        "wvol_drift": conservation_drift(traj),
        "step_stats": traj.step_stats,
    }
    lam1 = linear_eigenvalue(1, traj.eta, cfg.speed, cfg.n_dim, cfg.d)
    report["lambda1_prediction"] = lam1
    window = raw.get("fit_window")
    if window:
        lo, hi = (float(x) for x in window.split(","))
    else:
        lo, hi = 0.5 * cfg.t_end, cfg.t_end
    mask = (traj.times >= lo) & (traj.times <= hi) & (traj.sup_dev > 0)
    if int(mask.sum()) >= 5:
        rate, _, resid = log_linear_fit(traj.times[mask], traj.sup_dev[mask])
        report["decay_fit"] = {
            "window": [lo, hi],
            "rate": rate,
            "rms_residual": resid,
            "relative_gap_to_lambda1": abs(rate - lam1) / max(abs(lam1), 1e-30),
        }
        report["verdict_vs_linear_theory"] = (
            "consistent" if abs(rate - lam1) <= 0.05 * max(abs(lam1), 1e-30)
            else "inconsistent"
        )
    else:
        report["decay_fit"] = None
        report["verdict_vs_linear_theory"] = "not-enough-data"

    rp = os.path.join(outdir, "report.json")
    write_json(rp, report)
    outputs.append(rp)
    if not args.no_plot:
        fig = os.path.join(outdir, "trajectory.png")
        plots.plot_trajectory(traj, fig)
        outputs.append(fig)
    _manifest(args, "simulate", raw, outputs, outdir)
    if termination:
        print(f"terminated early: {termination} at t={traj.times[-1]:.6g}")
    else:
        print(f"ok: {len(traj.times)} records, wvol drift "
              f"{report['wvol_drift']:.3e}")
    return exit_code


def cmd_bifurcation(args) -> int:
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    n, b = args.n, args.b
    if not 0 <= b <= n - 1:
        print(f"error: need 0 <= b <= n-1, got n={n} b={b}", file=sys.stderr)
        return EXIT_CONFIG
    grid = default_s_grid(args.samples)
    threads = _threads(args)

    def one(s):
        try:
            return eta_curve(UnduloidParams(n, args.d, s), b)
        except CurvlabError as exc:
            print(f"warning: s={s:.4f} failed: {exc}", file=sys.stderr)
            return BifurcationSample(s, np.nan, np.nan, np.nan, np.nan, np.nan)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(one, grid))
    else:
        samples = [one(s) for s in grid]

    csv_path = os.path.join(outdir, f"bifurcation_n{n}_b{b}.csv")
    write_csv(csv_path, ["s", "eta", "eta_bar", "rho0", "H", "err_estimate"],
              [(r.s, r.eta, r.eta_bar, r.rho0, r.H,
                r.quadrature_error_estimate) for r in samples])
    outputs = [csv_path]
    if not args.no_plot:
        fig = os.path.join(outdir, f"bifurcation_n{n}_b{b}.png")
        good = [r for r in samples if np.isfinite(r.eta_bar)]
        plots.plot_bifurcation(good, n, b, fig)
        outputs.append(fig)
    _manifest(args, "bifurcation",
              {"n": n, "b": b, "d": args.d, "samples": args.samples},
              outputs, outdir)
    print(f"wrote {csv_path} ({len(samples)} samples)")
    return EXIT_OK


def cmd_stability_table(args) -> int:
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    rows = stability_table(args.n_max, args.b_max)
    csv_path = os.path.join(outdir, "stability_table.csv")
    write_csv(
        csv_path,
        ["n", "b", "condition_value_num", "condition_value_den", "stable"],
        [(r.n, r.b, r.condition.numerator, r.condition.denominator, r.stable)
         for r in rows],
    )
    outputs = [csv_path]
    if not args.no_plot:
        fig = os.path.join(outdir, "stability_table.png")
        plots.plot_stability_table(rows, fig)
        outputs.append(fig)
    if args.n is not None and args.b is not None:
        speed = speed_from_name(args.speed, args.n, args.d)
        report = build_report(speed, WeightModel.mixed_volume(args.b, args.n),
                              args.n, args.d)
        rp = os.path.join(outdir, f"stability_report_n{args.n}_b{args.b}.json")
        write_json(rp, report.as_dict())
        outputs.append(rp)
    _manifest(args, "stability-table",
              {"n_max": args.n_max, "b_max": args.b_max}, outputs, outdir)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_unduloid(args) -> int:
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    params = UnduloidParams(args.n, args.d, args.s)
    sample = eta_curve(params, args.b)
    prof = profile(params, args.grid_n)
    zs = np.linspace(0.0, args.d, args.grid_n)
    tag = f"n{args.n}_b{args.b}_s{args.s:g}"
    prof_path = os.path.join(outdir, f"unduloid_profile_{tag}.csv")
    write_csv(prof_path, ["z", "rho"], list(zip(zs, prof.values)))
    sample_path = os.path.join(outdir, f"unduloid_sample_{tag}.csv")
    write_csv(sample_path,
              ["s", "eta", "eta_bar", "rho0", "H", "err_estimate"],
              [(sample.s, sample.eta, sample.eta_bar, sample.rho0, sample.H,
                sample.quadrature_error_estimate)])
    outputs = [prof_path, sample_path]
    if not args.no_plot:
        fig = os.path.join(outdir, f"unduloid_profile_{tag}.png")
        plots.plot_profile(zs, prof.values, fig,
                           title=f"n={args.n}, s={args.s:g}")
        outputs.append(fig)
    _manifest(args, "unduloid",
              {"n": args.n, "b": args.b, "s": args.s, "grid_n": args.grid_n},
              outputs, outdir)
    print(f"wrote {prof_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    try:
        results = run_suite(args.suite, seed=args.seed)
    except CurvlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    all_pass = all(r["passed"] for r in results)
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"[{status}] {r['id']}: measured={_short(r['measured'])} "
              f"tol={r['tolerance']}")
    rp = os.path.join(outdir, f"verify_{args.suite}.json")
    write_json(rp, {"suite": args.suite, "seed": args.seed,
                    "all_passed": all_pass, "criteria": results})
    _manifest(args, "verify", {"suite": args.suite}, [rp], outdir)
    return EXIT_OK if all_pass else EXIT_CONFIG


def _short(measured):
    if isinstance(measured, float):
        return fmt_float(measured)
    return json.dumps(measured, default=str)[:120]


def _manifest(args, command, params, outputs, outdir):
    manifest = RunManifest(
        command=command,
        params={k: (v if isinstance(v, (int, float, str, bool, list, dict))
                    else str(v)) for k, v in params.items()},
        outputs=[os.path.basename(p) for p in outputs],
        seed=getattr(args, "seed", 0),
    )
    manifest.write(os.path.join(outdir, "manifest.json"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="curvlab",
        description="weighted-volume-preserving curvature flow laboratory",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (or CURVLAB_THREADS)")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering")

    p = sub.add_parser("simulate", help="integrate a flow from a config file")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bifurcation", help="sweep the stationary family")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_bifurcation)

    p = sub.add_parser("stability-table", help="exact stability verdicts")
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--b-max", type=int, default=12)
    p.add_argument("--n", type=int, default=None,
                   help="also emit a full report for this dimension")
    p.add_argument("--b", type=int, default=None,
                   help="weight index for the report")
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--speed", default="mean-curvature")
    common(p)
    p.set_defaults(func=cmd_stability_table)

    p = sub.add_parser("unduloid", help="reconstruct one stationary profile")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--grid-n", type=int, default=256)
    common(p)
    p.set_defaults(func=cmd_unduloid)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--suite", required=True)
    common(p)
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}" + (f" (key {exc.key!r})" if exc.key else ""),
              file=sys.stderr)
        return EXIT_CONFIG
    except CurvlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
