"""Command-line drivers: single runs, ensembles, rate sweeps, side-by-side
system comparisons on shared noise, and the verification suites.

    mirrorflow simulate --config scenario.cfg --out results/
    mirrorflow ensemble --config scenario.cfg
    mirrorflow rates    --config sweep.cfg
    mirrorflow compare  --config scenario.cfg
    mirrorflow verify [check ...]

Every run writes CSV data plus a manifest that pins the configuration hash,
step size, and per-trajectory seeds; rerunning from a manifest's
configuration reproduces the outputs bit for bit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import presets
from .analysis import (
    EnergyContext,
    ensemble,
    ensemble_to_csv,
    expected_value_bound,
    fit_rate_exponent,
)
from .config import (
    ScenarioConfig,
    build_spec,
    emit_config,
    parse_config,
    with_overrides,
    write_manifest,
)
from .dynamics import simulate
from .errors import ConfigError
from .noise import NoiseStream
from .schedules import optimal_amd_exponents, optimal_smd_exponent
from .verify import CHECK_NAMES, Verifier


def _load_config(args) -> ScenarioConfig:
    cfg = parse_config(Path(args.config)) if args.config else ScenarioConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    return with_overrides(cfg, **overrides) if overrides else cfg


def _outdir(cfg: ScenarioConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _maybe_energy_context(spec, cert):
    if cert.boundary or spec.kind == "nesterov":
        return None
    return EnergyContext(spec.mmap, spec.objective, cert, spec.rates)


def _gap_bound_fn(spec, cert):
    ctx = _maybe_energy_context(spec, cert)
    if ctx is None or spec.kind not in ("samd", "amd"):
        return None
    l0 = ctx.initial_value(spec.x0, spec.z0)
    return lambda t: expected_value_bound(ctx, spec.noise, l0, t)


def _noise_power(spec):
    try:
        return spec.noise.sigma_star_power()
    except ValueError:
        return None


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    spec, cert = build_spec(cfg)
    out = _outdir(cfg)
    stream = NoiseStream(cfg.seed, 0) if spec.is_stochastic else None
    traj = simulate(
        spec, cert, t_end=cfg.t_end, h=cfg.h,
        record_stride=cfg.record_stride, stream=stream,
    )
    traj.to_csv(out / "trajectory_000.csv")
    (out / "scenario.cfg").write_text(emit_config(cfg))
    write_manifest(out / "manifest.txt", cfg, "simulate",
                   {"trajectories": 1, "f_star": repr(cert.f_star)})
    if args.plots:
        from .svg import line_chart

        series = [("gap", traj.times, traj.gap)]
        if traj.has_energy:
            series.append(("energy", traj.times, traj.energy))
        line_chart(out / "trajectory_000.svg", series,
                   title=f"{cfg.system_kind} run", ylabel="value")
    print(f"wrote {out / 'trajectory_000.csv'}")
    return 0


def cmd_ensemble(args) -> int:
    cfg = _load_config(args)
    spec, cert = build_spec(cfg)
    out = _outdir(cfg)
    stats, trajs = ensemble(
        spec, cert, t_end=cfg.t_end, h=cfg.h, record_stride=cfg.record_stride,
        count=cfg.count, base_seed=cfg.seed, workers=cfg.threads,
    )
    ensemble_to_csv(
        stats, out / "ensemble.csv",
        gap_bound=_gap_bound_fn(spec, cert),
        eta=spec.rates.eta, sigma_star=_noise_power(spec), t0=cfg.t0,
    )
    for i, traj in enumerate(trajs):
        traj.to_csv(out / f"trajectory_{i:03d}.csv")
    (out / "scenario.cfg").write_text(emit_config(cfg))
    write_manifest(out / "manifest.txt", cfg, "ensemble",
                   {"trajectories": cfg.count, "f_star": repr(cert.f_star)})
    if args.plots:
        from .svg import line_chart

        series = [("mean gap", stats.times, stats.mean_gap)]
        if stats.mean_energy is not None:
            series.append(("mean energy", stats.times, stats.mean_energy))
        line_chart(out / "ensemble.svg", series,
                   title=f"{cfg.system_kind} ensemble (n={cfg.count})", ylabel="value")
    print(f"wrote {out / 'ensemble.csv'} and {cfg.count} trajectory files")
    return 0


def _resolve_alpha_r(token: str, alpha_sigma: float, alpha_s: float) -> float:
    if token.startswith("auto"):
        base = optimal_amd_exponents(alpha_sigma, alpha_s)
        return base + float(token[4:]) if len(token) > 4 else base
    return float(token)


def cmd_rates(args) -> int:
    """Sweep noise and rate exponents; fit the decay of the mean gap per
    cell and flag the empirically best energy-weight exponent."""
    cfg = _load_config(args)
    out = _outdir(cfg)
    rows = []
    for alpha_sigma in cfg.sweep_alpha_sigma:
        for alpha_s in cfg.sweep_alpha_s:
            cell = []
            for token in cfg.sweep_alpha_r:
                try:
                    alpha_r = _resolve_alpha_r(token, alpha_sigma, alpha_s)
                except Exception as exc:
                    print(f"skip alpha_r={token}: {exc}", file=sys.stderr)
                    continue
                if alpha_r <= 0:
                    continue
                run_cfg = with_overrides(
                    cfg, system_kind="samd", alpha_r=alpha_r, alpha_s=alpha_s,
                    alpha_sigma=alpha_sigma,
                )
                spec, cert = build_spec(run_cfg)
                stats, _ = ensemble(
                    spec, cert, t_end=cfg.t_end, h=cfg.h,
                    record_stride=cfg.record_stride, count=cfg.count,
                    base_seed=cfg.seed, workers=cfg.threads,
                )
                fit = fit_rate_exponent(
                    stats.times, stats.mean_gap, (cfg.t_end / 10.0, cfg.t_end)
                )
                bound_slope = max(
                    alpha_s - alpha_r, alpha_r + 2.0 * alpha_sigma - alpha_s - 1.0
                )
                cell.append({
                    "alpha_sigma": alpha_sigma,
                    "alpha_s": alpha_s,
                    "alpha_r": alpha_r,
                    "slope": fit.slope,
                    "stderr": fit.stderr,
                    "predicted_slope": alpha_sigma - 0.5,
                    "bound_slope": bound_slope,
                })
            if cell:
                best = min(cell, key=lambda r: r["slope"])
                for r in cell:
                    r["best_in_cell"] = int(r is best)
                rows.extend(cell)
    header = ["alpha_sigma", "alpha_s", "alpha_r", "slope", "stderr",
              "predicted_slope", "bound_slope", "best_in_cell"]
    path = out / "rates.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k])
                              for k in header) + "\n")
    write_manifest(out / "manifest.txt", cfg, "rates", {"rows": len(rows)})
    for r in rows:
        flag = " (best)" if r["best_in_cell"] else ""
        print(
            f"alpha_sigma={r['alpha_sigma']:+.2f} alpha_s={r['alpha_s']:.2f} "
            f"alpha_r={r['alpha_r']:.2f}: slope={r['slope']:+.3f} "
            f"predicted={r['predicted_slope']:+.3f}{flag}"
        )
    print(f"wrote {path}")
    return 0


def cmd_compare(args) -> int:
    """Non-accelerated versus averaged stochastic runs on identical noise
    streams, each configured by its optimal exponent rule."""
    cfg = _load_config(args)
    out = _outdir(cfg)
    choice = optimal_smd_exponent(cfg.alpha_sigma)
    smd_cfg = with_overrides(cfg, system_kind="smd", alpha_s=choice.alpha_s)
    samd_cfg = with_overrides(
        cfg, system_kind="samd", alpha_s=choice.alpha_s, alpha_r="auto"
    )
    results = {}
    for label, run_cfg in (("smd", smd_cfg), ("samd", samd_cfg)):
        spec, cert = build_spec(run_cfg)
        stats, _ = ensemble(
            spec, cert, t_end=cfg.t_end, h=cfg.h, record_stride=cfg.record_stride,
            count=cfg.count, base_seed=cfg.seed, workers=cfg.threads,
        )
        results[label] = stats
    path = out / "compare.csv"
    smd, samd = results["smd"], results["samd"]

    def cell(arr, i):
        return "" if arr is None else repr(float(arr[i]))

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,mean_gap_smd,std_gap_smd,mean_gap_samd,std_gap_samd\n")
        for i, t in enumerate(smd.times):
            row = [
                repr(float(t)),
                repr(float(smd.mean_gap[i])),
                cell(smd.std_gap, i),
                repr(float(samd.mean_gap[i])),
                cell(samd.std_gap, i),
            ]
            fh.write(",".join(row) + "\n")
    write_manifest(out / "manifest.txt", cfg, "compare",
                   {"alpha_s": choice.alpha_s,
                    "predicted_rate_exponent": choice.rate_exponent})
    if args.plots:
        from .svg import line_chart

        line_chart(
            out / "compare.svg",
            [("smd mean gap", smd.times, smd.mean_gap),
             ("samd mean gap", samd.times, samd.mean_gap)],
            title=f"alpha_sigma = {cfg.alpha_sigma}", ylabel="gap",
        )
    for label, stats in results.items():
        fit = fit_rate_exponent(
            stats.times, stats.mean_gap, (cfg.t_end / 10.0, cfg.t_end)
        )
        print(f"{label}: fitted slope {fit.slope:+.3f} (stderr {fit.stderr:.3f})")
    print(f"wrote {path}")
    return 0


def cmd_verify(args) -> int:
    names = args.checks or None
    verifier = Verifier(
        base_seed=args.seed if args.seed is not None else presets.DEFAULT_BASE_SEED,
        workers=args.threads or 1,
    )
    results = verifier.run(names)
    for res in results:
        print(res.line())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = out / "verify.txt"
        report.write_text("".join(res.line() + "\n" for res in results))
        print(f"wrote {report}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorflow",
        description="Continuous-time mirror descent dynamics simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to a scenario file (flat key = value)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--threads", type=int, help="ensemble worker threads")
        p.add_argument("--plots", action="store_true",
                       help="also write self-contained SVG charts")

    p = sub.add_parser("simulate", help="one trajectory to CSV")
    add_common(p, config_required=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ensemble", help="seeded ensemble with statistics")
    add_common(p, config_required=False)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("rates", help="exponent sweep with fitted decay rates")
    add_common(p, config_required=False)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("compare", help="paired smd/samd ensembles on shared noise")
    add_common(p, config_required=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run named verification suites")
    p.add_argument("checks", nargs="*", metavar="check",
                   help=f"subset of: {', '.join(CHECK_NAMES)} (default: all)")
    p.add_argument("--out", help="also write the report to this directory")
    p.add_argument("--seed", type=int, help="base seed override")
    p.add_argument("--threads", type=int, help="ensemble worker threads")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
