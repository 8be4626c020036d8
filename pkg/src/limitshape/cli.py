"""Command line front end.

    limitshape <calibrate|sample|condition|verify|profile|oracle>
               --config FILE [--seed N] [--out DIR] [--workers N]

sample/condition also accept direct flags (--n1 --n2 --curve ...).
Exit codes: 0 pass, 2 acceptance-threshold failure, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import curve as _curve
from . import measure as _measure
from . import metrics as _metrics
from . import oracle as _oracle
from . import report as _report
from . import sampler as _sampler
from . import studies as _studies
from .config import ExperimentConfig, curve_from_spec
from .errors import Exhausted, LimitShapeError


def load_thresholds() -> dict:
    with resources.files("limitshape").joinpath("thresholds.json").open("r") as fh:
        return json.load(fh)


def _parse_curve_arg(text: str) -> dict:
    if os.path.exists(text):
        with open(text, "r", encoding="utf-8") as fh:
            return json.load(fh)
    if text.lstrip().startswith("{"):
        return json.loads(text)
    name, _, param = text.partition(":")
    spec: dict = {"name": name}
    if param:
        key = "c" if name == "parabola" else "p"
        spec[key] = float(param)
    return {"preset": spec}


def _build_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        if args.n1 is None or args.curve is None:
            raise SystemExit("either --config or both --n1 and --curve are required")
        cfg = ExperimentConfig(mode=args.mode, curve_spec=_parse_curve_arg(args.curve),
                               n1_list=[args.n1])
    cfg.mode = args.mode
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    if getattr(args, "n1", None) is not None and not args.config:
        cfg.n1_list = [args.n1]
    if getattr(args, "n2", None) is not None:
        cfg.n2 = args.n2
    if getattr(args, "replicates", None) is not None:
        cfg.replicates = args.replicates
    if getattr(args, "max_attempts", None) is not None:
        cfg.max_attempts = args.max_attempts
    return cfg


def _params_from_config(cfg: ExperimentConfig, n1: int):
    curve = curve_from_spec(cfg.curve_spec)
    return _measure.MeasureParams.for_endpoint(curve, n1, cfg.n2)


def _cmd_calibrate(cfg: ExperimentConfig, thresholds: dict) -> int:
    params = _params_from_config(cfg, cfg.n1_list[0])
    curve = params.curve
    grid = _curve.slope_grid(curve, 64)
    d1, d2 = _measure.delta(curve, grid)
    resid = _measure.calibration_residual(curve, grid)
    _report.write_csv(os.path.join(cfg.out_dir, "calibration.csv"),
                      ["t", "delta1", "delta2", "residual"],
                      list(zip(grid, d1, d2, resid)))
    rep = _measure.moment_report(params)
    payload = {
        "n1": params.n1, "n2": params.n2,
        "alpha_n": params.alpha_n, "rho_n": params.rho_n,
        "kappa": _measure.KAPPA,
        "a_z": rep.a_z.tolist(), "K": rep.K.tolist(), "B": rep.B.tolist(),
        "detK": rep.detK, "density_at_n": rep.density_at_n,
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "moment_report.json"), "w",
              encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
    worst = float(np.max(np.abs(resid)))
    ok = _report.write_markdown_summary(
        os.path.join(cfg.out_dir, "summary.md"), "calibration",
        [("calibration_residual", worst < thresholds["calibration_residual_abs"],
          f"max |residual| = {worst:.3e}")])
    return 0 if ok else 2


def _cmd_sample(cfg: ExperimentConfig, conditioned: bool) -> int:
    params = _params_from_config(cfg, cfg.n1_list[0])
    records = []
    overlay = [_curve.discretize(params.curve, 512) * params.n1]
    attempts_rows = []
    for rep_idx in range(cfg.replicates):
        rng = _studies._replicate_rng(cfg.seed,
                                      _studies._DOMAIN_CONDITION if conditioned
                                      else _studies._DOMAIN_LIMIT_SHAPE,
                                      params.n1, rep_idx)
        if conditioned:
            res = _sampler.condition_on_endpoint(
                params, (params.n1, params.n2), cfg.max_attempts, rng)
            line = res.line
            attempts_rows.append((rep_idx, res.attempts, res.acceptance_rate))
        else:
            line = _sampler.assemble(_sampler.sample_configuration(params, rng))
        records.append(_report.line_record(line, params.n1, rep_idx))
        if len(overlay) < 9:
            overlay.append(line.vertices.astype(float))
    _report.write_lines_jsonl(os.path.join(cfg.out_dir, "lines.jsonl"), records)
    _report.write_svg(os.path.join(cfg.out_dir, "overlay.svg"), overlay)
    if attempts_rows:
        _report.write_csv(os.path.join(cfg.out_dir, "acceptance.csv"),
                          ["replicate", "attempts", "acceptance_rate"], attempts_rows)
    return 0


def _cmd_verify(cfg: ExperimentConfig, thresholds: dict) -> int:
    result = _studies.run_limit_shape_study(cfg)
    _report.write_csv(os.path.join(cfg.out_dir, "verify.csv"),
                      ["replicate", "n1", "d_hausdorff", "d_length", "argmax_t"],
                      result.details)
    if cfg.conditioned_n1:
        cond = _studies.run_conditioned_study(cfg)
        _report.write_csv(os.path.join(cfg.out_dir, "verify_conditioned.csv"),
                          ["replicate", "n1", "d_hausdorff", "d_length", "argmax_t"],
                          cond.details)
        result.rows.extend(cond.rows)
        for n1, lines in cond.extras.get("overlay", {}).items():
            result.extras.setdefault("overlay", {}).setdefault(n1, []).extend(lines)
    _report.convergence_csv(os.path.join(cfg.out_dir, "limit_shape_rows.csv"),
                            result.rows)
    checks = []
    eps = thresholds["limit_shape_eps_main"]
    stat = f"frac_dL_le_{eps:g}"
    fracs = [(r.n1, r.empirical) for r in result.rows if r.statistic == stat]
    monotone = all(b[1] >= a[1] - 1e-12 for a, b in zip(fracs, fracs[1:]))
    checks.append((f"fraction(d_L<={eps}) non-decreasing", monotone, f"{fracs}"))
    if fracs:
        checks.append((f"final fraction >= {thresholds['limit_shape_fraction_final']}",
                       fracs[-1][1] >= thresholds["limit_shape_fraction_final"],
                       f"final = {fracs[-1][1]:.3f}"))
    curve = curve_from_spec(cfg.curve_spec)
    overlay = [_curve.discretize(curve, 512)]
    for n1, lines in sorted(result.extras.get("overlay", {}).items()):
        overlay.extend(np.asarray(v) for v in lines[:3])
    _report.write_svg(os.path.join(cfg.out_dir, "overlay.svg"), overlay)
    ok = _report.write_markdown_summary(os.path.join(cfg.out_dir, "summary.md"),
                                        "limit shape verification", checks)
    return 0 if ok else 2


def _cmd_profile(cfg: ExperimentConfig, thresholds: dict) -> int:
    result = _studies.run_moment_study(cfg)
    _report.convergence_csv(os.path.join(cfg.out_dir, "moment_rows.csv"), result.rows)
    gaps = [(r.n1, r.empirical) for r in result.rows if r.statistic == "length_sup_gap"]
    checks = [("length_sup_gap decreasing",
               all(b[1] <= a[1] for a, b in zip(gaps, gaps[1:])), f"{gaps}"),
              ("final sup gap below threshold",
               bool(gaps and gaps[-1][1] < thresholds["mean_length_sup_gap_final"]),
               f"final = {gaps[-1][1]:.4f}" if gaps else "no data")]
    ratios = [r for r in result.rows if r.statistic.startswith("cov_ratio_")]
    final_n1 = cfg.n1_list[-1]
    band = (thresholds["covariance_ratio_lo"], thresholds["covariance_ratio_hi"])
    in_band = [band[0] <= r.ratio <= band[1] for r in ratios if r.n1 == final_n1]
    checks.append((f"cov ratios in {band} at n1={final_n1}",
                   bool(in_band) and all(in_band),
                   f"{[round(r.ratio, 4) for r in ratios if r.n1 == final_n1]}"))
    ok = _report.write_markdown_summary(os.path.join(cfg.out_dir, "summary.md"),
                                        "moment calibration", checks)
    return 0 if ok else 2


def _cmd_oracle(cfg: ExperimentConfig, thresholds: dict) -> int:
    instances = cfg.oracle_instances or [
        {"n": [1, 1], "cap_radius": 2, "nu_cap": 2},
        {"n": [2, 1], "cap_radius": 3, "nu_cap": 3},
        {"n": [1, 2], "cap_radius": 3, "nu_cap": 3},
        {"n": [3, 1], "cap_radius": 4, "nu_cap": 3},
        {"n": [2, 2], "cap_radius": 4, "nu_cap": 3},
    ]
    curve = curve_from_spec(cfg.curve_spec)
    rows = []
    worst_z = 0.0
    for idx, inst in enumerate(instances):
        n = tuple(inst["n"])
        params = _measure.MeasureParams.for_endpoint(curve, n[0], n[1])
        dist = _oracle.exact_conditional_oracle(params, inst["cap_radius"],
                                                inst["nu_cap"], n)
        rng = _studies._replicate_rng(cfg.seed, 4, n[0] * 1000 + n[1], idx)
        counts = {key: 0 for key, _ in dist.entries}
        accepted = 0
        draws = cfg.oracle_draws
        while accepted < draws:
            xi, (reps, dix, nus) = _sampler.sample_endpoints(
                params, draws, rng, collect_support=True)
            hits = np.nonzero((xi[:, 0] == n[0]) & (xi[:, 1] == n[1]))[0]
            h = _sampler._hazard(params)
            for w in hits:
                mask = reps == w
                support = {}
                for i, k in zip(dix[mask], nus[mask]):
                    key = (int(h.x1[i]), int(h.x2[i]))
                    support[key] = support.get(key, 0) + int(k)
                key = _oracle.configuration_key(_sampler.Configuration(support=support))
                counts[key] = counts.get(key, 0) + 1
                accepted += 1
                if accepted >= draws:
                    break
            if not hits.size:
                continue
        for key, p in dist.entries:
            obs = counts.get(key, 0)
            se = math.sqrt(max(p * (1 - p) * accepted, 1e-300))
            z = abs(obs - p * accepted) / se
            worst_z = max(worst_z, z)
            rows.append((f"{n}", "|".join(map(str, key)), p, obs / accepted, z))
    _report.write_csv(os.path.join(cfg.out_dir, "oracle.csv"),
                      ["instance", "line", "exact_p", "observed_freq", "z_score"],
                      rows)
    ok = _report.write_markdown_summary(
        os.path.join(cfg.out_dir, "summary.md"), "oracle agreement",
        [("all cells within sigma band", worst_z <= thresholds["oracle_sigma_band"],
          f"worst z = {worst_z:.2f}")])
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="limitshape", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("calibrate", "sample", "condition", "verify", "profile", "oracle"):
        p = sub.add_parser(mode)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=None)
        if mode in ("sample", "condition"):
            p.add_argument("--n1", type=int, default=None)
            p.add_argument("--n2", type=int, default=None)
            p.add_argument("--curve", default=None)
            p.add_argument("--replicates", type=int, default=None)
        if mode == "condition":
            p.add_argument("--max-attempts", dest="max_attempts", type=int,
                           default=None)
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        thresholds = load_thresholds()
        if args.mode == "calibrate":
            return _cmd_calibrate(cfg, thresholds)
        if args.mode == "sample":
            return _cmd_sample(cfg, conditioned=False)
        if args.mode == "condition":
            return _cmd_sample(cfg, conditioned=True)
        if args.mode == "verify":
            return _cmd_verify(cfg, thresholds)
        if args.mode == "profile":
            return _cmd_profile(cfg, thresholds)
        if args.mode == "oracle":
            return _cmd_oracle(cfg, thresholds)
        return 1
    except Exhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LimitShapeError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
