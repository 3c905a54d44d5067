"""Command-line interface.

Subcommands: ``simulate`` (replication study), ``calibrate`` (infection
rate vs transmission probability), ``estimate`` (risk scores and AUCs on
real participant data), ``project`` (venue-to-venue edge list).

Exit codes: 0 success, 2 input error, 3 degenerate study.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import io as vio
from .baselines import auc, fit_logistic, incidence_rate, predict_logistic
from .errors import DegenerateStudyError, InputError, VenueRiskError
from .estimator import estimate_q, estimate_risk
from .harness import (
    PREDICTOR_NAMES,
    StudyConfig,
    calibrate_pi,
    run_replications,
    summarize,
)
from .network import project_venue_graph
from .scenarios import SCENARIO_KINDS, ScenarioSpec, TwoClusterSpec
from .types import AffiliationNetwork


def _study_config(config: dict, args) -> StudyConfig:
    """Merge a flat config mapping with CLI overrides into a StudyConfig."""
    def pick(key, default=None):
        return config.get(key, default)

    pi_values = args.pi if getattr(args, "pi", None) else pick("pi_values")
    scenario_kind = getattr(args, "scenario", None) or pick("scenario", "perfect")
    scenario = ScenarioSpec(
        kind=scenario_kind,
        group_size=int(pick("group_size", 3)),
        drop_count=int(pick("drop_count", 3)),
        contamination_fraction=float(pick("contamination_fraction", 0.5)),
    )
    two_cluster = None
    if getattr(args, "two_cluster", False) or pick("two_cluster", False):
        two_cluster = TwoClusterSpec(
            renamed_count=int(pick("renamed_count", 10)),
            conversion_prob=float(pick("conversion_prob", 0.75)),
        )
    kwargs = dict(
        n_sample=int(_require(config, "n_sample")),
        population_multiplier=int(pick("population_multiplier", 5)),
        replications=int(
            args.reps if getattr(args, "reps", None) is not None else pick("replications", 1000)
        ),
        window_days=float(pick("window_days", 182.0)),
        scenario=scenario,
        two_cluster=two_cluster,
        master_seed=int(
            args.seed if getattr(args, "seed", None) is not None else pick("master_seed", 0)
        ),
        n_jobs=int(pick("n_jobs", 1)),
        significance_method=str(pick("significance_method", "t")),
        transmit_first_window=bool(pick("transmit_first_window", False)),
    )
    if pi_values:
        kwargs["pi_values"] = tuple(float(p) for p in pi_values)
    if pick("followup_days") is not None:
        kwargs["followup_days"] = float(pick("followup_days"))
    if pick("base_window_days") is not None:
        kwargs["base_window_days"] = float(pick("base_window_days"))
    return StudyConfig(**kwargs)


def _require(config: dict, key: str):
    if key not in config or config[key] is None:
        raise InputError(f"config is missing required key {key!r}")
    return config[key]


def _load_base(config: dict, config_path: Path) -> vio.ParticipantData:
    data_path = Path(_require(config, "data"))
    if not data_path.is_absolute():
        data_path = config_path.parent / data_path
    return vio.load_participants(data_path)


def _cmd_simulate(args) -> int:
    config_path = Path(args.config)
    config = vio.load_config(config_path)
    cfg = _study_config(config, args)
    base = _load_base(config, config_path).sample
    raw = run_replications(cfg, base)
    summary = summarize(cfg, base, raw)
    paths = vio.write_results(summary, raw, args.out)
    for path in paths:
        print(path)
    return 0


def _cmd_calibrate(args) -> int:
    config_path = Path(args.config)
    config = vio.load_config(config_path)
    cfg = _study_config(config, args)
    base = _load_base(config, config_path).sample
    grid = [float(v) for v in args.pi_grid.split(",") if v.strip()]
    curve = calibrate_pi(base, grid, args.reps, cfg)
    print(vio.write_calibration(curve, args.out))
    return 0


def _cmd_estimate(args) -> int:
    data = vio.load_participants(args.data)
    if data.sample.n_people == 0:
        raise InputError(f"{args.data}: no participant rows")
    pi = float(args.pi)
    sample = data.sample
    q_hat = estimate_q(sample)
    r_hat = estimate_risk(sample, q_hat, pi).r_hat

    w2 = np.array(
        [-1 if r.status_w2 is None else r.status_w2 for r in data.records], dtype=np.int64
    )
    has_w2 = w2 >= 0
    active = np.flatnonzero(sample.z.sum(axis=0) > 0)
    multi = sample.z[:, active]
    total = sample.z.sum(axis=1, keepdims=True)

    fits = {
        "mlr_w1": fit_logistic(multi, sample.baseline),
        "slr_w1": fit_logistic(total, sample.baseline),
    }
    if has_w2.any():
        fits["mlr_w2"] = fit_logistic(multi[has_w2], w2[has_w2])
        fits["slr_w2"] = fit_logistic(total[has_w2], w2[has_w2])
    scores = {
        name: predict_logistic(fit, multi if name.startswith("mlr") else total)
        for name, fit in fits.items()
    }
    scores["venue_risk"] = r_hat

    eval_mask = (sample.baseline == 0) & has_w2
    aucs = {}
    for name in PREDICTOR_NAMES:
        value = None
        if name in scores and eval_mask.any():
            outcomes = w2[eval_mask]
            if 0 < outcomes.sum() < outcomes.size:
                value = auc(scores[name][eval_mask], outcomes)
        aucs[name] = value

    followups = [r for r in data.followups() if r.status_w1 == 0 and r.status_w2 is not None]
    incidence = incidence_rate(followups) if followups else None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    q_path = out / "q_hat.csv"
    with q_path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["venue", "total_encounters", "q_hat"])
        totals = sample.z.sum(axis=0)
        for j, name in enumerate(data.venue_names):
            writer.writerow(
                [
                    name,
                    vio._fmt(totals[j]),
                    vio._fmt(q_hat.values[j]) if q_hat.defined[j] else "",
                ]
            )
    scores_path = out / "risk_scores.csv"
    with scores_path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["person_id", "status_w1", "status_w2", "r_hat"]
            + [f"score_{n}" for n in PREDICTOR_NAMES if n != "venue_risk"]
        )
        for i, rec in enumerate(data.records):
            writer.writerow(
                [
                    rec.person_id,
                    rec.status_w1,
                    vio._fmt(rec.status_w2),
                    vio._fmt(r_hat[i]),
                ]
                + [
                    vio._fmt(scores[n][i]) if n in scores else ""
                    for n in PREDICTOR_NAMES
                    if n != "venue_risk"
                ]
            )
    metrics_path = vio.write_json(
        {
            "pi": pi,
            "n_participants": sample.n_people,
            "n_venues": sample.n_venues,
            "n_wave2": int(has_w2.sum()),
            "n_eval": int(eval_mask.sum()),
            "new_infections": int(w2[eval_mask].sum()) if eval_mask.any() else 0,
            "incidence_per_100py": incidence,
            "auc": aucs,
        },
        out / "metrics.json",
    )
    for path in (q_path, scores_path, metrics_path):
        print(path)
    return 0


def _cmd_project(args) -> int:
    data = vio.load_participants(args.data)
    net = AffiliationNetwork(data.sample.z, data.sample.baseline)
    graph = project_venue_graph(net)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "venue_graph.csv"
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["venue_a", "venue_b", "shared_count"])
        for (a, b) in sorted(graph.edges):
            writer.writerow(
                [data.venue_names[a], data.venue_names[b], graph.edges[(a, b)]]
            )
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="venuerisk",
        description="Venue-affiliation HIV transmission simulator and risk estimators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a replication study")
    sim.add_argument("--config", required=True, help="flat JSON config file")
    sim.add_argument(
        "--pi", type=float, action="append", help="transmission probability (repeatable)"
    )
    sim.add_argument("--scenario", choices=SCENARIO_KINDS)
    sim.add_argument("--two-cluster", action="store_true", dest="two_cluster")
    sim.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    sim.add_argument("--reps", type=int, help="replications per pi value")
    sim.add_argument("--out", default="results", help="output directory")
    sim.set_defaults(func=_cmd_simulate)

    cal = sub.add_parser("calibrate", help="sweep pi against mean infection rate")
    cal.add_argument("--config", required=True)
    cal.add_argument("--pi-grid", required=True, help="comma-separated pi values")
    cal.add_argument("--reps", type=int, required=True)
    cal.add_argument("--out", default="results")
    cal.add_argument("--seed", type=int)
    cal.set_defaults(func=_cmd_calibrate)

    est = sub.add_parser("estimate", help="risk scores, baselines and AUC on real data")
    est.add_argument("--data", required=True, help="participants CSV")
    est.add_argument("--pi", type=float, required=True)
    est.add_argument("--out", default="results")
    est.set_defaults(func=_cmd_estimate)

    proj = sub.add_parser("project", help="venue-to-venue shared-participant edges")
    proj.add_argument("--data", required=True, help="participants CSV")
    proj.add_argument("--out", default="results")
    proj.set_defaults(func=_cmd_project)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateStudyError as exc:
        print(f"degenerate study: {exc}", file=sys.stderr)
        return 3
    except (InputError, VenueRiskError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
