"""Command line front end: simulate, run, compare, export-features, eval."""

from __future__ import annotations

import argparse
import csv
import json
import os
from dataclasses import fields, replace

import numpy as np

from .dataset import export_training_data
from .experiments import GridCell, compare_estimators, write_comparison_csv
from .pipeline import RunConfig, process_stream
from .scenario import (
    Scenario,
    ScenarioConfig,
    build_scenario,
    read_manifest,
    wav_read,
    wav_write,
    write_manifest,
)


def _add_run_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with RunConfig fields")
    parser.add_argument("--shift", type=int)
    parser.add_argument("--partitions", type=int)
    parser.add_argument("--transition", type=float)
    parser.add_argument("--lambda-s", type=float, dest="lambda_s")
    parser.add_argument("--lambda-p", type=float, dest="lambda_p")
    parser.add_argument("--lambda-w", type=float, dest="lambda_w")
    parser.add_argument("--kappa", type=int)
    parser.add_argument("--eps1", type=float)
    parser.add_argument("--eps-reg", type=float, dest="eps_reg")
    parser.add_argument("--estimator", choices=["proposed", "baseline", "oracle"])
    parser.add_argument("--baseline-alpha", type=float, dest="baseline_alpha")
    parser.add_argument("--mask", choices=["unity", "oracle", "network"],
                        dest="mask_source")
    parser.add_argument("--weights", dest="weights_path")
    parser.add_argument("--sample-rate", type=int, dest="sample_rate")


def run_config_from_args(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            values.update(json.load(fh))
    names = {f.name for f in fields(RunConfig)}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    return RunConfig(**{k: v for k, v in values.items() if k in names})


def _load_scenario(args) -> Scenario:
    cfg = read_manifest(args.scenario)
    return build_scenario(cfg)


def cmd_simulate(args) -> int:
    cfg = ScenarioConfig(
        sample_rate=args.sample_rate or 16000,
        duration=args.duration,
        ner_db=args.ner_db,
        enr_db=args.enr_db,
        rir_len=args.rir_len,
        rir_t60=args.rir_t60,
        epc_times=tuple(args.epc or ()),
        seed=args.seed,
        near_end_silent=args.no_near_end,
    )
    scen = build_scenario(cfg)
    os.makedirs(args.out, exist_ok=True)
    for name in ("far_end", "near_end", "noise", "echo_early",
                 "echo_late", "mic"):
        wav_write(os.path.join(args.out, f"{name}.wav"),
                  getattr(scen, name), cfg.sample_rate)
    write_manifest(os.path.join(args.out, "manifest.json"), cfg)
    print(f"scenario written to {args.out}")
    return 0


def _write_report(out_dir, result, sample_rate):
    os.makedirs(out_dir, exist_ok=True)
    wav_write(os.path.join(out_dir, "near_end_estimate.wav"),
              result.s_hat, sample_rate)
    wav_write(os.path.join(out_dir, "echo_estimate.wav"),
              result.d_hat, sample_rate)
    with open(os.path.join(out_dir, "blocks.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block", "error_power", "mask_mean", "psi_s_mean",
                         "psi_p_mean", "psi_i_mean", "elapsed_s", "erle_db"])
        series = (result.metrics.erle_series
                  if result.metrics is not None else None)
        for rec in result.records:
            erle = f"{series[rec.index]:.3f}" if series is not None else ""
            writer.writerow([rec.index, rec.error_power, rec.mask_mean,
                             rec.psi_s_mean, rec.psi_p_mean, rec.psi_i_mean,
                             rec.elapsed_s, erle])
    if result.metrics is not None:
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(result.metrics.summary(), fh, indent=2)


def cmd_run(args) -> int:
    run_cfg = run_config_from_args(args)
    scenario = None
    if args.scenario:
        scenario = _load_scenario(args)
        far_end, mic = scenario.far_end, scenario.mic
        run_cfg = replace(run_cfg,
                          sample_rate=scenario.config.sample_rate)
    elif args.far_end and args.mic:
        far_end, fs1 = wav_read(args.far_end)
        mic, fs2 = wav_read(args.mic)
        if fs1 != fs2:
            raise SystemExit("far-end and mic sample rates differ")
        run_cfg = replace(run_cfg, sample_rate=fs1)
    else:
        raise SystemExit("provide --scenario or both --far-end and --mic")
    result = process_stream(run_cfg, far_end, mic, scenario)
    _write_report(args.out, result, run_cfg.sample_rate)
    if result.metrics is not None:
        print(json.dumps(result.metrics.summary(), indent=2))
    print(f"outputs written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    # like `run` but requires a scenario so every metric is defined
    if not args.scenario:
        raise SystemExit("eval requires --scenario (ground truth needed)")
    return cmd_run(args)


def cmd_compare(args) -> int:
    run_cfg = run_config_from_args(args)
    scen_cfg = ScenarioConfig(
        duration=args.duration,
        epc_times=(args.epc_time,),
        ner_db=args.ner_db,
        enr_db=args.enr_db,
        seed=args.seed,
        near_end_silent=args.no_near_end,
    )
    cells = [GridCell("baseline", a, args.mask_source or "oracle")
             for a in args.baseline_a]
    cells += [GridCell("proposed", a, args.mask_source or "oracle")
              for a in args.proposed_a]
    results = compare_estimators(cells, run_cfg, scen_cfg, args.scenarios)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    write_comparison_csv(args.out, results,
                         run_cfg.sample_rate / run_cfg.shift)
    for res in results:
        print(f"{res.cell.label}: steady {res.steady_state_db:.2f} dB, "
              f"recovery {res.recovery_time_s:.2f} s")
    return 0


def cmd_export_features(args) -> int:
    run_cfg = replace(run_config_from_args(args), mask_source="oracle")
    scenarios = []
    for k in range(args.scenarios):
        cfg = ScenarioConfig(duration=args.duration, seed=args.seed + k,
                             ner_db=args.ner_db, enr_db=args.enr_db)
        scenarios.append(build_scenario(cfg))
    dataset = export_training_data(args.out, run_cfg, scenarios)
    print(f"{dataset.features.shape[0]} frames written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kfaec",
        description="Partitioned-block Kalman AEC with mask postfiltering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a test scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--ner-db", type=float, default=0.0)
    p.add_argument("--enr-db", type=float, default=30.0)
    p.add_argument("--rir-len", type=int, default=2048)
    p.add_argument("--rir-t60", type=float, default=0.2)
    p.add_argument("--epc", type=float, action="append")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-rate", type=int)
    p.add_argument("--no-near-end", action="store_true")
    p.set_defaults(func=cmd_simulate)

    for name, func in (("run", cmd_run), ("eval", cmd_eval)):
        p = sub.add_parser(name)
        p.add_argument("--scenario", help="scenario manifest JSON")
        p.add_argument("--far-end", help="far-end WAV")
        p.add_argument("--mic", help="microphone WAV")
        p.add_argument("--out", required=True)
        _add_run_config_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("compare", help="estimator/transition grid comparison")
    p.add_argument("--out", required=True)
    p.add_argument("--scenarios", type=int, default=10)
    p.add_argument("--duration", type=float, default=16.0)
    p.add_argument("--epc-time", type=float, default=8.0)
    p.add_argument("--ner-db", type=float, default=0.0)
    p.add_argument("--enr-db", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-near-end", action="store_true")
    p.add_argument("--baseline-a", type=float, action="append", default=[])
    p.add_argument("--proposed-a", type=float, action="append", default=[])
    _add_run_config_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-features", help="write a training dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--scenarios", type=int, default=4)
    p.add_argument("--duration", type=float, default=8.0)
    p.add_argument("--ner-db", type=float, default=0.0)
    p.add_argument("--enr-db", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    _add_run_config_flags(p)
    p.set_defaults(func=cmd_export_features)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
