"""Command line entry point: generate, run, compare, metrics.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import InputError
from .harness.compare import compare, parse_methods
from .harness.config import RunConfig, load_config
from .harness.io import (
    read_gt,
    read_records,
    read_trajectory,
    records_series,
    write_gt,
    write_records,
    write_trajectory,
)
from .harness.pipeline import METHODS, run_pipeline
from .harness.scenario import generate_scenario
from .metrics import summarize

log = logging.getLogger("twist_retarget")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _config(path) -> RunConfig:
    return load_config(path) if path else RunConfig(scenarios=())


def _dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_generate(args) -> int:
    sc = load_config(args.config).scenario(args.scenario)
    traj, gt = generate_scenario(sc)
    write_trajectory(args.out, traj)
    write_gt(args.gt, gt)
    log.info("wrote %d frames of %s", len(traj), sc.name)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args.config)
    traj = read_trajectory(args.traj)
    gt = read_gt(args.gt) if args.gt else None
    if gt is not None and len(gt.t) != len(traj):
        raise InputError("ground truth and trajectory lengths differ")
    model = cfg.model()
    records = run_pipeline(traj, gt, args.method, model, cfg.pipeline)
    write_records(args.out, records, model.n_dof)
    log.info("wrote %d records", len(records))
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    methods = parse_methods(args.methods)
    report = compare(cfg, methods)
    _dump_json(report.to_dict(), args.report)
    if args.records_dir:
        out = Path(args.records_dir)
        out.mkdir(parents=True, exist_ok=True)
        n_dof = cfg.model().n_dof
        for s in report.scenarios:
            write_gt(out / f"{s.name}_gt.csv", s.gt)
            for m in methods:
                write_records(out / f"{s.name}_{m}.csv", s.records[m], n_dof)
    if args.timing:
        _dump_json(report.timing, args.timing)
    for m in methods:
        p = report.pooled[m]
        log.info("%-8s rmse %.2f  mae %.2f  corr %.3f  axis %.2f deg", m, p.rmse, p.mae, p.corr, p.axis_dev_mean)
    return EXIT_OK


def cmd_metrics(args) -> int:
    rows = read_records(args.records)
    gt = read_gt(args.gt)
    if len(rows) != len(gt.t) or not np.array_equal(np.array([r["t"] for r in rows]), gt.t):
        raise InputError("records and ground truth are not on the same time stamps")
    rep = summarize(records_series(rows), gt, [r["axis_dev_deg"] for r in rows])
    _dump_json(rep.to_dict(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twist-retarget", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="synthesize a trajectory and its ground truth")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True, help="trajectory JSONL")
    g.add_argument("--gt", required=True, help="ground-truth CSV")
    g.add_argument("--scenario", help="scenario name when the config holds several")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="retarget one trajectory")
    r.add_argument("--traj", required=True)
    r.add_argument("--method", required=True, choices=METHODS)
    r.add_argument("--config", help="run config (defaults when omitted)")
    r.add_argument("--out", required=True, help="per-frame records CSV")
    r.add_argument("--gt", help="ground-truth CSV to fill theta_gt_deg")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="run methods over the configured scenarios")
    c.add_argument("--config", required=True)
    c.add_argument("--methods", default=",".join(METHODS))
    c.add_argument("--report", required=True, help="report JSON")
    c.add_argument("--records-dir", help="also write per-scenario record and ground-truth CSVs")
    c.add_argument("--timing", help="write per-frame timing percentiles here")
    c.set_defaults(func=cmd_compare)

    m = sub.add_parser("metrics", help="metrics of a records CSV against ground truth")
    m.add_argument("--records", required=True)
    m.add_argument("--gt", required=True)
    m.add_argument("--out", help="write JSON here instead of stdout")
    m.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
