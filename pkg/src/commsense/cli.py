"""Command-line entry point: ``commsense generate | run | export``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiment import generate_dataset, run_cell, run_experiment
from .export import export_results, load_report
from .learning import save_model

log = logging.getLogger("commsense")


def _snr_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _assignment(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value


def _overrides(args) -> dict:
    out = dict(args.set or [])
    if getattr(args, "seed", None) is not None:
        out["master_seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        out["repetitions"] = args.reps
    if getattr(args, "family", None) is not None:
        out["family"] = args.family
    if getattr(args, "snr_db", None) is not None:
        out["snr_list_db"] = args.snr_db
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commsense", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults when omitted)")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--snr-db", type=_snr_list, help="comma-separated SNR list in dB")
        p.add_argument("--set", type=_assignment, action="append", metavar="KEY=VALUE",
                       help="override any config key (nested keys with dots, e.g. svm.C=1)")
        p.add_argument("--out", required=True, help="output directory")

    g = sub.add_parser("generate", help="simulate labelled CSI datasets")
    common(g)
    g.add_argument("--family", choices=("tdl", "cdl", "both"))

    r = sub.add_parser("run", help="run the sensing sweep and export results")
    common(r)
    r.add_argument("--family", choices=("tdl", "cdl", "both"))
    r.add_argument("--reps", type=int, help="seeds per (family, SNR) cell")
    r.add_argument("--workers", type=int, default=1, help="worker processes")
    r.add_argument("--format", default="csv,json")
    r.add_argument("--save-models", action="store_true", help="write the fitted PCA+SVM of every cell")

    e = sub.add_parser("export", help="re-export a saved report")
    e.add_argument("--report", required=True)
    e.add_argument("--format", default="csv,json")
    e.add_argument("--out", help="output directory (default: the report's directory)")
    return parser


def _generate(args) -> None:
    cfg = load_config(args.config, _overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fam in cfg.families:
        for snr in cfg.snr_list_db:
            path = out / f"dataset_{fam}_{snr:g}dB.csv"
            data = generate_dataset(cfg, fam, snr, out_path=path)
            print(f"{path}: {len(data)} samples")


def _run(args) -> None:
    cfg = load_config(args.config, _overrides(args))
    report = run_experiment(cfg, workers=args.workers)
    out = Path(args.out)
    export_results(report, out, args.format)
    if args.save_models:
        models = out / "models"
        models.mkdir(exist_ok=True)
        for c in report.cells:
            _, pca, svm = run_cell(cfg, c.family, c.snr_db, c.seed, return_models=True)
            save_model(models / f"model_{c.family}_{c.snr_db:g}dB_seed{c.seed}.json", pca, svm)
    for a in report.aggregates():
        print(f"{a['family']:>3} {a['snr_db']:6.1f} dB  accuracy mean {a['mean_accuracy']:.4f} "
              f"[{a['min_accuracy']:.4f}, {a['max_accuracy']:.4f}]  silhouette {a['mean_silhouette']:.3f}")


def _export(args) -> None:
    report = load_report(args.report)
    out = Path(args.out) if args.out else Path(args.report).parent
    for p in export_results(report, out, args.format):
        print(p)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"generate": _generate, "run": _run, "export": _export}[args.command]
    try:
        handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 2
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
