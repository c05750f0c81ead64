"""Write experiment reports as JSON and CSV files with deterministic bytes."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

from .experiment import ExperimentReport

__all__ = ["FORMATS", "export_results", "load_report", "report_json", "save_report"]

FORMATS = ("csv", "json")


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n"


def save_report(report: ExperimentReport, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.write_text(report_json(report), encoding="utf-8")
    return path


def load_report(path: str | os.PathLike) -> ExperimentReport:
    with open(path, encoding="utf-8") as fh:
        return ExperimentReport.from_dict(json.load(fh))


def _snr_tag(snr_db: float) -> str:
    return f"{snr_db:g}".replace("-", "m").replace(".", "p")


def _cell_stem(cell) -> str:
    return f"{cell.family}_{_snr_tag(cell.snr_db)}dB_seed{cell.seed}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def export_results(report: ExperimentReport, out_dir: str | os.PathLike, formats=FORMATS) -> list[Path]:
    """Write ``report.json`` and/or the CSV set; returns the written paths.

    CSV output: ``accuracy.csv`` (one row per cell), ``summary.csv`` (seed
    aggregates), and per cell ``confusion_<cell>.csv`` and
    ``scatter_<cell>.csv`` with columns (label, pc1, pc2, snr_db, family).
    """
    if isinstance(formats, str):
        formats = [f.strip() for f in formats.split(",") if f.strip()]
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise ValueError(f"unknown export format(s) {unknown}; choose from {FORMATS}")
    if not report.cells:
        raise ValueError("report has no cells")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        written.append(save_report(report, out / "report.json"))
    if "csv" in formats:
        p = out / "accuracy.csv"
        _write_csv(p, ["family", "snr_db", "seed", "accuracy", "silhouette", "n_train", "n_test"],
                   [[c.family, repr(c.snr_db), c.seed, repr(c.accuracy), repr(c.silhouette), c.n_train, c.n_test]
                    for c in report.cells])
        written.append(p)
        p = out / "summary.csv"
        keys = ["family", "snr_db", "n_seeds", "mean_accuracy", "min_accuracy", "max_accuracy", "mean_silhouette"]
        _write_csv(p, keys, [[a[k] if isinstance(a[k], (str, int)) else repr(a[k]) for k in keys]
                             for a in report.aggregates()])
        written.append(p)
        for c in report.cells:
            p = out / f"confusion_{_cell_stem(c)}.csv"
            _write_csv(p, ["true\\pred"] + c.classes, [[cls] + row for cls, row in zip(c.classes, c.confusion)])
            written.append(p)
            p = out / f"scatter_{_cell_stem(c)}.csv"
            _write_csv(p, ["label", "pc1", "pc2", "snr_db", "family"],
                       [[l, repr(a), repr(b), repr(c.snr_db), c.family] for l, a, b in c.projections])
            written.append(p)
    return written
