"""Dataset generation and the family x SNR x seed sensing sweep."""
from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import __version__
from .channel import frequency_correlation, frequency_response, realize
from .config import ExperimentConfig
from .estimation import CsiVector, build_feature_vector, ls_estimate, mmse_estimate, mmse_estimate_matrix
from .learning import evaluate_accuracy, pca_fit, pca_project, silhouette_score, svm_train
from .learning.pca import as_matrix
from .link import add_awgn, apply_channel, generate_pilot_grid
from .profiles import ChannelProfile, load_profiles, scale_delays
from .rng import derive_seed, make_rng

__all__ = [
    "CellResult",
    "ExperimentReport",
    "REPORT_FORMAT",
    "REPORT_VERSION",
    "family_profiles",
    "generate_dataset",
    "read_dataset",
    "run_cell",
    "run_experiment",
    "stratified_split",
    "write_dataset",
]

log = logging.getLogger(__name__)

REPORT_FORMAT = "commsense-report"
REPORT_VERSION = 1


@lru_cache(maxsize=8)
def _profiles(path: str | None) -> tuple[ChannelProfile, ...]:
    return tuple(load_profiles(path))


def family_profiles(config: ExperimentConfig, family: str) -> list[ChannelProfile]:
    """The family's profiles, sorted by name, scaled to the configured delay spread."""
    chosen = [p for p in _profiles(config.profiles_path) if p.family == family]
    if not chosen:
        raise ValueError(f"no {family} profiles available")
    return [scale_delays(p, config.delay_spread) for p in chosen]


def generate_dataset(config: ExperimentConfig, family: str, snr_db: float, seed: int | None = None,
                     out_path: str | os.PathLike | None = None) -> list[CsiVector]:
    """Simulate ``samples_per_class`` CSI vectors for each profile of ``family``.

    Per sample: channel -> frequency response -> QPSK pilots -> AWGN ->
    LS -> MMSE -> feature vector.  Every random stream is derived from
    ``(seed, family, snr, profile, index)``; channel draws omit the SNR so
    the same environments are observed at every SNR.
    """
    seed = config.master_seed if seed is None else seed
    snr_db = float(snr_db)
    grid = config.grid
    array = config.array_config if family == "cdl" else None
    vectors: list[CsiVector] = []
    sample_id = 0
    for profile in family_profiles(config, family):
        corr = frequency_correlation(profile, grid) if config.estimator == "matrix" else None
        if config.channel_sampling == "static":
            env = realize(profile, derive_seed(seed, "channel", family, profile.name), array)
            h_env = frequency_response(env, grid)
        for idx in range(config.samples_per_class):
            if config.channel_sampling == "static":
                H = h_env
            else:
                H = frequency_response(realize(profile, derive_seed(seed, "channel", family, profile.name, idx),
                                               array), grid)
            pilots = generate_pilot_grid(grid, derive_seed(seed, "pilot", family, snr_db, profile.name, idx))
            rx = add_awgn(apply_channel(pilots, H), snr_db,
                          derive_seed(seed, "noise", family, snr_db, profile.name, idx))
            ls = ls_estimate(pilots, rx)
            if corr is None:
                est = mmse_estimate(ls, rx.noise_variance)
            else:
                est = mmse_estimate_matrix(ls, rx.noise_variance, corr)
            vectors.append(build_feature_vector(est, profile.name, snr_db, sample_id))
            sample_id += 1
    if out_path is not None:
        write_dataset(out_path, vectors)
    return vectors


def write_dataset(path: str | os.PathLike, vectors: list[CsiVector]) -> None:
    """CSV with header ``sample_id, label, snr_db, f0_re, f0_im, ...``."""
    n = vectors[0].features.size // 2 if vectors else 0
    header = ["sample_id", "label", "snr_db"] + [f"f{k}_{part}" for k in range(n) for part in ("re", "im")]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for v in vectors:
            w.writerow([v.sample_id, v.label, repr(v.snr_db)] + [repr(x) for x in v.features.tolist()])


def read_dataset(path: str | os.PathLike) -> list[CsiVector]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.reader(fh)
        next(rows)
        return [CsiVector(np.array([float(x) for x in r[3:]]), r[1], float(r[2]), int(r[0])) for r in rows]


def stratified_split(vectors: list[CsiVector], fraction: float, seed: int) -> tuple[list, list]:
    """Per-label shuffled split with round(fraction * n) training samples (at least 2, at most n - 1)."""
    rng = make_rng(seed)
    train, test = [], []
    for label in sorted({v.label for v in vectors}):
        group = [v for v in vectors if v.label == label]
        n_train = min(max(int(round(fraction * len(group))), 2), len(group) - 1)
        order = rng.permutation(len(group))
        train += [group[i] for i in sorted(order[:n_train])]
        test += [group[i] for i in sorted(order[n_train:])]
    return train, test


@dataclass
class CellResult:
    """Outcome of one (family, snr, seed) cell; plain Python values so it serializes exactly."""

    family: str
    snr_db: float
    seed: int
    classes: list[str]
    accuracy: float
    confusion: list[list[int]]
    recall: list[float]
    silhouette: float
    n_train: int
    n_test: int
    projections: list[tuple[str, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "snr_db": self.snr_db,
            "seed": self.seed,
            "classes": list(self.classes),
            "accuracy": self.accuracy,
            "confusion": [list(r) for r in self.confusion],
            "recall": list(self.recall),
            "silhouette": self.silhouette,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "projections": [{"label": l, "pc1": a, "pc2": b} for l, a, b in self.projections],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellResult":
        return cls(d["family"], float(d["snr_db"]), int(d["seed"]), list(d["classes"]), float(d["accuracy"]),
                   [list(map(int, r)) for r in d["confusion"]], [float(x) for x in d["recall"]],
                   float(d["silhouette"]), int(d["n_train"]), int(d["n_test"]),
                   [(p["label"], float(p["pc1"]), float(p["pc2"])) for p in d["projections"]])


@dataclass
class ExperimentReport:
    config: dict
    cells: list[CellResult]
    version: str = __version__

    def cell(self, family: str, snr_db: float, seed: int) -> CellResult:
        for c in self.cells:
            if c.family == family and c.snr_db == float(snr_db) and c.seed == seed:
                return c
        raise KeyError((family, snr_db, seed))

    def aggregates(self) -> list[dict]:
        """Accuracy mean/min/max and mean silhouette per (family, snr)."""
        keys = sorted({(c.family, c.snr_db) for c in self.cells}, key=lambda k: (k[0] != "tdl", k[0], k[1]))
        out = []
        for fam, snr in keys:
            group = [c for c in self.cells if c.family == fam and c.snr_db == snr]
            acc = [c.accuracy for c in group]
            out.append({
                "family": fam,
                "snr_db": snr,
                "n_seeds": len(group),
                "mean_accuracy": float(np.mean(acc)),
                "min_accuracy": float(min(acc)),
                "max_accuracy": float(max(acc)),
                "mean_silhouette": float(np.mean([c.silhouette for c in group])),
            })
        return out

    def mean_accuracy(self, family: str, snr_db: float) -> float:
        for a in self.aggregates():
            if a["family"] == family and a["snr_db"] == float(snr_db):
                return a["mean_accuracy"]
        raise KeyError((family, snr_db))

    def mean_silhouette(self, family: str, snr_db: float) -> float:
        for a in self.aggregates():
            if a["family"] == family and a["snr_db"] == float(snr_db):
                return a["mean_silhouette"]
        raise KeyError((family, snr_db))

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "report_version": REPORT_VERSION,
            "version": self.version,
            "config": self.config,
            "aggregates": self.aggregates(),
            "cells": [c.to_dict() for c in self.cells],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        if d.get("format") != REPORT_FORMAT:
            raise ValueError(f"not a {REPORT_FORMAT} document")
        if d.get("report_version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version {d.get('report_version')!r}")
        return cls(d["config"], [CellResult.from_dict(c) for c in d["cells"]], d["version"])


def run_cell(config: ExperimentConfig, family: str, snr_db: float, seed: int, return_models: bool = False):
    """Generate, split, fit PCA on train, train the SVM, score the test split."""
    data = generate_dataset(config, family, snr_db, seed)
    train, test = stratified_split(data, config.split_fraction, derive_seed(seed, "split", family, float(snr_db)))
    pca = pca_fit(train)
    svm = svm_train(pca_project(pca, as_matrix(train)), [v.label for v in train], config.svm)
    report = evaluate_accuracy(svm, pca, test)
    z = pca_project(pca, as_matrix(test))
    labels = [v.label for v in test]
    cell = CellResult(
        family=family,
        snr_db=float(snr_db),
        seed=int(seed),
        classes=list(report.classes),
        accuracy=report.accuracy,
        confusion=report.confusion.tolist(),
        recall=[float(r) for r in report.recall],
        silhouette=silhouette_score(z, labels),
        n_train=len(train),
        n_test=len(test),
        projections=[(l, float(a), float(b)) for l, (a, b) in zip(labels, z)],
    )
    if return_models:
        return cell, pca, svm
    return cell


def _run_cell_job(args):
    return run_cell(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run every (family, snr, repetition) cell; repetition r uses seed ``master_seed + r``.

    Cells are independent, so ``workers > 1`` farms them out to processes;
    results are collected in sweep order either way.
    """
    jobs = [(config, fam, float(snr), config.master_seed + r)
            for fam in config.families for snr in config.snr_list_db for r in range(config.repetitions)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell_job, jobs))
    else:
        cells = []
        for job in jobs:
            cells.append(run_cell(*job))
            c = cells[-1]
            log.info("%s %5.1f dB seed %d: accuracy %.4f", c.family, c.snr_db, c.seed, c.accuracy)
    return ExperimentReport(config.to_dict(), cells)
