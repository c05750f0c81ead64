"""Versioned JSON export/import of a fitted PCA + SVM pair."""
from __future__ import annotations

import json
import os

import numpy as np

from .pca import PcaModel
from .svm import BinaryMachine, SvmModel, SvmParams

FORMAT = "commsense-model"
VERSION = 1


def model_to_dict(pca: PcaModel, svm: SvmModel) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "pca": {
            "mean": pca.mean.tolist(),
            "components": pca.components.tolist(),
            "eigenvalues": pca.eigenvalues.tolist(),
        },
        "svm": {
            "classes": list(svm.classes),
            "params": vars(svm.params).copy(),
            "machines": [
                {
                    "positive": m.positive,
                    "negative": m.negative,
                    "points": m.points.tolist(),
                    "y": m.y.tolist(),
                    "alpha": m.alpha.tolist(),
                    "bias": m.bias,
                    "iterations": m.iterations,
                }
                for m in svm.machines
            ],
        },
    }


def model_from_dict(doc: dict) -> tuple[PcaModel, SvmModel]:
    if doc.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    p = doc["pca"]
    pca = PcaModel(np.array(p["mean"], dtype=float), np.array(p["components"], dtype=float),
                   np.array(p["eigenvalues"], dtype=float))
    s = doc["svm"]
    params = SvmParams(**s["params"])
    machines = [
        BinaryMachine(m["positive"], m["negative"], np.array(m["points"], dtype=float).reshape(len(m["y"]), -1),
                      np.array(m["y"], dtype=float), np.array(m["alpha"], dtype=float), float(m["bias"]),
                      params, int(m.get("iterations", 0)))
        for m in s["machines"]
    ]
    return pca, SvmModel(tuple(s["classes"]), machines, params)


def save_model(path: str | os.PathLike, pca: PcaModel, svm: SvmModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(pca, svm), fh, indent=1)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> tuple[PcaModel, SvmModel]:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
