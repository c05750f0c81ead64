"""Principal component analysis by eigendecomposition of the sample covariance."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["PcaModel", "as_matrix", "pca_fit", "pca_project", "sign_fix"]


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Mean, orthonormal components (rows) and descending eigenvalues."""

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]


def as_matrix(samples) -> np.ndarray:
    """Stack CsiVectors (or rows of an array) into an ``(n, d)`` float matrix."""
    if isinstance(samples, np.ndarray):
        X = np.asarray(samples, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"expected a 2-D sample matrix, got shape {X.shape}")
        return X
    rows = [np.asarray(getattr(s, "features", s), dtype=float) for s in samples]
    if not rows:
        return np.empty((0, 0))
    d = rows[0].shape
    for i, r in enumerate(rows):
        if r.shape != d:
            raise ValueError(f"sample {i} has {r.shape[0]} features, expected {d[0]}")
    return np.vstack(rows)


def sign_fix(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so its first non-negligible coordinate is positive."""
    out = vectors.copy()
    for row in out:
        big = np.flatnonzero(np.abs(row) > 1e-12 * np.abs(row).max())
        if big.size and row[big[0]] < 0:
            row *= -1
    return out


def pca_fit(samples: Sequence | np.ndarray, n_components: int = 2) -> PcaModel:
    """Fit the top ``n_components`` principal axes.

    The covariance uses the 1/n (population) normalization, so repeating the
    dataset leaves the model unchanged.  When there are fewer samples than
    features the eigenproblem is solved on the n x n Gram matrix and mapped
    back, which gives the same nonzero spectrum.
    """
    X = as_matrix(samples)
    n, d = X.shape
    if n < 3:
        raise ValueError(f"PCA needs at least 3 samples, got {n}")
    if n_components > d:
        raise ValueError(f"cannot extract {n_components} components from {d} features")
    mean = X.mean(axis=0)
    Xc = X - mean

    vals = vecs = None
    if n < d:
        gvals, gvecs = np.linalg.eigh(Xc @ Xc.T / n)
        order = np.argsort(gvals)[::-1][:n_components]
        gvals = gvals[order]
        if np.all(gvals > 1e-12 * max(gvals[0], 1e-300)):
            vecs = (Xc.T @ gvecs[:, order]) / np.sqrt(n * gvals)
            vecs /= np.linalg.norm(vecs, axis=0)
            vals = gvals
    if vecs is None:
        cvals, cvecs = np.linalg.eigh(Xc.T @ Xc / n)
        order = np.argsort(cvals)[::-1][:n_components]
        vals, vecs = cvals[order], cvecs[:, order]
    vals = np.clip(vals, 0.0, None)
    return PcaModel(mean, sign_fix(vecs.T), vals)


def pca_project(model: PcaModel, sample) -> np.ndarray:
    """Project one sample (or an ``(n, d)`` batch) onto the components."""
    x = np.asarray(getattr(sample, "features", sample), dtype=float)
    if x.shape[-1] != model.n_features:
        raise ValueError(f"sample has {x.shape[-1]} features, model expects {model.n_features}")
    return (x - model.mean) @ model.components.T
