"""Pilot-based channel estimation (LS, scalar and matrix MMSE) and CSI feature vectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .link import PilotGrid, ReceivedGrid

__all__ = [
    "CsiVector",
    "PRIOR_FLOOR",
    "build_feature_vector",
    "features_to_complex",
    "ls_estimate",
    "mmse_estimate",
    "mmse_estimate_matrix",
]

PRIOR_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CsiVector:
    features: np.ndarray
    label: str
    snr_db: float
    sample_id: int


def ls_estimate(pilots: PilotGrid, received: ReceivedGrid) -> np.ndarray:
    x = np.asarray(pilots.symbols)
    y = np.asarray(received.symbols)
    if y.shape[-1] != x.shape[-1]:
        raise ValueError(f"received grid has {y.shape[-1]} subcarriers, pilots have {x.shape[-1]}")
    if np.any(x == 0):
        raise ValueError("pilot grid contains a zero symbol")
    return y / x


def mmse_estimate(ls: np.ndarray, noise_variance: float, prior_variance: float | None = None) -> np.ndarray:
    """Per-subcarrier Wiener shrinkage of an LS estimate (unit-modulus pilots).

    Without an explicit prior the channel variance is estimated as the mean
    LS power minus the noise variance, floored at ``PRIOR_FLOOR``.
    """
    ls = np.asarray(ls)
    if noise_variance < 0:
        raise ValueError(f"noise_variance must be >= 0, got {noise_variance}")
    if prior_variance is None:
        prior_variance = max(float(np.mean(np.abs(ls) ** 2)) - noise_variance, PRIOR_FLOOR)
    elif not prior_variance > 0:
        raise ValueError(f"prior_variance must be > 0, got {prior_variance}")
    if noise_variance == 0:
        return ls.copy()
    return (prior_variance / (prior_variance + noise_variance)) * ls


def mmse_estimate_matrix(ls: np.ndarray, noise_variance: float, correlation: np.ndarray) -> np.ndarray:
    """Frequency-correlated MMSE: R (R + s2 I)^-1 h_ls, applied along the last axis."""
    ls = np.asarray(ls)
    if noise_variance < 0:
        raise ValueError(f"noise_variance must be >= 0, got {noise_variance}")
    if noise_variance == 0:
        return ls.copy()
    n = ls.shape[-1]
    if correlation.shape != (n, n):
        raise ValueError(f"correlation must be {n}x{n}, got {correlation.shape}")
    # W (R + s2 I) = R, solved in transposed form
    filt = np.linalg.solve((correlation + noise_variance * np.eye(n)).T, correlation.T).T
    return ls @ filt.T


def build_feature_vector(estimate: np.ndarray, label: str, snr_db: float, sample_id: int) -> CsiVector:
    """Interleave real and imaginary parts: [re0, im0, re1, im1, ...]."""
    h = np.asarray(estimate, dtype=complex).ravel()
    if h.size == 0:
        raise ValueError("estimate is empty")
    if not np.all(np.isfinite(h)):
        raise ValueError("estimate has non-finite entries")
    return CsiVector(h.view(np.float64).copy(), label, float(snr_db), int(sample_id))


def features_to_complex(features: np.ndarray) -> np.ndarray:
    f = np.ascontiguousarray(features, dtype=np.float64)
    if f.size % 2:
        raise ValueError("feature vector length must be even")
    return f.view(np.complex128).copy()
