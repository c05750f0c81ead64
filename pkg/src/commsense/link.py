"""Frequency-domain pilot link: QPSK pilots, per-subcarrier channel, calibrated AWGN."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .channel import ChannelFrequencyResponse, SubcarrierGrid
from .rng import complex_normal, make_rng

__all__ = ["PilotGrid", "ReceivedGrid", "add_awgn", "apply_channel", "generate_pilot_grid"]

_H = np.sqrt(0.5)
# built component-wise so that |symbol| == 1.0 exactly in floating point
_QPSK = np.array([complex(_H, _H), complex(_H, -_H), complex(-_H, _H), complex(-_H, -_H)])


@dataclass(frozen=True, eq=False)
class PilotGrid:
    symbols: np.ndarray
    subcarrier_spacing: float
    carrier_freq: float

    @property
    def subcarrier_count(self) -> int:
        return self.symbols.shape[-1]


@dataclass(frozen=True, eq=False)
class ReceivedGrid:
    """Received pilots; ``noise_variance`` is 0 until AWGN is added and ``snr_db`` is then set."""

    symbols: np.ndarray
    noise_variance: float = 0.0
    snr_db: float = float("inf")


def generate_pilot_grid(grid: SubcarrierGrid, seed: int) -> PilotGrid:
    """One full OFDM symbol of uniformly drawn unit-modulus QPSK pilots."""
    if grid.subcarrier_count < 1:
        raise ValueError("pilot grid needs at least one subcarrier")
    idx = make_rng(seed).integers(0, 4, grid.subcarrier_count)
    return PilotGrid(_QPSK[idx], grid.subcarrier_spacing, grid.carrier_freq)


def apply_channel(pilots: PilotGrid, H: ChannelFrequencyResponse) -> ReceivedGrid:
    """y[k] = H[k] x[k]; array responses broadcast the same pilots over every antenna pair."""
    h = np.asarray(H.values)
    if h.shape[-1] != pilots.symbols.shape[-1]:
        raise ValueError(f"channel has {h.shape[-1]} subcarriers, pilot grid has {pilots.symbols.shape[-1]}")
    return ReceivedGrid(h * pilots.symbols)


def add_awgn(received: ReceivedGrid, snr_db: float, seed: int) -> ReceivedGrid:
    """Add complex white noise at ``snr_db`` relative to the mean received symbol power."""
    y = np.asarray(received.symbols)
    if y.size == 0:
        raise ValueError("cannot add noise to an empty grid")
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    p_rx = float(np.mean(np.abs(y) ** 2))
    if p_rx == 0.0:
        raise ValueError("received signal is all zero; SNR is undefined")
    sigma2 = p_rx / 10.0 ** (snr_db / 10.0)
    noise = complex_normal(make_rng(seed), y.shape, sigma2)
    return dataclasses.replace(received, symbols=y + noise, noise_variance=sigma2, snr_db=float(snr_db))
