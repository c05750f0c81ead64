"""Stochastic channel draws from TDL/CDL profiles and their frequency response."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import RAY_COUNT, ChannelProfile, ProfileError, normalize_powers
from .rng import complex_normal, make_rng

__all__ = [
    "ArrayConfig",
    "ChannelFrequencyResponse",
    "ChannelRealization",
    "RAY_OFFSETS",
    "SubcarrierGrid",
    "frequency_correlation",
    "frequency_response",
    "realize",
    "realize_cdl",
    "realize_tdl",
]

# Normalized intra-cluster ray offset angles (TR 38.901 Table 7.5-3).
RAY_OFFSETS = np.array([
    0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715,
    0.5129, -0.5129, 0.6797, -0.6797, 0.8844, -0.8844, 1.1481, -1.1481,
    1.5195, -1.5195, 2.1551, -2.1551,
])


@dataclass(frozen=True)
class SubcarrierGrid:
    """Active subcarriers of one OFDM symbol, centred on the carrier."""

    subcarrier_count: int = 600
    subcarrier_spacing: float = 30e3
    carrier_freq: float = 4e9

    def __post_init__(self):
        if self.subcarrier_count < 1:
            raise ValueError("grid needs at least one subcarrier")
        if not self.subcarrier_spacing > 0:
            raise ValueError("subcarrier_spacing must be positive")

    @property
    def offsets(self) -> np.ndarray:
        """Subcarrier frequencies relative to the carrier (Hz)."""
        k = np.arange(self.subcarrier_count) - self.subcarrier_count // 2
        return k * float(self.subcarrier_spacing)


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear arrays at both ends; spacing in wavelengths."""

    n_tx: int = 1
    n_rx: int = 1
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError(f"array sizes must be >= 1, got n_tx={self.n_tx}, n_rx={self.n_rx}")

    @property
    def is_siso(self) -> bool:
        return self.n_tx == 1 and self.n_rx == 1


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One static draw: tap delays (s) and complex coefficients.

    ``coeffs`` has shape ``(n_taps,)`` for single-antenna links and
    ``(n_taps, n_rx, n_tx)`` otherwise.
    """

    delays: np.ndarray
    coeffs: np.ndarray
    profile_name: str
    seed_used: int


@dataclass(frozen=True, eq=False)
class ChannelFrequencyResponse:
    """Channel sampled on the subcarrier grid.

    ``values`` is ``(n_sc,)`` for SISO links and ``(n_rx, n_tx, n_sc)`` for
    arrays; the subcarrier axis is always last.
    """

    values: np.ndarray
    subcarrier_freqs: np.ndarray


def _require_scaled(profile: ChannelProfile, family: str) -> None:
    if profile.family != family:
        raise ProfileError(f"{profile.name} is a {profile.family} profile, expected {family}")
    if not profile.is_scaled:
        raise ProfileError(f"{profile.name}: delays are normalized; call scale_delays first")


def realize_tdl(profile: ChannelProfile, seed: int) -> ChannelRealization:
    """Draw Rayleigh taps, with a Rician first tap on LOS profiles.

    A LOS tap of weight ``w`` and linear K-factor ``K`` carries a fixed
    ``sqrt(w K/(K+1))`` plus complex Gaussian power ``w/(K+1)``; an infinite
    K-factor leaves only the fixed part.
    """
    _require_scaled(profile, "tdl")
    w = normalize_powers(profile)
    diffuse = complex_normal(make_rng(seed), len(w))
    coeffs = np.empty(len(w), dtype=complex)
    for i, tap in enumerate(profile.entries):
        if tap.is_los:
            k = 10.0 ** (tap.k_factor_db / 10.0)
            if np.isinf(k):
                coeffs[i] = np.sqrt(w[i])
            else:
                coeffs[i] = np.sqrt(w[i] * k / (k + 1)) + np.sqrt(w[i] / (k + 1)) * diffuse[i]
        else:
            coeffs[i] = np.sqrt(w[i]) * diffuse[i]
    return ChannelRealization(profile.delays, coeffs, profile.name, int(seed))


def _ula_response(n: int, spacing: float, azimuth: np.ndarray, zenith: np.ndarray) -> np.ndarray:
    """ULA along the y axis: element phase 2*pi*u*d*sin(zenith)*sin(azimuth)."""
    u = np.arange(n)[:, None]
    return np.exp(2j * np.pi * spacing * u * np.sin(zenith) * np.sin(azimuth))


def realize_cdl(profile: ChannelProfile, seed: int, array_config: ArrayConfig | None = None,
                ray_phases: np.ndarray | float | None = None) -> ChannelRealization:
    """Sum 20 equal-power rays per cluster; the LOS ray stays a single fixed-phase path.

    ``ray_phases`` overrides the uniform initial ray phases (test hook); it is
    broadcast to ``(n_clusters, 20)``.
    """
    _require_scaled(profile, "cdl")
    array_config = array_config or ArrayConfig()
    n = len(profile.entries)
    w = normalize_powers(profile)
    rng = make_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, (n, RAY_COUNT))
    # random coupling of departure rays with arrival/zenith rays inside each cluster
    couplings = rng.permuted(np.broadcast_to(np.arange(RAY_COUNT), (n, 3, RAY_COUNT)), axis=-1)
    if ray_phases is not None:
        phases = np.broadcast_to(np.asarray(ray_phases, dtype=float), (n, RAY_COUNT))
    los = np.array([cl.has_los_ray for cl in profile.entries])

    if array_config.is_siso:
        coeffs = np.sqrt(w / RAY_COUNT) * np.exp(1j * phases).sum(axis=1)
        coeffs[los] = np.sqrt(w[los])
        return ChannelRealization(profile.delays, coeffs, profile.name, int(seed))

    c_asd, c_asa, c_zsd, c_zsa = profile.angular_spreads
    nr, nt = array_config.n_rx, array_config.n_tx
    coeffs = np.empty((n, nr, nt), dtype=complex)
    for i, cl in enumerate(profile.entries):
        if cl.has_los_ray:
            aod, aoa = np.radians([cl.aod_deg]), np.radians([cl.aoa_deg])
            zod, zoa = np.radians([cl.zod_deg]), np.radians([cl.zoa_deg])
            gains = np.ones(1, dtype=complex)
            scale = np.sqrt(w[i])
        else:
            aod = np.radians(cl.aod_deg + c_asd * RAY_OFFSETS)
            aoa = np.radians(cl.aoa_deg + c_asa * RAY_OFFSETS[couplings[i, 0]])
            zod = np.radians(cl.zod_deg + c_zsd * RAY_OFFSETS[couplings[i, 1]])
            zoa = np.radians(cl.zoa_deg + c_zsa * RAY_OFFSETS[couplings[i, 2]])
            gains = np.exp(1j * phases[i])
            scale = np.sqrt(w[i] / RAY_COUNT)
        a_rx = _ula_response(nr, array_config.spacing, aoa, zoa)
        a_tx = _ula_response(nt, array_config.spacing, aod, zod)
        coeffs[i] = scale * np.einsum("m,rm,tm->rt", gains, a_rx, a_tx)
    return ChannelRealization(profile.delays, coeffs, profile.name, int(seed))


def realize(profile: ChannelProfile, seed: int, array_config: ArrayConfig | None = None) -> ChannelRealization:
    """Dispatch on profile family; TDL profiles are single-antenna only."""
    if profile.family == "tdl":
        if array_config is not None and not array_config.is_siso:
            raise ValueError("TDL profiles model single-antenna links only")
        return realize_tdl(profile, seed)
    return realize_cdl(profile, seed, array_config)


def frequency_response(realization: ChannelRealization, grid: SubcarrierGrid) -> ChannelFrequencyResponse:
    """H[k] = sum_i c_i exp(-j 2 pi f_k tau_i) on the grid's subcarrier offsets."""
    f = grid.offsets
    if f.size == 0:
        raise ValueError("empty subcarrier grid")
    steer = np.exp(-2j * np.pi * np.outer(f, realization.delays))
    c = realization.coeffs
    if c.ndim == 1:
        return ChannelFrequencyResponse(steer @ c, f)
    h = steer @ c.reshape(c.shape[0], -1)
    return ChannelFrequencyResponse(np.moveaxis(h.reshape((f.size,) + c.shape[1:]), 0, -1), f)


def frequency_correlation(profile: ChannelProfile, grid: SubcarrierGrid) -> np.ndarray:
    """Ensemble correlation E[H_k H_l^*] across subcarriers implied by the power profile."""
    w = normalize_powers(profile)
    steer = np.exp(-2j * np.pi * np.outer(grid.offsets, profile.delays))
    return (steer * w) @ steer.conj().T
