"""Static TDL/CDL power-delay profiles: ingestion, validation, scaling.

Profiles live in a plain-text document with one ``[NAME]`` section per
profile, optional ``key = value`` attribute lines, a column-header row and
comma-separated data rows.  Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CdlCluster",
    "ChannelProfile",
    "ProfileError",
    "RAY_COUNT",
    "STANDARD_PROFILES",
    "TdlTap",
    "dump_profiles",
    "get_profile",
    "load_profiles",
    "los_k_factor",
    "normalize_powers",
    "parse_profiles",
    "scale_delays",
]

RAY_COUNT = 20
FADING_KINDS = ("rayleigh", "los_deterministic")

TDL_COLUMNS = ("normalized_delay", "power_db", "fading", "k_factor_db")
CDL_COLUMNS = ("normalized_delay", "power_db", "aod_deg", "aoa_deg",
               "zod_deg", "zoa_deg", "has_los_ray")
CDL_SPREAD_KEYS = ("c_asd", "c_asa", "c_zsd", "c_zsa")
# TR 38.901 per-cluster spreads (degrees) used when a CDL section omits them.
DEFAULT_CDL_SPREADS = {
    "A": (5.0, 11.0, 3.0, 3.0),
    "B": (10.0, 22.0, 3.0, 7.0),
    "C": (2.0, 15.0, 3.0, 7.0),
    "D": (5.0, 8.0, 3.0, 3.0),
    "E": (5.0, 11.0, 3.0, 7.0),
}

STANDARD_PROFILES = tuple(f"{fam}-{m}" for fam in ("CDL", "TDL") for m in "ABCDE")
LOS_MODELS = ("D", "E")

_BUNDLED = "tr38901_profiles.txt"


class ProfileError(ValueError):
    """Raised when a profile document or profile is malformed."""


@dataclass(frozen=True)
class TdlTap:
    normalized_delay: float
    power_db: float
    fading: str = "rayleigh"
    k_factor_db: float | None = None

    @property
    def is_los(self) -> bool:
        return self.fading == "los_deterministic"


@dataclass(frozen=True)
class CdlCluster:
    normalized_delay: float
    power_db: float
    aod_deg: float
    aoa_deg: float
    zod_deg: float
    zoa_deg: float
    has_los_ray: bool = False
    ray_count: int = RAY_COUNT

    @property
    def is_los(self) -> bool:
        return self.has_los_ray


@dataclass(frozen=True)
class ChannelProfile:
    """One named TDL or CDL profile.

    ``delay_spread`` is ``None`` while delays are in normalized units; after
    :func:`scale_delays` it holds the factor (seconds) mapping normalized
    delays to absolute ones.
    """

    name: str
    family: str
    entries: tuple
    delay_spread: float | None = None
    angular_spreads: tuple[float, float, float, float] | None = None

    @property
    def los(self) -> bool:
        return any(e.is_los for e in self.entries)

    @property
    def is_scaled(self) -> bool:
        return self.delay_spread is not None

    @property
    def normalized_delays(self) -> np.ndarray:
        return np.array([e.normalized_delay for e in self.entries], dtype=float)

    @property
    def delays(self) -> np.ndarray:
        """Absolute delays in seconds; requires a scaled profile."""
        if self.delay_spread is None:
            raise ProfileError(f"{self.name}: profile delays are not scaled")
        return self.normalized_delays * self.delay_spread

    @property
    def powers_db(self) -> np.ndarray:
        return np.array([e.power_db for e in self.entries], dtype=float)


def _row_error(profile: str, row: int, msg: str) -> ProfileError:
    return ProfileError(f"{profile} row {row}: {msg}")


def _parse_float(text: str, profile: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise _row_error(profile, row, f"{column}={text!r} is not a number") from None
    return value


def _family_of(name: str) -> str:
    prefix = name.split("-", 1)[0].upper()
    if prefix not in ("TDL", "CDL") or "-" not in name:
        raise ProfileError(f"profile name {name!r} must start with 'TDL-' or 'CDL-'")
    return prefix.lower()


def _parse_tdl_row(name: str, row_no: int, cells: dict[str, str]) -> TdlTap:
    delay = _parse_float(cells["normalized_delay"], name, row_no, "normalized_delay")
    power = _parse_float(cells["power_db"], name, row_no, "power_db")
    fading = cells["fading"].strip()
    if fading not in FADING_KINDS:
        raise _row_error(name, row_no, f"fading {fading!r} not one of {FADING_KINDS}")
    k_text = (cells.get("k_factor_db") or "").strip()
    k_factor = None
    if fading == "los_deterministic":
        if not k_text:
            raise _row_error(name, row_no, "LOS tap is missing k_factor_db")
        k_factor = _parse_float(k_text, name, row_no, "k_factor_db")
    elif k_text:
        raise _row_error(name, row_no, "k_factor_db given on a rayleigh tap")
    return TdlTap(delay, power, fading, k_factor)


def _parse_cdl_row(name: str, row_no: int, cells: dict[str, str]) -> CdlCluster:
    values = [_parse_float(cells[c], name, row_no, c) for c in CDL_COLUMNS[:-1]]
    los_text = cells["has_los_ray"].strip().lower()
    if los_text in ("1", "true", "yes"):
        has_los = True
    elif los_text in ("0", "false", "no"):
        has_los = False
    else:
        raise _row_error(name, row_no, f"has_los_ray={los_text!r} is not a flag")
    return CdlCluster(*values, has_los_ray=has_los)


def _validate(profile: ChannelProfile, row_numbers: Sequence[int] | None = None) -> None:
    name = profile.name
    rows = row_numbers or list(range(1, len(profile.entries) + 1))
    if not profile.entries:
        raise ProfileError(f"{name}: profile has no entries")
    prev = -math.inf
    for row, entry in zip(rows, profile.entries):
        d = entry.normalized_delay
        if not math.isfinite(d) or d < 0:
            raise _row_error(name, row, f"normalized_delay {d} must be finite and >= 0")
        if d < prev:
            raise _row_error(name, row, f"normalized_delay {d} is smaller than the previous row ({prev})")
        prev = d
        if not math.isfinite(entry.power_db):
            raise _row_error(name, row, f"power_db {entry.power_db} must be finite")
        if isinstance(entry, CdlCluster):
            angles = (entry.aod_deg, entry.aoa_deg, entry.zod_deg, entry.zoa_deg)
            if not all(math.isfinite(a) for a in angles):
                raise _row_error(name, row, "cluster angles must be finite")
            if entry.ray_count != RAY_COUNT:
                raise _row_error(name, row, f"ray_count must be {RAY_COUNT}")
        elif entry.is_los and (entry.k_factor_db is None or math.isnan(entry.k_factor_db)):
            raise _row_error(name, row, "LOS tap is missing k_factor_db")
    n_los = sum(e.is_los for e in profile.entries)
    if n_los > 1:
        raise ProfileError(f"{name}: {n_los} LOS entries, at most one allowed")
    if name in STANDARD_PROFILES:
        expect_los = name[-1] in LOS_MODELS
        if profile.los != expect_los:
            raise ProfileError(f"{name}: LOS flag {profile.los}, expected {expect_los}")


def parse_profiles(text: str) -> list[ChannelProfile]:
    """Parse a profile document; returns profiles sorted by name."""
    sections: list[tuple[str, int, list[tuple[int, str]]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            sections.append((line[1:-1].strip(), line_no, []))
        elif not sections:
            raise ProfileError(f"line {line_no}: content before the first [section]")
        else:
            sections[-1][2].append((line_no, line))

    profiles: dict[str, ChannelProfile] = {}
    for name, line_no, lines in sections:
        if name in profiles:
            raise ProfileError(f"line {line_no}: duplicate profile name {name!r}")
        family = _family_of(name)
        attrs: dict[str, float] = {}
        body: list[tuple[int, str]] = []
        for ln, line in lines:
            if "=" in line and not body:
                key, _, value = line.partition("=")
                key = key.strip()
                if family != "cdl" or key not in CDL_SPREAD_KEYS:
                    raise ProfileError(f"line {ln}: unknown attribute {key!r} in {name}")
                attrs[key] = _parse_float(value.strip(), name, ln, key)
            else:
                body.append((ln, line))
        if not body:
            raise ProfileError(f"{name}: missing column header")
        header_ln, header_line = body[0]
        header = [c.strip() for c in next(csv.reader([header_line]))]
        columns = TDL_COLUMNS if family == "tdl" else CDL_COLUMNS
        required = columns[:3] if family == "tdl" else columns
        if any(c not in columns for c in header) or any(c not in header for c in required):
            raise ProfileError(f"line {header_ln}: {name} header {header} does not match schema {list(columns)}")

        entries, row_numbers = [], []
        for ln, line in body[1:]:
            cells = [c.strip() for c in next(csv.reader([line]))]
            if len(cells) != len(header):
                raise _row_error(name, ln, f"expected {len(header)} columns, got {len(cells)}")
            row = dict(zip(header, cells))
            parse = _parse_tdl_row if family == "tdl" else _parse_cdl_row
            entries.append(parse(name, ln, row))
            row_numbers.append(ln)

        spreads = None
        if family == "cdl":
            default = DEFAULT_CDL_SPREADS.get(name.split("-", 1)[1], DEFAULT_CDL_SPREADS["A"])
            spreads = tuple(attrs.get(k, d) for k, d in zip(CDL_SPREAD_KEYS, default))
        profile = ChannelProfile(name, family, tuple(entries), angular_spreads=spreads)
        _validate(profile, row_numbers)
        profiles[name] = profile
    return [profiles[n] for n in sorted(profiles)]


def load_profiles(source: str | os.PathLike | io.TextIOBase | None = None) -> list[ChannelProfile]:
    """Load profiles from a path or open text stream; ``None`` loads the bundled TR 38.901 set."""
    if source is None:
        text = resources.files("commsense").joinpath("data", _BUNDLED).read_text(encoding="utf-8")
        profiles = parse_profiles(text)
        names = [p.name for p in profiles]
        if names != sorted(STANDARD_PROFILES):
            raise ProfileError(f"bundled document holds {names}, expected the ten standard profiles")
        return profiles
    if hasattr(source, "read"):
        return parse_profiles(source.read())
    with open(source, encoding="utf-8") as fh:
        return parse_profiles(fh.read())


def get_profile(name: str, profiles: Iterable[ChannelProfile] | None = None) -> ChannelProfile:
    for p in profiles if profiles is not None else load_profiles():
        if p.name == name:
            return p
    raise KeyError(name)


def dump_profiles(profiles: Iterable[ChannelProfile]) -> str:
    """Serialize profiles back to the document format (floats written with ``repr``)."""
    out = []
    for p in profiles:
        out.append(f"[{p.name}]")
        if p.family == "tdl":
            out.append(", ".join(TDL_COLUMNS))
            for e in p.entries:
                k = "" if e.k_factor_db is None else repr(e.k_factor_db)
                out.append(f"{e.normalized_delay!r}, {e.power_db!r}, {e.fading}, {k}")
        else:
            for key, value in zip(CDL_SPREAD_KEYS, p.angular_spreads):
                out.append(f"{key} = {value!r}")
            out.append(", ".join(CDL_COLUMNS))
            for e in p.entries:
                out.append(", ".join([repr(e.normalized_delay), repr(e.power_db), repr(e.aod_deg),
                                      repr(e.aoa_deg), repr(e.zod_deg), repr(e.zoa_deg),
                                      "1" if e.has_los_ray else "0"]))
        out.append("")
    return "\n".join(out)


def scale_delays(profile: ChannelProfile, delay_spread: float) -> ChannelProfile:
    """Attach a delay spread (seconds); absolute delays become normalized × spread.

    Scaling an already-scaled profile multiplies the spreads.
    """
    if not delay_spread > 0 or not math.isfinite(delay_spread):
        raise ProfileError(f"delay_spread must be positive and finite, got {delay_spread}")
    total = delay_spread if profile.delay_spread is None else profile.delay_spread * delay_spread
    return dataclasses.replace(profile, delay_spread=total)


def normalize_powers(profile: ChannelProfile) -> np.ndarray:
    """Linear power weights summing to one."""
    lin = 10.0 ** (profile.powers_db / 10.0)
    return lin / lin.sum()


def los_k_factor(profile: ChannelProfile) -> float | None:
    """Linear K-factor of the LOS component, or ``None`` for NLOS profiles.

    For TDL this is the LOS tap's own K-factor.  For CDL it is the specular
    ray power over the diffuse power sharing its delay.
    """
    if not profile.los:
        return None
    if profile.family == "tdl":
        tap = next(e for e in profile.entries if e.is_los)
        return 10.0 ** (tap.k_factor_db / 10.0)
    w = normalize_powers(profile)
    idx = next(i for i, e in enumerate(profile.entries) if e.is_los)
    delay = profile.entries[idx].normalized_delay
    diffuse = sum(w[i] for i, e in enumerate(profile.entries)
                  if i != idx and e.normalized_delay == delay)
    return w[idx] / diffuse if diffuse > 0 else math.inf
