"""Experiment configuration: the flat key-value file format and its schema.

Config files use INI-like sections with one ``key = value`` pair per
line and ``#`` comments:

    [system]
    ntx = 32
    ...

Keys are unique across sections; unknown keys, wrong sections, missing
mandatory keys and out-of-range values are rejected with the offending
key and line number.  ``--set key=value`` overrides reference the same
key names.  The full key reference lives in the README (generated from
the schema below).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace, asdict
from typing import Optional

import numpy as np

from .channel import ProfileError, TdlProfile, builtin_profile, load_profile
from .cvnn import (ARCHITECTURES, Hyperparameters, NetworkConfig,
                   default_hidden_width, default_hyperparameters)

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "parse_config_string",
           "apply_overrides", "describe_schema"]


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, value, or file)."""


def _power_of_two(v: int) -> bool:
    return v >= 2 and (v & (v - 1)) == 0


@dataclass(frozen=True)
class _Key:
    section: str
    type: str  # int | float | bool | str | int_list
    required: bool = False
    default: object = None
    doc: str = ""


_SCHEMA = {
    # [system]
    "ntx": _Key("system", "int", required=True, doc="transmit antennas (power of two >= 2)"),
    "nrx": _Key("system", "int", required=True, doc="receive antennas (>= 1)"),
    "nfft": _Key("system", "int", required=True, doc="FFT size / active subcarriers (power of two)"),
    "ncp": _Key("system", "int", default=None, doc="cyclic prefix samples (default nfft/16)"),
    "mod_order": _Key("system", "int", required=True, doc="QAM order, power of 4 (4, 16, 64, ...)"),
    "subcarrier_spacing_hz": _Key("system", "float", default=60000.0,
                                  doc="subcarrier spacing; sample rate = nfft * spacing"),
    # [channel]
    "profile": _Key("channel", "str", default="tdla30-5",
                    doc="built-in profile name or path to a profile file"),
    "doppler_hz": _Key("channel", "float", default=None,
                       doc="override the profile's maximum Doppler frequency"),
    "identity_channel": _Key("channel", "bool", default=False,
                             doc="bypass fading with an identity channel (diagnostics)"),
    # [network]
    "architecture": _Key("network", "str", required=True,
                         doc="one of cvfnn, scfnn, crbf, fcrbf, ptrbf"),
    "hidden": _Key("network", "int", default=None,
                   doc="hidden width / kernel count (default 68 feedforward, 100 RBF)"),
    "eta_w": _Key("network", "float", default=None, doc="weight learning rate (architecture default)"),
    "eta_b": _Key("network", "float", default=None, doc="bias learning rate (architecture default)"),
    "eta_gamma": _Key("network", "float", default=None, doc="center learning rate (RBF nets)"),
    "eta_sigma": _Key("network", "float", default=None, doc="variance learning rate (crbf/ptrbf)"),
    "eta_upsilon": _Key("network", "float", default=None, doc="scale learning rate (fcrbf)"),
    "alpha": _Key("network", "float", default=None, doc="momentum coefficient (architecture default)"),
    "mu0": _Key("network", "float", default=0.01, doc="init std per real component"),
    "epsilon": _Key("network", "float", default=0.01, doc="kernel variance lower bound (> 0)"),
    "smoothing_window": _Key("network", "int", default=20,
                             doc="frames in the MSE/BER smoothing window"),
    # [training]
    "pilot_period": _Key("training", "int", default=6, doc="one pilot frame every P frames"),
    "upsample": _Key("training", "int", default=30, doc="training repetitions per pilot frame"),
    "upsample_mode": _Key("training", "str", default="sequence",
                          doc="'sequence' repeats the ordered pilot sweep, 'example' repeats each example"),
    # [run]
    "ebn0_db": _Key("run", "float", required=True, doc="energy per bit over noise density, dB"),
    "n_frames": _Key("run", "int", required=True, doc="total frames to simulate"),
    "warmup_frames": _Key("run", "int", default=360,
                          doc="frames excluded from steady-state statistics"),
    "seeds": _Key("run", "int_list", default=(0,), doc="comma-separated run seeds"),
    "noise_seed": _Key("run", "int", default=None,
                       doc="separate seed for the noise stream (default: run seed)"),
}

_RATE_KEYS = ("eta_w", "eta_b", "eta_gamma", "eta_sigma", "eta_upsilon", "alpha")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description (all defaults applied)."""

    ntx: int
    nrx: int
    nfft: int
    ncp: int
    mod_order: int
    subcarrier_spacing_hz: float
    profile: TdlProfile
    identity_channel: bool
    architecture: str
    n_hidden: int
    hp: Hyperparameters
    pilot_period: int
    upsample: int
    upsample_mode: str
    ebn0_db: float
    n_frames: int
    warmup_frames: int
    seeds: tuple
    noise_seed: Optional[int] = None

    def __post_init__(self):
        if not _power_of_two(self.ntx):
            raise ConfigError(f"ntx must be a power of two >= 2, got {self.ntx}")
        if self.nrx < 1:
            raise ConfigError(f"nrx must be >= 1, got {self.nrx}")
        if not _power_of_two(self.nfft):
            raise ConfigError(f"nfft must be a power of two >= 2, got {self.nfft}")
        if not 0 <= self.ncp < self.nfft:
            raise ConfigError(f"ncp must satisfy 0 <= ncp < nfft, got {self.ncp}")
        m = self.mod_order
        if m < 4 or (m & (m - 1)) != 0 or (m.bit_length() - 1) % 2 != 0:
            raise ConfigError(f"mod_order must be a power of 4, got {m}")
        if self.subcarrier_spacing_hz <= 0:
            raise ConfigError("subcarrier_spacing_hz must be positive")
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(
                f"unknown architecture {self.architecture!r}, expected one of {ARCHITECTURES}")
        if self.pilot_period < 1:
            raise ConfigError(f"pilot_period must be >= 1, got {self.pilot_period}")
        if self.upsample < 1:
            raise ConfigError(f"upsample must be >= 1, got {self.upsample}")
        if self.upsample_mode not in ("sequence", "example"):
            raise ConfigError(f"upsample_mode must be 'sequence' or 'example', got {self.upsample_mode!r}")
        if self.n_frames < 1:
            raise ConfigError(f"n_frames must be >= 1, got {self.n_frames}")
        if self.warmup_frames < 0:
            raise ConfigError(f"warmup_frames must be >= 0, got {self.warmup_frames}")
        if len(self.seeds) == 0:
            raise ConfigError("seeds must be non-empty")
        try:
            self.hp.validate_for(self.architecture)
        except ValueError as err:
            raise ConfigError(str(err)) from None

    # dimensions of the square space-time code
    @property
    def ntp(self) -> int:
        return self.ntx

    @property
    def ns(self) -> int:
        return self.ntx

    @property
    def n_in(self) -> int:
        return self.ntp * self.nrx

    @property
    def n_out(self) -> int:
        return self.ns

    @property
    def fs(self) -> float:
        return self.nfft * self.subcarrier_spacing_hz

    @property
    def ts(self) -> float:
        return 1.0 / self.fs

    def network_config(self) -> NetworkConfig:
        return NetworkConfig(self.architecture, self.n_in, self.n_hidden, self.n_out)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["profile"] = {
            "delays_ns": self.profile.delays_ns.tolist(),
            "powers_db": self.profile.powers_db.tolist(),
            "doppler_hz": self.profile.doppler_hz,
        }
        d["seeds"] = list(self.seeds)
        d["n_in"] = self.n_in
        d["n_out"] = self.n_out
        d["sample_rate_hz"] = self.fs
        # flatten the hyperparameter block under its own key
        d["hp"] = asdict(self.hp)
        d["smoothing_window"] = self.hp.smoothing_window
        return d


def _parse_value(key: str, raw: str, where: str):
    spec = _SCHEMA[key]
    try:
        if spec.type == "int":
            return int(raw)
        if spec.type == "float":
            return float(raw)
        if spec.type == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if spec.type == "int_list":
            return tuple(int(part) for part in raw.split(",") if part.strip() != "")
        return raw
    except ValueError:
        raise ConfigError(f"{where}: key '{key}' expects {spec.type}, got {raw!r}") from None


def parse_config_string(text: str, source: str = "<config>",
                        base_dir: str = ".") -> ExperimentConfig:
    """Parse and fully validate a config document; see module docstring."""
    values: dict = {}
    lines: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{where}: unknown key '{key}'")
        expected = _SCHEMA[key].section
        if section is not None and section != expected:
            raise ConfigError(f"{where}: key '{key}' belongs in section [{expected}], found in [{section}]")
        if key in values:
            raise ConfigError(f"{where}: duplicate key '{key}' (first at line {lines[key]})")
        values[key] = _parse_value(key, raw_value, where)
        lines[key] = lineno
    return _resolve(values, lines, source, base_dir)


def parse_config(path) -> ExperimentConfig:
    """Read and parse a config file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_string(text, source=str(path), base_dir=os.path.dirname(os.path.abspath(path)))


def apply_overrides(config_text: str, overrides, source: str = "<config>",
                    base_dir: str = ".") -> ExperimentConfig:
    """Re-parse a config document with key=value override pairs applied."""
    lines = config_text.splitlines()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"override references unknown key '{key}'")
        # strip any previous assignment of this key, then append in its section
        kept = []
        for line in lines:
            stripped = line.split("#", 1)[0].strip()
            if stripped and not stripped.startswith("[") \
                    and stripped.partition("=")[0].strip() == key:
                continue
            kept.append(line)
        kept.append(f"[{_SCHEMA[key].section}]")
        kept.append(f"{key} = {value.strip()}")
        lines = kept
    return parse_config_string("\n".join(lines), source=source, base_dir=base_dir)


def _resolve(values: dict, lines: dict, source: str, base_dir: str) -> ExperimentConfig:
    for key, spec in _SCHEMA.items():
        if spec.required and key not in values:
            raise ConfigError(f"{source}: missing mandatory key '{key}' (section [{spec.section}])")
    arch = values["architecture"]
    if arch not in ARCHITECTURES:
        raise ConfigError(
            f"{source}:{lines['architecture']}: unknown architecture {arch!r}, "
            f"expected one of {ARCHITECTURES}")

    def get(key):
        if key in values:
            return values[key]
        return _SCHEMA[key].default

    nfft = values["nfft"]
    ncp = get("ncp")
    if ncp is None:
        ncp = max(nfft // 16, 1)

    profile_name = get("profile")
    try:
        profile = builtin_profile(profile_name)
    except ProfileError:
        path = profile_name
        if not os.path.isabs(path) and not os.path.exists(path):
            candidate = os.path.join(base_dir, path)
            if os.path.exists(candidate):
                path = candidate
        if not os.path.exists(path):
            raise ConfigError(
                f"{source}: profile {profile_name!r} is neither a built-in name nor a readable file"
            ) from None
        profile = load_profile(path)
    doppler = get("doppler_hz")
    if doppler is not None:
        if doppler < 0:
            raise ConfigError(f"{source}:{lines.get('doppler_hz', '?')}: doppler_hz must be >= 0")
        profile = replace(profile, doppler_hz=float(doppler))

    defaults = default_hyperparameters(arch)
    hp_kwargs = {}
    for key in _RATE_KEYS:
        value = get(key)
        hp_kwargs[key] = getattr(defaults, key) if value is None else float(value)
    hp = Hyperparameters(mu0=float(get("mu0")), epsilon=float(get("epsilon")),
                         smoothing_window=int(get("smoothing_window")), **hp_kwargs)
    hidden = get("hidden")
    if hidden is None:
        hidden = default_hidden_width(arch)

    try:
        return ExperimentConfig(
            ntx=values["ntx"], nrx=values["nrx"], nfft=nfft, ncp=ncp,
            mod_order=values["mod_order"],
            subcarrier_spacing_hz=float(get("subcarrier_spacing_hz")),
            profile=profile, identity_channel=bool(get("identity_channel")),
            architecture=arch, n_hidden=int(hidden), hp=hp,
            pilot_period=int(get("pilot_period")), upsample=int(get("upsample")),
            upsample_mode=str(get("upsample_mode")),
            ebn0_db=float(values["ebn0_db"]), n_frames=int(values["n_frames"]),
            warmup_frames=int(get("warmup_frames")), seeds=tuple(get("seeds")),
            noise_seed=get("noise_seed"),
        )
    except ConfigError as err:
        raise ConfigError(f"{source}: {err}") from None


def describe_schema() -> str:
    """Human-readable key reference (section, type, default, description)."""
    out = []
    current = None
    for key, spec in _SCHEMA.items():
        if spec.section != current:
            current = spec.section
            out.append(f"[{current}]")
        default = "required" if spec.required else f"default {spec.default!r}"
        out.append(f"  {key} ({spec.type}, {default}): {spec.doc}")
    return "\n".join(out)
