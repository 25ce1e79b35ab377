"""Experiment configuration: flat dotted-key text files, defaults, resolution.

Config files are lines of `section.key = value` with `#` comments. Units
are part of the key name (dBm, dB, degrees at the boundary); everything is
converted to SI when the component objects are built. An empty config
reproduces the reference setup: every key has a default.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .actions import RECIPROCAL_SQUARE, SCHEMES, ActionGrid, build_grid
from .agent import PAD_DB_DEFAULT, TrainConfig
from .channel import ChannelParams, ScenarioConfig
from .radio import RadioParams
from .units import db_to_linear, dbm_to_watts, deg_to_rad


class ConfigError(ValueError):
    """Invalid config file; message carries the offending line number."""


def _as_int(s: str) -> int:
    return int(s)


def _as_float(s: str) -> float:
    return float(s)


def _as_optional_float(s: str):
    return None if s.lower() in ("none", "off") else float(s)


def _as_scheme(s: str) -> str:
    if s not in SCHEMES:
        raise ValueError(f"expected one of {SCHEMES}")
    return s


def _as_str(s: str) -> str:
    return s


# key -> (converter, default)
SCHEMA: dict = {
    "scenario.n_links": (_as_int, 10),
    "scenario.side_len_m": (_as_float, 20.0),
    "scenario.max_pair_dist_m": (_as_optional_float, None),
    "channel.c_los_db": (_as_float, -60.0),
    "channel.alpha_los": (_as_float, 2.0),
    "channel.c_nlos_db": (_as_float, -70.0),
    "channel.alpha_nlos": (_as_float, 4.0),
    "channel.blockage_beta_per_m": (_as_float, 0.006),
    "channel.nakagami_m": (_as_float, 3.0),
    "channel.ref_dist_m": (_as_float, 5.0),
    "channel.carrier_ghz": (_as_float, 28.0),
    "radio.bandwidth_ghz": (_as_float, 1.0),
    "radio.noise_density_dbm_per_hz": (_as_float, -145.0),
    "radio.slot_s": (_as_float, 1.0),
    "radio.pilot_s": (_as_float, 0.001),
    "radio.sector_tx_deg": (_as_float, 90.0),
    "radio.sector_rx_deg": (_as_float, 90.0),
    "radio.side_lobe_gain": (_as_float, 0.1),
    "radio.p_max_dbm": (_as_float, 30.0),
    "grid.scheme": (_as_scheme, RECIPROCAL_SQUARE),
    "grid.n_power": (_as_int, 8),
    "grid.n_beamwidth": (_as_int, 8),
    "grid.p_min_dbm": (_as_float, 2.0),
    "grid.p_max_dbm": (_as_float, 30.0),
    "grid.phi_min_deg": (_as_float, 3.0),
    "grid.phi_max_deg": (_as_float, 30.0),
    "train.prefill_episodes": (_as_int, 2000),
    "train.decay_episodes": (_as_int, 100_000),
    "train.final_episodes": (_as_int, 10_000),
    "train.epsilon_start": (_as_float, 0.2),
    "train.batch_size": (_as_int, 256),
    "train.learning_rate": (_as_float, 0.001),
    "train.buffer_capacity": (_as_int, 50_000),
    "eval.trials": (_as_int, 500),
    "eval.es_budget": (_as_int, 2_000_000),
    "eval.underest_resolution": (_as_int, 1000),
    "eval.workers": (_as_int, 1),
    "output.dir": (_as_str, "results"),
    "run.seed": (_as_int, 1),
    "run.pad_db": (_as_float, PAD_DB_DEFAULT),
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse `key = value` lines against the schema; errors cite the line."""
    values: dict = {}
    seen_lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        if key in seen_lines:
            raise ConfigError(
                f"{source}: line {lineno}: duplicate key {key!r} (first set on line {seen_lines[key]})")
        conv, _ = SCHEMA[key]
        try:
            values[key] = conv(val)
        except ValueError as exc:
            raise ConfigError(f"{source}: line {lineno}: bad value for {key}: {exc}") from None
        seen_lines[key] = lineno
    return values


def resolve(overrides: dict | None = None, seed: int | None = None) -> dict:
    """Defaults with overrides applied; optional seed replaces run.seed."""
    resolved = {k: default for k, (_, default) in SCHEMA.items()}
    for k, v in (overrides or {}).items():
        if k not in SCHEMA:
            raise ConfigError(f"unknown key {k!r}")
        resolved[k] = v
    if seed is not None:
        resolved["run.seed"] = seed
    return resolved


def resolved_text(resolved: dict) -> str:
    """Canonical dump of a resolved config (sorted keys, repr values)."""
    return "\n".join(f"{k} = {resolved[k]!r}" for k in sorted(resolved)) + "\n"


def config_hash(resolved: dict) -> str:
    return hashlib.sha256(resolved_text(resolved).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class GridSpec:
    """Grid recipe in SI units; built against radio params for validation."""

    scheme: str
    n_power: int
    n_beamwidth: int
    p_min_w: float
    p_max_w: float
    phi_min_rad: float
    phi_max_rad: float

    def build(self, radio: RadioParams | None = None) -> ActionGrid:
        return build_grid(self.n_power, self.n_beamwidth, self.p_min_w, self.p_max_w,
                          self.phi_min_rad, self.phi_max_rad, self.scheme, radio=radio)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, in SI units."""

    scenario: ScenarioConfig
    radio: RadioParams
    grid_spec: GridSpec
    train: TrainConfig
    trials: int = 500
    es_budget: int = 2_000_000
    underest_resolution: int = 1000
    workers: int = 1
    out_dir: str = "results"
    pad_db: float = PAD_DB_DEFAULT
    seed: int = 1
    resolved: dict = field(default_factory=dict, compare=False)

    @property
    def hash(self) -> str:
        return config_hash(self.resolved)


def build_experiment(resolved: dict) -> ExperimentConfig:
    """Component objects (SI units) from a resolved key-value map."""
    channel = ChannelParams(
        c_los=float(db_to_linear(resolved["channel.c_los_db"])),
        alpha_los=resolved["channel.alpha_los"],
        c_nlos=float(db_to_linear(resolved["channel.c_nlos_db"])),
        alpha_nlos=resolved["channel.alpha_nlos"],
        beta=resolved["channel.blockage_beta_per_m"],
        nakagami_m=resolved["channel.nakagami_m"],
        ref_dist_m=resolved["channel.ref_dist_m"],
        carrier_hz=resolved["channel.carrier_ghz"] * 1e9,
    )
    seed = resolved["run.seed"]
    scenario = ScenarioConfig(
        n_links=resolved["scenario.n_links"],
        side_len=resolved["scenario.side_len_m"],
        channel=channel,
        seed=seed,
        max_pair_dist=resolved["scenario.max_pair_dist_m"],
    )
    radio = RadioParams(
        bandwidth_w=resolved["radio.bandwidth_ghz"] * 1e9,
        noise_density=float(dbm_to_watts(resolved["radio.noise_density_dbm_per_hz"])),
        slot_t=resolved["radio.slot_s"],
        pilot_tp=resolved["radio.pilot_s"],
        sector_tx=float(deg_to_rad(resolved["radio.sector_tx_deg"])),
        sector_rx=float(deg_to_rad(resolved["radio.sector_rx_deg"])),
        side_lobe_z=resolved["radio.side_lobe_gain"],
        p_max=float(dbm_to_watts(resolved["radio.p_max_dbm"])),
    )
    grid_spec = GridSpec(
        scheme=resolved["grid.scheme"],
        n_power=resolved["grid.n_power"],
        n_beamwidth=resolved["grid.n_beamwidth"],
        p_min_w=float(dbm_to_watts(resolved["grid.p_min_dbm"])),
        p_max_w=float(dbm_to_watts(resolved["grid.p_max_dbm"])),
        phi_min_rad=float(deg_to_rad(resolved["grid.phi_min_deg"])),
        phi_max_rad=float(deg_to_rad(resolved["grid.phi_max_deg"])),
    )
    train_cfg = TrainConfig(
        prefill_episodes=resolved["train.prefill_episodes"],
        decay_episodes=resolved["train.decay_episodes"],
        final_episodes=resolved["train.final_episodes"],
        epsilon_start=resolved["train.epsilon_start"],
        batch_size=resolved["train.batch_size"],
        learning_rate=resolved["train.learning_rate"],
        buffer_capacity=resolved["train.buffer_capacity"],
        seed=seed,
    )
    return ExperimentConfig(
        scenario=scenario, radio=radio, grid_spec=grid_spec, train=train_cfg,
        trials=resolved["eval.trials"], es_budget=resolved["eval.es_budget"],
        underest_resolution=resolved["eval.underest_resolution"],
        workers=resolved["eval.workers"], out_dir=resolved["output.dir"],
        pad_db=resolved["run.pad_db"], seed=seed, resolved=dict(resolved),
    )


def load_experiment(path: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Read a config file (or use pure defaults) and build the experiment."""
    overrides = None
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            overrides = parse_config_text(fh.read(), source=str(path))
    return build_experiment(resolve(overrides, seed=seed))
