"""Scenario configuration: parameter container, validation and file loading."""

import json
import math
from dataclasses import dataclass, fields, asdict

import yaml

from ._validation import ConfigurationError

#: config keys that must be integers
_INT_FIELDS = {"num_aps", "num_antennas", "num_rps", "pilot_length", "rss_samples", "seed"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Immutable description of the radio environment and sampling budget.

    Distances are in metres, powers in mW or dBm as named, angles in degrees.
    """

    area_side_m: float = 200.0
    num_aps: int = 9
    num_antennas: int = 8
    num_rps: int = 64
    pilot_length: int = 1
    carrier_freq_hz: float = 2.0e9
    antenna_spacing_wavelengths: float = 0.5
    ap_height_m: float = 10.0
    ue_height_m: float = 1.5
    tx_power_mw: float = 100.0
    noise_power_dbm: float = -96.0
    noise_figure_db: float = 8.0
    pathloss_ref_db: float = -28.8
    pathloss_exp: float = 3.53
    shadow_sigma_db: float = 8.0
    decorr_dist_m: float = 13.0
    angular_spread_deg: float = 10.0
    rss_samples: int = 200
    offline_aoa_noise_deg: float = 2.0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        pos = {
            "area_side_m": self.area_side_m,
            "carrier_freq_hz": self.carrier_freq_hz,
            "antenna_spacing_wavelengths": self.antenna_spacing_wavelengths,
            "ap_height_m": self.ap_height_m,
            "ue_height_m": self.ue_height_m,
            "tx_power_mw": self.tx_power_mw,
            "decorr_dist_m": self.decorr_dist_m,
        }
        for name, value in pos.items():
            if not math.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{name} must be strictly positive, got {value!r}")
        if self.num_aps < 1:
            raise ConfigurationError(f"num_aps must be >= 1, got {self.num_aps}")
        if self.num_antennas < 2:
            raise ConfigurationError(f"num_antennas must be >= 2, got {self.num_antennas}")
        root = math.isqrt(self.num_rps)
        if self.num_rps < 1 or root * root != self.num_rps:
            raise ConfigurationError(f"num_rps must be a perfect square, got {self.num_rps}")
        if self.pilot_length < 1:
            raise ConfigurationError(f"pilot_length must be >= 1, got {self.pilot_length}")
        if self.rss_samples < 1:
            raise ConfigurationError(f"rss_samples must be >= 1, got {self.rss_samples}")
        if self.shadow_sigma_db < 0:
            raise ConfigurationError(f"shadow_sigma_db must be >= 0, got {self.shadow_sigma_db}")
        if self.offline_aoa_noise_deg < 0:
            raise ConfigurationError(
                f"offline_aoa_noise_deg must be >= 0, got {self.offline_aoa_noise_deg}"
            )
        # the disk model's closed form assumes sin(spread) ~ spread
        if not 0 <= self.angular_spread_deg <= 15.0:
            raise ConfigurationError(
                f"angular_spread_deg must lie in [0, 15] degrees, got {self.angular_spread_deg}"
            )

    @property
    def grid_side(self) -> int:
        return math.isqrt(self.num_rps)

    @property
    def noise_power_mw(self) -> float:
        """Effective noise power in mW; the receiver noise figure is folded in."""
        return 10.0 ** ((self.noise_power_dbm + self.noise_figure_db) / 10.0)

    def replace(self, **kwargs) -> "ScenarioConfig":
        params = asdict(self)
        params.update(kwargs)
        return ScenarioConfig(**params)

    def to_dict(self) -> dict:
        return asdict(self)


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a flat mapping, ignoring unknown keys."""
    known = {f.name for f in fields(ScenarioConfig)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            continue
        if key in _INT_FIELDS:
            if value != int(value):
                raise ConfigurationError(f"{key} must be an integer, got {value!r}")
            value = int(value)
        else:
            value = float(value)
        kwargs[key] = value
    return ScenarioConfig(**kwargs)


def load_config_file(path) -> dict:
    """Parse a YAML (or JSON) config file into a flat dict."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    data = yaml.safe_load(text)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must contain a mapping")
    return data


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
