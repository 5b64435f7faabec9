"""Experiment configuration, orchestration and export.

Configs are flat ``key = value`` text, one key per line, ``#`` comments, with
optional SI suffixes (kHz, MHz, kb/s, Mchip/s, dB, m).  Unknown keys are
rejected rather than silently ignored.  ``run_experiment`` evaluates the
requested architectures on identical random streams (paired drops) and emits
a CSV threshold table any plotting tool can consume.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import integrate

from .channel import ChannelParams, path_gain_constant
from .geometry import (
    Position,
    build_layout,
    hexagon_area,
    hexagon_boundary_radius,
    hexagon_contains,
    interferer_cell_centers,
    wrap_angle,
)
from .outage import OutageCurve, analytic_outage_used, mc_outage
from .sir import COMBINER_MODES, processing_gain

LN10_OVER_10 = math.log(10.0) / 10.0

ARCHITECTURE_CHOICES = ("used", "microzone", "both")


class ConfigError(ValueError):
    """Raised for malformed config text or invariant violations."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Full experiment description; defaults reproduce the baseline scenario.

    ``noise_power`` of None means automatic: 30 dB below the fading-averaged
    power a single cell-edge user delivers to a full-gain antenna, which
    keeps the system interference limited.  ``thresholds`` is a
    (start, stop, step) sweep in dB.  The default combiner sums branch SIRs
    (classical MRC); the ``paper`` mode is the self-normalized convex
    weighting, selectable here or via the CLI.  One ring of co-channel
    neighbor cells interferes by default; set ``interferer_tiers`` to 0 for
    an isolated cell.
    """

    architecture: str = "both"
    n_users: int = 40
    bit_rate: float = 45e3  # b/s
    chip_rate: float = 3.8e6  # chip/s
    thresholds: tuple[float, float, float] = (-10.0, 10.0, 1.0)
    rho: float = 4.0
    shadowing_sigma_db: float = 5.0
    noise_power: Optional[float] = None  # watts; None = auto
    cell_radius: float = 1000.0  # m
    cluster_size: int = 1
    beamwidth_deg: float = 120.0
    tx_power: float = 1.0  # watts, uniform across users
    d_min: float = 1.0  # m
    n_drops: int = 1000
    master_seed: int = 1
    combiner_mode: str = "classical-mrc"
    interferer_tiers: int = 1
    paired: bool = True
    wavelength: float = 0.15  # m (2 GHz carrier)
    max_gain_db: float = 0.0
    floor_gain_db: float = float("-inf")

    def validate(self) -> None:
        finite_fields = (
            "bit_rate", "chip_rate", "rho", "shadowing_sigma_db", "cell_radius",
            "beamwidth_deg", "tx_power", "d_min", "wavelength", "max_gain_db",
        )
        for name in finite_fields + ("thresholds", "noise_power"):
            value = getattr(self, name)
            if value is None:
                continue
            values = value if isinstance(value, tuple) else (value,)
            if not all(math.isfinite(v) for v in values):
                raise ConfigError(f"{name} must be finite, got {value}")
        if math.isnan(self.floor_gain_db) or self.floor_gain_db == math.inf:
            raise ConfigError(f"floor_gain_db must be a number or -inf, got {self.floor_gain_db}")
        if self.architecture not in ARCHITECTURE_CHOICES:
            raise ConfigError(
                f"architecture must be one of {ARCHITECTURE_CHOICES}, got {self.architecture!r}"
            )
        if self.n_users < 1:
            raise ConfigError(f"n_users must be >= 1, got {self.n_users}")
        if self.bit_rate <= 0.0 or self.chip_rate < self.bit_rate:
            raise ConfigError("need chip_rate >= bit_rate > 0")
        start, stop, step = self.thresholds
        if step <= 0.0 or stop < start:
            raise ConfigError(f"thresholds sweep must have stop >= start and step > 0, got {self.thresholds}")
        if not 2.0 <= self.rho <= 5.0:
            raise ConfigError(f"rho must be in [2, 5], got {self.rho}")
        if not 0.0 <= self.shadowing_sigma_db <= 12.0:
            raise ConfigError(f"shadowing_sigma must be in [0, 12] dB, got {self.shadowing_sigma_db}")
        if self.noise_power is not None and self.noise_power < 0.0:
            raise ConfigError(f"noise_power must be >= 0 or auto, got {self.noise_power}")
        if self.cell_radius <= 0.0:
            raise ConfigError(f"cell_radius must be positive, got {self.cell_radius}")
        if self.cluster_size != 1:
            raise ConfigError("only cluster_size 1 (universal frequency reuse) is modeled")
        if self.beamwidth_deg not in (60.0, 120.0):
            raise ConfigError(f"beamwidth must be 60 or 120 degrees, got {self.beamwidth_deg}")
        if self.tx_power < 0.0:
            raise ConfigError(f"tx_power must be >= 0, got {self.tx_power}")
        if self.d_min <= 0.0:
            raise ConfigError(f"d_min must be positive, got {self.d_min}")
        if self.n_drops < 1:
            raise ConfigError(f"n_drops must be >= 1, got {self.n_drops}")
        if self.master_seed < 0:
            raise ConfigError(f"master_seed must be >= 0, got {self.master_seed}")
        if self.combiner_mode not in COMBINER_MODES:
            raise ConfigError(f"combiner_mode must be one of {COMBINER_MODES}, got {self.combiner_mode!r}")
        if self.interferer_tiers not in (0, 1, 2):
            raise ConfigError(f"interferer_tiers must be 0, 1 or 2, got {self.interferer_tiers}")
        if self.wavelength <= 0.0:
            raise ConfigError(f"wavelength must be positive, got {self.wavelength}")
        if self.floor_gain_db > self.max_gain_db:
            raise ConfigError("floor_gain_db must not exceed max_gain_db")

    # Derived quantities ---------------------------------------------------

    @property
    def sector_count(self) -> int:
        return int(round(360.0 / self.beamwidth_deg))

    @property
    def thresholds_db(self) -> np.ndarray:
        start, stop, step = self.thresholds
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(n)

    @property
    def processing_gain(self) -> float:
        return processing_gain(self.chip_rate, self.bit_rate)

    @property
    def max_gain(self) -> float:
        return 10.0 ** (self.max_gain_db / 10.0)

    @property
    def floor_gain(self) -> float:
        return 0.0 if math.isinf(self.floor_gain_db) else 10.0 ** (self.floor_gain_db / 10.0)

    def channel_params(self) -> ChannelParams:
        return ChannelParams(
            wavelength=self.wavelength,
            tx_gain=1.0,
            rx_gain=1.0,
            path_loss_exponent=self.rho,
            shadowing_std_db=self.shadowing_sigma_db,
            d_min=self.d_min,
        )

    def resolved_noise_power(self) -> float:
        if self.noise_power is not None:
            return self.noise_power
        edge_power = (
            path_gain_constant(self.wavelength, 1.0, 1.0)
            * self.max_gain
            * self.cell_radius ** (-self.rho)
            * self.tx_power
        )
        return edge_power * 1e-3


@dataclass(frozen=True)
class ExperimentResult:
    config: ScenarioConfig
    curves: dict[str, OutageCurve]
    analytic_used: Optional[np.ndarray]
    elapsed_seconds: float


# Config text grammar ------------------------------------------------------

_RATE_UNITS = {
    "": 1.0,
    "Hz": 1.0,
    "kHz": 1e3,
    "MHz": 1e6,
    "b/s": 1.0,
    "kb/s": 1e3,
    "Mb/s": 1e6,
    "chip/s": 1.0,
    "chips/s": 1.0,
    "kchip/s": 1e3,
    "Mchip/s": 1e6,
}


_QUANTITY_RE = re.compile(
    r"(?i)([-+]?(?:inf(?:inity)?|nan|(?:\d+\.?\d*|\.\d+)(?:e[-+]?\d+)?))\s*(\S.*)?"
)


def _split_quantity(text: str) -> tuple[str, str]:
    match = _QUANTITY_RE.fullmatch(text.strip())
    if match:
        return match.group(1), (match.group(2) or "").strip()
    return text.strip(), ""


def _number(text: str, units: dict[str, float]) -> float:
    num, unit = _split_quantity(text)
    if unit not in units:
        raise ValueError(f"unsupported unit {unit!r}")
    try:
        value = float(num)
    except ValueError:
        raise ValueError(f"not a number: {num!r}") from None
    return value * units[unit]


def _parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ValueError(f"not an integer: {text.strip()!r}") from None


def _parse_rate(text: str) -> float:
    return _number(text, _RATE_UNITS)


def _parse_bare(text: str) -> float:
    return _number(text, {"": 1.0})


def _parse_db(text: str) -> float:
    return _number(text, {"": 1.0, "dB": 1.0})


def _parse_meters(text: str) -> float:
    return _number(text, {"": 1.0, "m": 1.0})


def _parse_degrees(text: str) -> float:
    return _number(text, {"": 1.0, "deg": 1.0})


def _parse_watts(text: str) -> float:
    return _number(text, {"": 1.0, "W": 1.0})


def _parse_bool(text: str) -> bool:
    val = text.strip().lower()
    if val not in ("true", "false"):
        raise ValueError(f"expected true or false, got {text.strip()!r}")
    return val == "true"


def _parse_noise(text: str) -> Optional[float]:
    if text.strip().lower() == "auto":
        return None
    return _number(text, {"": 1.0, "W": 1.0})


def parse_threshold_sweep(text: str) -> tuple[float, float, float]:
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"expected START:STOP:STEP in dB, got {text.strip()!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"expected numeric START:STOP:STEP, got {text.strip()!r}") from None
    return (start, stop, step)


def _parse_choice(choices):
    def parse(text: str) -> str:
        val = text.strip()
        if val not in choices:
            raise ValueError(f"expected one of {choices}, got {val!r}")
        return val

    return parse


_KEY_PARSERS = {
    "architecture": ("architecture", _parse_choice(ARCHITECTURE_CHOICES)),
    "n_users": ("n_users", _parse_int),
    "bit_rate": ("bit_rate", _parse_rate),
    "chip_rate": ("chip_rate", _parse_rate),
    "thresholds": ("thresholds", parse_threshold_sweep),
    "rho": ("rho", _parse_bare),
    "shadowing_sigma": ("shadowing_sigma_db", _parse_db),
    "noise_power": ("noise_power", _parse_noise),
    "cell_radius": ("cell_radius", _parse_meters),
    "cluster_size": ("cluster_size", _parse_int),
    "beamwidth": ("beamwidth_deg", _parse_degrees),
    "tx_power": ("tx_power", _parse_watts),
    "d_min": ("d_min", _parse_meters),
    "n_drops": ("n_drops", _parse_int),
    "master_seed": ("master_seed", _parse_int),
    "combiner_mode": ("combiner_mode", _parse_choice(COMBINER_MODES)),
    "interferer_tiers": ("interferer_tiers", _parse_int),
    "paired": ("paired", _parse_bool),
    "wavelength": ("wavelength", _parse_meters),
    "max_gain_db": ("max_gain_db", _parse_db),
    "floor_gain_db": ("floor_gain_db", _parse_db),
}

_FIELD_TO_KEY = {field_name: key for key, (field_name, _) in _KEY_PARSERS.items()}


def parse_config(text: str) -> ScenarioConfig:
    """Parse config text; omitted keys take the defaults, unknown keys fail."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name, parser = _KEY_PARSERS[key]
        if field_name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[field_name] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    cfg = ScenarioConfig(**values)
    cfg.validate()
    return cfg


def parse_config_file(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical config text; parse_config(serialize_config(c)) == c."""
    lines = []
    for f in fields(cfg):
        key = _FIELD_TO_KEY[f.name]
        value = getattr(cfg, f.name)
        if f.name == "thresholds":
            rendered = f"{value[0]!r}:{value[1]!r}:{value[2]!r}"
        elif f.name == "noise_power":
            rendered = "auto" if value is None else repr(value)
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        else:
            rendered = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


# Analytic reference curve -------------------------------------------------

def _radial_gain_integral(r_max: float, rho: float, d_min: float) -> float:
    """Integral of max(d, d_min)**-rho * d over d in [0, r_max]."""
    if r_max <= d_min:
        return d_min ** (-rho) * r_max * r_max / 2.0
    near = d_min ** (2.0 - rho) / 2.0
    if rho == 2.0:
        far = math.log(r_max / d_min)
    else:
        far = (r_max ** (2.0 - rho) - d_min ** (2.0 - rho)) / (2.0 - rho)
    return near + far


def _wedge_gain_integral(cfg: ScenarioConfig, lo: float, hi: float) -> float:
    """Area integral of max(d, d_min)**-rho over the hexagon slice [lo, hi]."""

    def integrand(theta):
        return _radial_gain_integral(
            float(hexagon_boundary_radius(theta, cfg.cell_radius)), cfg.rho, cfg.d_min
        )

    # Split at the 30-degree grid where the boundary radius has kinks.
    grid = math.pi / 6.0
    cuts = [lo] + [
        k * grid for k in range(math.ceil(lo / grid), math.floor(hi / grid) + 1)
    ] + [hi]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a + 1e-15:
            part, _ = integrate.quad(integrand, a, b, limit=200)
            total += part
    return total


def _neighbor_gain_mean(cfg: ScenarioConfig, center: Position, boresight: float) -> float:
    """Mean of pattern * max(d, d_min)**-rho over one neighbor cell.

    Evaluated on a midpoint grid; neighbor cells sit well away from the
    antenna so the integrand is smooth.
    """
    radius = cfg.cell_radius
    n_grid = 201
    half_w = radius * math.sqrt(3.0) / 2.0
    xs = center.x + np.linspace(-half_w, half_w, n_grid)
    ys = center.y + np.linspace(-radius, radius, n_grid)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    inside = hexagon_contains(radius, center, pts)
    pts = pts[inside]
    d = np.maximum(np.hypot(pts[:, 0], pts[:, 1]), cfg.d_min)
    bearing = np.arctan2(pts[:, 1], pts[:, 0])
    offset = np.abs(wrap_angle(bearing - boresight))
    half_beam = math.pi * cfg.beamwidth_deg / 360.0
    patt = np.where(offset <= half_beam + 1e-12, cfg.max_gain, cfg.floor_gain)
    return float(np.mean(patt * d ** (-cfg.rho)))


def mean_received_powers(cfg: ScenarioConfig) -> tuple[float, float, list[float]]:
    """Ensemble mean received powers for the sectored architecture.

    Returns (desired mean, same-cell interferer mean, per-neighbor-cell
    interferer means).  Means average the fading (unit mean), the log-normal
    shadowing factor, the uniform user position, and the flat-top pattern;
    the desired user is conditioned on lying in the serving wedge.
    """
    shadow_mean = math.exp((cfg.shadowing_sigma_db * LN10_OVER_10) ** 2 / 2.0)
    base = path_gain_constant(cfg.wavelength, 1.0, 1.0) * cfg.tx_power * shadow_mean
    area = hexagon_area(cfg.cell_radius)
    half_beam = math.pi * cfg.beamwidth_deg / 360.0
    boresight = math.pi / 2.0  # sector 0; all sectors are congruent

    wedge = _wedge_gain_integral(cfg, boresight - half_beam, boresight + half_beam)
    full = _wedge_gain_integral(cfg, boresight - math.pi, boresight + math.pi)
    wedge_area = area / cfg.sector_count
    mean_desired = base * cfg.max_gain * wedge / wedge_area
    mean_in_cell = base * (cfg.max_gain * wedge + cfg.floor_gain * (full - wedge)) / area

    neighbor_means = [
        base * _neighbor_gain_mean(cfg, c, boresight)
        for c in interferer_cell_centers(cfg.cell_radius, cfg.interferer_tiers)
    ]
    return mean_desired, mean_in_cell, neighbor_means


def analytic_used_curve(cfg: ScenarioConfig) -> np.ndarray:
    """Closed-form outage for the used architecture under matched mean powers.

    Abstraction: every link power is replaced by an exponential with the
    ensemble mean matched to the geometric scenario.  Conditional means vary
    across real drops, so this is a reference curve, not an unbiased
    prediction of the Monte Carlo estimate.
    """
    mean_desired, mean_in_cell, neighbor_means = mean_received_powers(cfg)
    means = [mean_in_cell] * (cfg.n_users - 1)
    for neighbor in neighbor_means:
        means.extend([neighbor] * cfg.n_users)
    eta = cfg.resolved_noise_power()
    pg = cfg.processing_gain
    thresholds = 10.0 ** (cfg.thresholds_db / 10.0)
    return np.array(
        [analytic_outage_used(mean_desired, means, eta, pg, thr) for thr in thresholds]
    )


# Orchestration ------------------------------------------------------------

def run_experiment(cfg: ScenarioConfig, workers: int = 1) -> ExperimentResult:
    """Run the configured architectures on identical seeds and assemble results.

    With ``paired`` set (the default) both architectures consume the same
    random streams, so they see identical user drops and channel draws.
    """
    cfg.validate()
    start = time.perf_counter()
    if cfg.architecture == "both":
        archs = ["used", "microzone"]
    else:
        archs = [cfg.architecture]

    curves: dict[str, OutageCurve] = {}
    for arch in archs:
        layout = build_layout(cfg, arch)
        tag = 0 if cfg.paired else 1 + archs.index(arch)
        curves[arch] = mc_outage(
            layout,
            cfg,
            cfg.thresholds_db,
            cfg.n_drops,
            cfg.master_seed,
            workers=workers,
            stream_tag=tag,
        )
    analytic = analytic_used_curve(cfg) if "used" in archs else None
    elapsed = time.perf_counter() - start
    return ExperimentResult(
        config=cfg, curves=curves, analytic_used=analytic, elapsed_seconds=elapsed
    )


# CSV export ---------------------------------------------------------------

CSV_HEADER = "threshold_db,used_mc,used_ci,used_analytic,micro_mc,micro_ci,micro_minus_used"


def _csv_num(value: Optional[float]) -> str:
    return "NA" if value is None else f"{value:.6g}"


def render_csv(result: ExperimentResult) -> str:
    """CSV text with one row per threshold; absent columns hold 'NA'."""
    used = result.curves.get("used")
    micro = result.curves.get("microzone")
    thresholds = result.config.thresholds_db
    lines = [CSV_HEADER]
    for i, thr in enumerate(thresholds):
        used_mc = float(used.estimates[i]) if used is not None else None
        used_ci = float(used.ci_half_widths[i]) if used is not None else None
        analytic = (
            float(result.analytic_used[i]) if result.analytic_used is not None else None
        )
        micro_mc = float(micro.estimates[i]) if micro is not None else None
        micro_ci = float(micro.ci_half_widths[i]) if micro is not None else None
        diff = micro_mc - used_mc if used is not None and micro is not None else None
        lines.append(
            ",".join(
                [
                    _csv_num(float(thr)),
                    _csv_num(used_mc),
                    _csv_num(used_ci),
                    _csv_num(analytic),
                    _csv_num(micro_mc),
                    _csv_num(micro_ci),
                    _csv_num(diff),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_csv(result: ExperimentResult, destination) -> None:
    """Write the CSV table to a path or text file object."""
    text = render_csv(result)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
