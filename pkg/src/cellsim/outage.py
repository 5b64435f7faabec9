"""Outage probability: closed form and Monte Carlo estimation.

The closed form covers a single desired exponential power against a sum of
independent exponential interferers plus a constant, which is exactly the
sectored-uplink outage once conditional mean powers are fixed.  Monte Carlo
estimation covers both architectures over random user drops; all thresholds
are evaluated on the same drops (common random numbers), so every outage
curve is non-decreasing by construction.

Each drop derives its randomness from (seed, drop_index) alone, which makes
results independent of evaluation order and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .channel import ChannelParams, draw_link_matrix
from .geometry import (
    Architecture,
    Layout,
    interferer_cell_centers,
    sample_hexagon_xy,
    serving_sector_indices,
)
from .sir import combine_columns, per_antenna_sir_matrix

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

Z_95 = 1.96  # two-sided 95% normal quantile


@dataclass(frozen=True)
class ExponentialMix:
    """One exponential variable compared against a shifted sum of others.

    ``desired_rate`` is the rate (1/mean) of the variable under test,
    ``interferer_rates`` the rates of the summed variables, ``offset`` the
    added constant.
    """

    desired_rate: float
    interferer_rates: tuple[float, ...] = ()
    offset: float = 0.0

    def __post_init__(self):
        if self.desired_rate <= 0.0:
            raise ValueError(f"desired_rate must be positive, got {self.desired_rate}")
        if any(rate <= 0.0 for rate in self.interferer_rates):
            raise ValueError("interferer rates must all be positive")
        if self.offset < 0.0:
            raise ValueError(f"offset must be >= 0, got {self.offset}")


@dataclass(frozen=True)
class OutageCurve:
    """Outage estimates over a threshold sweep, with 95% half-widths.

    Drops are the independent unit for the confidence intervals; users within
    a drop share interference and are correlated.
    """

    architecture: str
    thresholds_db: np.ndarray
    estimates: np.ndarray
    ci_half_widths: np.ndarray
    n_drops: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "thresholds_db", np.asarray(self.thresholds_db, float))
        object.__setattr__(self, "estimates", np.asarray(self.estimates, float))
        object.__setattr__(self, "ci_half_widths", np.asarray(self.ci_half_widths, float))
        if not (
            self.thresholds_db.shape == self.estimates.shape == self.ci_half_widths.shape
        ):
            raise ValueError("curve arrays must share one shape")
        if np.any(self.estimates < 0.0) or np.any(self.estimates > 1.0):
            raise ValueError("outage estimates must lie in [0, 1]")
        if np.any(np.diff(self.estimates) < 0.0):
            raise ValueError("estimates must be non-decreasing in threshold")
        if np.any(self.ci_half_widths < 0.0):
            raise ValueError("confidence half-widths must be >= 0")


@dataclass(frozen=True)
class ReportRow:
    threshold_db: float
    used: float
    used_ci: float
    micro: float
    micro_ci: float
    micro_minus_used: float
    micro_not_better: bool


def prob_exponential_below_sum(mix: ExponentialMix) -> float:
    """P(z_desired <= sum(z_interferers) + offset) for independent exponentials.

    Closed form: with r the desired rate and r_i the interferer rates,

        1 - [exp(r * offset) * prod_i (1 + r / r_i)]**-1

    evaluated in the log domain, so the result stays accurate in [0, 1] even
    for extreme rate ratios.
    """
    rate = mix.desired_rate
    log_factor = rate * mix.offset
    for other in mix.interferer_rates:
        log_factor += math.log1p(rate / other)
    return -math.expm1(-log_factor)


def analytic_outage_used(
    mean_desired: float,
    mean_interferers: Sequence[float],
    eta: float,
    pg: float,
    threshold: float,
) -> float:
    """Closed-form sectored-uplink outage from conditional mean powers.

    ``threshold`` is linear.  Interferers with zero mean contribute nothing
    and are skipped; the desired mean must be positive.
    """
    if mean_desired <= 0.0:
        raise ValueError(f"mean_desired must be positive, got {mean_desired}")
    if pg <= 0.0:
        raise ValueError(f"processing gain must be positive, got {pg}")
    if threshold < 0.0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    if eta < 0.0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if any(m < 0.0 for m in mean_interferers):
        raise ValueError("interferer means must be >= 0")
    if threshold == 0.0:
        return 0.0
    log_factor = eta * threshold / (pg * mean_desired)
    for mean in mean_interferers:
        log_factor += math.log1p(threshold * mean / (pg * mean_desired))
    return -math.expm1(-log_factor)


def _validate_thresholds(thresholds_db) -> np.ndarray:
    arr = np.asarray(thresholds_db, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("thresholds must be a nonempty 1-D sequence")
    if np.any(np.diff(arr) <= 0.0):
        raise ValueError("thresholds must be sorted strictly ascending")
    return arr


def _drop_rngs(seed: int, drop: int, stream_tag: int):
    """Independent generators for user placement and channel draws.

    Keyed purely by (seed, tag, drop), so a drop's randomness never depends
    on which worker evaluates it or in what order.
    """
    ss_pos = np.random.SeedSequence(seed, spawn_key=(stream_tag, drop, 0))
    ss_chan = np.random.SeedSequence(seed, spawn_key=(stream_tag, drop, 1))
    return np.random.default_rng(ss_pos), np.random.default_rng(ss_chan)


def _count_outages(args) -> np.ndarray:
    """Outage counts per threshold over a contiguous range of drops."""
    layout, scenario, thr_linear, seed, drop_start, drop_stop, stream_tag = args
    params: ChannelParams = scenario.channel_params()
    eta = scenario.resolved_noise_power()
    pg = scenario.processing_gain
    n_users = scenario.n_users
    cells = [layout.cell_center] + interferer_cell_centers(
        layout.cell_radius, scenario.interferer_tiers, layout.cell_center
    )
    counts = np.zeros(thr_linear.size, dtype=np.int64)
    for drop in range(drop_start, drop_stop):
        rng_pos, rng_chan = _drop_rngs(seed, drop, stream_tag)
        xy = np.vstack(
            [sample_hexagon_xy(layout.cell_radius, c, n_users, rng_pos) for c in cells]
        )
        link = draw_link_matrix(layout, xy, params, rng_chan, drop)
        gamma = per_antenna_sir_matrix(
            link.gains, scenario.tx_power, eta, pg, n_observed=n_users
        )
        if layout.architecture is Architecture.USED:
            serving = serving_sector_indices(layout, xy[:n_users])
            sirs = gamma[serving, np.arange(n_users)]
        else:
            sirs = combine_columns(gamma, scenario.combiner_mode)
        counts += (sirs[:, None] <= thr_linear[None, :]).sum(axis=0)
    return counts


def mc_outage(
    layout: Layout,
    scenario: "ScenarioConfig",
    thresholds_db,
    n_drops: int,
    seed: int,
    workers: int = 1,
    stream_tag: int = 0,
) -> OutageCurve:
    """Monte Carlo outage curve for one architecture.

    Every threshold is evaluated against the same drops, so the curve is
    exactly non-decreasing.  Counts are integers and drops are seeded
    individually, which keeps the result identical for any ``workers``.
    ``stream_tag`` namespaces the random streams; paired comparisons run both
    architectures with the same tag and seed.
    """
    if n_drops < 1:
        raise ValueError(f"n_drops must be >= 1, got {n_drops}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    thr_db = _validate_thresholds(thresholds_db)
    thr_linear = 10.0 ** (thr_db / 10.0)

    if workers == 1:
        counts = _count_outages((layout, scenario, thr_linear, seed, 0, n_drops, stream_tag))
    else:
        bounds = np.linspace(0, n_drops, workers + 1, dtype=int)
        jobs = [
            (layout, scenario, thr_linear, seed, int(a), int(b), stream_tag)
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        counts = np.zeros(thr_linear.size, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_count_outages, jobs):
                counts += chunk
    n_samples = n_drops * scenario.n_users
    return _curve_from_counts(
        layout.architecture.value, thr_db, counts, n_samples, n_drops, seed
    )


def mc_outage_exponential(
    mean_desired: float,
    mean_interferers: Sequence[float],
    eta: float,
    pg: float,
    thresholds_db,
    n_drops: int,
    seed: int,
) -> OutageCurve:
    """Monte Carlo outage in the matched-means abstraction.

    Gains are pure exponentials with the given means and no geometry; one
    drop is one joint draw.  This is the simulation twin of
    :func:`analytic_outage_used` and shares its parameters.
    """
    if mean_desired <= 0.0:
        raise ValueError(f"mean_desired must be positive, got {mean_desired}")
    if n_drops < 1:
        raise ValueError(f"n_drops must be >= 1, got {n_drops}")
    thr_db = _validate_thresholds(thresholds_db)
    thr_linear = 10.0 ** (thr_db / 10.0)
    means = np.asarray(list(mean_interferers), dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    desired = rng.exponential(mean_desired, n_drops)
    interference = (
        rng.exponential(means, (n_drops, means.size)).sum(axis=1)
        if means.size
        else np.zeros(n_drops)
    )
    denom = interference + eta
    numer = pg * desired
    with np.errstate(divide="ignore", invalid="ignore"):
        sirs = numer / denom
    sirs = np.where(denom > 0.0, sirs, np.where(numer > 0.0, np.inf, 0.0))
    counts = (sirs[:, None] <= thr_linear[None, :]).sum(axis=0).astype(np.int64)
    return _curve_from_counts("matched-exponential", thr_db, counts, n_drops, n_drops, seed)


def _curve_from_counts(architecture, thr_db, counts, n_samples, n_drops, seed) -> OutageCurve:
    estimates = counts / n_samples
    half_widths = Z_95 * np.sqrt(estimates * (1.0 - estimates) / n_drops)
    return OutageCurve(
        architecture=architecture,
        thresholds_db=thr_db,
        estimates=estimates,
        ci_half_widths=half_widths,
        n_drops=n_drops,
        seed=seed,
    )


def outage_report(used_curve: OutageCurve, micro_curve: OutageCurve) -> list[ReportRow]:
    """Per-threshold comparison of the two architectures.

    Curves must come from the same sweep, drop count and seed.  Rows flag
    thresholds where the microzone estimate is strictly worse than used.
    """
    if not np.array_equal(used_curve.thresholds_db, micro_curve.thresholds_db):
        raise ValueError("curves have mismatched thresholds")
    if used_curve.n_drops != micro_curve.n_drops:
        raise ValueError("curves have mismatched drop counts")
    if used_curve.seed != micro_curve.seed:
        raise ValueError("curves have mismatched seeds")
    rows = []
    for i, thr in enumerate(used_curve.thresholds_db):
        diff = float(micro_curve.estimates[i] - used_curve.estimates[i])
        rows.append(
            ReportRow(
                threshold_db=float(thr),
                used=float(used_curve.estimates[i]),
                used_ci=float(used_curve.ci_half_widths[i]),
                micro=float(micro_curve.estimates[i]),
                micro_ci=float(micro_curve.ci_half_widths[i]),
                micro_minus_used=diff,
                micro_not_better=diff > 0.0,
            )
        )
    return rows


def format_report(rows: Sequence[ReportRow]) -> str:
    """Readable table for terminal output."""
    header = (
        f"{'thr_dB':>7} {'used':>10} {'used_ci':>10} {'micro':>10} "
        f"{'micro_ci':>10} {'micro-used':>11}  flag"
    )
    lines = [header]
    for row in rows:
        flag = "micro>=used" if row.micro_not_better else ""
        lines.append(
            f"{row.threshold_db:>7.6g} {row.used:>10.6g} {row.used_ci:>10.3g} "
            f"{row.micro:>10.6g} {row.micro_ci:>10.3g} {row.micro_minus_used:>11.6g}  {flag}"
        )
    return "\n".join(lines)
