"""Key performance indicators of simulated days and policy comparisons."""

from __future__ import annotations

import csv
import dataclasses as dc
import math
import typing as ty
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ghostkitchen._defaults import EPS
from ghostkitchen.simulation import EpisodeLog

CLOSE_THRESHOLD = 10.0
"""Direct drive minutes separating close from far customers."""


@dc.dataclass(frozen=True)
class KpiReport:
    orders: int = 0
    avg_delay: float = 0.0
    pct_late: float = 0.0
    avg_late_delay: float = 0.0
    max_delay: float = 0.0
    avg_click_to_door: float = 0.0
    avg_orders_per_trip: float = 0.0
    total_travel: float = 0.0
    """Driving minutes over all trips."""
    avg_freshness: float = 0.0
    close_delay: float = 0.0
    far_delay: float = 0.0
    close_late_delay: float = 0.0
    far_late_delay: float = 0.0
    delay_by_food_type: Mapping[int, float] = dc.field(default_factory=dict[int, float])

    def scalars(self) -> dict[str, float]:
        return {
            field.name: float(getattr(self, field.name))
            for field in dc.fields(self)
            if field.name != "delay_by_food_type"
        }


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def compute_kpis(log: EpisodeLog, close_threshold: float = CLOSE_THRESHOLD) -> KpiReport:
    deliveries = log.deliveries
    if not deliveries:
        return KpiReport()
    delays = [d.delay for d in deliveries]
    late = [d.delay for d in deliveries if d.delay > EPS]
    close = [d for d in deliveries if d.direct_travel < close_threshold]
    far = [d for d in deliveries if d.direct_travel >= close_threshold]
    by_type: dict[int, list[float]] = {}
    for d in deliveries:
        by_type.setdefault(d.food_type, []).append(d.delay)
    return KpiReport(
        orders=len(deliveries),
        avg_delay=_mean(delays),
        pct_late=100.0 * len(late) / len(deliveries),
        avg_late_delay=_mean(late),
        max_delay=max(delays),
        avg_click_to_door=_mean([d.arrival - d.t_order for d in deliveries]),
        avg_orders_per_trip=len(deliveries) / len(log.trips) if log.trips else 0.0,
        total_travel=math.fsum(trip.driving for trip in log.trips),
        avg_freshness=_mean([d.freshness for d in deliveries]),
        close_delay=_mean([d.delay for d in close]),
        far_delay=_mean([d.delay for d in far]),
        close_late_delay=_mean([d.delay for d in close if d.delay > EPS]),
        far_late_delay=_mean([d.delay for d in far if d.delay > EPS]),
        delay_by_food_type={f: _mean(v) for f, v in sorted(by_type.items())},
    )


def freshness_violations(log: EpisodeLog, limits: Sequence[float]) -> int:
    """Deliveries whose ready-to-door time exceeds their food type's limit."""
    return sum(1 for d in log.deliveries if d.freshness > limits[d.food_type] + EPS)


# =============================================================================
# Aggregation over days
# =============================================================================


@dc.dataclass(frozen=True)
class BenchmarkRow:
    policy: str
    days: int
    mean: KpiReport
    """Day averages of each KPI; ``max_delay`` is the mean of daily maxima."""
    global_max_delay: float


def aggregate(policy: str, logs: Sequence[EpisodeLog]) -> BenchmarkRow:
    reports = [compute_kpis(log) for log in logs]
    if not reports:
        return BenchmarkRow(policy, 0, KpiReport(), 0.0)
    scalars = [report.scalars() for report in reports]
    mean = {key: _mean([row[key] for row in scalars]) for key in scalars[0]}
    by_type: dict[int, list[float]] = {}
    for report in reports:
        for food_type, value in report.delay_by_food_type.items():
            by_type.setdefault(food_type, []).append(value)
    mean_report = KpiReport(
        orders=round(mean["orders"]),
        avg_delay=mean["avg_delay"],
        pct_late=mean["pct_late"],
        avg_late_delay=mean["avg_late_delay"],
        max_delay=mean["max_delay"],
        avg_click_to_door=mean["avg_click_to_door"],
        avg_orders_per_trip=mean["avg_orders_per_trip"],
        total_travel=mean["total_travel"],
        avg_freshness=mean["avg_freshness"],
        close_delay=mean["close_delay"],
        far_delay=mean["far_delay"],
        close_late_delay=mean["close_late_delay"],
        far_late_delay=mean["far_late_delay"],
        delay_by_food_type={f: _mean(v) for f, v in sorted(by_type.items())},
    )
    return BenchmarkRow(
        policy, len(reports), mean_report, max(report.max_delay for report in reports)
    )


def improvement(baseline: float, candidate: float) -> float:
    """Percent improvement of ``candidate`` over ``baseline``, relative to the candidate."""
    if abs(candidate) <= EPS:
        return 0.0 if abs(baseline) <= EPS else math.copysign(math.inf, baseline)
    return (baseline - candidate) / candidate * 100.0


def improvement_table(
    rows: Sequence[BenchmarkRow], baseline: str = "fifo"
) -> dict[str, dict[str, float]]:
    """Per policy, the percent improvement over ``baseline`` on each KPI."""
    reference = next((row for row in rows if row.policy == baseline), None)
    if reference is None:
        return {}
    base = reference.mean.scalars()
    return {
        row.policy: {
            key: improvement(base[key], value)
            for key, value in row.mean.scalars().items()
            if key != "orders"
        }
        for row in rows
    }


def write_benchmark_csv(path: Path, preset: str, rows: Sequence[BenchmarkRow]) -> None:
    improvements = improvement_table(rows)
    keys = list(KpiReport().scalars())
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["preset", "policy", "days", *keys, "global_max_delay", "imp_avg_delay_over_fifo"]
        )
        for row in rows:
            scalars = row.mean.scalars()
            writer.writerow(
                [
                    preset,
                    row.policy,
                    row.days,
                    *(f"{scalars[key]:.6f}" for key in keys),
                    f"{row.global_max_delay:.6f}",
                    f"{improvements.get(row.policy, {}).get('avg_delay', 0.0):.6f}",
                ]
            )


# =============================================================================
# Utilization
# =============================================================================


class Utilization(ty.NamedTuple):
    starts: npt.NDArray[np.float64]
    cooks: npt.NDArray[np.float64]
    """Share of cooks preparing during each bucket."""
    vehicles: npt.NDArray[np.float64]
    """Share of vehicles away from the kitchen during each bucket."""


def _busy(
    intervals: Sequence[tuple[float, float]], edges: npt.NDArray[np.float64], bucket: float
) -> npt.NDArray[np.float64]:
    busy = np.zeros(len(edges) - 1)
    for begin, end in intervals:
        overlap = np.minimum(edges[1:], end) - np.maximum(edges[:-1], begin)
        busy += np.clip(overlap, 0.0, bucket)
    return busy


def utilization_series(
    log: EpisodeLog,
    n_cooks: int,
    n_vehicles: int,
    bucket: float = 1.0,
    horizon: float | None = None,
) -> Utilization:
    """Per-bucket share of busy cooks and vehicles over the day."""
    if bucket <= 0:
        raise ValueError("bucket must be positive")
    end = horizon if horizon is not None else max(
        [t.return_time for t in log.trips] + [d.ready for d in log.deliveries] + [0.0]
    )
    count = max(1, math.ceil(end / bucket))
    edges = np.arange(count + 1, dtype=np.float64) * bucket
    cooking = [(d.start, d.ready) for d in log.deliveries]
    driving = [(t.departure, t.return_time) for t in log.trips]
    return Utilization(
        edges[:-1],
        _busy(cooking, edges, bucket) / (bucket * max(n_cooks, 1)),
        _busy(driving, edges, bucket) / (bucket * max(n_vehicles, 1)),
    )


def write_utilization_csv(path: Path, day: int, policy: str, series: Utilization) -> None:
    with path.open("a", newline="") as f:
        writer = csv.writer(f)
        if f.tell() == 0:
            writer.writerow(["day", "policy", "minute", "cooks", "vehicles"])
        for start, cooks, vehicles in zip(series.starts, series.cooks, series.vehicles, strict=True):
            writer.writerow([day, policy, f"{start:g}", f"{cooks:.6f}", f"{vehicles:.6f}"])
