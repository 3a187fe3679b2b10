"""RMSE scoring, leave-one-out cross-validation, and report rendering.

Scores only use reference-station measurements (sensor readings are
biased).  The leave-one-out protocol refits the whole pipeline without the
held-out station's measurements, then predicts at that station with the
parameters of the zone of the nearest eligible device: the nearest other
station for no_ms, the nearest station or usable sensor for pool and
ms_as_sta.  Ties go to the smallest device id.

``err_sum(h)`` is the plain sum of per-fold errors at hour h, as defined by
the protocol; the per-station mean is also reported, labeled separately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core_model import Device, Kind, correct
from .errors import EmptySeries, NoEligibleDevice
from .estimation import (
    FittedModel,
    Observation,
    ParamMode,
    Strategy,
    fit_strategy,
)
from .zoning import ZoningMode, assign


def rmse(pred, obs) -> float:
    """Root mean square error over paired series."""
    pred = np.asarray(pred, dtype=np.float64)
    obs = np.asarray(obs, dtype=np.float64)
    if pred.shape != obs.shape:
        raise ValueError("series lengths differ")
    if pred.size == 0:
        raise EmptySeries("no pairs to score")
    d = pred - obs
    return float(np.sqrt(np.mean(d * d)))


def _station_pairs(model: FittedModel | None, observations: list[Observation],
                   devices: dict[str, Device]):
    """(device_id, hour, predicted, measured) for station observations.

    A None model scores the initial map itself."""
    for o in observations:
        if o.kind is not Kind.STATION:
            continue
        if model is None:
            pred = o.p_tilde
        else:
            if not model.has_hour(o.slot.hour):
                continue
            dev = devices[o.device_id]
            zid = assign(model.zoning, dev.x, dev.y)
            zp = model.zone_params(zid, o.slot.hour)
            pred = correct(zp, o.p_tilde)
        yield o.device_id, o.slot.hour, pred, o.x


def rmse_by_hour(model: FittedModel | None, observations: list[Observation],
                 devices: dict[str, Device], hours: tuple[int, ...]
                 ) -> dict[int, float | None]:
    """Station-only RMSE per hour; hours with no pairs map to None."""
    buckets: dict[int, list[tuple[float, float]]] = {h: [] for h in hours}
    for _, hour, pred, meas in _station_pairs(model, observations, devices):
        if hour in buckets:
            buckets[hour].append((pred, meas))
    return {h: (rmse([p for p, _ in b], [m for _, m in b]) if b else None)
            for h, b in buckets.items()}


def rmse_by_station(model: FittedModel | None, observations: list[Observation],
                    devices: dict[str, Device]) -> dict[str, float | None]:
    buckets: dict[str, list[tuple[float, float]]] = {}
    for sid, _, pred, meas in _station_pairs(model, observations, devices):
        buckets.setdefault(sid, []).append((pred, meas))
    return {sid: rmse([p for p, _ in b], [m for _, m in b])
            for sid, b in sorted(buckets.items())}


def rmse_by_station_hour(model: FittedModel | None,
                         observations: list[Observation],
                         devices: dict[str, Device], hours: tuple[int, ...]
                         ) -> dict[str, dict[int, float | None]]:
    buckets: dict[str, dict[int, list]] = {}
    for sid, hour, pred, meas in _station_pairs(model, observations, devices):
        if hour in hours:
            buckets.setdefault(sid, {h: [] for h in hours})[hour].append((pred, meas))
    return {
        sid: {h: (rmse([p for p, _ in b], [m for _, m in b]) if b else None)
              for h, b in by_hour.items()}
        for sid, by_hour in sorted(buckets.items())
    }


def nearest_same_type(devices: dict[str, Device], target: Device,
                      strategy: Strategy,
                      usable_sensors: tuple[str, ...] = ()) -> Device:
    """Nearest other device eligible for parameter transfer under a strategy."""
    if strategy is Strategy.NO_MS:
        eligible = [d for d in devices.values()
                    if d.kind is Kind.STATION and d.id != target.id]
    else:
        usable = set(usable_sensors)
        eligible = [d for d in devices.values() if d.id != target.id
                    and (d.kind is Kind.STATION or d.id in usable)]
    if not eligible:
        raise NoEligibleDevice(f"no eligible device near {target.id}")
    return min(eligible,
               key=lambda d: ((d.x - target.x) ** 2 + (d.y - target.y) ** 2, d.id))


@dataclass
class CvReport:
    """Per-fold, per-hour leave-one-out errors and their aggregates."""

    strategies: tuple[str, ...]
    hours: tuple[int, ...]
    # strategy -> station -> hour -> RMSE (None when no test pairs)
    per_fold: dict[str, dict[str, dict[int, float | None]]]
    # strategy -> station -> overall RMSE over all test pairs
    per_station: dict[str, dict[str, float | None]]
    flags: dict[str, list[str]] = field(default_factory=dict)
    n_folds: int = 0

    def err_sum(self, strategy: str, hour: int) -> float:
        """Err(h): plain sum of per-station errors at an hour."""
        vals = [by_hour.get(hour) for by_hour in self.per_fold[strategy].values()]
        return float(sum(v for v in vals if v is not None))

    def err_mean(self, strategy: str, hour: int) -> float | None:
        vals = [v for by_hour in self.per_fold[strategy].values()
                if (v := by_hour.get(hour)) is not None]
        return float(np.mean(vals)) if vals else None

    def overall(self, strategy: str) -> float | None:
        vals = [v for v in self.per_station[strategy].values() if v is not None]
        return float(np.mean(vals)) if vals else None

    def to_dict(self) -> dict:
        return {
            "strategies": list(self.strategies),
            "hours": list(self.hours),
            "n_folds": self.n_folds,
            "per_fold": self.per_fold,
            "per_station": self.per_station,
            "err_sum": {s: {str(h): self.err_sum(s, h) for h in self.hours}
                        for s in self.strategies},
            "err_mean": {s: {str(h): self.err_mean(s, h) for h in self.hours}
                         for s in self.strategies},
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def loocv(learn_obs: list[Observation], test_obs: list[Observation],
          devices: dict[str, Device], strategies: list[Strategy],
          hours: tuple[int, ...], param_mode: ParamMode = ParamMode.HOURLY,
          pool_zoning_mode: ZoningMode = ZoningMode.STATIONS_ONLY) -> CvReport:
    """Leave-one-out over reference stations.

    Each fold refits every strategy on the learning observations without the
    held-out station, then predicts that station's test-period series from
    the zone of its nearest eligible device.  The initial map is scored the
    same way (prediction = map value) for comparison.
    """
    stations = sorted((d for d in devices.values() if d.kind is Kind.STATION),
                      key=lambda d: d.id)
    if len(stations) < 2:
        raise NoEligibleDevice("leave-one-out needs at least 2 stations")
    names = ["initial"] + [s.value for s in strategies]
    per_fold: dict[str, dict[str, dict[int, float | None]]] = {n: {} for n in names}
    per_station: dict[str, dict[str, float | None]] = {n: {} for n in names}
    flags: dict[str, list[str]] = {}

    for held in stations:
        fold_learn = [o for o in learn_obs if o.device_id != held.id]
        fold_devices = {i: d for i, d in devices.items() if i != held.id}
        target_test = [o for o in test_obs
                       if o.device_id == held.id and o.slot.hour in hours]
        # initial-map prediction is the map value itself
        pairs_by_hour: dict[int, list] = {h: [] for h in hours}
        for o in target_test:
            pairs_by_hour[o.slot.hour].append((o.p_tilde, o.x))
        _fill(per_fold["initial"], per_station["initial"], held.id,
              pairs_by_hour, hours)
        for strat in strategies:
            model = fit_strategy(strat, fold_learn, fold_devices, hours,
                                 param_mode, pool_zoning_mode)
            fold_flags = [f"{flag}x{n}" for flag, n in
                          sorted(model.degeneracy_summary().items())]
            if fold_flags:
                flags.setdefault(f"{strat.value}:{held.id}", []).extend(fold_flags)
            try:
                neighbor = nearest_same_type(fold_devices, held, strat,
                                             model.usable_sensors())
            except NoEligibleDevice:
                flags.setdefault(f"{strat.value}:{held.id}", []).append(
                    "no_eligible_device")
                _fill(per_fold[strat.value], per_station[strat.value],
                      held.id, {h: [] for h in hours}, hours)
                continue
            zid = assign(model.zoning, neighbor.x, neighbor.y)
            pairs_by_hour = {h: [] for h in hours}
            for o in target_test:
                zp = model.zone_params(zid, o.slot.hour)
                pairs_by_hour[o.slot.hour].append((correct(zp, o.p_tilde), o.x))
            _fill(per_fold[strat.value], per_station[strat.value], held.id,
                  pairs_by_hour, hours)

    return CvReport(strategies=tuple(names), hours=hours, per_fold=per_fold,
                    per_station=per_station, flags=flags, n_folds=len(stations))


def _fill(per_fold_slot: dict, per_station_slot: dict, station_id: str,
          pairs_by_hour: dict[int, list], hours: tuple[int, ...]) -> None:
    per_fold_slot[station_id] = {
        h: (rmse([p for p, _ in b], [m for _, m in b]) if b else None)
        for h, b in pairs_by_hour.items()
    }
    all_pairs = [pair for b in pairs_by_hour.values() for pair in b]
    per_station_slot[station_id] = (
        rmse([p for p, _ in all_pairs], [m for _, m in all_pairs])
        if all_pairs else None)


_COLUMN_ORDER = ("initial", "no_ms", "ms_as_sta", "pool")


def render_report(cv: CvReport) -> str:
    """Text table: one row per station, one column per strategy, the best
    corrected score per row marked with '*' (initial map never marked)."""
    columns = [c for c in _COLUMN_ORDER if c in cv.strategies]
    stations = sorted({s for strat in columns
                       for s in cv.per_station.get(strat, {})})
    width = max([len("station")] + [len(s) for s in stations])
    header = "station".ljust(width) + "".join(f"  {c:>12}" for c in columns)
    lines = [header, "-" * len(header)]
    for station in stations:
        scores = {c: cv.per_station[c].get(station) for c in columns}
        markable = {c: v for c, v in scores.items()
                    if c != "initial" and v is not None}
        best = min(markable, key=markable.get) if markable else None
        row = station.ljust(width)
        for c in columns:
            v = scores[c]
            cell = "-" if v is None else f"{v:.1f}"
            if c == best:
                cell = "*" + cell
            row += f"  {cell:>12}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def render_scores(scores_by_strategy: dict[str, dict[str, float | None]]) -> str:
    """Same table layout for non-CV per-station scores."""
    report = CvReport(
        strategies=tuple(scores_by_strategy),
        hours=(),
        per_fold={s: {} for s in scores_by_strategy},
        per_station=scores_by_strategy,
    )
    return render_report(report)
