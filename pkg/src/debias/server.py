"""HTTP/JSON service for the interactive analyst tool.

Single-writer / multi-reader: at most one fit runs at a time (409 while in
flight); finished fits replace an immutable snapshot atomically and every
response carries the snapshot's fit id, so readers never see a half-updated
model.  Serves the built web UI bundle at / when present.
"""

from __future__ import annotations

import itertools
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles

from .core_model import Kind, TimeSlot, correct
from .errors import MissingSlot, OutOfRange
from .estimation import FittedModel, ParamMode, Strategy, fit_strategy
from .evaluation import rmse_by_hour, rmse_by_station
from .ingest import (
    Dataset,
    build_observations,
    load_dataset,
    load_map_stack,
    sample_initial_at_devices,
    split_periods,
)
from .mapops import GridMap, MapStack, combine_initial, correct_map
from .zoning import ZoningMode, assign, build_zones


@dataclass
class FitSnapshot:
    """Immutable result of one completed fit."""

    fit_id: int
    learn_until: str
    param_mode: ParamMode
    zoning_mode: ZoningMode
    hours: tuple[int, ...]
    models: dict[str, FittedModel]
    test_obs: list
    flags: dict[str, dict[str, int]]


@dataclass
class SessionState:
    dataset: Dataset
    stack: MapStack
    ptilde: object
    status: str = "idle"  # idle | running | failed
    error: str = ""
    snapshot: FitSnapshot | None = None
    _fit_ids: itertools.count = field(default_factory=lambda: itertools.count(1))
    _lock: threading.Lock = field(default_factory=threading.Lock)


def _grid_payload(grid: GridMap, stride: int) -> dict:
    values = grid.values[::stride, ::stride]
    payload = [[None if v == grid.nodata else float(v) for v in row]
               for row in values]
    return {
        "header": {
            "ncols": values.shape[1],
            "nrows": values.shape[0],
            "xllcorner": grid.xllcorner,
            "yllcorner": grid.ymax - values.shape[0] * grid.cellsize * stride,
            "cellsize": grid.cellsize * stride,
        },
        "values": payload,
    }


def _run_fit(state: SessionState, fit_id: int, learn_until_key: str,
             strategies: list[Strategy], param_mode: ParamMode,
             zoning_mode: ZoningMode) -> None:
    try:
        learn, test = split_periods(state.dataset, TimeSlot.parse(learn_until_key))
        learn_obs = build_observations(learn, state.ptilde)
        test_obs = build_observations(test, state.ptilde)
        hours = tuple(sorted({o.slot.hour for o in learn_obs}))
        models = {}
        flags = {}
        for strat in strategies:
            model = fit_strategy(strat, learn_obs, state.dataset.devices,
                                 hours, param_mode, zoning_mode)
            models[strat.value] = model
            flags[strat.value] = model.degeneracy_summary()
        snapshot = FitSnapshot(
            fit_id=fit_id, learn_until=learn_until_key, param_mode=param_mode,
            zoning_mode=zoning_mode, hours=hours, models=models,
            test_obs=test_obs, flags=flags)
        state.snapshot = snapshot  # atomic swap
        state.status = "idle"
    except Exception as exc:  # surfaced through /api/fit/status
        state.error = str(exc)
        state.status = "failed"


def create_app(devices_path=None, measurements_path=None, maps_path=None,
               dataset: Dataset | None = None, stack: MapStack | None = None,
               webui_dir=None) -> FastAPI:
    if dataset is None and devices_path is not None:
        dataset = load_dataset(devices_path, measurements_path)
        stack = load_map_stack(maps_path)
    app = FastAPI(title="debias")
    state: SessionState | None = None
    if dataset is not None:
        ptilde = sample_initial_at_devices(dataset.devices, stack,
                                           dataset.slots())
        state = SessionState(dataset=dataset, stack=stack, ptilde=ptilde)
    app.state.session = state

    def session() -> SessionState:
        if app.state.session is None:
            raise HTTPException(status_code=409, detail="no dataset loaded")
        return app.state.session

    def snapshot() -> FitSnapshot:
        snap = session().snapshot
        if snap is None:
            raise HTTPException(status_code=409, detail="no fit available")
        return snap

    @app.get("/api/devices")
    def devices():
        st = session()
        stations = st.dataset.stations()
        zoning = build_zones(stations, ZoningMode.STATIONS_ONLY) if stations else None
        omitted = st.ptilde.omitted_devices
        out = []
        for d in sorted(st.dataset.devices.values(), key=lambda d: d.id):
            entry = {
                "id": d.id, "kind": d.kind.value, "x": d.x, "y": d.y,
                "zone": assign(zoning, d.x, d.y) if zoning else None,
            }
            if d.id in omitted:
                entry["omitted"] = omitted[d.id]
            out.append(entry)
        return {"devices": out, "fit_id": getattr(st.snapshot, "fit_id", None)}

    @app.post("/api/fit", status_code=202)
    def start_fit(body: dict):
        st = session()
        with st._lock:
            if st.status == "running":
                raise HTTPException(status_code=409, detail="fit in progress")
            try:
                learn_until = body["learn_until"]
                TimeSlot.parse(learn_until)
                param_mode = ParamMode(body.get("param_mode", "hourly"))
                zoning_mode = (ZoningMode.STATIONS_ONLY
                               if body.get("zoning", "stations") == "stations"
                               else ZoningMode.ALL_DEVICES)
                names = body.get("strategies") or [s.value for s in Strategy]
                strategies = [Strategy(n) for n in names]
                slots = st.dataset.slots()
                if not (slots[0] <= TimeSlot.parse(learn_until) <= slots[-1]):
                    raise OutOfRange(learn_until)
            except (KeyError, ValueError, OutOfRange) as exc:
                raise HTTPException(status_code=400,
                                    detail=f"bad fit request: {exc}") from exc
            fit_id = next(st._fit_ids)
            st.status = "running"
            st.error = ""
        thread = threading.Thread(
            target=_run_fit,
            args=(st, fit_id, learn_until, strategies, param_mode, zoning_mode),
            daemon=True)
        thread.start()
        return {"fit_id": fit_id, "status_url": "/api/fit/status"}

    @app.get("/api/fit/status")
    def fit_status():
        st = session()
        return {
            "status": st.status,
            "error": st.error or None,
            "fit_id": getattr(st.snapshot, "fit_id", None),
            "flags": getattr(st.snapshot, "flags", None),
        }

    @app.get("/api/parameters")
    def parameters(device: str, hour: int | None = None,
                   strategy: str = "pool"):
        st = session()
        snap = snapshot()
        dev = st.dataset.devices.get(device)
        if dev is None:
            raise HTTPException(status_code=404, detail=f"unknown device {device}")
        model = snap.models.get(strategy)
        if model is None:
            raise HTTPException(status_code=409,
                                detail=f"strategy {strategy} not fitted")
        hours: list[int | None]
        if model.param_mode is ParamMode.GLOBAL:
            hours = [None]
        elif hour is not None:
            hours = [hour]
        else:
            hours = list(model.hours)
        zid = assign(model.zoning, dev.x, dev.y)
        entries = []
        for h in hours:
            fit = model.zone_fit(zid, h)
            entry = {
                "hour": h,
                "zone": zid,
                "C": fit.C if fit else 0.0,
                "rho": fit.rho if fit else 0.0,
                "sigma2": fit.sigma2 if fit else 0.0,
                "flags": list(fit.flags) if fit else ["not_fitted"],
            }
            if dev.kind is Kind.SENSOR:
                sfit = model.sensor_fit(dev.id, h)
                if sfit is not None:
                    entry["alpha"] = sfit.alpha
                    entry["beta"] = sfit.beta
                    entry["sensor_flags"] = list(sfit.flags)
            entries.append(entry)
        return {"device": device, "kind": dev.kind.value, "strategy": strategy,
                "parameters": entries, "fit_id": snap.fit_id}

    @app.get("/api/map")
    def map_endpoint(slot: str, mode: str = "initial",
                     clamp: int = 0, stride: int = Query(1, ge=1)):
        st = session()
        try:
            ts = TimeSlot.parse(slot)
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=f"bad slot {slot!r}") from exc
        try:
            initial = combine_initial(st.stack, ts)
        except MissingSlot as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if mode == "initial":
            payload = _grid_payload(initial, stride)
            payload["fit_id"] = getattr(st.snapshot, "fit_id", None)
            return payload
        if mode not in [s.value for s in Strategy]:
            raise HTTPException(status_code=400, detail=f"unknown mode {mode!r}")
        snap = snapshot()
        model = snap.models.get(mode)
        if model is None:
            raise HTTPException(status_code=409, detail=f"{mode} not fitted")
        corrected, _ = correct_map(initial, model, ts.hour, clamp=bool(clamp))
        payload = _grid_payload(corrected, stride)
        payload["fit_id"] = snap.fit_id
        return payload

    @app.get("/api/series")
    def series(device: str, mode: str = "pool", avg24: int = 0):
        st = session()
        dev = st.dataset.devices.get(device)
        if dev is None:
            raise HTTPException(status_code=404, detail=f"unknown device {device}")
        snap = st.snapshot
        model = snap.models.get(mode) if snap else None
        measured = {m.slot: m.value for m in st.dataset.measurements
                    if m.device_id == device}
        slots = sorted({m.slot for m in st.dataset.measurements})
        zid = assign(model.zoning, dev.x, dev.y) if model else None
        keys, meas, initial, corrected = [], [], [], []
        for s in slots:
            keys.append(s.key())
            meas.append(measured.get(s))
            p = st.ptilde.get(device, s)
            initial.append(p)
            if model is not None and p is not None and model.has_hour(s.hour):
                zp = model.zone_params(zid, s.hour)
                corrected.append(correct(zp, p))
            else:
                corrected.append(None)
        if avg24:
            def profile(values):
                by_hour: dict[int, list[float]] = {}
                for s, v in zip(slots, values):
                    if v is not None:
                        by_hour.setdefault(s.hour, []).append(v)
                return [float(np.mean(by_hour[h])) if h in by_hour else None
                        for h in range(24)]
            return {"device": device, "mode": mode, "avg24": True,
                    "hours": list(range(24)),
                    "measured": profile(meas), "initial": profile(initial),
                    "corrected": profile(corrected),
                    "fit_id": getattr(snap, "fit_id", None)}
        return {"device": device, "mode": mode, "avg24": False, "slots": keys,
                "measured": meas, "initial": initial, "corrected": corrected,
                "fit_id": getattr(snap, "fit_id", None)}

    @app.get("/api/rmse")
    def rmse_endpoint(scope: str = "hour", strategy: str = "pool"):
        st = session()
        snap = snapshot()
        if not snap.test_obs:
            raise HTTPException(status_code=409, detail="empty test period")
        model = None
        if strategy != "initial":
            model = snap.models.get(strategy)
            if model is None:
                raise HTTPException(status_code=409,
                                    detail=f"{strategy} not fitted")
        if scope == "hour":
            data = rmse_by_hour(model, snap.test_obs, st.dataset.devices,
                                snap.hours)
            return {"scope": "hour", "strategy": strategy,
                    "keys": [str(h) for h in data],
                    "values": list(data.values()), "fit_id": snap.fit_id}
        if scope == "station":
            data = rmse_by_station(model, snap.test_obs, st.dataset.devices)
            ordered = [d.id for d in sorted(st.dataset.devices.values(),
                                            key=lambda d: d.id)
                       if d.id in data]
            return {"scope": "station", "strategy": strategy, "keys": ordered,
                    "values": [data[k] for k in ordered], "fit_id": snap.fit_id}
        raise HTTPException(status_code=400, detail=f"unknown scope {scope!r}")

    ui_dir = webui_dir or os.environ.get("DEBIAS_WEBUI")
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="webui")
    return app
