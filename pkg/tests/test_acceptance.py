"""Acceptance gate: one test per release criterion, one PASS line each.

Every test prints ``ACCEPT <name>: PASS`` as its last action, so the
criterion outcomes can be read off the captured output (run with ``-s``
to stream them).
"""

import datetime as dt
import json
import math
import time

import numpy as np
import pytest

from debias.core_model import Device, Kind, TimeSlot
from debias.estimation import (
    DesignSystem,
    ParamMode,
    Strategy,
    fit_sensor_calibrations,
    fit_stations_only,
    fit_strategy,
    solve_ls,
)
from debias.evaluation import (
    CvReport,
    loocv,
    render_report,
    rmse,
    rmse_by_station_hour,
)
from debias.mapops import correct_map
from debias.synthgen import (
    DeviceSpec,
    device_observations,
    generate_scene,
    oracle_ls,
)
from debias.zoning import ZoningMode, assign, build_zones, validate_identifiability
from debias.cli import main as cli_main

from conftest import two_zone_spec


def ok(name):
    print(f"ACCEPT {name}: PASS")


def four_station_spec(sigma, seed=42, **kw):
    """Two stations and two sensors per zone; LOOCV neighbors stay in-zone."""
    spec = two_zone_spec(sigma=sigma, seed=seed, **kw)
    spec.devices = [
        DeviceSpec("S1", Kind.STATION, -30.0, 0.5, "left"),
        DeviceSpec("S2", Kind.STATION, -20.0, 0.5, "left"),
        DeviceSpec("S3", Kind.STATION, 20.0, 0.5, "right"),
        DeviceSpec("S4", Kind.STATION, 30.0, 0.5, "right"),
        DeviceSpec("M1", Kind.SENSOR, -25.0, 0.5, "left", alpha=1.2, beta=5.0),
        DeviceSpec("M2", Kind.SENSOR, -10.0, 0.5, "left", alpha=0.8, beta=-2.0),
        DeviceSpec("M3", Kind.SENSOR, 10.0, 0.5, "right", alpha=1.5, beta=3.0),
        DeviceSpec("M4", Kind.SENSOR, 25.0, 0.5, "right", alpha=0.9, beta=0.0),
    ]
    return spec


def test_exact_recovery(exact_scene):
    start = time.perf_counter()
    scene = exact_scene
    obs_list, devices = device_observations(scene)
    hours = tuple(range(24))
    sensor_specs = {d.id: d for d in scene.spec.devices
                    if d.kind is Kind.SENSOR}

    for strat in (Strategy.NO_MS, Strategy.MS_AS_STA, Strategy.POOL):
        model = fit_strategy(strat, obs_list, devices, hours)
        # every C_k, rho_k to <= 1e-9 relative
        for zone in model.zoning.zones:
            g = scene.spec.groups[scene.group_of_device(zone.generator)]
            for h in hours:
                zf = model.zone_fit(zone.id, h)
                assert zf.flags == ()
                assert abs(zf.C - g.C) <= 1e-9 * max(1.0, abs(g.C))
                assert abs(zf.rho - g.rho) <= 1e-9 * max(1.0, abs(g.rho))
        # every alpha_j, beta_j to <= 1e-9 relative
        if strat is not Strategy.NO_MS:
            for sid, dspec in sensor_specs.items():
                for h in hours:
                    sf = model.sensor_fit(sid, h)
                    assert sf is not None and not sf.degenerate
                    assert abs(sf.alpha - dspec.alpha) <= 1e-9 * abs(dspec.alpha)
                    assert abs(sf.beta - dspec.beta) <= 1e-9 * max(1.0, abs(dspec.beta))
        # corrected map equals the true field to <= 1e-6 relative everywhere
        for slot in (TimeSlot(dt.date(2017, 1, 1), 0),
                     TimeSlot(dt.date(2017, 1, 15), 12),
                     TimeSlot(dt.date(2017, 1, 30), 23)):
            corrected, _ = correct_map(scene.initial_map(slot), model, slot.hour)
            truth = scene.true_field(slot)
            assert np.all(np.abs(corrected.values - truth)
                          <= 1e-6 * np.maximum(1.0, np.abs(truth)))

    elapsed = time.perf_counter() - start
    assert elapsed <= 10.0, f"exact-recovery suite took {elapsed:.1f}s"
    ok("exact-recovery")


def test_statistical_recovery():
    hits = 0
    cases = 0
    for seed in range(50):
        scene = generate_scene(two_zone_spec(sigma=2.0, seed=seed))
        obs_list, devices = device_observations(scene)
        model = fit_strategy(Strategy.POOL, obs_list, devices,
                             tuple(range(24)), ParamMode.GLOBAL)
        for zone in model.zoning.zones:
            g = scene.spec.groups[scene.group_of_device(zone.generator)]
            zf = model.zone_fit(zone.id, None)
            cases += 1
            if (abs(zf.C - g.C) <= 3 * zf.se_C
                    and abs(zf.rho - g.rho) <= 3 * zf.se_rho):
                hits += 1
    assert hits / cases >= 0.95, f"coverage {hits}/{cases}"
    ok("statistical-recovery")


def test_oracle_equivalence():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        m = int(rng.integers(30, 201))
        n = int(rng.integers(2, 27))
        if n >= m:
            n = m - 1
        a = rng.normal(size=(m, n)) * rng.uniform(0.5, 20.0, size=n)
        x = rng.normal(size=m) * 10.0
        sol = solve_ls(DesignSystem(matrix=a, response=x, sensor_ids=()))
        ref = oracle_ls(a, x)
        scale = np.maximum(1.0, np.abs(ref))
        assert np.all(np.abs(sol.theta - ref) <= 1e-8 * scale)
    ok("oracle-equivalence")


def test_improvement_property():
    # bias magnitude (|C + rho P| ~ 15-20) >= 5x noise sigma
    sigma = 1.0
    scene = generate_scene(four_station_spec(sigma=sigma))
    obs_list, devices = device_observations(scene)
    hours = tuple(range(24))
    cutoff = TimeSlot(dt.date(2017, 1, 20), 23)
    learn = [o for o in obs_list if o.slot <= cutoff]
    test = [o for o in obs_list if o.slot > cutoff]

    p_vals = [o.p_tilde for o in obs_list]
    assert min(abs(5.0 + 0.4 * p) for p in p_vals) >= 5 * sigma

    initial_grid = rmse_by_station_hour(None, test, devices, hours)
    strategies = [Strategy.NO_MS, Strategy.MS_AS_STA, Strategy.POOL]
    for strat in strategies:
        model = fit_strategy(strat, learn, devices, hours)
        grid = rmse_by_station_hour(model, test, devices, hours)
        for sid, by_hour in grid.items():
            for h, v in by_hour.items():
                assert v < initial_grid[sid][h], (strat.value, sid, h)

    cv = loocv(learn, test, devices, strategies, hours)
    for strat in strategies:
        assert cv.overall(strat.value) < cv.overall("initial")
    ok("improvement-property")


def test_protocol_fidelity():
    scene = generate_scene(four_station_spec(sigma=1.0))
    obs_list, devices = device_observations(scene)
    n_stations = sum(1 for d in devices.values() if d.kind is Kind.STATION)
    cutoff = TimeSlot(dt.date(2017, 1, 20), 23)
    learn = [o for o in obs_list if o.slot <= cutoff]
    test = [o for o in obs_list if o.slot > cutoff]
    cv = loocv(learn, test, devices, [Strategy.NO_MS], (6, 9, 15, 18))

    # exactly I folds, one per reference station
    assert cv.n_folds == n_stations
    assert all(len(cv.per_fold[s]) == n_stations for s in ("initial", "no_ms"))

    # Err(h) is exactly the sum over folds, no tolerance
    for h in (6, 9, 15, 18):
        assert cv.err_sum("no_ms", h) == sum(
            cv.per_fold["no_ms"][sid][h] for sid in sorted(cv.per_fold["no_ms"]))

    # hand-computed 4-pair RMSE
    assert abs(rmse([5.0, 5.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0])
               - math.sqrt(12.5)) <= 1e-12

    # published cross-validation table reproduces its row decisions
    published = {
        "no_ms": {"Grenoble Boulevards": 17.3, "Grenoble Rocade": 18.8,
                  "Grenoble Caserne": 20.4, "Fontaine les Balmes": 15.1,
                  "Grenoble Frenes": 20.0, "Saint-Martin d'Heres": 18.7},
        "ms_as_sta": {"Grenoble Boulevards": 44.7, "Grenoble Rocade": 38.7,
                      "Grenoble Caserne": 20.1, "Fontaine les Balmes": 16.3,
                      "Grenoble Frenes": 21.6, "Saint-Martin d'Heres": 19.3},
        "pool": {"Grenoble Boulevards": 17.8, "Grenoble Rocade": 20.0,
                 "Grenoble Caserne": 21.7, "Fontaine les Balmes": 15.8,
                 "Grenoble Frenes": 21.7, "Saint-Martin d'Heres": 19.7},
    }
    report = CvReport(strategies=tuple(published), hours=(),
                      per_fold={s: {} for s in published},
                      per_station=published)
    width = max(len(s) for s in published["no_ms"])
    marked = {}
    for line in render_report(report).splitlines()[2:]:
        station = line[:width].strip()
        cells = line[width:].split()
        for col, cell in zip(("no_ms", "ms_as_sta", "pool"), cells):
            if cell.startswith("*"):
                marked[station] = col
    assert marked["Grenoble Boulevards"] == "no_ms"
    assert marked["Grenoble Caserne"] == "ms_as_sta"
    assert sum(1 for v in marked.values() if v == "no_ms") == 5
    ok("protocol-fidelity")


def test_pathology_suite():
    # constant initial-map value: flagged rank-deficient, no crash
    devices = {"S1": Device(id="S1", kind=Kind.STATION, x=0, y=0)}
    zoning = build_zones(list(devices.values()), ZoningMode.STATIONS_ONLY)
    from debias.estimation import Observation
    rows = [Observation("S1", Kind.STATION, TimeSlot(dt.date(2017, 1, d + 1), 6),
                        10.0 + d, 25.0)
            for d in range(8)]
    model = fit_stations_only(rows, devices, zoning, (6,))
    zf = model.zone_fit(1, 6)
    assert "rank_deficient" in zf.flags
    zp = model.zone_params(1, 6)
    assert zp.C == 0.0 and zp.rho == 0.0  # identity fallback

    # white-noise sensor: degenerate gain, excluded from ms_as_sta
    rng = np.random.default_rng(77)
    devices = {"S1": Device(id="S1", kind=Kind.STATION, x=0, y=0),
               "M1": Device(id="M1", kind=Kind.SENSOR, x=1, y=0)}
    zoning = build_zones([devices["S1"]], ZoningMode.STATIONS_ONLY)
    rows = []
    for d in range(40):
        slot = TimeSlot(dt.date(2017, 1, 1) + dt.timedelta(days=d), 11)
        p = float(rng.uniform(10, 80))
        rows.append(Observation("S1", Kind.STATION, slot, p, p))
        rows.append(Observation("M1", Kind.SENSOR, slot,
                                float(rng.normal(40, 5)), p))
    base = fit_stations_only(rows, devices, zoning, (11,))
    cals = fit_sensor_calibrations(rows, devices, base, (11,))
    assert "degenerate_gain" in cals["M1"]["11"].flags
    ms = fit_strategy(Strategy.MS_AS_STA, rows, devices, (11,))
    assert "M1" in ms.omitted_sensors
    assert all(g.id != "M1" for g in ms.zoning.generators)

    # negative corrected values survive unless clamped; clamps are counted
    scene = generate_scene(two_zone_spec())
    obs_list, devs = device_observations(scene)
    model = fit_strategy(Strategy.POOL, obs_list, devs, (6,))
    initial = scene.initial_map(TimeSlot(dt.date(2017, 1, 1), 6))
    low = initial.copy_with(np.full_like(initial.values, 1.0))
    out, counts = correct_map(low, model, 6, clamp=False)
    n_neg = int(np.sum(out.values < 0))
    assert n_neg > 0 and counts == {}
    clamped, counts = correct_map(low, model, 6, clamp=True)
    assert np.all(clamped.values >= 0)
    assert sum(counts.values()) == n_neg
    ok("pathology-suite")


def test_determinism(tmp_path, monkeypatch, capsys):
    spec = two_zone_spec(sigma=1.5, n_days=8, hours=(6, 9, 12))
    artifacts = {}
    for run in ("r1", "r2"):
        root = tmp_path / run
        root.mkdir()
        (root / "spec.json").write_text(json.dumps(spec.to_dict()))
        monkeypatch.chdir(root)  # relative paths keep config.json identical
        assert cli_main(["simulate", "--spec", "spec.json",
                         "--out", "scene"]) == 0
        data = ["--devices", "scene/devices.csv",
                "--measurements", "scene/measurements.csv",
                "--maps", "scene/maps/manifest.json"]
        assert cli_main(["fit", *data, "--out", "fit"]) == 0
        assert cli_main(["cv", *data, "--out", "cv",
                         "--learn-until", "2017-01-05T23"]) == 0
        capsys.readouterr()
        artifacts[run] = {
            str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()
        }
    assert artifacts["r1"].keys() == artifacts["r2"].keys()
    for rel in artifacts["r1"]:
        assert artifacts["r1"][rel] == artifacts["r2"][rel], rel
    ok("determinism")


def test_zoning_invariants():
    stations = [Device(id=f"S{i}", kind=Kind.STATION,
                       x=float(np.cos(i)) * 40, y=float(np.sin(i * 2)) * 40)
                for i in range(9)]
    sensors = [Device(id=f"M{i:02d}", kind=Kind.SENSOR,
                      x=float(np.cos(i + 0.5)) * 35, y=float(np.sin(i * 3 + 1)) * 35)
               for i in range(12)]

    z9 = build_zones(stations, ZoningMode.STATIONS_ONLY)
    z21 = build_zones(stations + sensors, ZoningMode.ALL_DEVICES)
    assert z9.K == 9 and z21.K == 21

    # stations-only zoning is always identifiable by construction
    assert validate_identifiability(z9, stations + sensors).ok

    rng = np.random.default_rng(1234)
    for zoning in (z9, z21):
        gens = zoning.generators
        for _ in range(1000):
            x = float(rng.uniform(-50, 50))
            y = float(rng.uniform(-50, 50))
            zid = assign(zoning, x, y)
            d2 = [(g.x - x) ** 2 + (g.y - y) ** 2 for g in gens]
            best = min(d2)
            winner = next(g for g in gens
                          if zoning.zone_by_generator(g.id).id == zid)
            assert (winner.x - x) ** 2 + (winner.y - y) ** 2 == pytest.approx(best)
    ok("zoning-invariants")
