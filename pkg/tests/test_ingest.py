import datetime as dt

import pytest

from debias.core_model import Device, Kind, Measurement, TimeSlot
from debias.errors import (
    DuplicateId,
    DuplicateSlot,
    OutOfRange,
    ParseError,
    UnknownDevice,
)
from debias.ingest import (
    Dataset,
    build_observations,
    load_dataset,
    load_devices,
    load_map_stack,
    load_measurements,
    sample_initial_at_devices,
    split_periods,
    write_devices_csv,
    write_measurements_csv,
)
from debias.synthgen import generate_scene, write_scene

from conftest import two_zone_spec

DEVICES_CSV = """id,kind,x,y
S1,station,-30.0,0.5
M1,sensor,-20.0,0.5
"""

MEAS_CSV = """device_id,timestamp,value_ugm3
S1,2017-01-01T06,31.5
S1,2017-01-01T07,
M1,2017-01-01T06,42.0
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_devices(tmp_path):
    devs = load_devices(write(tmp_path, "d.csv", DEVICES_CSV))
    assert [d.id for d in devs] == ["S1", "M1"]
    assert devs[0].kind is Kind.STATION and devs[1].kind is Kind.SENSOR
    assert devs[0].x == -30.0


def test_load_devices_bad_header(tmp_path):
    p = write(tmp_path, "d.csv", "id,type,x,y\nS1,station,0,0\n")
    with pytest.raises(ParseError, match=":1:"):
        load_devices(p)


def test_load_devices_bad_kind_reports_line(tmp_path):
    p = write(tmp_path, "d.csv", "id,kind,x,y\nS1,probe,0,0\n")
    with pytest.raises(ParseError, match=":2:"):
        load_devices(p)


def test_load_devices_bad_coordinate(tmp_path):
    p = write(tmp_path, "d.csv", "id,kind,x,y\nS1,station,east,0\n")
    with pytest.raises(ParseError, match=":2:"):
        load_devices(p)


def test_load_devices_duplicate_id(tmp_path):
    p = write(tmp_path, "d.csv",
              "id,kind,x,y\nS1,station,0,0\nS1,station,1,1\n")
    with pytest.raises(DuplicateId, match=":3:"):
        load_devices(p)


def test_load_measurements(tmp_path):
    registry = {d.id: d for d in load_devices(write(tmp_path, "d.csv", DEVICES_CSV))}
    ms, missing = load_measurements(write(tmp_path, "m.csv", MEAS_CSV), registry)
    assert len(ms) == 2
    assert ms[0].value == 31.5
    assert ms[0].slot == TimeSlot(dt.date(2017, 1, 1), 6)
    # empty value field records a missing slot, never a zero
    assert missing == [("S1", TimeSlot(dt.date(2017, 1, 1), 7))]


def test_load_measurements_unknown_device(tmp_path):
    registry = {d.id: d for d in load_devices(write(tmp_path, "d.csv", DEVICES_CSV))}
    p = write(tmp_path, "m.csv",
              "device_id,timestamp,value_ugm3\nSX,2017-01-01T06,1.0\n")
    with pytest.raises(UnknownDevice, match=":2:"):
        load_measurements(p, registry)


def test_load_measurements_duplicate_slot(tmp_path):
    registry = {d.id: d for d in load_devices(write(tmp_path, "d.csv", DEVICES_CSV))}
    p = write(tmp_path, "m.csv",
              "device_id,timestamp,value_ugm3\n"
              "S1,2017-01-01T06,1.0\nS1,2017-01-01T06,2.0\n")
    with pytest.raises(DuplicateSlot, match=":3:"):
        load_measurements(p, registry)


def test_load_measurements_bad_timestamp(tmp_path):
    registry = {d.id: d for d in load_devices(write(tmp_path, "d.csv", DEVICES_CSV))}
    p = write(tmp_path, "m.csv",
              "device_id,timestamp,value_ugm3\nS1,2017-01-01 06:00,1.0\n")
    with pytest.raises(ParseError, match=":2:"):
        load_measurements(p, registry)


def test_write_read_roundtrip(tmp_path):
    devs = [Device(id="S1", kind=Kind.STATION, x=-30.0, y=0.5),
            Device(id="M1", kind=Kind.SENSOR, x=-20.25, y=0.5)]
    ms = [Measurement("S1", TimeSlot(dt.date(2017, 1, 1), 6), 31.53125),
          Measurement("M1", TimeSlot(dt.date(2017, 1, 1), 6), 42.0)]
    missing = [("S1", TimeSlot(dt.date(2017, 1, 1), 7))]
    write_devices_csv(devs, tmp_path / "d.csv")
    write_measurements_csv(ms, tmp_path / "m.csv", missing)
    ds = load_dataset(tmp_path / "d.csv", tmp_path / "m.csv")
    assert set(ds.devices) == {"S1", "M1"}
    assert ds.devices["M1"].x == -20.25  # bit exact through repr
    assert sorted((m.device_id, m.slot.key(), m.value) for m in ds.measurements) == \
        sorted((m.device_id, m.slot.key(), m.value) for m in ms)
    assert ds.missing == missing
    # reserialization is byte identical
    write_devices_csv(list(ds.devices.values()), tmp_path / "d2.csv")
    write_measurements_csv(ds.measurements, tmp_path / "m2.csv", ds.missing)
    assert (tmp_path / "d.csv").read_bytes() == (tmp_path / "d2.csv").read_bytes()
    assert (tmp_path / "m.csv").read_bytes() == (tmp_path / "m2.csv").read_bytes()


def test_split_periods():
    devs = {"S1": Device(id="S1", kind=Kind.STATION, x=0, y=0)}
    ms = [Measurement("S1", TimeSlot(dt.date(2017, 1, d), h), float(d * 100 + h))
          for d in (1, 2, 3) for h in (6, 9)]
    ds = Dataset(devices=devs, measurements=ms)
    learn, test = split_periods(ds, TimeSlot(dt.date(2017, 1, 2), 9))
    assert len(learn.measurements) == 4 and len(test.measurements) == 2
    # disjoint and exhaustive
    lk = {(m.device_id, m.slot.key()) for m in learn.measurements}
    tk = {(m.device_id, m.slot.key()) for m in test.measurements}
    assert not (lk & tk) and len(lk | tk) == len(ms)
    assert all(m.slot <= TimeSlot(dt.date(2017, 1, 2), 9) for m in learn.measurements)
    with pytest.raises(OutOfRange):
        split_periods(ds, TimeSlot(dt.date(2016, 12, 31), 6))
    with pytest.raises(OutOfRange):
        split_periods(Dataset(devices=devs, measurements=[]),
                      TimeSlot(dt.date(2017, 1, 1), 6))


def test_without_device_keeps_registry():
    devs = {"S1": Device(id="S1", kind=Kind.STATION, x=0, y=0),
            "S2": Device(id="S2", kind=Kind.STATION, x=1, y=0)}
    ms = [Measurement("S1", TimeSlot(dt.date(2017, 1, 1), 6), 1.0),
          Measurement("S2", TimeSlot(dt.date(2017, 1, 1), 6), 2.0)]
    fold = Dataset(devices=devs, measurements=ms).without_device("S1")
    assert set(fold.devices) == {"S1", "S2"}
    assert [m.device_id for m in fold.measurements] == ["S2"]


def test_scene_files_load_back(tmp_path):
    spec = two_zone_spec(n_days=3, hours=(6, 9))
    scene = generate_scene(spec)
    write_scene(scene, tmp_path)
    ds = load_dataset(tmp_path / "devices.csv", tmp_path / "measurements.csv")
    stack = load_map_stack(tmp_path / "maps" / "manifest.json")
    assert len(ds.devices) == len(spec.devices)
    assert stack.fine.same_geometry(scene.stack.fine)
    assert set(stack.coarse) == {s.key() for s in spec.slots()}

    table = sample_initial_at_devices(ds.devices, stack, ds.slots())
    assert not table.omitted_devices and not table.skipped_slots
    obs = build_observations(ds, table)
    # conservation: one observation per measurement
    assert len(obs) == len(ds.measurements)
    by_key = {(m.device_id, m.slot.key()): m.value for m in ds.measurements}
    for o in obs:
        assert o.x == by_key[(o.device_id, o.slot.key())]


def test_out_of_extent_device_omitted(tmp_path):
    spec = two_zone_spec(n_days=2, hours=(6,))
    scene = generate_scene(spec)
    devices = dict(scene.devices)
    devices["FAR"] = Device(id="FAR", kind=Kind.STATION, x=1e6, y=1e6)
    table = sample_initial_at_devices(devices, scene.stack, list(spec.slots()))
    assert table.omitted_devices == {"FAR": "OutOfExtent"}
    ms = list(scene.measurements)
    ms.append(Measurement("FAR", spec.slots()[0], 10.0))
    ds = Dataset(devices=devices, measurements=ms)
    obs = build_observations(ds, table)
    assert all(o.device_id != "FAR" for o in obs)
    assert len(obs) == len(ms) - 1
