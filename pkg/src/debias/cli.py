"""Command-line entry point.

Subcommands: simulate | fit | correct | evaluate | cv | serve.
Exit codes: 0 ok, 1 runtime failure, 2 usage/config error.
Log verbosity via the DEBIAS_LOG environment variable (DEBUG/INFO/...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .core_model import TimeSlot
from .errors import (
    DebiasError,
    EmptyTestPeriod,
    InvalidSpec,
    OutOfRange,
    UnknownHour,
)
from .estimation import FittedModel, ParamMode, Strategy, fit_strategy
from .evaluation import (
    loocv,
    render_report,
    render_scores,
    rmse_by_hour,
    rmse_by_station,
)
from .ingest import (
    build_observations,
    load_dataset,
    load_devices,
    load_map_stack,
    sample_initial_at_devices,
    split_periods,
)
from .mapops import combine_initial, correct_map, write_grid
from .zoning import ZoningMode

log = logging.getLogger("debias")


def _setup_logging() -> None:
    level = os.environ.get("DEBIAS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--devices", required=True, help="devices.csv path")
    p.add_argument("--measurements", required=True, help="measurements.csv path")
    p.add_argument("--maps", required=True, help="map stack manifest JSON")
    p.add_argument("--out", required=True, help="output directory")


def _add_fit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", action="append", dest="strategies",
                   choices=[s.value for s in Strategy],
                   help="repeatable; default: all three")
    p.add_argument("--zoning", choices=["stations", "all"], default="stations",
                   help="zoning for the pool strategy")
    p.add_argument("--hours", default="all",
                   help="'all' or comma-separated hour list")
    p.add_argument("--learn-until", dest="learn_until", default=None,
                   help="last learning slot, e.g. 2017-01-31T23")
    p.add_argument("--param-mode", dest="param_mode",
                   choices=["hourly", "global"], default="hourly")
    p.add_argument("--clamp", action="store_true",
                   help="truncate negative corrected values to zero")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="debias",
        description="Zone-wise affine bias correction of air-quality maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic scene")
    p.add_argument("--spec", required=True, help="scene spec JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the spec's seed")

    p = sub.add_parser("fit", help="fit bias models")
    _add_data_args(p)
    _add_fit_args(p)

    p = sub.add_parser("correct", help="write a corrected map for one slot")
    p.add_argument("--devices", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--model", required=True, help="fitted model JSON")
    p.add_argument("--slot", required=True, action="append", dest="slots",
                   help="repeatable slot key, e.g. 2017-02-09T06")
    p.add_argument("--out", required=True)
    p.add_argument("--clamp", action="store_true")

    p = sub.add_parser("evaluate", help="test-period RMSE per hour and station")
    _add_data_args(p)
    _add_fit_args(p)

    p = sub.add_parser("cv", help="leave-one-out cross-validation")
    _add_data_args(p)
    _add_fit_args(p)

    p = sub.add_parser("serve", help="run the HTTP service and web UI")
    p.add_argument("--devices", required=True)
    p.add_argument("--measurements", required=True)
    p.add_argument("--maps", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    return parser


def _parse_hours(text: str, available: tuple[int, ...]) -> tuple[int, ...]:
    if text == "all":
        return available
    hours = tuple(sorted({int(tok) for tok in text.split(",") if tok.strip()}))
    if any(not 0 <= h <= 23 for h in hours):
        raise ValueError(f"hours out of range: {text}")
    return hours


def _write_provenance(out: Path, args: argparse.Namespace) -> None:
    doc = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    doc["command"] = args.command
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


class _Context:
    """Loaded inputs shared by fit / evaluate / cv."""

    def __init__(self, args):
        self.dataset = load_dataset(args.devices, args.measurements)
        self.stack = load_map_stack(args.maps)
        self.ptilde = sample_initial_at_devices(self.dataset.devices,
                                                self.stack,
                                                self.dataset.slots())
        slots = self.dataset.slots()
        if args.learn_until:
            learn_until = TimeSlot.parse(args.learn_until)
        else:
            learn_until = slots[-1]
        self.learn, self.test = split_periods(self.dataset, learn_until)
        self.learn_obs = build_observations(self.learn, self.ptilde)
        self.test_obs = build_observations(self.test, self.ptilde)
        self.hours = _parse_hours(args.hours,
                                  tuple(sorted({o.slot.hour for o in self.learn_obs})))
        self.param_mode = ParamMode(args.param_mode)
        self.pool_zoning = (ZoningMode.STATIONS_ONLY if args.zoning == "stations"
                            else ZoningMode.ALL_DEVICES)
        names = args.strategies or [s.value for s in Strategy]
        self.strategies = [Strategy(n) for n in dict.fromkeys(names)]


def cmd_simulate(args) -> int:
    from .synthgen import SceneSpec, generate_scene, write_scene

    with open(args.spec, encoding="utf-8") as fh:
        doc = json.load(fh)
    if args.seed is not None:
        doc["seed"] = args.seed
    spec = SceneSpec.from_dict(doc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_provenance(out, args)
    scene = generate_scene(spec)
    write_scene(scene, out)
    print(f"scene written to {out} "
          f"({len(scene.devices)} devices, {len(scene.measurements)} measurements)")
    return 0


def cmd_fit(args) -> int:
    ctx = _Context(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_provenance(out, args)
    for strat in ctx.strategies:
        model = fit_strategy(strat, ctx.learn_obs, ctx.dataset.devices,
                             ctx.hours, ctx.param_mode, ctx.pool_zoning)
        path = out / f"model_{strat.value}.json"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(model.to_json())
            fh.write("\n")
        summary = model.degeneracy_summary()
        flag_txt = (", ".join(f"{k}={v}" for k, v in sorted(summary.items()))
                    or "none")
        print(f"{strat.value}: {path} (zones={model.zoning.K}, "
              f"degeneracies: {flag_txt})")
    return 0


def cmd_correct(args) -> int:
    devices = {d.id: d for d in load_devices(args.devices)}
    stack = load_map_stack(args.maps)
    with open(args.model, encoding="utf-8") as fh:
        model = FittedModel.from_dict(json.load(fh), devices)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_provenance(out, args)
    for slot_key in args.slots:
        slot = TimeSlot.parse(slot_key)
        if not model.has_hour(slot.hour):
            raise UnknownHour(f"model not fitted for hour {slot.hour}")
        initial = combine_initial(stack, slot)
        corrected, clamp_counts = correct_map(initial, model, slot.hour,
                                              clamp=args.clamp)
        path = out / f"corrected_{model.strategy.value}_{slot_key}.grid"
        write_grid(corrected, path)
        total = sum(clamp_counts.values())
        print(f"{path} (clamped cells: {total}"
              + (f", by zone {clamp_counts}" if clamp_counts else "") + ")")
    return 0


def cmd_evaluate(args) -> int:
    ctx = _Context(args)
    if not ctx.test_obs:
        raise EmptyTestPeriod("no test-period observations; set --learn-until")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_provenance(out, args)
    by_hour = {"initial": rmse_by_hour(None, ctx.test_obs, ctx.dataset.devices,
                                       ctx.hours)}
    by_station = {"initial": rmse_by_station(None, ctx.test_obs,
                                             ctx.dataset.devices)}
    for strat in ctx.strategies:
        model = fit_strategy(strat, ctx.learn_obs, ctx.dataset.devices,
                             ctx.hours, ctx.param_mode, ctx.pool_zoning)
        by_hour[strat.value] = rmse_by_hour(model, ctx.test_obs,
                                            ctx.dataset.devices, ctx.hours)
        by_station[strat.value] = rmse_by_station(model, ctx.test_obs,
                                                  ctx.dataset.devices)
    doc = {
        "rmse_by_hour": {s: {str(h): v for h, v in d.items()}
                         for s, d in by_hour.items()},
        "rmse_by_station": by_station,
    }
    with open(out / "evaluate.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    table = render_scores(by_station)
    with open(out / "evaluate.txt", "w", encoding="utf-8") as fh:
        fh.write(table)
    print(table, end="")
    return 0


def cmd_cv(args) -> int:
    ctx = _Context(args)
    if not ctx.test_obs:
        raise EmptyTestPeriod("no test-period observations; set --learn-until")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_provenance(out, args)
    report = loocv(ctx.learn_obs, ctx.test_obs, ctx.dataset.devices,
                   ctx.strategies, ctx.hours, ctx.param_mode, ctx.pool_zoning)
    with open(out / "cv.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    table = render_report(report)
    with open(out / "cv.txt", "w", encoding="utf-8") as fh:
        fh.write(table)
    print(table, end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(devices_path=args.devices,
                     measurements_path=args.measurements,
                     maps_path=args.maps)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "correct": cmd_correct,
    "evaluate": cmd_evaluate,
    "cv": cmd_cv,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: missing input file: {exc.filename}", file=sys.stderr)
        return 2
    except (InvalidSpec, OutOfRange) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, DebiasError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
