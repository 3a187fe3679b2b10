"""Per-zone, per-hour least-squares estimation and the three strategies.

Within a zone, station and micro-sensor measurements are jointly linear in
the initial-map values once reparametrized as

    theta = (1/(1+rho), C/(1+rho),
             alpha_1/(1+rho), ..., alpha_J/(1+rho),
             beta_1 - alpha_1*C/(1+rho), ..., beta_J - alpha_J*C/(1+rho))

A station observation contributes the row (p_tilde, -1, 0..., 0...); the
row of sensor j is zero except p_tilde in its gain column and 1 in its
offset column.  Solving min ||X - A theta||^2 and inverting the
reparametrization recovers (C, rho) for the zone and (alpha, beta) for each
sensor, with the residual variance shared per zone.

Strategies: ``pool`` fits the joint system; ``no_ms`` uses station rows
only; ``ms_as_sta`` calibrates sensors against the no_ms correction, then
refits on the finer all-devices partition treating corrected sensor series
as stations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core_model import (
    EPS_ALPHA,
    IDENTITY_PARAMS,
    Device,
    Kind,
    SensorCalibration,
    TimeSlot,
    ZoneParameters,
    sensor_invert,
)
from .errors import (
    DegenerateSlope,
    NoStationInZone,
    Underdetermined,
    ZeroDof,
)
from .zoning import (
    Zoning,
    ZoningMode,
    assign,
    build_zones,
    validate_identifiability,
)

RANK_RTOL = 1e-10  # times the largest column norm

GLOBAL_KEY = "global"  # hour key when parameters are pooled over all hours


class Strategy(str, Enum):
    POOL = "pool"
    NO_MS = "no_ms"
    MS_AS_STA = "ms_as_sta"


class ParamMode(str, Enum):
    HOURLY = "hourly"
    GLOBAL = "global"


@dataclass(frozen=True)
class Observation:
    """One measurement paired with the initial-map value at the device."""

    device_id: str
    kind: Kind
    slot: TimeSlot
    x: float
    p_tilde: float


@dataclass
class DesignSystem:
    matrix: np.ndarray  # (n, 2 + 2J)
    response: np.ndarray  # (n,)
    sensor_ids: tuple[str, ...]  # column order of the gain/offset blocks

    @property
    def columns(self) -> tuple[str, ...]:
        j = self.sensor_ids
        return (("map_slope", "map_intercept")
                + tuple(f"gain:{s}" for s in j)
                + tuple(f"offset:{s}" for s in j))


@dataclass
class LsSolution:
    theta: np.ndarray
    residuals: np.ndarray
    rank: int
    rank_deficient: bool
    singular_values: np.ndarray
    cov_unit: np.ndarray  # (A^T A)^+ restricted to retained components


def assemble_design(observations: list[Observation],
                    sensor_ids: tuple[str, ...] | None = None) -> DesignSystem:
    """Build the joint linear system for one zone and one hour key."""
    if not any(o.kind is Kind.STATION for o in observations):
        raise NoStationInZone("zone has no reference-station observation")
    if sensor_ids is None:
        sensor_ids = tuple(sorted({o.device_id for o in observations
                                   if o.kind is Kind.SENSOR}))
    jmap = {sid: j for j, sid in enumerate(sensor_ids)}
    n = len(observations)
    ncol = 2 + 2 * len(sensor_ids)
    a = np.zeros((n, ncol))
    x = np.empty(n)
    for l, obs in enumerate(observations):
        x[l] = obs.x
        if obs.kind is Kind.STATION:
            a[l, 0] = obs.p_tilde
            a[l, 1] = -1.0
        else:
            j = jmap[obs.device_id]
            a[l, 2 + j] = obs.p_tilde
            a[l, 2 + len(sensor_ids) + j] = 1.0
    return DesignSystem(matrix=a, response=x, sensor_ids=sensor_ids)


def solve_ls(ds: DesignSystem) -> LsSolution:
    """Minimum-norm least squares via SVD with an explicit rank tolerance."""
    a, x = ds.matrix, ds.response
    n, m = a.shape
    if n < m:
        raise Underdetermined(f"{n} observations for {m} columns")
    col_norms = np.linalg.norm(a, axis=0)
    tol = RANK_RTOL * float(col_norms.max(initial=0.0))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    keep = s > tol
    rank = int(keep.sum())
    s_kept = s[keep]
    coef = (u[:, keep].T @ x) / s_kept
    theta = vt[keep].T @ coef
    residuals = x - a @ theta
    cov_unit = (vt[keep].T / s_kept**2) @ vt[keep]
    return LsSolution(
        theta=theta,
        residuals=residuals,
        rank=rank,
        rank_deficient=rank < m,
        singular_values=s,
        cov_unit=cov_unit,
    )


def estimate_variance(residuals: np.ndarray, dof: int) -> float:
    """Unbiased residual variance RSS / dof."""
    if dof <= 0:
        raise ZeroDof("no residual degrees of freedom")
    return float(residuals @ residuals) / dof


def recover_parameters(theta: np.ndarray, sensor_ids: tuple[str, ...] = ()
                       ) -> tuple[ZoneParameters, dict[str, SensorCalibration]]:
    """Invert the reparametrization: theta -> (C, rho) and per-sensor (alpha, beta)."""
    t1 = float(theta[0])
    if abs(t1) < EPS_ALPHA:
        raise DegenerateSlope(f"|theta_1| = {abs(t1):g} below guard {EPS_ALPHA:g}")
    rho = 1.0 / t1 - 1.0
    c = float(theta[1]) / t1
    zp = ZoneParameters(C=c, rho=rho)
    nj = len(sensor_ids)
    cals = {}
    for j, sid in enumerate(sensor_ids):
        gain_part = float(theta[2 + j])
        offset_part = float(theta[2 + nj + j])
        alpha = gain_part / t1
        beta = offset_part + gain_part * c
        cals[sid] = SensorCalibration(alpha=alpha, beta=beta)
    return zp, cals


def theta_from_truth(zp: ZoneParameters, cals: dict[str, SensorCalibration],
                     sensor_ids: tuple[str, ...]) -> np.ndarray:
    """Forward reparametrization, the inverse of recover_parameters."""
    den = 1.0 + zp.rho
    theta = [1.0 / den, zp.C / den]
    theta += [cals[s].alpha / den for s in sensor_ids]
    theta += [cals[s].beta - cals[s].alpha * zp.C / den for s in sensor_ids]
    return np.array(theta)


@dataclass
class ZoneFit:
    """Recovered parameters and diagnostics for one (zone, hour key)."""

    C: float = 0.0
    rho: float = 0.0
    sigma2: float = 0.0
    se_C: float = float("nan")
    se_rho: float = float("nan")
    n_obs: int = 0
    rank: int = 0
    dof: int = 0
    flags: tuple[str, ...] = ()

    @property
    def degenerate(self) -> bool:
        return bool(self.flags)

    @property
    def params(self) -> ZoneParameters:
        return ZoneParameters(C=self.C, rho=self.rho, sigma2=self.sigma2)


@dataclass
class SensorFit:
    alpha: float = 1.0
    beta: float = 0.0
    sigma2: float = 0.0
    n_obs: int = 0
    flags: tuple[str, ...] = ()

    @property
    def degenerate(self) -> bool:
        return "degenerate_gain" in self.flags or abs(self.alpha) < EPS_ALPHA

    @property
    def calibration(self) -> SensorCalibration:
        return SensorCalibration(alpha=self.alpha, beta=self.beta, sigma2=self.sigma2)


HourKey = str  # "global" or "00".."23"


def hour_key(hour: int | None) -> HourKey:
    return GLOBAL_KEY if hour is None else f"{hour:02d}"


@dataclass
class FittedModel:
    """Per-zone bias parameters and per-sensor calibrations, by hour key."""

    strategy: Strategy
    param_mode: ParamMode
    zoning: Zoning
    hours: tuple[int, ...]  # fitted hours; empty tuple in global mode
    zone_fits: dict[int, dict[HourKey, ZoneFit]]
    sensor_fits: dict[str, dict[HourKey, SensorFit]] = field(default_factory=dict)
    omitted_sensors: tuple[str, ...] = ()

    def _key(self, hour: int | None) -> HourKey:
        if self.param_mode is ParamMode.GLOBAL:
            return GLOBAL_KEY
        if hour is None:
            raise ValueError("hourly model requires an hour")
        return hour_key(hour)

    def has_hour(self, hour: int | None) -> bool:
        if self.param_mode is ParamMode.GLOBAL:
            return True
        return hour is not None and hour in self.hours

    def zone_params(self, zone_id: int, hour: int | None) -> ZoneParameters:
        """Zone parameters for an hour; identity fallback when degenerate."""
        fit = self.zone_fits.get(zone_id, {}).get(self._key(hour))
        if fit is None or fit.degenerate:
            return IDENTITY_PARAMS
        return fit.params

    def zone_fit(self, zone_id: int, hour: int | None) -> ZoneFit | None:
        return self.zone_fits.get(zone_id, {}).get(self._key(hour))

    def sensor_fit(self, sensor_id: str, hour: int | None) -> SensorFit | None:
        return self.sensor_fits.get(sensor_id, {}).get(self._key(hour))

    def usable_sensors(self) -> tuple[str, ...]:
        """Sensors with a non-degenerate calibration at every fitted hour key."""
        out = []
        for sid, by_hour in sorted(self.sensor_fits.items()):
            if by_hour and all(not f.degenerate for f in by_hour.values()):
                out.append(sid)
        return tuple(out)

    def degeneracy_summary(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for by_hour in self.zone_fits.values():
            for fit in by_hour.values():
                for flag in fit.flags:
                    counts[flag] = counts.get(flag, 0) + 1
        for by_hour in self.sensor_fits.values():
            for fit in by_hour.values():
                for flag in fit.flags:
                    counts[flag] = counts.get(flag, 0) + 1
        return counts

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        zones = []
        for zone in self.zoning.zones:
            by_hour = self.zone_fits.get(zone.id, {})
            zones.append({
                "id": zone.id,
                "generator": zone.generator,
                "C": {hk: f.C for hk, f in sorted(by_hour.items())},
                "rho": {hk: f.rho for hk, f in sorted(by_hour.items())},
                "sigma2": {hk: f.sigma2 for hk, f in sorted(by_hour.items())},
                "se_C": {hk: f.se_C for hk, f in sorted(by_hour.items())},
                "se_rho": {hk: f.se_rho for hk, f in sorted(by_hour.items())},
                "flags": {hk: list(f.flags) for hk, f in sorted(by_hour.items())},
            })
        sensors = []
        for sid, by_hour in sorted(self.sensor_fits.items()):
            sensors.append({
                "id": sid,
                "alpha": {hk: f.alpha for hk, f in sorted(by_hour.items())},
                "beta": {hk: f.beta for hk, f in sorted(by_hour.items())},
                "sigma2": {hk: f.sigma2 for hk, f in sorted(by_hour.items())},
                "flags": {hk: list(f.flags) for hk, f in sorted(by_hour.items())},
            })
        return {
            "strategy": self.strategy.value,
            "param_mode": self.param_mode.value,
            "zoning_mode": self.zoning.mode.value,
            "hours": list(self.hours),
            "zones": zones,
            "sensors": sensors,
            "omitted_sensors": list(self.omitted_sensors),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)

    @classmethod
    def from_dict(cls, doc: dict, devices: dict[str, Device]) -> "FittedModel":
        generators = [devices[z["generator"]] for z in doc["zones"]]
        zoning = build_zones(generators, ZoningMode(doc["zoning_mode"]))
        zone_fits: dict[int, dict[HourKey, ZoneFit]] = {}
        for z in doc["zones"]:
            by_hour = {}
            for hk in z["C"]:
                by_hour[hk] = ZoneFit(
                    C=z["C"][hk], rho=z["rho"][hk], sigma2=z["sigma2"][hk],
                    se_C=z.get("se_C", {}).get(hk, float("nan")),
                    se_rho=z.get("se_rho", {}).get(hk, float("nan")),
                    flags=tuple(z["flags"].get(hk, [])),
                )
            zone_fits[z["id"]] = by_hour
        sensor_fits: dict[str, dict[HourKey, SensorFit]] = {}
        for s in doc.get("sensors", []):
            by_hour = {}
            for hk in s["alpha"]:
                by_hour[hk] = SensorFit(
                    alpha=s["alpha"][hk], beta=s["beta"][hk],
                    sigma2=s["sigma2"][hk],
                    flags=tuple(s["flags"].get(hk, [])),
                )
            sensor_fits[s["id"]] = by_hour
        return cls(
            strategy=Strategy(doc["strategy"]),
            param_mode=ParamMode(doc["param_mode"]),
            zoning=zoning,
            hours=tuple(doc["hours"]),
            zone_fits=zone_fits,
            sensor_fits=sensor_fits,
            omitted_sensors=tuple(doc.get("omitted_sensors", [])),
        )


# -- fitting ------------------------------------------------------------


def _hour_keys(hours: tuple[int, ...], param_mode: ParamMode) -> list[HourKey]:
    if param_mode is ParamMode.GLOBAL:
        return [GLOBAL_KEY]
    return [hour_key(h) for h in hours]


def _obs_for_key(observations: list[Observation], hk: HourKey) -> list[Observation]:
    if hk == GLOBAL_KEY:
        return observations
    h = int(hk)
    return [o for o in observations if o.slot.hour == h]


def _delta_method_se(sol: LsSolution, sigma2: float) -> tuple[float, float]:
    """Standard errors of (C, rho) from the covariance of theta."""
    t1, t2 = float(sol.theta[0]), float(sol.theta[1])
    cov = sigma2 * sol.cov_unit[:2, :2]
    g_rho = np.array([-1.0 / t1**2, 0.0])
    g_c = np.array([-t2 / t1**2, 1.0 / t1])
    var_rho = float(g_rho @ cov @ g_rho)
    var_c = float(g_c @ cov @ g_c)
    return (np.sqrt(max(var_c, 0.0)), np.sqrt(max(var_rho, 0.0)))


def _fit_one_system(observations: list[Observation]
                    ) -> tuple[ZoneFit, dict[str, SensorFit]]:
    """Assemble, solve and invert one zone/hour system, flagging pathologies
    instead of raising so a whole fit never aborts on one degenerate zone."""
    if not observations:
        return ZoneFit(flags=("no_observations",)), {}
    try:
        ds = assemble_design(observations)
    except NoStationInZone:
        return ZoneFit(n_obs=len(observations), flags=("no_station",)), {}
    try:
        sol = solve_ls(ds)
    except Underdetermined:
        return ZoneFit(n_obs=len(observations), flags=("underdetermined",)), {}
    n = len(observations)
    dof = n - sol.rank
    sigma2 = estimate_variance(sol.residuals, dof) if dof > 0 else 0.0
    flags = []
    if sol.rank_deficient:
        flags.append("rank_deficient")
    if dof <= 0:
        flags.append("zero_dof")
    try:
        zp, cals = recover_parameters(sol.theta, ds.sensor_ids)
    except DegenerateSlope:
        flags.append("degenerate_slope")
        return ZoneFit(n_obs=n, rank=sol.rank, dof=dof, sigma2=sigma2,
                       flags=tuple(flags)), {}
    if sol.rank_deficient:
        # minimum-norm coefficients are not interpretable; identity fallback
        return ZoneFit(n_obs=n, rank=sol.rank, dof=dof, sigma2=sigma2,
                       flags=tuple(flags)), {}
    se_c, se_rho = _delta_method_se(sol, sigma2)
    zone_fit = ZoneFit(C=zp.C, rho=zp.rho, sigma2=sigma2, se_C=se_c,
                       se_rho=se_rho, n_obs=n, rank=sol.rank, dof=dof,
                       flags=tuple(flags))
    n_by_sensor: dict[str, int] = {}
    for o in observations:
        if o.kind is Kind.SENSOR:
            n_by_sensor[o.device_id] = n_by_sensor.get(o.device_id, 0) + 1
    sensor_fits = {}
    for sid, cal in cals.items():
        sflags = ("degenerate_gain",) if abs(cal.alpha) < EPS_ALPHA else ()
        sensor_fits[sid] = SensorFit(alpha=cal.alpha, beta=cal.beta,
                                     sigma2=sigma2,
                                     n_obs=n_by_sensor.get(sid, 0),
                                     flags=sflags)
    return zone_fit, sensor_fits


def _fit_zones(observations: list[Observation], devices: dict[str, Device],
               zoning: Zoning, hours: tuple[int, ...], param_mode: ParamMode,
               station_only_rows: bool) -> tuple[dict, dict]:
    """Shared driver: group observations by (zone, hour key) and fit each."""
    by_zone: dict[int, list[Observation]] = {z.id: [] for z in zoning.zones}
    for o in observations:
        if station_only_rows and o.kind is not Kind.STATION:
            continue
        dev = devices[o.device_id]
        by_zone[assign(zoning, dev.x, dev.y)].append(o)
    zone_fits: dict[int, dict[HourKey, ZoneFit]] = {}
    sensor_fits: dict[str, dict[HourKey, SensorFit]] = {}
    for zone in zoning.zones:
        zone_fits[zone.id] = {}
        for hk in _hour_keys(hours, param_mode):
            zf, sf = _fit_one_system(_obs_for_key(by_zone[zone.id], hk))
            zone_fits[zone.id][hk] = zf
            for sid, fit in sf.items():
                sensor_fits.setdefault(sid, {})[hk] = fit
    return zone_fits, sensor_fits


def fit_pool(observations: list[Observation], devices: dict[str, Device],
             zoning: Zoning, hours: tuple[int, ...],
             param_mode: ParamMode = ParamMode.HOURLY) -> FittedModel:
    """Joint fit pooling station and micro-sensor measurements per zone."""
    report = validate_identifiability(zoning, list(devices.values()))
    omitted = set(report.omitted_devices)
    usable = [o for o in observations if o.device_id not in omitted]
    zone_fits, sensor_fits = _fit_zones(usable, devices, zoning, hours,
                                        param_mode, station_only_rows=False)
    return FittedModel(
        strategy=Strategy.POOL, param_mode=param_mode, zoning=zoning,
        hours=hours if param_mode is ParamMode.HOURLY else (),
        zone_fits=zone_fits, sensor_fits=sensor_fits,
        omitted_sensors=tuple(sorted(omitted)),
    )


def fit_stations_only(observations: list[Observation],
                      devices: dict[str, Device], zoning: Zoning,
                      hours: tuple[int, ...],
                      param_mode: ParamMode = ParamMode.HOURLY) -> FittedModel:
    """Strategy no_ms: per-zone two-column regression on station rows only."""
    zone_fits, _ = _fit_zones(observations, devices, zoning, hours,
                              param_mode, station_only_rows=True)
    return FittedModel(
        strategy=Strategy.NO_MS, param_mode=param_mode, zoning=zoning,
        hours=hours if param_mode is ParamMode.HOURLY else (),
        zone_fits=zone_fits,
    )


def fit_sensor_calibrations(observations: list[Observation],
                            devices: dict[str, Device], base: FittedModel,
                            hours: tuple[int, ...],
                            param_mode: ParamMode = ParamMode.HOURLY
                            ) -> dict[str, dict[HourKey, SensorFit]]:
    """Per-sensor linear regression of readings on the initial map, with the
    zone's (C, rho) fixed at the base (no_ms) estimates.

    The fitted slope is alpha/(1+rho) and the intercept beta - alpha*C/(1+rho);
    both invert exactly given the base parameters.  A slope statistically
    indistinguishable from zero (|t| <= 2) or a recovered |alpha| below the
    inversion guard flags the sensor degenerate for that hour.
    """
    by_sensor: dict[str, list[Observation]] = {}
    for o in observations:
        if o.kind is Kind.SENSOR:
            by_sensor.setdefault(o.device_id, []).append(o)
    out: dict[str, dict[HourKey, SensorFit]] = {}
    for sid in sorted(by_sensor):
        dev = devices[sid]
        zid = assign(base.zoning, dev.x, dev.y)
        out[sid] = {}
        for hk in _hour_keys(hours, param_mode):
            obs = _obs_for_key(by_sensor[sid], hk)
            if len(obs) < 2:
                out[sid][hk] = SensorFit(n_obs=len(obs), flags=("no_observations",))
                continue
            zp = base.zone_params(zid, None if hk == GLOBAL_KEY else int(hk))
            a = np.column_stack([np.array([o.p_tilde for o in obs]),
                                 np.ones(len(obs))])
            x = np.array([o.x for o in obs])
            ds = DesignSystem(matrix=a, response=x, sensor_ids=())
            sol = solve_ls(ds)
            flags = []
            if sol.rank_deficient:
                out[sid][hk] = SensorFit(n_obs=len(obs), flags=("rank_deficient",))
                continue
            dof = len(obs) - sol.rank
            sigma2 = estimate_variance(sol.residuals, dof) if dof > 0 else 0.0
            slope, intercept = float(sol.theta[0]), float(sol.theta[1])
            alpha = slope * (1.0 + zp.rho)
            beta = intercept + slope * zp.C
            se_slope = float(np.sqrt(max(sigma2 * sol.cov_unit[0, 0], 0.0)))
            if abs(alpha) < EPS_ALPHA or (se_slope > 0 and abs(slope) <= 2.0 * se_slope):
                flags.append("degenerate_gain")
            out[sid][hk] = SensorFit(alpha=alpha, beta=beta, sigma2=sigma2,
                                     n_obs=len(obs), flags=tuple(flags))
    return out


def fit_ms_as_sta(observations: list[Observation], devices: dict[str, Device],
                  hours: tuple[int, ...],
                  param_mode: ParamMode = ParamMode.HOURLY) -> FittedModel:
    """Strategy ms_as_sta: calibrate sensors against the stations-only
    correction, invert their series, and refit the two-column regression on
    the finer all-devices partition with corrected sensors as stations."""
    stations = sorted((d for d in devices.values() if d.kind is Kind.STATION),
                      key=lambda d: d.id)
    station_zoning = build_zones(stations, ZoningMode.STATIONS_ONLY)
    base = fit_stations_only(observations, devices, station_zoning, hours,
                             param_mode)
    cal_fits = fit_sensor_calibrations(observations, devices, base, hours,
                                       param_mode)
    usable = [sid for sid, by_hour in sorted(cal_fits.items())
              if by_hour and all(not f.degenerate and "no_observations" not in f.flags
                                 and "rank_deficient" not in f.flags
                                 for f in by_hour.values())]
    excluded = tuple(sorted(set(cal_fits) - set(usable)))
    pseudo: list[Observation] = []
    usable_set = set(usable)
    for o in observations:
        if o.kind is Kind.STATION:
            pseudo.append(o)
        elif o.device_id in usable_set:
            hk = GLOBAL_KEY if param_mode is ParamMode.GLOBAL else hour_key(o.slot.hour)
            fit = cal_fits[o.device_id].get(hk)
            if fit is None or fit.degenerate:
                continue
            corrected = sensor_invert(fit.calibration, o.x)
            pseudo.append(Observation(device_id=o.device_id, kind=Kind.STATION,
                                      slot=o.slot, x=corrected,
                                      p_tilde=o.p_tilde))
    if usable:
        generators = stations + [devices[sid] for sid in usable]
        generators = sorted(generators, key=lambda d: d.id)
        fine_zoning = build_zones(generators, ZoningMode.ALL_DEVICES)
    else:
        fine_zoning = station_zoning
    zone_fits, _ = _fit_zones(pseudo, devices, fine_zoning, hours, param_mode,
                              station_only_rows=True)
    return FittedModel(
        strategy=Strategy.MS_AS_STA, param_mode=param_mode, zoning=fine_zoning,
        hours=hours if param_mode is ParamMode.HOURLY else (),
        zone_fits=zone_fits, sensor_fits=cal_fits,
        omitted_sensors=excluded,
    )


def fit_strategy(strategy: Strategy, observations: list[Observation],
                 devices: dict[str, Device], hours: tuple[int, ...],
                 param_mode: ParamMode = ParamMode.HOURLY,
                 pool_zoning_mode: ZoningMode = ZoningMode.STATIONS_ONLY
                 ) -> FittedModel:
    """Dispatch one strategy, building the zoning it calls for."""
    stations = sorted((d for d in devices.values() if d.kind is Kind.STATION),
                      key=lambda d: d.id)
    if strategy is Strategy.NO_MS:
        zoning = build_zones(stations, ZoningMode.STATIONS_ONLY)
        return fit_stations_only(observations, devices, zoning, hours, param_mode)
    if strategy is Strategy.POOL:
        if pool_zoning_mode is ZoningMode.STATIONS_ONLY:
            zoning = build_zones(stations, ZoningMode.STATIONS_ONLY)
        else:
            allgen = sorted(devices.values(), key=lambda d: d.id)
            zoning = build_zones(allgen, ZoningMode.ALL_DEVICES)
        return fit_pool(observations, devices, zoning, hours, param_mode)
    if strategy is Strategy.MS_AS_STA:
        return fit_ms_as_sta(observations, devices, hours, param_mode)
    raise ValueError(strategy)
