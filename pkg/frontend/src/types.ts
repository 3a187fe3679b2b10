// JSON payloads of the debias HTTP API.

export type Mode = "initial" | "no_ms" | "ms_as_sta" | "pool";

export const CORRECTED_MODES: Mode[] = ["no_ms", "ms_as_sta", "pool"];

export interface DeviceInfo {
  id: string;
  kind: "station" | "sensor";
  x: number;
  y: number;
  zone: number | null;
  omitted?: string;
}

export interface DevicesResponse {
  devices: DeviceInfo[];
  fit_id: number | null;
}

export interface FitStatus {
  status: "idle" | "running" | "failed";
  error: string | null;
  fit_id: number | null;
  flags: Record<string, Record<string, number>> | null;
}

export interface ParameterEntry {
  hour: number | null;
  zone: number;
  C: number;
  rho: number;
  sigma2: number;
  flags: string[];
  alpha?: number;
  beta?: number;
  sensor_flags?: string[];
}

export interface ParametersResponse {
  device: string;
  kind: "station" | "sensor";
  strategy: string;
  parameters: ParameterEntry[];
  fit_id: number;
}

export interface MapHeader {
  ncols: number;
  nrows: number;
  xllcorner: number;
  yllcorner: number;
  cellsize: number;
}

export interface MapResponse {
  header: MapHeader;
  values: (number | null)[][];
  fit_id: number | null;
}

export interface SeriesResponse {
  device: string;
  mode: string;
  avg24: boolean;
  slots?: string[];
  hours?: number[];
  measured: (number | null)[];
  initial: (number | null)[];
  corrected: (number | null)[];
  fit_id: number | null;
}

export interface RmseResponse {
  scope: "hour" | "station";
  strategy: string;
  keys: string[];
  values: (number | null)[];
  fit_id: number;
}
