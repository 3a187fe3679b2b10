// Thin fetch client for the debias API. All calls return parsed JSON or
// throw ApiError with the server's diagnostic.

import type {
  DevicesResponse,
  FitStatus,
  MapResponse,
  Mode,
  ParametersResponse,
  RmseResponse,
  SeriesResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      typeof body === "object" && body !== null && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export interface FitRequest {
  learn_until: string;
  param_mode?: "hourly" | "global";
  zoning?: "stations" | "all";
  strategies?: string[];
}

export const api = {
  devices: (signal?: AbortSignal) =>
    getJson<DevicesResponse>("/api/devices", signal),

  fitStatus: (signal?: AbortSignal) =>
    getJson<FitStatus>("/api/fit/status", signal),

  startFit: async (body: FitRequest): Promise<{ fit_id: number }> => {
    const response = await fetch("/api/fit", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, String((payload as any).detail ?? ""));
    }
    return payload as { fit_id: number };
  },

  parameters: (device: string, strategy: string, signal?: AbortSignal) =>
    getJson<ParametersResponse>(
      `/api/parameters?device=${encodeURIComponent(device)}` +
        `&strategy=${encodeURIComponent(strategy)}`,
      signal,
    ),

  map: (slot: string, mode: Mode, clamp: boolean, signal?: AbortSignal) =>
    getJson<MapResponse>(
      `/api/map?slot=${encodeURIComponent(slot)}&mode=${mode}` +
        `&clamp=${clamp ? 1 : 0}`,
      signal,
    ),

  series: (device: string, mode: string, avg24: boolean, signal?: AbortSignal) =>
    getJson<SeriesResponse>(
      `/api/series?device=${encodeURIComponent(device)}` +
        `&mode=${encodeURIComponent(mode)}&avg24=${avg24 ? 1 : 0}`,
      signal,
    ),

  rmse: (scope: "hour" | "station", strategy: string, signal?: AbortSignal) =>
    getJson<RmseResponse>(
      `/api/rmse?scope=${scope}&strategy=${encodeURIComponent(strategy)}`,
      signal,
    ),
};
