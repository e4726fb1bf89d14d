/**
 * Typed client for the hydrograph HTTP service.
 *
 * Every byte of derived data comes from the server; this module only
 * shapes requests and parses responses.  Requests join named abort groups
 * so a navigation can cancel everything still in flight.
 */

export interface TokenResponse {
  token: string;
  expires: string;
}

export interface IngestReport {
  kind: string;
  nodes_created: number;
  edges_created: number;
  rows_skipped: number;
  warnings: string[];
}

export interface Feature {
  type: "Feature";
  id: number;
  geometry: GeoJsonGeometry | null;
  properties: Record<string, unknown>;
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: Feature[];
}

export type GeoJsonGeometry =
  | { type: "Point"; coordinates: [number, number] }
  | { type: "LineString"; coordinates: [number, number][] }
  | { type: "Polygon"; coordinates: [number, number][][] }
  | { type: "MultiPolygon"; coordinates: [number, number][][][] };

export interface PathsResponse {
  paths: number[][];
}

export interface StationPathsResponse {
  stations: number[];
  paths: number[][];
}

export interface StationsResponse {
  stations: number[];
}

export interface SeriesPointDto {
  timestamp: string;
  value: number;
  below_detection: boolean;
  depth: number | null;
}

export interface SeriesDto {
  station: string;
  parameter: string;
  points: SeriesPointDto[];
}

export interface QualityFilterBody {
  stations: string[];
  params: string[];
  from?: string;
  to?: string;
  depth_min?: number;
  depth_max?: number;
}

export interface JobDto {
  id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  result: Record<string, unknown> | null;
  error: string | null;
}

export type LayerResource =
  | "systems"
  | "waternodes"
  | "stations"
  | "watersheds"
  | "landuse"
  | "stretches";

export type QueryKind = "q1" | "q2" | "q3" | "q4";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const QUERY_PARAM: Record<QueryKind, string> = {
  q1: "node",
  q2: "node",
  q3: "stretch",
  q4: "landuse",
};

export class ApiClient {
  token: string | null = null;
  private groups = new Map<string, AbortController>();

  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private onAuthExpired: () => void = () => {},
  ) {}

  /** Abort every in-flight request in the named group. */
  cancelGroup(name: string): void {
    this.groups.get(name)?.abort();
    this.groups.delete(name);
  }

  private signalFor(group?: string): AbortSignal | undefined {
    if (!group) return undefined;
    let controller = this.groups.get(group);
    if (!controller || controller.signal.aborted) {
      controller = new AbortController();
      this.groups.set(group, controller);
    }
    return controller.signal;
  }

  private async request<T>(
    path: string,
    init: RequestInit = {},
    group?: string,
  ): Promise<T> {
    const headers = new Headers(init.headers);
    if (this.token) headers.set("Authorization", `Bearer ${this.token}`);
    const response = await this.fetchImpl(this.baseUrl + path, {
      ...init,
      headers,
      signal: this.signalFor(group),
    });
    if (response.status === 401 && this.token) {
      this.token = null;
      this.onAuthExpired();
    }
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async login(username: string, password: string): Promise<void> {
    const body = await this.request<TokenResponse>("/api/auth/token", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ username, password }),
    });
    this.token = body.token;
  }

  listLayer(resource: LayerResource, group?: string): Promise<FeatureCollection> {
    return this.request(`/api/${resource}`, {}, group);
  }

  runQuery(kind: "q1" | "q2", target: number): Promise<PathsResponse>;
  runQuery(kind: "q3", target: number): Promise<StationPathsResponse>;
  runQuery(kind: "q4", target: number): Promise<StationsResponse>;
  runQuery(kind: QueryKind, target: number): Promise<unknown> {
    const param = QUERY_PARAM[kind];
    return this.request(`/api/query/${kind}?${param}=${target}`, {}, "query");
  }

  filterQuality(body: QualityFilterBody): Promise<{ series: SeriesDto[] }> {
    return this.request("/api/quality/filter", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  /** URL of the CSV download matching a filter; used for the export button. */
  exportUrl(body: QualityFilterBody): string {
    const params = new URLSearchParams();
    params.set("stations", body.stations.join(","));
    params.set("params", body.params.join(","));
    if (body.from) params.set("from", body.from);
    if (body.to) params.set("to", body.to);
    if (body.depth_min !== undefined)
      params.set("depth_min", String(body.depth_min));
    if (body.depth_max !== undefined)
      params.set("depth_max", String(body.depth_max));
    return `${this.baseUrl}/api/quality/export?${params.toString()}`;
  }

  async downloadExport(body: QualityFilterBody): Promise<Blob> {
    const headers = new Headers();
    if (this.token) headers.set("Authorization", `Bearer ${this.token}`);
    const response = await this.fetchImpl(this.exportUrl(body), { headers });
    if (!response.ok) throw new ApiError(response.status, "export failed");
    return response.blob();
  }

  upload(name: string, content: Blob | string, kind?: string): Promise<IngestReport> {
    const form = new FormData();
    const blob = typeof content === "string" ? new Blob([content]) : content;
    form.append("file", blob, name);
    const suffix = kind ? `?kind=${encodeURIComponent(kind)}` : "";
    return this.request(`/api/upload${suffix}`, { method: "POST", body: form });
  }

  deleteNode(id: number): Promise<{ edges_removed: number }> {
    return this.request(`/api/nodes/${id}`, { method: "DELETE" });
  }

  submitJob(kind: string, params: Record<string, unknown>): Promise<JobDto> {
    return this.request("/api/jobs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ kind, params }),
    });
  }

  getJob(id: string): Promise<JobDto> {
    return this.request(`/api/jobs/${id}`);
  }
}
