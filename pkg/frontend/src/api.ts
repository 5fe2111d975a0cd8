// Typed client for the review service. All state lives server-side; this
// module is the only place that touches the network.

export type Stage =
  | "QUALITY"
  | "ORIENTATION"
  | "A"
  | "B"
  | "C"
  | "D"
  | "E"
  | "SUMMARY";

export const STAGES: readonly Stage[] = [
  "QUALITY",
  "ORIENTATION",
  "A",
  "B",
  "C",
  "D",
  "E",
  "SUMMARY",
];

export type Verdict = "ACCEPT" | "REJECT" | "UNCERTAIN";
export type ContextClass = "FULL_THORAX" | "REGIONAL" | "TIGHT";
export type BoxTuple = [number, number, number, number];

export interface ViewportSpec {
  crop: BoxTuple;
  zoom: number;
  focus_bbox: BoxTuple;
  context_class: ContextClass;
  aspect_waived: boolean;
}

export interface FindingView {
  finding_id: string;
  label: string;
  class_id: number;
  rad_id: string;
  bbox: BoxTuple | null;
  priority: number;
  smallness: number;
  border_proximity: number;
  region: string;
  region_fraction: number;
  stage: Stage;
  context_class: ContextClass;
  verdict: Verdict | null;
  note: string;
  viewport?: ViewportSpec;
}

export interface CtrDict {
  mrd: number;
  mld: number;
  id: number;
  ratio: number;
  cardiomegaly_flag: boolean;
  severity: string;
  midline_x: number;
  heart_bbox: BoxTuple;
  thorax_bbox: BoxTuple;
}

export interface ScaleSegment {
  kind: "mrd" | "mld" | "id";
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  length_px: number;
}

export interface CtrScale {
  segments: ScaleSegment[];
  band_label: string;
}

export interface CheckResult {
  status: string;
  score?: number | null;
  note: string;
  [extra: string]: unknown;
}

export interface QualityReport {
  rotation: CheckResult;
  inspiration: CheckResult;
  projection: CheckResult;
  exposure: CheckResult;
  overall: string;
}

export interface StageView {
  session_id: string;
  stage: Stage;
  stage_cursor: Stage | "FINALIZED";
  visited: Stage[];
  region_crop: ViewportSpec;
  findings: FindingView[];
  quality?: QualityReport | null;
  manual_checks?: Record<string, boolean>;
  orientation?: {
    view_position: string;
    marking_status: string;
    identified_sides: Record<string, string>;
    thorax_bbox: BoxTuple;
  };
  ctr?: CtrDict;
  ctr_scale?: CtrScale;
  all_findings?: FindingView[];
  blockers?: { missing_stages: Stage[]; unverdicted: string[] };
}

export interface SessionState {
  session_id: string;
  image_id: string;
  clinician_id: string;
  stage_cursor: Stage | "FINALIZED";
  visited: Stage[];
  verdicts: Record<string, { verdict: Verdict; note: string }>;
  manual_checks: Record<string, boolean>;
  created_at: number;
  updated_at: number;
  finalized: boolean;
}

export interface StudySummary {
  image_id: string;
  finding_count: number;
  has_geometry: boolean;
  ripe_overall: string;
}

export interface StudyDetail {
  image_id: string;
  width: number;
  height: number;
  bit_depth: number;
  view_position: string;
  source_format: string;
  finding_count: number;
  findings: FindingView[];
  ctr: CtrDict | null;
  warnings: string[];
}

export interface ReportStageSection {
  stage: Stage;
  region: string;
  accepted: unknown[];
  rejected: unknown[];
  uncertain: unknown[];
  pending?: unknown[];
}

export interface Report {
  attestation: string;
  session: {
    session_id: string;
    image_id: string;
    clinician_id: string;
    created_at: number;
    completed_at: number;
  };
  quality: QualityReport | null;
  orientation: { view_position: string; identified_sides: Record<string, string> };
  stages: ReportStageSection[];
  measurements: { ctr?: CtrDict; ctr_scale?: CtrScale };
  summary: {
    no_finding: { finding_id: string; rad_id: string; verdict: Verdict | null; note: string }[];
    verdict_counts: Record<string, number>;
  };
  manual_checks: Record<string, boolean>;
}

export interface NavigationResult {
  stage_cursor: Stage | "FINALIZED";
  visited: Stage[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly details: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "HTTP_ERROR";
  let message = `${resp.status} ${resp.statusText}`;
  let details: Record<string, unknown> = {};
  try {
    const body = await resp.json();
    if (body && typeof body === "object") {
      code = body.code ?? code;
      message = body.message ?? JSON.stringify(body);
      details = body.details ?? {};
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(resp.status, code, message, details);
}

export class ApiClient {
  private readonly fetchFn: typeof fetch;

  // fetch is wrapped so callers can pass window.fetch without losing its
  // required this binding.
  constructor(private readonly base: string, fetchFn?: typeof fetch) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  listStudies(): Promise<StudySummary[]> {
    return this.request("GET", "/studies");
  }

  studyDetail(imageId: string): Promise<StudyDetail> {
    return this.request("GET", `/studies/${encodeURIComponent(imageId)}`);
  }

  createSession(imageId: string, clinicianId: string): Promise<SessionState> {
    return this.request("POST", "/sessions", {
      image_id: imageId,
      clinician_id: clinicianId,
    });
  }

  session(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  stageView(sessionId: string, stage: Stage, vw: number, vh: number): Promise<StageView> {
    return this.request("GET", `/sessions/${sessionId}/stages/${stage}?vw=${vw}&vh=${vh}`);
  }

  setVerdict(
    sessionId: string,
    findingId: string,
    verdict: Verdict,
    note: string,
  ): Promise<SessionState> {
    return this.request("POST", `/sessions/${sessionId}/verdicts`, {
      finding_id: findingId,
      verdict,
      note,
    });
  }

  setManualCheck(sessionId: string, key: string, value: boolean): Promise<SessionState> {
    return this.request("POST", `/sessions/${sessionId}/manual-checks`, { key, value });
  }

  advance(sessionId: string): Promise<NavigationResult> {
    return this.request("POST", `/sessions/${sessionId}/advance`);
  }

  back(sessionId: string, stage: Stage): Promise<NavigationResult> {
    return this.request("POST", `/sessions/${sessionId}/back`, { stage });
  }

  finalize(sessionId: string): Promise<Report> {
    return this.request("POST", `/sessions/${sessionId}/finalize`);
  }

  report(sessionId: string): Promise<Report> {
    return this.request("GET", `/sessions/${sessionId}/report`);
  }

  // Server-rendered crop URL; the client never fetches the full-size image.
  cropUrl(imageId: string, box: BoxTuple, w: number, h: number): string {
    const [x0, y0, x1, y1] = box;
    return (
      `${this.base}/images/${encodeURIComponent(imageId)}/crop` +
      `?x0=${x0}&y0=${y0}&x1=${x1}&y1=${y1}&w=${w}&h=${h}`
    );
  }
}
