// UI-side session model. Holds a mirror of server state plus ephemeral
// input (pending notes, selection). The server stays authoritative: every
// mutation posts first or rolls back on rejection.

import {
  ApiClient,
  ApiError,
  FindingView,
  Report,
  SessionState,
  Stage,
  StageView,
  STAGES,
  StudyDetail,
  Verdict,
} from "./api.js";

export type Badge = "P1" | "P2" | "P3";

export interface UiSessionState {
  session: SessionState | null;
  study: StudyDetail | null;
  view: StageView | null;
  report: Report | null;
  selectedFinding: string | null;
  pendingNote: string;
  notice: string | null;
  loading: boolean;
}

type Listener = (state: UiSessionState) => void;

// Badge by rank tercile within the stage list, not by raw score: the list
// arrives sorted by priority, so index position is the rank.
export function badgeFor(index: number, total: number): Badge {
  if (total <= 0 || index < 0) return "P3";
  const tercile = Math.floor((index * 3) / total);
  return tercile <= 0 ? "P1" : tercile === 1 ? "P2" : "P3";
}

export function nextStage(cursor: Stage | "FINALIZED"): Stage | null {
  if (cursor === "FINALIZED") return null;
  const i = STAGES.indexOf(cursor);
  return i >= 0 && i + 1 < STAGES.length ? (STAGES[i + 1] as Stage) : null;
}

export class SessionStore {
  private state: UiSessionState = {
    session: null,
    study: null,
    view: null,
    report: null,
    selectedFinding: null,
    pendingNote: "",
    notice: null,
    loading: false,
  };
  private listeners: Listener[] = [];

  constructor(
    private readonly client: ApiClient,
    private readonly viewport: { vw: number; vh: number } = { vw: 1024, vh: 768 },
  ) {}

  snapshot(): UiSessionState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(patch: Partial<UiSessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  get finalized(): boolean {
    return this.state.session?.finalized ?? false;
  }

  get verdictsEnabled(): boolean {
    return !this.finalized;
  }

  // A stage may be rendered only once the server has admitted it: it must
  // be the cursor or already visited. Guards against stale links.
  canRender(stage: Stage): boolean {
    const s = this.state.session;
    if (!s) return false;
    return s.stage_cursor === stage || s.visited.includes(stage);
  }

  reachableStages(): Stage[] {
    return STAGES.filter((st) => this.canRender(st));
  }

  async start(imageId: string, clinicianId: string): Promise<string> {
    this.emit({ loading: true, notice: null });
    try {
      const session = await this.client.createSession(imageId, clinicianId);
      const study = await this.client.studyDetail(session.image_id);
      this.emit({ session, study, report: null, loading: false });
      await this.loadStage(session.stage_cursor as Stage);
      return session.session_id;
    } catch (err) {
      this.emit({ loading: false, notice: describe(err) });
      throw err;
    }
  }

  // Restores a session from its id alone (page reload path). Finalized
  // sessions come back in report mode.
  async resume(sessionId: string): Promise<void> {
    this.emit({ loading: true, notice: null });
    const session = await this.client.session(sessionId);
    const study = await this.client.studyDetail(session.image_id);
    this.emit({ session, study, loading: false });
    if (session.finalized) {
      const report = await this.client.report(sessionId);
      this.emit({ report, view: null });
      return;
    }
    await this.loadStage(session.stage_cursor as Stage);
  }

  async loadStage(stage: Stage): Promise<void> {
    const s = this.state.session;
    if (!s) throw new Error("no active session");
    if (!this.canRender(stage)) {
      this.emit({ notice: `stage ${stage} is not reachable yet` });
      return;
    }
    this.emit({ loading: true });
    try {
      const view = await this.client.stageView(
        s.session_id,
        stage,
        this.viewport.vw,
        this.viewport.vh,
      );
      const first = view.findings[0];
      this.emit({
        view,
        loading: false,
        notice: null,
        selectedFinding: first ? first.finding_id : null,
        pendingNote: "",
      });
    } catch (err) {
      this.emit({ loading: false, notice: describe(err) });
    }
  }

  select(findingId: string): void {
    const view = this.state.view;
    if (!view) return;
    if (!view.findings.some((f) => f.finding_id === findingId)) return;
    this.emit({ selectedFinding: findingId, pendingNote: "" });
  }

  setPendingNote(note: string): void {
    this.emit({ pendingNote: note });
  }

  selectedFindingView(): FindingView | null {
    const { view, selectedFinding } = this.state;
    if (!view || !selectedFinding) return null;
    return view.findings.find((f) => f.finding_id === selectedFinding) ?? null;
  }

  // Leave a read-only stage revisit and show the finalized report again.
  showReport(): void {
    if (this.state.report) this.emit({ view: null });
  }

  // Optimistic write: the list updates immediately, then the server
  // confirms. A rejection restores the previous view verbatim.
  async verdict(findingId: string, verdict: Verdict): Promise<void> {
    const { view, session } = this.state;
    if (!session) return;
    if (!this.verdictsEnabled) {
      this.emit({ notice: "session is finalized; verdicts are read-only" });
      return;
    }
    if (!view) return;
    const note = this.state.pendingNote;
    const before = view;
    const optimistic: StageView = {
      ...view,
      findings: view.findings.map((f) =>
        f.finding_id === findingId ? { ...f, verdict, note } : f,
      ),
    };
    this.emit({ view: optimistic, pendingNote: "" });
    try {
      const updated = await this.client.setVerdict(session.session_id, findingId, verdict, note);
      this.emit({ session: updated });
      // SUMMARY derives blockers server-side; refresh so the finalize
      // gate reflects the verdict that just landed.
      if (before.stage === "SUMMARY") await this.loadStage("SUMMARY");
    } catch (err) {
      this.emit({ view: before, pendingNote: note, notice: describe(err) });
    }
  }

  async manualCheck(key: string, value: boolean): Promise<void> {
    const s = this.state.session;
    if (!s) return;
    try {
      const updated = await this.client.setManualCheck(s.session_id, key, value);
      this.emit({ session: updated });
      if (this.state.view) await this.loadStage(this.state.view.stage);
    } catch (err) {
      this.emit({ notice: describe(err) });
    }
  }

  async advance(): Promise<void> {
    const s = this.state.session;
    if (!s) return;
    try {
      const nav = await this.client.advance(s.session_id);
      this.emit({
        session: { ...s, stage_cursor: nav.stage_cursor, visited: nav.visited },
      });
      if (nav.stage_cursor !== "FINALIZED") {
        await this.loadStage(nav.stage_cursor as Stage);
      }
    } catch (err) {
      this.emit({ notice: adviceFor(err) });
    }
  }

  async back(stage: Stage): Promise<void> {
    const s = this.state.session;
    if (!s) return;
    try {
      const nav = await this.client.back(s.session_id, stage);
      this.emit({
        session: { ...s, stage_cursor: nav.stage_cursor, visited: nav.visited },
      });
      await this.loadStage(stage);
    } catch (err) {
      this.emit({ notice: adviceFor(err) });
    }
  }

  async finalize(): Promise<void> {
    const s = this.state.session;
    if (!s) return;
    try {
      const report = await this.client.finalize(s.session_id);
      this.emit({
        report,
        view: null,
        session: { ...s, finalized: true, stage_cursor: "FINALIZED" },
        notice: null,
      });
    } catch (err) {
      this.emit({ notice: adviceFor(err) });
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return err instanceof Error ? err.message : String(err);
}

// Conflict responses become inline guidance instead of raw errors: the
// reviewer is told what still blocks the move.
function adviceFor(err: unknown): string {
  if (err instanceof ApiError && err.status === 409) {
    const unverdicted = err.details["unverdicted"];
    if (Array.isArray(unverdicted) && unverdicted.length > 0) {
      return `review remaining findings first: ${unverdicted.join(", ")}`;
    }
    const missing = err.details["missing_stages"];
    if (Array.isArray(missing) && missing.length > 0) {
      return `visit remaining stages first: ${missing.join(", ")}`;
    }
    return `cannot proceed yet: ${err.message}`;
  }
  return describe(err);
}
