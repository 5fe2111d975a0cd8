import { describe, expect, it } from "vitest";
import { Window as HappyWindow } from "happy-dom";

import {
  ApiClient,
  ApiError,
  BoxTuple,
  CtrScale,
  Report,
  SessionState,
  StageView,
  StudyDetail,
} from "../src/api.js";
import { createApp } from "../src/app.js";
import { ctrScaleLines, makeMapping } from "../src/overlay.js";
import { badgeFor, nextStage, SessionStore } from "../src/state.js";

function session(patch: Partial<SessionState> = {}): SessionState {
  return {
    session_id: "s1",
    image_id: "img1",
    clinician_id: "dr",
    stage_cursor: "QUALITY",
    visited: ["QUALITY"],
    verdicts: {},
    manual_checks: {},
    created_at: 0,
    updated_at: 0,
    finalized: false,
    ...patch,
  };
}

function study(): StudyDetail {
  return {
    image_id: "img1",
    width: 512,
    height: 512,
    bit_depth: 8,
    view_position: "PA",
    source_format: "PNG",
    finding_count: 1,
    findings: [],
    ctr: null,
    warnings: [],
  };
}

function stageView(patch: Partial<StageView> = {}): StageView {
  return {
    session_id: "s1",
    stage: "B",
    stage_cursor: "B",
    visited: ["QUALITY", "ORIENTATION", "A", "B"],
    region_crop: {
      crop: [0, 0, 512, 512],
      zoom: 2,
      focus_bbox: [50, 50, 450, 420],
      context_class: "REGIONAL",
      aspect_waived: false,
    },
    findings: [
      {
        finding_id: "img1:0",
        label: "Calcification",
        class_id: 2,
        rad_id: "R1",
        bbox: [96, 140, 128, 172],
        priority: 0.4,
        smallness: 0.9,
        border_proximity: 0.1,
        region: "B",
        region_fraction: 1,
        stage: "B",
        context_class: "REGIONAL",
        verdict: null,
        note: "",
        viewport: {
          crop: [60, 100, 260, 250],
          zoom: 5.12,
          focus_bbox: [96, 140, 128, 172],
          context_class: "REGIONAL",
          aspect_waived: false,
        },
      },
    ],
    ...patch,
  };
}

interface Call {
  method: string;
  args: unknown[];
}

// Canned-response stand-in for the HTTP client; records every call so
// tests can assert what did or did not go over the wire.
class FakeClient {
  calls: Call[] = [];
  sessionState: SessionState = session();
  view: StageView = stageView();
  reportBody: Report | null = null;
  failVerdict: ApiError | null = null;
  failAdvance: ApiError | null = null;

  private log(method: string, ...args: unknown[]): void {
    this.calls.push({ method, args });
  }
  called(method: string): Call[] {
    return this.calls.filter((c) => c.method === method);
  }

  async createSession(): Promise<SessionState> {
    this.log("createSession");
    return this.sessionState;
  }
  async studyDetail(): Promise<StudyDetail> {
    this.log("studyDetail");
    return study();
  }
  async session(): Promise<SessionState> {
    this.log("session");
    return this.sessionState;
  }
  async stageView(_sid: string, stage: string): Promise<StageView> {
    this.log("stageView", stage);
    return { ...this.view, stage: stage as StageView["stage"] };
  }
  async setVerdict(...args: unknown[]): Promise<SessionState> {
    this.log("setVerdict", ...args);
    if (this.failVerdict) throw this.failVerdict;
    return this.sessionState;
  }
  async setManualCheck(...args: unknown[]): Promise<SessionState> {
    this.log("setManualCheck", ...args);
    return this.sessionState;
  }
  async advance(): Promise<{ stage_cursor: "B"; visited: ["QUALITY"] }> {
    this.log("advance");
    if (this.failAdvance) throw this.failAdvance;
    return { stage_cursor: "B", visited: ["QUALITY"] };
  }
  async back(): Promise<{ stage_cursor: "B"; visited: ["QUALITY"] }> {
    this.log("back");
    return { stage_cursor: "B", visited: ["QUALITY"] };
  }
  async finalize(): Promise<Report> {
    this.log("finalize");
    throw new ApiError(409, "INCOMPLETE", "not done");
  }
  async report(): Promise<Report> {
    this.log("report");
    if (!this.reportBody) throw new ApiError(404, "NO_REPORT", "none");
    return this.reportBody;
  }
  cropUrl(imageId: string, box: BoxTuple, w: number, h: number): string {
    return `/images/${imageId}/crop?x0=${box[0]}&y0=${box[1]}&x1=${box[2]}&y1=${box[3]}&w=${w}&h=${h}`;
  }
}

function asClient(fake: FakeClient): ApiClient {
  return fake as unknown as ApiClient;
}

describe("priority badges", () => {
  it("splits a sorted list into rank terciles", () => {
    const badges = [0, 1, 2, 3, 4, 5].map((i) => badgeFor(i, 6));
    expect(badges).toEqual(["P1", "P1", "P2", "P2", "P3", "P3"]);
  });

  it("tops out at P1 for short lists", () => {
    expect(badgeFor(0, 1)).toBe("P1");
    expect([badgeFor(0, 2), badgeFor(1, 2)]).toEqual(["P1", "P2"]);
  });
});

describe("stage order", () => {
  it("advances QUALITY toward SUMMARY and stops", () => {
    expect(nextStage("QUALITY")).toBe("ORIENTATION");
    expect(nextStage("E")).toBe("SUMMARY");
    expect(nextStage("SUMMARY")).toBeNull();
    expect(nextStage("FINALIZED")).toBeNull();
  });
});

describe("crop coordinate mapping", () => {
  it("maps image points into display pixels", () => {
    const m = makeMapping([100, 50, 300, 250], 400, 400);
    expect(m.toDisplay(100, 50)).toEqual([0, 0]);
    expect(m.toDisplay(150, 100)).toEqual([100, 100]);
    const box = m.boxToDisplay([200, 150, 300, 250]);
    expect(box).toEqual({ left: 200, top: 200, width: 200, height: 200 });
  });

  it("places the three ratio segments with pixel-length labels", () => {
    const scale: CtrScale = {
      band_label: "ctr 0.54 BORDERLINE",
      segments: [
        { kind: "mrd", x0: 150, y0: 340, x1: 255, y1: 340, length_px: 105 },
        { kind: "mld", x0: 255, y0: 340, x1: 370, y1: 340, length_px: 115 },
        { kind: "id", x0: 52, y0: 360, x1: 458, y1: 360, length_px: 406 },
      ],
    };
    const lines = ctrScaleLines(scale, makeMapping([0, 0, 512, 512], 512, 512));
    expect(lines).toHaveLength(3);
    expect(lines[0]).toMatchObject({ kind: "mrd", x1: 150, x2: 255, label: "mrd 105px" });
    expect(lines[2]?.label).toBe("id 406px");
  });
});

describe("session store", () => {
  it("refuses to load a stage the server has not admitted", async () => {
    const fake = new FakeClient();
    const store = new SessionStore(asClient(fake));
    await store.start("img1", "dr");
    expect(store.canRender("QUALITY")).toBe(true);
    expect(store.canRender("B")).toBe(false);
    const viewsBefore = fake.called("stageView").length;
    await store.loadStage("B");
    expect(fake.called("stageView").length).toBe(viewsBefore);
    expect(store.snapshot().notice).toContain("not reachable");
  });

  it("rolls back an optimistic verdict the server rejects", async () => {
    const fake = new FakeClient();
    fake.sessionState = session({ stage_cursor: "B", visited: ["QUALITY", "ORIENTATION", "A", "B"] });
    const store = new SessionStore(asClient(fake));
    await store.start("img1", "dr");
    fake.failVerdict = new ApiError(409, "CONFLICT", "stage not open");
    await store.verdict("img1:0", "ACCEPT");
    const after = store.snapshot();
    expect(after.view?.findings[0]?.verdict).toBeNull();
    expect(after.notice).toContain("stage not open");
  });

  it("keeps the optimistic verdict when the server accepts", async () => {
    const fake = new FakeClient();
    fake.sessionState = session({ stage_cursor: "B", visited: ["QUALITY", "ORIENTATION", "A", "B"] });
    const store = new SessionStore(asClient(fake));
    await store.start("img1", "dr");
    await store.verdict("img1:0", "REJECT");
    expect(store.snapshot().view?.findings[0]?.verdict).toBe("REJECT");
    expect(fake.called("setVerdict")).toHaveLength(1);
  });

  it("never posts verdicts once the session is finalized", async () => {
    const fake = new FakeClient();
    fake.sessionState = session({ finalized: true, stage_cursor: "FINALIZED" });
    fake.reportBody = {
      attestation: "regions reviewed: 7/7",
      session: { session_id: "s1", image_id: "img1", clinician_id: "dr", created_at: 0, completed_at: 1 },
      quality: null,
      orientation: { view_position: "PA", identified_sides: {} },
      stages: [],
      measurements: {},
      summary: { no_finding: [], verdict_counts: { ACCEPT: 1 } },
      manual_checks: {},
    };
    const store = new SessionStore(asClient(fake));
    await store.resume("s1");
    expect(store.verdictsEnabled).toBe(false);
    await store.verdict("img1:0", "ACCEPT");
    expect(fake.called("setVerdict")).toHaveLength(0);
    expect(store.snapshot().notice).toContain("finalized");
  });

  it("turns a 409 on advance into inline guidance", async () => {
    const fake = new FakeClient();
    const store = new SessionStore(asClient(fake));
    await store.start("img1", "dr");
    fake.failAdvance = new ApiError(409, "VERDICTS_PENDING", "verdicts pending", {
      unverdicted: ["img1:0", "img1:2"],
    });
    await store.advance();
    expect(store.snapshot().notice).toBe("review remaining findings first: img1:0, img1:2");
  });
});

describe("rendering", () => {
  async function mount(fake: FakeClient) {
    const win = new HappyWindow({ url: "http://localhost/" });
    const doc = win.document;
    const root = doc.createElement("div");
    doc.body.appendChild(root);
    const app = createApp(root as unknown as HTMLElement, {
      client: asClient(fake),
      window: win as unknown as Window,
    });
    return { win, doc, root, app };
  }

  it("renders unreachable stages as locked, not as navigation", async () => {
    const fake = new FakeClient();
    fake.view = stageView({
      stage: "QUALITY",
      stage_cursor: "QUALITY",
      visited: ["QUALITY"],
      findings: [],
      quality: {
        rotation: { status: "PASS", note: "" },
        inspiration: { status: "WARN", note: "low" },
        projection: { status: "PASS", note: "" },
        exposure: { status: "PASS", note: "" },
        overall: "WARN",
      },
      manual_checks: {},
    });
    const { doc, app } = await mount(fake);
    await app.store.start("img1", "dr");
    const buttons = doc.querySelectorAll(".stage-btn");
    const locked = doc.querySelectorAll(".stage-locked");
    expect(buttons.length).toBe(1);
    expect(buttons[0]?.textContent).toBe("QUALITY");
    expect(locked.length).toBe(7);
    expect(doc.querySelector("#quality-panel")).toBeTruthy();
    app.destroy();
  });

  it("shows badges, outlines and zoom for the selected finding", async () => {
    const fake = new FakeClient();
    fake.sessionState = session({ stage_cursor: "B", visited: ["QUALITY", "ORIENTATION", "A", "B"] });
    const { doc, app } = await mount(fake);
    await app.store.start("img1", "dr");
    expect(doc.querySelector(".badge")?.textContent).toBe("P1");
    const img = doc.querySelector("#finding-crop");
    expect(img).toBeTruthy();
    expect(img?.getAttribute("src")).toContain("/images/img1/crop?");
    expect(img?.getAttribute("data-context-class")).toBe("REGIONAL");
    expect(doc.querySelector(".bbox-outline")).toBeTruthy();
    expect(doc.querySelector(".zoom-note")?.textContent).toContain("5.12x");
    app.destroy();
  });

  it("disables verdict controls on a read-only revisit after finalization", async () => {
    const fake = new FakeClient();
    fake.sessionState = session({
      finalized: true,
      stage_cursor: "FINALIZED",
      visited: ["QUALITY", "ORIENTATION", "A", "B", "C", "D", "E", "SUMMARY"],
    });
    fake.reportBody = {
      attestation: "regions reviewed: 7/7",
      session: { session_id: "s1", image_id: "img1", clinician_id: "dr", created_at: 0, completed_at: 1 },
      quality: null,
      orientation: { view_position: "PA", identified_sides: {} },
      stages: [],
      measurements: {},
      summary: { no_finding: [], verdict_counts: { ACCEPT: 1 } },
      manual_checks: {},
    };
    const { doc, app } = await mount(fake);
    await app.store.resume("s1");
    expect(doc.querySelector("#attestation")?.textContent).toBe("regions reviewed: 7/7");
    await app.store.loadStage("B");
    const buttons = doc.querySelectorAll(".verdict-btn");
    expect(buttons.length).toBe(3);
    for (const b of buttons) expect(b.hasAttribute("disabled")).toBe(true);
    app.destroy();
  });

  it("enters verdicts from the keyboard", async () => {
    const fake = new FakeClient();
    fake.sessionState = session({ stage_cursor: "B", visited: ["QUALITY", "ORIENTATION", "A", "B"] });
    const { win, doc, app } = await mount(fake);
    await app.store.start("img1", "dr");
    doc.dispatchEvent(new win.KeyboardEvent("keydown", { key: "a" }));
    await new Promise((r) => setTimeout(r, 0));
    expect(fake.called("setVerdict")).toHaveLength(1);
    expect(fake.called("setVerdict")[0]?.args[2]).toBe("ACCEPT");
    app.destroy();
  });

  it("ignores verdict keys while a note is being typed", async () => {
    const fake = new FakeClient();
    fake.sessionState = session({ stage_cursor: "B", visited: ["QUALITY", "ORIENTATION", "A", "B"] });
    const { win, doc, app } = await mount(fake);
    await app.store.start("img1", "dr");
    const note = doc.querySelector("#note-input");
    expect(note).toBeTruthy();
    note?.dispatchEvent(new win.KeyboardEvent("keydown", { key: "a", bubbles: true }));
    await new Promise((r) => setTimeout(r, 0));
    expect(fake.called("setVerdict")).toHaveLength(0);
    app.destroy();
  });
});
