// DOM construction. Every image element points at a server-rendered crop
// sized to its display box; the full-resolution original is never loaded
// by the browser.

import {
  ApiClient,
  BoxTuple,
  FindingView,
  Report,
  Stage,
  StageView,
  STAGES,
  Verdict,
} from "./api.js";
import { ctrScaleLines, makeMapping } from "./overlay.js";
import { badgeFor, SessionStore, UiSessionState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CROP_DISPLAY_W = 640;
const FINDING_DISPLAY_W = 512;
const THUMB_W = 180;

const STAGE_TITLES: Record<Stage, string> = {
  QUALITY: "Film quality",
  ORIENTATION: "Orientation and markings",
  A: "A: airway",
  B: "B: bones and soft tissue",
  C: "C: cardiac and circulation",
  D: "D: diaphragm and below",
  E: "E: lung fields and everything else",
  SUMMARY: "Summary",
};

interface Ctx {
  doc: Document;
  store: SessionStore;
  client: ApiClient;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function displayDims(crop: BoxTuple, targetW: number): { w: number; h: number } {
  const cw = Math.max(crop[2] - crop[0], 1);
  const ch = Math.max(crop[3] - crop[1], 1);
  const w = Math.min(targetW, 4096);
  const h = Math.max(1, Math.min(Math.round((w * ch) / cw), 4096));
  return { w, h };
}

// <img> wrapped in a positioned box so overlays can sit on top.
function cropFigure(
  ctx: Ctx,
  imageId: string,
  crop: BoxTuple,
  targetW: number,
  id: string,
): { wrap: HTMLElement; img: HTMLImageElement; w: number; h: number } {
  const { w, h } = displayDims(crop, targetW);
  const wrap = el(ctx.doc, "div", { class: "crop-box", style: `width:${w}px;height:${h}px` });
  const img = el(ctx.doc, "img", {
    id,
    class: "crop-img",
    src: ctx.client.cropUrl(imageId, crop, w, h),
    width: String(w),
    height: String(h),
    alt: `crop ${crop.join(",")}`,
  });
  wrap.appendChild(img);
  return { wrap, img, w, h };
}

function outlineBox(
  doc: Document,
  cls: string,
  box: { left: number; top: number; width: number; height: number },
): HTMLElement {
  return el(doc, "div", {
    class: cls,
    style:
      `left:${box.left.toFixed(1)}px;top:${box.top.toFixed(1)}px;` +
      `width:${Math.max(box.width, 1).toFixed(1)}px;height:${Math.max(box.height, 1).toFixed(1)}px`,
  });
}

function stageNav(ctx: Ctx, state: UiSessionState): HTMLElement {
  const nav = el(ctx.doc, "nav", { class: "stage-nav" });
  const current = state.view?.stage ?? null;
  for (const stage of STAGES) {
    const reachable = ctx.store.canRender(stage);
    // Unreachable stages are not rendered as navigation targets at all.
    if (!reachable) {
      nav.appendChild(el(ctx.doc, "span", { class: "stage-locked" }, stage));
      continue;
    }
    const btn = el(
      ctx.doc,
      "button",
      { class: stage === current ? "stage-btn active" : "stage-btn", "data-stage": stage },
      stage,
    );
    btn.addEventListener("click", () => {
      void ctx.store.back(stage);
    });
    nav.appendChild(btn);
  }
  return nav;
}

function thumbnail(ctx: Ctx, state: UiSessionState, view: StageView): HTMLElement | null {
  const study = state.study;
  if (!study) return null;
  const whole: BoxTuple = [0, 0, study.width, study.height];
  const fig = cropFigure(ctx, study.image_id, whole, THUMB_W, "thumb");
  const mapping = makeMapping(whole, fig.w, fig.h);
  fig.wrap.appendChild(
    outlineBox(ctx.doc, "region-outline", mapping.boxToDisplay(view.region_crop.focus_bbox)),
  );
  const cell = el(ctx.doc, "div", { class: "thumb-cell" });
  cell.appendChild(fig.wrap);
  cell.appendChild(el(ctx.doc, "div", { class: "thumb-caption" }, "current region"));
  return cell;
}

function verdictGlyph(f: FindingView): string {
  if (f.verdict === "ACCEPT") return "[A]";
  if (f.verdict === "REJECT") return "[R]";
  if (f.verdict === "UNCERTAIN") return "[U]";
  return "[ ]";
}

function findingList(ctx: Ctx, state: UiSessionState, view: StageView): HTMLElement {
  const box = el(ctx.doc, "section", { class: "finding-list" });
  box.appendChild(el(ctx.doc, "h3", {}, `findings in this stage (${view.findings.length})`));
  const ul = el(ctx.doc, "ul", { id: "findings" });
  view.findings.forEach((f, i) => {
    const li = el(ctx.doc, "li", {
      class: f.finding_id === state.selectedFinding ? "finding selected" : "finding",
      "data-fid": f.finding_id,
    });
    li.appendChild(
      el(ctx.doc, "span", { class: `badge badge-${badgeFor(i, view.findings.length)}` },
        badgeFor(i, view.findings.length)),
    );
    li.appendChild(el(ctx.doc, "span", { class: "verdict-glyph" }, verdictGlyph(f)));
    li.appendChild(el(ctx.doc, "span", { class: "finding-label" }, `${f.label} (${f.rad_id})`));
    li.appendChild(
      el(ctx.doc, "span", { class: "finding-meta" },
        `priority ${f.priority.toFixed(3)} in ${f.region}`),
    );
    li.addEventListener("click", () => ctx.store.select(f.finding_id));
    ul.appendChild(li);
  });
  box.appendChild(ul);
  return box;
}

function verdictBar(ctx: Ctx, state: UiSessionState, finding: FindingView): HTMLElement {
  const bar = el(ctx.doc, "div", { class: "verdict-bar" });
  const enabled = ctx.store.verdictsEnabled;
  const verdicts: Verdict[] = ["ACCEPT", "REJECT", "UNCERTAIN"];
  const keys: Record<Verdict, string> = { ACCEPT: "a", REJECT: "r", UNCERTAIN: "u" };
  for (const v of verdicts) {
    const attrs: Record<string, string> = {
      class: "verdict-btn",
      "data-verdict": v,
      title: `press ${keys[v]}`,
    };
    if (!enabled) attrs["disabled"] = "disabled";
    const btn = el(ctx.doc, "button", attrs, `${v} (${keys[v].toUpperCase()})`);
    btn.addEventListener("click", () => {
      void ctx.store.verdict(finding.finding_id, v);
    });
    bar.appendChild(btn);
  }
  const note = el(ctx.doc, "input", {
    id: "note-input",
    type: "text",
    placeholder: "note (optional)",
    value: state.pendingNote,
  }) as HTMLInputElement;
  if (!enabled) note.setAttribute("disabled", "disabled");
  note.addEventListener("input", () => ctx.store.setPendingNote(note.value));
  bar.appendChild(note);
  return bar;
}

function findingDetail(ctx: Ctx, state: UiSessionState, view: StageView): HTMLElement {
  const panel = el(ctx.doc, "section", { class: "finding-detail", id: "finding-detail" });
  const f = ctx.store.selectedFindingView();
  if (!f) {
    panel.appendChild(el(ctx.doc, "p", {}, "no finding selected"));
    return panel;
  }
  panel.appendChild(
    el(ctx.doc, "h3", { id: "finding-title" }, `${f.label} in display context ${f.context_class}`),
  );
  if (f.viewport) {
    const imageId = state.session ? state.session.image_id : "";
    const fig = cropFigure(ctx, imageId, f.viewport.crop, FINDING_DISPLAY_W, "finding-crop");
    fig.img.setAttribute("data-context-class", f.viewport.context_class);
    fig.img.setAttribute("data-zoom", f.viewport.zoom.toFixed(4));
    const mapping = makeMapping(f.viewport.crop, fig.w, fig.h);
    if (f.bbox) {
      fig.wrap.appendChild(outlineBox(ctx.doc, "bbox-outline", mapping.boxToDisplay(f.bbox)));
    }
    // Heart size findings carry the cardiothoracic measurement; draw the
    // three reference segments over the crop with their pixel lengths.
    if (view.ctr_scale && f.label.toLowerCase().includes("cardiomegaly")) {
      const svg = ctx.doc.createElementNS(SVG_NS, "svg");
      svg.setAttribute("class", "ctr-overlay");
      svg.setAttribute("width", String(fig.w));
      svg.setAttribute("height", String(fig.h));
      for (const line of ctrScaleLines(view.ctr_scale, mapping)) {
        const seg = ctx.doc.createElementNS(SVG_NS, "line");
        seg.setAttribute("class", `ctr-seg ctr-seg-${line.kind}`);
        seg.setAttribute("x1", line.x1.toFixed(1));
        seg.setAttribute("y1", line.y1.toFixed(1));
        seg.setAttribute("x2", line.x2.toFixed(1));
        seg.setAttribute("y2", line.y2.toFixed(1));
        svg.appendChild(seg);
        const label = ctx.doc.createElementNS(SVG_NS, "text");
        label.setAttribute("class", "ctr-seg-label");
        label.setAttribute("x", ((line.x1 + line.x2) / 2).toFixed(1));
        label.setAttribute("y", (Math.min(line.y1, line.y2) - 4).toFixed(1));
        label.textContent = line.label;
        svg.appendChild(label);
      }
      const band = ctx.doc.createElementNS(SVG_NS, "text");
      band.setAttribute("class", "ctr-band-label");
      band.setAttribute("x", "8");
      band.setAttribute("y", "16");
      band.textContent = view.ctr_scale.band_label;
      svg.appendChild(band);
      fig.wrap.appendChild(svg);
    }
    panel.appendChild(fig.wrap);
    panel.appendChild(
      el(ctx.doc, "p", { class: "zoom-note" },
        `zoom ${f.viewport.zoom.toFixed(2)}x` +
          (f.viewport.aspect_waived ? " (aspect waived: focus exceeds frame)" : "")),
    );
  } else {
    panel.appendChild(
      el(ctx.doc, "p", { class: "no-bbox-note" },
        "no bounding box; attest against the whole-region view"),
    );
  }
  if (f.note) panel.appendChild(el(ctx.doc, "p", { class: "finding-note" }, `note: ${f.note}`));
  panel.appendChild(verdictBar(ctx, state, f));
  return panel;
}

function qualityPanel(ctx: Ctx, view: StageView): HTMLElement {
  const panel = el(ctx.doc, "section", { class: "quality-panel", id: "quality-panel" });
  panel.appendChild(el(ctx.doc, "h3", {}, "automated film checks"));
  const q = view.quality;
  if (q) {
    const tbl = el(ctx.doc, "table", { class: "quality-table" });
    for (const key of ["rotation", "inspiration", "projection", "exposure"] as const) {
      const row = el(ctx.doc, "tr", { "data-check": key });
      row.appendChild(el(ctx.doc, "td", {}, key));
      row.appendChild(el(ctx.doc, "td", { class: `status-${q[key].status}` }, q[key].status));
      row.appendChild(el(ctx.doc, "td", {}, q[key].note));
      tbl.appendChild(row);
    }
    const overall = el(ctx.doc, "tr", { class: "quality-overall" });
    overall.appendChild(el(ctx.doc, "td", {}, "overall"));
    overall.appendChild(el(ctx.doc, "td", { id: "quality-overall" }, q.overall));
    overall.appendChild(el(ctx.doc, "td", {}, ""));
    tbl.appendChild(overall);
    panel.appendChild(tbl);
  } else {
    panel.appendChild(el(ctx.doc, "p", {}, "no automated quality data for this study"));
  }
  panel.appendChild(el(ctx.doc, "h3", {}, "manual confirmations"));
  const checks = view.manual_checks ?? {};
  const list = el(ctx.doc, "div", { class: "manual-checks" });
  for (const key of ["inspiration_ok", "rotation_ok", "exposure_ok"]) {
    const label = el(ctx.doc, "label", { class: "check-label" });
    const attrs: Record<string, string> = { type: "checkbox", "data-check-key": key };
    if (checks[key]) attrs["checked"] = "checked";
    if (!ctx.store.verdictsEnabled) attrs["disabled"] = "disabled";
    const box = el(ctx.doc, "input", attrs) as HTMLInputElement;
    box.addEventListener("change", () => {
      void ctx.store.manualCheck(key, box.checked);
    });
    label.appendChild(box);
    label.appendChild(ctx.doc.createTextNode(` ${key.replace(/_/g, " ")}`));
    list.appendChild(label);
  }
  panel.appendChild(list);
  return panel;
}

function orientationPanel(ctx: Ctx, view: StageView): HTMLElement {
  const panel = el(ctx.doc, "section", { class: "orientation-panel", id: "orientation-panel" });
  const o = view.orientation;
  if (!o) return panel;
  panel.appendChild(el(ctx.doc, "p", {}, `view position: ${o.view_position}`));
  panel.appendChild(el(ctx.doc, "p", {}, `side markers: ${o.marking_status}`));
  const sides = Object.entries(o.identified_sides)
    .map(([k, v]) => `${k}=${v}`)
    .join(", ");
  panel.appendChild(el(ctx.doc, "p", {}, `identified sides: ${sides || "none"}`));
  return panel;
}

function ctrPanel(ctx: Ctx, view: StageView): HTMLElement | null {
  if (!view.ctr) return null;
  const c = view.ctr;
  const panel = el(ctx.doc, "section", { class: "ctr-panel", id: "ctr-panel" });
  panel.appendChild(el(ctx.doc, "h3", {}, "cardiothoracic ratio"));
  panel.appendChild(
    el(ctx.doc, "p", { id: "ctr-ratio" },
      `ratio ${c.ratio.toFixed(4)} (${c.severity})` +
        (c.cardiomegaly_flag ? " heart size flagged" : "")),
  );
  panel.appendChild(
    el(ctx.doc, "p", {}, `mrd ${c.mrd} + mld ${c.mld} over id ${c.id}`),
  );
  return panel;
}

function summaryPanel(ctx: Ctx, state: UiSessionState, view: StageView): HTMLElement {
  const panel = el(ctx.doc, "section", { class: "summary-panel", id: "summary-panel" });
  const all = view.all_findings ?? [];
  const byRegion = new Map<string, FindingView[]>();
  for (const f of all) {
    const group = byRegion.get(f.region) ?? [];
    group.push(f);
    byRegion.set(f.region, group);
  }
  for (const [region, group] of byRegion) {
    const sec = el(ctx.doc, "div", { class: "region-group", "data-region": region });
    sec.appendChild(el(ctx.doc, "h4", {}, `region ${region}`));
    const ul = el(ctx.doc, "ul", {});
    for (const f of group) {
      ul.appendChild(
        el(ctx.doc, "li", { "data-fid": f.finding_id },
          `${verdictGlyph(f)} ${f.label} (${f.rad_id})${f.note ? ` note: ${f.note}` : ""}`),
      );
    }
    sec.appendChild(ul);
    panel.appendChild(sec);
  }
  const blockers = view.blockers;
  const blocked =
    !!blockers && (blockers.missing_stages.length > 0 || blockers.unverdicted.length > 0);
  if (blocked && blockers) {
    const warn = el(ctx.doc, "div", { class: "blockers", id: "blockers" });
    if (blockers.missing_stages.length > 0) {
      warn.appendChild(
        el(ctx.doc, "p", {}, `stages not yet visited: ${blockers.missing_stages.join(", ")}`),
      );
    }
    if (blockers.unverdicted.length > 0) {
      warn.appendChild(
        el(ctx.doc, "p", {}, `findings without a verdict: ${blockers.unverdicted.join(", ")}`),
      );
    }
    panel.appendChild(warn);
  }
  const fin = el(ctx.doc, "button", { id: "btn-finalize", class: "primary" }, "finalize review");
  if (blocked || !ctx.store.verdictsEnabled) fin.setAttribute("disabled", "disabled");
  fin.addEventListener("click", () => {
    void ctx.store.finalize();
  });
  panel.appendChild(fin);
  return panel;
}

function reportView(ctx: Ctx, report: Report): HTMLElement {
  const doc = ctx.doc;
  const panel = el(doc, "section", { class: "report", id: "report" });
  panel.appendChild(el(doc, "h2", {}, "review report"));
  panel.appendChild(el(doc, "p", { id: "attestation" }, report.attestation));
  panel.appendChild(
    el(doc, "p", { class: "report-meta" },
      `study ${report.session.image_id} reviewed by ${report.session.clinician_id}`),
  );
  if (report.quality) {
    panel.appendChild(
      el(doc, "p", { class: "report-quality" }, `film quality: ${report.quality.overall}`),
    );
  }
  for (const section of report.stages) {
    const sec = el(doc, "div", { class: "report-stage", "data-stage": section.stage });
    sec.appendChild(el(doc, "h4", {}, `${section.stage} (${section.region})`));
    sec.appendChild(
      el(doc, "p", {},
        `accepted ${section.accepted.length}, rejected ${section.rejected.length}, ` +
          `uncertain ${section.uncertain.length}`),
    );
    panel.appendChild(sec);
  }
  const ctr = report.measurements.ctr;
  if (ctr) {
    panel.appendChild(
      el(doc, "p", { id: "report-ctr" },
        `cardiothoracic ratio ${ctr.ratio.toFixed(4)}: ${ctr.severity}`),
    );
  }
  const counts = Object.entries(report.summary.verdict_counts)
    .map(([k, v]) => `${k}=${v}`)
    .join(" ");
  panel.appendChild(el(doc, "p", { id: "verdict-counts" }, counts));
  if (report.summary.no_finding.length > 0) {
    const ul = el(doc, "ul", { class: "no-finding-list" });
    for (const e of report.summary.no_finding) {
      ul.appendChild(
        el(doc, "li", {}, `no-finding attestation by ${e.rad_id}: ${e.verdict ?? "PENDING"}`),
      );
    }
    panel.appendChild(ul);
  }
  return panel;
}

function navButtons(ctx: Ctx, state: UiSessionState): HTMLElement {
  const bar = el(ctx.doc, "div", { class: "nav-bar" });
  const view = state.view;
  const session = state.session;
  if (!view || !session) return bar;
  const idx = STAGES.indexOf(view.stage);
  if (idx > 0) {
    const prev = STAGES[idx - 1] as Stage;
    const back = el(ctx.doc, "button", { id: "btn-back" }, `back to ${prev}`);
    back.addEventListener("click", () => {
      void ctx.store.back(prev);
    });
    bar.appendChild(back);
  }
  // Advancing is only offered from the live cursor; revisits use the nav.
  if (view.stage === session.stage_cursor && view.stage !== "SUMMARY") {
    const fwd = el(ctx.doc, "button", { id: "btn-advance", class: "primary" }, "next stage");
    fwd.addEventListener("click", () => {
      void ctx.store.advance();
    });
    bar.appendChild(fwd);
  }
  if (ctx.store.finalized && state.report) {
    const rep = el(ctx.doc, "button", { id: "btn-report" }, "view report");
    rep.addEventListener("click", () => ctx.store.showReport());
    bar.appendChild(rep);
  }
  return bar;
}

export function renderApp(ctx: Ctx, root: HTMLElement, state: UiSessionState): void {
  const doc = ctx.doc;
  root.textContent = "";
  const app = el(doc, "div", { class: "app" });

  const header = el(doc, "header", {});
  header.appendChild(el(doc, "h1", {}, "chest film review"));
  if (state.session) {
    header.appendChild(
      el(doc, "span", { class: "session-tag", id: "session-tag" },
        `${state.session.image_id} / ${state.session.session_id.slice(0, 8)}` +
          (state.session.finalized ? " (finalized)" : "")),
    );
    header.appendChild(stageNav(ctx, state));
  }
  app.appendChild(header);

  if (state.notice) {
    app.appendChild(el(doc, "div", { class: "notice", id: "notice" }, state.notice));
  }

  const main = el(doc, "main", {});
  if (state.view && state.session) {
    const view = state.view;
    main.appendChild(
      el(doc, "h2", { id: "stage-title", "data-stage": view.stage }, STAGE_TITLES[view.stage]),
    );

    const layout = el(doc, "div", { class: "stage-layout" });
    const left = el(doc, "div", { class: "stage-left" });
    const thumb = thumbnail(ctx, state, view);
    if (thumb) left.appendChild(thumb);
    const regionFig = cropFigure(
      ctx, state.session.image_id, view.region_crop.crop, CROP_DISPLAY_W, "stage-crop",
    );
    left.appendChild(regionFig.wrap);
    layout.appendChild(left);

    const right = el(doc, "div", { class: "stage-right" });
    if (view.stage === "QUALITY") right.appendChild(qualityPanel(ctx, view));
    if (view.stage === "ORIENTATION") right.appendChild(orientationPanel(ctx, view));
    const ctr = ctrPanel(ctx, view);
    if (ctr) right.appendChild(ctr);
    if (view.findings.length > 0) {
      right.appendChild(findingList(ctx, state, view));
      right.appendChild(findingDetail(ctx, state, view));
    } else if (view.stage !== "SUMMARY") {
      right.appendChild(el(doc, "p", { class: "empty-stage" }, "no findings land in this stage"));
    }
    // SUMMARY lists every finding by region; its own findings above are
    // the whole-film attestations that still take verdicts.
    if (view.stage === "SUMMARY") right.appendChild(summaryPanel(ctx, state, view));
    layout.appendChild(right);
    main.appendChild(layout);
    main.appendChild(navButtons(ctx, state));
  } else if (state.report) {
    main.appendChild(reportView(ctx, state.report));
  } else if (state.loading) {
    main.appendChild(el(doc, "p", { class: "loading" }, "loading"));
  } else {
    main.appendChild(el(doc, "p", { class: "empty" }, "no active session"));
  }
  app.appendChild(main);
  root.appendChild(app);
}
