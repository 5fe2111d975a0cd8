// Application shell: wires the store to the renderer, owns hash routing
// and keyboard shortcuts. The window is injected so tests can drive a
// synthetic DOM against a live service.

import { ApiClient, Verdict } from "./api.js";
import { renderApp } from "./render.js";
import { SessionStore } from "./state.js";

export interface AppOptions {
  client: ApiClient;
  window: Window;
  clinicianId?: string;
  viewport?: { vw: number; vh: number };
}

export interface App {
  store: SessionStore;
  start(imageId: string): Promise<string>;
  boot(): Promise<void>;
  destroy(): void;
}

const SESSION_HASH = /^#\/session\/([A-Za-z0-9_-]+)$/;

export function createApp(root: HTMLElement, opts: AppOptions): App {
  const win = opts.window;
  const doc = win.document;
  const client = opts.client;
  const clinician = opts.clinicianId ?? "reviewer";
  const store = new SessionStore(client, opts.viewport ?? { vw: 1024, vh: 768 });
  const ctx = { doc, store, client };

  const unsubscribe = store.subscribe((state) => renderApp(ctx, root, state));

  // Single-key verdict entry. Ignored while typing a note.
  const onKey = (ev: KeyboardEvent): void => {
    const target = ev.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
    const map: Record<string, Verdict> = { a: "ACCEPT", r: "REJECT", u: "UNCERTAIN" };
    const verdict = map[ev.key.toLowerCase()];
    if (!verdict) return;
    const state = store.snapshot();
    if (!state.selectedFinding || !state.view) return;
    void store.verdict(state.selectedFinding, verdict);
  };
  doc.addEventListener("keydown", onKey as EventListener);

  const onHashChange = (): void => {
    const m = SESSION_HASH.exec(win.location.hash);
    if (m && m[1] && store.snapshot().session?.session_id !== m[1]) {
      void store.resume(m[1]);
    }
  };
  win.addEventListener("hashchange", onHashChange);

  async function start(imageId: string): Promise<string> {
    const sid = await store.start(imageId, clinician);
    win.location.hash = `#/session/${sid}`;
    return sid;
  }

  async function renderPicker(): Promise<void> {
    const studies = await client.listStudies();
    root.textContent = "";
    const box = doc.createElement("div");
    box.setAttribute("class", "study-picker");
    const h = doc.createElement("h1");
    h.textContent = "chest film review";
    box.appendChild(h);
    const ul = doc.createElement("ul");
    ul.setAttribute("id", "study-list");
    for (const s of studies) {
      const li = doc.createElement("li");
      li.setAttribute("data-image-id", s.image_id);
      const btn = doc.createElement("button");
      btn.textContent = `${s.image_id} (${s.finding_count} findings, quality ${s.ripe_overall})`;
      btn.addEventListener("click", () => {
        void start(s.image_id);
      });
      li.appendChild(btn);
      ul.appendChild(li);
    }
    box.appendChild(ul);
    root.appendChild(box);
  }

  async function boot(): Promise<void> {
    const m = SESSION_HASH.exec(win.location.hash);
    if (m && m[1]) {
      await store.resume(m[1]);
      return;
    }
    await renderPicker();
  }

  function destroy(): void {
    unsubscribe();
    doc.removeEventListener("keydown", onKey as EventListener);
    win.removeEventListener("hashchange", onHashChange);
  }

  return { store, start, boot, destroy };
}
