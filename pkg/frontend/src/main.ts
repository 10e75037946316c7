// Wiring: URL state -> fetches -> rendered panels. All numbers come from the
// server; this file only moves payloads into the DOM.

import { ApiClient, ApiRequestError } from "./api";
import { renderInstancePanel } from "./dagView";
import { renderDashboard } from "./dashboard";
import { escapeHtml } from "./format";
import { renderInstanceList, renderQueryError, renderQueryStatus } from "./queryBar";
import { DEFAULT_STATE, decodeState, encodeState, MetricTab, ViewState } from "./state";
import type { DagDescription, InstancePage } from "./types";
import "./styles.css";

const PAGE_SIZE = 25;

const api = new ApiClient();
let state: ViewState = decodeState(window.location.search);
let dag: DagDescription | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function pushState() {
  const encoded = encodeState(state);
  const target = `${window.location.pathname}${encoded}`;
  if (`${window.location.pathname}${window.location.search}` !== target) {
    window.history.pushState(null, "", target);
  }
}

function setState(patch: Partial<ViewState>, refetch = true) {
  state = { ...state, ...patch };
  pushState();
  if (refetch) void refresh();
}

async function loadDag() {
  try {
    dag = await api.dag();
  } catch (error) {
    el("dag-summary").textContent = `failed to load hierarchy: ${String(error)}`;
    return;
  }
  if (!dag) return;
  const levels = dag.levels.map((l) => `level ${l.level}: ${l.count}`).join(", ");
  el("dag-summary").textContent = `${dag.nodes.length} nodes (${levels})`;
  renderPresets();
}

function renderPresets() {
  if (!dag) return;
  const level2 = dag.nodes
    .filter((node) => node.level === 2)
    .map((node) => node.id)
    .sort();
  const presets = [
    "count(level=2, min_mass=0.1) == 1",
    "count(level=2, min_mass=0.1) > 3",
  ];
  if (level2.length >= 2) {
    presets.push(`split(${level2[0]}, ${level2[1]}, tol=0.05)`);
  }
  el("presets").innerHTML = presets
    .map(
      (preset) =>
        `<button type="button" class="preset" data-query="${escapeHtml(preset)}">` +
        `${escapeHtml(preset)}</button>`,
    )
    .join(" ");
  for (const button of el("presets").querySelectorAll<HTMLButtonElement>(".preset")) {
    button.addEventListener("click", () => {
      (el("query-input") as HTMLInputElement).value = button.dataset.query ?? "";
      setState({ query: button.dataset.query ?? "", offset: 0 });
    });
  }
}

async function refreshInstances() {
  let page: InstancePage | null;
  try {
    page = await api.instances(state.query, PAGE_SIZE, state.offset);
  } catch (error) {
    if (error instanceof ApiRequestError) {
      el("query-feedback").innerHTML = renderQueryError(error.detail);
      return; // keep the previous list on bad queries
    }
    throw error;
  }
  if (!page) return; // superseded by a newer request
  el("query-feedback").innerHTML = renderQueryStatus(page);
  el("instance-list-box").innerHTML = renderInstanceList(page, state.instance);
  for (const button of el("instance-list-box").querySelectorAll<HTMLButtonElement>(
    ".instance-link",
  )) {
    button.addEventListener("click", () =>
      setState({ instance: button.dataset.instance ?? null, tab: "instance" }),
    );
  }
  for (const button of el("instance-list-box").querySelectorAll<HTMLButtonElement>("[data-page]")) {
    button.addEventListener("click", () => {
      const delta = button.dataset.page === "next" ? PAGE_SIZE : -PAGE_SIZE;
      setState({ offset: Math.max(0, state.offset + delta) });
    });
  }
}

async function refreshMain() {
  const box = el("main-panel");
  if (!dag) return;
  try {
    if (state.tab === "instance") {
      if (!state.instance) {
        box.innerHTML = `<p class="panel-note">select an instance to inspect its weighted hierarchy</p>`;
        return;
      }
      const payload = await api.weighted(state.instance);
      if (!payload) return;
      box.innerHTML = renderInstancePanel(dag, payload, state.collapseThreshold);
    } else if (state.tab === "accuracy") {
      const report = await api.accuracy(state.fromLevel, state.toLevel, state.groupBy);
      if (report) box.innerHTML = renderDashboard(report);
    } else if (state.tab === "uncertainty") {
      const report = await api.uncertainty(state.fromLevel, state.toLevel, state.groupBy);
      if (report) box.innerHTML = renderDashboard(report);
    } else if (state.tab === "preference") {
      const left = (el("left-selector") as HTMLInputElement).value || "all";
      const right = (el("right-selector") as HTMLInputElement).value || "all";
      const kind = (el("value-kind") as HTMLSelectElement).value;
      const report = await api.preference(left, right, kind);
      if (report) box.innerHTML = renderDashboard(report);
    } else {
      const pairs = (el("pairs-input") as HTMLInputElement).value || "co-supported";
      const mode = (el("pair-mode") as HTMLSelectElement).value;
      const report = await api.confusion(pairs, 25, mode);
      if (report) box.innerHTML = renderDashboard(report);
    }
  } catch (error) {
    if (error instanceof ApiRequestError) {
      box.innerHTML = `<div class="error-panel">${escapeHtml(error.detail)}</div>`;
    } else {
      throw error;
    }
  }
}

function syncControls() {
  (el("query-input") as HTMLInputElement).value = state.query;
  (el("from-level") as HTMLInputElement).value = String(state.fromLevel);
  (el("to-level") as HTMLInputElement).value = String(state.toLevel);
  (el("group-by") as HTMLInputElement).value = state.groupBy === null ? "" : String(state.groupBy);
  (el("collapse-threshold") as HTMLInputElement).value = String(state.collapseThreshold);
  for (const button of document.querySelectorAll<HTMLButtonElement>(".tab")) {
    button.classList.toggle("active", button.dataset.tab === state.tab);
  }
  el("preference-controls").style.display = state.tab === "preference" ? "" : "none";
  el("confusion-controls").style.display = state.tab === "confusion" ? "" : "none";
  el("level-controls").style.display =
    state.tab === "accuracy" || state.tab === "uncertainty" ? "" : "none";
}

async function refresh() {
  syncControls();
  await Promise.all([refreshInstances(), refreshMain()]);
}

function wireEvents() {
  el("query-form").addEventListener("submit", (event) => {
    event.preventDefault();
    setState({ query: (el("query-input") as HTMLInputElement).value, offset: 0 });
  });
  for (const button of document.querySelectorAll<HTMLButtonElement>(".tab")) {
    button.addEventListener("click", () => setState({ tab: button.dataset.tab as MetricTab }));
  }
  el("level-controls").addEventListener("change", () => {
    setState({
      fromLevel: Number((el("from-level") as HTMLInputElement).value) || DEFAULT_STATE.fromLevel,
      toLevel: Number((el("to-level") as HTMLInputElement).value) || DEFAULT_STATE.toLevel,
      groupBy: (el("group-by") as HTMLInputElement).value
        ? Number((el("group-by") as HTMLInputElement).value)
        : null,
    });
  });
  el("apply-preference").addEventListener("click", () => void refreshMain());
  el("apply-confusion").addEventListener("click", () => void refreshMain());
  el("collapse-threshold").addEventListener("change", () => {
    setState({
      collapseThreshold:
        Number((el("collapse-threshold") as HTMLInputElement).value) ||
        DEFAULT_STATE.collapseThreshold,
    });
  });
  window.addEventListener("popstate", () => {
    state = decodeState(window.location.search);
    void refresh();
  });
}

async function start() {
  wireEvents();
  await loadDag();
  await refresh();
}

void start();
