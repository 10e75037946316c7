// View state round-trips through the URL so every analysis view is shareable
// and reconstructible from its address alone.

export type MetricTab =
  | "instance"
  | "accuracy"
  | "uncertainty"
  | "preference"
  | "confusion";

const TABS: MetricTab[] = ["instance", "accuracy", "uncertainty", "preference", "confusion"];

export interface ViewState {
  query: string;
  instance: string | null;
  fromLevel: number;
  toLevel: number;
  groupBy: number | null;
  tab: MetricTab;
  offset: number;
  collapseThreshold: number;
}

export const DEFAULT_STATE: ViewState = {
  query: "",
  instance: null,
  fromLevel: 1,
  toLevel: 2,
  groupBy: null,
  tab: "instance",
  offset: 0,
  collapseThreshold: 0.01,
};

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  if (state.instance !== null) params.set("instance", state.instance);
  if (state.fromLevel !== DEFAULT_STATE.fromLevel) params.set("from", String(state.fromLevel));
  if (state.toLevel !== DEFAULT_STATE.toLevel) params.set("to", String(state.toLevel));
  if (state.groupBy !== null) params.set("group_by", String(state.groupBy));
  if (state.tab !== DEFAULT_STATE.tab) params.set("tab", state.tab);
  if (state.offset !== 0) params.set("offset", String(state.offset));
  if (state.collapseThreshold !== DEFAULT_STATE.collapseThreshold) {
    params.set("collapse", String(state.collapseThreshold));
  }
  const text = params.toString();
  return text ? `?${text}` : "";
}

function intOr(value: string | null, fallback: number): number {
  if (value === null) return fallback;
  const parsed = Number.parseInt(value, 10);
  return Number.isFinite(parsed) ? parsed : fallback;
}

function floatOr(value: string | null, fallback: number): number {
  if (value === null) return fallback;
  const parsed = Number.parseFloat(value);
  return Number.isFinite(parsed) ? parsed : fallback;
}

export function decodeState(search: string): ViewState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const tabParam = params.get("tab");
  const groupParam = params.get("group_by");
  return {
    query: params.get("q") ?? DEFAULT_STATE.query,
    instance: params.get("instance"),
    fromLevel: intOr(params.get("from"), DEFAULT_STATE.fromLevel),
    toLevel: intOr(params.get("to"), DEFAULT_STATE.toLevel),
    groupBy: groupParam === null ? null : intOr(groupParam, 0) || null,
    tab: TABS.includes(tabParam as MetricTab) ? (tabParam as MetricTab) : DEFAULT_STATE.tab,
    offset: Math.max(0, intOr(params.get("offset"), 0)),
    collapseThreshold: floatOr(params.get("collapse"), DEFAULT_STATE.collapseThreshold),
  };
}
