// Weighted-DAG view: levels laid out in rows (root on top), nodes shaded and
// sized by their aggregated value. Nodes whose aggregate falls below the
// collapse threshold are hidden, except ancestors of visible mass, so large
// hierarchies reduce to the support skeleton of the instance.

import { escapeHtml, fmtNumber } from "./format";
import type { DagDescription, WeightedInstance } from "./types";

export interface DagViewNode {
  id: string;
  name: string;
  level: number;
  value: number;
  aggregate: number;
  intensity: number; // aggregate / max aggregate, in [0, 1]
  isTruth: boolean;
}

export interface DagViewRow {
  level: number;
  nodes: DagViewNode[];
}

export interface DagViewModel {
  instanceId: string;
  rows: DagViewRow[];
  edges: { child: string; parent: string }[];
  maxAggregate: number;
  hiddenCount: number;
  droppedMass: number;
  collapseThreshold: number;
}

export function validateWeighted(payload: unknown): WeightedInstance | string {
  if (!payload || typeof payload !== "object") return "payload is not an object";
  const candidate = payload as Partial<WeightedInstance>;
  if (typeof candidate.instance_id !== "string") return "payload has no instance_id";
  if (!candidate.values || typeof candidate.values !== "object") {
    return "payload has no values map";
  }
  if (!candidate.aggregates || typeof candidate.aggregates !== "object") {
    return "payload has no aggregates map";
  }
  return candidate as WeightedInstance;
}

export function buildDagViewModel(
  dag: DagDescription,
  instance: WeightedInstance,
  collapseThreshold: number,
): DagViewModel {
  const byId = new Map(dag.nodes.map((node) => [node.id, node]));
  const visible = new Set<string>();
  for (const [id, aggregate] of Object.entries(instance.aggregates)) {
    if (aggregate >= collapseThreshold && byId.has(id)) visible.add(id);
  }
  // keep every ancestor of visible mass so the skeleton stays connected
  const queue = [...visible];
  while (queue.length > 0) {
    const node = byId.get(queue.pop()!);
    if (!node) continue;
    for (const parent of node.parents) {
      if (!visible.has(parent) && byId.has(parent)) {
        visible.add(parent);
        queue.push(parent);
      }
    }
  }

  let maxAggregate = 0;
  for (const id of visible) {
    maxAggregate = Math.max(maxAggregate, instance.aggregates[id] ?? 0);
  }

  const rowsByLevel = new Map<number, DagViewNode[]>();
  for (const id of visible) {
    const node = byId.get(id)!;
    const aggregate = instance.aggregates[id] ?? 0;
    const entry: DagViewNode = {
      id,
      name: node.name,
      level: node.level,
      value: instance.values[id] ?? 0,
      aggregate,
      intensity: maxAggregate > 0 ? aggregate / maxAggregate : 0,
      isTruth: instance.truth === id,
    };
    const row = rowsByLevel.get(node.level);
    if (row) row.push(entry);
    else rowsByLevel.set(node.level, [entry]);
  }
  const rows = [...rowsByLevel.entries()]
    .sort((a, b) => b[0] - a[0])
    .map(([level, nodes]) => ({
      level,
      nodes: nodes.sort((a, b) => (a.id < b.id ? -1 : 1)),
    }));

  const edges: { child: string; parent: string }[] = [];
  for (const id of visible) {
    for (const parent of byId.get(id)!.parents) {
      if (visible.has(parent)) edges.push({ child: id, parent });
    }
  }
  edges.sort((a, b) => (a.child + a.parent < b.child + b.parent ? -1 : 1));

  return {
    instanceId: instance.instance_id,
    rows,
    edges,
    maxAggregate,
    hiddenCount: dag.nodes.length - visible.size,
    droppedMass: instance.dropped_mass ?? 0,
    collapseThreshold,
  };
}

const NODE_WIDTH = 104;
const NODE_GAP = 14;
const ROW_HEIGHT = 84;
const NODE_MIN_HEIGHT = 10;
const NODE_MAX_HEIGHT = 34;

export function renderDagView(model: DagViewModel): string {
  const widest = Math.max(1, ...model.rows.map((row) => row.nodes.length));
  const width = Math.max(320, widest * (NODE_WIDTH + NODE_GAP) + NODE_GAP);
  const height = model.rows.length * ROW_HEIGHT + 28;

  const positions = new Map<string, { x: number; y: number }>();
  for (const [rowIndex, row] of model.rows.entries()) {
    const rowWidth = row.nodes.length * (NODE_WIDTH + NODE_GAP) - NODE_GAP;
    const left = (width - rowWidth) / 2;
    for (const [col, node] of row.nodes.entries()) {
      positions.set(node.id, {
        x: left + col * (NODE_WIDTH + NODE_GAP),
        y: 20 + rowIndex * ROW_HEIGHT,
      });
    }
  }

  const parts: string[] = [];
  parts.push(
    `<svg class="dag-view" viewBox="0 0 ${width} ${height}" role="img" ` +
      `aria-label="weighted hierarchy for ${escapeHtml(model.instanceId)}">`,
  );
  for (const edge of model.edges) {
    const child = positions.get(edge.child);
    const parent = positions.get(edge.parent);
    if (!child || !parent) continue;
    parts.push(
      `<line x1="${child.x + NODE_WIDTH / 2}" y1="${child.y}" ` +
        `x2="${parent.x + NODE_WIDTH / 2}" y2="${parent.y + NODE_MAX_HEIGHT}" ` +
        `class="dag-edge" />`,
    );
  }
  for (const row of model.rows) {
    for (const node of row.nodes) {
      const pos = positions.get(node.id)!;
      const boxHeight =
        NODE_MIN_HEIGHT + (NODE_MAX_HEIGHT - NODE_MIN_HEIGHT) * Math.sqrt(node.intensity);
      const aggregateText = fmtNumber(node.aggregate);
      const classes = node.isTruth ? "dag-node truth" : "dag-node";
      parts.push(
        `<g class="${classes}" data-node="${escapeHtml(node.id)}">` +
          `<rect x="${pos.x}" y="${pos.y + (NODE_MAX_HEIGHT - boxHeight)}" ` +
          `width="${NODE_WIDTH}" height="${boxHeight}" rx="3" ` +
          `fill-opacity="${(0.15 + 0.85 * node.intensity).toFixed(3)}">` +
          `<title>${escapeHtml(node.name)}\naggregate ${escapeHtml(aggregateText)}` +
          `\nvalue ${escapeHtml(fmtNumber(node.value))}</title></rect>` +
          `<text x="${pos.x + NODE_WIDTH / 2}" y="${pos.y + NODE_MAX_HEIGHT + 12}" ` +
          `text-anchor="middle" class="dag-label">` +
          `${escapeHtml(node.id)} ${escapeHtml(aggregateText)}</text>` +
          `</g>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderInstancePanel(
  dag: DagDescription,
  payload: unknown,
  collapseThreshold: number,
): string {
  const checked = validateWeighted(payload);
  if (typeof checked === "string") {
    return `<div class="error-panel">cannot render instance: ${escapeHtml(checked)}</div>`;
  }
  const model = buildDagViewModel(dag, checked, collapseThreshold);
  const notes: string[] = [
    `${model.hiddenCount} nodes below aggregate ${model.collapseThreshold} are collapsed`,
  ];
  if (model.droppedMass > 0) {
    notes.push(`dropped mass ${fmtNumber(model.droppedMass)}`);
  }
  if (checked.truth) {
    notes.push(`truth label ${escapeHtml(checked.truth)}`);
  }
  return (
    `<div class="instance-panel">` +
    `<h3>${escapeHtml(model.instanceId)} <small>(${escapeHtml(checked.kind)})</small></h3>` +
    `<p class="panel-note">${notes.join(" | ")}</p>` +
    renderDagView(model) +
    `</div>`
  );
}
