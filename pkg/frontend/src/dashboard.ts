// Metric dashboard: per-group bars with support counts. A group with no
// defined value (e.g. zero errors at the from level) gets an explicit
// "undefined" marker and an empty bar; it is never drawn as a zero.

import { escapeHtml, fmtNumber } from "./format";
import type { MetricReport } from "./types";

export interface DashboardRow {
  label: string;
  value: number | null;
  valueText: string;
  supportText: string;
  widthPct: number;
  negative: boolean;
  undefined: boolean;
}

export interface DashboardModel {
  title: string;
  paramsText: string;
  overallText: string | null;
  rows: DashboardRow[];
  notes: string[];
}

function supportText(support: Record<string, number>): string {
  return Object.keys(support)
    .sort()
    .map((key) => `${key}=${support[key]}`)
    .join(" ");
}

export function buildDashboard(report: MetricReport): DashboardModel {
  const rows: DashboardRow[] = [];
  if (report.groups) {
    for (const group of Object.keys(report.groups).sort()) {
      const entry = report.groups[group];
      rows.push({
        label: group,
        value: entry.value,
        valueText: fmtNumber(entry.value),
        supportText: supportText(entry.support),
        widthPct: 0,
        negative: entry.value !== null && entry.value < 0,
        undefined: entry.value === null,
      });
    }
  } else if (report.pairs) {
    for (const pair of report.pairs) {
      rows.push({
        label: pair.pair.join(" | "),
        value: pair.value,
        valueText: fmtNumber(pair.value),
        supportText: `co_support=${pair.co_support}`,
        widthPct: 0,
        negative: pair.value < 0,
        undefined: false,
      });
    }
  } else {
    rows.push({
      label: "overall",
      value: report.value,
      valueText: fmtNumber(report.value),
      supportText: supportText(report.support),
      widthPct: 0,
      negative: report.value !== null && report.value < 0,
      undefined: report.value === null,
    });
  }
  const maxAbs = Math.max(...rows.map((row) => (row.value === null ? 0 : Math.abs(row.value))));
  for (const row of rows) {
    row.widthPct = row.value === null || maxAbs === 0
      ? 0
      : (Math.abs(row.value) / maxAbs) * 100;
  }
  return {
    title: report.metric,
    paramsText: JSON.stringify(report.params),
    overallText: report.value === null && (report.groups || report.pairs)
      ? null
      : fmtNumber(report.value),
    rows,
    notes: report.notes ?? [],
  };
}

export function renderDashboard(report: MetricReport): string {
  const model = buildDashboard(report);
  const parts: string[] = [];
  parts.push(`<div class="dashboard">`);
  parts.push(
    `<h3>${escapeHtml(model.title)} <small>${escapeHtml(model.paramsText)}</small></h3>`,
  );
  if (model.overallText !== null) {
    parts.push(`<p class="overall">value: <strong>${escapeHtml(model.overallText)}</strong></p>`);
  }
  for (const note of model.notes) {
    parts.push(`<p class="panel-note">${escapeHtml(note)}</p>`);
  }
  parts.push(`<table class="bars"><tbody>`);
  for (const row of model.rows) {
    const classes = ["bar-row"];
    if (row.undefined) classes.push("undefined");
    if (row.negative) classes.push("negative");
    const bar = row.undefined
      ? `<span class="no-value-marker">no value</span>`
      : `<div class="bar" style="width:${row.widthPct.toFixed(1)}%"></div>`;
    parts.push(
      `<tr class="${classes.join(" ")}">` +
        `<td class="bar-label">${escapeHtml(row.label)}</td>` +
        `<td class="bar-cell">${bar}</td>` +
        `<td class="bar-value">${escapeHtml(row.valueText)}</td>` +
        `<td class="bar-support">${escapeHtml(row.supportText)}</td>` +
        `</tr>`,
    );
  }
  parts.push(`</tbody></table></div>`);
  return parts.join("");
}
