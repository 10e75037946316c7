// Query bar and instance list rendering. A failed query shows its server
// diagnostic inline and leaves the previous list untouched.

import { escapeHtml, fmtNumber, fmtPercent } from "./format";
import type { InstancePage } from "./types";

export function renderQueryStatus(page: InstancePage): string {
  const fraction = fmtNumber(page.fraction);
  return (
    `<span class="query-status">` +
    `matched <strong>${page.matched}</strong> of ${page.total} instances, ` +
    `fraction <strong>${escapeHtml(fraction)}</strong> (${fmtPercent(page.fraction)})` +
    `</span>`
  );
}

export function renderQueryError(message: string): string {
  return `<span class="query-error">${escapeHtml(message)}</span>`;
}

export function renderInstanceList(page: InstancePage, selected: string | null): string {
  const parts: string[] = [];
  parts.push(`<ul class="instance-list">`);
  for (const id of page.ids) {
    const classes = id === selected ? "instance-link selected" : "instance-link";
    parts.push(
      `<li><button type="button" class="${classes}" data-instance="${escapeHtml(id)}">` +
        `${escapeHtml(id)}</button></li>`,
    );
  }
  parts.push(`</ul>`);
  if (page.ids.length === 0) {
    parts.push(`<p class="panel-note">no matching instances</p>`);
  }
  const hasPrev = page.offset > 0;
  const hasNext = page.offset + page.ids.length < page.matched;
  parts.push(
    `<div class="pager">` +
      `<button type="button" data-page="prev" ${hasPrev ? "" : "disabled"}>prev</button>` +
      `<span>${page.offset + 1}-${page.offset + page.ids.length} of ${page.matched}</span>` +
      `<button type="button" data-page="next" ${hasNext ? "" : "disabled"}>next</button>` +
      `</div>`,
  );
  return parts.join("");
}
