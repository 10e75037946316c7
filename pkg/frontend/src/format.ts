// Numbers are displayed exactly as the server sent them: String(n) of a
// JSON-parsed double prints the shortest round-trip form, the same digits
// the server serialized. Percentages are a readability add-on beside, never
// instead of, the raw value.

export function fmtNumber(value: number | null | undefined): string {
  if (value === null || value === undefined) return "undefined";
  return String(value);
}

export function fmtPercent(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}
