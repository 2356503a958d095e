// Pure HTML-string builders.  Every value rendered here originates from a
// service payload; these functions add markup, never data.

import type { DecisionRow, DecisionsPage, EntitySummary, OverrideInfo } from "./types.js";

export function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function formatEntities(row: DecisionRow): string {
  if (!row.entities.length) return "";
  return row.entities
    .map((e) => `${e.entity_id} [${e.source}]`)
    .join(", ");
}

export function formatClassification(row: DecisionRow): string {
  if (row.class_label === null) return "";
  const confidence = row.confidence === null ? "" : ` (${row.confidence.toFixed(3)})`;
  return `${row.class_label}${confidence}`;
}

export function overrideMarker(override: OverrideInfo | null): string {
  if (!override) return "";
  return override.action === "suppress" ? "suppressed" : "forced";
}

export function decisionRowHtml(row: DecisionRow, override: OverrideInfo | null, index: number): string {
  return `<tr class="decision-row" data-index="${index}">
    <td class="col-url">${escapeHtml(row.canonical_url)}</td>
    <td class="col-publisher">${escapeHtml(row.publisher)}</td>
    <td class="col-show">${row.show ? "show" : "hide"}</td>
    <td class="col-entities">${escapeHtml(formatEntities(row))}</td>
    <td class="col-class">${escapeHtml(formatClassification(row))}</td>
    <td class="col-override">${escapeHtml(overrideMarker(override))}</td>
  </tr>`;
}

export function emptyStateHtml(): string {
  return '<tr class="empty-state"><td colspan="6">No decisions yet.</td></tr>';
}

export function decisionsTableBody(
  page: DecisionsPage,
  overrides: Map<string, OverrideInfo | null>,
): string {
  if (!page.items.length) return emptyStateHtml();
  return page.items
    .map((row, index) => decisionRowHtml(row, overrides.get(row.canonical_url) ?? null, index))
    .join("\n");
}

export function paginationLabel(page: DecisionsPage): string {
  const pages = Math.max(1, Math.ceil(page.total / page.page_size));
  return `Page ${page.page} of ${pages} (${page.total} decisions)`;
}

export function provenanceHtml(trace: string[]): string {
  return trace.map((step) => `<li>${escapeHtml(step)}</li>`).join("");
}

export function pickerResultHtml(entity: EntitySummary, index: number): string {
  return `<li class="picker-result" data-index="${index}">
    <span class="picker-id">${escapeHtml(entity.id)}</span>
    <span class="picker-name">${escapeHtml(entity.name)}</span>
    <span class="picker-kind">${escapeHtml(entity.kind)}</span>
  </li>`;
}

export function chosenEntitiesHtml(ids: string[]): string {
  return ids
    .map(
      (id, index) =>
        `<span class="chip" data-index="${index}">${escapeHtml(id)}<button class="chip-remove" data-index="${index}">x</button></span>`,
    )
    .join("");
}

export function detailHtml(row: DecisionRow, override: OverrideInfo | null): string {
  const overrideLine = override
    ? `<p class="detail-override">Override: ${escapeHtml(override.action)}${
        override.entities.length ? " -> " + escapeHtml(override.entities.join(", ")) : ""
      } (by ${escapeHtml(override.author)})</p>`
    : '<p class="detail-override">No override set.</p>';
  return `<h3>${escapeHtml(row.canonical_url)}</h3>
  <p>Publisher: ${escapeHtml(row.publisher)} | Widget: ${row.show ? "show" : "hide"} | Fingerprint: ${escapeHtml(row.article_fingerprint)}</p>
  <p>Classification: ${escapeHtml(formatClassification(row)) || "(none)"} </p>
  <p>Entities: ${escapeHtml(formatEntities(row)) || "(none)"}</p>
  ${overrideLine}
  <h4>Provenance</h4>
  <ol class="provenance">${provenanceHtml(row.provenance)}</ol>`;
}
