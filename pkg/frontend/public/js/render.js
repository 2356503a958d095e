// Pure HTML-string builders.  Every value rendered here originates from a
// service payload; these functions add markup, never data.
export function escapeHtml(value) {
    return value
        .replaceAll("&", "&amp;")
        .replaceAll("<", "&lt;")
        .replaceAll(">", "&gt;")
        .replaceAll('"', "&quot;")
        .replaceAll("'", "&#39;");
}
export function formatEntities(row) {
    if (!row.entities.length)
        return "";
    return row.entities
        .map((e) => `${e.entity_id} [${e.source}]`)
        .join(", ");
}
export function formatClassification(row) {
    if (row.class_label === null)
        return "";
    const confidence = row.confidence === null ? "" : ` (${row.confidence.toFixed(3)})`;
    return `${row.class_label}${confidence}`;
}
export function overrideMarker(override) {
    if (!override)
        return "";
    return override.action === "suppress" ? "suppressed" : "forced";
}
export function decisionRowHtml(row, override, index) {
    return `<tr class="decision-row" data-index="${index}">
    <td class="col-url">${escapeHtml(row.canonical_url)}</td>
    <td class="col-publisher">${escapeHtml(row.publisher)}</td>
    <td class="col-show">${row.show ? "show" : "hide"}</td>
    <td class="col-entities">${escapeHtml(formatEntities(row))}</td>
    <td class="col-class">${escapeHtml(formatClassification(row))}</td>
    <td class="col-override">${escapeHtml(overrideMarker(override))}</td>
  </tr>`;
}
export function emptyStateHtml() {
    return '<tr class="empty-state"><td colspan="6">No decisions yet.</td></tr>';
}
export function decisionsTableBody(page, overrides) {
    if (!page.items.length)
        return emptyStateHtml();
    return page.items
        .map((row, index) => decisionRowHtml(row, overrides.get(row.canonical_url) ?? null, index))
        .join("\n");
}
export function paginationLabel(page) {
    const pages = Math.max(1, Math.ceil(page.total / page.page_size));
    return `Page ${page.page} of ${pages} (${page.total} decisions)`;
}
export function provenanceHtml(trace) {
    return trace.map((step) => `<li>${escapeHtml(step)}</li>`).join("");
}
export function pickerResultHtml(entity, index) {
    return `<li class="picker-result" data-index="${index}">
    <span class="picker-id">${escapeHtml(entity.id)}</span>
    <span class="picker-name">${escapeHtml(entity.name)}</span>
    <span class="picker-kind">${escapeHtml(entity.kind)}</span>
  </li>`;
}
export function chosenEntitiesHtml(ids) {
    return ids
        .map((id, index) => `<span class="chip" data-index="${index}">${escapeHtml(id)}<button class="chip-remove" data-index="${index}">x</button></span>`)
        .join("");
}
export function detailHtml(row, override) {
    const overrideLine = override
        ? `<p class="detail-override">Override: ${escapeHtml(override.action)}${override.entities.length ? " -> " + escapeHtml(override.entities.join(", ")) : ""} (by ${escapeHtml(override.author)})</p>`
        : '<p class="detail-override">No override set.</p>';
    return `<h3>${escapeHtml(row.canonical_url)}</h3>
  <p>Publisher: ${escapeHtml(row.publisher)} | Widget: ${row.show ? "show" : "hide"} | Fingerprint: ${escapeHtml(row.article_fingerprint)}</p>
  <p>Classification: ${escapeHtml(formatClassification(row)) || "(none)"} </p>
  <p>Entities: ${escapeHtml(formatEntities(row)) || "(none)"}</p>
  ${overrideLine}
  <h4>Provenance</h4>
  <ol class="provenance">${provenanceHtml(row.provenance)}</ol>`;
}
