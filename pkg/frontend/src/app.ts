// QA console: curators review recent advice decisions and set or clear
// manual overrides.  The console never computes matches itself and never
// fabricates post-mutation state: every change is followed by a re-fetch.

import { AdviceApi, ApiError, type ApiSettings } from "./api.js";
import {
  chosenEntitiesHtml,
  decisionsTableBody,
  detailHtml,
  paginationLabel,
  pickerResultHtml,
} from "./render.js";
import type { DecisionFilters, DecisionRow, DecisionsPage, EntitySummary, OverrideInfo } from "./types.js";

const SETTINGS_KEY = "causematch-console-settings";

interface ConsoleState {
  api: AdviceApi;
  settings: ApiSettings;
  filters: DecisionFilters;
  page: DecisionsPage | null;
  overrides: Map<string, OverrideInfo | null>;
  selected: DecisionRow | null;
  pickerResults: EntitySummary[];
  chosen: string[];
}

function loadSettings(): ApiSettings {
  try {
    const raw = window.localStorage.getItem(SETTINGS_KEY);
    if (raw) return { baseUrl: "http://127.0.0.1:8040", ...JSON.parse(raw) };
  } catch {
    // fall through to defaults
  }
  return { baseUrl: "http://127.0.0.1:8040", adminToken: "", author: "" };
}

function saveSettings(settings: ApiSettings): void {
  window.localStorage.setItem(SETTINGS_KEY, JSON.stringify(settings));
}

const LAYOUT = `
<header>
  <h1>causematch QA console</h1>
  <div id="error-banner" class="banner hidden"></div>
</header>
<section id="settings-bar">
  <label>Service <input id="setting-base-url" type="text" size="28"></label>
  <label>Admin token <input id="setting-token" type="password" size="16"></label>
  <label>Your name <input id="setting-author" type="text" size="12"></label>
  <button id="settings-apply">Apply</button>
</section>
<section id="filter-bar">
  <label>Publisher <input id="filter-publisher" type="text" size="14"></label>
  <label>Widget
    <select id="filter-show">
      <option value="">all</option>
      <option value="true">show</option>
      <option value="false">hide</option>
    </select>
  </label>
  <label>Source
    <select id="filter-source">
      <option value="">any</option>
      <option value="override">override</option>
      <option value="rule">rule</option>
      <option value="percolator">percolator</option>
      <option value="classifier+tags">classifier+tags</option>
    </select>
  </label>
  <label>Since <input id="filter-since" type="date"></label>
  <button id="refresh">Refresh</button>
</section>
<section id="decisions">
  <table id="decisions-table">
    <thead>
      <tr><th>Canonical URL</th><th>Publisher</th><th>Widget</th><th>Entities</th><th>Class</th><th>Override</th></tr>
    </thead>
    <tbody id="decisions-body"></tbody>
  </table>
  <div id="pagination">
    <button id="page-prev">&laquo; newer</button>
    <span id="page-label"></span>
    <button id="page-next">older &raquo;</button>
  </div>
</section>
<section id="editor" class="hidden">
  <div id="detail"></div>
  <div id="editor-actions">
    <button id="btn-suppress">Suppress widget</button>
    <button id="btn-clear-override">Clear override</button>
  </div>
  <div id="editor-error" class="banner hidden"></div>
  <div id="picker">
    <h4>Force entities</h4>
    <input id="picker-search" type="text" placeholder="search entities...">
    <ul id="picker-results"></ul>
    <div id="picker-chosen"></div>
    <button id="btn-save-force" disabled>Save forced entities</button>
  </div>
</section>
`;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showBanner(id: string, message: string): void {
  const banner = el<HTMLDivElement>(id);
  banner.textContent = message;
  banner.classList.remove("hidden");
}

function hideBanner(id: string): void {
  el<HTMLDivElement>(id).classList.add("hidden");
}

async function loadDecisions(state: ConsoleState): Promise<void> {
  try {
    const page = await state.api.fetchDecisions(state.filters);
    const overrides = new Map<string, OverrideInfo | null>();
    await Promise.all(
      page.items.map(async (row) => {
        overrides.set(row.canonical_url, await state.api.getOverride(row.canonical_url));
      }),
    );
    state.page = page;
    state.overrides = overrides;
    hideBanner("error-banner");
    renderDecisions(state);
  } catch (error) {
    // Connection failure: say so and drop the stale table.
    state.page = null;
    state.overrides = new Map();
    el<HTMLTableSectionElement>("decisions-body").innerHTML = "";
    el<HTMLSpanElement>("page-label").textContent = "";
    showBanner("error-banner", `Could not load decisions: ${(error as Error).message}`);
  }
}

function renderDecisions(state: ConsoleState): void {
  if (!state.page) return;
  el<HTMLTableSectionElement>("decisions-body").innerHTML = decisionsTableBody(
    state.page,
    state.overrides,
  );
  el<HTMLSpanElement>("page-label").textContent = paginationLabel(state.page);
  for (const tr of Array.from(document.querySelectorAll("tr.decision-row"))) {
    tr.addEventListener("click", () => {
      const index = Number((tr as HTMLTableRowElement).dataset.index);
      selectDecision(state, index);
    });
  }
}

function renderEditor(state: ConsoleState): void {
  const editor = el<HTMLElement>("editor");
  if (!state.selected) {
    editor.classList.add("hidden");
    return;
  }
  editor.classList.remove("hidden");
  const override = state.overrides.get(state.selected.canonical_url) ?? null;
  el<HTMLDivElement>("detail").innerHTML = detailHtml(state.selected, override);
  el<HTMLButtonElement>("btn-clear-override").disabled = override === null;
  renderPicker(state);
}

function selectDecision(state: ConsoleState, index: number): void {
  if (!state.page || index < 0 || index >= state.page.items.length) return;
  state.selected = state.page.items[index];
  state.pickerResults = [];
  state.chosen = [];
  el<HTMLInputElement>("picker-search").value = "";
  el<HTMLUListElement>("picker-results").innerHTML = "";
  hideBanner("editor-error");
  renderEditor(state);
}

function renderPicker(state: ConsoleState): void {
  el<HTMLUListElement>("picker-results").innerHTML = state.pickerResults
    .map((entity, index) => pickerResultHtml(entity, index))
    .join("");
  el<HTMLDivElement>("picker-chosen").innerHTML = chosenEntitiesHtml(state.chosen);
  el<HTMLButtonElement>("btn-save-force").disabled = state.chosen.length === 0;

  for (const li of Array.from(document.querySelectorAll("li.picker-result"))) {
    li.addEventListener("click", () => {
      const index = Number((li as HTMLLIElement).dataset.index);
      const entity = state.pickerResults[index];
      if (entity && !state.chosen.includes(entity.id)) {
        state.chosen.push(entity.id);
        renderPicker(state);
      }
    });
  }
  for (const btn of Array.from(document.querySelectorAll("button.chip-remove"))) {
    btn.addEventListener("click", () => {
      const index = Number((btn as HTMLButtonElement).dataset.index);
      state.chosen.splice(index, 1);
      renderPicker(state);
    });
  }
}

// Mutations re-fetch the decisions page and the selected row's override;
// the UI never locally fabricates the post-mutation state.
async function afterMutation(state: ConsoleState): Promise<void> {
  const selectedUrl = state.selected?.canonical_url ?? null;
  await loadDecisions(state);
  if (selectedUrl && state.page) {
    state.selected = state.page.items.find((r) => r.canonical_url === selectedUrl) ?? null;
  }
  renderEditor(state);
}

function wireEditor(state: ConsoleState): void {
  el<HTMLButtonElement>("btn-suppress").addEventListener("click", async () => {
    if (!state.selected) return;
    hideBanner("editor-error");
    try {
      await state.api.putOverride(state.selected.canonical_url, "suppress", []);
      await afterMutation(state);
    } catch (error) {
      showBanner("editor-error", (error as ApiError).message);
    }
  });

  el<HTMLButtonElement>("btn-clear-override").addEventListener("click", async () => {
    if (!state.selected) return;
    hideBanner("editor-error");
    try {
      await state.api.deleteOverride(state.selected.canonical_url);
      await afterMutation(state);
    } catch (error) {
      showBanner("editor-error", (error as ApiError).message);
    }
  });

  el<HTMLButtonElement>("btn-save-force").addEventListener("click", async () => {
    if (!state.selected || state.chosen.length === 0) return;
    hideBanner("editor-error");
    try {
      await state.api.putOverride(state.selected.canonical_url, "force_entities", state.chosen);
      await afterMutation(state);
    } catch (error) {
      showBanner("editor-error", (error as ApiError).message);
    }
  });

  let searchTimer: ReturnType<typeof setTimeout> | undefined;
  el<HTMLInputElement>("picker-search").addEventListener("input", (event) => {
    const q = (event.target as HTMLInputElement).value;
    clearTimeout(searchTimer);
    searchTimer = setTimeout(async () => {
      try {
        const found = await state.api.searchEntities(q);
        state.pickerResults = found.items;
        renderPicker(state);
      } catch (error) {
        showBanner("editor-error", (error as Error).message);
      }
    }, 150);
  });
}

function readFilters(): DecisionFilters {
  const filters: DecisionFilters = { page: 1, page_size: 20 };
  const publisher = el<HTMLInputElement>("filter-publisher").value.trim();
  if (publisher) filters.publisher = publisher;
  const show = el<HTMLSelectElement>("filter-show").value;
  if (show) filters.show = show === "true";
  const source = el<HTMLSelectElement>("filter-source").value;
  if (source) filters.source = source;
  const since = el<HTMLInputElement>("filter-since").value;
  if (since) filters.since = Date.parse(since) / 1000;
  return filters;
}

function wireFilters(state: ConsoleState): void {
  const requery = async () => {
    // Filter changes re-query the server; partial pages are never filtered
    // client side.
    state.filters = { ...readFilters(), page_size: state.filters.page_size };
    state.selected = null;
    renderEditor(state);
    await loadDecisions(state);
  };
  el<HTMLInputElement>("filter-publisher").addEventListener("change", requery);
  el<HTMLSelectElement>("filter-show").addEventListener("change", requery);
  el<HTMLSelectElement>("filter-source").addEventListener("change", requery);
  el<HTMLInputElement>("filter-since").addEventListener("change", requery);
  el<HTMLButtonElement>("refresh").addEventListener("click", requery);

  el<HTMLButtonElement>("page-prev").addEventListener("click", async () => {
    if ((state.filters.page ?? 1) > 1) {
      state.filters.page = (state.filters.page ?? 1) - 1;
      await loadDecisions(state);
    }
  });
  el<HTMLButtonElement>("page-next").addEventListener("click", async () => {
    if (!state.page) return;
    const pages = Math.max(1, Math.ceil(state.page.total / state.page.page_size));
    if ((state.filters.page ?? 1) < pages) {
      state.filters.page = (state.filters.page ?? 1) + 1;
      await loadDecisions(state);
    }
  });
}

function wireSettings(state: ConsoleState): void {
  el<HTMLInputElement>("setting-base-url").value = state.settings.baseUrl;
  el<HTMLInputElement>("setting-token").value = state.settings.adminToken ?? "";
  el<HTMLInputElement>("setting-author").value = state.settings.author ?? "";
  el<HTMLButtonElement>("settings-apply").addEventListener("click", async () => {
    state.settings = {
      baseUrl: el<HTMLInputElement>("setting-base-url").value.trim(),
      adminToken: el<HTMLInputElement>("setting-token").value,
      author: el<HTMLInputElement>("setting-author").value.trim(),
    };
    saveSettings(state.settings);
    state.api = new AdviceApi(state.settings);
    await loadDecisions(state);
  });
}

export async function bootstrap(overrideSettings?: Partial<ApiSettings>): Promise<ConsoleState> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app root element");
  root.innerHTML = LAYOUT;

  const settings = { ...loadSettings(), ...overrideSettings };
  const state: ConsoleState = {
    api: new AdviceApi(settings),
    settings,
    filters: { page: 1, page_size: 20 },
    page: null,
    overrides: new Map(),
    selected: null,
    pickerResults: [],
    chosen: [],
  };

  wireSettings(state);
  wireFilters(state);
  wireEditor(state);
  await loadDecisions(state);
  return state;
}

declare global {
  interface Window {
    causematchConsole?: Promise<ConsoleState>;
  }
}

// Module scripts run after the DOM is parsed; in tests the root is created
// later and bootstrap() is called explicitly.
if (typeof document !== "undefined" && document.getElementById("app")) {
  window.causematchConsole = bootstrap();
}
