// Round trip against the real advice service: seed three decisions through
// the CLI, drive the console UI, and verify overrides change what the
// service returns on the next advise call.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { bootstrap } from "../src/app.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const repoRoot = path.resolve(here, "../..");
const fixtures = path.join(repoRoot, "tests", "fixtures");

const PORT = 8246;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | undefined;
let workDir: string;

const SEED_URLS = [
  "https://qa-desk.example/news/shooting-response",
  "https://qa-desk.example/news/food-drive",
  "https://qa-desk.example/news/after-school",
];

function articleHtml(title: string, body: string): string {
  const paragraphs = body
    .split(". ")
    .map((s) => `<p>${s}.</p>`)
    .join("");
  return `<html><head><title>${title}</title></head><body><h1>${title}</h1><div>${paragraphs}</div></body></html>`;
}

const SEED_BODIES = [
  articleHtml(
    "Neighbors rally after shooting",
    "A shooting near the park renewed calls for firearm buyback programs and background checks. " +
      "Organizers with the Chicago Peace Collective led a march through the neighborhood. " +
      "City officials promised new funding for violence prevention outreach workers this year",
  ),
  articleHtml(
    "Food drive expands",
    "Volunteers sorted donations as the pantry prepared for winter demand across the city. " +
      "The Lakeside Food Bank said requests for groceries rose sharply again this month. " +
      "Coordinators asked residents to give canned goods and fresh produce at local schools",
  ),
  articleHtml(
    "Tutoring program grows",
    "The after school program added classrooms as enrollment doubled in the fall term. " +
      "BrightPath Tutoring paired students with mentors for reading and mathematics practice. " +
      "Teachers reported stronger attendance and better grades among participating students",
  ),
];

function python(args: string[]): string {
  return execFileSync("python3", ["-m", "causematch", ...args], {
    cwd: repoRoot,
    encoding: "utf-8",
  });
}

async function waitForHealth(timeoutMs = 45_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/v1/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("advice service did not come up");
}

async function waitFor(check: () => boolean, timeoutMs = 10_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("condition not met in time");
}

async function advise(url: string, html: string): Promise<any> {
  const response = await fetch(`${BASE}/v1/advice`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ url, html, publisher: "qa-desk" }),
  });
  expect(response.ok).toBe(true);
  return response.json();
}

beforeAll(async () => {
  workDir = mkdtempSync(path.join(tmpdir(), "causematch-e2e-"));

  python([
    "train",
    "--corpus", path.join(fixtures, "mini_corpus.tsv"),
    "--taxonomy", path.join(fixtures, "mini_taxonomy.txt"),
    "--out", path.join(workDir, "model.bin"),
    "--eval-on-train",
  ]);

  const config = [
    "dedup: {radius: 3, ttl: 604800}",
    `classifier: {confidence_threshold: 0.5, model_path: ${path.join(workDir, "model.bin")}}`,
    `marketplace: {entities_path: ${path.join(fixtures, "entities.json")}}`,
    `gazetteer_path: ${path.join(fixtures, "gazetteer.tsv")}`,
    `decision_log_path: ${path.join(workDir, "decisions.jsonl")}`,
    "publishers:",
    "  qa-desk: {geo_mode: area_of_effect}",
  ].join("\n");
  const configPath = path.join(workDir, "config.yaml");
  writeFileSync(configPath, config, "utf-8");

  // Seed three decisions through the CLI; the shared decision log makes
  // them visible to the service process.
  SEED_URLS.forEach((url, i) => {
    const file = path.join(workDir, `seed-${i}.html`);
    writeFileSync(file, SEED_BODIES[i], "utf-8");
    python([
      "advise",
      "--file", file,
      "--fetch-url", url,
      "--publisher", "qa-desk",
      "--config", configPath,
    ]);
  });

  server = spawn("python3", ["-m", "causematch", "serve", "--config", configPath, "--listen", `127.0.0.1:${PORT}`], {
    cwd: repoRoot,
    stdio: "ignore",
  });
  await waitForHealth();
});

afterAll(() => {
  server?.kill();
});

describe("console round trip", () => {
  it("shows the three CLI-seeded decisions, newest first, and drives overrides", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const state = await bootstrap({ baseUrl: BASE, adminToken: "", author: "qa-tester" });

    const rows = Array.from(document.querySelectorAll("tr.decision-row"));
    expect(rows.length).toBe(3);
    const urls = rows.map((tr) => tr.querySelector(".col-url")?.textContent);
    expect(urls).toEqual([...SEED_URLS].reverse());

    // Select the gun-violence story (last row: it was seeded first).
    (rows[2] as HTMLElement).click();
    await waitFor(() => state.selected !== null);
    expect(state.selected?.canonical_url).toBe(SEED_URLS[0]);
    expect(document.getElementById("detail")?.innerHTML).toContain("Provenance");

    // Zero picked entities: the force-save action stays disabled.
    const saveButton = document.getElementById("btn-save-force") as HTMLButtonElement;
    expect(saveButton.disabled).toBe(true);

    // Suppress via the UI, then verify the service itself now suppresses.
    (document.getElementById("btn-suppress") as HTMLButtonElement).click();
    await waitFor(() => {
      const marker = Array.from(document.querySelectorAll("tr.decision-row .col-override")).map(
        (td) => td.textContent,
      );
      return marker.includes("suppressed");
    });

    const suppressed = await advise(SEED_URLS[0], SEED_BODIES[0]);
    expect(suppressed.show).toBe(false);
    expect(suppressed.provenance).toEqual(["override"]);

    // Clear the override via the UI; the next advise recomputes the pipeline.
    await waitFor(() => !(document.getElementById("btn-clear-override") as HTMLButtonElement).disabled);
    (document.getElementById("btn-clear-override") as HTMLButtonElement).click();
    await waitFor(() => {
      const markers = Array.from(document.querySelectorAll("tr.decision-row .col-override")).map(
        (td) => td.textContent,
      );
      return !markers.includes("suppressed");
    });

    const recomputed = await advise(SEED_URLS[0], SEED_BODIES[0]);
    expect(recomputed.provenance).not.toEqual(["override"]);
    expect(recomputed.provenance[0]).toBe("extract");
  });

  it("entity picker searches the service and enables save only with picks", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const state = await bootstrap({ baseUrl: BASE, adminToken: "", author: "qa-tester" });

    const rows = Array.from(document.querySelectorAll("tr.decision-row"));
    expect(rows.length).toBeGreaterThan(0);
    (rows[0] as HTMLElement).click();
    await waitFor(() => state.selected !== null);

    const search = document.getElementById("picker-search") as HTMLInputElement;
    search.value = "spark";
    search.dispatchEvent(new Event("input", { bubbles: true }));
    await waitFor(() => document.querySelectorAll("li.picker-result").length > 0);

    const first = document.querySelector("li.picker-result") as HTMLElement;
    expect(first.textContent).toContain("spark-ventures");
    first.click();
    await waitFor(() => !(document.getElementById("btn-save-force") as HTMLButtonElement).disabled);

    (document.getElementById("btn-save-force") as HTMLButtonElement).click();
    await waitFor(() => {
      const markers = Array.from(document.querySelectorAll("tr.decision-row .col-override")).map(
        (td) => td.textContent,
      );
      return markers.includes("forced");
    });

    const forcedUrl = state.selected!.canonical_url;
    const forced = await advise(forcedUrl, SEED_BODIES[SEED_URLS.indexOf(forcedUrl)] ?? SEED_BODIES[0]);
    expect(forced.show).toBe(true);
    expect(forced.entities.map((e: any) => e.entity_id)).toEqual(["spark-ventures"]);
    expect(forced.provenance).toEqual(["override"]);

    // tidy up so reruns start clean
    await fetch(`${BASE}/v1/overrides/${encodeURI(forcedUrl)}`, { method: "DELETE" });
  });

  it("shows an error banner and no stale rows when the service is unreachable", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    await bootstrap({ baseUrl: "http://127.0.0.1:59999", adminToken: "", author: "qa" });
    const banner = document.getElementById("error-banner");
    expect(banner?.classList.contains("hidden")).toBe(false);
    expect(banner?.textContent).toContain("Could not load decisions");
    expect(document.querySelectorAll("tr.decision-row").length).toBe(0);
  });
});
