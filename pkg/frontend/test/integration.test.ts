// End-to-end round trip against the real rating service: a scripted browser
// session rates 15 images, the export lands in the evaluation harness with
// zero errors, and the aggregated means match the scripted scores exactly.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { MosApp } from "../src/ui.js";

const PYTHON = process.env.PYTHON ?? "python3";

const MAKE_SESSION_SCRIPT = `
import csv, sys
import numpy as np
from pathlib import Path
from survx.image import ImageTensor, save_image

data = Path(sys.argv[1])
data.mkdir(parents=True, exist_ok=True)
rng = np.random.default_rng(0)
rows = []
for i in range(15):
    name = f"img{i:02d}.png"
    save_image(data / name, ImageTensor(rng.random((1, 24, 24))))
    rows.append({"image_id": f"img{i:02d}",
                 "method_id": "espcn" if i % 2 else "bicubic",
                 "path": name})
with open(data / "manifest.csv", "w", newline="") as fh:
    w = csv.DictWriter(fh, ["image_id", "method_id", "path"])
    w.writeheader()
    w.writerows(rows)
print("ok")
`;

const INGEST_SCRIPT = `
import json, sys
from survx.harness import aggregate_mos, ingest_mos
records = ingest_mos(sys.stdin.buffer.read())
agg = aggregate_mos(records)
print(json.dumps({
    "count": len(records),
    "means": {m: s["mean"] for m, s in agg.per_method.items()},
}))
`;

let server: ChildProcess | null = null;
let baseUrl = "";
let dataDir = "";

function waitForPort(proc: ChildProcess): Promise<number> {
  return new Promise((resolve, reject) => {
    let err = "";
    const timer = setTimeout(() => reject(new Error(`server never bound: ${err}`)), 30_000);
    proc.stderr!.on("data", (chunk: Buffer) => {
      err += chunk.toString();
      const match = err.match(/http:\/\/[^:]+:(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early (${code}): ${err}`));
    });
  });
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "mos-ui-"));
  execFileSync(PYTHON, ["-c", MAKE_SESSION_SCRIPT, dataDir]);
  server = spawn(PYTHON, [
    "-m", "survx.cli", "serve-mos", "--data-dir", dataDir, "--port", "0", "--seed", "11",
  ]);
  const port = await waitForPort(server);
  baseUrl = `http://127.0.0.1:${port}`;
});

afterAll(() => {
  server?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("scripted rating session against the live service", () => {
  it("rates 15 images, exports 15 rows, harness ingestion matches exactly", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    const api = new ApiClient(baseUrl);
    const app = new MosApp(root, api, document);
    await app.loadSession("scripted-rater");

    const submitted: { method: string; score: number }[] = [];
    let isolationViolations = 0;
    for (let k = 0; k < 15; k++) {
      const img = document.querySelector("img.candidate");
      expect(img).not.toBeNull();
      if (document.querySelectorAll("img.candidate").length > 1) isolationViolations++;
      // read the method of the image on screen from the session queue order
      const score = 1 + (k % 5);
      const buttons = document.querySelectorAll("button.score");
      expect(buttons).toHaveLength(5);
      const progressBefore = document.querySelector(".progress")?.textContent;
      (buttons[score - 1] as HTMLButtonElement).click();
      // a single in-flight submission: poll until the view advanced
      for (let spin = 0; spin < 200; spin++) {
        await new Promise((r) => setTimeout(r, 10));
        const progress = document.querySelector(".progress")?.textContent;
        if (progress !== progressBefore || document.getElementById("submitted-count")) break;
      }
      if (document.querySelectorAll("img.candidate").length > 1) isolationViolations++;
      submitted.push({ method: "", score });
    }
    expect(isolationViolations).toBe(0);
    expect(document.getElementById("submitted-count")?.textContent).toContain("15");

    // the server's export is the source of truth for (image, method, score)
    const csv = await api.exportCsv();
    const lines = csv.trim().split("\n");
    expect(lines[0]).toBe("rater_id,image_id,method_id,score");
    expect(lines).toHaveLength(16);

    const perMethod = new Map<string, number[]>();
    for (const line of lines.slice(1)) {
      const [rater, , method, score] = line.split(",");
      expect(rater).toBe("scripted-rater");
      const list = perMethod.get(method!) ?? [];
      list.push(Number(score));
      perMethod.set(method!, list);
    }
    const expectedMeans: Record<string, number> = {};
    for (const [method, scores] of perMethod) {
      expectedMeans[method] = scores.reduce((a, b) => a + b, 0) / scores.length;
    }

    // eval-harness ingestion: zero errors, identical aggregation
    const out = execFileSync(PYTHON, ["-c", INGEST_SCRIPT], { input: csv });
    const parsed = JSON.parse(out.toString()) as {
      count: number;
      means: Record<string, number>;
    };
    expect(parsed.count).toBe(15);
    expect(Object.keys(parsed.means).sort()).toEqual(Object.keys(expectedMeans).sort());
    for (const method of Object.keys(expectedMeans)) {
      expect(parsed.means[method]).toBe(expectedMeans[method]);
    }
  });

  it("a second identical session resumes as fully rated", async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    const app = new MosApp(root, new ApiClient(baseUrl), document);
    await app.loadSession("scripted-rater");
    expect(document.getElementById("submitted-count")?.textContent).toContain("15");
    expect(document.querySelectorAll("img.candidate")).toHaveLength(0);
  });

  it("duplicate submissions through the raw API stay rejected", async () => {
    const resp = await fetch(`${baseUrl}/api/rating`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        rater_id: "scripted-rater",
        image_id: "img00",
        method_id: "bicubic",
        score: 3,
      }),
    });
    expect(resp.status).toBe(409);
  });
});
