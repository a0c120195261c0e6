import { readFileSync } from "node:fs";
import { readdir, readFile } from "node:fs/promises";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { runAnnotateFlow, type AnnotateScript } from "../src/flow.js";
import { replayTrace } from "../src/freehand.js";
import type { Point } from "../src/geometry.js";
import type { Polarity } from "../src/toolstate.js";
import { startService, type LiveService } from "./helpers/service.js";

interface ScriptFixture {
  source: string;
  labels: { name: string; color: [number, number, number] }[];
  freehand: { label: string; trace: Point[]; min_dist: number };
  threshold: { label: string; value: number; polarity: Polarity };
  instances: boolean;
  expected_vertices: Point[];
}

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/annotate_script.json", import.meta.url), "utf-8"),
) as ScriptFixture;

const script: AnnotateScript = {
  labels: fixture.labels,
  freehand: {
    label: fixture.freehand.label,
    trace: fixture.freehand.trace,
    minDist: fixture.freehand.min_dist,
  },
  threshold: fixture.threshold,
  instances: fixture.instances,
};

async function post(base: string, path: string, body: unknown): Promise<unknown> {
  const response = await fetch(base + path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    throw new Error(`${path} failed: ${response.status} ${await response.text()}`);
  }
  return response.json();
}

/** The same annotation session written as bare HTTP requests, with the
 * freehand stroke replaced by its already-thinned vertex list. */
async function scriptedSession(base: string): Promise<string> {
  for (const { name, color } of fixture.labels) {
    await post(base, "/api/labels", { name, color });
    await fetch(`${base}/api/state`);
  }
  await post(base, "/api/capture", {});
  await post(base, "/api/layers", {
    label: fixture.freehand.label,
    polygon: fixture.expected_vertices,
  });
  await fetch(`${base}/api/state`);
  await post(base, "/api/layers", {
    label: fixture.threshold.label,
    threshold: fixture.threshold.value,
    polarity: fixture.threshold.polarity,
  });
  await fetch(`${base}/api/state`);
  const saved = (await post(base, "/api/annotate", {
    instances: fixture.instances,
  })) as { image_name: string };
  return saved.image_name;
}

describe("annotate flow parity with a scripted session", () => {
  let uiService: LiveService;
  let scriptedService: LiveService;

  beforeAll(async () => {
    uiService = await startService(fixture.source);
    scriptedService = await startService(fixture.source);
  });

  afterAll(async () => {
    await uiService.stop();
    await scriptedService.stop();
  });

  it("thins the raw trace to the recorded vertex list", () => {
    const thinned = replayTrace(fixture.freehand.trace, fixture.freehand.min_dist);
    expect(thinned).toEqual(fixture.expected_vertices);
  });

  it("produces a byte-identical dataset pair", async () => {
    const flow = await runAnnotateFlow(new ApiClient(uiService.url), script);
    const scriptedName = await scriptedSession(scriptedService.url);

    expect(flow.imageName).toBe("000000");
    expect(scriptedName).toBe("000000");
    expect(flow.state.dataset_count).toBe(1);
    expect(flow.state.mode).toBe("frozen");
    expect(flow.layerIds).toEqual([1, 2]);

    for (const relative of ["images/000000.png", "masks/000000.png", "config.json"]) {
      const fromFlow = await readFile(join(uiService.dataset, relative));
      const fromScript = await readFile(join(scriptedService.dataset, relative));
      expect(fromFlow.equals(fromScript), `${relative} differs`).toBe(true);
    }

    const flowInstances = (await readdir(join(uiService.dataset, "instances/000000"))).sort();
    const scriptInstances = (
      await readdir(join(scriptedService.dataset, "instances/000000"))
    ).sort();
    expect(flowInstances).toEqual(scriptInstances);
    expect(flowInstances.length).toBe(2);
    for (const name of flowInstances) {
      const fromFlow = await readFile(join(uiService.dataset, "instances/000000", name));
      const fromScript = await readFile(
        join(scriptedService.dataset, "instances/000000", name),
      );
      expect(fromFlow.equals(fromScript), `instances/000000/${name} differs`).toBe(true);
    }
  });
});
