/** Spawn the real annotation service for contract tests.
 *
 * Tests talk to it over loopback TCP exactly like the browser does;
 * each start gets a fresh temporary dataset directory and an ephemeral
 * port parsed from the first stdout line.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtemp } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface LiveService {
  url: string;
  dataset: string;
  stop(): Promise<void>;
}

function firstLine(proc: ChildProcess): Promise<string> {
  return new Promise((resolve, reject) => {
    let buffer = "";
    const onData = (chunk: Buffer) => {
      buffer += chunk.toString("utf-8");
      const newline = buffer.indexOf("\n");
      if (newline >= 0) {
        proc.stdout?.off("data", onData);
        resolve(buffer.slice(0, newline));
      }
    };
    proc.stdout?.on("data", onData);
    proc.once("error", reject);
    proc.once("exit", (code) => {
      reject(new Error(`service exited early with code ${code}: ${buffer}`));
    });
  });
}

export async function startService(source = "synthetic:7"): Promise<LiveService> {
  const dataset = await mkdtemp(join(tmpdir(), "maskstack-ui-test-"));
  const proc = spawn(
    "maskstack",
    ["serve", "--dataset", dataset, "--source", source, "--port", "0"],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  proc.stderr?.on("data", () => undefined);
  const line = await firstLine(proc);
  const match = line.match(/http:\/\/127\.0\.0\.1:\d+/);
  if (match === null) {
    proc.kill("SIGKILL");
    throw new Error(`no service URL in: ${line}`);
  }
  const url = match[0];
  return {
    url,
    dataset,
    stop() {
      return new Promise<void>((resolve) => {
        proc.once("exit", () => resolve());
        proc.kill("SIGINT");
      });
    },
  };
}
