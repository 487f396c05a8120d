/**
 * End-to-end against the real service: spawns the Python server and drives
 * the documented JSON interface through the app's own ApiClient. Skips
 * gracefully when the backend is not installed.
 */
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient } from "../src/api.js";

// Stream whose draws give three clean increases at every junction under a
// fly-fly-fly-stop script; mirrors the backend acceptance suite.
const SCRIPT_SEED = 342446;

const QUIZ = { crash_percent: 2, drone_value: 400, max_rounds: 8, taler_per_euro: 120 };

const OUTCOME_KEYS = new Set([
  "sigma",
  "sigma_after",
  "increased",
  "crashed",
  "intact",
  "info",
  "banked_info",
  "total_value",
  "information_value",
  "junction_infos",
  "payoff_eur",
  "drone_intact",
  "drone_sale",
  "last_outcome",
  "mission",
]);

function collectKeys(payload: unknown, found: Set<string> = new Set()): Set<string> {
  if (Array.isArray(payload)) {
    for (const item of payload) collectKeys(item, found);
  } else if (payload !== null && typeof payload === "object") {
    for (const [key, value] of Object.entries(payload)) {
      found.add(key);
      collectKeys(value, found);
    }
  }
  return found;
}

function backendAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import dronelab"], { timeout: 20_000 });
  return probe.status === 0;
}

const HAVE_BACKEND = backendAvailable();

describe.skipIf(!HAVE_BACKEND)("live service end to end", () => {
  let child: ChildProcess;
  let base = "";
  let dataDir = "";
  let api: ApiClient;

  beforeAll(async () => {
    dataDir = mkdtempSync(join(tmpdir(), "dronelab-e2e-"));
    child = spawn(
      "python3",
      ["-u", "-m", "dronelab.cli", "serve", "--port", "0", "--data-dir", dataDir, "--seed", "1"],
      { stdio: ["ignore", "pipe", "pipe"] },
    );
    base = await new Promise<string>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("server did not start")), 20_000);
      child.stdout?.on("data", (chunk: Buffer) => {
        const match = /listening on (http:\/\/[0-9.]+:\d+)\//.exec(chunk.toString());
        if (match) {
          clearTimeout(timer);
          resolve(match[1]!);
        }
      });
      child.on("exit", (code) => reject(new Error(`server exited early (${code})`)));
    });
    api = new ApiClient(base);
  });

  afterAll(() => {
    child?.kill();
    if (dataDir) rmSync(dataDir, { recursive: true, force: true });
  });

  it("scripted closed-loop session ends with 1100 Taler and 9.17 euro", async () => {
    const created = await api.createSession("UIACCEPT", "closed", SCRIPT_SEED);
    expect(created.phase).toBe("instructions");
    const sid = created.session_id;

    const instructions = await api.instructions(sid);
    expect(instructions.quiz).toHaveLength(4);
    await api.ackInstructions(sid);

    const failed = await api.submitQuiz(sid, { ...QUIZ, crash_percent: 10 });
    expect(failed.passed).toBe(false);
    expect(failed.wrong).toEqual(["crash_percent"]);
    const passed = await api.submitQuiz(sid, QUIZ);
    expect(passed.passed).toBe(true);

    for (let junction = 1; junction <= 10; junction += 1) {
      for (let round = 0; round < 3; round += 1) {
        const view = await api.decide(sid, true);
        expect(view.intact).toBe(true);
        expect(view.last_outcome?.increased).toBe(true);
      }
      const state = await api.state(sid);
      expect(state.mission?.sigma).toBe(70);
      await api.decide(sid, false);
    }

    expect((await api.state(sid)).phase).toBe("mpl");
    await api.submitMpl(sid, [...new Array(16).fill(true), ...new Array(4).fill(false)]);
    await api.submitQuestionnaire(sid, { age: 25, gender: "d", difficulty: 3, strategy: "to 70" });
    const result = await api.finalize(sid);
    expect(result.total_value).toBe(1100);
    expect(result.information_value).toBe(700);
    expect(result.drone_sale).toBe(400);
    expect(result.payoff_eur).toBe(9.17);
    expect(result.junction_infos).toEqual(new Array(10).fill(70));
  });

  it("open-loop session reveals no outcome field before finalize", async () => {
    const audited: unknown[] = [];
    const created = await api.createSession("UIAUDIT1", "open");
    audited.push(created);
    const sid = created.session_id;
    audited.push(await api.state(sid));
    await api.ackInstructions(sid);
    audited.push(await api.submitQuiz(sid, QUIZ));
    audited.push(await api.state(sid));
    audited.push(await api.submitPlan(sid, new Array(10).fill(5)));
    audited.push(await api.state(sid));
    audited.push(await api.submitMpl(sid, new Array(20).fill(false)));
    audited.push(await api.submitQuestionnaire(sid, { age: 30 }));

    for (const payload of audited) {
      const leaked = [...collectKeys(payload)].filter((key) => OUTCOME_KEYS.has(key));
      expect(leaked).toEqual([]);
    }

    const result = await api.finalize(sid);
    expect(typeof result.total_value).toBe("number");
    expect(typeof result.drone_intact).toBe("boolean");
    expect(result.payoff_eur).toBeGreaterThanOrEqual(0);
  });

  it("out-of-phase requests surface as typed errors and change nothing", async () => {
    const created = await api.createSession("UIPHASE1", "closed");
    const sid = created.session_id;
    const failure = await api.decide(sid, true).catch((e: unknown) => e);
    expect((failure as { code: string }).code).toBe("out_of_phase");
    expect((await api.state(sid)).phase).toBe("instructions");
  });
});
