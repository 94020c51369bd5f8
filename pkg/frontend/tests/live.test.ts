// @vitest-environment jsdom
//
// Full-stack integration: the real TypeScript client against the real
// Python gateway (`lyfe serve`), no mocks anywhere. Skipped automatically
// when the lyfe CLI is not installed in the environment.

import { ChildProcess, execSync, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/transport.js";
import { ViewModel } from "../src/viewmodel.js";

function cliAvailable(): boolean {
  try {
    execSync("lyfe --help", { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}

const available = cliAvailable();
const BASE = "http://127.0.0.1:8796";

describe.skipIf(!available)("live gateway integration", () => {
  let server: ChildProcess;

  beforeAll(async () => {
    server = spawn(
      "lyfe",
      [
        "serve", "murder_mystery_3", "--rules", "murder_3",
        "--bind", "127.0.0.1:8796", "--tick-rate", "8",
      ],
      { stdio: "ignore" },
    );
    const deadline = Date.now() + 20_000;
    for (;;) {
      try {
        const response = await fetch(`${BASE}/world`);
        if (response.ok) return;
      } catch {
        // not up yet
      }
      if (Date.now() > deadline) throw new Error("gateway never came up");
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }, 30_000);

  afterAll(() => {
    server?.kill();
  });

  it("streams world ticks and vicinity chat into the view model", async () => {
    const client = new GatewayClient({ baseUrl: BASE, player: "ui_live" });
    const vm = new ViewModel("ui_live");
    vm.applySnapshot(await client.world());
    expect(vm.state.agents.map((a) => a.id)).toContain("Lizhi Chen");

    // join next to Lizhi so the proxy is inside the conversation radius
    const streamUrl = `${BASE}/stream?player=ui_live&x=8&y=2`;
    const streaming = (async () => {
      const response = await fetch(streamUrl);
      const reader = response.body!.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      const deadline = Date.now() + 15_000;
      while (Date.now() < deadline) {
        const { value, done } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        const lines = buffer.split("\n");
        buffer = lines.pop() ?? "";
        for (const line of lines) {
          const parsed = line.trim() ? JSON.parse(line) : null;
          if (parsed) vm.apply(parsed);
        }
        if (vm.state.transcript.length >= 2 && vm.state.tick > 4) {
          await reader.cancel();
          break;
        }
      }
    })();
    await streaming;

    expect(vm.state.connection).toBe("connected");
    expect(vm.state.tick).toBeGreaterThan(0);
    // the relay fixture talks constantly; the nearby proxy hears it
    expect(vm.state.transcript.length).toBeGreaterThan(0);
    const ticks = vm.state.transcript.map((entry) => entry.tick);
    expect([...ticks].sort((a, b) => a - b)).toEqual(ticks);

    const inspection = await client.inspect("Lizhi Chen");
    expect(inspection.kind).toBe("agent");
    expect(inspection.goal.length).toBeGreaterThan(0);

    const reply = await client.interview(
      "Lizhi Chen",
      "Who do you believe is the primary suspect in Ahmed Khan's murder?",
    );
    expect(reply.kind).toBe("interview");
    if (reply.kind === "interview") {
      expect(reply.answers.length).toBe(3);
    }
  }, 40_000);
});
