// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { AgentMarker, WorldSnapshot } from "../src/proto.js";
import { ConsoleView } from "../src/render.js";
import { ViewModel } from "../src/viewmodel.js";

function marker(id: string, x: number, y: number, option = "", human = false): AgentMarker {
  return { id, x, y, human, option, destination: "" };
}

function snapshotWith(agents: AgentMarker[]): WorldSnapshot {
  return {
    kind: "world",
    proto: "v1",
    tick: 10,
    agents,
    locations: [
      { name: "hotel", x: 20, y: 80 },
      { name: "library", x: 80, y: 80 },
    ],
  };
}

describe("ConsoleView map", () => {
  let root: HTMLElement;
  let vm: ViewModel;

  beforeEach(() => {
    document.body.innerHTML = '<div id="root"></div>';
    root = document.getElementById("root")!;
    vm = new ViewModel("player");
  });

  it("draws one marker per agent plus the player, with landmarks", () => {
    new ConsoleView(root, vm);
    const nine = Array.from({ length: 9 }, (_, i) => marker(`agent${i}`, i * 5, 10));
    vm.applySnapshot(snapshotWith([...nine, marker("player", 50, 50, "", true)]));
    expect(root.querySelectorAll("[data-agent]")).toHaveLength(10);
    expect(root.querySelectorAll(".landmark")).toHaveLength(2);
    expect(root.querySelectorAll(".marker.player")).toHaveLength(1);
  });

  it("labels markers with name and current option", () => {
    new ConsoleView(root, vm);
    vm.applySnapshot(snapshotWith([marker("Keeper", 0, 0, "MOVE")]));
    const label = root.querySelector('[data-agent="Keeper"] text')!;
    expect(label.textContent).toContain("Keeper");
    expect(label.textContent).toContain("[MOVE]");
  });

  it("shows a speech badge on talking agents", () => {
    new ConsoleView(root, vm);
    vm.applySnapshot(
      snapshotWith([marker("Keeper", 0, 0, "TALK"), marker("Walker", 10, 10, "MOVE")]),
    );
    expect(root.querySelector('[data-agent="Keeper"] .speech-badge')).not.toBeNull();
    expect(root.querySelector('[data-agent="Walker"] .speech-badge')).toBeNull();
  });

  it("shows the desync badge on a tick gap until a snapshot arrives", () => {
    new ConsoleView(root, vm);
    const badge = root.querySelector('[data-role="desync"]') as HTMLElement;
    vm.apply({ kind: "tick", proto: "v1", tick: 1, agents: [] });
    expect(badge.hidden).toBe(true);
    vm.apply({ kind: "tick", proto: "v1", tick: 9, agents: [] });
    expect(badge.hidden).toBe(false);
    vm.applySnapshot(snapshotWith([]));
    expect(badge.hidden).toBe(true);
  });

  it("interpolates marker motion toward the new position", () => {
    const view = new ConsoleView(root, vm, 500);
    vm.applySnapshot(snapshotWith([marker("Walker", 0, 0)]));
    view.render(1_000);
    vm.apply({
      kind: "tick", proto: "v1", tick: 11,
      agents: [marker("Walker", 10, 0)],
    });
    view.render(1_000); // animation starts at the old position
    const circleAtStart = root.querySelector('[data-agent="Walker"] circle')!;
    const startX = Number(circleAtStart.getAttribute("cx"));
    view.render(1_250); // halfway through the 500ms tick
    const circleMid = root.querySelector('[data-agent="Walker"] circle')!;
    const midX = Number(circleMid.getAttribute("cx"));
    view.render(1_600); // done
    const circleEnd = root.querySelector('[data-agent="Walker"] circle')!;
    const endX = Number(circleEnd.getAttribute("cx"));
    expect(midX).toBeGreaterThan(startX);
    expect(endX).toBeGreaterThan(midX);
  });
});

describe("ConsoleView transcript and panels", () => {
  let root: HTMLElement;
  let vm: ViewModel;

  beforeEach(() => {
    document.body.innerHTML = '<div id="root"></div>';
    root = document.getElementById("root")!;
    vm = new ViewModel("player");
    new ConsoleView(root, vm);
  });

  it("renders transcript lines in tick order with speakers", () => {
    vm.apply({
      kind: "chat", proto: "v1", tick: 4, speaker: "Keeper",
      text: "welcome to the square", observation_kind: "utterance",
    });
    vm.apply({
      kind: "chat", proto: "v1", tick: 2, speaker: "Ava",
      text: "good evening", observation_kind: "utterance",
    });
    const lines = [...root.querySelectorAll(".transcript .line")];
    expect(lines.map((line) => line.getAttribute("data-tick"))).toEqual(["2", "4"]);
    expect(lines[1]!.textContent).toContain("Keeper");
    expect(lines[1]!.textContent).toContain("welcome to the square");
  });

  it("escapes markup in chat text", () => {
    vm.apply({
      kind: "chat", proto: "v1", tick: 1, speaker: "Keeper",
      text: "<script>alert(1)</script>", observation_kind: "utterance",
    });
    expect(root.querySelector(".transcript script")).toBeNull();
    expect(root.querySelector(".transcript .text")!.textContent).toContain("<script>");
  });

  it("renders the inspector from a server inspection", () => {
    vm.setInspection({
      kind: "agent", proto: "v1", id: "Keeper", tick: 9,
      goal: "welcome visitors", subgoal: "greet", summary: "people are about",
      option: "TALK",
      last_events: ["visitor said: hello", "nearby: visitor"],
    });
    const inspector = root.querySelector('[data-role="inspector"]')!;
    expect(inspector.textContent).toContain("Keeper");
    expect(inspector.textContent).toContain("welcome visitors");
    expect(inspector.textContent).toContain("people are about");
    expect(inspector.querySelectorAll(".events li")).toHaveLength(2);
  });

  it("renders interview question and answers with repeat indices", () => {
    vm.addInterview({
      agent: "Keeper",
      question: "who are you?",
      answers: [
        { repeat: 0, answer: "the keeper" },
        { repeat: 1, answer: "the keeper" },
      ],
    });
    const panel = root.querySelector('[data-role="interviews"]')!;
    expect(panel.querySelectorAll(".a")).toHaveLength(2);
    expect(panel.querySelector('.a[data-repeat="1"]')!.textContent).toContain("the keeper");
  });
});
