// Console wiring: connect the gateway client, the view model, and the DOM.

import { GatewayClient } from "./transport.js";
import { ConsoleView } from "./render.js";
import { ViewModel } from "./viewmodel.js";

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

export function startConsole(root: HTMLElement): { vm: ViewModel; client: GatewayClient } {
  const baseUrl = param("gateway", "http://127.0.0.1:8787");
  const player = param("player", "player");
  const token = param("token", "");

  const client = new GatewayClient({ baseUrl, player, token: token || undefined });
  const vm = new ViewModel(player);
  const view = new ConsoleView(root, vm);

  const controls = document.createElement("div");
  controls.className = "controls";
  controls.innerHTML = `
    <form data-role="chat-form">
      <input name="text" placeholder="say something nearby" autocomplete="off">
      <button type="submit">say</button>
    </form>
    <form data-role="move-form">
      <input name="x" placeholder="x" size="4"><input name="y" placeholder="y" size="4">
      <button type="submit">move</button>
    </form>
    <form data-role="interview-form">
      <input name="agent" placeholder="agent">
      <input name="question" placeholder="interview question">
      <button type="submit">interview</button>
    </form>`;
  root.appendChild(controls);

  const chatForm = controls.querySelector('[data-role="chat-form"]') as HTMLFormElement;
  chatForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    const input = chatForm.elements.namedItem("text") as HTMLInputElement;
    const text = input.value.trim();
    if (!text) return;
    const gated = vm.gateSay(Date.now());
    if (gated) {
      vm.setNotice(gated);
      return;
    }
    const reply = await client.say(text);
    vm.setNotice(reply.kind === "error" ? `say rejected: ${reply.error}` : "");
    if (reply.kind === "ack") input.value = "";
  });

  const moveForm = controls.querySelector('[data-role="move-form"]') as HTMLFormElement;
  moveForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    const x = Number((moveForm.elements.namedItem("x") as HTMLInputElement).value);
    const y = Number((moveForm.elements.namedItem("y") as HTMLInputElement).value);
    if (Number.isFinite(x) && Number.isFinite(y)) {
      const reply = await client.move(x, y);
      vm.setNotice(reply.kind === "error" ? `move rejected: ${reply.error}` : "");
    }
  });

  const interviewForm = controls.querySelector('[data-role="interview-form"]') as HTMLFormElement;
  interviewForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    const agent = (interviewForm.elements.namedItem("agent") as HTMLInputElement).value.trim();
    const question = (interviewForm.elements.namedItem("question") as HTMLInputElement).value.trim();
    if (!agent || !question) return;
    const reply = await client.interview(agent, question);
    if (reply.kind === "interview") {
      vm.addInterview({ agent: reply.agent, question: reply.question, answers: reply.answers });
    } else if (reply.kind === "error") {
      vm.setNotice(`interview failed: ${reply.error}`);
    }
  });

  // click a marker to inspect the agent
  root.addEventListener("click", async (event) => {
    const target = (event.target as Element | null)?.closest?.("[data-agent]");
    const agentId = target?.getAttribute("data-agent");
    if (!agentId || agentId === player) return;
    const inspection = await client.inspect(agentId);
    if (inspection.kind === "agent") {
      vm.setInspection(inspection);
    }
  });

  // resync with a full snapshot whenever a gap is detected
  vm.onChange(() => {
    if (vm.state.desynced) {
      void client.world().then((snapshot) => vm.applySnapshot(snapshot));
    }
  });

  void client.world().then((snapshot) => vm.applySnapshot(snapshot));
  void client.stream(
    (message) => vm.apply(message),
    () => vm.streamClosed(),
  );

  // cosmetic marker interpolation between ticks
  const animate = () => {
    view.render(Date.now());
    window.requestAnimationFrame(animate);
  };
  window.requestAnimationFrame(animate);

  window.addEventListener("beforeunload", () => client.closeStream());
  return { vm, client };
}

if (typeof document !== "undefined" && document.getElementById("console-root")) {
  startConsole(document.getElementById("console-root") as HTMLElement);
}
