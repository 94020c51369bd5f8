// DOM rendering: SVG town map with one marker per body, the chat
// transcript, the agent inspector, and the interview panel. Marker motion
// between ticks is interpolated client-side; it is purely cosmetic and
// every displayed number comes from server messages.

import { AgentMarker } from "./proto.js";
import { ViewModel } from "./viewmodel.js";

const MAP_SCALE = 6;
const MAP_PAD = 20;

interface MarkerAnim {
  fromX: number;
  fromY: number;
  toX: number;
  toY: number;
  startMs: number;
}

export class ConsoleView {
  private readonly anims = new Map<string, MarkerAnim>();
  private readonly tickMs: number;

  constructor(
    private readonly root: HTMLElement,
    private readonly vm: ViewModel,
    tickMs = 500,
  ) {
    this.tickMs = tickMs;
    root.innerHTML = `
      <div class="console">
        <div class="status">
          <span data-role="connection"></span>
          <span data-role="tick"></span>
          <span data-role="desync" hidden>desync</span>
          <span data-role="notice"></span>
        </div>
        <svg data-role="map" width="640" height="640"></svg>
        <div data-role="transcript" class="transcript"></div>
        <div data-role="inspector" class="inspector"></div>
        <div data-role="interviews" class="interviews"></div>
      </div>`;
    vm.onChange(() => this.render());
  }

  private part(role: string): HTMLElement {
    const el = this.root.querySelector(`[data-role="${role}"]`);
    if (!el) throw new Error(`missing part ${role}`);
    return el as HTMLElement;
  }

  private toPx(x: number, y: number): [number, number] {
    return [MAP_PAD + x * MAP_SCALE, MAP_PAD + y * MAP_SCALE];
  }

  render(nowMs?: number): void {
    const state = this.vm.state;
    this.part("connection").textContent = state.connection;
    this.part("tick").textContent = state.tick >= 0 ? `t=${state.tick}` : "";
    this.part("desync").hidden = !state.desynced;
    this.part("notice").textContent = state.notice;
    this.renderMap(nowMs ?? Date.now());
    this.renderTranscript();
    this.renderInspector();
    this.renderInterviews();
  }

  private markerPosition(marker: AgentMarker, nowMs: number): [number, number] {
    const prev = this.anims.get(marker.id);
    if (!prev || (prev.toX === marker.x && prev.toY === marker.y)) {
      if (!prev) {
        this.anims.set(marker.id, {
          fromX: marker.x, fromY: marker.y, toX: marker.x, toY: marker.y,
          startMs: nowMs,
        });
        return this.toPx(marker.x, marker.y);
      }
      const t = Math.min(1, (nowMs - prev.startMs) / this.tickMs);
      return this.toPx(
        prev.fromX + (prev.toX - prev.fromX) * t,
        prev.fromY + (prev.toY - prev.fromY) * t,
      );
    }
    const t = Math.min(1, (nowMs - prev.startMs) / this.tickMs);
    const fromX = prev.fromX + (prev.toX - prev.fromX) * t;
    const fromY = prev.fromY + (prev.toY - prev.fromY) * t;
    this.anims.set(marker.id, {
      fromX, fromY, toX: marker.x, toY: marker.y, startMs: nowMs,
    });
    return this.toPx(fromX, fromY);
  }

  private renderMap(nowMs: number): void {
    const svg = this.part("map");
    const state = this.vm.state;
    const landmarks = state.locations
      .map((loc) => {
        const [x, y] = this.toPx(loc.x, loc.y);
        return `<g class="landmark"><rect x="${x - 4}" y="${y - 4}" width="8" height="8"></rect>` +
          `<text x="${x + 8}" y="${y + 4}">${escapeHtml(loc.name)}</text></g>`;
      })
      .join("");
    const markers = state.agents
      .map((marker) => {
        const [x, y] = this.markerPosition(marker, nowMs);
        const me = marker.id === state.player;
        const badge =
          marker.option === "TALK"
            ? `<text class="speech-badge" x="${x + 8}" y="${y - 8}">&#128172;</text>`
            : "";
        return (
          `<g class="marker${me ? " player" : ""}${marker.human ? " human" : ""}" data-agent="${escapeHtml(marker.id)}">` +
          `<circle cx="${x}" cy="${y}" r="6"></circle>` +
          `<text x="${x}" y="${y + 18}" text-anchor="middle">` +
          `${escapeHtml(marker.id)}${marker.option ? ` [${escapeHtml(marker.option)}]` : ""}</text>` +
          badge +
          `</g>`
        );
      })
      .join("");
    svg.innerHTML = landmarks + markers;
  }

  private renderTranscript(): void {
    const box = this.part("transcript");
    box.innerHTML = this.vm.state.transcript
      .map(
        (entry) =>
          `<div class="line${entry.own ? " own" : ""}" data-tick="${entry.tick}">` +
          `<span class="tick">t${entry.tick}</span> ` +
          `<span class="speaker">${escapeHtml(entry.speaker)}</span>: ` +
          `<span class="text">${escapeHtml(entry.text)}</span></div>`,
      )
      .join("");
  }

  private renderInspector(): void {
    const box = this.part("inspector");
    const inspection = this.vm.state.inspection;
    if (!inspection) {
      box.innerHTML = "<em>select an agent to inspect</em>";
      return;
    }
    box.innerHTML =
      `<h3>${escapeHtml(inspection.id)}</h3>` +
      `<dl>` +
      `<dt>option</dt><dd>${escapeHtml(inspection.option || "-")}</dd>` +
      `<dt>goal</dt><dd>${escapeHtml(inspection.goal)}</dd>` +
      `<dt>subgoal</dt><dd>${escapeHtml(inspection.subgoal || "-")}</dd>` +
      `<dt>summary</dt><dd>${escapeHtml(inspection.summary || "-")}</dd>` +
      `</dl>` +
      `<ul class="events">` +
      inspection.last_events
        .slice(-10)
        .map((event) => `<li>${escapeHtml(event)}</li>`)
        .join("") +
      `</ul>`;
  }

  private renderInterviews(): void {
    const box = this.part("interviews");
    box.innerHTML = this.vm.state.interviews
      .map(
        (entry) =>
          `<div class="interview"><div class="q">${escapeHtml(entry.agent)} &mdash; ` +
          `${escapeHtml(entry.question)}</div>` +
          entry.answers
            .map(
              (a) =>
                `<div class="a" data-repeat="${a.repeat}">[${a.repeat}] ` +
                `${escapeHtml(a.answer ?? "(no answer)")}</div>`,
            )
            .join("") +
          `</div>`,
      )
      .join("");
  }
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
