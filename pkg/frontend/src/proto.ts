// Gateway proto v1 message types and parsing. Every payload is a JSON
// object with a `kind` field; stream deltas carry the world tick.

export interface AgentMarker {
  id: string;
  x: number;
  y: number;
  human: boolean;
  option: string;
  destination: string;
}

export interface Landmark {
  name: string;
  x: number;
  y: number;
}

export interface WorldSnapshot {
  kind: "world";
  proto: "v1";
  tick: number;
  agents: AgentMarker[];
  locations: Landmark[];
}

export interface TickDelta {
  kind: "tick";
  proto: "v1";
  tick: number;
  agents: AgentMarker[];
}

export interface ChatEvent {
  kind: "chat";
  proto: "v1";
  tick: number;
  speaker: string | null;
  text: string;
  observation_kind: string;
}

export interface HelloEvent {
  kind: "hello";
  proto: "v1";
  player: string;
  tick: number;
}

export interface GapEvent {
  kind: "gap";
  proto: "v1";
  dropped: number;
}

export interface AgentInspection {
  kind: "agent";
  proto: "v1";
  id: string;
  tick: number;
  goal: string;
  subgoal: string;
  summary: string;
  option: string;
  last_events: string[];
}

export interface InterviewReply {
  kind: "interview";
  proto: "v1";
  agent: string;
  question: string;
  answers: { repeat: number; answer: string | null }[];
}

export interface AckReply {
  kind: "ack";
  proto: "v1";
  command: string;
}

export interface ErrorReply {
  kind: "error";
  proto: "v1";
  error: string;
  retry_after_s?: number;
}

export type StreamMessage = TickDelta | ChatEvent | HelloEvent | GapEvent;
export type CommandReply = AckReply | ErrorReply | InterviewReply;

const STREAM_KINDS = new Set(["tick", "chat", "hello", "gap"]);

// Parse one NDJSON stream line; returns null for unknown or malformed
// messages so a newer server never crashes the console.
export function parseStreamLine(line: string): StreamMessage | null {
  const trimmed = line.trim();
  if (!trimmed) return null;
  let data: unknown;
  try {
    data = JSON.parse(trimmed);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const message = data as { kind?: unknown };
  if (typeof message.kind !== "string" || !STREAM_KINDS.has(message.kind)) {
    return null;
  }
  return data as StreamMessage;
}

export function isWorldSnapshot(data: unknown): data is WorldSnapshot {
  return (
    typeof data === "object" &&
    data !== null &&
    (data as { kind?: unknown }).kind === "world" &&
    Array.isArray((data as { agents?: unknown }).agents)
  );
}
