// Console state. The view model is a pure reducer over stream messages and
// command replies: everything displayed comes from the server, the client
// computes nothing but marker interpolation. The transcript holds only
// utterances this player's proxy received (the server filters by
// vicinity), ordered by tick.

import {
  AgentInspection,
  AgentMarker,
  ChatEvent,
  Landmark,
  StreamMessage,
  WorldSnapshot,
} from "./proto.js";

export type ConnectionState = "connecting" | "connected" | "closed";

export interface TranscriptEntry {
  tick: number;
  speaker: string;
  text: string;
  own: boolean;
}

export interface InterviewEntry {
  agent: string;
  question: string;
  answers: { repeat: number; answer: string | null }[];
}

export interface ViewState {
  connection: ConnectionState;
  player: string;
  tick: number;
  agents: AgentMarker[];
  locations: Landmark[];
  transcript: TranscriptEntry[];
  desynced: boolean;
  inspection: AgentInspection | null;
  interviews: InterviewEntry[];
  notice: string;
}

export class ViewModel {
  readonly state: ViewState;
  private lastSayMs = -Infinity;
  private readonly sayIntervalMs: number;
  private readonly listeners: (() => void)[] = [];

  constructor(player: string, sayIntervalMs = 2000) {
    this.sayIntervalMs = sayIntervalMs;
    this.state = {
      connection: "connecting",
      player,
      tick: -1,
      agents: [],
      locations: [],
      transcript: [],
      desynced: false,
      inspection: null,
      interviews: [],
      notice: "",
    };
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  // ----------------------------------------------------------------- stream

  apply(message: StreamMessage): void {
    switch (message.kind) {
      case "hello":
        this.state.connection = "connected";
        this.state.tick = message.tick;
        break;
      case "tick":
        if (this.state.tick >= 0 && message.tick > this.state.tick + 1) {
          this.state.desynced = true; // missed deltas; wait for a snapshot
        }
        this.state.tick = message.tick;
        this.state.agents = message.agents;
        break;
      case "chat":
        this.pushChat(message);
        break;
      case "gap":
        this.state.desynced = true;
        break;
    }
    this.emit();
  }

  private pushChat(message: ChatEvent): void {
    if (message.observation_kind && message.observation_kind !== "utterance") {
      return; // proximity/system notices are not speech
    }
    const entry: TranscriptEntry = {
      tick: message.tick,
      speaker: message.speaker ?? "?",
      text: message.text,
      own: message.speaker === this.state.player,
    };
    // insert keeping tick order stable
    let at = this.state.transcript.length;
    while (at > 0) {
      const prev = this.state.transcript[at - 1];
      if (prev === undefined || prev.tick <= entry.tick) break;
      at -= 1;
    }
    this.state.transcript.splice(at, 0, entry);
  }

  applySnapshot(snapshot: WorldSnapshot): void {
    this.state.tick = snapshot.tick;
    this.state.agents = snapshot.agents;
    this.state.locations = snapshot.locations;
    this.state.desynced = false; // a full snapshot resynchronizes the view
    this.emit();
  }

  streamClosed(): void {
    this.state.connection = "closed";
    this.emit();
  }

  // --------------------------------------------------------------- commands

  // Client-side mirror of the server's say rate limit; returns null when
  // the send is allowed, otherwise the inline notice to show.
  gateSay(nowMs: number): string | null {
    const since = nowMs - this.lastSayMs;
    if (since < this.sayIntervalMs) {
      const wait = ((this.sayIntervalMs - since) / 1000).toFixed(1);
      return `hold on ${wait}s before chatting again`;
    }
    this.lastSayMs = nowMs;
    return null;
  }

  setNotice(notice: string): void {
    this.state.notice = notice;
    this.emit();
  }

  setInspection(inspection: AgentInspection | null): void {
    this.state.inspection = inspection;
    this.emit();
  }

  addInterview(entry: InterviewEntry): void {
    this.state.interviews.push(entry);
    this.emit();
  }
}
