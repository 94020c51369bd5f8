// Gateway transport: command POSTs plus the NDJSON stream reader.
// fetch is injectable so tests can run against a scripted backend.

import {
  AgentInspection,
  CommandReply,
  StreamMessage,
  WorldSnapshot,
  isWorldSnapshot,
  parseStreamLine,
} from "./proto.js";

export type FetchLike = typeof fetch;

export interface GatewayOptions {
  baseUrl: string;
  player: string;
  token?: string;
  fetchImpl?: FetchLike;
}

export class GatewayClient {
  readonly baseUrl: string;
  readonly player: string;
  private readonly token?: string;
  private readonly fetchImpl: FetchLike;
  private streamAbort: AbortController | null = null;

  constructor(options: GatewayOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.player = options.player;
    this.token = options.token;
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["x-auth-token"] = this.token;
    return headers;
  }

  private async post(path: string, body: object): Promise<CommandReply> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ ...body, player: this.player }),
    });
    return (await response.json()) as CommandReply;
  }

  async world(): Promise<WorldSnapshot> {
    const response = await this.fetchImpl(`${this.baseUrl}/world`, {
      headers: this.headers(),
    });
    const data = await response.json();
    if (!isWorldSnapshot(data)) throw new Error("bad /world payload");
    return data;
  }

  async inspect(agentId: string): Promise<AgentInspection> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/agents/${encodeURIComponent(agentId)}`,
      { headers: this.headers() },
    );
    return (await response.json()) as AgentInspection;
  }

  say(text: string): Promise<CommandReply> {
    return this.post("/say", { text });
  }

  move(x: number, y: number): Promise<CommandReply> {
    return this.post("/move", { x, y });
  }

  interview(agent: string, question: string, repeats = 3): Promise<CommandReply> {
    return this.post("/interview", { agent, question, repeats });
  }

  // Long-lived NDJSON stream; invokes onMessage per parsed line until the
  // connection drops or closeStream() is called.
  async stream(
    onMessage: (message: StreamMessage) => void,
    onClose: () => void,
  ): Promise<void> {
    this.streamAbort = new AbortController();
    const token = this.token ? `&token=${encodeURIComponent(this.token)}` : "";
    try {
      const response = await this.fetchImpl(
        `${this.baseUrl}/stream?player=${encodeURIComponent(this.player)}${token}`,
        { signal: this.streamAbort.signal },
      );
      if (!response.body) throw new Error("stream has no body");
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { value, done } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        const lines = buffer.split("\n");
        buffer = lines.pop() ?? "";
        for (const line of lines) {
          const message = parseStreamLine(line);
          if (message) onMessage(message);
        }
      }
    } catch {
      // aborted or dropped; fall through to onClose
    } finally {
      this.streamAbort = null;
      onClose();
    }
  }

  closeStream(): void {
    this.streamAbort?.abort();
  }
}
