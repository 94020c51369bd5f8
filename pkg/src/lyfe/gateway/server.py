"""HTTP gateway exposing a running realtime simulation (proto v1).

Endpoints: GET /world, GET /agents, GET /agents/{id}, POST /say,
POST /move, POST /interview, and a chunked NDJSON stream at GET /stream.
Every payload is a JSON object with a ``kind`` field and carries the world
tick where relevant. The gateway owns no simulation state: commands are
translated into world/brain operations submitted to the loop thread, and
per-tick deltas fan out to bounded session buffers (drop-oldest with a gap
marker, so a slow client can never stall the world).

Auth is a shared token (``gateway.auth_token`` config key) sent as the
``x-auth-token`` header or ``?token=`` query parameter.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, unquote, urlparse

from ..world import LiveHuman, RealtimeLoop

PROTO = "v1"
STREAM_BUFFER = 256


@dataclass
class ClientSession:
    player_id: str
    proxy: object  # LiveHuman or a pre-existing scripted proxy
    owns_proxy: bool = True
    stream: "queue.Queue[dict]" = field(default_factory=lambda: queue.Queue(maxsize=STREAM_BUFFER))
    dropped: int = 0
    last_say_wall: float = -1e9
    subscriptions: set = field(default_factory=set)

    def push(self, message: dict) -> None:
        try:
            self.stream.put_nowait(message)
        except queue.Full:
            try:
                self.stream.get_nowait()
            except queue.Empty:
                pass
            self.dropped += 1
            try:
                self.stream.put_nowait({"kind": "gap", "proto": PROTO, "dropped": self.dropped})
                self.stream.put_nowait(message)
            except queue.Full:
                pass


class GatewayService:
    """Session registry and command translation over a RealtimeLoop."""

    def __init__(
        self,
        loop: RealtimeLoop,
        auth_token: str = "",
        say_interval_s: float = 2.0,
        interview_runner=None,
    ):
        self.loop = loop
        self.auth_token = auth_token
        self.say_interval_s = say_interval_s
        self.interview_runner = interview_runner
        self.sessions: dict[str, ClientSession] = {}
        self._lock = threading.Lock()
        loop.subscribe(self._on_delta)

    # ------------------------------------------------------------------

    def authorized(self, token: Optional[str]) -> bool:
        return not self.auth_token or token == self.auth_token

    def session(self, player_id: str, spawn: tuple[float, float] = (50.0, 50.0)) -> ClientSession:
        """Session for a player.

        If the player already exists in the world (a scripted participant),
        the session only observes it; closing such a session never touches
        simulation state. Otherwise a live proxy body is attached and owned
        by the session.
        """
        with self._lock:
            existing = self.sessions.get(player_id)
            if existing is not None:
                return existing
            preexisting = self.loop.actors.get(player_id)
            if preexisting is not None:
                session = ClientSession(
                    player_id=player_id, proxy=preexisting, owns_proxy=False
                )
            else:
                session = ClientSession(player_id=player_id, proxy=LiveHuman(player_id))
            session.proxy.on_observation = lambda obs: session.push(
                {
                    "kind": "chat",
                    "proto": PROTO,
                    "tick": obs.tick,
                    "speaker": obs.speaker,
                    "text": obs.text,
                    "observation_kind": obs.kind,
                }
            )
            self.sessions[player_id] = session
        if not session.owns_proxy:
            return session
        done = threading.Event()

        def attach():
            if player_id not in self.loop.world.bodies:
                self.loop.world.attach_human(player_id, spawn)
                self.loop.actors[player_id] = session.proxy
            done.set()

        self.loop.submit(attach)
        done.wait(timeout=5.0)
        return session

    def close_session(self, player_id: str) -> None:
        with self._lock:
            session = self.sessions.pop(player_id, None)
        if session is None:
            return
        session.proxy.on_observation = None
        if not session.owns_proxy:
            return

        def detach():
            self.loop.world.detach(player_id)
            self.loop.actors.pop(player_id, None)

        self.loop.submit(detach)

    def _on_delta(self, delta: dict) -> None:
        with self._lock:
            sessions = list(self.sessions.values())
        for session in sessions:
            session.push(delta)

    # ------------------------------------------------------------------
    # commands (each maps to exactly one world/brain operation)

    def say(self, session: ClientSession, text: str) -> dict:
        if not isinstance(session.proxy, LiveHuman):
            return {"kind": "error", "proto": PROTO, "error": "read_only_session"}
        now = time.monotonic()
        if now - session.last_say_wall < self.say_interval_s:
            return {
                "kind": "error",
                "proto": PROTO,
                "error": "rate_limited",
                "retry_after_s": self.say_interval_s - (now - session.last_say_wall),
            }
        session.last_say_wall = now
        session.proxy.say(text)
        return {"kind": "ack", "proto": PROTO, "command": "say"}

    def move(self, session: ClientSession, x: float, y: float) -> dict:
        if not isinstance(session.proxy, LiveHuman):
            return {"kind": "error", "proto": PROTO, "error": "read_only_session"}
        session.proxy.move(x, y)
        return {"kind": "ack", "proto": PROTO, "command": "move"}

    def interview(self, agent: str, question: str, repeats: int = 3) -> dict:
        if self.interview_runner is None:
            return {"kind": "error", "proto": PROTO, "error": "interviews_unavailable"}
        try:
            answers = self.interview_runner(agent, question, repeats)
        except Exception as err:  # surface as protocol error, keep session alive
            return {"kind": "error", "proto": PROTO, "error": f"interview_failed: {err}"}
        return {
            "kind": "interview",
            "proto": PROTO,
            "agent": agent,
            "question": question,
            "answers": [
                {"repeat": idx, "answer": answer} for idx, answer in enumerate(answers)
            ],
        }

    def inspect(self, agent_id: str) -> Optional[dict]:
        actor = self.loop.actors.get(agent_id)
        brain = getattr(actor, "brain", None)
        if brain is None:
            return None
        return {
            "kind": "agent",
            "proto": PROTO,
            "id": agent_id,
            "tick": self.loop.world.tick,
            "goal": brain.goal,
            "subgoal": brain.subgoal,
            "summary": brain.summary,
            "option": brain.current_option.kind if brain.current_option else "",
            "last_events": brain.recent_observation_texts(10),
        }


def default_interview_runner(brains: dict, lm) -> callable:
    """Interview a live agent on a memory clone (read-only to the run)."""

    def runner(agent: str, question: str, repeats: int) -> list:
        from ..scenarios.interview import interview  # late import, no package cycle

        brain = brains[agent]
        clone = brain.__class__(
            agent_id=brain.agent_id,
            persona=brain.persona,
            goal=brain.goal,
            embedding=brain.embedding,
            config=brain.config,
            hierarchy=brain.memory.clone(),
        )
        result = interview(clone, [question], lm, repeats=repeats)
        return [repeat[0] for repeat in result.answers]

    return runner


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    service: GatewayService  # set by serve()

    def log_message(self, fmt, *args):  # quiet server
        pass

    # ------------------------------------------------------------------

    def _token(self, parsed) -> Optional[str]:
        header = self.headers.get("x-auth-token")
        if header:
            return header
        values = parse_qs(parsed.query).get("token")
        return values[0] if values else None

    def _player(self, parsed, body: Optional[dict] = None) -> str:
        if body and body.get("player"):
            return str(body["player"])
        values = parse_qs(parsed.query).get("player")
        return values[0] if values else "player"

    def _send_json(self, payload: dict, status: int = 200) -> None:
        blob = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("content-type", "application/json")
        self.send_header("content-length", str(len(blob)))
        self.send_header("access-control-allow-origin", "*")
        self.end_headers()
        self.wfile.write(blob)

    def _read_body(self) -> Optional[dict]:
        length = int(self.headers.get("content-length", 0) or 0)
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length).decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            return None

    # ------------------------------------------------------------------

    def do_GET(self):
        parsed = urlparse(self.path)
        service = self.service
        if not service.authorized(self._token(parsed)):
            self._send_json({"kind": "error", "proto": PROTO, "error": "unauthorized"}, 401)
            return
        if parsed.path == "/world":
            self._send_json(service.loop.snapshot())
        elif parsed.path == "/agents":
            snapshot = service.loop.snapshot()
            self._send_json(
                {
                    "kind": "agents",
                    "proto": PROTO,
                    "tick": snapshot["tick"],
                    "agents": [a["id"] for a in snapshot["agents"]],
                }
            )
        elif parsed.path.startswith("/agents/"):
            agent_id = unquote(parsed.path[len("/agents/"):])
            inspection = service.inspect(agent_id)
            if inspection is None:
                self._send_json(
                    {"kind": "error", "proto": PROTO, "error": f"unknown agent {agent_id!r}"},
                    404,
                )
            else:
                self._send_json(inspection)
        elif parsed.path == "/stream":
            self._stream(parsed)
        else:
            self._send_json({"kind": "error", "proto": PROTO, "error": "not_found"}, 404)

    def _stream(self, parsed) -> None:
        service = self.service
        player = self._player(parsed)
        query = parse_qs(parsed.query)
        try:
            spawn = (float(query["x"][0]), float(query["y"][0]))
        except (KeyError, ValueError, IndexError):
            spawn = (50.0, 50.0)
        session = service.session(player, spawn=spawn)
        self.send_response(200)
        self.send_header("content-type", "application/x-ndjson")
        self.send_header("cache-control", "no-store")
        self.send_header("access-control-allow-origin", "*")
        self.end_headers()
        hello = {"kind": "hello", "proto": PROTO, "player": player,
                 "tick": service.loop.world.tick}
        try:
            self.wfile.write((json.dumps(hello) + "\n").encode("utf-8"))
            self.wfile.flush()
            while True:
                try:
                    message = session.stream.get(timeout=1.0)
                except queue.Empty:
                    continue
                self.wfile.write((json.dumps(message) + "\n").encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            service.close_session(player)

    def do_POST(self):
        parsed = urlparse(self.path)
        service = self.service
        if not service.authorized(self._token(parsed)):
            self._send_json({"kind": "error", "proto": PROTO, "error": "unauthorized"}, 401)
            return
        body = self._read_body()
        if body is None:
            self._send_json({"kind": "error", "proto": PROTO, "error": "malformed_json"}, 400)
            return
        if parsed.path == "/say":
            text = body.get("text")
            if not isinstance(text, str) or not text.strip():
                self._send_json(
                    {"kind": "error", "proto": PROTO, "error": "say requires text"}, 400
                )
                return
            session = service.session(self._player(parsed, body))
            reply = service.say(session, text)
            self._send_json(reply, 429 if reply.get("error") == "rate_limited" else 200)
        elif parsed.path == "/move":
            try:
                x = float(body["x"])
                y = float(body["y"])
            except (KeyError, TypeError, ValueError):
                self._send_json(
                    {"kind": "error", "proto": PROTO, "error": "move requires numeric x, y"},
                    400,
                )
                return
            session = service.session(self._player(parsed, body))
            self._send_json(service.move(session, x, y))
        elif parsed.path == "/interview":
            agent = body.get("agent")
            question = body.get("question")
            if not agent or not question:
                self._send_json(
                    {"kind": "error", "proto": PROTO,
                     "error": "interview requires agent and question"},
                    400,
                )
                return
            reply = service.interview(agent, question, int(body.get("repeats", 3)))
            self._send_json(reply, 200 if reply["kind"] == "interview" else 400)
        else:
            self._send_json({"kind": "error", "proto": PROTO, "error": "not_found"}, 404)


def serve(
    loop: RealtimeLoop,
    bind: tuple[str, int] = ("127.0.0.1", 8787),
    auth_token: str = "",
    interview_runner=None,
    say_interval_s: float = 2.0,
) -> tuple[ThreadingHTTPServer, GatewayService]:
    """Start the gateway for a realtime world; returns (server, service).

    The caller owns both lifecycles: ``server.shutdown()`` then
    ``loop.stop()``.
    """
    service = GatewayService(
        loop,
        auth_token=auth_token,
        say_interval_s=say_interval_s,
        interview_runner=interview_runner,
    )
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer(bind, handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, service
