from .server import PROTO, ClientSession, GatewayService, default_interview_runner, serve

__all__ = ["PROTO", "ClientSession", "GatewayService", "default_interview_runner", "serve"]
