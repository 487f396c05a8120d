"""Thin JSON-over-HTTP layer in front of the experiment service.

Routes mirror the service operations one to one. Errors come back as
``{"error": {"code": ..., "message": ...}}`` with a matching status code.
An optional static directory serves the participant front end.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .core import ExperimentService, ServiceError

_MAX_BODY = 1 << 20


def _routes(service: ExperimentService):
    return {
        ("GET", "state"): lambda sid, body: service.get_state(sid),
        ("GET", "instructions"): lambda sid, body: service.get_instructions(sid),
        ("POST", "instructions-ack"): lambda sid, body: service.ack_instructions(sid),
        ("POST", "quiz"): lambda sid, body: service.submit_quiz(sid, body.get("answers")),
        ("POST", "decision"): lambda sid, body: service.decide_round(sid, body.get("fly")),
        ("POST", "plan"): lambda sid, body: service.submit_plan(sid, body.get("plan")),
        ("POST", "mpl"): lambda sid, body: service.submit_mpl(sid, body.get("choices")),
        ("POST", "questionnaire"): lambda sid, body: service.submit_questionnaire(sid, body),
        ("POST", "finalize"): lambda sid, body: service.finalize(sid),
        ("GET", "result"): lambda sid, body: service.get_result(sid),
    }


def make_http_server(
    service: ExperimentService,
    host: str = "127.0.0.1",
    port: int = 0,
    ui_dir: Path | None = None,
) -> ThreadingHTTPServer:
    routes = _routes(service)
    static_root = Path(ui_dir).resolve() if ui_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _send_json(self, payload: dict, status: int = 200) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_error(self, code: str, message: str, status: int) -> None:
            self._send_json({"error": {"code": code, "message": message}}, status)

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length > _MAX_BODY:
                raise ServiceError("validation", "request body too large", status=413)
            if length == 0:
                return {}
            raw = self.rfile.read(length)
            try:
                parsed = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ServiceError("validation", f"invalid JSON body: {exc}") from exc
            if not isinstance(parsed, dict):
                raise ServiceError("validation", "request body must be a JSON object")
            return parsed

        def _handle_api(self, method: str) -> None:
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            try:
                if parts == ["api", "health"] and method == "GET":
                    self._send_json({"status": "ok"})
                    return
                if parts == ["api", "sessions"] and method == "POST":
                    body = self._read_body()
                    result = service.create_session(
                        participant_code=body.get("participant_code"),
                        treatment=body.get("treatment"),
                        seed=body.get("seed"),
                    )
                    self._send_json(result, status=201)
                    return
                if len(parts) == 4 and parts[:2] == ["api", "sessions"]:
                    handler = routes.get((method, parts[3]))
                    if handler is not None:
                        body = self._read_body() if method == "POST" else {}
                        self._send_json(handler(parts[2], body))
                        return
                self._send_error("not_found", f"no route for {method} {self.path}", 404)
            except ServiceError as exc:
                self._send_error(exc.code, exc.message, exc.status)
            except Exception as exc:  # noqa: BLE001 - report, do not crash the server
                self._send_error("internal", f"{type(exc).__name__}: {exc}", 500)

        def _serve_static(self) -> None:
            if static_root is None:
                self._send_error("not_found", "no UI is configured", 404)
                return
            rel = self.path.split("?")[0].lstrip("/") or "index.html"
            target = (static_root / rel).resolve()
            if not str(target).startswith(str(static_root)) or not target.is_file():
                target = static_root / "index.html"
                if not target.is_file():
                    self._send_error("not_found", "file not found", 404)
                    return
            data = target.read_bytes()
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self) -> None:
            if self.path.startswith("/api/"):
                self._handle_api("GET")
            else:
                self._serve_static()

        def do_POST(self) -> None:
            if self.path.startswith("/api/"):
                self._handle_api("POST")
            else:
                self._send_error("not_found", "POST is only available under /api/", 404)

    return ThreadingHTTPServer((host, port), Handler)


def serve_forever(
    service: ExperimentService,
    host: str = "127.0.0.1",
    port: int = 8321,
    ui_dir: Path | None = None,
) -> None:
    server = make_http_server(service, host, port, ui_dir)
    address = f"http://{server.server_address[0]}:{server.server_address[1]}"
    print(
        f"experiment service listening on {address}/api/ (data in {service.events.path.parent})",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()


def start_background(service: ExperimentService, host: str = "127.0.0.1", port: int = 0):
    """Start the server on a background thread; returns (server, base_url)."""
    server = make_http_server(service, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host_, port_ = server.server_address[:2]
    return server, f"http://{host_}:{port_}"
