"""Loopback gateway: a plaintext JSON facade over the client.

The browser UI talks only to this process; keys, tokens and ciphertexts
never cross the gateway boundary.  Binds 127.0.0.1 exclusively.  When a
UI directory is configured, its static files are served alongside the
JSON endpoints so the whole search page comes from one origin.
"""

from __future__ import annotations

import errno
import json
import logging
import mimetypes
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .client import UserClient
from .errors import (
    PortInUseError,
    ServerUnreachableError,
    SseError,
    UnknownFileIdError,
    ValidationError,
)
from .wire import error_document

log = logging.getLogger(__name__)

__all__ = ["GatewayApp", "make_gateway_httpd", "serve_gateway"]


class GatewayApp:
    def __init__(self, client: UserClient, ui_dir: str | Path | None = None):
        self.client = client
        self.ui_dir = Path(ui_dir).resolve() if ui_dir is not None else None

    def dispatch(self, method: str, path: str, query: str = "") -> tuple[int, str, bytes]:
        try:
            return self._route(method, path, query)
        except ValidationError as exc:
            return self._error(400, exc)
        except UnknownFileIdError as exc:
            return self._error(404, exc)
        except ServerUnreachableError as exc:
            return self._error(502, exc)
        except SseError as exc:
            return self._error(500, exc)

    def _route(self, method: str, path: str, query: str) -> tuple[int, str, bytes]:
        if method != "GET":
            return self._error(405, SseError(f"method {method} not allowed"))
        params = urllib.parse.parse_qs(query)
        if path == "/suggest":
            pattern = params.get("s", [""])[0]
            suggestions = self.client.suggest(pattern)
            return self._json({"suggestions": [s.keyword for s in suggestions]})
        if path == "/files":
            keyword = params.get("w", [""])[0]
            return self._json({"ids": self.client.files_for(keyword)})
        if path.startswith("/file/"):
            file_id = urllib.parse.unquote(path[len("/file/") :])
            data = self.client.fetch_and_decrypt(file_id)
            return 200, "application/octet-stream", data
        return self._static(path)

    def _static(self, path: str) -> tuple[int, str, bytes]:
        if self.ui_dir is None:
            return self._error(404, SseError(f"no route for {path}"))
        name = path.lstrip("/") or "index.html"
        target = (self.ui_dir / name).resolve()
        if not target.is_relative_to(self.ui_dir) or not target.is_file():
            return self._error(404, SseError(f"no such asset {path}"))
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return 200, ctype, target.read_bytes()

    @staticmethod
    def _json(doc: dict) -> tuple[int, str, bytes]:
        return 200, "application/json", json.dumps(doc).encode("utf-8")

    @staticmethod
    def _error(status: int, exc: SseError) -> tuple[int, str, bytes]:
        return status, "application/json", json.dumps(error_document(exc)).encode("utf-8")


class _GatewayHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def do_GET(self) -> None:
        parsed = urllib.parse.urlsplit(self.path)
        app: GatewayApp = self.server.app  # type: ignore[attr-defined]
        status, ctype, payload = app.dispatch("GET", parsed.path, parsed.query)
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s - %s", self.address_string(), fmt % args)


def make_gateway_httpd(app: GatewayApp, port: int) -> ThreadingHTTPServer:
    try:
        httpd = ThreadingHTTPServer(("127.0.0.1", port), _GatewayHandler)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise PortInUseError(f"127.0.0.1:{port} is already in use") from exc
        raise
    httpd.app = app  # type: ignore[attr-defined]
    return httpd


def serve_gateway(client: UserClient, port: int, ui_dir: str | Path | None = None) -> None:
    httpd = make_gateway_httpd(GatewayApp(client, ui_dir), port)
    log.info("gateway listening on 127.0.0.1:%d", port)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
