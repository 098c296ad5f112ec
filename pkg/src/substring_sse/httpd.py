"""HTTP listener for the host process.

A thin adapter over :class:`CloudServer.dispatch`; the listener itself
has no protocol logic, so the wire bytes are identical whether requests
arrive over a socket or through the in-process transport used by tests
and the bench harness.
"""

from __future__ import annotations

import argparse
import errno
import logging
import os
import sys
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import PortInUseError
from .server import CloudServer

log = logging.getLogger(__name__)

__all__ = ["make_httpd", "main"]

_MAX_BODY = 256 * 1024 * 1024


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    @property
    def app(self) -> CloudServer:
        return self.server.app  # type: ignore[attr-defined]

    def _respond(self, method: str) -> None:
        parsed = urllib.parse.urlsplit(self.path)
        body = None
        if method == "POST":
            length = int(self.headers.get("Content-Length", "0"))
            if length > _MAX_BODY:
                self.send_error(413)
                return
            body = self.rfile.read(length)
        status, ctype, payload = self.app.dispatch(method, parsed.path, parsed.query, body)
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self) -> None:
        self._respond("GET")

    def do_POST(self) -> None:
        self._respond("POST")

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s - %s", self.address_string(), fmt % args)


def make_httpd(app: CloudServer, host: str, port: int) -> ThreadingHTTPServer:
    try:
        httpd = ThreadingHTTPServer((host, port), _Handler)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise PortInUseError(f"{host}:{port} is already in use") from exc
        raise
    httpd.app = app  # type: ignore[attr-defined]
    return httpd


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sse-server", description="Host process for the encrypted indexes"
    )
    parser.add_argument(
        "--listen",
        default=os.environ.get("SSE_SERVER_LISTEN", "127.0.0.1:8500"),
        help="host:port to bind (env SSE_SERVER_LISTEN)",
    )
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("SSE_SERVER_DATA_DIR"),
        help="directory for persisted state; memory-only when omitted (env SSE_SERVER_DATA_DIR)",
    )
    parser.add_argument(
        "--enable-tracing",
        action="store_true",
        default=os.environ.get("SSE_SERVER_TRACING", "") not in ("", "0", "false"),
        help="record leakage traces and expose /v1/debug/leakage (env SSE_SERVER_TRACING)",
    )
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    host, _, port_text = args.listen.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        parser.error(f"bad --listen value {args.listen!r}")
    app = CloudServer(data_dir=args.data_dir, tracing=args.enable_tracing)
    try:
        httpd = make_httpd(app, host or "127.0.0.1", port)
    except PortInUseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    log.info("listening on %s (data dir: %s, tracing: %s)", args.listen, args.data_dir, args.enable_tracing)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
