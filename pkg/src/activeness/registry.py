"""In-process mock of a remote component registry.

Serves ``GET /components/{name}`` for one library fixture, optionally
sleeping before every response to imitate network latency.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import unquote, urlsplit

from .errors import TransportError, ValidationError
from .lookup import LibraryDescriptor, build_local_backend

log = logging.getLogger(__name__)

PREFIX = "/components/"


def _handler_for(backend, latency):
    class RegistryHandler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        server_version = "activeness-registry/0.1"

        def do_GET(self):
            if latency:
                time.sleep(latency)
            path = urlsplit(self.path).path
            if not path.startswith(PREFIX) or len(path) == len(PREFIX):
                self._send(400, b"")
                return
            record = backend.resolve(unquote(path[len(PREFIX):]))
            if record is None:
                self._send(404, b"")
                return
            body = json.dumps({"name": record.name, "version": record.version, "path": list(record.path)})
            self._send(200, body.encode("utf-8"), "application/json")

        def _send(self, status, body, content_type=None):
            self.send_response(status)
            if content_type:
                self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            if body:
                self.wfile.write(body)

        def log_message(self, fmt, *args):
            log.debug("registry: " + fmt, *args)

    return RegistryHandler


class RegistryHandle:
    """A running mock registry. Use as a context manager or call :meth:`shutdown`."""

    def __init__(self, server, thread):
        self._server = server
        self._thread = thread
        host, port = server.server_address[:2]
        self.port = port
        self.url = f"http://{host}:{port}"

    def wait(self):
        """Block until the server stops."""
        self._thread.join()

    def shutdown(self):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


def make_server(fixture: LibraryDescriptor, latency_injection=0.0, host="127.0.0.1", port=0):
    if latency_injection < 0:
        raise ValidationError(f"latency must be >= 0, got {latency_injection!r}")
    handler = _handler_for(build_local_backend(fixture), float(latency_injection))
    try:
        server = ThreadingHTTPServer((host, port), handler)
    except OSError as exc:
        raise TransportError(f"cannot bind registry to {host}:{port}: {exc.strerror or exc}") from exc
    server.daemon_threads = True
    return server


def run_mock_registry(fixture: LibraryDescriptor, latency_injection=0.0, host="127.0.0.1", port=0) -> RegistryHandle:
    """Start serving ``fixture`` on a background thread; ``port=0`` picks a free port."""
    server = make_server(fixture, latency_injection, host, port)
    thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.05},
                              name="mock-registry", daemon=True)
    thread.start()
    return RegistryHandle(server, thread)
