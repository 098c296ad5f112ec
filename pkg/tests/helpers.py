"""Shared test helpers: independent brute-force oracles and an in-process
client/server rig with recordable traffic."""

from __future__ import annotations

from typing import Mapping, Sequence

from substring_sse.client import InProcessTransport, UserClient
from substring_sse.crypto import KeyBundle, keygen
from substring_sse.server import CloudServer


def naive_positions(text: bytes, pattern: bytes) -> set[int]:
    """All 1-based occurrence positions, by checking every window."""
    width = len(pattern)
    return {
        i + 1
        for i in range(len(text) - width + 1)
        if text[i : i + width] == pattern
    }


def containing_keywords(dictionary, pattern: bytes) -> set[bytes]:
    """Brute-force containment over a keyword collection."""
    return {keyword for keyword in dictionary if pattern in keyword}


class RecordingTransport:
    """Wraps a transport and keeps every outbound request's raw bytes."""

    def __init__(self, inner):
        self.inner = inner
        self.outbound: list[tuple[str, str, bytes]] = []

    def request(self, method, path, body=None, query=""):
        self.outbound.append((method, path + (f"?{query}" if query else ""), body or b""))
        return self.inner.request(method, path, body, query)


def make_rig(
    dictionary: Sequence[bytes],
    postings: Mapping[bytes, Sequence[str]] | None = None,
    files: Mapping[str, bytes] | None = None,
    tracing: bool = False,
    keys: KeyBundle | None = None,
    record: bool = False,
):
    """In-process client/server pair with the dictionary outsourced.

    Returns (client, server); with record=True the client's transport is a
    RecordingTransport reachable as client.transport.
    """
    keys = keys or keygen(128, 2**12)
    server = CloudServer(data_dir=None, tracing=tracing)
    transport = InProcessTransport(server)
    if record:
        transport = RecordingTransport(transport)
    client = UserClient(keys, transport)
    client.outsource(list(dictionary), postings or {}, files or {})
    return client, server
