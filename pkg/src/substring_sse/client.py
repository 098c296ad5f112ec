"""The key-holding data user.

Owns the key bundle, turns plaintext intent into PRF tokens and
ciphertexts, and post-processes host responses: decrypt, verify
candidates, subtract revoked results, deduplicate, sort.  Nothing
plaintext ever leaves this side; outbound traffic consists solely of
labels, ciphertexts and opaque identifiers.

A query token for substring s is the list of PRF labels of s's prefixes,
one per length 1..len(s); the host walks them by exact child lookup.  An
insertion request carries, per suffix of the keyword, the labels of that
suffix's prefixes, the suffix extended by the separator, and one label
derived from a fresh random value so the host always finds a free label
to append.
"""

from __future__ import annotations

import json
import secrets
import urllib.parse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import requests

from . import secure_index as si
from .crypto import (
    KeyBundle,
    keygen,
    load_key_bundle,
    prf,
    save_key_bundle,
    ske_decrypt,
    ske_encrypt,
)
from .dictionary_index import (
    SEPARATOR,
    filter_candidates,
    mph_build,
    validate_keyword,
    validate_query,
)
from .errors import (
    RevokedKeywordError,
    ServerUnreachableError,
    SseError,
    UnknownFileIdError,
    ValidationError,
)
from .file_index import build_file_index, keyword_lookup_key, serialize_file_index
from .wire import b64d, b64e, label_hex, raise_wire_error

STATE_VERSION = 1
KEY_FILE = "keys.bin"
STATE_FILE = "state.json"

__all__ = [
    "Suggestion",
    "Transport",
    "HttpTransport",
    "InProcessTransport",
    "UserClient",
    "make_query_token",
    "make_insert_request",
]


class Transport(Protocol):
    """Anything that can carry one request to the host and bring back
    (status, content type, body bytes)."""

    def request(
        self, method: str, path: str, body: bytes | None = None, query: str = ""
    ) -> tuple[int, str, bytes]: ...


class HttpTransport:
    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def request(
        self, method: str, path: str, body: bytes | None = None, query: str = ""
    ) -> tuple[int, str, bytes]:
        url = self.base_url + path + (f"?{query}" if query else "")
        headers = {"Content-Type": "application/json"} if body is not None else {}
        try:
            response = self._session.request(
                method, url, data=body, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ServerUnreachableError(f"cannot reach {self.base_url}: {exc}") from exc
        return (
            response.status_code,
            response.headers.get("Content-Type", ""),
            response.content,
        )


class InProcessTransport:
    """Route requests straight into a CloudServer, still through real JSON
    bytes so recorded traffic matches the HTTP wire exactly."""

    def __init__(self, server):
        self.server = server

    def request(
        self, method: str, path: str, body: bytes | None = None, query: str = ""
    ) -> tuple[int, str, bytes]:
        return self.server.dispatch(method, path, query, body)


def make_query_token(pattern: bytes, keys: KeyBundle) -> list[bytes]:
    """One label per prefix of the pattern, shortest first."""
    validate_query(pattern)
    return [
        prf(keys.label_key, pattern[:length], keys.label_bits)
        for length in range(1, len(pattern) + 1)
    ]


def make_insert_request(keyword: bytes, keys: KeyBundle) -> si.InsertRequest:
    """Build the insertion request for one keyword (see module docstring
    for the token layout).  Fresh randomness per suffix makes repeated
    insertions of the same keyword distinct on the wire."""
    validate_keyword(keyword)
    separator = bytes([SEPARATOR])
    tokens: list[tuple[bytes, ...]] = []
    for start in range(len(keyword)):
        suffix = keyword[start:]
        labels = [
            prf(keys.label_key, suffix[:length], keys.label_bits)
            for length in range(1, len(suffix) + 1)
        ]
        labels.append(prf(keys.label_key, suffix + separator, keys.label_bits))
        labels.append(prf(keys.label_key, secrets.token_bytes(32), keys.label_bits))
        tokens.append(tuple(labels))
    return si.InsertRequest(
        enc_keyword=ske_encrypt(keys.data_key, keyword), suffix_tokens=tokens
    )


@dataclass(slots=True)
class Suggestion:
    keyword: str
    source_count: int


@dataclass
class _ClientState:
    server_url: str = ""
    posting_counters: dict[bytes, int] = field(default_factory=dict)
    revoked_keywords: set[bytes] = field(default_factory=set)
    file_names: dict[str, str] = field(default_factory=dict)


class UserClient:
    def __init__(
        self,
        keys: KeyBundle,
        transport: Transport,
        state_dir: str | Path | None = None,
        server_url: str = "",
    ):
        self.keys = keys
        self.transport = transport
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self.state = _ClientState(server_url=server_url)

    # ------------------------------------------------------------------
    # state on disk

    @classmethod
    def create(
        cls,
        state_dir: str | Path,
        server_url: str,
        security_bits: int = 128,
        expected_index_size: int = 2**20,
    ) -> "UserClient":
        """Generate keys and initialise a fresh state directory."""
        state_dir = Path(state_dir)
        state_dir.mkdir(parents=True, exist_ok=True)
        keys = keygen(security_bits, expected_index_size)
        client = cls(
            keys,
            HttpTransport(server_url),
            state_dir=state_dir,
            server_url=server_url,
        )
        save_key_bundle(state_dir / KEY_FILE, keys)
        client.save_state()
        return client

    @classmethod
    def load(cls, state_dir: str | Path, transport: Transport | None = None) -> "UserClient":
        state_dir = Path(state_dir)
        keys = load_key_bundle(state_dir / KEY_FILE)
        try:
            doc = json.loads((state_dir / STATE_FILE).read_text())
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read client state: {exc}") from exc
        state = _ClientState(
            server_url=doc.get("server_url", ""),
            posting_counters={
                bytes.fromhex(kw): int(count)
                for kw, count in doc.get("counters", {}).items()
            },
            revoked_keywords={bytes.fromhex(kw) for kw in doc.get("revoked", [])},
            file_names=dict(doc.get("files", {})),
        )
        client = cls(
            keys,
            transport or HttpTransport(state.server_url),
            state_dir=state_dir,
            server_url=state.server_url,
        )
        client.state = state
        return client

    def save_state(self) -> None:
        if self.state_dir is None:
            return
        doc = {
            "version": STATE_VERSION,
            "server_url": self.state.server_url,
            "counters": {
                kw.hex(): count for kw, count in self.state.posting_counters.items()
            },
            "revoked": sorted(kw.hex() for kw in self.state.revoked_keywords),
            "files": self.state.file_names,
        }
        tmp = self.state_dir / (STATE_FILE + ".tmp")
        tmp.write_text(json.dumps(doc, indent=2))
        tmp.replace(self.state_dir / STATE_FILE)

    # ------------------------------------------------------------------
    # protocol operations

    def outsource(
        self,
        dictionary: Sequence[bytes],
        postings: Mapping[bytes, Sequence[str]],
        files: Mapping[str, bytes],
    ) -> dict:
        """Build and ship all encrypted state, replacing whatever the host
        held before.  Postings must reference dictionary keywords and
        provided files only; that referential check has to happen here,
        since the host sees file ids inside postings only in encrypted
        form."""
        keyword_set = set(dictionary)
        for keyword, file_ids in postings.items():
            if keyword not in keyword_set:
                raise ValidationError(f"posting keyword {keyword!r} not in dictionary")
            for file_id in file_ids:
                if file_id not in files:
                    raise ValidationError(
                        f"posting for {keyword!r} references missing file {file_id!r}"
                    )
        main = si.encrypt_index(mph_build(dictionary), self.keys)
        revocation = si.encrypt_index(mph_build([]), self.keys)
        posting_index = build_file_index(postings, self.keys)
        payload = {
            "iw": si.serialize_index(main),
            "iwr": si.serialize_index(revocation),
            "if": serialize_file_index(posting_index),
            "blobs": [
                {"id": file_id, "data": b64e(ske_encrypt(self.keys.data_key, content))}
                for file_id, content in files.items()
            ],
        }
        ack = self._call_json("POST", "/v1/outsource", payload)
        self.state.posting_counters = {
            keyword: len(file_ids) for keyword, file_ids in postings.items()
        }
        self.state.revoked_keywords = set()
        self.save_state()
        return ack

    def suggest(self, pattern: str | bytes) -> list[Suggestion]:
        """Phase one: candidate keywords containing the pattern.

        Decrypts both result sets, keeps only true containments, and
        subtracts the revoked set; ties of the same keyword from several
        returned ciphertexts are collapsed, with the multiplicity kept as
        ``source_count``."""
        pattern_bytes = self._as_bytes(pattern)
        validate_query(pattern_bytes)
        tokens = make_query_token(pattern_bytes, self.keys)
        doc = self._call_json(
            "POST",
            "/v1/query/substring",
            {"tokens": [label_hex(token) for token in tokens]},
        )
        main_keywords = self._decrypt_outcome(doc["main"])
        revoked_keywords = self._decrypt_outcome(doc["revoked"])
        live = filter_candidates(pattern_bytes, main_keywords)
        revoked = filter_candidates(pattern_bytes, revoked_keywords)
        result = sorted(live - revoked)
        return [
            Suggestion(
                keyword=keyword.decode("utf-8", "backslashreplace"),
                source_count=main_keywords.count(keyword),
            )
            for keyword in result
        ]

    def files_for(self, keyword: str | bytes) -> list[str]:
        """Phase two: ids of files matching a chosen keyword."""
        keyword_bytes = self._as_bytes(keyword)
        validate_keyword(keyword_bytes)
        kw_key = keyword_lookup_key(self.keys, keyword_bytes)
        doc = self._call_json(
            "POST", "/v1/query/keyword", {"kw_key": label_hex(kw_key)}
        )
        return [
            ske_decrypt(self.keys.data_key, b64d(item)).decode("utf-8")
            for item in doc["enc_ids"]
        ]

    def fetch_and_decrypt(self, file_id: str) -> bytes:
        status, ctype, body = self._request(
            "GET", "/v1/file/" + urllib.parse.quote(file_id, safe="")
        )
        if status != 200:
            self._raise_error(status, body)
        return ske_decrypt(self.keys.data_key, body)

    def insert_keyword(self, keyword: str | bytes) -> dict:
        """Add one keyword to the hosted dictionary.

        Re-inserting a revoked keyword is rejected: the revocation list
        would keep suppressing it, so accepting the request would only
        grow the index without ever changing query results."""
        keyword_bytes = self._as_bytes(keyword)
        validate_keyword(keyword_bytes)
        if keyword_bytes in self.state.revoked_keywords:
            raise RevokedKeywordError(
                f"keyword {keyword_bytes!r} was deleted and cannot be re-inserted"
            )
        request = make_insert_request(keyword_bytes, self.keys)
        doc = si.encode_insert_request(request)
        doc["target"] = "main"
        return self._call_json("POST", "/v1/update/keyword", doc)

    def delete_keyword(self, keyword: str | bytes) -> dict:
        """Delete by inserting into the revocation index; suggest()
        subtracts its results from then on."""
        keyword_bytes = self._as_bytes(keyword)
        validate_keyword(keyword_bytes)
        request = make_insert_request(keyword_bytes, self.keys)
        doc = si.encode_insert_request(request)
        doc["target"] = "revocation"
        ack = self._call_json("POST", "/v1/update/keyword", doc)
        self.state.revoked_keywords.add(keyword_bytes)
        self.save_state()
        return ack

    def server_stats(self) -> dict:
        return self._call_json("GET", "/v1/stats")

    # ------------------------------------------------------------------
    # helpers

    @staticmethod
    def _as_bytes(text: str | bytes) -> bytes:
        return text.encode("utf-8") if isinstance(text, str) else text

    def _decrypt_outcome(self, outcome_doc: dict) -> list[bytes]:
        outcome = si.decode_outcome(outcome_doc)
        return [
            ske_decrypt(self.keys.data_key, ct)
            for _, ct in outcome.candidates + outcome.matches
        ]

    def _request(
        self, method: str, path: str, body: bytes | None = None, query: str = ""
    ) -> tuple[int, str, bytes]:
        return self.transport.request(method, path, body, query)

    def _call_json(self, method: str, path: str, doc: dict | None = None) -> dict:
        body = json.dumps(doc).encode("utf-8") if doc is not None else None
        status, _, payload = self._request(method, path, body)
        if status != 200:
            self._raise_error(status, payload)
        return json.loads(payload)

    @staticmethod
    def _raise_error(status: int, payload: bytes):
        try:
            doc = json.loads(payload)
        except ValueError:
            doc = {}
        if isinstance(doc, dict) and "error" in doc:
            if doc["error"] == "UnknownFileIdError":
                raise UnknownFileIdError(doc.get("detail", "unknown file id"))
            raise_wire_error(doc)
        raise SseError(f"server returned status {status}")
