"""The honest-but-curious host process, minus the HTTP listener.

Holds the encrypted keyword index, its revocation twin, the file-posting
index and the encrypted blobs; answers token queries and applies update
requests.  It owns no keys and never sees a plaintext: everything here
operates on labels, ciphertexts and opaque identifiers (a property the
test suite audits at the source level).

State lives in memory with optional write-through persistence to a single
JSON state file, swapped atomically via write-to-temp-plus-rename.
Leakage traces record which node identifiers each request touched; they
are test/bench instrumentation, gated behind a flag and never persisted.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import urllib.parse
from dataclasses import dataclass
from pathlib import Path

from . import file_index as fi
from . import secure_index as si
from .errors import (
    MalformedRequestError,
    NotInitializedError,
    SseError,
    StorageError,
    TracingDisabledError,
    UnknownFileIdError,
    ValidationError,
)
from .wire import b64d, b64e, error_document, parse_label, status_for_error

log = logging.getLogger(__name__)

STATE_VERSION = 1

__all__ = ["LeakageTrace", "CloudServer"]


@dataclass(slots=True)
class LeakageTrace:
    """What one request revealed: the ordered node ids it reached."""

    seq: int
    kind: str  # query_path | insertion_path | deletion_path | access
    index: str  # iw | iwr
    node_ids: list[int]

    def as_dict(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "index": self.index,
            "node_ids": list(self.node_ids),
        }


class CloudServer:
    """Wire-level request handlers over the hosted encrypted state.

    Handlers take and return JSON-compatible dicts; ``dispatch`` maps
    HTTP-shaped requests onto them so the real listener and the
    in-process test transport share one code path (and one byte format).
    """

    def __init__(self, data_dir: str | os.PathLike | None = None, tracing: bool = False):
        self._lock = threading.RLock()
        self.tracing = tracing
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.main_index: si.SecureIndex | None = None
        self.revocation_index: si.SecureIndex | None = None
        self.posting_index: fi.KeywordFileIndex | None = None
        self.blobs: dict[str, bytes] = {}
        self.traces: list[LeakageTrace] = []
        self._trace_seq = 0
        if self.data_dir is not None:
            self._load_state()

    # ------------------------------------------------------------------
    # handlers

    def handle_outsource(self, doc: dict) -> dict:
        """Replace all hosted state with the payload, atomically."""
        if not isinstance(doc, dict):
            raise ValidationError("outsource payload must be an object")
        try:
            main_doc = doc["iw"]
            revocation_doc = doc["iwr"]
            posting_doc = doc["if"]
            blob_rows = doc["blobs"]
        except KeyError as exc:
            raise ValidationError(f"outsource payload missing field {exc}") from exc
        main = si.deserialize_index(main_doc)
        revocation = si.deserialize_index(revocation_doc)
        postings = fi.deserialize_file_index(posting_doc)
        if not (main.label_bits == revocation.label_bits == postings.label_bits):
            raise ValidationError("indexes disagree on label width")
        if not isinstance(blob_rows, list):
            raise ValidationError("blobs must be a list")
        blobs: dict[str, bytes] = {}
        for row in blob_rows:
            try:
                file_id = row["id"]
                data = b64d(row["data"])
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"malformed blob row: {exc}") from exc
            if not isinstance(file_id, str) or not file_id:
                raise ValidationError("blob id must be a non-empty string")
            if file_id in blobs:
                raise ValidationError(f"duplicate blob id {file_id!r}")
            blobs[file_id] = data
        with self._lock:
            self.main_index = main
            self.revocation_index = revocation
            self.posting_index = postings
            self.blobs = blobs
            self._persist()
        return self.stats()

    def handle_substring_query(self, doc: dict) -> dict:
        """Run the token walk over both the main and the revocation index."""
        with self._lock:
            main, revocation = self._require_indexes()
            tokens = self._parse_tokens(doc, main.label_bits)
            main_outcome = si.encrypted_search(main, tokens)
            revoked_outcome = si.encrypted_search(revocation, tokens)
            self._trace("query_path", "iw", main_outcome.path_node_ids())
            self._trace("query_path", "iwr", revoked_outcome.path_node_ids())
        return {
            "main": si.encode_outcome(main_outcome),
            "revoked": si.encode_outcome(revoked_outcome),
        }

    def handle_keyword_query(self, doc: dict) -> dict:
        with self._lock:
            postings = self._require_postings()
            try:
                kw_key = parse_label(doc["kw_key"], postings.label_bits)
            except (KeyError, TypeError) as exc:
                raise MalformedRequestError(f"missing kw_key: {exc}") from exc
            found = fi.file_lookup(postings, kw_key)
        return {"enc_ids": [b64e(value) for value in found]}

    def handle_update_keyword(self, doc: dict) -> dict:
        with self._lock:
            main, revocation = self._require_indexes()
            target = doc.get("target")
            if target == "main":
                index, index_name, kind = main, "iw", "insertion_path"
            elif target == "revocation":
                index, index_name, kind = revocation, "iwr", "deletion_path"
            else:
                raise MalformedRequestError(f"unknown update target {target!r}")
            request = si.decode_insert_request(doc, index.label_bits)
            result = si.apply_insert(index, request)
            self._trace(kind, index_name, result.path_node_ids)
            self._persist()
        return {"nodes_added": result.nodes_added}

    def handle_update_posting(self, doc: dict) -> dict:
        with self._lock:
            postings = self._require_postings()
            op = doc.get("op")
            if op == "insert":
                try:
                    kw_key = parse_label(doc["kw_key"], postings.label_bits)
                    counter = int(doc["counter"])
                    enc_id = b64d(doc["enc_id"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise MalformedRequestError(f"malformed posting insert: {exc}") from exc
                fi.insert_posting(postings, kw_key, counter, enc_id)
            elif op == "delete":
                try:
                    lookup_key = parse_label(doc["lookup_key"], postings.label_bits)
                except (KeyError, TypeError) as exc:
                    raise MalformedRequestError(f"malformed posting delete: {exc}") from exc
                fi.delete_posting(postings, lookup_key)
            else:
                raise MalformedRequestError(f"unknown posting op {op!r}")
            self._persist()
        return {"applied": 1}

    def fetch_blob(self, file_id: str) -> bytes:
        with self._lock:
            if self.main_index is None:
                raise NotInitializedError("no outsourced state")
            try:
                return self.blobs[file_id]
            except KeyError:
                raise UnknownFileIdError(f"unknown file id {file_id!r}") from None

    def stats(self) -> dict:
        with self._lock:
            return {
                "iw_nodes": self.main_index.node_count if self.main_index else 0,
                "iwr_nodes": self.revocation_index.node_count if self.revocation_index else 0,
                "if_entries": self.posting_index.entry_count() if self.posting_index else 0,
                "n": len(self.blobs),
            }

    def leakage_since(self, since: int) -> dict:
        if not self.tracing:
            raise TracingDisabledError("leakage tracing is not enabled on this server")
        with self._lock:
            return {"traces": [t.as_dict() for t in self.traces if t.seq > since]}

    # ------------------------------------------------------------------
    # dispatch (shared by the HTTP listener and the in-process transport)

    def dispatch(
        self, method: str, path: str, query: str = "", body: bytes | None = None
    ) -> tuple[int, str, bytes]:
        try:
            return self._route(method, path, query, body)
        except SseError as exc:
            return (
                status_for_error(exc),
                "application/json",
                json.dumps(error_document(exc)).encode("utf-8"),
            )

    def _route(self, method: str, path: str, query: str, body: bytes | None):
        def as_json(doc: dict) -> tuple[int, str, bytes]:
            return 200, "application/json", json.dumps(doc).encode("utf-8")

        if method == "POST":
            doc = self._parse_body(body)
            if path == "/v1/outsource":
                return as_json(self.handle_outsource(doc))
            if path == "/v1/query/substring":
                return as_json(self.handle_substring_query(doc))
            if path == "/v1/query/keyword":
                return as_json(self.handle_keyword_query(doc))
            if path == "/v1/update/keyword":
                return as_json(self.handle_update_keyword(doc))
            if path == "/v1/update/posting":
                return as_json(self.handle_update_posting(doc))
        elif method == "GET":
            if path == "/v1/stats":
                return as_json(self.stats())
            if path == "/v1/debug/leakage":
                params = urllib.parse.parse_qs(query)
                try:
                    since = int(params.get("since", ["0"])[0])
                except ValueError as exc:
                    raise MalformedRequestError(f"bad since parameter: {exc}") from exc
                return as_json(self.leakage_since(since))
            if path.startswith("/v1/file/"):
                file_id = urllib.parse.unquote(path[len("/v1/file/") :])
                return 200, "application/octet-stream", self.fetch_blob(file_id)
        raise MalformedRequestError(f"no route for {method} {path}")

    @staticmethod
    def _parse_body(body: bytes | None) -> dict:
        if not body:
            raise MalformedRequestError("empty request body")
        try:
            doc = json.loads(body)
        except ValueError as exc:
            raise MalformedRequestError(f"request body is not JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise MalformedRequestError("request body must be a JSON object")
        return doc

    # ------------------------------------------------------------------
    # internals

    def _require_indexes(self) -> tuple[si.SecureIndex, si.SecureIndex]:
        if self.main_index is None or self.revocation_index is None:
            raise NotInitializedError("no outsourced state")
        return self.main_index, self.revocation_index

    def _require_postings(self) -> fi.KeywordFileIndex:
        if self.posting_index is None:
            raise NotInitializedError("no outsourced state")
        return self.posting_index

    def _parse_tokens(self, doc: dict, label_bits: int) -> list[bytes]:
        rows = doc.get("tokens")
        if not isinstance(rows, list) or not rows:
            raise MalformedRequestError("tokens must be a non-empty list")
        return [parse_label(text, label_bits) for text in rows]

    def _trace(self, kind: str, index_name: str, node_ids: list[int]) -> None:
        if not self.tracing:
            return
        self._trace_seq += 1
        self.traces.append(
            LeakageTrace(seq=self._trace_seq, kind=kind, index=index_name, node_ids=node_ids)
        )

    # ------------------------------------------------------------------
    # persistence

    def _state_path(self) -> Path:
        return self.data_dir / "state.json"

    def _persist(self) -> None:
        if self.data_dir is None or self.main_index is None:
            return
        doc = {
            "version": STATE_VERSION,
            "iw": si.serialize_index(self.main_index),
            "iwr": si.serialize_index(self.revocation_index),
            "if": fi.serialize_file_index(self.posting_index),
            "blobs": {file_id: b64e(data) for file_id, data in self.blobs.items()},
        }
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            tmp = self._state_path().with_suffix(".tmp")
            tmp.write_text(json.dumps(doc))
            os.replace(tmp, self._state_path())
        except OSError as exc:
            raise StorageError(f"failed to persist server state: {exc}") from exc

    def _load_state(self) -> None:
        path = self._state_path()
        if not path.exists():
            return
        try:
            doc = json.loads(path.read_text())
        except (OSError, ValueError) as exc:
            raise StorageError(f"failed to load server state: {exc}") from exc
        if doc.get("version") != STATE_VERSION:
            raise StorageError(f"unsupported state version {doc.get('version')}")
        self.main_index = si.deserialize_index(doc["iw"])
        self.revocation_index = si.deserialize_index(doc["iwr"])
        self.posting_index = fi.deserialize_file_index(doc["if"])
        self.blobs = {file_id: b64d(data) for file_id, data in doc["blobs"].items()}
        log.info("loaded state: %s", self.stats())
