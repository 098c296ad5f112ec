"""The encrypted keyword heap and the operations its host runs on it.

Encryption is structure preserving: the tree shape of the plaintext heap
is kept, every non-root node gets a label (the PRF of the byte string
spelled by the edges from the root down to it) and a randomized
encryption of its keyword.  The host walks query tokens by exact label
lookup and never learns edges, keywords or positions; the same walk
applies insertion requests, whose final fresh-random label guarantees
each suffix token appends exactly one leaf.

The revocation list used for deletion is just a second index of this
type, so everything here applies to both.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .crypto import KeyBundle, prf, ske_encrypt
from .dictionary_index import ModifiedPositionHeap
from .errors import MalformedRequestError, ValidationError
from .wire import b64d, b64e, label_hex, parse_label

SERIALIZATION_VERSION = 1

__all__ = [
    "EncNode",
    "SecureIndex",
    "EncryptedSearchOutcome",
    "InsertRequest",
    "InsertResult",
    "encrypt_index",
    "encrypted_search",
    "apply_insert",
    "apply_insert_to_revocation",
    "serialize_index",
    "deserialize_index",
    "encode_outcome",
    "decode_outcome",
    "encode_insert_request",
    "decode_insert_request",
]


@dataclass(slots=True)
class EncNode:
    """Encrypted node: children are keyed by the child's full-path label."""

    node_id: int
    label: bytes | None
    enc_keyword: bytes | None
    children: dict[bytes, "EncNode"] = field(default_factory=dict)


@dataclass
class SecureIndex:
    root: EncNode
    label_bits: int
    node_count: int
    next_node_id: int


@dataclass(slots=True)
class EncryptedSearchOutcome:
    """Raw host-side search result, split exactly as the walk produced it.

    ``candidates`` holds (node_id, ciphertext) for intermediate path
    nodes (the key holder must verify these after decryption);
    ``matches`` holds the full-match node and its whole subtree, which
    are guaranteed hits.  The split plus ``matched_depth`` is what the
    wire format carries; clients treat the union as one multiset.
    """

    candidates: list[tuple[int, bytes]]
    matches: list[tuple[int, bytes]]
    matched_depth: int

    def path_node_ids(self) -> list[int]:
        """Identifiers of the nodes reached by the token walk, in order."""
        ids = [node_id for node_id, _ in self.candidates]
        if self.matches:
            ids.append(self.matches[0][0])
        return ids


@dataclass(slots=True)
class InsertRequest:
    """One keyword insertion: its ciphertext plus one token list per
    suffix, longest suffix first.  A suffix of length k carries k labels
    for its prefixes, one for the suffix extended by the separator, and a
    final label derived from a fresh random value."""

    enc_keyword: bytes
    suffix_tokens: list[tuple[bytes, ...]]

    def label_count(self) -> int:
        return sum(len(token) for token in self.suffix_tokens)


@dataclass(slots=True)
class InsertResult:
    nodes_added: int
    path_node_ids: list[int]


def encrypt_index(heap: ModifiedPositionHeap, keys: KeyBundle) -> SecureIndex:
    """Encrypt a plaintext heap, preserving its shape exactly.

    Node ids are dense integers assigned in preorder (children in edge
    order), which keeps serialization and subtree traversal reproducible.
    """
    root = EncNode(node_id=0, label=None, enc_keyword=None)
    next_id = 1
    count = 1
    # Stack of (plaintext node, encrypted parent, path bytes so far);
    # pushed in reverse edge order so pops come out ascending.
    stack = [
        (heap.root.children[edge], root, bytes([edge]))
        for edge in sorted(heap.root.children, reverse=True)
    ]
    while stack:
        plain_node, parent, path = stack.pop()
        node = EncNode(
            node_id=next_id,
            label=prf(keys.label_key, path, keys.label_bits),
            enc_keyword=ske_encrypt(keys.data_key, plain_node.keyword),
        )
        next_id += 1
        count += 1
        parent.children[node.label] = node
        stack.extend(
            (plain_node.children[edge], node, path + bytes([edge]))
            for edge in sorted(plain_node.children, reverse=True)
        )
    return SecureIndex(root=root, label_bits=keys.label_bits, node_count=count, next_node_id=next_id)


def encrypted_search(index: SecureIndex, tokens: Sequence[bytes]) -> EncryptedSearchOutcome:
    """Walk the token list from the root by exact child-label lookup.

    Intermediate hits go to ``candidates``; if every token matched, the
    final node and all its descendants go to ``matches``.  A missing
    child simply stops the walk — an unmatchable query is a normal,
    mostly-empty outcome, not an error.
    """
    if not tokens:
        raise MalformedRequestError("query token list must be non-empty")
    candidates: list[tuple[int, bytes]] = []
    matches: list[tuple[int, bytes]] = []
    depth = 0
    node = index.root
    for step, token in enumerate(tokens, start=1):
        child = node.children.get(token)
        if child is None:
            break
        depth = step
        if step == len(tokens):
            matches.append((child.node_id, child.enc_keyword))
            _collect_subtree(child, matches)
        else:
            candidates.append((child.node_id, child.enc_keyword))
        node = child
    return EncryptedSearchOutcome(candidates=candidates, matches=matches, matched_depth=depth)


def _collect_subtree(node: EncNode, out: list[tuple[int, bytes]]) -> None:
    stack = list(reversed(node.children.values()))
    while stack:
        current = stack.pop()
        out.append((current.node_id, current.enc_keyword))
        stack.extend(reversed(current.children.values()))


def _validate_request(index: SecureIndex, request: InsertRequest) -> None:
    suffix_count = len(request.suffix_tokens)
    if suffix_count < 1:
        raise MalformedRequestError("insertion request carries no suffix tokens")
    width = index.label_bits // 8
    for position, token in enumerate(request.suffix_tokens):
        # Longest suffix first: the k-th list covers the suffix of length
        # (suffix_count - k) and must hold that many labels plus two.
        expected = suffix_count - position + 2
        if len(token) != expected:
            raise MalformedRequestError(
                f"suffix token {position} has {len(token)} labels, expected {expected}"
            )
        for label in token:
            if len(label) != width:
                raise MalformedRequestError("label width does not match the index")


def apply_insert(index: SecureIndex, request: InsertRequest) -> InsertResult:
    """Insert one keyword: per suffix token, walk the longest already
    present label prefix and append a single leaf carrying the next label
    and the request's keyword ciphertext.

    The final label of every token is derived from a fresh random value,
    so a complete match is impossible for honestly generated requests;
    one node is appended per token, ``len(suffix_tokens)`` in total.
    """
    _validate_request(index, request)
    path_ids: list[int] = []
    added = 0
    for token in request.suffix_tokens:
        node = index.root
        matched = 0
        for label in token:
            child = node.children.get(label)
            if child is None:
                break
            node = child
            matched += 1
            path_ids.append(child.node_id)
        if matched == len(token):
            raise MalformedRequestError(
                "suffix token already fully present; final label must be fresh"
            )
        leaf = EncNode(
            node_id=index.next_node_id,
            label=token[matched],
            enc_keyword=request.enc_keyword,
        )
        node.children[leaf.label] = leaf
        index.next_node_id += 1
        index.node_count += 1
        added += 1
    return InsertResult(nodes_added=added, path_node_ids=path_ids)


def apply_insert_to_revocation(index: SecureIndex, request: InsertRequest) -> InsertResult:
    """Deletion is insertion into the revocation index; mechanics identical."""
    return apply_insert(index, request)


def encode_outcome(outcome: EncryptedSearchOutcome) -> dict:
    """Wire form: the split is kept (l1 = path candidates, l2 = subtree
    matches) because the bench harness and leakage tests need it; clients
    treat the union as one multiset."""
    return {
        "l1": [
            {"node_id": node_id, "ct": b64e(ct)} for node_id, ct in outcome.candidates
        ],
        "l2": [
            {"node_id": node_id, "ct": b64e(ct)} for node_id, ct in outcome.matches
        ],
        "matched_depth": outcome.matched_depth,
    }


def decode_outcome(doc: dict) -> EncryptedSearchOutcome:
    try:
        return EncryptedSearchOutcome(
            candidates=[(int(r["node_id"]), b64d(r["ct"])) for r in doc["l1"]],
            matches=[(int(r["node_id"]), b64d(r["ct"])) for r in doc["l2"]],
            matched_depth=int(doc["matched_depth"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRequestError(f"malformed search outcome: {exc}") from exc


def encode_insert_request(request: InsertRequest) -> dict:
    return {
        "enc_keyword": b64e(request.enc_keyword),
        "suffix_tokens": [
            [label_hex(label) for label in token] for token in request.suffix_tokens
        ],
    }


def decode_insert_request(doc: dict, label_bits: int) -> InsertRequest:
    try:
        enc_keyword = b64d(doc["enc_keyword"])
        token_rows = doc["suffix_tokens"]
    except (KeyError, TypeError) as exc:
        raise MalformedRequestError(f"malformed insertion request: {exc}") from exc
    if not isinstance(token_rows, list):
        raise MalformedRequestError("suffix_tokens must be a list of label lists")
    tokens = []
    for row in token_rows:
        if not isinstance(row, list):
            raise MalformedRequestError("suffix_tokens must be a list of label lists")
        tokens.append(tuple(parse_label(text, label_bits) for text in row))
    return InsertRequest(enc_keyword=enc_keyword, suffix_tokens=tokens)


def serialize_index(index: SecureIndex) -> dict:
    """Node table ordered by node id, preceded by a small header.

    The root (id 0) is implicit.  Re-serializing an unchanged index is
    byte-for-byte reproducible.
    """
    rows = []
    stack = [(child, 0) for child in index.root.children.values()]
    while stack:
        node, parent_id = stack.pop()
        rows.append(
            {
                "id": node.node_id,
                "parent": parent_id,
                "label": label_hex(node.label),
                "ct": b64e(node.enc_keyword),
            }
        )
        stack.extend((child, node.node_id) for child in node.children.values())
    rows.sort(key=lambda row: row["id"])
    return {
        "version": SERIALIZATION_VERSION,
        "gamma": index.label_bits,
        "node_count": index.node_count,
        "nodes": rows,
    }


def deserialize_index(doc: dict) -> SecureIndex:
    """Rebuild an index from its node table, validating structure.

    Ids must be dense (1..count-1), every parent must precede its child,
    and sibling labels must be distinct; violations mean a corrupt or
    forged payload.
    """
    try:
        version = doc["version"]
        label_bits = int(doc["gamma"])
        node_count = int(doc["node_count"])
        rows = doc["nodes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed index document: {exc}") from exc
    if version != SERIALIZATION_VERSION:
        raise ValidationError(f"unsupported index version {version}")
    if label_bits <= 0 or label_bits % 8:
        raise ValidationError(f"bad label width {label_bits}")
    if not isinstance(rows, list) or node_count != len(rows) + 1:
        raise ValidationError("node_count does not match the node table")

    root = EncNode(node_id=0, label=None, enc_keyword=None)
    by_id: dict[int, EncNode] = {0: root}
    previous = 0
    for row in rows:
        try:
            node_id = int(row["id"])
            parent_id = int(row["parent"])
            label = parse_label(row["label"], label_bits)
            enc_keyword = b64d(row["ct"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed node row: {exc}") from exc
        if node_id != previous + 1:
            raise ValidationError(f"node ids must be dense, got {node_id} after {previous}")
        previous = node_id
        parent = by_id.get(parent_id)
        if parent is None:
            raise ValidationError(f"node {node_id} references missing parent {parent_id}")
        if label in parent.children:
            raise ValidationError(f"duplicate sibling label under node {parent_id}")
        node = EncNode(node_id=node_id, label=label, enc_keyword=enc_keyword)
        parent.children[label] = node
        by_id[node_id] = node
    return SecureIndex(
        root=root,
        label_bits=label_bits,
        node_count=node_count,
        next_node_id=node_count,
    )
