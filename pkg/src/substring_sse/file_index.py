"""Encrypted inverted index for the keyword-to-file phase.

A flat map from PRF-derived lookup keys to encrypted file ids.  Each
keyword gets its own lookup key (a PRF of the keyword under a dedicated
key); its postings live at that key chained over a dense counter
1, 2, ...  A query reveals only the per-keyword key, letting the host
probe counters until the first gap.  Deletion is logical: the slot's key
joins a revoked set and is skipped during probes, mirroring the
revocation-list pattern of the substring index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .crypto import KeyBundle, prf, ske_encrypt
from .dictionary_index import validate_keyword
from .errors import CounterConflictError, SseError, ValidationError
from .wire import b64d, b64e, label_hex, parse_label

SERIALIZATION_VERSION = 1

__all__ = [
    "KeywordFileIndex",
    "keyword_lookup_key",
    "posting_slot",
    "build_file_index",
    "file_lookup",
    "insert_posting",
    "delete_posting",
    "serialize_file_index",
    "deserialize_file_index",
]


@dataclass
class KeywordFileIndex:
    entries: dict[bytes, bytes] = field(default_factory=dict)
    revoked: set[bytes] = field(default_factory=set)
    label_bits: int = 256

    def entry_count(self) -> int:
        return len(self.entries)


def keyword_lookup_key(keys: KeyBundle, keyword: bytes) -> bytes:
    """Per-keyword probe key; revealing it discloses nothing about the
    keyword itself, only lets the host walk that keyword's counter chain."""
    return prf(keys.posting_key, keyword, keys.label_bits)


def posting_slot(kw_key: bytes, counter: int, label_bits: int) -> bytes:
    return prf(kw_key, counter.to_bytes(8, "big"), label_bits)


def build_file_index(
    postings: Mapping[bytes, Sequence[str]], keys: KeyBundle
) -> KeywordFileIndex:
    """Merge all keywords' counter chains into one flat map.

    Posting lists must be non-empty; file ids are encrypted under the
    data key so the host learns list lengths only when queried.
    """
    index = KeywordFileIndex(label_bits=keys.label_bits)
    for keyword, file_ids in postings.items():
        validate_keyword(keyword)
        if not file_ids:
            raise ValidationError(f"empty posting list for keyword {keyword!r}")
        kw_key = keyword_lookup_key(keys, keyword)
        for counter, file_id in enumerate(file_ids, start=1):
            slot = posting_slot(kw_key, counter, keys.label_bits)
            if slot in index.entries:
                raise SseError("lookup key collision while building the file index")
            index.entries[slot] = ske_encrypt(keys.data_key, file_id.encode("utf-8"))
    return index


def file_lookup(index: KeywordFileIndex, kw_key: bytes) -> list[bytes]:
    """Probe counters 1, 2, ... until the first absent slot.

    Revoked slots stay in the map (so the probe keeps going) but their
    values are skipped.  An unknown keyword's first probe misses, giving
    the empty list.
    """
    found: list[bytes] = []
    counter = 1
    while True:
        slot = posting_slot(kw_key, counter, index.label_bits)
        value = index.entries.get(slot)
        if value is None:
            return found
        if slot not in index.revoked:
            found.append(value)
        counter += 1


def insert_posting(
    index: KeywordFileIndex, kw_key: bytes, counter: int, enc_id: bytes
) -> None:
    """Add one posting at the given counter; the client is responsible for
    keeping counters dense per keyword."""
    if counter < 1:
        raise ValidationError(f"posting counter must be >= 1, got {counter}")
    slot = posting_slot(kw_key, counter, index.label_bits)
    if slot in index.entries:
        raise CounterConflictError(f"posting slot {counter} is already occupied")
    index.entries[slot] = enc_id


def delete_posting(index: KeywordFileIndex, lookup_key: bytes) -> None:
    """Logical deletion: future probes skip the slot, the entry remains."""
    index.revoked.add(lookup_key)


def serialize_file_index(index: KeywordFileIndex) -> dict:
    entries = sorted(
        (label_hex(slot), b64e(value)) for slot, value in index.entries.items()
    )
    return {
        "version": SERIALIZATION_VERSION,
        "gamma": index.label_bits,
        "entries": [list(pair) for pair in entries],
        "revoked": sorted(label_hex(slot) for slot in index.revoked),
    }


def deserialize_file_index(doc: dict) -> KeywordFileIndex:
    try:
        version = doc["version"]
        label_bits = int(doc["gamma"])
        rows = doc["entries"]
        revoked_rows = doc["revoked"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed file-index document: {exc}") from exc
    if version != SERIALIZATION_VERSION:
        raise ValidationError(f"unsupported file-index version {version}")
    if label_bits <= 0 or label_bits % 8:
        raise ValidationError(f"bad label width {label_bits}")
    index = KeywordFileIndex(label_bits=label_bits)
    if not isinstance(rows, list) or not isinstance(revoked_rows, list):
        raise ValidationError("file-index tables must be lists")
    for row in rows:
        try:
            key_hex, value_b64 = row
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed file-index row: {row!r}") from exc
        slot = parse_label(key_hex, label_bits)
        if slot in index.entries:
            raise ValidationError("duplicate lookup key in file index")
        index.entries[slot] = b64d(value_b64)
    for key_hex in revoked_rows:
        index.revoked.add(parse_label(key_hex, label_bits))
    return index
