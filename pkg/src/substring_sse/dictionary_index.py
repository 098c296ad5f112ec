"""Position heap over a keyword dictionary.

The dictionary is flattened into one string with a separator byte between
keywords; a position heap is built over that string, every node's position
is replaced by the keyword owning it, and the subtree hanging off the
root's separator edge is removed (those suffixes start at separator
positions and belong to no keyword).  Searching returns keywords instead
of positions and performs no verification: the holder of the plaintext
does the final containment check, mirroring the encrypted deployment where
the index host cannot read the dictionary string.

Deeper separator-edged nodes are kept: their positions start inside a
keyword, so they carry valid labels and are needed as subtree results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    DuplicateKeywordError,
    EmptyQueryError,
    SeparatorInKeywordError,
    SeparatorInQueryError,
    ValidationError,
)
from .position_heap import PlainNode, _edge_repr, ph_build

SEPARATOR = 0x23  # '#'

__all__ = [
    "SEPARATOR",
    "DictionaryString",
    "MphNode",
    "ModifiedPositionHeap",
    "make_dictionary_string",
    "mph_build",
    "mph_search",
    "filter_candidates",
    "dump_dictionary_heap",
    "validate_keyword",
    "validate_query",
]


def validate_keyword(keyword: bytes, separator: int = SEPARATOR) -> None:
    if not keyword:
        raise ValidationError("keyword must be non-empty")
    if separator in keyword:
        raise SeparatorInKeywordError(
            f"keyword {keyword!r} contains the separator byte {separator:#04x}"
        )


def validate_query(pattern: bytes, separator: int = SEPARATOR) -> None:
    if not pattern:
        raise EmptyQueryError("query substring must be non-empty")
    if separator in pattern:
        raise SeparatorInQueryError(
            f"query {pattern!r} contains the separator byte {separator:#04x}"
        )


@dataclass(slots=True)
class DictionaryString:
    """Keywords joined by the separator, plus per-position ownership.

    ``owner[k]`` is the index of the keyword covering 0-based position k,
    or None at separator positions.
    """

    data: bytes
    owner: tuple[int | None, ...]
    keywords: tuple[bytes, ...]


@dataclass(slots=True)
class MphNode:
    edge: int | None
    keyword: bytes | None
    children: dict[int, "MphNode"] = field(default_factory=dict)


@dataclass(slots=True)
class ModifiedPositionHeap:
    root: MphNode
    dictionary: tuple[bytes, ...]
    separator: int

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children.values())
        return count


def make_dictionary_string(
    keywords: Sequence[bytes], separator: int = SEPARATOR
) -> DictionaryString:
    """Join ``keywords`` with the separator, keeping per-position ownership.

    Keywords must be non-empty, separator-free and pairwise distinct.
    """
    seen: set[bytes] = set()
    for keyword in keywords:
        validate_keyword(keyword, separator)
        if keyword in seen:
            raise DuplicateKeywordError(f"duplicate keyword {keyword!r}")
        seen.add(keyword)

    parts: list[bytes] = []
    owner: list[int | None] = []
    for index, keyword in enumerate(keywords):
        if index > 0:
            parts.append(bytes([separator]))
            owner.append(None)
        parts.append(keyword)
        owner.extend([index] * len(keyword))
    return DictionaryString(
        data=b"".join(parts), owner=tuple(owner), keywords=tuple(keywords)
    )


def mph_build(
    keywords: Sequence[bytes], separator: int = SEPARATOR
) -> ModifiedPositionHeap:
    """Build the keyword-labeled heap: 1 + sum(len(w)) nodes.

    Every suffix starting at a separator position begins with the
    separator byte and therefore lives in the root's separator subtree,
    which is dropped wholesale; all surviving positions have an owner.
    """
    dictionary_string = make_dictionary_string(keywords, separator)
    plain = ph_build(dictionary_string.data)

    root = MphNode(edge=None, keyword=None)
    stack: list[tuple[PlainNode, MphNode]] = []
    for edge in sorted(plain.root.children):
        if edge == separator:
            continue
        stack.append((plain.root.children[edge], root))
    while stack:
        plain_node, parent = stack.pop()
        owner_index = dictionary_string.owner[plain_node.pos - 1]
        node = MphNode(edge=plain_node.edge, keyword=keywords[owner_index])
        parent.children[plain_node.edge] = node
        stack.extend((plain_node.children[edge], node) for edge in sorted(plain_node.children))

    return ModifiedPositionHeap(
        root=root, dictionary=dictionary_string.keywords, separator=separator
    )


def mph_search(
    heap: ModifiedPositionHeap, pattern: bytes
) -> tuple[list[bytes], list[bytes]]:
    """Walk ``pattern`` and return ``(candidates, matches)`` keyword lists.

    ``matches`` (final node plus subtree on a full walk) are guaranteed to
    contain the pattern; ``candidates`` (intermediate path nodes) may not
    and must be filtered by the caller.  Nothing is filtered here.
    """
    validate_query(pattern, heap.separator)
    candidates: list[bytes] = []
    matches: list[bytes] = []
    node = heap.root
    for depth, symbol in enumerate(pattern, start=1):
        child = node.children.get(symbol)
        if child is None:
            break
        if depth == len(pattern):
            matches.append(child.keyword)
            _collect_subtree_keywords(child, matches)
        else:
            candidates.append(child.keyword)
        node = child
    return candidates, matches


def filter_candidates(pattern: bytes, candidates: Iterable[bytes]) -> set[bytes]:
    """Deduplicated subset of ``candidates`` actually containing ``pattern``."""
    return {keyword for keyword in candidates if pattern in keyword}


def _collect_subtree_keywords(node: MphNode, out: list[bytes]) -> None:
    stack = [node.children[key] for key in sorted(node.children, reverse=True)]
    while stack:
        current = stack.pop()
        out.append(current.keyword)
        stack.extend(current.children[key] for key in sorted(current.children, reverse=True))


def dump_dictionary_heap(heap: ModifiedPositionHeap) -> str:
    """Indented dump with keyword labels, matching the plain heap format."""
    lines = ["* root"]
    stack = [(heap.root.children[key], 1) for key in sorted(heap.root.children, reverse=True)]
    while stack:
        node, depth = stack.pop()
        label = node.keyword.decode("utf-8", "backslashreplace")
        lines.append(f"{'  ' * depth}{_edge_repr(node.edge)} kw={label}")
        stack.extend((node.children[key], depth + 1) for key in sorted(node.children, reverse=True))
    return "\n".join(lines)
