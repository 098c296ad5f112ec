"""Position heap over a byte string: construction and substring search.

A position heap is a trie built by inserting every suffix of the source
string, shortest suffix first.  Each insertion appends exactly one node,
so the finished heap has ``len(t) + 1`` nodes and every position of ``t``
appears in exactly one node.  Substring search walks the pattern down
from the root and splits candidate positions into two groups: positions
read off the walk path (which must be re-checked against the source) and
positions in the subtree below a full match (which are always genuine
occurrences).

Positions are 1-based throughout, matching the usual presentation of the
structure; ``t[i:j]`` in comments means the inclusive symbol range i..j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyQueryError

__all__ = [
    "PlainNode",
    "PositionHeap",
    "ph_build",
    "ph_search",
    "ph_search_candidates",
    "dump_heap",
]


@dataclass(slots=True)
class PlainNode:
    """Trie node: ``edge`` is the byte on the incoming edge, ``pos`` the
    1-based start of the suffix whose insertion created the node.  Both
    are None only at the root."""

    edge: int | None
    pos: int | None
    children: dict[int, "PlainNode"] = field(default_factory=dict)


@dataclass(slots=True)
class PositionHeap:
    root: PlainNode
    source: bytes

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children.values())
        return count


def ph_build(t: bytes) -> PositionHeap:
    """Build the position heap for ``t`` by inserting suffixes right to left.

    For the suffix starting at position i, the walk follows existing child
    edges while they match the suffix; one leaf is then appended carrying
    the first unmatched byte and pos = i.  The walk can never consume a
    whole suffix: a fully represented suffix would need a path longer than
    the number of nodes inserted so far.
    """
    root = PlainNode(None, None)
    m = len(t)
    for i in range(m, 0, -1):
        node = root
        j = i
        while j <= m:
            child = node.children.get(t[j - 1])
            if child is None:
                break
            node = child
            j += 1
        # j <= m here by the argument above, so t[j - 1] is in bounds.
        node.children[t[j - 1]] = PlainNode(edge=t[j - 1], pos=i)
    return PositionHeap(root=root, source=t)


def ph_search_candidates(heap: PositionHeap, pattern: bytes) -> tuple[list[int], list[int]]:
    """Walk ``pattern`` from the root and return the raw candidate split.

    Returns ``(needs_check, confirmed)``: positions on intermediate nodes
    of the walk path (at most ``len(pattern)`` of them, each a true
    occurrence only of the prefix matched so far) and, when the whole
    pattern matched, the final node's position plus every position in its
    subtree (always true occurrences).  No verification is performed here;
    the encrypted variant relies on exactly this unfiltered split.
    """
    if not pattern:
        raise EmptyQueryError("search pattern must be non-empty")
    needs_check: list[int] = []
    confirmed: list[int] = []
    node = heap.root
    for depth, symbol in enumerate(pattern, start=1):
        child = node.children.get(symbol)
        if child is None:
            break
        if depth == len(pattern):
            confirmed.append(child.pos)
            _collect_subtree_positions(child, confirmed)
        else:
            needs_check.append(child.pos)
        node = child
    return needs_check, confirmed


def ph_search(heap: PositionHeap, pattern: bytes) -> set[int]:
    """All 1-based positions where ``pattern`` occurs in the source string.

    Path candidates are verified by re-reading the source; a candidate
    whose window would run past the end of the string cannot be an
    occurrence and is dropped.
    """
    needs_check, confirmed = ph_search_candidates(heap, pattern)
    t = heap.source
    width = len(pattern)
    hits = {i for i in needs_check if t[i - 1 : i - 1 + width] == pattern}
    hits.update(confirmed)
    return hits


def _collect_subtree_positions(node: PlainNode, out: list[int]) -> None:
    """Append positions of all strict descendants, preorder, edges ascending."""
    stack = [node.children[key] for key in sorted(node.children, reverse=True)]
    while stack:
        current = stack.pop()
        out.append(current.pos)
        stack.extend(current.children[key] for key in sorted(current.children, reverse=True))


def _edge_repr(edge: int) -> str:
    return chr(edge) if 0x20 <= edge < 0x7F else f"\\x{edge:02x}"


def dump_heap(heap: PositionHeap) -> str:
    """Indented one-node-per-line dump (depth, edge, pos) for golden tests."""
    lines = ["* root"]
    stack = [(heap.root.children[key], 1) for key in sorted(heap.root.children, reverse=True)]
    while stack:
        node, depth = stack.pop()
        lines.append(f"{'  ' * depth}{_edge_repr(node.edge)} pos={node.pos}")
        stack.extend((node.children[key], depth + 1) for key in sorted(node.children, reverse=True))
    return "\n".join(lines)
