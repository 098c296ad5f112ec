"""Command-line front end for the data user.

Exit codes: 0 ok, 1 usage, 2 validation, 3 network.  Client state (key
file, posting counters, revoked set, local file-name manifest) lives in
one directory, selected by --state or SSE_CLIENT_STATE.
"""

from __future__ import annotations

import argparse
import os
import re
import secrets
import sys
from pathlib import Path

from .client import UserClient
from .errors import PortInUseError, ServerUnreachableError, SseError, ValidationError
from .gateway import serve_gateway

_WORD = re.compile(rb"[^\s#]+")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_dictionary(path: Path) -> list[bytes]:
    keywords: list[bytes] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word:
            keywords.append(word.encode("utf-8"))
    return keywords


def _scan_postings(
    files_dir: Path, dictionary: list[bytes]
) -> tuple[dict[bytes, list[str]], dict[str, bytes], dict[str, str]]:
    """Derive postings by word-token scan: a keyword maps to a file when it
    appears as a whitespace-delimited token of the file's content.  File
    ids are freshly random so names never reach the host."""
    keyword_set = set(dictionary)
    postings: dict[bytes, list[str]] = {}
    blobs: dict[str, bytes] = {}
    names: dict[str, str] = {}
    for path in sorted(p for p in files_dir.iterdir() if p.is_file()):
        file_id = secrets.token_hex(16)
        content = path.read_bytes()
        blobs[file_id] = content
        names[file_id] = path.name
        for token in set(_WORD.findall(content)):
            if token in keyword_set:
                postings.setdefault(token, []).append(file_id)
    return postings, blobs, names


def _cmd_init(args) -> int:
    client = UserClient.create(
        args.state,
        args.server,
        security_bits=args.security_bits,
        expected_index_size=args.expected_size,
    )
    print(f"initialised client state in {args.state} for server {client.state.server_url}")
    return 0


def _cmd_outsource(args) -> int:
    client = UserClient.load(args.state)
    dictionary = _load_dictionary(Path(args.dict))
    postings, blobs, names = _scan_postings(Path(args.files), dictionary)
    ack = client.outsource(dictionary, postings, blobs)
    client.state.file_names = names
    client.save_state()
    print(
        f"outsourced: {ack['iw_nodes']} index nodes, {ack['if_entries']} postings, "
        f"{ack['n']} files"
    )
    for file_id, name in sorted(names.items(), key=lambda item: item[1]):
        print(f"  {file_id}  {name}")
    return 0


def _cmd_suggest(args) -> int:
    client = UserClient.load(args.state)
    for suggestion in client.suggest(args.substring):
        print(suggestion.keyword)
    return 0


def _cmd_files(args) -> int:
    client = UserClient.load(args.state)
    for file_id in client.files_for(args.keyword):
        name = client.state.file_names.get(file_id, "")
        print(f"{file_id}  {name}".rstrip())
    return 0


def _cmd_get(args) -> int:
    client = UserClient.load(args.state)
    data = client.fetch_and_decrypt(args.file_id)
    Path(args.out).write_bytes(data)
    print(f"wrote {len(data)} bytes to {args.out}")
    return 0


def _cmd_insert(args) -> int:
    client = UserClient.load(args.state)
    ack = client.insert_keyword(args.keyword)
    print(f"inserted, {ack['nodes_added']} nodes added")
    return 0


def _cmd_delete(args) -> int:
    client = UserClient.load(args.state)
    ack = client.delete_keyword(args.keyword)
    print(f"deleted, {ack['nodes_added']} revocation nodes added")
    return 0


def _cmd_gateway(args) -> int:
    client = UserClient.load(args.state)
    serve_gateway(client, args.port, ui_dir=args.ui)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sse-client", description="Substring-of-keyword query client")
    parser.add_argument(
        "--state",
        default=os.environ.get("SSE_CLIENT_STATE", ".sse-client"),
        help="client state directory (env SSE_CLIENT_STATE)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="generate keys and point at a server")
    p.add_argument("--server", required=True, help="server base URL")
    p.add_argument("--security-bits", type=int, default=128, choices=(128, 256))
    p.add_argument("--expected-size", type=int, default=2**20,
                   help="expected index size used to pick the label width")
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("outsource", help="encrypt and ship dictionary, postings and files")
    p.add_argument("--dict", required=True, help="dictionary file, one keyword per line")
    p.add_argument("--files", required=True, help="directory of plaintext files")
    p.set_defaults(func=_cmd_outsource)

    p = sub.add_parser("suggest", help="phase 1: keywords containing a substring")
    p.add_argument("substring")
    p.set_defaults(func=_cmd_suggest)

    p = sub.add_parser("files", help="phase 2: file ids for a keyword")
    p.add_argument("keyword")
    p.set_defaults(func=_cmd_files)

    p = sub.add_parser("get", help="fetch and decrypt one file")
    p.add_argument("file_id")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_get)

    p = sub.add_parser("insert", help="add a keyword to the hosted dictionary")
    p.add_argument("keyword")
    p.set_defaults(func=_cmd_insert)

    p = sub.add_parser("delete", help="delete a keyword via the revocation list")
    p.add_argument("keyword")
    p.set_defaults(func=_cmd_delete)

    p = sub.add_parser("gateway", help="serve the local plaintext gateway (and UI)")
    p.add_argument("--port", type=int, default=8600)
    p.add_argument("--ui", default=None, help="directory of static UI assets to serve")
    p.set_defaults(func=_cmd_gateway)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ServerUnreachableError, PortInUseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
