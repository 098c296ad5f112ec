"""Desk-scale performance harness.

Reproduces the shape (not the absolute numbers) of the reference
experiments: index size and build time against dictionary size, query
time against dictionary size and against the number of matching
keywords, and insertion time against keyword length.  By default the
whole pipeline runs in one process so timings exclude network delay;
--http switches to a live server.

Rows are CSV with the fixed schema
``phase,m,d_s,keyword_len,metric,value,unit``; timing rows aggregate at
least ``repetitions`` samples and report mean and standard deviation.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import statistics
import string
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .client import HttpTransport, InProcessTransport, UserClient
from .crypto import keygen
from .errors import TargetUnachievableError, ValidationError
from .secure_index import serialize_index
from .server import CloudServer

__all__ = [
    "LengthDistribution",
    "BenchConfig",
    "generate_dictionary",
    "controlled_ds_queries",
    "build_rig",
    "measure",
    "linear_fit_r2",
    "run_suite",
    "main",
]


@dataclass(frozen=True)
class LengthDistribution:
    """Truncated geometric keyword-length sampler (defaults cover 2..20)."""

    stop_probability: float = 0.18
    min_len: int = 2
    max_len: int = 20

    def sample(self, rng: random.Random) -> int:
        length = self.min_len
        while length < self.max_len and rng.random() > self.stop_probability:
            length += 1
        return length


@dataclass
class BenchConfig:
    dictionary_sizes: list[int] = field(default_factory=lambda: [1000, 5000])
    lengths: LengthDistribution = field(default_factory=LengthDistribution)
    query_lengths: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    matched_keyword_targets: list[int] = field(default_factory=lambda: [5])
    insert_lengths: list[int] = field(default_factory=lambda: list(range(2, 21)))
    repetitions: int = 30
    queries_per_point: int = 30
    seed: int = 1

    def __post_init__(self):
        if self.repetitions < 30:
            raise ValidationError("timing rows need at least 30 repetitions")

    @classmethod
    def from_file(cls, path: str) -> "BenchConfig":
        with open(path) as handle:
            doc = json.load(handle)
        lengths = doc.pop("keyword_length", None)
        config = cls(**doc)
        if lengths:
            config.lengths = LengthDistribution(
                stop_probability=lengths.get("stop_probability", 0.18),
                min_len=lengths.get("min", 2),
                max_len=lengths.get("max", 20),
            )
        return config


def generate_dictionary(
    size: int, seed: int, lengths: LengthDistribution = LengthDistribution()
) -> list[bytes]:
    """``size`` distinct lowercase keywords, deterministic under the seed."""
    if size < 1:
        raise ValidationError("dictionary size must be >= 1")
    rng = random.Random(seed)
    seen: set[bytes] = set()
    out: list[bytes] = []
    while len(out) < size:
        length = lengths.sample(rng)
        word = bytes(rng.choice(string.ascii_lowercase.encode()) for _ in range(length))
        if word not in seen:
            seen.add(word)
            out.append(word)
    return out


def controlled_ds_queries(
    dictionary: Sequence[bytes],
    target: int,
    count: int = 20,
    seed: int = 1,
    window_lengths: Sequence[int] = (2, 3, 4, 5, 6),
    max_samples: int = 50_000,
) -> list[bytes]:
    """Substrings whose brute-force match count over the dictionary equals
    ``target`` exactly.

    Samples random windows of dictionary keywords and verifies each by a
    full containment scan, so the guarantee is by construction.
    """
    if target < 1:
        raise ValidationError("matching-keyword target must be >= 1")
    rng = random.Random(seed)
    found: list[bytes] = []
    seen: set[bytes] = set()
    for _ in range(max_samples):
        if len(found) >= count:
            return found
        keyword = rng.choice(dictionary)
        width = rng.choice(window_lengths)
        if len(keyword) < width:
            continue
        start = rng.randrange(len(keyword) - width + 1)
        window = keyword[start : start + width]
        if window in seen:
            continue
        seen.add(window)
        matches = sum(1 for candidate in dictionary if window in candidate)
        if matches == target:
            found.append(window)
    if found:
        return found
    raise TargetUnachievableError(
        f"no substring with exactly {target} matches found in {max_samples} samples"
    )


def build_rig(
    dictionary: Sequence[bytes], server_url: str | None = None, tracing: bool = False
) -> tuple[UserClient, CloudServer | None]:
    """Client plus (for in-process mode) a memory-only server, with the
    dictionary already outsourced.  Postings/blobs are a tiny placeholder;
    the substring phase is what the suite measures."""
    keys = keygen(128, max(2, len(dictionary)) * 32)
    if server_url is None:
        server = CloudServer(data_dir=None, tracing=tracing)
        client = UserClient(keys, InProcessTransport(server))
    else:
        server = None
        client = UserClient(keys, HttpTransport(server_url))
    postings = {dictionary[0]: ["f1"]} if dictionary else {}
    blobs = {"f1": b"bench placeholder"} if dictionary else {}
    client.outsource(list(dictionary), postings, blobs)
    return client, server


def measure(
    operation: Callable[[], None], repetitions: int, warmup: int = 3
) -> tuple[float, float]:
    """Mean and standard deviation of the wall time of one call, seconds."""
    for _ in range(warmup):
        operation()
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        operation()
        samples.append(time.perf_counter() - start)
    return statistics.fmean(samples), statistics.pstdev(samples)


def linear_fit_r2(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Coefficient of determination of the least-squares line through
    (xs, ys)."""
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    if sxx == 0:
        return 0.0
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    if ss_tot == 0:
        return 1.0
    return 1.0 - ss_res / ss_tot


def _row(phase, m, d_s, keyword_len, metric, value, unit) -> dict:
    return {
        "phase": phase,
        "m": m,
        "d_s": d_s,
        "keyword_len": keyword_len,
        "metric": metric,
        "value": value,
        "unit": unit,
    }


def run_suite(config: BenchConfig, server_url: str | None = None) -> list[dict]:
    """Run every phase of the suite and return the CSV rows."""
    rows: list[dict] = []
    for size in config.dictionary_sizes:
        dictionary = generate_dictionary(size, config.seed, config.lengths)

        start = time.perf_counter()
        client, server = build_rig(dictionary, server_url)
        outsource_time = time.perf_counter() - start
        rows.append(_row("outsource_time", size, "", "", "total", outsource_time, "seconds"))
        if server is not None:
            index_bytes = len(json.dumps(serialize_index(server.main_index)))
            rows.append(_row("index_bytes", size, "", "", "size", index_bytes, "bytes"))

        for target in config.matched_keyword_targets:
            queries = controlled_ds_queries(
                dictionary,
                target,
                count=config.queries_per_point,
                seed=config.seed,
                window_lengths=config.query_lengths,
            )
            cursor = [0]

            def one_query():
                client.suggest(queries[cursor[0] % len(queries)])
                cursor[0] += 1

            mean, std = measure(one_query, max(config.repetitions, len(queries)))
            rows.append(_row("query_time", size, target, "", "mean", mean, "seconds"))
            rows.append(_row("query_time", size, target, "", "std", std, "seconds"))

    insert_size = min(config.dictionary_sizes) if config.dictionary_sizes else 1000
    dictionary = generate_dictionary(insert_size, config.seed, config.lengths)
    client, _ = build_rig(dictionary, server_url)
    rng = random.Random(config.seed + 1)
    for keyword_len in config.insert_lengths:
        def one_insert():
            keyword = bytes(
                rng.choice(string.ascii_lowercase.encode()) for _ in range(keyword_len)
            )
            client.insert_keyword(keyword)

        mean, std = measure(one_insert, config.repetitions)
        rows.append(_row("insert_time", insert_size, "", keyword_len, "mean", mean, "seconds"))
        rows.append(_row("insert_time", insert_size, "", keyword_len, "std", std, "seconds"))
    return rows


def write_csv(rows: list[dict], path: str) -> None:
    fields = ["phase", "m", "d_s", "keyword_len", "metric", "value", "unit"]
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sse-bench", description="Performance harness")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the suite and write a CSV report")
    p.add_argument("--config", help="JSON config file; defaults are desk-scale")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--http", default=None, help="measure over the wire against this server URL")
    args = parser.parse_args(argv)

    config = BenchConfig.from_file(args.config) if args.config else BenchConfig()
    rows = run_suite(config, server_url=args.http)
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
