"""Acceptance suite: one test per exit criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
PASS/FAIL lines.  The oracle campaign (1,000 seeded trials with live
inserts, deletes and planted sentinels) runs once in a module fixture;
both the equivalence criterion and the privacy-hygiene criterion judge
its outcome.
"""

import base64
import json
import random
import time

import pytest

from substring_sse.bench import (
    build_rig,
    controlled_ds_queries,
    generate_dictionary,
    linear_fit_r2,
    measure,
)
from substring_sse.client import make_insert_request, make_query_token
from substring_sse.errors import RevokedKeywordError
from substring_sse.position_heap import ph_build, ph_search, ph_search_candidates
from substring_sse.wire import label_hex

from helpers import make_rig

ABC = b"abc"


def _verdict(name: str, ok: bool) -> None:
    print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


# ----------------------------------------------------------------------
# worked-example golden criteria


def test_position_heap_worked_example():
    started = time.perf_counter()
    heap = ph_build(b"bbabbbaaba")
    needs_check, confirmed = ph_search_candidates(heap, b"bb")
    hits = ph_search(heap, b"bb")
    elapsed = time.perf_counter() - started
    ok = (
        needs_check == [9]
        and confirmed == [5, 1, 4]
        and hits == {5, 1, 4}
        and elapsed < 1.0
    )
    _verdict("position heap candidate split and search on bbabbbaaba", ok)


def test_outsource_and_query_worked_example(fig_dictionary, keys):
    client, server = make_rig(
        fig_dictionary,
        {b"bbab": ["f1"], b"aba": ["f2"]},
        {"f1": b"one", "f2": b"two"},
        keys=keys,
    )
    stats = server.stats()
    suggestions = [s.keyword for s in client.suggest("ab")]
    tokens = [label_hex(t) for t in make_query_token(b"ab", keys)]
    raw = server.handle_substring_query({"tokens": tokens})
    ok = (
        stats["iw_nodes"] == 11
        and suggestions == ["aba", "bbab"]
        and len(raw["main"]["l1"]) == 1
        and len(raw["main"]["l2"]) == 2
        and len(raw["main"]["l1"]) + len(raw["main"]["l2"]) == 3
    )
    _verdict("three-keyword dictionary: 11 nodes, suggest(ab), raw 1+2 split", ok)


def test_insertion_worked_example(fig_dictionary, keys):
    client, server = make_rig(fig_dictionary, keys=keys)
    request = make_insert_request(b"ba", keys)
    ack = client.insert_keyword(b"ba")
    suggestions = [s.keyword for s in client.suggest("ba")]
    ok = (
        request.label_count() == 7
        and len(request.suffix_tokens) == 2
        and ack["nodes_added"] == 2
        and "ba" in suggestions
    )
    _verdict("inserting 'ba': 7 labels + 1 ciphertext, 2 nodes added, queryable", ok)


# ----------------------------------------------------------------------
# oracle campaign (shared by two criteria)

SENTINEL_KEYWORD = b"sentinelkeywordxyzzy"
SENTINEL_QUERY = b"tinelk"
SENTINEL_FILE = b"SENTINEL FILE BYTES that must never travel in the clear"

TRIALS = 1000


def _random_word(rng, low=1, high=8):
    return bytes(rng.choice(ABC) for _ in range(rng.randint(low, high)))


def _random_dictionary(rng):
    words, seen = [], set()
    for _ in range(rng.randint(1, 200)):
        word = _random_word(rng)
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _random_pattern(rng, live):
    if live and rng.random() < 0.5:
        keyword = rng.choice(sorted(live))
        width = min(len(keyword), rng.randint(1, 6))
        start = rng.randrange(len(keyword) - width + 1)
        return keyword[start : start + width]
    return bytes(rng.choice(ABC) for _ in range(rng.randint(1, 6)))


@pytest.fixture(scope="module")
def campaign():
    needles = []
    for plain in (SENTINEL_KEYWORD, SENTINEL_QUERY, SENTINEL_FILE):
        needles.extend((plain, plain.hex().encode(), base64.b64encode(plain)))

    mismatches = []
    sentinel_hits = []
    messages = 0
    started = time.perf_counter()

    for trial in range(TRIALS):
        rng = random.Random(20_000 + trial)
        dictionary = _random_dictionary(rng)
        postings = {dictionary[0]: ["f1"]}
        files = {"f1": SENTINEL_FILE + b" trial " + str(trial).encode()}
        client, _ = make_rig(dictionary, postings, files, record=True)

        live = set(dictionary)
        deleted: set[bytes] = set()

        client.insert_keyword(SENTINEL_KEYWORD)
        live.add(SENTINEL_KEYWORD)

        operations = (
            ["query"] * 20
            + ["sentinel_query"]
            + ["insert"] * rng.randint(0, 9)
            + ["delete"] * rng.randint(0, 5)
        )
        rng.shuffle(operations)

        def check_query(pattern: bytes):
            nonlocal mismatches
            got = [s.keyword.encode() for s in client.suggest(pattern)]
            expected = sorted(kw for kw in live if pattern in kw)
            if got != expected:
                mismatches.append((trial, pattern, got, expected))

        for op in operations:
            if op == "query":
                check_query(_random_pattern(rng, live))
            elif op == "sentinel_query":
                check_query(SENTINEL_QUERY)
            elif op == "insert":
                word = _random_word(rng)
                if word in deleted:
                    try:
                        client.insert_keyword(word)
                        mismatches.append((trial, word, "revoked insert accepted", None))
                    except RevokedKeywordError:
                        pass
                else:
                    client.insert_keyword(word)
                    live.add(word)
            else:
                pool = sorted(live) if (live and rng.random() < 0.7) else None
                word = rng.choice(pool) if pool else _random_word(rng)
                client.delete_keyword(word)
                deleted.add(word)
                live.discard(word)

        if client.fetch_and_decrypt(client.files_for(dictionary[0])[0]) != files["f1"]:
            mismatches.append((trial, "file roundtrip", None, None))

        for method, path, body in client.transport.outbound:
            messages += 1
            for needle in needles:
                if needle in body or needle in path.encode():
                    sentinel_hits.append((trial, path, needle[:24]))

    return {
        "elapsed": time.perf_counter() - started,
        "mismatches": mismatches,
        "sentinel_hits": sentinel_hits,
        "messages": messages,
    }


def test_oracle_equivalence_campaign(campaign):
    ok = not campaign["mismatches"] and campaign["elapsed"] < 60.0
    print(
        f"\ncampaign: {TRIALS} trials, {campaign['messages']} outbound messages, "
        f"{campaign['elapsed']:.1f}s, {len(campaign['mismatches'])} mismatches"
    )
    if campaign["mismatches"]:
        print("first mismatch:", campaign["mismatches"][0])
    _verdict("1000-trial oracle equivalence campaign under 60 s", ok)


def test_privacy_hygiene(campaign):
    ok = not campaign["sentinel_hits"] and campaign["messages"] > TRIALS * 20
    if campaign["sentinel_hits"]:
        print("sentinel leaked:", campaign["sentinel_hits"][:3])
    _verdict("no planted plaintext in any outbound message of the campaign", ok)


# ----------------------------------------------------------------------
# structural law


def test_node_count_law():
    rng = random.Random(31337)
    ok = True
    for _ in range(100):
        words, seen = [], set()
        for _ in range(rng.randint(1, 80)):
            word = _random_word(rng)
            if word not in seen:
                seen.add(word)
                words.append(word)
        client, server = make_rig(words)
        if server.stats()["iw_nodes"] != 1 + sum(map(len, words)):
            ok = False
            break
    _verdict("index node count equals 1 + total keyword length (100 dictionaries)", ok)


# ----------------------------------------------------------------------
# scaling shapes


def test_query_latency_flat_in_dictionary_size():
    started = time.perf_counter()
    latencies = {}
    for size in (5_000, 40_000):
        dictionary = generate_dictionary(size, seed=97)
        client, _ = build_rig(dictionary)
        queries = controlled_ds_queries(dictionary, 5, count=30, seed=97)
        cursor = [0]

        def one_query():
            client.suggest(queries[cursor[0] % len(queries)])
            cursor[0] += 1

        mean, _ = measure(one_query, repetitions=120, warmup=10)
        latencies[size] = mean
    ratio = latencies[40_000] / latencies[5_000]
    elapsed = time.perf_counter() - started
    print(
        f"\nmean suggest latency: {latencies[5_000]*1e6:.0f}us @5k, "
        f"{latencies[40_000]*1e6:.0f}us @40k, ratio {ratio:.2f}, setup+run {elapsed:.0f}s"
    )
    ok = ratio <= 2.0 and elapsed < 600
    _verdict("suggest latency at m=40k within 2x of m=5k at fixed 5 matches", ok)


def test_insert_time_linear_in_label_count():
    lowercase = b"abcdefghijklmnopqrstuvwxyz"
    dictionary = generate_dictionary(5_000, seed=131)
    client, _ = build_rig(dictionary)
    rng = random.Random(131)
    label_counts, means = [], []
    for z in range(2, 21):
        def one_insert():
            keyword = bytes(rng.choice(lowercase) for _ in range(z))
            client.insert_keyword(keyword)

        mean, _ = measure(one_insert, repetitions=150, warmup=5)
        label_counts.append(z * (z + 5) // 2)
        means.append(mean)
    r2 = linear_fit_r2(label_counts, means)
    print(f"\ninsert time vs label count r^2 = {r2:.4f}")
    _verdict("insert time grows linearly with the request label count (r^2 >= 0.9)", r2 >= 0.9)


# ----------------------------------------------------------------------
# leakage determinism


def test_leakage_determinism(fig_dictionary, keys):
    client, server = make_rig(fig_dictionary, keys=keys, tracing=True, record=True)
    client.suggest("ab")
    client.suggest("ab")
    client.suggest("abba")
    bodies = [body for _, path, body in client.transport.outbound if "substring" in path]
    first, second, extended = bodies

    traces = server.leakage_since(0)["traces"]
    query_paths = [t for t in traces if t["kind"] == "query_path" and t["index"] == "iw"]

    short_tokens = json.loads(first)["tokens"]
    long_tokens = json.loads(extended)["tokens"]
    ok = (
        first == second
        and query_paths[0]["node_ids"] == query_paths[1]["node_ids"]
        and long_tokens[: len(short_tokens)] == short_tokens
        and len(long_tokens) == 4
    )
    _verdict("identical queries are byte-identical; extension shares the prefix", ok)
