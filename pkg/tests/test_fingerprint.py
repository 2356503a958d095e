import random

import pytest
from hypothesis import given, strategies as st

from causematch.errors import EmptyDocument, FormatError, InvalidRadius
from causematch.fingerprint import FingerprintIndex, hamming, simhash64

from genutil import make_tokens, replace_tokens

u64 = st.integers(min_value=0, max_value=(1 << 64) - 1)


def test_simhash_deterministic():
    tokens = ["gun", "violence", "chicago", "gun"]
    assert simhash64(tokens) == simhash64(list(tokens))


def test_simhash_order_invariant():
    rng = random.Random(3)
    tokens = make_tokens(rng, 120)
    shuffled = list(tokens)
    rng.shuffle(shuffled)
    assert simhash64(tokens) == simhash64(shuffled)


def test_simhash_empty_rejected():
    with pytest.raises(EmptyDocument):
        simhash64([])


def test_simhash_small_edit_small_distance():
    rng = random.Random(11)
    within = 0
    for _ in range(1000)[:200]:
        doc = make_tokens(rng, 200, distinct=40)
        if hamming(simhash64(doc), simhash64(replace_tokens(rng, doc, 2))) <= 3:
            within += 1
    assert within >= 0.9 * 200


def test_simhash_locality_monotone_in_replacement_rate():
    rng = random.Random(37)
    means = []
    for rate in (0.0, 0.02, 0.1, 0.3):
        total = 0
        for _ in range(150):
            doc = make_tokens(rng, 300)
            edited = replace_tokens(rng, doc, int(rate * len(doc))) if rate else doc
            total += hamming(simhash64(doc), simhash64(edited))
        means.append(total / 150)
    assert means == sorted(means)


def test_unrelated_400_token_docs_mean_distance():
    rng = random.Random(41)
    total = 0
    pairs = 1000
    for _ in range(pairs):
        total += hamming(
            simhash64(make_tokens(rng, 400, distinct=80)),
            simhash64(make_tokens(rng, 400, distinct=80)),
        )
    assert abs(total / pairs - 32) <= 3


def test_hamming_examples_and_oracle():
    assert hamming(0xDEADBEEF, 0xDEADBEEF) == 0
    assert hamming(0, (1 << 64) - 1) == 64
    rng = random.Random(5)
    for _ in range(200):
        a, b = rng.getrandbits(64), rng.getrandbits(64)
        oracle = sum(((a >> i) & 1) != ((b >> i) & 1) for i in range(64))
        assert hamming(a, b) == oracle


@given(u64, u64, u64)
def test_hamming_is_a_metric(a, b, c):
    assert hamming(a, b) == hamming(b, a)
    assert (hamming(a, b) == 0) == (a == b)
    assert hamming(a, c) <= hamming(a, b) + hamming(b, c)


def test_insert_then_query_exact():
    index = FingerprintIndex()
    index.insert(0xABCD, "adv-1")
    assert index.query_within(0xABCD, 0) == [("adv-1", 0)]
    assert index.query_within(0xABCD, 3) == [("adv-1", 0)]


def test_insert_overwrites_last_write_wins():
    index = FingerprintIndex()
    index.insert(42, "A")
    index.insert(42, "B")
    assert index.query_within(42, 0) == [("B", 0)]


def test_empty_index_returns_nothing():
    assert FingerprintIndex().query_within(123, 3) == []


def test_invalid_radius_rejected():
    index = FingerprintIndex()
    with pytest.raises(InvalidRadius):
        index.query_within(0, 9)
    with pytest.raises(InvalidRadius):
        index.query_within(0, -1)


def test_bulk_insert_all_retrievable():
    rng = random.Random(17)
    index = FingerprintIndex()
    fps = {rng.getrandbits(64): f"adv-{i}" for i in range(10_000)}
    for fp, advice_id in fps.items():
        index.insert(fp, advice_id)
    for fp, advice_id in fps.items():
        assert (advice_id, 0) in index.query_within(fp, 0)


def _linear_scan(entries: dict[int, str], fp: int, k: int) -> list[tuple[str, int]]:
    hits = sorted(
        (hamming(fp, other), other, advice_id)
        for other, advice_id in entries.items()
        if hamming(fp, other) <= k
    )
    return [(advice_id, d) for d, _, advice_id in hits]


def test_query_matches_linear_scan_oracle():
    rng = random.Random(23)
    entries: dict[int, str] = {}
    index = FingerprintIndex()
    for i in range(2000):
        fp = rng.getrandbits(64)
        entries[fp] = f"adv-{i}"
        index.insert(fp, f"adv-{i}")
    near_seed = list(entries)[:50]
    queries = [rng.getrandbits(64) for _ in range(100)]
    # Also probe right next to stored values so hits actually occur.
    for fp in near_seed:
        flips = rng.randint(0, 4)
        q = fp
        for _ in range(flips):
            q ^= 1 << rng.randrange(64)
        queries.append(q)
    for q in queries:
        for k in (0, 1, 2, 3, 5, 8):
            assert index.query_within(q, k) == _linear_scan(entries, q, k)


def test_query_results_monotone_in_radius():
    rng = random.Random(29)
    index = FingerprintIndex()
    base = rng.getrandbits(64)
    for i in range(200):
        fp = base
        for _ in range(rng.randint(0, 8)):
            fp ^= 1 << rng.randrange(64)
        index.insert(fp, f"adv-{i}")
    previous: set = set()
    for k in range(9):
        current = set(index.query_within(base, k))
        assert {advice_id for advice_id, _ in previous} <= {a for a, _ in current}
        previous = current


def test_results_sorted_by_distance_then_fingerprint():
    index = FingerprintIndex()
    index.insert(0b0111, "far")  # distance 3 from 0
    index.insert(0b0001, "near")  # distance 1
    index.insert(0b0010, "near2")  # distance 1, larger fp
    result = index.query_within(0, 3)
    assert result == [("near", 1), ("near2", 1), ("far", 3)]


def test_snapshot_roundtrip():
    rng = random.Random(31)
    index = FingerprintIndex()
    for i in range(500):
        index.insert(rng.getrandbits(64), f"adv-{i}")
    restored = FingerprintIndex.from_bytes(index.to_bytes())
    assert sorted(restored.items()) == sorted(index.items())


def test_snapshot_bad_magic_and_truncation():
    with pytest.raises(FormatError):
        FingerprintIndex.from_bytes(b"NOTMAGIC" + b"\x00" * 16)
    index = FingerprintIndex()
    index.insert(7, "adv-x")
    blob = index.to_bytes()
    with pytest.raises(FormatError):
        FingerprintIndex.from_bytes(blob[:-3])
