"""SimHash fingerprints and near-duplicate lookup.

Fingerprints are 64-bit SimHashes over token unigrams weighted by
in-document frequency, with FNV-1a as the feature hash.  The index answers
"anything within Hamming distance k?" using four 16-bit block tables: any
two fingerprints within distance 3 agree exactly on at least one of the
four blocks (pigeonhole), so block buckets give a complete candidate set
for k <= 3.  Radii 4..8 fall back to a linear scan.
"""

from __future__ import annotations

import struct
import threading
from collections import Counter
from functools import lru_cache

from .errors import EmptyDocument, FormatError, InvalidRadius

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

SNAPSHOT_MAGIC = b"PGMFPIX1"


@lru_cache(maxsize=1 << 18)
def _fnv1a64(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def simhash64(tokens: list[str]) -> int:
    """64-bit SimHash of a token list (bag-of-words, frequency weighted).

    Bit i is 1 iff the signed per-bit counter is strictly positive; a tie
    resolves to 0.  Raises :class:`EmptyDocument` for an empty token list.
    """
    if not tokens:
        raise EmptyDocument("cannot fingerprint an empty token list")
    counters = [0] * 64
    for token, weight in Counter(tokens).items():
        h = _fnv1a64(token)
        for i in range(64):
            if (h >> i) & 1:
                counters[i] += weight
            else:
                counters[i] -= weight
    fp = 0
    for i in range(64):
        if counters[i] > 0:
            fp |= 1 << i
    return fp


def hamming(a: int, b: int) -> int:
    """Number of differing bits between two 64-bit fingerprints."""
    return ((a ^ b) & _MASK64).bit_count()


def _blocks(fp: int) -> tuple[int, int, int, int]:
    return (
        fp & 0xFFFF,
        (fp >> 16) & 0xFFFF,
        (fp >> 32) & 0xFFFF,
        (fp >> 48) & 0xFFFF,
    )


class FingerprintIndex:
    """Maps fingerprints to advice record ids with near-match queries.

    Many readers may query concurrently; writes serialize on a lock and
    queries never observe a partially inserted entry.
    """

    MAX_RADIUS = 8
    BLOCK_RADIUS = 3  # exact via block tables; beyond this, linear scan

    def __init__(self) -> None:
        self._entries: dict[int, str] = {}
        self._tables: tuple[dict[int, set[int]], ...] = ({}, {}, {}, {})
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def insert(self, fp: int, advice_id: str) -> None:
        """Add or overwrite (last write wins) the record for a fingerprint."""
        fp &= _MASK64
        with self._lock:
            for table, block in zip(self._tables, _blocks(fp)):
                table.setdefault(block, set()).add(fp)
            self._entries[fp] = advice_id

    def get(self, fp: int) -> str | None:
        return self._entries.get(fp & _MASK64)

    def query_within(self, fp: int, k: int) -> list[tuple[str, int]]:
        """All entries within Hamming distance k, ascending by distance.

        Ties on distance break by ascending fingerprint value.  Raises
        :class:`InvalidRadius` for k outside 0..8.
        """
        if k < 0 or k > self.MAX_RADIUS:
            raise InvalidRadius(f"radius {k} outside supported range 0..{self.MAX_RADIUS}")
        fp &= _MASK64
        with self._lock:
            if k <= self.BLOCK_RADIUS:
                candidates: set[int] = set()
                for table, block in zip(self._tables, _blocks(fp)):
                    candidates |= table.get(block, set())
                scan = [(c, self._entries[c]) for c in candidates if c in self._entries]
            else:
                scan = list(self._entries.items())
        hits = []
        for other, advice_id in scan:
            d = hamming(fp, other)
            if d <= k:
                hits.append((d, other, advice_id))
        hits.sort(key=lambda h: (h[0], h[1]))
        return [(advice_id, d) for d, _, advice_id in hits]

    def items(self) -> list[tuple[int, str]]:
        with self._lock:
            return list(self._entries.items())

    # -- snapshot persistence ------------------------------------------------

    def to_bytes(self) -> bytes:
        """Serialize as magic + (big-endian u64 fp, u32 length, UTF-8 id) records."""
        out = [SNAPSHOT_MAGIC]
        with self._lock:
            records = sorted(self._entries.items())
        for fp, advice_id in records:
            raw = advice_id.encode("utf-8")
            out.append(struct.pack(">QI", fp, len(raw)))
            out.append(raw)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "FingerprintIndex":
        if len(blob) < len(SNAPSHOT_MAGIC) or blob[: len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
            raise FormatError("bad fingerprint index magic")
        index = cls()
        pos = len(SNAPSHOT_MAGIC)
        while pos < len(blob):
            if pos + 12 > len(blob):
                raise FormatError("truncated fingerprint index record header")
            fp, length = struct.unpack_from(">QI", blob, pos)
            pos += 12
            if pos + length > len(blob):
                raise FormatError("truncated fingerprint index record body")
            advice_id = blob[pos : pos + length].decode("utf-8")
            pos += length
            index.insert(fp, advice_id)
        return index

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path: str) -> "FingerprintIndex":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())
