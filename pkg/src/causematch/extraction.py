"""Turn raw HTML plus its fetch URL into a normalized article.

Boilerplate removal is a deterministic text-density heuristic: the document
is segmented into text blocks at block-level element boundaries, each block
is scored by ``text_length * (1 - link_text_ratio)`` (lengths count
non-whitespace characters, so pure link bars score 0), and the selected
contiguous run of blocks is the one maximizing the sum of mean-centered
scores.  Blocks adjacent to that run are pulled in while their raw score is
at least 25% of the run's mean block score.  All selection arithmetic is
integer-exact, so identical input yields identical output everywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from urllib.parse import urlsplit

from .errors import EmptyDocument
from .urls import DEFAULT_TRACKING_PARAMS, resolve_canonical_url

_WORD_RE = re.compile(r"\w+", re.UNICODE)

# Elements whose boundaries end a text block.
_BLOCK_TAGS = frozenset(
    {
        "address", "article", "aside", "blockquote", "body", "dd", "div",
        "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form",
        "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "li", "main",
        "nav", "ol", "p", "pre", "section", "table", "tbody", "td", "tfoot",
        "th", "thead", "tr", "ul",
    }
)

# Elements whose text content never reaches the reader.
_SKIP_TAGS = frozenset({"script", "style", "noscript", "template", "iframe", "svg"})

# Meta names/properties worth keeping (og:* is matched by prefix).
_META_KEYS = frozenset({"keywords", "article:tag", "article:section"})


@dataclass
class RawPage:
    """A fetched document: the advice pipeline's input unit."""

    fetch_url: str
    html: str
    fetched_at: float = 0.0


@dataclass
class GeoRef:
    """One gazetteer place mentioned by an article."""

    place_name: str
    admin_path: list[str]
    mention_count: int = 1


@dataclass
class Article:
    """Normalized article content and metadata flowing through the pipeline."""

    canonical_url: str
    title: str
    body_text: str
    tokens: list[str]
    word_count: int
    meta_tags: dict[str, list[str]]
    geo_refs: list[GeoRef] = field(default_factory=list)
    fingerprint: int = 0  # set by the fingerprint stage; 0 = not yet computed


def tokenize(text: str) -> list[str]:
    """Lowercased Unicode word tokens; punctuation dropped, digits kept."""
    return [m.group(0).lower() for m in _WORD_RE.finditer(text)]


@dataclass
class _Block:
    text: str
    total_chars: int  # non-whitespace characters
    link_chars: int  # non-whitespace characters inside anchors

    @property
    def score(self) -> int:
        # text_length * (1 - link_ratio) collapses to the non-link char count.
        return self.total_chars - self.link_chars


class _BlockSegmenter(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.blocks: list[_Block] = []
        self.meta: dict[str, list[str]] = {}
        self.title = ""
        self.first_h1 = ""
        self._parts: list[str] = []
        self._total = 0
        self._link = 0
        self._anchor_depth = 0
        self._skip_depth = 0
        self._in_title = False
        self._h1_parts: list[str] | None = None

    def _flush(self) -> None:
        text = " ".join("".join(self._parts).split())
        if text:
            self.blocks.append(_Block(text, self._total, self._link))
        self._parts = []
        self._total = 0
        self._link = 0

    def _capture_meta(self, attrs: list[tuple[str, str | None]]) -> None:
        attr_map = {k.lower(): (v or "") for k, v in attrs}
        key = (attr_map.get("name") or attr_map.get("property") or "").lower()
        content = attr_map.get("content", "").strip()
        if not key or not content:
            return
        if key == "keywords":
            values = [part.strip() for part in content.split(",") if part.strip()]
            self.meta.setdefault(key, []).extend(values)
        elif key in _META_KEYS or key.startswith("og:"):
            self.meta.setdefault(key, []).append(content)

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag == "meta":
            self._capture_meta(attrs)
            return
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
            return
        if tag == "a":
            self._anchor_depth += 1
        if tag == "title":
            self._in_title = True
        if tag in _BLOCK_TAGS:
            self._flush()
            if tag == "h1" and not self.first_h1 and self._h1_parts is None:
                self._h1_parts = []

    def handle_endtag(self, tag: str) -> None:
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag == "a":
            self._anchor_depth = max(0, self._anchor_depth - 1)
        if tag == "title":
            self._in_title = False
        if tag in _BLOCK_TAGS:
            self._flush()
            if tag == "h1" and self._h1_parts is not None:
                self.first_h1 = self.first_h1 or " ".join(
                    "".join(self._h1_parts).split()
                )
                self._h1_parts = None

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag == "meta":
            self._capture_meta(attrs)
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data: str) -> None:
        if self._skip_depth:
            return
        if self._in_title:
            if not self.title:
                self.title = " ".join(data.split())
            return
        self._parts.append(data)
        nonws = sum(1 for ch in data if not ch.isspace())
        self._total += nonws
        if self._anchor_depth:
            self._link += nonws
        if self._h1_parts is not None:
            self._h1_parts.append(data)

    def finish(self) -> None:
        try:
            self.close()
        except Exception:
            pass  # tolerant parsing: malformed tail never rejects the page
        self._flush()


def _select_blocks(blocks: list[_Block]) -> tuple[int, int]:
    """Pick the [start, end] block range forming the article body.

    Maximizes the run sum of mean-centered scores, comparing candidates with
    integer arithmetic (run sums are scaled by the block count so no division
    happens).  Ties prefer fewer blocks, then the earliest start.
    """
    n = len(blocks)
    scores = [b.score for b in blocks]
    total = sum(scores)
    prefix = [0]
    for s in scores:
        prefix.append(prefix[-1] + s)

    best: tuple[int, int, int] | None = None  # (scaled sum, -length, -start) to max
    best_range = (0, 0)
    for i in range(n):
        for j in range(i, n):
            length = j - i + 1
            scaled = n * (prefix[j + 1] - prefix[i]) - length * total
            key = (scaled, -length, -i)
            if best is None or key > best:
                best = key
                best_range = (i, j)

    start, end = best_range
    run_scores = scores[start : end + 1]
    run_total = sum(run_scores)
    run_len = len(run_scores)
    # Adjacent block joins while raw score >= 25% of the run's mean block score.
    while start > 0 and 4 * scores[start - 1] * run_len >= run_total:
        start -= 1
    while end < n - 1 and 4 * scores[end + 1] * run_len >= run_total:
        end += 1
    return start, end


def extract_article(
    page: RawPage, tracking_params: frozenset[str] = DEFAULT_TRACKING_PARAMS
) -> Article:
    """Extract body text, title, and metadata from a raw page.

    Raises :class:`EmptyDocument` when no text block scores above zero
    (empty body, or nothing but link bars).  The returned article carries no
    geo references or fingerprint; later stages fill those in.
    """
    canonical = resolve_canonical_url(page.fetch_url, page.html, tracking_params)
    segmenter = _BlockSegmenter()
    try:
        segmenter.feed(page.html)
    except Exception:
        pass  # tolerant parsing
    segmenter.finish()

    blocks = segmenter.blocks
    if not blocks or max(b.score for b in blocks) == 0:
        raise EmptyDocument(f"no scoring text block in {page.fetch_url}")

    start, end = _select_blocks(blocks)
    body_text = "\n\n".join(b.text for b in blocks[start : end + 1])
    tokens = tokenize(body_text)

    meta_tags = dict(segmenter.meta)
    path = urlsplit(canonical).path
    meta_tags["url_segments"] = [seg for seg in path.split("/") if seg]

    return Article(
        canonical_url=canonical,
        title=segmenter.title or segmenter.first_h1,
        body_text=body_text,
        tokens=tokens,
        word_count=len(tokens),
        meta_tags=meta_tags,
    )


def resolve_canonical(page: RawPage, tracking_params: frozenset[str] = DEFAULT_TRACKING_PARAMS) -> str:
    """Canonical URL for a page; see :func:`causematch.urls.resolve_canonical_url`."""
    return resolve_canonical_url(page.fetch_url, page.html, tracking_params)


class Gazetteer:
    """Flat place-name table: tokenized name -> admin path (country > region > locality)."""

    def __init__(self) -> None:
        self._entries: dict[tuple[str, ...], tuple[str, tuple[str, ...]]] = {}
        self._max_tokens = 0

    def add(self, name: str, admin_path: list[str]) -> None:
        if not name:
            raise ValueError("gazetteer entry needs a name")
        if not admin_path:
            raise ValueError(f"gazetteer entry {name!r} has an empty admin path")
        key = tuple(tokenize(name))
        if not key:
            raise ValueError(f"gazetteer entry {name!r} tokenizes to nothing")
        self._entries[key] = (name, tuple(admin_path))
        self._max_tokens = max(self._max_tokens, len(key))

    def lookup(self, tokens: tuple[str, ...]) -> tuple[str, tuple[str, ...]] | None:
        return self._entries.get(tokens)

    @property
    def max_tokens(self) -> int:
        return self._max_tokens

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def from_rows(cls, rows: list[tuple[str, str, str, str]]) -> "Gazetteer":
        gaz = cls()
        for name, country, region, locality in rows:
            admin_path = [level for level in (country, region, locality) if level]
            gaz.add(name, admin_path)
        return gaz

    @classmethod
    def load(cls, path: str) -> "Gazetteer":
        """Load a UTF-8 tab-separated fixture: name, country, region, locality."""
        gaz = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                fields = line.split("\t")
                fields += [""] * (4 - len(fields))
                name, country, region, locality = (f.strip() for f in fields[:4])
                admin_path = [level for level in (country, region, locality) if level]
                try:
                    gaz.add(name, admin_path)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        return gaz


def extract_locations(tokens: list[str], gazetteer: Gazetteer) -> list[GeoRef]:
    """Greedy longest-match scan of the token stream against the gazetteer.

    Matched tokens are consumed, so a longer name suppresses any shorter
    name overlapping it.  Mentions aggregate per place, ordered by first
    occurrence.
    """
    refs: dict[str, GeoRef] = {}
    order: list[str] = []
    i = 0
    n = len(tokens)
    max_len = gazetteer.max_tokens
    while i < n:
        matched = False
        for length in range(min(max_len, n - i), 0, -1):
            entry = gazetteer.lookup(tuple(tokens[i : i + length]))
            if entry is not None:
                name, admin_path = entry
                if name in refs:
                    refs[name].mention_count += 1
                else:
                    refs[name] = GeoRef(name, list(admin_path), 1)
                    order.append(name)
                i += length
                matched = True
                break
        if not matched:
            i += 1
    return [refs[name] for name in order]
