"""Canonical URL resolution and normalization."""

from __future__ import annotations

from html.parser import HTMLParser
from urllib.parse import parse_qsl, urlencode, urljoin, urlsplit, urlunsplit

from .errors import InvalidFetchUrl

# Query parameters that identify a click, not a document.
DEFAULT_TRACKING_PARAMS = frozenset(
    {
        "utm_source",
        "utm_medium",
        "utm_campaign",
        "utm_term",
        "utm_content",
        "fbclid",
        "gclid",
    }
)


def require_absolute_http(url: str) -> None:
    parts = urlsplit(url)
    if parts.scheme.lower() not in ("http", "https") or not parts.netloc:
        raise InvalidFetchUrl(f"not an absolute http(s) URL: {url!r}")


def strip_fragment(url: str) -> str:
    parts = urlsplit(url)
    return urlunsplit((parts.scheme, parts.netloc, parts.path, parts.query, ""))


def _lowercase_host(netloc: str) -> str:
    # Userinfo, when present, stays case-sensitive; only the host:port is folded.
    if "@" in netloc:
        userinfo, _, host = netloc.rpartition("@")
        return f"{userinfo}@{host.lower()}"
    return netloc.lower()


def normalize_url(url: str, tracking_params: frozenset[str] = DEFAULT_TRACKING_PARAMS) -> str:
    """Normalize a URL for use as a duplicate-collapsing key.

    Drops the fragment and tracking parameters, sorts the remaining query
    pairs by key, and lowercases scheme and host.  Idempotent.
    """
    require_absolute_http(url)
    parts = urlsplit(url)
    pairs = [
        (k, v)
        for k, v in parse_qsl(parts.query, keep_blank_values=True)
        if k not in tracking_params
    ]
    pairs.sort(key=lambda kv: kv[0])
    query = urlencode(pairs)
    return urlunsplit(
        (parts.scheme.lower(), _lowercase_host(parts.netloc), parts.path, query, "")
    )


class _CanonicalLinkFinder(HTMLParser):
    """Pulls the first <link rel="canonical" href=...> out of a document."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.href: str | None = None

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag != "link" or self.href is not None:
            return
        attr_map = {k.lower(): (v or "") for k, v in attrs}
        rels = attr_map.get("rel", "").lower().split()
        if "canonical" in rels and attr_map.get("href", "").strip():
            self.href = attr_map["href"].strip()


def find_canonical_href(html: str) -> str | None:
    """Return the first canonical link href declared in the document, if any."""
    finder = _CanonicalLinkFinder()
    try:
        finder.feed(html)
        finder.close()
    except Exception:
        # Tolerant parsing: malformed markup never rejects the document.
        pass
    return finder.href


def resolve_canonical_url(
    fetch_url: str,
    html: str,
    tracking_params: frozenset[str] = DEFAULT_TRACKING_PARAMS,
) -> str:
    """Resolve the canonical URL for a fetched page.

    A declared canonical link wins: it is resolved against the fetch URL and
    only its fragment is stripped.  Without one, the fetch URL is normalized
    via :func:`normalize_url`.
    """
    require_absolute_http(fetch_url)
    href = find_canonical_href(html)
    if href is not None:
        return strip_fragment(urljoin(fetch_url, href))
    return normalize_url(fetch_url, tracking_params)
