"""Marketplace entities: loading, percolation, tag scoring, geo filtering.

Entities carry two kinds of geography: where the organization sits
(admin_location) and where its work lands (areas_of_effect).  Queries must
say which one they mean.  Tag matching scores by summed idf over the
query/entity tag overlap, the simplest ranking that is stable and fully
hand-checkable.  NTEE codes are used only to exclude whole categories,
never to boost.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources

from .errors import EntityLoadError
from .extraction import GeoRef, tokenize

GEO_MODE_NONE = "none"
GEO_MODE_ADMIN = "admin"
GEO_MODE_AREA = "area_of_effect"

_KINDS = frozenset({"organization", "cause", "campaign"})
_NTEE_RE = re.compile(r"^[A-Z][0-9]{1,4}$")


@dataclass(frozen=True)
class Place:
    name: str
    country: str = ""
    region: str = ""
    locality: str = ""

    def levels(self) -> set[str]:
        """Lowercased comparable names: admin path levels plus the place name."""
        values = {self.name, self.country, self.region, self.locality}
        return {v.lower() for v in values if v}


@dataclass
class MarketplaceEntity:
    id: str
    kind: str
    name: str
    aliases: list[str] = field(default_factory=list)
    ntee_code: str | None = None
    tags: set[str] = field(default_factory=set)
    taxonomy_labels: set[str] = field(default_factory=set)
    admin_location: Place | None = None
    areas_of_effect: list[Place] = field(default_factory=list)
    excluded: bool = False


@dataclass(frozen=True)
class StoredQuery:
    entity_id: str
    phrase: tuple[str, ...]  # tokenized name or alias, length >= 1


@dataclass(frozen=True)
class MatchResult:
    entity_id: str
    score: float
    matched_terms: tuple[str, ...]
    geo_mode: str = GEO_MODE_NONE


def load_ntee_map(path: str | None = None) -> dict[str, dict]:
    """Code-prefix map {prefix: {category, excluded}}; ships with IX excluded."""
    if path is None:
        text = resources.files("causematch.data").joinpath("ntee_categories.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


def ntee_excluded(code: str | None, ntee_map: dict[str, dict]) -> bool:
    if not code:
        return False
    best = None
    for prefix, info in ntee_map.items():
        if code.startswith(prefix) and (best is None or len(prefix) > len(best[0])):
            best = (prefix, info)
    return bool(best and best[1].get("excluded"))


def _parse_place(obj: dict) -> Place:
    return Place(
        name=str(obj.get("name", "")),
        country=str(obj.get("country", "")),
        region=str(obj.get("region", "")),
        locality=str(obj.get("locality", "")),
    )


def parse_entity(obj: dict) -> MarketplaceEntity:
    """Build an entity from one fixture object; ValueError describes defects."""
    if not isinstance(obj, dict):
        raise ValueError("entity must be an object")
    entity_id = str(obj.get("id") or "").strip()
    if not entity_id:
        raise ValueError("missing id")
    kind = str(obj.get("kind") or "").strip()
    if kind not in _KINDS:
        raise ValueError(f"entity {entity_id!r}: kind must be one of {sorted(_KINDS)}")
    name = str(obj.get("name") or "").strip()
    if not name:
        raise ValueError(f"entity {entity_id!r}: name is required")
    ntee_code = obj.get("ntee_code")
    if ntee_code is not None:
        ntee_code = str(ntee_code).strip().upper()
        if not _NTEE_RE.match(ntee_code):
            raise ValueError(f"entity {entity_id!r}: bad ntee_code {ntee_code!r}")
    admin = obj.get("admin_location")
    areas = obj.get("areas_of_effect") or []
    return MarketplaceEntity(
        id=entity_id,
        kind=kind,
        name=name,
        aliases=[str(a) for a in obj.get("aliases") or []],
        ntee_code=ntee_code,
        tags={str(t).strip().lower() for t in obj.get("tags") or [] if str(t).strip()},
        taxonomy_labels={str(t) for t in obj.get("taxonomy_labels") or []},
        admin_location=_parse_place(admin) if admin else None,
        areas_of_effect=[_parse_place(p) for p in areas],
        excluded=bool(obj.get("excluded", False)),
    )


class EntityStore:
    """Immutable-after-build view over marketplace entities.

    Excluded entities (flagged in the fixture, or in an excluded NTEE
    category) are kept for inspection but never indexed: they cannot appear
    in percolation, tag matching, or geo filtering output.
    """

    def __init__(self, entities: list[MarketplaceEntity], ntee_map: dict[str, dict] | None = None):
        self.ntee_map = ntee_map if ntee_map is not None else load_ntee_map()
        self.entities: dict[str, MarketplaceEntity] = {}
        for entity in entities:
            if ntee_excluded(entity.ntee_code, self.ntee_map):
                entity.excluded = True
            self.entities[entity.id] = entity

        active = [e for e in self.entities.values() if not e.excluded]
        self._active_count = len(active)
        self._tag_index: dict[str, set[str]] = {}
        for entity in active:
            for tag in entity.tags:
                self._tag_index.setdefault(tag, set()).add(entity.id)
        self._idf: dict[str, float] = {
            tag: math.log(self._active_count / len(ids))
            for tag, ids in self._tag_index.items()
        }

        self.stored_queries: list[StoredQuery] = []
        self._phrase_heads: dict[str, list[StoredQuery]] = {}
        for entity in active:
            seen: set[tuple[str, ...]] = set()
            for surface in [entity.name, *entity.aliases]:
                phrase = tuple(tokenize(surface))
                if not phrase or phrase in seen:
                    continue
                seen.add(phrase)
                query = StoredQuery(entity.id, phrase)
                self.stored_queries.append(query)
                self._phrase_heads.setdefault(phrase[0], []).append(query)

    def __len__(self) -> int:
        return len(self.entities)

    def get(self, entity_id: str) -> MarketplaceEntity | None:
        return self.entities.get(entity_id)

    def idf(self, tag: str) -> float:
        return self._idf.get(tag, 0.0)

    def search(self, text: str, limit: int = 20) -> list[MarketplaceEntity]:
        """Substring lookup over names/aliases/ids for admin tooling."""
        needle = text.strip().lower()
        found = [
            e
            for e in self.entities.values()
            if not e.excluded
            and (
                not needle
                or needle in e.id.lower()
                or needle in e.name.lower()
                or any(needle in a.lower() for a in e.aliases)
            )
        ]
        found.sort(key=lambda e: e.id)
        return found[:limit]

    # -- matching operations ------------------------------------------------

    def percolate(self, tokens: list[str]) -> list[str]:
        """Entity ids whose stored name/alias phrase occurs in the token stream.

        Each entity reported once, ordered by the position of its first
        mention (ties by ascending id).
        """
        first_hit: dict[str, int] = {}
        for pos, token in enumerate(tokens):
            for query in self._phrase_heads.get(token, ()):
                if query.entity_id in first_hit:
                    continue
                if tuple(tokens[pos : pos + len(query.phrase)]) == query.phrase:
                    first_hit[query.entity_id] = pos
        return [eid for eid, _ in sorted(first_hit.items(), key=lambda kv: (kv[1], kv[0]))]

    def match_by_tags(self, query_tags: set[str], limit: int) -> list[MatchResult]:
        """Top entities by summed idf over the query/entity tag overlap."""
        scores: dict[str, float] = {}
        matched: dict[str, list[str]] = {}
        for tag in query_tags:
            for entity_id in self._tag_index.get(tag, ()):
                scores[entity_id] = scores.get(entity_id, 0.0) + self._idf[tag]
                matched.setdefault(entity_id, []).append(tag)
        results = [
            MatchResult(entity_id, score, tuple(sorted(matched[entity_id])))
            for entity_id, score in scores.items()
            if score > 0.0
        ]
        results.sort(key=lambda r: (-r.score, r.entity_id))
        return results[: max(limit, 0)]

    def geo_filter(
        self, results: list[MatchResult], article_geo: list[GeoRef], mode: str
    ) -> list[MatchResult]:
        """Keep results whose entity geography touches any article place.

        A place "touches" a GeoRef when they share any admin-path level
        (country, region, or locality, compared case-insensitively).  In
        area_of_effect mode an entity with no declared areas passes: empty
        means global reach.  An article without geo references filters
        nothing.
        """
        if mode not in (GEO_MODE_ADMIN, GEO_MODE_AREA):
            raise ValueError(f"geo mode must be admin or area_of_effect, got {mode!r}")
        if not article_geo:
            return [replace(r, geo_mode=GEO_MODE_NONE) for r in results]

        article_levels: set[str] = set()
        for ref in article_geo:
            article_levels.add(ref.place_name.lower())
            article_levels.update(level.lower() for level in ref.admin_path)

        kept: list[MatchResult] = []
        for result in results:
            entity = self.entities.get(result.entity_id)
            if entity is None or entity.excluded:
                continue
            if mode == GEO_MODE_ADMIN:
                places = [entity.admin_location] if entity.admin_location else []
                passes = any(p.levels() & article_levels for p in places)
            else:
                passes = not entity.areas_of_effect or any(
                    p.levels() & article_levels for p in entity.areas_of_effect
                )
            if passes:
                kept.append(replace(result, geo_mode=mode))
        return kept


def load_entities(path: str, ntee_map: dict[str, dict] | None = None) -> EntityStore:
    """Load a JSON entity fixture, collecting all problems before failing."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return build_store(data, ntee_map)


def build_store(data: list[dict], ntee_map: dict[str, dict] | None = None) -> EntityStore:
    if not isinstance(data, list):
        raise EntityLoadError([(EntityLoadError.MALFORMED, "fixture must be a JSON array")])
    problems: list[tuple[str, str]] = []
    entities: list[MarketplaceEntity] = []
    seen: set[str] = set()
    for i, obj in enumerate(data):
        try:
            entity = parse_entity(obj)
        except ValueError as exc:
            problems.append((EntityLoadError.MALFORMED, f"entry {i}: {exc}"))
            continue
        if entity.id in seen:
            problems.append((EntityLoadError.DUPLICATE_ID, f"entry {i}: duplicate id {entity.id!r}"))
            continue
        seen.add(entity.id)
        entities.append(entity)
    if problems:
        raise EntityLoadError(problems)
    return EntityStore(entities, ntee_map)
