"""The advice service: per-request pipeline orchestration and persistence.

Stage order, cheapest and most certain first: manual overrides, canonical
URL and fingerprint dedup, publisher rules, percolation, then the
classifier with tag and geo matching.  Deterministic stages preempt the
probabilistic ones, and every stage appends to the provenance trace so each
decision explains itself.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from urllib.parse import urlsplit

import httpx

from .classifier import NBModel, load_model_file, predict
from .config import PublisherConfig, ServiceConfig
from .errors import EmptyDocument, FetchError, UnknownPublisher
from .extraction import (
    Article,
    Gazetteer,
    GeoRef,
    RawPage,
    extract_article,
    extract_locations,
)
from .fingerprint import FingerprintIndex, simhash64
from .marketplace import EntityStore, load_entities
from .rules import RuleSet, compile_lists, evaluate, parse_rules
from .urls import resolve_canonical_url

SOURCE_OVERRIDE = "override"
SOURCE_RULE = "rule"
SOURCE_PERCOLATOR = "percolator"
SOURCE_CLASSIFIER = "classifier+tags"


@dataclass
class AdviceRequest:
    url: str
    publisher: str
    html: str | None = None
    user_context: dict | None = None


@dataclass
class Override:
    key: str  # canonical URL, or "fp:<16 hex digits>" for a fingerprint
    action: str  # suppress | force_entities
    entities: list[str] = field(default_factory=list)
    author: str = ""
    created_at: float = 0.0

    def __post_init__(self) -> None:
        if self.action not in ("suppress", "force_entities"):
            raise ValueError(f"override action must be suppress or force_entities, got {self.action!r}")
        if self.action == "force_entities" and not self.entities:
            raise ValueError("force_entities override needs at least one entity")


def fingerprint_key(fp: int) -> str:
    return f"fp:{fp:016x}"


@dataclass
class AdviceEntity:
    entity_id: str
    score: float
    source: str


@dataclass
class Advice:
    advice_id: str
    canonical_url: str
    publisher: str
    show: bool
    entities: list[AdviceEntity]
    provenance: list[str]
    article_fingerprint: int = 0
    class_label: str | None = None
    confidence: float | None = None
    entities_suppressed: bool = False
    decided_at: float = 0.0

    def to_dict(self) -> dict:
        data = asdict(self)
        # Hex keeps the 64-bit value exact for JSON consumers without i64.
        data["article_fingerprint"] = f"{self.article_fingerprint:016x}"
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Advice":
        data = dict(data)
        data["entities"] = [AdviceEntity(**e) for e in data.get("entities", [])]
        fp = data.get("article_fingerprint", 0)
        data["article_fingerprint"] = int(fp, 16) if isinstance(fp, str) else fp
        return cls(**data)


class OverrideStore:
    """Keyed manual decisions; writes serialize, reads are lock-free."""

    def __init__(self) -> None:
        self._overrides: dict[str, Override] = {}
        self._lock = threading.Lock()

    def set(self, override: Override) -> None:
        if not override.created_at:
            override.created_at = time.time()
        with self._lock:
            self._overrides[override.key] = override

    def get(self, key: str) -> Override | None:
        return self._overrides.get(key)

    def delete(self, key: str) -> bool:
        with self._lock:
            return self._overrides.pop(key, None) is not None

    def __len__(self) -> int:
        return len(self._overrides)


class DecisionLog:
    """Append-only record of served decisions, newest last.

    With a path configured, the JSONL file is the source of truth: appends
    go straight to disk and queries re-read it, so a CLI invocation and a
    running service sharing the file see each other's decisions.  Without a
    path the log is in-memory only.
    """

    def __init__(self, path: str | None = None):
        self._entries: list[dict] = []
        self._path = path
        self._lock = threading.Lock()

    def append(self, advice: Advice) -> None:
        entry = advice.to_dict()
        with self._lock:
            if self._path:
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
            else:
                self._entries.append(entry)

    def _snapshot(self) -> list[dict]:
        if self._path:
            try:
                with open(self._path, encoding="utf-8") as fh:
                    return [json.loads(line) for line in fh if line.strip()]
            except FileNotFoundError:
                return []
        return list(self._entries)

    def query(
        self,
        publisher: str | None = None,
        show: bool | None = None,
        source: str | None = None,
        since: float | None = None,
        page: int = 1,
        page_size: int = 20,
    ) -> dict:
        """Reverse-chronological page of decision summaries."""
        with self._lock:
            entries = self._snapshot()
        entries.reverse()
        if publisher is not None:
            entries = [e for e in entries if e["publisher"] == publisher]
        if show is not None:
            entries = [e for e in entries if e["show"] == show]
        if source is not None:
            entries = [e for e in entries if any(x["source"] == source for x in e["entities"])]
        if since is not None:
            entries = [e for e in entries if e["decided_at"] >= since]
        page = max(page, 1)
        start = (page - 1) * page_size
        return {
            "items": entries[start : start + page_size],
            "page": page,
            "page_size": page_size,
            "total": len(entries),
        }

    def __len__(self) -> int:
        with self._lock:
            return len(self._snapshot())


def load_class_tags(path: str | None = None) -> dict[str, list[str]]:
    if path is None:
        text = resources.files("causematch.data").joinpath("class_tags.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


def build_facts(article: Article, request: AdviceRequest) -> dict:
    """Flatten article and request state into the rules working memory."""
    parts = urlsplit(article.canonical_url)
    tags: list[str] = []
    for key in ("keywords", "article:tag"):
        for value in article.meta_tags.get(key, []):
            tag = value.strip().lower()
            if tag and tag not in tags:
                tags.append(tag)

    facts: dict = {
        "url.full": article.canonical_url,
        "url.host": parts.netloc,
        "url.path": parts.path,
        "article.word_count": article.word_count,
        "article.title": article.title,
        "article.tags": tags,
        "article.geo.places": [ref.place_name.lower() for ref in article.geo_refs],
        "publisher": request.publisher,
    }
    section = article.meta_tags.get("article:section")
    if section:
        facts["article.meta.section"] = section[0]
    for key, values in article.meta_tags.items():
        facts[f"article.meta.{key}"] = list(values)

    context = request.user_context or {}
    if "logged_in" in context:
        facts["user.logged_in"] = bool(context["logged_in"])
    for level in ("country", "region", "locality"):
        if context.get(level):
            facts[f"user.geo.{level}"] = str(context[level])
    if context.get("session_actions"):
        facts["user.session_actions"] = [str(a) for a in context["session_actions"]]
    return facts


def user_geo_refs(request: AdviceRequest) -> list[GeoRef]:
    context = request.user_context or {}
    path = [str(context[level]) for level in ("country", "region", "locality") if context.get(level)]
    if not path:
        return []
    return [GeoRef(place_name=path[-1], admin_path=path, mention_count=1)]


class AdviceService:
    """Holds the shared stores and serves advise/override/decision calls.

    Shared state (rules, entities, model) is immutable after construction;
    the override store, fingerprint index, and decision log serialize their
    own writes, so concurrent advise calls are independent.
    """

    def __init__(
        self,
        config: ServiceConfig,
        entity_store: EntityStore | None = None,
        gazetteer: Gazetteer | None = None,
        model: NBModel | None = None,
        clock=time.time,
    ):
        self.config = config
        self.clock = clock
        self.entity_store = entity_store or load_entities(config.entities_path)
        self.gazetteer = gazetteer or Gazetteer.load(config.gazetteer_path)
        self.model = model
        if self.model is None and config.model_path:
            self.model = load_model_file(config.model_path)
        self.class_tags = load_class_tags(config.class_tags_path)

        self.rulesets: dict[str, RuleSet] = {}
        for pub_id, pub in config.publishers.items():
            self.rulesets[pub_id] = self._build_ruleset(pub)

        self.overrides = OverrideStore()
        self.index = FingerprintIndex()
        if config.index_snapshot_path:
            try:
                self.index = FingerprintIndex.load(config.index_snapshot_path)
            except FileNotFoundError:
                pass
        self.decision_log = DecisionLog(config.decision_log_path)
        self._advice_store: dict[str, Advice] = {}
        self._counter = 0
        self._id_lock = threading.Lock()

    @staticmethod
    def _build_ruleset(pub: PublisherConfig) -> RuleSet:
        ruleset = RuleSet()
        if pub.rules_path:
            with open(pub.rules_path, encoding="utf-8") as fh:
                ruleset = parse_rules(fh.read())
        lists = compile_lists(pub.blacklist, pub.safelist, pub.id)
        return ruleset.merge(lists)

    def _next_id(self) -> str:
        with self._id_lock:
            self._counter += 1
            return f"adv-{self._counter:06d}"

    def _fetch(self, url: str) -> str:
        try:
            response = httpx.get(url, timeout=self.config.fetch_timeout, follow_redirects=True)
            response.raise_for_status()
            return response.text
        except httpx.HTTPError as exc:
            raise FetchError(f"could not fetch {url}: {exc}") from exc

    def _finish(self, advice: Advice, persist_fp: int | None = None) -> Advice:
        advice.entities_suppressed = bool(advice.entities) and not advice.show
        if persist_fp is not None:
            self._advice_store[advice.advice_id] = advice
            self.index.insert(persist_fp, advice.advice_id)
        self.decision_log.append(advice)
        return advice

    def _override_advice(self, override: Override, canonical: str, publisher: str, fp: int = 0) -> Advice:
        if override.action == "suppress":
            show, entities = False, []
        else:
            show = True
            entities = [AdviceEntity(eid, 0.0, SOURCE_OVERRIDE) for eid in override.entities]
        advice = Advice(
            advice_id=self._next_id(),
            canonical_url=canonical,
            publisher=publisher,
            show=show,
            entities=entities,
            provenance=["override"],
            article_fingerprint=fp,
            decided_at=self.clock(),
        )
        # Overridden results are never cached in the index: clearing the
        # override must take effect on the very next request.
        return self._finish(advice)

    def advise(self, request: AdviceRequest) -> Advice:
        if request.publisher not in self.config.publishers:
            raise UnknownPublisher(f"publisher {request.publisher!r} not configured")
        pub = self.config.publishers[request.publisher]

        html = request.html if request.html is not None else self._fetch(request.url)
        page = RawPage(request.url, html, self.clock())
        canonical = resolve_canonical_url(request.url, html)

        override = self.overrides.get(canonical)
        if override is not None:
            return self._override_advice(override, canonical, request.publisher)

        try:
            article = extract_article(page)
        except EmptyDocument:
            advice = Advice(
                advice_id=self._next_id(),
                canonical_url=canonical,
                publisher=request.publisher,
                show=False,
                entities=[],
                provenance=["extraction_failed"],
                decided_at=self.clock(),
            )
            return self._finish(advice)
        article.geo_refs = extract_locations(article.tokens, self.gazetteer)
        provenance = ["extract"]

        fp = simhash64(article.tokens)
        article.fingerprint = fp
        provenance.append("fingerprint")

        override = self.overrides.get(fingerprint_key(fp))
        if override is not None:
            return self._override_advice(override, canonical, request.publisher, fp)

        for advice_id, distance in self.index.query_within(fp, self.config.dedup_radius):
            stored = self._advice_store.get(advice_id)
            if stored is None:
                continue
            if self.clock() - stored.decided_at > self.config.dedup_ttl:
                continue  # stale: the news cycle moved on, recompute
            reused = Advice.from_dict(stored.to_dict())
            reused.provenance = list(stored.provenance) + [f"dedup_hit({distance})"]
            self.decision_log.append(reused)
            return reused

        facts = build_facts(article, request)
        ruleset = self.rulesets.get(request.publisher, RuleSet())
        state = evaluate(ruleset, facts, request.publisher)
        provenance.extend(f"rule:{rid}:{effect}" for rid, effect in state.trace)

        entities: list[AdviceEntity] = [
            AdviceEntity(eid, 0.0, SOURCE_RULE) for eid, _ in state.entity_refs
        ]
        seen_ids = {e.entity_id for e in entities}

        if state.show == "hide":
            advice = Advice(
                advice_id=self._next_id(),
                canonical_url=canonical,
                publisher=request.publisher,
                show=False,
                entities=entities,
                provenance=provenance,
                article_fingerprint=fp,
                decided_at=self.clock(),
            )
            return self._finish(advice, persist_fp=fp)

        percolated = self.entity_store.percolate(article.tokens)
        provenance.append(f"percolate({len(percolated)})")
        for eid in percolated:
            if eid not in seen_ids:
                entities.append(AdviceEntity(eid, 0.0, SOURCE_PERCOLATOR))
                seen_ids.add(eid)

        class_label: str | None = None
        confidence: float | None = None
        if self.model is not None:
            pred = predict(self.model, article.tokens, self.config.confidence_threshold)
            class_label, confidence = pred.label, pred.confidence
            provenance.append(f"classify({pred.label},{pred.confidence:.4f})")
            if pred.abstained and not entities:
                advice = Advice(
                    advice_id=self._next_id(),
                    canonical_url=canonical,
                    publisher=request.publisher,
                    show=False,
                    entities=[],
                    provenance=provenance + ["low_confidence"],
                    article_fingerprint=fp,
                    class_label=class_label,
                    confidence=confidence,
                    decided_at=self.clock(),
                )
                return self._finish(advice, persist_fp=fp)

            query_tags = set(facts["article.tags"])
            if not pred.abstained:
                query_tags.update(self.class_tags.get(pred.label, []))
            results = self.entity_store.match_by_tags(query_tags, self.config.max_entities)
            provenance.append(f"tag_match({len(results)})")
            geo = article.geo_refs or user_geo_refs(request)
            results = self.entity_store.geo_filter(results, geo, pub.geo_mode)
            provenance.append(f"geo_filter({pub.geo_mode},{len(results)})")
            for result in results:
                if result.entity_id not in seen_ids:
                    entities.append(
                        AdviceEntity(result.entity_id, result.score, SOURCE_CLASSIFIER)
                    )
                    seen_ids.add(result.entity_id)

        advice = Advice(
            advice_id=self._next_id(),
            canonical_url=canonical,
            publisher=request.publisher,
            show=bool(entities),
            entities=entities,
            provenance=provenance,
            article_fingerprint=fp,
            class_label=class_label,
            confidence=confidence,
            decided_at=self.clock(),
        )
        return self._finish(advice, persist_fp=fp)

    def reload_stores(self) -> None:
        """Rebuild entity store, model, and rule packs from their files.

        Each shared object is swapped by a single reference assignment, so
        in-flight advise calls keep the snapshot they started with.
        """
        self.entity_store = load_entities(self.config.entities_path, None)
        if self.config.model_path:
            self.model = load_model_file(self.config.model_path)
        self.rulesets = {
            pub_id: self._build_ruleset(pub) for pub_id, pub in self.config.publishers.items()
        }

    # -- override API ---------------------------------------------------------

    def set_override(self, override: Override) -> None:
        self.overrides.set(override)

    def get_override(self, key: str) -> Override | None:
        return self.overrides.get(key)

    def delete_override(self, key: str) -> bool:
        return self.overrides.delete(key)

    def list_decisions(self, **kwargs) -> dict:
        return self.decision_log.query(**kwargs)

    def save_index_snapshot(self) -> None:
        if self.config.index_snapshot_path:
            self.index.save(self.config.index_snapshot_path)
