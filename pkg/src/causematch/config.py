"""Service configuration.

YAML file with nested sections mirroring the dotted config keys
(``dedup.radius``, ``dedup.ttl``, ``classifier.confidence_threshold``) plus
per-publisher blocks.  Relative paths resolve against the config file's
directory.  The ``CAUSEMATCH_CONFIG`` environment variable overrides any
path given on the command line.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

ENV_CONFIG = "CAUSEMATCH_CONFIG"

DEFAULT_DEDUP_RADIUS = 3
DEFAULT_DEDUP_TTL = 7 * 24 * 3600.0
DEFAULT_CONFIDENCE_THRESHOLD = 0.5
DEFAULT_MAX_ENTITIES = 5
DEFAULT_FETCH_TIMEOUT = 10.0


@dataclass
class PublisherConfig:
    id: str
    rules_path: str | None = None
    blacklist: list[str] = field(default_factory=list)
    safelist: list[str] = field(default_factory=list)
    geo_mode: str = "area_of_effect"


@dataclass
class ServiceConfig:
    entities_path: str
    gazetteer_path: str
    model_path: str | None = None
    taxonomy_path: str | None = None
    class_tags_path: str | None = None
    ntee_map_path: str | None = None
    decision_log_path: str | None = None
    index_snapshot_path: str | None = None
    dedup_radius: int = DEFAULT_DEDUP_RADIUS
    dedup_ttl: float = DEFAULT_DEDUP_TTL
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD
    max_entities: int = DEFAULT_MAX_ENTITIES
    fetch_timeout: float = DEFAULT_FETCH_TIMEOUT
    admin_token: str | None = None
    publishers: dict[str, PublisherConfig] = field(default_factory=dict)


def resolve_config_path(cli_path: str | None) -> str | None:
    return os.environ.get(ENV_CONFIG) or cli_path


def _resolve(base_dir: str, path: str | None) -> str | None:
    if path is None:
        return None
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def load_config(path: str) -> ServiceConfig:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    return config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def config_from_dict(raw: dict, base_dir: str = ".") -> ServiceConfig:
    dedup = raw.get("dedup") or {}
    clf = raw.get("classifier") or {}
    market = raw.get("marketplace") or {}
    fetch = raw.get("fetch") or {}

    publishers: dict[str, PublisherConfig] = {}
    for pub_id, block in (raw.get("publishers") or {}).items():
        block = block or {}
        geo_mode = block.get("geo_mode", "area_of_effect")
        if geo_mode not in ("admin", "area_of_effect"):
            raise ValueError(f"publisher {pub_id!r}: geo_mode must be admin or area_of_effect")
        publishers[pub_id] = PublisherConfig(
            id=pub_id,
            rules_path=_resolve(base_dir, block.get("rules_path")),
            blacklist=[str(t) for t in block.get("blacklist") or []],
            safelist=[str(t) for t in block.get("safelist") or []],
            geo_mode=geo_mode,
        )

    entities_path = market.get("entities_path") or raw.get("entities_path")
    gazetteer_path = raw.get("gazetteer_path")
    if not entities_path or not gazetteer_path:
        raise ValueError("config requires marketplace.entities_path and gazetteer_path")

    return ServiceConfig(
        entities_path=_resolve(base_dir, entities_path),
        gazetteer_path=_resolve(base_dir, gazetteer_path),
        model_path=_resolve(base_dir, clf.get("model_path")),
        taxonomy_path=_resolve(base_dir, clf.get("taxonomy_path")),
        class_tags_path=_resolve(base_dir, raw.get("class_tags_path") or market.get("class_tags_path")),
        ntee_map_path=_resolve(base_dir, market.get("ntee_map_path")),
        decision_log_path=_resolve(base_dir, raw.get("decision_log_path")),
        index_snapshot_path=_resolve(base_dir, raw.get("index_snapshot_path")),
        dedup_radius=int(dedup.get("radius", DEFAULT_DEDUP_RADIUS)),
        dedup_ttl=float(dedup.get("ttl", DEFAULT_DEDUP_TTL)),
        confidence_threshold=float(clf.get("confidence_threshold", DEFAULT_CONFIDENCE_THRESHOLD)),
        max_entities=int(raw.get("max_entities", DEFAULT_MAX_ENTITIES)),
        fetch_timeout=float(fetch.get("timeout", DEFAULT_FETCH_TIMEOUT)),
        admin_token=raw.get("admin_token"),
        publishers=publishers,
    )
