from __future__ import annotations

import random
from pathlib import Path

import pytest
import yaml

from causematch.advice import AdviceService
from causematch.classifier import load_taxonomy, save_model_file, train
from causematch.config import load_config
from causematch.extraction import Gazetteer
from causematch.marketplace import load_entities

from genutil import article_html, make_nb_corpus, story_tokens

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def gazetteer() -> Gazetteer:
    return Gazetteer.load(str(FIXTURES / "gazetteer.tsv"))


@pytest.fixture(scope="session")
def entity_store():
    return load_entities(str(FIXTURES / "entities.json"))


@pytest.fixture(scope="session")
def news_taxonomy() -> list[str]:
    return load_taxonomy()


@pytest.fixture(scope="session")
def service_model(news_taxonomy):
    rng = random.Random(1234)
    docs = make_nb_corpus(
        rng, news_taxonomy, docs_per_class=12,
        core_size=30, shared_size=200, core_frac=0.6, doc_len=50,
    )
    return train(docs, news_taxonomy, alpha=1.0)


@pytest.fixture(scope="session")
def service_env(tmp_path_factory, service_model) -> dict:
    """Config file plus model on disk, pointing at the checked-in fixtures."""
    root = tmp_path_factory.mktemp("service")
    model_path = root / "model.bin"
    save_model_file(service_model, str(model_path))
    config = {
        "dedup": {"radius": 3, "ttl": 7 * 24 * 3600},
        "classifier": {"confidence_threshold": 0.5, "model_path": str(model_path)},
        "marketplace": {"entities_path": str(FIXTURES / "entities.json")},
        "gazetteer_path": str(FIXTURES / "gazetteer.tsv"),
        "max_entities": 5,
        "publishers": {
            "daily-ledger": {
                "rules_path": str(FIXTURES / "demo.rules"),
                "blacklist": ["celebrity-gossip"],
                "safelist": [],
                "geo_mode": "area_of_effect",
            },
            "metro-sun": {"geo_mode": "admin"},
        },
    }
    config_path = root / "config.yaml"
    config_path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return {"root": root, "config_path": str(config_path), "model_path": str(model_path)}


@pytest.fixture()
def service(service_env) -> AdviceService:
    return AdviceService(load_config(service_env["config_path"]))


def _sentences(tokens: list[str], per_sentence: int = 12) -> list[str]:
    return [
        " ".join(tokens[i : i + per_sentence])
        for i in range(0, len(tokens), per_sentence)
    ]


def build_e2e_corpus(taxonomy: list[str], seed: int = 99) -> list[tuple[str, str]]:
    """Twenty (url, html) fixtures covering every pipeline path."""
    rng = random.Random(seed)

    def body(cls: str, n: int, extra: list[str] = ()) -> list[str]:
        return story_tokens(rng.randrange(10**9), cls, n, extra)

    corpus: list[tuple[str, str]] = []

    # 14 ordinary cause stories across the taxonomy, mentioning Chicago.
    tagged_classes = [
        "stop-gun-violence", "crime-prevention", "food-security", "education",
        "homelessness", "environment", "health", "housing", "mental-health",
        "veterans-support", "water-sanitation", "disaster-relief",
        "child-welfare", "public-health",
    ]
    for i, cls in enumerate(tagged_classes):
        url = f"https://daily-ledger.example/news/{cls}-{i}"
        html = article_html(
            _sentences(body(cls, 160, ["chicago"])),
            title=f"Story {i} about {cls}",
            keywords=[cls.replace("-", " "), "chicago"],
        )
        corpus.append((url, html))

    # Direct organization mentions for the percolator.
    corpus.append(
        (
            "https://daily-ledger.example/news/spark-profile",
            article_html(
                _sentences(body("international-aid", 150))
                + ["Spark Ventures is headquartered in Chicago and works in Nicaragua and Zambia."],
                title="Nonprofit profile",
            ),
        )
    )
    corpus.append(
        (
            "https://daily-ledger.example/crime/peace-walk",
            article_html(
                _sentences(body("stop-gun-violence", 150, ["chicago"]))
                + ["The Chicago Peace Collective led the march."],
                title="Peace walk",
            ),
        )
    )

    # Rule paths: too short, sports section, blacklist tag.
    corpus.append(
        (
            "https://daily-ledger.example/news/brief-note",
            article_html(_sentences(body("health", 40)), title="Brief"),
        )
    )
    corpus.append(
        (
            "https://daily-ledger.example/sports/game-recap",
            article_html(_sentences(body("health", 160)), title="Game recap"),
        )
    )
    corpus.append(
        (
            "https://daily-ledger.example/news/red-carpet",
            article_html(
                _sentences(body("arts-culture", 160)),
                title="Red carpet",
                keywords=["celebrity-gossip"],
            ),
        )
    )

    # Out-of-vocabulary gibberish: classifier abstains, nothing matches.
    gibberish = [f"zzqx{rng.randrange(10**6)}" for _ in range(150)]
    corpus.append(
        (
            "https://daily-ledger.example/news/oov-noise",
            article_html(_sentences(gibberish), title="Noise"),
        )
    )

    assert len(corpus) == 20
    return corpus


@pytest.fixture(scope="session")
def e2e_corpus(news_taxonomy) -> list[tuple[str, str]]:
    return build_e2e_corpus(news_taxonomy)
