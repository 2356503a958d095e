import pytest
from fastapi.testclient import TestClient

from causematch.advice import AdviceService
from causematch.config import load_config
from causematch.server import create_app

from test_advice import gun_story_html


@pytest.fixture()
def client(service):
    return TestClient(create_app(service))


def post_advice(client, url, html, publisher="daily-ledger"):
    return client.post("/v1/advice", json={"url": url, "html": html, "publisher": publisher})


def test_health(client, service):
    body = client.get("/v1/health").json()
    assert body["status"] == "ok"
    assert body["entity_count"] == 12
    assert body["model_version"] != "none"


def test_advice_endpoint_roundtrip(client):
    response = post_advice(client, "https://daily-ledger.example/news/http-1", gun_story_html())
    assert response.status_code == 200
    advice = response.json()
    assert advice["show"] is True
    assert advice["publisher"] == "daily-ledger"
    assert isinstance(advice["article_fingerprint"], str) and len(advice["article_fingerprint"]) == 16


def test_advice_unknown_publisher_400(client):
    response = post_advice(client, "https://x.example/a", "<p>x</p>", publisher="ghost")
    assert response.status_code == 400


def test_advice_invalid_url_400(client):
    response = post_advice(client, "not-a-url", "<p>x</p>")
    assert response.status_code == 400


def test_decisions_feed_with_filters(client):
    post_advice(client, "https://daily-ledger.example/news/feed-1", gun_story_html(seed=61))
    post_advice(client, "https://daily-ledger.example/news/feed-2", gun_story_html(seed=67))
    page = client.get("/v1/decisions").json()
    assert page["total"] == 2
    assert page["items"][0]["canonical_url"].endswith("feed-2")
    filtered = client.get("/v1/decisions", params={"show": "false"}).json()
    assert filtered["total"] == 0
    scoped = client.get("/v1/decisions", params={"publisher": "metro-sun"}).json()
    assert scoped["total"] == 0


def test_override_put_get_delete_cycle(client):
    key = "https://daily-ledger.example/news/http-ovr"
    put = client.put(
        "/v1/overrides",
        json={"key": key, "action": "suppress", "author": "qa"},
    )
    assert put.status_code == 200

    got = client.get(f"/v1/overrides/{key}")
    assert got.status_code == 200
    assert got.json()["action"] == "suppress"

    advice = post_advice(client, key, gun_story_html(seed=71)).json()
    assert advice["show"] is False and advice["provenance"] == ["override"]

    deleted = client.delete(f"/v1/overrides/{key}")
    assert deleted.json()["deleted"] is True
    assert client.get(f"/v1/overrides/{key}").status_code == 404


def test_override_keys_with_query_strings_percent_encoded(client):
    from urllib.parse import quote

    key = "https://daily-ledger.example/news/story?id=9"
    put = client.put("/v1/overrides", json={"key": key, "action": "suppress", "author": "qa"})
    assert put.status_code == 200
    encoded = quote(key, safe="")
    assert client.get(f"/v1/overrides/{encoded}").json()["key"] == key
    assert client.delete(f"/v1/overrides/{encoded}").json()["deleted"] is True


def test_force_entities_override_requires_entities(client):
    response = client.put(
        "/v1/overrides",
        json={"key": "https://x.example/e", "action": "force_entities", "author": "qa"},
    )
    assert response.status_code == 422


def test_entity_search_endpoint(client):
    items = client.get("/v1/entities", params={"q": "spark"}).json()["items"]
    assert [e["id"] for e in items] == ["spark-ventures"]
    everyone = client.get("/v1/entities").json()["items"]
    assert "midwest-mutual-aid-society" not in [e["id"] for e in everyone]


def test_admin_token_guards_override_mutations(service_env):
    config = load_config(service_env["config_path"])
    config.admin_token = "sesame"
    client = TestClient(create_app(AdviceService(config)))

    body = {"key": "https://x.example/t", "action": "suppress", "author": "qa"}
    assert client.put("/v1/overrides", json=body).status_code == 401
    ok = client.put("/v1/overrides", json=body, headers={"Authorization": "Bearer sesame"})
    assert ok.status_code == 200
    assert client.delete("/v1/overrides/https://x.example/t").status_code == 401
    assert (
        client.delete(
            "/v1/overrides/https://x.example/t", headers={"Authorization": "Bearer sesame"}
        ).status_code
        == 200
    )
    # reads stay open
    assert client.get("/v1/decisions").status_code == 200
