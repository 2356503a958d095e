"""HTTP endpoints over the advice service (JSON bodies throughout)."""

from __future__ import annotations

import hashlib

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import __version__
from .advice import AdviceRequest, AdviceService, Override
from .errors import FetchError, InvalidFetchUrl, UnknownPublisher


class AdviceBody(BaseModel):
    url: str
    publisher: str
    html: str | None = None
    user_context: dict | None = None


class OverrideBody(BaseModel):
    key: str
    action: str = Field(pattern="^(suppress|force_entities)$")
    entities: list[str] | None = None
    author: str = ""


def create_app(service: AdviceService) -> FastAPI:
    app = FastAPI(title="causematch advice service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def require_admin(request: Request) -> None:
        token = service.config.admin_token
        if not token:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="admin token required")

    @app.post("/v1/advice")
    def post_advice(body: AdviceBody) -> dict:
        try:
            advice = service.advise(
                AdviceRequest(
                    url=body.url,
                    publisher=body.publisher,
                    html=body.html,
                    user_context=body.user_context,
                )
            )
        except UnknownPublisher as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except InvalidFetchUrl as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except FetchError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        return advice.to_dict()

    @app.get("/v1/decisions")
    def get_decisions(
        publisher: str | None = None,
        show: bool | None = None,
        source: str | None = None,
        since: float | None = None,
        page: int = 1,
        page_size: int = 20,
    ) -> dict:
        return service.list_decisions(
            publisher=publisher,
            show=show,
            source=source,
            since=since,
            page=page,
            page_size=page_size,
        )

    @app.put("/v1/overrides", dependencies=[Depends(require_admin)])
    def put_override(body: OverrideBody) -> dict:
        try:
            override = Override(
                key=body.key,
                action=body.action,
                entities=body.entities or [],
                author=body.author,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        service.set_override(override)
        return {"key": override.key, "action": override.action, "entities": override.entities,
                "author": override.author, "created_at": override.created_at}

    @app.get("/v1/overrides/{key:path}")
    def get_override(key: str) -> dict:
        override = service.get_override(key)
        if override is None:
            raise HTTPException(status_code=404, detail=f"no override for {key!r}")
        return {"key": override.key, "action": override.action, "entities": override.entities,
                "author": override.author, "created_at": override.created_at}

    @app.delete("/v1/overrides/{key:path}", dependencies=[Depends(require_admin)])
    def delete_override(key: str) -> dict:
        return {"deleted": service.delete_override(key)}

    @app.get("/v1/entities")
    def get_entities(q: str = "", limit: int = 20) -> dict:
        found = service.entity_store.search(q, limit)
        return {
            "items": [
                {"id": e.id, "kind": e.kind, "name": e.name, "tags": sorted(e.tags)}
                for e in found
            ]
        }

    @app.get("/v1/health")
    def get_health() -> dict:
        model_version = "none"
        if service.model is not None:
            digest = hashlib.sha256()
            digest.update(",".join(service.model.taxonomy).encode())
            digest.update(service.model.class_log_prior.tobytes())
            model_version = digest.hexdigest()[:12]
        return {
            "status": "ok",
            "model_version": model_version,
            "entity_count": len(service.entity_store),
        }

    return app
