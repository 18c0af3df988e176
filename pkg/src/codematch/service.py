"""Read-only HTTP search service over a loaded snippet index.

All responses carry a schema version ("v": 1). Errors use machine-readable
codes so clients can branch without parsing prose: missing_query,
empty_query, invalid_k, unknown_model.
"""

from __future__ import annotations

import logging
import os

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .index import EmptyQueryError, SnippetIndex, search

LOG_ENV_VAR = "CODEMATCH_LOG"
logger = logging.getLogger("codematch.service")


def _error(code: str, status: int = 400) -> JSONResponse:
    return JSONResponse(status_code=status, content={"v": 1, "error": code})


def create_app(index: SnippetIndex) -> FastAPI:
    app = FastAPI(title="codematch", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/api/models")
    def models() -> dict:
        return {"v": 1, "models": [
            {"id": index.kind, "kind": index.kind, "ckpt_hash": index.ckpt_hash},
        ]}

    @app.get("/api/search")
    def api_search(request: Request):
        params = request.query_params
        if "q" not in params:
            return _error("missing_query")
        query = params["q"]
        try:
            k = int(params.get("k", "10"))
        except ValueError:
            return _error("invalid_k")
        if k < 1:
            return _error("invalid_k")
        model = params.get("model", index.kind)
        if model != index.kind:
            return _error("unknown_model")
        try:
            results = search(index, query, k)
        except EmptyQueryError:
            return _error("empty_query")
        logger.info("search q=%r k=%d -> %d results", query, k, len(results))
        return {"v": 1, "query": query, "results": [
            {"id": r.snippet_id, "code": r.code, "score": r.score, "rank": r.rank}
            for r in results
        ]}

    return app


def configure_logging() -> None:
    level = os.environ.get(LOG_ENV_VAR, "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def serve(index: SnippetIndex, bind: str) -> None:
    """Run the service until interrupted; bind is host:port."""
    import uvicorn

    configure_logging()
    host, _, port_str = bind.rpartition(":")
    if not host or not port_str.isdigit():
        raise ValueError(f"bind address must be host:port, got {bind!r}")
    app = create_app(index)
    uvicorn.run(app, host=host, port=int(port_str),
                log_level=os.environ.get(LOG_ENV_VAR, "info").lower())
