"""Read-only JSON API over a loaded session, for the explorer UI and scripts.

Every endpoint is a read and every response is reproducible from the CLI on
the same inputs; the server adds no computation of its own. Malformed
parameters come back as 400 with a diagnostic body, unknown routes or ids as
404. The session is immutable, so concurrent requests need no locking.
"""

import functools
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import metrics
from .dag import SubgraphSelector
from .errors import AbsalignError
from .propagate import wd_to_dict
from .query import DEFAULT_SPLIT_MIN_MASS, filter_instances, parse_query
from .session import Session


def create_app(session: Session, ui_dir=None) -> FastAPI:
    app = FastAPI(title="absalign", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.exception_handler(AbsalignError)
    async def _domain_error(request: Request, exc: AbsalignError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    dag = session.dag

    @app.get("/api/dag")
    def get_dag():
        return dag.to_dict()

    @app.get("/api/levels")
    def get_levels():
        return {"levels": session.level_summary()}

    @app.get("/api/instances")
    def get_instances(
        query: str | None = None,
        limit: int = Query(default=50, ge=1),
        offset: int = Query(default=0, ge=0),
        min_mass: float = Query(default=DEFAULT_SPLIT_MIN_MASS, ge=0.0),
    ):
        wds = session.weighted()
        if query:
            parsed = parse_query(query, dag, split_min_mass=min_mass)
            ids, fraction = filter_instances(parsed, wds, dag)
        else:
            ids = sorted(wd.instance_id for wd in wds)
            fraction = 1.0 if ids else 0.0
        return {
            "query": query,
            "total": len(wds),
            "matched": len(ids),
            "fraction": fraction,
            "limit": limit,
            "offset": offset,
            "ids": ids[offset:offset + limit],
        }

    @app.get("/api/instances/{instance_id}/weighted")
    def get_weighted(instance_id: str):
        wd = session.weighted_for(instance_id)
        if wd is None:
            return JSONResponse(
                status_code=404, content={"error": f"no instance {instance_id!r}"}
            )
        payload = wd_to_dict(wd)
        truth = session.truths.get(instance_id)
        if truth is not None:
            payload["truth"] = truth
        return payload

    def _maybe_grouped(fn, group_by):
        if group_by is None:
            return fn(session.weighted())
        return metrics.group_by_concept(
            fn, session.weighted(), dag, session.truths, group_by
        )

    @app.get("/api/metrics/accuracy")
    def get_accuracy(
        from_level: int = Query(alias="from"),
        to_level: int = Query(alias="to"),
        group_by: int | None = Query(default=None),
    ):
        fn = functools.partial(
            metrics.accuracy_alignment,
            dag=dag, truths=session.truths,
            from_level=from_level, to_level=to_level,
        )
        return _maybe_grouped(fn, group_by).to_json_dict()

    @app.get("/api/metrics/uncertainty")
    def get_uncertainty(
        from_level: int = Query(alias="from"),
        to_level: int = Query(alias="to"),
        base: str = Query(default="2", pattern="^(2|e)$"),
        group_by: int | None = Query(default=None),
    ):
        fn = functools.partial(
            metrics.uncertainty_alignment,
            dag=dag, from_level=from_level, to_level=to_level,
            base=2 if base == "2" else "e",
        )
        return _maybe_grouped(fn, group_by).to_json_dict()

    @app.get("/api/metrics/preference")
    def get_preference(
        left: str,
        right: str,
        value_kind: str = Query(default="aggregate", pattern="^(value|aggregate)$"),
    ):
        try:
            left_sel = SubgraphSelector.from_text(left)
            right_sel = SubgraphSelector.from_text(right)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        report = metrics.subgraph_preference(
            session.weighted(), dag, left_sel, right_sel, value_kind=value_kind
        )
        return report.to_json_dict()

    @app.get("/api/metrics/concept-confusion")
    def get_confusion(
        pairs: str = Query(default="co-supported"),
        top: int | None = Query(default=None, ge=1),
        pair_mode: str = Query(default="raw", pattern="^(raw|normalized)$"),
        exclude_related: bool = Query(default=False),
        base: str = Query(default="2", pattern="^(2|e)$"),
    ):
        pair_spec = _parse_pairs_param(pairs)
        report = metrics.concept_confusion(
            session.weighted(), dag,
            pairs=pair_spec, pair_mode=pair_mode,
            exclude_related=exclude_related, top=top,
            base=2 if base == "2" else "e",
        )
        return report.to_json_dict()

    ui_path = _find_ui_dir(ui_dir)
    if ui_path is not None:
        app.mount("/", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app


def _parse_pairs_param(text):
    if text == "co-supported":
        return "co-supported"
    if text.startswith("level:"):
        try:
            return ("level", int(text.split(":", 1)[1]))
        except ValueError as exc:
            raise AbsalignError(f"bad pairs parameter {text!r}") from exc
    pairs = []
    for chunk in text.split(","):
        sides = chunk.split("|")
        if len(sides) != 2 or not sides[0] or not sides[1]:
            raise AbsalignError(
                f"bad pairs parameter {chunk!r}; expected co-supported, level:L, or a|b,c|d"
            )
        pairs.append((sides[0], sides[1]))
    return pairs


def _find_ui_dir(ui_dir):
    if ui_dir:
        path = Path(ui_dir)
        return path if path.is_dir() else None
    default = Path("frontend") / "dist"
    return default if default.is_dir() else None


def serve(session: Session, host="127.0.0.1", port=8000, ui_dir=None):
    import uvicorn

    app = create_app(session, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0
