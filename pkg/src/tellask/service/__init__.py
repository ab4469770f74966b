"""FastAPI wrapper around the core package."""

from fastapi import FastAPI

from .routes import router


def create_app() -> FastAPI:
    app = FastAPI(title="tellask", docs_url="/docs")
    app.include_router(router)
    return app
