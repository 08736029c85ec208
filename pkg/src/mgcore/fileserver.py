"""Capability-based blob storage.

Anyone may upload; the response is a 22-character capability (16 random
bytes, base64url) that is the only handle to the blob.  There is no
listing endpoint and identical uploads get distinct capabilities, so
knowledge of a capability never leaks through the server.  Authentication
is deliberately absent; a per-IP rate limit is the only abuse control.

    POST /files               raw body -> {"capability": ...}
    GET  /files/{capability}  -> raw bytes
"""
from __future__ import annotations

import base64
import re
import secrets
import tempfile
import threading
import time
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

DEFAULT_MAX_BYTES = 25 * 1024 * 1024

_CAPABILITY_RE = re.compile(r"\A[A-Za-z0-9_-]{22}\Z")


def new_capability(rng: Callable[[int], bytes] = secrets.token_bytes) -> str:
    return base64.urlsafe_b64encode(rng(16)).rstrip(b"=").decode("ascii")


class _RateLimiter:
    """Sliding-window request counter per client address."""

    def __init__(self, limit_per_minute: int) -> None:
        self.limit = limit_per_minute
        self._events: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def allow(self, client: str) -> bool:
        now = time.monotonic()
        with self._lock:
            window = [t for t in self._events.get(client, []) if now - t < 60.0]
            if len(window) >= self.limit:
                self._events[client] = window
                return False
            window.append(now)
            self._events[client] = window
            return True


def create_fileserver_app(
    storage_dir: str | Path,
    *,
    max_bytes: int = DEFAULT_MAX_BYTES,
    rate_limit_per_minute: Optional[int] = 600,
    rng: Callable[[int], bytes] = secrets.token_bytes,
) -> FastAPI:
    storage = Path(storage_dir)
    storage.mkdir(parents=True, exist_ok=True)
    limiter = _RateLimiter(rate_limit_per_minute) if rate_limit_per_minute else None
    app = FastAPI(title="file server", docs_url=None, redoc_url=None)

    def _error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"code": code, "message": message})

    @app.post("/files", status_code=201)
    async def upload(request: Request):
        if limiter is not None:
            client = request.client.host if request.client else "?"
            if not limiter.allow(client):
                return _error(429, "RateLimited", "too many requests")
        body = await request.body()
        if len(body) > max_bytes:
            return _error(413, "PayloadTooLarge", f"blob exceeds {max_bytes} bytes")
        capability = new_capability(rng)
        path = storage / capability
        with tempfile.NamedTemporaryFile(dir=storage, delete=False) as handle:
            handle.write(body)
            tmp = handle.name
        Path(tmp).replace(path)
        return {"capability": capability}

    @app.get("/files/{capability}")
    def download(capability: str):
        if not _CAPABILITY_RE.match(capability):
            return _error(404, "NotFound", "unknown capability")
        path = storage / capability
        if not path.is_file():
            return _error(404, "NotFound", "unknown capability")
        return Response(content=path.read_bytes(), media_type="application/octet-stream")

    return app
