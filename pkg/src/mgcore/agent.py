"""Localhost agent: the trusted origin behind the browser overlays.

Serves the overlay pages and frontend script from its own origin and
exposes the crypto API those overlays call.  The unlocked keystore lives
here, in one process on the loopback interface, so plaintext and key
material never enter the host page's origin.

Origin policy: the crypto endpoints answer only requests that carry no
Origin header (local tools) or the agent's own origin (its overlay
pages).  Requests bearing any other origin, i.e. scripts of the web page
being overlayed, get 403.  The bench intake endpoint is the deliberate
exception: fixture pages post timing records cross-origin.

    POST /api/unlock        {master_password} -> {session_token}
    GET  /api/keysystems    -> {systems: [...]}           (session)
    POST /api/package       {recipients, plaintext_html, fingerprint|scheme|label}
                            -> {armored}                   (session)
    POST /api/unpackage     {armored} -> {plaintext_html, scheme_id, fingerprint}
    POST /api/bench         timing record -> appended to the results file
    GET  /overlay/read.html, /overlay/compose.html, /frontend.js, /bookmarklet.js

No other static routes exist.  Session tokens expire after 30 idle
minutes.  The agent writes nothing to disk except bench records.
"""
from __future__ import annotations

import json
import secrets
import threading
import time
from pathlib import Path
from typing import Callable, Optional

from fastapi import Depends, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .clients import KeyServerClient
from .errors import (
    IntegrityFailure,
    KeystoreMissing,
    MalformedArmor,
    MgError,
    NoMatchingKey,
    SchemeError,
    ServerUnreachable,
    UnknownRecipient,
    UnknownScheme,
    WrongPassword,
)
from .keystore import Keystore
from .package_format import InvalidPackage
from .service import decrypt_armored, encrypt_to_armor

DEFAULT_PORT = 8747
DEFAULT_SESSION_TTL = 30 * 60.0

_ASSET_ROUTES = {
    "/overlay/read.html": ("read.html", "text/html; charset=utf-8"),
    "/overlay/compose.html": ("compose.html", "text/html; charset=utf-8"),
    "/frontend.js": ("frontend.js", "application/javascript; charset=utf-8"),
    "/bookmarklet.js": ("bookmarklet.js", "application/javascript; charset=utf-8"),
}
_ORIGIN_PLACEHOLDER = "__AGENT_ORIGIN__"


class _Sessions:
    def __init__(self, ttl: float, rng: Callable[[int], bytes]) -> None:
        self._ttl = ttl
        self._rng = rng
        self._tokens: dict[str, float] = {}
        self._lock = threading.Lock()

    def create(self) -> str:
        token = self._rng(32).hex()
        with self._lock:
            self._tokens[token] = time.monotonic() + self._ttl
        return token

    def touch(self, token: str) -> bool:
        now = time.monotonic()
        with self._lock:
            expires = self._tokens.get(token)
            if expires is None or expires < now:
                self._tokens.pop(token, None)
                return False
            self._tokens[token] = now + self._ttl
            return True


class UnlockBody(BaseModel):
    master_password: str


class PackageBody(BaseModel):
    recipients: list[str] = []
    plaintext_html: str
    fingerprint: Optional[str] = None
    scheme: Optional[str] = None
    label: Optional[str] = None
    identity: Optional[str] = None
    password: Optional[str] = None  # for ephemeral shared-password keys


class UnpackageBody(BaseModel):
    armored: str
    password: Optional[str] = None


class BenchRecord(BaseModel):
    browser_label: str
    stage: int
    n: int
    total_ms: float
    per_element_ms: float


def create_agent_app(
    keystore_path: str | Path,
    *,
    assets_dir: Optional[str | Path] = None,
    origin: str = f"http://127.0.0.1:{DEFAULT_PORT}",
    key_server_url: Optional[str] = None,
    key_server: Optional[KeyServerClient] = None,
    bench_results_path: Optional[str | Path] = None,
    session_ttl: float = DEFAULT_SESSION_TTL,
    rng: Callable[[int], bytes] = secrets.token_bytes,
) -> FastAPI:
    keystore_path = Path(keystore_path)
    assets = Path(assets_dir) if assets_dir else None
    if key_server is None and key_server_url:
        key_server = KeyServerClient(key_server_url)
    bench_path = Path(bench_results_path) if bench_results_path else (
        keystore_path.parent / "bench-results.jsonl"
    )
    app = FastAPI(title="overlay agent", docs_url=None, redoc_url=None)
    sessions = _Sessions(session_ttl, rng)
    state = {"keystore": None}
    state_lock = threading.Lock()
    bench_lock = threading.Lock()
    app.state.origin = origin

    def _error(status: int, code: str, message: str, remediation=None) -> JSONResponse:
        body = {"code": code, "message": message}
        if remediation is not None:
            body["remediation"] = remediation.to_dict()
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request, exc):
        return _error(400, "BadRequest", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_request, exc: StarletteHTTPException):
        return _error(exc.status_code, "NotFound" if exc.status_code == 404 else "Error",
                      str(exc.detail))

    class _Refused(Exception):
        def __init__(self, response: JSONResponse) -> None:
            self.response = response

    @app.exception_handler(_Refused)
    async def _refused(_request, exc: _Refused):
        return exc.response

    def check_origin(request: Request) -> None:
        request_origin = request.headers.get("Origin")
        if request_origin is not None and request_origin != origin:
            raise _Refused(_error(403, "ForbiddenOrigin",
                                  "crypto endpoints answer only the agent's own origin"))

    def require_session(request: Request) -> None:
        check_origin(request)
        header = request.headers.get("Authorization", "")
        token = header[len("Bearer "):] if header.startswith("Bearer ") else ""
        if not token or not sessions.touch(token):
            raise _Refused(_error(423, "Locked", "unlock the agent first"))

    def current_store() -> Keystore:
        with state_lock:
            store = state["keystore"]
        if store is None:
            raise _Refused(_error(423, "Locked", "unlock the agent first"))
        return store

    # -- crypto API -----------------------------------------------------

    @app.post("/api/unlock", dependencies=[Depends(check_origin)])
    def unlock(body: UnlockBody):
        try:
            store = Keystore.unlock(keystore_path, body.master_password)
        except WrongPassword:
            return _error(401, "WrongPassword", "master password rejected")
        except KeystoreMissing:
            return _error(404, "NoKeystore", f"no keystore at {keystore_path}")
        with state_lock:
            state["keystore"] = store
        return {"session_token": sessions.create()}

    @app.get("/api/keysystems", dependencies=[Depends(require_session)])
    def list_keysystems():
        store = current_store()
        return {"systems": [record.public_view() for record in store.list()]}

    @app.post("/api/package", dependencies=[Depends(require_session)])
    def package(body: PackageBody):
        store = current_store()
        try:
            fingerprint = bytes.fromhex(body.fingerprint) if body.fingerprint else None
            armored = encrypt_to_armor(
                store,
                body.recipients,
                body.plaintext_html.encode("utf-8"),
                fingerprint=fingerprint,
                scheme_name=body.scheme,
                label=body.label,
                identity=body.identity,
                key_server=key_server,
                password=body.password,
            )
        except UnknownRecipient as exc:
            return _error(422, "UnknownRecipient", str(exc))
        except ServerUnreachable as exc:
            return _error(502, "ServerUnreachable", str(exc))
        except UnknownScheme as exc:
            return _error(404, "UnknownKeySystem", str(exc))
        except SchemeError as exc:
            return _error(409, exc.code, str(exc), exc.remediation)
        except (ValueError, MgError) as exc:
            return _error(400, "BadRequest", str(exc))
        return {"armored": armored}

    @app.post("/api/unpackage", dependencies=[Depends(require_session)])
    def unpackage(body: UnpackageBody):
        store = current_store()
        try:
            plaintext, record = decrypt_armored(store, body.armored, password=body.password)
        except (MalformedArmor, InvalidPackage) as exc:
            return _error(400, "MalformedArmor", str(exc))
        except NoMatchingKey as exc:
            return _error(404, "NoMatchingKey", str(exc), exc.remediation)
        except (IntegrityFailure, WrongPassword) as exc:
            code = "IntegrityFailure" if isinstance(exc, IntegrityFailure) else "WrongPassword"
            return _error(400, code, str(exc))
        except SchemeError as exc:
            return _error(409, exc.code, str(exc), exc.remediation)
        try:
            plaintext_html = plaintext.decode("utf-8")
        except UnicodeDecodeError:
            return _error(422, "BinaryPayload", "payload is not text")
        return {
            "plaintext_html": plaintext_html,
            "scheme_id": record.scheme_id,
            "fingerprint": record.fingerprint.hex(),
        }

    # -- bench intake (cross-origin by design) ------------------------------

    _bench_cors = {
        "Access-Control-Allow-Origin": "*",
        "Access-Control-Allow-Methods": "POST, OPTIONS",
        "Access-Control-Allow-Headers": "Content-Type",
    }

    @app.options("/api/bench")
    def bench_preflight():
        return Response(status_code=204, headers=_bench_cors)

    @app.post("/api/bench")
    def bench(record: BenchRecord):
        if record.stage not in (1, 2) or record.n <= 0 or record.total_ms < 0 \
                or record.per_element_ms < 0:
            return _error(400, "BadRequest", "invalid bench record")
        entry = record.model_dump()
        entry["received_at"] = time.time()
        with bench_lock:
            bench_path.parent.mkdir(parents=True, exist_ok=True)
            with bench_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(entry, sort_keys=True) + "\n")
        return JSONResponse({"stored": True}, headers=_bench_cors)

    # -- static assets --------------------------------------------------------

    def _serve_asset(route: str) -> Response:
        if assets is None:
            return _error(404, "NotFound", "agent started without an asset bundle")
        filename, content_type = _ASSET_ROUTES[route]
        path = assets / filename
        if not path.is_file():
            return _error(404, "NotFound", f"asset {filename} not built")
        text = path.read_text(encoding="utf-8").replace(_ORIGIN_PLACEHOLDER, origin)
        return Response(content=text, media_type=content_type)

    @app.get("/overlay/read.html")
    def read_overlay_page():
        return _serve_asset("/overlay/read.html")

    @app.get("/overlay/compose.html")
    def compose_overlay_page():
        return _serve_asset("/overlay/compose.html")

    @app.get("/frontend.js")
    def frontend_script():
        return _serve_asset("/frontend.js")

    @app.get("/bookmarklet.js")
    def bookmarklet_script():
        return _serve_asset("/bookmarklet.js")

    return app
