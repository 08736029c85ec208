"""REST key server: accounts, identity ownership, key publication, IBE escrow.

Public endpoints (no auth):
    GET /identities/{identity}/publicKey
    GET /ibe/params

Private endpoints (bearer token from POST /session):
    POST   /accounts                                create account
    POST   /session                                 log in
    POST   /identities/{identity}/proof             start ownership proof
    POST   /identities/{identity}/proof/{proof_id}  complete proof
    DELETE /identities/{identity}                   release identity
    PUT    /identities/{identity}/publicKey         publish key
    POST   /ibe/extract                             issue IBE private key

Every error body is ``{"code": ..., "message": ...}``.  An identity can be
held by at most one account at a time and cannot change hands until the
holder releases it.
"""
from __future__ import annotations

import base64
import secrets
from typing import Callable, Optional

from fastapi import Depends, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..ibe import IbeMasterSecret, IbePublicParams, extract, hash_identity_to_scalar, setup
from ..ibe.groups import group_by_name
from ..schemes.base import normalize_identity
from .store import KeyServerStore, _open_sealed, _seal

DEFAULT_TOKEN_TTL = 24 * 3600.0
DEFAULT_PROOF_TTL = 15 * 60.0
MAX_PROOF_ATTEMPTS = 3


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class CaptureChannel:
    """Test delivery channel: remembers every code it would have sent."""

    def __init__(self) -> None:
        self.sent: list[tuple[str, str]] = []

    def deliver(self, identity: str, code: str) -> None:
        self.sent.append((identity, code))

    def last_code_for(self, identity: str) -> str:
        for sent_identity, code in reversed(self.sent):
            if sent_identity == identity:
                return code
        raise LookupError(identity)


class ConsoleChannel:
    def deliver(self, identity: str, code: str) -> None:
        print(f"[key-server] ownership code for {identity}: {code}", flush=True)


class EchoChannel:
    """Returns the code in the start-proof response.

    Makes the proof flow fully scriptable with no side channel; only safe
    for desk-scale and test deployments.
    """

    def deliver(self, identity: str, code: str) -> None:
        pass


def _make_channel(spec) -> object:
    if isinstance(spec, str):
        return {"capture": CaptureChannel, "console": ConsoleChannel, "echo": EchoChannel}[spec]()
    return spec


class AccountBody(BaseModel):
    username: str
    password: str


class ProofCompleteBody(BaseModel):
    code: str


class PublishBody(BaseModel):
    scheme_id: int
    key_material: str  # base64


class ExtractBody(BaseModel):
    identity: str


def create_keyserver_app(
    store: KeyServerStore,
    *,
    proof_channel="console",
    ibe_group: str = "ss512",
    server_passphrase: str = "key-server-secret",
    token_ttl: float = DEFAULT_TOKEN_TTL,
    proof_ttl: float = DEFAULT_PROOF_TTL,
    rng: Callable[[int], bytes] = secrets.token_bytes,
) -> FastAPI:
    app = FastAPI(title="key server", docs_url=None, redoc_url=None)
    channel = _make_channel(proof_channel)

    # IBE setup happens once, at first boot; parameters persist for the
    # server's lifetime and the master secret rests sealed.
    state = store.load_ibe_state()
    if state is None:
        group = group_by_name(ibe_group)
        params, msk = setup(group, rng)
        store.save_ibe_state(
            ibe_group, params.to_bytes(), _seal(server_passphrase, msk.to_bytes(group), rng)
        )
    else:
        stored_kind, params_bytes, sealed = state
        params = IbePublicParams.from_bytes(params_bytes)
        msk = IbeMasterSecret.from_bytes(_open_sealed(server_passphrase, sealed), params.group)

    app.state.store = store
    app.state.params = params
    app.state.channel = channel

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"code": "BadRequest", "message": str(exc)})

    def require_account(request: Request) -> str:
        header = request.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise ApiError(401, "Unauthorized", "missing bearer token")
        username = store.resolve_token(header[len("Bearer ") :])
        if username is None:
            raise ApiError(401, "Unauthorized", "unknown or expired token")
        return username

    def require_owner(identity: str, username: str) -> str:
        identity = normalize_identity(identity)
        if store.owner_of(identity) != username:
            raise ApiError(403, "NotOwner", f"{username} does not own {identity}")
        return identity

    # -- accounts ---------------------------------------------------------

    @app.post("/accounts", status_code=201)
    def create_account(body: AccountBody):
        if not body.username or not body.password:
            raise ApiError(400, "BadRequest", "username and password required")
        if not store.create_account(body.username, body.password):
            raise ApiError(409, "UsernameTaken", f"username {body.username!r} is taken")
        return {"username": body.username}

    @app.post("/session")
    def login(body: AccountBody):
        if not store.verify_login(body.username, body.password):
            raise ApiError(401, "BadCredentials", "unknown username or wrong password")
        token, expires_at = store.issue_token(body.username, token_ttl)
        return {"token": token, "expires_at": expires_at}

    # -- ownership proofs ---------------------------------------------------

    @app.post("/identities/{identity}/proof", status_code=201)
    def start_proof(identity: str, username: str = Depends(require_account)):
        identity = normalize_identity(identity)
        owner = store.owner_of(identity)
        if owner is not None and owner != username:
            raise ApiError(409, "IdentityHeld", f"{identity} is held by another account")
        code = f"{secrets.randbelow(10**6):06d}"
        proof_id = store.create_proof(identity, username, code, proof_ttl)
        channel.deliver(identity, code)
        body = {"proof_id": proof_id}
        if isinstance(channel, EchoChannel):
            body["code"] = code
        return body

    @app.post("/identities/{identity}/proof/{proof_id}", status_code=204)
    def complete_proof(
        identity: str,
        proof_id: str,
        body: ProofCompleteBody,
        username: str = Depends(require_account),
    ):
        import time as _time

        identity = normalize_identity(identity)
        proof = store.get_proof(proof_id)
        if proof is None or proof["username"] != username or proof["identity"] != identity:
            raise ApiError(404, "NotFound", "no such proof")
        if proof["state"] == "invalidated":
            raise ApiError(410, "ProofInvalidated", "too many wrong codes")
        if proof["state"] == "used":
            raise ApiError(410, "ProofUsed", "proof already used")
        if proof["expires_at"] < _time.time():
            raise ApiError(410, "Expired", "proof expired")
        if not secrets.compare_digest(proof["code"], body.code):
            attempts = store.record_proof_attempt(proof_id, MAX_PROOF_ATTEMPTS)
            if attempts >= MAX_PROOF_ATTEMPTS:
                raise ApiError(410, "ProofInvalidated", "too many wrong codes")
            raise ApiError(400, "BadCode", "wrong code")
        store.mark_proof_used(proof_id)
        if not store.claim_identity(identity, username):
            raise ApiError(409, "IdentityHeld", f"{identity} is held by another account")
        return Response(status_code=204)

    @app.delete("/identities/{identity}", status_code=204)
    def release_identity(identity: str, username: str = Depends(require_account)):
        identity = normalize_identity(identity)
        if not store.release_identity(identity, username):
            raise ApiError(403, "NotOwner", f"{username} does not own {identity}")
        return Response(status_code=204)

    # -- published keys -------------------------------------------------------

    @app.put("/identities/{identity}/publicKey", status_code=204)
    def publish_key(identity: str, body: PublishBody, username: str = Depends(require_account)):
        identity = require_owner(identity, username)
        try:
            key_material = base64.b64decode(body.key_material, validate=True)
        except Exception:
            raise ApiError(400, "BadRequest", "key_material must be base64") from None
        store.publish_key(identity, body.scheme_id, key_material)
        return Response(status_code=204)

    @app.get("/identities/{identity}/publicKey")
    def get_public_key(identity: str):
        identity = normalize_identity(identity)
        published = store.get_published_key(identity)
        if published is None:
            raise ApiError(404, "NotFound", f"no published key for {identity}")
        return {
            "identity": identity,
            "scheme_id": published["scheme_id"],
            "key_material": base64.b64encode(published["key_material"]).decode(),
            "published_at": published["published_at"],
        }

    # -- IBE --------------------------------------------------------------------

    @app.get("/ibe/params")
    def get_ibe_params():
        return {"params": base64.b64encode(params.to_bytes()).decode()}

    @app.post("/ibe/extract")
    def extract_ibe_key(body: ExtractBody, username: str = Depends(require_account)):
        identity = require_owner(body.identity, username)
        v = hash_identity_to_scalar(identity, params.group)
        private_key = extract(msk, params, v, rng)
        return {
            "identity": identity,
            "private_key": base64.b64encode(private_key.to_bytes(params.group)).decode(),
            "params_digest": params.digest().hex(),
        }

    return app
