"""HTTP clients for the key server and file server.

Transport failures surface as :class:`~mgcore.errors.ServerUnreachable`;
HTTP error bodies ``{"code", "message"}`` map onto the matching package
exceptions so callers never touch response objects.
"""
from __future__ import annotations

import base64
from typing import Optional

import httpx

from .errors import (
    IntegrityFailure,
    MgError,
    NotFoundError,
    NotOwner,
    PayloadTooLarge,
    ServerUnreachable,
    UnknownRecipient,
)
from .schemes.base import normalize_identity


def _request(client: httpx.Client, method: str, url: str, **kwargs) -> httpx.Response:
    try:
        return client.request(method, url, **kwargs)
    except httpx.TransportError as exc:
        raise ServerUnreachable(f"cannot reach {url}: {exc}") from None


def _error_info(response: httpx.Response) -> tuple[str, str]:
    try:
        body = response.json()
        return body.get("code", "Error"), body.get("message", response.text)
    except Exception:
        return "Error", response.text


class KeyServerError(MgError):
    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.status = status
        self.code = code


class KeyServerClient:
    """Unauthenticated view of a key server (public endpoints only)."""

    def __init__(self, base_url: str, client: Optional[httpx.Client] = None) -> None:
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=30.0)

    def _raise(self, response: httpx.Response):
        code, message = _error_info(response)
        if response.status_code == 403:
            raise NotOwner(message)
        raise KeyServerError(response.status_code, code, message)

    # -- accounts ----------------------------------------------------------

    def create_account(self, username: str, password: str) -> None:
        response = _request(
            self._client,
            "POST",
            f"{self.base_url}/accounts",
            json={"username": username, "password": password},
        )
        if response.status_code != 201:
            self._raise(response)

    def login(self, username: str, password: str) -> "KeyServerSession":
        response = _request(
            self._client,
            "POST",
            f"{self.base_url}/session",
            json={"username": username, "password": password},
        )
        if response.status_code != 200:
            self._raise(response)
        return KeyServerSession(self, response.json()["token"])

    # -- public endpoints ------------------------------------------------------

    def get_public_key(self, identity: str) -> bytes:
        identity = normalize_identity(identity)
        response = _request(
            self._client, "GET", f"{self.base_url}/identities/{identity}/publicKey"
        )
        if response.status_code == 404:
            raise UnknownRecipient(f"no published key for {identity}")
        if response.status_code != 200:
            self._raise(response)
        return base64.b64decode(response.json()["key_material"])

    def get_published(self, identity: str) -> dict:
        identity = normalize_identity(identity)
        response = _request(
            self._client, "GET", f"{self.base_url}/identities/{identity}/publicKey"
        )
        if response.status_code == 404:
            raise UnknownRecipient(f"no published key for {identity}")
        if response.status_code != 200:
            self._raise(response)
        return response.json()

    def get_ibe_params(self) -> bytes:
        response = _request(self._client, "GET", f"{self.base_url}/ibe/params")
        if response.status_code != 200:
            self._raise(response)
        return base64.b64decode(response.json()["params"])


class KeyServerSession:
    """Authenticated key server operations for one account."""

    def __init__(self, client: KeyServerClient, token: str) -> None:
        self._client = client
        self.token = token

    @property
    def _headers(self) -> dict:
        return {"Authorization": f"Bearer {self.token}"}

    def _http(self):
        return self._client._client

    def get_ibe_params(self) -> bytes:
        return self._client.get_ibe_params()

    def start_proof(self, identity: str) -> tuple[str, Optional[str]]:
        identity = normalize_identity(identity)
        response = _request(
            self._http(),
            "POST",
            f"{self._client.base_url}/identities/{identity}/proof",
            headers=self._headers,
        )
        if response.status_code != 201:
            self._client._raise(response)
        body = response.json()
        return body["proof_id"], body.get("code")

    def complete_proof(self, identity: str, proof_id: str, code: str) -> None:
        identity = normalize_identity(identity)
        response = _request(
            self._http(),
            "POST",
            f"{self._client.base_url}/identities/{identity}/proof/{proof_id}",
            headers=self._headers,
            json={"code": code},
        )
        if response.status_code != 204:
            self._client._raise(response)

    def prove_ownership(self, identity: str, code_lookup=None) -> None:
        """Start and complete a proof in one call.

        Works out of the box against echo-channel servers; otherwise
        ``code_lookup(identity)`` must supply the delivered code.
        """
        identity = normalize_identity(identity)
        proof_id, code = self.start_proof(identity)
        if code is None:
            if code_lookup is None:
                raise MgError("proof code not echoed; supply code_lookup")
            code = code_lookup(identity)
        self.complete_proof(identity, proof_id, code)

    def release_identity(self, identity: str) -> None:
        identity = normalize_identity(identity)
        response = _request(
            self._http(),
            "DELETE",
            f"{self._client.base_url}/identities/{identity}",
            headers=self._headers,
        )
        if response.status_code != 204:
            self._client._raise(response)

    def publish_key(self, identity: str, scheme_id: int, key_material: bytes) -> None:
        identity = normalize_identity(identity)
        response = _request(
            self._http(),
            "PUT",
            f"{self._client.base_url}/identities/{identity}/publicKey",
            headers=self._headers,
            json={
                "scheme_id": scheme_id,
                "key_material": base64.b64encode(key_material).decode(),
            },
        )
        if response.status_code != 204:
            self._client._raise(response)

    def extract_ibe_key(self, identity: str) -> bytes:
        identity = normalize_identity(identity)
        response = _request(
            self._http(),
            "POST",
            f"{self._client.base_url}/ibe/extract",
            headers=self._headers,
            json={"identity": identity},
        )
        if response.status_code != 200:
            self._client._raise(response)
        return base64.b64decode(response.json()["private_key"])


class FileServerClient:
    def __init__(self, base_url: str, client: Optional[httpx.Client] = None) -> None:
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=60.0)

    def upload(self, blob: bytes) -> str:
        response = _request(self._client, "POST", f"{self.base_url}/files", content=blob)
        if response.status_code == 413:
            raise PayloadTooLarge("blob exceeds the server's size cap")
        if response.status_code != 201:
            code, message = _error_info(response)
            raise MgError(f"upload failed: {code}: {message}")
        return response.json()["capability"]

    def download(self, capability: str) -> bytes:
        response = _request(self._client, "GET", f"{self.base_url}/files/{capability}")
        if response.status_code == 404:
            raise NotFoundError(f"no blob for capability {capability}")
        if response.status_code != 200:
            code, message = _error_info(response)
            raise IntegrityFailure(f"download failed: {code}: {message}")
        return response.content
