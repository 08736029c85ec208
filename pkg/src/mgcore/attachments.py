"""Client-side encrypted attachments.

A file is sealed with a fresh random key and uploaded; the server stores
only ciphertext.  Everything needed to fetch and open it (capability,
content key, plaintext hash, name, size) travels as a manifest *inside*
an encrypted message body, so exactly the people who can read the message
can read the attachment.

Uploaded blob layout: nonce(12) || AES-256-GCM ciphertext (tag appended).
"""
from __future__ import annotations

import base64
import hashlib
import json
import secrets
from dataclasses import dataclass
from typing import Callable, Protocol

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import IntegrityFailure, MgError

Rng = Callable[[int], bytes]


class BlobServer(Protocol):
    def upload(self, blob: bytes) -> str: ...

    def download(self, capability: str) -> bytes: ...


@dataclass(frozen=True)
class AttachmentManifest:
    capability: str
    content_key: bytes  # 32 bytes
    sha256: bytes  # hash of the plaintext attachment
    filename: str
    size: int

    def to_dict(self) -> dict:
        return {
            "capability": self.capability,
            "content_key": base64.b64encode(self.content_key).decode(),
            "sha256": self.sha256.hex(),
            "filename": self.filename,
            "size": self.size,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "AttachmentManifest":
        try:
            return cls(
                capability=data["capability"],
                content_key=base64.b64decode(data["content_key"]),
                sha256=bytes.fromhex(data["sha256"]),
                filename=data["filename"],
                size=int(data["size"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MgError(f"undecodable attachment manifest: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "AttachmentManifest":
        return cls.from_dict(json.loads(text))


def attach_encrypt(
    file_bytes: bytes,
    filename: str,
    server: BlobServer,
    rng: Rng | None = None,
) -> AttachmentManifest:
    """Seal a file, upload the ciphertext, return the manifest."""
    rng = rng or secrets.token_bytes
    content_key = rng(32)
    nonce = rng(12)
    blob = nonce + AESGCM(content_key).encrypt(nonce, file_bytes, None)
    capability = server.upload(blob)
    return AttachmentManifest(
        capability=capability,
        content_key=content_key,
        sha256=hashlib.sha256(file_bytes).digest(),
        filename=filename,
        size=len(file_bytes),
    )


def attach_decrypt(manifest: AttachmentManifest, server: BlobServer) -> bytes:
    """Fetch, open, and hash-verify an attachment."""
    blob = server.download(manifest.capability)
    if len(blob) < 12 + 16:
        raise IntegrityFailure("stored blob too short")
    try:
        plaintext = AESGCM(manifest.content_key).decrypt(blob[:12], blob[12:], None)
    except InvalidTag:
        raise IntegrityFailure("attachment authentication failed") from None
    if hashlib.sha256(plaintext).digest() != manifest.sha256:
        raise IntegrityFailure("attachment hash mismatch")
    return plaintext
