"""Shared-password key system.

The password is turned into key material with PBKDF2-HMAC-SHA256; payloads
are sealed with AES-256-GCM.  The derived key can either be stored (inside
the master-password-protected keystore) or re-derived from a password the
user re-enters each session; the stored/ephemeral behaviors are one scheme
distinguished by a flag.  Passwords travel out of band between users.
"""
from __future__ import annotations

import base64
import hashlib
import hmac
import secrets
from typing import Mapping, Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..errors import (
    EmptyPassword,
    FingerprintMismatch,
    MissingKey,
    UnsupportedOperation,
    WrongPassword,
)
from ..forms import FormField, FormSchema, password_reentry_form
from ..package_format import SCHEME_PASSWORD, MessagePackage, RecipientBlock
from .base import (
    KeyScheme,
    KeySystem,
    KeySystemRecord,
    Rng,
    compute_fingerprint,
    decode_state,
    encode_state,
)

DEFAULT_ITERATIONS = 100_000
_VERIFY_CONTEXT = b"mgcore.password.verify.v1"
_TAG_LEN = 4


def derive_key(password: str, salt: bytes, iterations: int) -> bytes:
    """PBKDF2-HMAC-SHA256 -> 32 key bytes."""
    if not password:
        raise EmptyPassword("password must not be empty")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations, 32)


def _verification_tag(key: bytes) -> bytes:
    # distinguishes a wrong password from a corrupt package at unlock time
    return hmac.new(key, _VERIFY_CONTEXT, hashlib.sha256).digest()[:_TAG_LEN]


class PasswordKeySystem(KeySystem):
    def __init__(self, record: KeySystemRecord, key: Optional[bytes]) -> None:
        super().__init__(record)
        self._key = key

    def _require_key(self) -> bytes:
        if self._key is None:
            raise MissingKey(
                "password not available this session",
                remediation=password_reentry_form("Re-enter the shared password"),
            )
        return self._key

    def encrypt(self, recipients: list[str], plaintext: bytes, *, rng: Rng | None = None) -> MessagePackage:
        # shared-password systems cannot address recipients; identities ignored
        rng = rng or secrets.token_bytes
        key = self._require_key()
        nonce = rng(12)
        ciphertext = AESGCM(key).encrypt(nonce, plaintext, None)
        block = RecipientBlock(self.fingerprint, b"")  # key is password-derived
        return MessagePackage.create(SCHEME_PASSWORD, [block], nonce, ciphertext)

    def decrypt(self, package: MessagePackage) -> bytes:
        if package.scheme_id != SCHEME_PASSWORD:
            raise FingerprintMismatch("package was not made by a password scheme")
        if all(b.fingerprint != self.fingerprint for b in package.recipient_blocks):
            raise FingerprintMismatch("package addressed to a different password key")
        key = self._require_key()
        try:
            return AESGCM(key).decrypt(package.nonce, package.ciphertext, None)
        except InvalidTag:
            raise WrongPassword("authentication failed: wrong password or tampered package") from None

    def sign(self, data: bytes) -> bytes:
        raise UnsupportedOperation("password scheme cannot sign")

    def verify(self, data: bytes, signature: bytes, public_material: bytes | None = None) -> bool:
        raise UnsupportedOperation("password scheme cannot verify")


class PasswordScheme(KeyScheme):
    scheme_id = SCHEME_PASSWORD
    name = "password"

    def get_ui(self, existing: Optional[KeySystemRecord] = None) -> FormSchema:
        return FormSchema(
            title="Shared password key",
            fields=(
                FormField("label", "Key name"),
                FormField("password", "Shared password", input_kind="password"),
                FormField(
                    "stored",
                    "Remember this password",
                    input_kind="choice",
                    choices=("true", "false"),
                ),
            ),
        )

    def create(self, fields: Mapping[str, str], *, rng: Rng | None = None,
               iterations: int = DEFAULT_ITERATIONS) -> KeySystemRecord:
        rng = rng or secrets.token_bytes
        label = fields.get("label", "").strip()
        password = fields.get("password", "")
        if not label:
            raise ValueError("label must not be empty")
        if not password:
            raise EmptyPassword("password must not be empty")
        stored = str(fields.get("stored", "true")).lower() != "false"
        salt = rng(16)
        key = derive_key(password, salt, iterations)
        tag = _verification_tag(key)
        state = {
            "salt": base64.b64encode(salt).decode(),
            "iterations": iterations,
            "verification_tag": base64.b64encode(tag).decode(),
        }
        if stored:
            state["key"] = base64.b64encode(key).decode()
        return KeySystemRecord(
            scheme_id=self.scheme_id,
            fingerprint=compute_fingerprint(salt + tag),
            identity="",
            can_have_recipients=False,
            attributes={"label": label, "stored": "true" if stored else "false"},
            state=encode_state(state),
        )

    def update(self, record: KeySystemRecord, fields: Mapping[str, str]) -> KeySystemRecord:
        attributes = dict(record.attributes)
        if fields.get("label"):
            attributes["label"] = fields["label"].strip()
        return KeySystemRecord(
            record.scheme_id, record.fingerprint, record.identity,
            record.can_have_recipients, attributes, record.state,
        )

    def load(self, record: KeySystemRecord, *, password: Optional[str] = None, **_: object) -> PasswordKeySystem:
        state = decode_state(record.state)
        stored_key = state.get("key")
        if stored_key is not None:
            return PasswordKeySystem(record, base64.b64decode(stored_key))
        if password is not None:
            salt = base64.b64decode(state["salt"])
            key = derive_key(password, salt, int(state["iterations"]))
            expected = base64.b64decode(state["verification_tag"])
            if not hmac.compare_digest(_verification_tag(key), expected):
                raise WrongPassword(
                    "shared password rejected",
                    remediation=password_reentry_form("Re-enter the shared password"),
                )
            return PasswordKeySystem(record, key)
        return PasswordKeySystem(record, None)
