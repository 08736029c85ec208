"""Master-password-protected store for key system records.

On-disk layout (bit-exact):

    salt(16) || kdf_iterations(uint32 little-endian) || nonce(12) || ciphertext

where ciphertext is AES-256-GCM over the canonical UTF-8 JSON document

    {"version": 1, "records": [<KeySystemRecord.to_dict()>, ...]}

with records sorted by (scheme_id, identity, fingerprint).  The AES key is
PBKDF2-HMAC-SHA256(master_password, salt, kdf_iterations, 32).  Nothing on
disk is readable without the master password; a wrong password surfaces as
an AEAD tag failure.
"""
from __future__ import annotations

import hashlib
import json
import os
import secrets
import struct
import tempfile
from pathlib import Path
from typing import Callable

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import (
    CorruptStore,
    EmptyPassword,
    KeyNotFound,
    KeystoreExists,
    KeystoreMissing,
    WrongPassword,
)
from .schemes.base import KeySystemRecord

DEFAULT_ITERATIONS = 100_000
SALT_LEN = 16
NONCE_LEN = 12
_HEADER_LEN = SALT_LEN + 4 + NONCE_LEN

Rng = Callable[[int], bytes]


def _derive_master_key(password: str, salt: bytes, iterations: int) -> bytes:
    if not password:
        raise EmptyPassword("master password must not be empty")
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations, 32)


def _records_document(records: list[KeySystemRecord]) -> bytes:
    ordered = sorted(records, key=lambda r: (r.scheme_id, r.identity, r.fingerprint.hex()))
    doc = {"version": 1, "records": [r.to_dict() for r in ordered]}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


class Keystore:
    """An unlocked keystore.

    One instance is single-writer; every mutation rewrites the file
    atomically (write-temp-then-rename) with a fresh nonce.
    """

    def __init__(self, path: Path, key: bytes, salt: bytes, iterations: int,
                 records: list[KeySystemRecord], rng: Rng = secrets.token_bytes) -> None:
        self.path = Path(path)
        self._key = key
        self._salt = salt
        self._iterations = iterations
        self._records: dict[bytes, KeySystemRecord] = {r.fingerprint: r for r in records}
        self._rng = rng

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def init(cls, path: str | Path, master_password: str, *,
             iterations: int = DEFAULT_ITERATIONS, rng: Rng = secrets.token_bytes) -> "Keystore":
        path = Path(path)
        if path.exists():
            raise KeystoreExists(f"keystore already exists: {path}")
        salt = rng(SALT_LEN)
        key = _derive_master_key(master_password, salt, iterations)
        store = cls(path, key, salt, iterations, [], rng)
        store._persist()
        return store

    @classmethod
    def unlock(cls, path: str | Path, master_password: str, *,
               rng: Rng = secrets.token_bytes) -> "Keystore":
        path = Path(path)
        if not path.exists():
            raise KeystoreMissing(f"no keystore at {path}")
        blob = path.read_bytes()
        if len(blob) < _HEADER_LEN + 16:
            raise CorruptStore("keystore file too short")
        salt = blob[:SALT_LEN]
        (iterations,) = struct.unpack("<I", blob[SALT_LEN : SALT_LEN + 4])
        nonce = blob[SALT_LEN + 4 : _HEADER_LEN]
        ciphertext = blob[_HEADER_LEN:]
        if iterations < 1:
            raise CorruptStore("bad iteration count")
        key = _derive_master_key(master_password, salt, iterations)
        try:
            plaintext = AESGCM(key).decrypt(nonce, ciphertext, None)
        except InvalidTag:
            raise WrongPassword("master password rejected") from None
        try:
            doc = json.loads(plaintext.decode("utf-8"))
            records = [KeySystemRecord.from_dict(item) for item in doc["records"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptStore(f"undecodable keystore payload: {exc}") from None
        return cls(path, key, salt, iterations, records, rng)

    # -- record operations ---------------------------------------------------

    def list(self) -> list[KeySystemRecord]:
        return sorted(
            self._records.values(),
            key=lambda r: (r.scheme_id, r.identity, r.fingerprint.hex()),
        )

    def get(self, fingerprint: bytes) -> KeySystemRecord:
        try:
            return self._records[fingerprint]
        except KeyError:
            raise KeyNotFound(f"no key system {fingerprint.hex()}") from None

    def find(self, *, scheme_id: int | None = None, identity: str | None = None,
             label: str | None = None) -> list[KeySystemRecord]:
        out = []
        for record in self.list():
            if scheme_id is not None and record.scheme_id != scheme_id:
                continue
            if identity is not None and record.identity != identity:
                continue
            if label is not None and record.label != label:
                continue
            out.append(record)
        return out

    def save_system(self, record: KeySystemRecord) -> None:
        self._records[record.fingerprint] = record
        self._persist()

    def delete(self, fingerprint: bytes) -> None:
        if fingerprint not in self._records:
            raise KeyNotFound(f"no key system {fingerprint.hex()}")
        del self._records[fingerprint]
        self._persist()

    # -- persistence ---------------------------------------------------------

    def _persist(self) -> None:
        nonce = self._rng(NONCE_LEN)
        ciphertext = AESGCM(self._key).encrypt(nonce, _records_document(self.list()), None)
        blob = self._salt + struct.pack("<I", self._iterations) + nonce + ciphertext
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".keystore-")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(blob)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
