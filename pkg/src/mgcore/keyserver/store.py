"""Embedded persistence for the key server.

Single sqlite file in WAL mode; all access is serialized through one
connection guarded by a lock, with identity claims enforced by a UNIQUE
constraint so that two racing claimants can never both win.  The IBE
master secret is stored sealed under a server passphrase (same envelope
layout as the client keystore: salt(16) || iterations(uint32 LE) ||
nonce(12) || AES-256-GCM ciphertext).
"""
from __future__ import annotations

import hashlib
import secrets
import sqlite3
import struct
import threading
import time
import uuid
from pathlib import Path
from typing import Callable, Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..errors import CorruptStore, WrongPassword

_SCHEMA = """
CREATE TABLE IF NOT EXISTS accounts (
    username TEXT PRIMARY KEY,
    salt BLOB NOT NULL,
    verifier BLOB NOT NULL,
    iterations INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS tokens (
    token TEXT PRIMARY KEY,
    username TEXT NOT NULL,
    expires_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS ownerships (
    identity TEXT PRIMARY KEY,
    username TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS proofs (
    proof_id TEXT PRIMARY KEY,
    identity TEXT NOT NULL,
    username TEXT NOT NULL,
    code TEXT NOT NULL,
    expires_at REAL NOT NULL,
    attempts INTEGER NOT NULL DEFAULT 0,
    state TEXT NOT NULL DEFAULT 'pending'
);
CREATE TABLE IF NOT EXISTS published_keys (
    identity TEXT PRIMARY KEY,
    scheme_id INTEGER NOT NULL,
    key_material BLOB NOT NULL,
    published_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS ibe_state (
    id INTEGER PRIMARY KEY CHECK (id = 1),
    group_kind TEXT NOT NULL,
    params BLOB NOT NULL,
    sealed_msk BLOB NOT NULL
);
"""

_KDF_ITERATIONS = 100_000


def _seal(passphrase: str, plaintext: bytes, rng: Callable[[int], bytes]) -> bytes:
    salt = rng(16)
    nonce = rng(12)
    key = hashlib.pbkdf2_hmac("sha256", passphrase.encode(), salt, _KDF_ITERATIONS, 32)
    ct = AESGCM(key).encrypt(nonce, plaintext, None)
    return salt + struct.pack("<I", _KDF_ITERATIONS) + nonce + ct


def _open_sealed(passphrase: str, blob: bytes) -> bytes:
    if len(blob) < 16 + 4 + 12 + 16:
        raise CorruptStore("sealed blob too short")
    salt, (iterations,), nonce = blob[:16], struct.unpack("<I", blob[16:20]), blob[20:32]
    key = hashlib.pbkdf2_hmac("sha256", passphrase.encode(), salt, iterations, 32)
    try:
        return AESGCM(key).decrypt(nonce, blob[32:], None)
    except InvalidTag:
        raise WrongPassword("server passphrase rejected") from None


class KeyServerStore:
    def __init__(self, path: str | Path = ":memory:") -> None:
        self.path = str(path)
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._lock = threading.RLock()
        with self._lock:
            if self.path != ":memory:":
                self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.execute("PRAGMA foreign_keys=ON")
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- accounts -------------------------------------------------------

    def create_account(self, username: str, password: str) -> bool:
        """False when the username is already taken."""
        salt = secrets.token_bytes(16)
        verifier = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, _KDF_ITERATIONS, 32)
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO accounts VALUES (?, ?, ?, ?)",
                    (username, salt, verifier, _KDF_ITERATIONS),
                )
                self._conn.commit()
                return True
            except sqlite3.IntegrityError:
                return False

    def verify_login(self, username: str, password: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT salt, verifier, iterations FROM accounts WHERE username = ?",
                (username,),
            ).fetchone()
        if row is None:
            return False
        salt, verifier, iterations = row
        candidate = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, iterations, 32)
        return secrets.compare_digest(candidate, verifier)

    # -- sessions -------------------------------------------------------

    def issue_token(self, username: str, ttl: float) -> tuple[str, float]:
        token = secrets.token_urlsafe(32)
        expires_at = time.time() + ttl
        with self._lock:
            self._conn.execute("INSERT INTO tokens VALUES (?, ?, ?)", (token, username, expires_at))
            self._conn.commit()
        return token, expires_at

    def resolve_token(self, token: str) -> Optional[str]:
        now = time.time()
        with self._lock:
            self._conn.execute("DELETE FROM tokens WHERE expires_at < ?", (now,))
            row = self._conn.execute(
                "SELECT username FROM tokens WHERE token = ? AND expires_at >= ?",
                (token, now),
            ).fetchone()
            self._conn.commit()
        return row[0] if row else None

    # -- ownership ------------------------------------------------------

    def owner_of(self, identity: str) -> Optional[str]:
        with self._lock:
            row = self._conn.execute(
                "SELECT username FROM ownerships WHERE identity = ?", (identity,)
            ).fetchone()
        return row[0] if row else None

    def claim_identity(self, identity: str, username: str) -> bool:
        """Atomically claim an identity; True iff ``username`` now owns it."""
        with self._lock:
            self._conn.execute("BEGIN IMMEDIATE")
            self._conn.execute(
                "INSERT INTO ownerships VALUES (?, ?) ON CONFLICT(identity) DO NOTHING",
                (identity, username),
            )
            row = self._conn.execute(
                "SELECT username FROM ownerships WHERE identity = ?", (identity,)
            ).fetchone()
            self._conn.commit()
        return row is not None and row[0] == username

    def release_identity(self, identity: str, username: str) -> bool:
        with self._lock:
            self._conn.execute("BEGIN IMMEDIATE")
            cur = self._conn.execute(
                "DELETE FROM ownerships WHERE identity = ? AND username = ?",
                (identity, username),
            )
            if cur.rowcount:
                self._conn.execute("DELETE FROM published_keys WHERE identity = ?", (identity,))
            self._conn.commit()
        return bool(cur.rowcount)

    # -- ownership proofs -------------------------------------------------

    def create_proof(self, identity: str, username: str, code: str, ttl: float) -> str:
        proof_id = uuid.uuid4().hex
        with self._lock:
            self._conn.execute(
                "INSERT INTO proofs (proof_id, identity, username, code, expires_at)"
                " VALUES (?, ?, ?, ?, ?)",
                (proof_id, identity, username, code, time.time() + ttl),
            )
            self._conn.commit()
        return proof_id

    def get_proof(self, proof_id: str) -> Optional[dict]:
        with self._lock:
            row = self._conn.execute(
                "SELECT identity, username, code, expires_at, attempts, state"
                " FROM proofs WHERE proof_id = ?",
                (proof_id,),
            ).fetchone()
        if row is None:
            return None
        keys = ("identity", "username", "code", "expires_at", "attempts", "state")
        return dict(zip(keys, row))

    def record_proof_attempt(self, proof_id: str, max_attempts: int) -> int:
        """Bump the failed-attempt counter; invalidate at the limit."""
        with self._lock:
            self._conn.execute(
                "UPDATE proofs SET attempts = attempts + 1 WHERE proof_id = ?", (proof_id,)
            )
            (attempts,) = self._conn.execute(
                "SELECT attempts FROM proofs WHERE proof_id = ?", (proof_id,)
            ).fetchone()
            if attempts >= max_attempts:
                self._conn.execute(
                    "UPDATE proofs SET state = 'invalidated' WHERE proof_id = ?", (proof_id,)
                )
            self._conn.commit()
        return attempts

    def mark_proof_used(self, proof_id: str) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE proofs SET state = 'used' WHERE proof_id = ?", (proof_id,)
            )
            self._conn.commit()

    # -- published keys ----------------------------------------------------

    def publish_key(self, identity: str, scheme_id: int, key_material: bytes) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT INTO published_keys VALUES (?, ?, ?, ?)"
                " ON CONFLICT(identity) DO UPDATE SET scheme_id = excluded.scheme_id,"
                " key_material = excluded.key_material, published_at = excluded.published_at",
                (identity, scheme_id, key_material, time.time()),
            )
            self._conn.commit()

    def get_published_key(self, identity: str) -> Optional[dict]:
        with self._lock:
            row = self._conn.execute(
                "SELECT scheme_id, key_material, published_at FROM published_keys"
                " WHERE identity = ?",
                (identity,),
            ).fetchone()
        if row is None:
            return None
        return {"scheme_id": row[0], "key_material": row[1], "published_at": row[2]}

    # -- IBE state -----------------------------------------------------------

    def load_ibe_state(self) -> Optional[tuple[str, bytes, bytes]]:
        with self._lock:
            row = self._conn.execute(
                "SELECT group_kind, params, sealed_msk FROM ibe_state WHERE id = 1"
            ).fetchone()
        return tuple(row) if row else None

    def save_ibe_state(self, group_kind: str, params: bytes, sealed_msk: bytes) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT INTO ibe_state VALUES (1, ?, ?, ?)", (group_kind, params, sealed_msk)
            )
            self._conn.commit()
