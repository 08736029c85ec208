"""Key scheme / key system contracts and the records the keystore persists.

A *key scheme* is a factory for one approach to key management; a *key
system* is one instantiated key bound to a single identity, able to
decrypt/sign for that identity and encrypt/verify for any number of
recipients.  Schemes that cannot address recipients (shared passwords)
set ``can_have_recipients`` to False and ignore recipient parameters.
"""
from __future__ import annotations

import base64
import hashlib
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

from ..errors import MgError, SchemeError
from ..forms import FormSchema
from ..package_format import MessagePackage

FINGERPRINT_LEN = 16

Rng = Callable[[int], bytes]


def normalize_identity(identity: str) -> str:
    """Canonical identity form: trimmed and lowercased."""
    return identity.strip().lower()


def compute_fingerprint(public_material: bytes) -> bytes:
    """First 16 bytes of SHA-256 over canonical public material."""
    if not public_material:
        raise MgError("cannot fingerprint empty public material")
    return hashlib.sha256(public_material).digest()[:FINGERPRINT_LEN]


@dataclass
class KeySystemRecord:
    """Serializable description of one instantiated key system."""

    scheme_id: int
    fingerprint: bytes
    identity: str
    can_have_recipients: bool
    attributes: dict[str, str] = field(default_factory=dict)
    state: bytes = b""

    @property
    def label(self) -> str:
        return self.attributes.get("label", "") or self.identity

    def to_dict(self) -> dict:
        return {
            "scheme_id": self.scheme_id,
            "fingerprint": self.fingerprint.hex(),
            "identity": self.identity,
            "can_have_recipients": self.can_have_recipients,
            "attributes": dict(sorted(self.attributes.items())),
            "state": base64.b64encode(self.state).decode("ascii"),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "KeySystemRecord":
        return cls(
            scheme_id=int(data["scheme_id"]),
            fingerprint=bytes.fromhex(data["fingerprint"]),
            identity=data["identity"],
            can_have_recipients=bool(data["can_have_recipients"]),
            attributes=dict(data.get("attributes", {})),
            state=base64.b64decode(data.get("state", "")),
        )

    def public_view(self) -> dict:
        """Listing entry with no secret material."""
        return {
            "scheme_id": self.scheme_id,
            "fingerprint": self.fingerprint.hex(),
            "identity": self.identity,
            "label": self.label,
        }

    def replace_state(self, state: bytes) -> "KeySystemRecord":
        return replace(self, state=state)


def encode_state(payload: dict) -> bytes:
    """Canonical JSON encoding for the opaque per-scheme state blob."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def decode_state(state: bytes) -> dict:
    return json.loads(state.decode("utf-8"))


class KeySystem(ABC):
    """One instantiated key: cryptographic operations for a single identity."""

    def __init__(self, record: KeySystemRecord) -> None:
        self.record = record

    @property
    def scheme_id(self) -> int:
        return self.record.scheme_id

    @property
    def fingerprint(self) -> bytes:
        return self.record.fingerprint

    @property
    def identity(self) -> str:
        return self.record.identity

    @property
    def can_have_recipients(self) -> bool:
        return self.record.can_have_recipients

    @abstractmethod
    def encrypt(self, recipients: list[str], plaintext: bytes, *, rng: Rng | None = None) -> MessagePackage:
        """Encrypt plaintext for the given recipients (ignored when the
        scheme cannot address recipients).  The returned package carries
        the fingerprint(s) of the key system(s) able to decrypt it."""

    @abstractmethod
    def decrypt(self, package: MessagePackage) -> bytes:
        ...

    @abstractmethod
    def sign(self, data: bytes) -> bytes:
        ...

    @abstractmethod
    def verify(self, data: bytes, signature: bytes, public_material: bytes | None = None) -> bool:
        ...

    def serialize(self) -> bytes:
        """State blob for storage; the scheme's ``load`` inverts it."""
        return self.record.state


class KeyScheme(ABC):
    """Factory and UI contract for one key-management approach."""

    scheme_id: int
    name: str

    @abstractmethod
    def get_ui(self, existing: Optional[KeySystemRecord] = None) -> FormSchema:
        """Declarative form the frontend renders to create/update a system."""

    @abstractmethod
    def create(self, fields: Mapping[str, str], *, rng: Rng | None = None) -> KeySystemRecord:
        ...

    @abstractmethod
    def update(self, record: KeySystemRecord, fields: Mapping[str, str]) -> KeySystemRecord:
        ...

    @abstractmethod
    def load(self, record: KeySystemRecord, **runtime) -> KeySystem:
        ...

    def handle_error(self, error: SchemeError) -> Optional[FormSchema]:
        """Form that lets the user address a recoverable error."""
        return error.remediation
