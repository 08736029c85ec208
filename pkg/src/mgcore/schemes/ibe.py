"""Identity-based key system: BB1 as a KEM around AES-256-GCM.

Senders need only the public system parameters and recipient identifiers;
there is no per-recipient key fetch.  One random target-group element k is
drawn per message, SHA-256(k) keys the AEAD, and each recipient block
wraps k under that recipient's hashed identity.  Recipient fingerprints
are derived from (parameter digest, identity), so sender and recipient
compute them independently.
"""
from __future__ import annotations

import base64
import hashlib
import secrets
from typing import Mapping, Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..errors import IntegrityFailure, InvalidPackage, MgError, NoMatchingKey, UnsupportedOperation
from ..forms import FormField, FormSchema
from ..package_format import (
    SCHEME_IBE,
    MessagePackage,
    RecipientBlock,
    decode_length_prefixed,
    encode_length_prefixed,
)
from .base import (
    KeyScheme,
    KeySystem,
    KeySystemRecord,
    Rng,
    compute_fingerprint,
    decode_state,
    encode_state,
    normalize_identity,
)
from ..ibe.bb1 import (
    IbeCiphertext,
    IbePrivateKey,
    IbePublicParams,
    decrypt_element,
    encrypt_element,
    hash_identity_to_scalar,
    random_gt_element,
)


def recipient_fingerprint(params: IbePublicParams, identity: str) -> bytes:
    """Fingerprint both sides can compute: parameters digest + identity."""
    identity = normalize_identity(identity)
    return compute_fingerprint(params.digest() + b"\x00" + identity.encode("utf-8"))


def _kem_key(params: IbePublicParams, k) -> bytes:
    return hashlib.sha256(params.group.gt_to_bytes(k)).digest()


def kem_encrypt(
    params: IbePublicParams,
    identities: list[str],
    plaintext: bytes,
    rng: Rng | None = None,
) -> MessagePackage:
    """Encrypt once, wrapping the session element for every identity."""
    if not identities:
        raise MgError("ibe encryption needs at least one recipient identity")
    rng = rng or secrets.token_bytes
    group = params.group
    k = random_gt_element(params, rng)
    nonce = rng(12)
    ciphertext = AESGCM(_kem_key(params, k)).encrypt(nonce, plaintext, None)
    blocks = []
    for identity in identities:
        v = hash_identity_to_scalar(identity, group)
        ct = encrypt_element(params, v, k, rng)
        wrapped = encode_length_prefixed(
            (
                group.gt_to_bytes(ct.c1),
                group.element_to_bytes(ct.c2),
                group.element_to_bytes(ct.c3),
            )
        )
        blocks.append(RecipientBlock(recipient_fingerprint(params, identity), wrapped))
    return MessagePackage.create(SCHEME_IBE, blocks, nonce, ciphertext)


def kem_decrypt(
    params: IbePublicParams,
    private_key: IbePrivateKey,
    own_fingerprint: bytes,
    package: MessagePackage,
) -> bytes:
    group = params.group
    if package.scheme_id != SCHEME_IBE:
        raise NoMatchingKey("package was made by a different scheme")
    mine = [b for b in package.recipient_blocks if b.fingerprint == own_fingerprint]
    if not mine:
        raise NoMatchingKey("no recipient block matches this identity")
    try:
        c1_raw, c2_raw, c3_raw = decode_length_prefixed(mine[0].wrapped_key, 3)
        ct = IbeCiphertext(
            group.gt_from_bytes(c1_raw),
            group.element_from_bytes(c2_raw),
            group.element_from_bytes(c3_raw),
        )
    except (InvalidPackage, MgError) as exc:
        raise IntegrityFailure(f"undecodable recipient block: {exc}") from None
    k = decrypt_element(params, private_key, ct)
    try:
        return AESGCM(_kem_key(params, k)).decrypt(package.nonce, package.ciphertext, None)
    except InvalidTag:
        raise IntegrityFailure("payload authentication failed") from None


class IbeKeySystem(KeySystem):
    def __init__(self, record: KeySystemRecord, params: IbePublicParams,
                 private_key: Optional[IbePrivateKey]) -> None:
        super().__init__(record)
        self.params = params
        self._private_key = private_key

    def encrypt(self, recipients: list[str], plaintext: bytes, *, rng: Rng | None = None) -> MessagePackage:
        return kem_encrypt(self.params, recipients, plaintext, rng)

    def decrypt(self, package: MessagePackage) -> bytes:
        if self._private_key is None:
            raise NoMatchingKey("no private key extracted for this identity")
        return kem_decrypt(self.params, self._private_key, self.fingerprint, package)

    def sign(self, data: bytes) -> bytes:
        raise UnsupportedOperation("identity-based scheme does not sign")

    def verify(self, data: bytes, signature: bytes, public_material: bytes | None = None) -> bool:
        raise UnsupportedOperation("identity-based scheme does not verify")


class IbeScheme(KeyScheme):
    scheme_id = SCHEME_IBE
    name = "ibe"

    def get_ui(self, existing: Optional[KeySystemRecord] = None) -> FormSchema:
        return FormSchema(
            title="Identity-based key",
            fields=(FormField("identity", "Email address", input_kind="identity"),),
        )

    def record_from_parts(self, identity: str, params: IbePublicParams,
                          private_key: Optional[IbePrivateKey]) -> KeySystemRecord:
        identity = normalize_identity(identity)
        if not identity:
            raise ValueError("identity must not be empty")
        state = {"params": base64.b64encode(params.to_bytes()).decode()}
        if private_key is not None:
            state["private_key"] = base64.b64encode(private_key.to_bytes(params.group)).decode()
        return KeySystemRecord(
            scheme_id=self.scheme_id,
            fingerprint=recipient_fingerprint(params, identity),
            identity=identity,
            can_have_recipients=True,
            attributes={"label": identity, "params_digest": params.digest().hex()},
            state=encode_state(state),
        )

    def create_from_server(self, identity: str, key_server_session) -> KeySystemRecord:
        """Fetch parameters and extract this identity's private key.

        ``key_server_session`` must own the identity; extraction failures
        (NotOwner, ServerUnreachable) propagate unchanged.
        """
        params = IbePublicParams.from_bytes(key_server_session.get_ibe_params())
        key_bytes = key_server_session.extract_ibe_key(identity)
        private_key = IbePrivateKey.from_bytes(key_bytes, params.group)
        return self.record_from_parts(identity, params, private_key)

    def create(self, fields: Mapping[str, str], *, rng: Rng | None = None,
               key_server_session=None) -> KeySystemRecord:
        if key_server_session is None:
            raise MgError("ibe key creation needs a key server session")
        return self.create_from_server(fields["identity"], key_server_session)

    def update(self, record: KeySystemRecord, fields: Mapping[str, str]) -> KeySystemRecord:
        return record

    def load(self, record: KeySystemRecord, **_: object) -> IbeKeySystem:
        state = decode_state(record.state)
        params = IbePublicParams.from_bytes(base64.b64decode(state["params"]))
        private_key = None
        if "private_key" in state:
            private_key = IbePrivateKey.from_bytes(
                base64.b64decode(state["private_key"]), params.group
            )
        return IbeKeySystem(record, params, private_key)
