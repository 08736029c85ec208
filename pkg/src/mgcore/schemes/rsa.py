"""RSA public-key scheme with key-server discovery.

2048-bit identity keypairs; the public half is published to a key server
and fetched by senders.  Messages use hybrid encryption: a fresh 32-byte
session key seals the payload once with AES-256-GCM and is RSA-OAEP-wrapped
for each recipient.  Signatures are RSA-PSS over SHA-256.

Public keys travel in a canonical transport encoding, which is also the
fingerprint input:

    len(modulus, uint32 BE) || modulus (big-endian) || len(exponent) || exponent
"""
from __future__ import annotations

import base64
import secrets
import struct
from typing import Mapping, Optional, Protocol

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ..errors import IntegrityFailure, MgError, NoMatchingKey, UnsupportedOperation
from ..forms import FormField, FormSchema
from ..package_format import (
    SCHEME_RSA,
    MessagePackage,
    RecipientBlock,
    SignatureBlock,
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

KEY_BITS = 2048


class PublicKeyDirectory(Protocol):
    """Where senders look up recipient public keys (usually a key server)."""

    def get_public_key(self, identity: str) -> bytes:
        """Canonical public key bytes for an identity.

        Raises UnknownRecipient when the identity has no published key and
        ServerUnreachable when the directory cannot be reached.
        """
        ...


class InMemoryDirectory:
    def __init__(self, keys: Optional[dict[str, bytes]] = None) -> None:
        self.keys: dict[str, bytes] = dict(keys or {})

    def publish(self, identity: str, key_material: bytes) -> None:
        self.keys[normalize_identity(identity)] = key_material

    def get_public_key(self, identity: str) -> bytes:
        from ..errors import UnknownRecipient

        identity = normalize_identity(identity)
        if identity not in self.keys:
            raise UnknownRecipient(f"no published key for {identity}")
        return self.keys[identity]


def encode_public_key(public_key: rsa.RSAPublicKey) -> bytes:
    numbers = public_key.public_numbers()
    n_bytes = numbers.n.to_bytes((numbers.n.bit_length() + 7) // 8, "big")
    e_bytes = numbers.e.to_bytes((numbers.e.bit_length() + 7) // 8, "big")
    return (
        struct.pack(">I", len(n_bytes)) + n_bytes + struct.pack(">I", len(e_bytes)) + e_bytes
    )


def decode_public_key(data: bytes) -> rsa.RSAPublicKey:
    try:
        (n_len,) = struct.unpack_from(">I", data, 0)
        n = int.from_bytes(data[4 : 4 + n_len], "big")
        (e_len,) = struct.unpack_from(">I", data, 4 + n_len)
        e_start = 8 + n_len
        e = int.from_bytes(data[e_start : e_start + e_len], "big")
        if e_start + e_len != len(data):
            raise ValueError("trailing bytes")
        return rsa.RSAPublicNumbers(e, n).public_key()
    except (struct.error, ValueError) as exc:
        raise MgError(f"undecodable public key encoding: {exc}") from None


_OAEP = padding.OAEP(
    mgf=padding.MGF1(algorithm=hashes.SHA256()), algorithm=hashes.SHA256(), label=None
)
_PSS = padding.PSS(mgf=padding.MGF1(hashes.SHA256()), salt_length=padding.PSS.DIGEST_LENGTH)


def hybrid_encrypt(
    directory: PublicKeyDirectory,
    recipients: list[str],
    plaintext: bytes,
    *,
    rng: Rng | None = None,
    signer: Optional["RsaKeySystem"] = None,
) -> MessagePackage:
    """Encrypt once with a fresh session key, wrapping it per recipient.

    Needs only recipient public keys, so senders without a local keypair
    can encrypt; ``signer`` adds an RSA-PSS signature over nonce||ciphertext.
    """
    rng = rng or secrets.token_bytes
    if not recipients:
        raise MgError("rsa encryption needs at least one recipient")
    recipient_keys = [directory.get_public_key(normalize_identity(r)) for r in recipients]
    session_key = rng(32)
    nonce = rng(12)
    ciphertext = AESGCM(session_key).encrypt(nonce, plaintext, None)
    blocks = []
    for key_material in recipient_keys:
        public_key = decode_public_key(key_material)
        wrapped = public_key.encrypt(session_key, _OAEP)
        blocks.append(RecipientBlock(compute_fingerprint(key_material), wrapped))
    signature_block = None
    if signer is not None:
        signature_block = SignatureBlock(signer.fingerprint, signer.sign(nonce + ciphertext))
    return MessagePackage.create(SCHEME_RSA, blocks, nonce, ciphertext, signature_block)


class RsaKeySystem(KeySystem):
    def __init__(
        self,
        record: KeySystemRecord,
        private_key: rsa.RSAPrivateKey,
        directory: Optional[PublicKeyDirectory] = None,
    ) -> None:
        super().__init__(record)
        self._private_key = private_key
        self._directory = directory

    def encrypt(self, recipients: list[str], plaintext: bytes, *, rng: Rng | None = None,
                sign: bool = False) -> MessagePackage:
        if self._directory is None:
            raise MgError("no public key directory configured for encryption")
        return hybrid_encrypt(
            self._directory, recipients, plaintext, rng=rng, signer=self if sign else None
        )

    def decrypt(self, package: MessagePackage) -> bytes:
        if package.scheme_id != SCHEME_RSA:
            raise NoMatchingKey("package was made by a different scheme")
        mine = [b for b in package.recipient_blocks if b.fingerprint == self.fingerprint]
        if not mine:
            raise NoMatchingKey("no recipient block matches this key")
        try:
            session_key = self._private_key.decrypt(mine[0].wrapped_key, _OAEP)
        except ValueError:
            raise IntegrityFailure("session key unwrap failed") from None
        try:
            return AESGCM(session_key).decrypt(package.nonce, package.ciphertext, None)
        except InvalidTag:
            raise IntegrityFailure("payload authentication failed") from None

    def sign(self, data: bytes) -> bytes:
        return self._private_key.sign(data, _PSS, hashes.SHA256())

    def verify(self, data: bytes, signature: bytes, public_material: bytes | None = None) -> bool:
        if public_material is None:
            public_key = self._private_key.public_key()
        else:
            public_key = decode_public_key(public_material)
        try:
            public_key.verify(signature, data, _PSS, hashes.SHA256())
            return True
        except InvalidSignature:
            return False

    def public_key_material(self) -> bytes:
        return encode_public_key(self._private_key.public_key())


class RsaScheme(KeyScheme):
    scheme_id = SCHEME_RSA
    name = "rsa"

    def get_ui(self, existing: Optional[KeySystemRecord] = None) -> FormSchema:
        return FormSchema(
            title="Public-key identity",
            fields=(FormField("identity", "Email address", input_kind="identity"),),
        )

    def generate(self, identity: str, *, key_bits: int = KEY_BITS) -> KeySystemRecord:
        """Generate a fresh keypair for an identity (no publication)."""
        identity = normalize_identity(identity)
        if not identity:
            raise ValueError("identity must not be empty")
        private_key = rsa.generate_private_key(public_exponent=65537, key_size=key_bits)
        key_material = encode_public_key(private_key.public_key())
        private_der = private_key.private_bytes(
            serialization.Encoding.DER,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        )
        state = {
            "private_key": base64.b64encode(private_der).decode(),
            "public_key": base64.b64encode(key_material).decode(),
        }
        return KeySystemRecord(
            scheme_id=self.scheme_id,
            fingerprint=compute_fingerprint(key_material),
            identity=identity,
            can_have_recipients=True,
            attributes={"label": identity},
            state=encode_state(state),
        )

    def generate_and_publish(self, identity: str, key_server_session) -> KeySystemRecord:
        """Generate a keypair and publish the public half.

        ``key_server_session`` is an authenticated session that owns the
        identity; publication failures (NotOwner, ServerUnreachable)
        propagate unchanged.
        """
        record = self.generate(identity)
        key_material = base64.b64decode(decode_state(record.state)["public_key"])
        key_server_session.publish_key(record.identity, self.scheme_id, key_material)
        return record

    def create(self, fields: Mapping[str, str], *, rng: Rng | None = None) -> KeySystemRecord:
        return self.generate(fields["identity"])

    def update(self, record: KeySystemRecord, fields: Mapping[str, str]) -> KeySystemRecord:
        return record

    def load(self, record: KeySystemRecord, *, directory: Optional[PublicKeyDirectory] = None,
             **_: object) -> RsaKeySystem:
        state = decode_state(record.state)
        private_key = serialization.load_der_private_key(
            base64.b64decode(state["private_key"]), password=None
        )
        assert isinstance(private_key, rsa.RSAPrivateKey)
        return RsaKeySystem(record, private_key, directory)

    def public_key_material(self, record: KeySystemRecord) -> bytes:
        return base64.b64decode(decode_state(record.state)["public_key"])
