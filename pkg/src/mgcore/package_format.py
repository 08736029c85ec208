"""Binary message packages and their ASCII armor.

Wire layout (all lengths unsigned LEB128, no padding):

    scheme_id(1) || flags(1) || recipient_count
    per recipient: fingerprint(16) || wrapped_key_len || wrapped_key
    nonce(12) || ciphertext_len || ciphertext (AEAD output, 16-byte tag appended)
    if has_signature flag: signer_fingerprint(16) || sig_len || signature

The armor is ``MG1.<base64url, unpadded>.END`` with no whitespace, so a
single regex finds payloads inside arbitrary page text.  Armor decoding is
strict: only canonical unpadded base64url round-trips, which guarantees
that any single-bit change to armored text is detected before or during
decryption.
"""
from __future__ import annotations

import base64
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import EmptyPayload, InvalidPackage, MalformedArmor, UnknownScheme

SCHEME_PASSWORD = 0x01
SCHEME_RSA = 0x02
SCHEME_IBE = 0x03
KNOWN_SCHEME_IDS = frozenset({SCHEME_PASSWORD, SCHEME_RSA, SCHEME_IBE})

FLAG_HAS_SIGNATURE = 0x01
FLAG_MULTI_RECIPIENT = 0x02
_ALL_FLAGS = FLAG_HAS_SIGNATURE | FLAG_MULTI_RECIPIENT

FINGERPRINT_LEN = 16
NONCE_LEN = 12
TAG_LEN = 16

# lengths inside a package may not exceed this (also caps varint size)
_MAX_LEN = 2**32 - 1

ARMOR_PREFIX = "MG1."
ARMOR_SUFFIX = ".END"
ARMOR_RE = re.compile(r"MG1\.[A-Za-z0-9_-]+\.END")
_ARMOR_FULL_RE = re.compile(r"\AMG1\.([A-Za-z0-9_-]+)\.END\Z")


@dataclass(frozen=True)
class RecipientBlock:
    fingerprint: bytes
    wrapped_key: bytes


@dataclass(frozen=True)
class SignatureBlock:
    signer_fingerprint: bytes
    signature: bytes


@dataclass(frozen=True)
class MessagePackage:
    scheme_id: int
    flags: int
    recipient_blocks: tuple[RecipientBlock, ...]
    nonce: bytes
    ciphertext: bytes
    signature_block: Optional[SignatureBlock] = None

    @classmethod
    def create(
        cls,
        scheme_id: int,
        recipient_blocks: tuple[RecipientBlock, ...] | list[RecipientBlock],
        nonce: bytes,
        ciphertext: bytes,
        signature_block: Optional[SignatureBlock] = None,
    ) -> "MessagePackage":
        """Build a package with flags derived from its structure."""
        blocks = tuple(recipient_blocks)
        flags = 0
        if signature_block is not None:
            flags |= FLAG_HAS_SIGNATURE
        if len(blocks) > 1:
            flags |= FLAG_MULTI_RECIPIENT
        return cls(scheme_id, flags, blocks, nonce, ciphertext, signature_block)

    @property
    def has_signature(self) -> bool:
        return bool(self.flags & FLAG_HAS_SIGNATURE)

    @property
    def multi_recipient(self) -> bool:
        return bool(self.flags & FLAG_MULTI_RECIPIENT)


@dataclass(frozen=True)
class PayloadSpan:
    """An armored payload located inside a larger text (codepoint offsets)."""

    start: int
    end: int
    armored: str


def _write_uvarint(out: bytearray, value: int) -> None:
    if value < 0 or value > _MAX_LEN:
        raise InvalidPackage(f"length out of range: {value}")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise InvalidPackage("truncated package")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def byte(self) -> int:
        return self.take(1)[0]

    def uvarint(self) -> int:
        result = 0
        shift = 0
        start = self.pos
        while True:
            b = self.byte()
            result |= (b & 0x7F) << shift
            if not b & 0x80:
                break
            shift += 7
            if shift > 35:
                raise InvalidPackage("varint overflow")
        if result > _MAX_LEN:
            raise InvalidPackage("varint overflow")
        # reject non-minimal encodings so parse/assemble stay bijective
        if self.pos - start > 1 and self.data[self.pos - 1] == 0:
            raise InvalidPackage("non-minimal varint")
        return result

    def done(self) -> bool:
        return self.pos == len(self.data)


def _check_invariants(pkg: MessagePackage) -> None:
    if pkg.scheme_id not in KNOWN_SCHEME_IDS:
        raise UnknownScheme(f"unknown scheme id: {pkg.scheme_id:#04x}")
    if pkg.flags & ~_ALL_FLAGS:
        raise InvalidPackage(f"unknown flag bits: {pkg.flags:#04x}")
    if not pkg.recipient_blocks:
        raise InvalidPackage("package needs at least one recipient block")
    for block in pkg.recipient_blocks:
        if len(block.fingerprint) != FINGERPRINT_LEN:
            raise InvalidPackage("recipient fingerprint must be 16 bytes")
    if len(pkg.nonce) != NONCE_LEN:
        raise InvalidPackage("nonce must be 12 bytes")
    if len(pkg.ciphertext) < TAG_LEN:
        raise InvalidPackage("ciphertext shorter than the AEAD tag")
    if pkg.has_signature != (pkg.signature_block is not None):
        raise InvalidPackage("signature flag inconsistent with signature block")
    if pkg.multi_recipient != (len(pkg.recipient_blocks) > 1):
        raise InvalidPackage("multi-recipient flag inconsistent with block count")
    if pkg.signature_block is not None:
        if len(pkg.signature_block.signer_fingerprint) != FINGERPRINT_LEN:
            raise InvalidPackage("signer fingerprint must be 16 bytes")


def assemble_package(pkg: MessagePackage) -> bytes:
    """Serialize a package to its canonical byte layout."""
    _check_invariants(pkg)
    out = bytearray()
    out.append(pkg.scheme_id)
    out.append(pkg.flags)
    _write_uvarint(out, len(pkg.recipient_blocks))
    for block in pkg.recipient_blocks:
        out += block.fingerprint
        _write_uvarint(out, len(block.wrapped_key))
        out += block.wrapped_key
    out += pkg.nonce
    _write_uvarint(out, len(pkg.ciphertext))
    out += pkg.ciphertext
    if pkg.signature_block is not None:
        out += pkg.signature_block.signer_fingerprint
        _write_uvarint(out, len(pkg.signature_block.signature))
        out += pkg.signature_block.signature
    return bytes(out)


def parse_package(data: bytes) -> MessagePackage:
    """Parse canonical package bytes; strict inverse of :func:`assemble_package`."""
    r = _Reader(data)
    scheme_id = r.byte()
    if scheme_id not in KNOWN_SCHEME_IDS:
        raise UnknownScheme(f"unknown scheme id: {scheme_id:#04x}")
    flags = r.byte()
    if flags & ~_ALL_FLAGS:
        raise InvalidPackage(f"unknown flag bits: {flags:#04x}")
    count = r.uvarint()
    if count < 1:
        raise InvalidPackage("package needs at least one recipient block")
    blocks = []
    for _ in range(count):
        fingerprint = r.take(FINGERPRINT_LEN)
        wrapped = r.take(r.uvarint())
        blocks.append(RecipientBlock(fingerprint, wrapped))
    nonce = r.take(NONCE_LEN)
    ciphertext = r.take(r.uvarint())
    signature_block = None
    if flags & FLAG_HAS_SIGNATURE:
        signer = r.take(FINGERPRINT_LEN)
        signature = r.take(r.uvarint())
        signature_block = SignatureBlock(signer, signature)
    if not r.done():
        raise InvalidPackage("trailing bytes after package")
    pkg = MessagePackage(scheme_id, flags, tuple(blocks), nonce, ciphertext, signature_block)
    _check_invariants(pkg)
    return pkg


def encode_length_prefixed(parts: list[bytes] | tuple[bytes, ...]) -> bytes:
    """Concatenate byte strings, each preceded by its uvarint length."""
    out = bytearray()
    for part in parts:
        _write_uvarint(out, len(part))
        out += part
    return bytes(out)


def decode_length_prefixed(data: bytes, count: int) -> list[bytes]:
    """Inverse of :func:`encode_length_prefixed` for a known part count."""
    r = _Reader(data)
    parts = [r.take(r.uvarint()) for _ in range(count)]
    if not r.done():
        raise InvalidPackage("trailing bytes after length-prefixed parts")
    return parts


def armor_encode(pkg_bytes: bytes) -> str:
    """Encode package bytes as detectable ASCII armor."""
    if not pkg_bytes:
        raise EmptyPayload("cannot armor an empty payload")
    body = base64.urlsafe_b64encode(pkg_bytes).rstrip(b"=").decode("ascii")
    return f"{ARMOR_PREFIX}{body}{ARMOR_SUFFIX}"


def armor_decode(text: str) -> bytes:
    """Decode armored text back to package bytes.

    Only canonical armor is accepted: exact framing, no whitespace, and a
    base64url body whose re-encoding reproduces it bit for bit.
    """
    match = _ARMOR_FULL_RE.match(text)
    if match is None:
        raise MalformedArmor("text is not valid armor")
    body = match.group(1)
    if len(body) % 4 == 1:
        raise MalformedArmor("impossible base64url length")
    padded = body + "=" * (-len(body) % 4)
    try:
        raw = base64.urlsafe_b64decode(padded.encode("ascii"))
    except Exception:
        raise MalformedArmor("undecodable base64url body") from None
    if base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii") != body:
        raise MalformedArmor("non-canonical base64url body")
    if not raw:
        raise MalformedArmor("empty armor body")
    return raw


def scan_text(text: str) -> list[PayloadSpan]:
    """Find every armored payload in ``text``.

    Regex matches that fail strict decoding are skipped rather than
    reported: the scanner's job is locating payloads, not validating
    packages.
    """
    spans = []
    for match in ARMOR_RE.finditer(text):
        candidate = match.group(0)
        try:
            armor_decode(candidate)
        except MalformedArmor:
            continue
        spans.append(PayloadSpan(match.start(), match.end(), candidate))
    return spans


def iter_armored(text: str) -> Iterator[str]:
    for span in scan_text(text):
        yield span.armored
