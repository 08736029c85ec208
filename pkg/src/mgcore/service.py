"""High-level packaging operations shared by the agent and the CLI.

Encryption picks a key system out of the keystore (by fingerprint, or by
scheme plus optional label/identity), falls back to encrypt-only identity
parameters fetched from a key server when asked to use the identity-based
scheme without a local record, and returns armored text.  Decryption scans
the package's recipient blocks for a fingerprint present in the keystore
and dispatches to the scheme named in the package header; every other
scheme refuses the package by construction.
"""
from __future__ import annotations

from typing import Optional

from .clients import KeyServerClient
from .errors import MgError, NoMatchingKey, UnknownScheme
from .ibe import IbePublicParams
from .keystore import Keystore
from .package_format import (
    MessagePackage,
    armor_decode,
    armor_encode,
    assemble_package,
    parse_package,
)
from .schemes import KeySystemRecord, resolve_scheme, scheme_by_name
from .schemes.base import Rng
from .schemes.ibe import kem_encrypt
from .schemes.rsa import hybrid_encrypt


def _load_system(record: KeySystemRecord, *, password: Optional[str] = None,
                 key_server: Optional[KeyServerClient] = None):
    scheme = resolve_scheme(record.scheme_id)
    runtime: dict = {}
    if scheme.name == "password":
        runtime["password"] = password
    if scheme.name == "rsa":
        runtime["directory"] = key_server
    return scheme.load(record, **runtime)


def select_record(
    store: Optional[Keystore],
    *,
    fingerprint: Optional[bytes] = None,
    scheme_name: Optional[str] = None,
    label: Optional[str] = None,
    identity: Optional[str] = None,
) -> Optional[KeySystemRecord]:
    if store is None:
        return None
    if fingerprint is not None:
        return store.get(fingerprint)
    if scheme_name is None:
        return None
    scheme = scheme_by_name(scheme_name)
    candidates = store.find(scheme_id=scheme.scheme_id, label=label, identity=identity)
    return candidates[0] if candidates else None


def encrypt_to_armor(
    store: Optional[Keystore],
    recipients: list[str],
    plaintext: bytes,
    *,
    fingerprint: Optional[bytes] = None,
    scheme_name: Optional[str] = None,
    label: Optional[str] = None,
    identity: Optional[str] = None,
    key_server: Optional[KeyServerClient] = None,
    password: Optional[str] = None,
    rng: Rng | None = None,
) -> str:
    record = select_record(
        store, fingerprint=fingerprint, scheme_name=scheme_name, label=label, identity=identity
    )
    if record is None:
        # encrypting needs no local key for the public-key schemes: ibe
        # wants only the system parameters, rsa only recipient keys
        if scheme_name == "ibe" and key_server is not None:
            params = IbePublicParams.from_bytes(key_server.get_ibe_params())
            package = kem_encrypt(params, recipients, plaintext, rng)
            return armor_encode(assemble_package(package))
        if scheme_name == "rsa" and key_server is not None:
            package = hybrid_encrypt(key_server, recipients, plaintext, rng=rng)
            return armor_encode(assemble_package(package))
        raise UnknownScheme(
            "no matching key system in the store"
            + (f" for scheme {scheme_name!r}" if scheme_name else "")
        )
    system = _load_system(record, password=password, key_server=key_server)
    package = system.encrypt(recipients, plaintext, rng=rng)
    return armor_encode(assemble_package(package))


def decrypt_package(
    store: Keystore,
    package: MessagePackage,
    *,
    password: Optional[str] = None,
) -> tuple[bytes, KeySystemRecord]:
    for block in package.recipient_blocks:
        try:
            record = store.get(block.fingerprint)
        except MgError:
            continue
        if record.scheme_id != package.scheme_id:
            continue
        system = _load_system(record, password=password)
        return system.decrypt(package), record
    raise NoMatchingKey("no key system in the store can decrypt this package")


def decrypt_armored(
    store: Keystore,
    armored: str,
    *,
    password: Optional[str] = None,
) -> tuple[bytes, KeySystemRecord]:
    package = parse_package(armor_decode(armored))
    return decrypt_package(store, package, password=password)
