"""Scheme registry: one entry per key-management approach.

Packages name the scheme that made them in their first byte; decryption
dispatches through :func:`resolve_scheme` to the scheme whose id matches,
and every other scheme refuses the package.
"""
from __future__ import annotations

from ..errors import UnknownScheme
from .base import (
    FINGERPRINT_LEN,
    KeyScheme,
    KeySystem,
    KeySystemRecord,
    compute_fingerprint,
    normalize_identity,
)
from .ibe import IbeScheme
from .password import PasswordScheme
from .rsa import RsaScheme

_REGISTRY: dict[int, KeyScheme] = {}
_BY_NAME: dict[str, KeyScheme] = {}


def register_scheme(scheme: KeyScheme) -> None:
    _REGISTRY[scheme.scheme_id] = scheme
    _BY_NAME[scheme.name] = scheme


def resolve_scheme(scheme_id: int) -> KeyScheme:
    try:
        return _REGISTRY[scheme_id]
    except KeyError:
        raise UnknownScheme(f"no registered scheme with id {scheme_id:#04x}") from None


def scheme_by_name(name: str) -> KeyScheme:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise UnknownScheme(f"no registered scheme named {name!r}") from None


def registered_schemes() -> list[KeyScheme]:
    return [scheme for _, scheme in sorted(_REGISTRY.items())]


register_scheme(PasswordScheme())
register_scheme(RsaScheme())
register_scheme(IbeScheme())

__all__ = [
    "FINGERPRINT_LEN",
    "KeyScheme",
    "KeySystem",
    "KeySystemRecord",
    "compute_fingerprint",
    "normalize_identity",
    "register_scheme",
    "resolve_scheme",
    "scheme_by_name",
    "registered_schemes",
    "PasswordScheme",
    "RsaScheme",
    "IbeScheme",
]
