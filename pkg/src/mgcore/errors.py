"""Exception hierarchy shared across the package.

Two families:

* structural errors (bad armor, bad package bytes, keystore problems) are
  plain ``MgError`` subclasses;
* ``SchemeError`` and its subclasses carry a stable ``code`` plus an
  optional remediation :class:`~mgcore.forms.FormSchema` so a UI can walk
  the user through recovery (re-enter a password, unlock the store, ...).
"""
from __future__ import annotations

from typing import Optional

from .forms import FormSchema, password_reentry_form


class MgError(Exception):
    """Base class for every error raised by this package."""


class EmptyPayload(MgError):
    pass


class MalformedArmor(MgError):
    pass


class InvalidPackage(MgError):
    pass


class UnknownScheme(InvalidPackage):
    pass


class EmptyPassword(MgError):
    pass


class FingerprintMismatch(MgError):
    pass


class IntegrityFailure(MgError):
    pass


class UnknownRecipient(MgError):
    pass


class UnsupportedOperation(MgError):
    pass


class PayloadTooLarge(MgError):
    pass


class NotFoundError(MgError):
    pass


class NotOwner(MgError):
    pass


class InsufficientRuns(MgError):
    pass


class KeystoreError(MgError):
    pass


class KeystoreExists(KeystoreError):
    pass


class KeystoreMissing(KeystoreError):
    pass


class KeyNotFound(KeystoreError):
    pass


class CorruptStore(KeystoreError):
    pass


#: codes a UI can recover from by asking the user for new input
RECOVERABLE_CODES = frozenset({"MissingKey", "ExpiredCredentials", "WrongPassword"})

SCHEME_ERROR_CODES = RECOVERABLE_CODES | {"ServerUnreachable", "Other"}


class SchemeError(MgError):
    """A key-scheme level failure with machine-readable code and remediation."""

    default_code = "Other"

    def __init__(
        self,
        message: str = "",
        *,
        code: Optional[str] = None,
        remediation: Optional[FormSchema] = None,
    ) -> None:
        super().__init__(message or self.__class__.__name__)
        self.code = code or self.default_code
        if self.code not in SCHEME_ERROR_CODES:
            raise ValueError(f"unknown scheme error code: {self.code!r}")
        if remediation is None and self.code in RECOVERABLE_CODES:
            remediation = password_reentry_form()
        self.remediation = remediation

    def to_dict(self) -> dict:
        body = {"code": self.code, "message": str(self)}
        if self.remediation is not None:
            body["remediation"] = self.remediation.to_dict()
        return body


class WrongPassword(SchemeError):
    default_code = "WrongPassword"


class MissingKey(SchemeError):
    default_code = "MissingKey"


class NoMatchingKey(MissingKey):
    """No key system in the store can decrypt the package at hand."""


class ExpiredCredentials(SchemeError):
    default_code = "ExpiredCredentials"


class ServerUnreachable(SchemeError):
    default_code = "ServerUnreachable"
