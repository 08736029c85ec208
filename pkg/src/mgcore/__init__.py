"""Content-based encryption core.

Everything a client needs to keep plaintext away from the applications
that store or transmit it: a compact binary package format with
regex-detectable ASCII armor, pluggable key-management schemes
(shared password, RSA with key-server discovery, identity-based
encryption), a master-password keystore, key/file servers, and a
localhost agent that serves the browser overlay frontend.
"""

from .errors import MgError
from .package_format import (
    ARMOR_RE,
    MessagePackage,
    PayloadSpan,
    RecipientBlock,
    SignatureBlock,
    armor_decode,
    armor_encode,
    assemble_package,
    parse_package,
    scan_text,
)

__version__ = "0.1.0"

__all__ = [
    "MgError",
    "ARMOR_RE",
    "MessagePackage",
    "PayloadSpan",
    "RecipientBlock",
    "SignatureBlock",
    "armor_decode",
    "armor_encode",
    "assemble_package",
    "parse_package",
    "scan_text",
    "__version__",
]
