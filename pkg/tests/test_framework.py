"""Fingerprints, identity normalization, scheme registry, form schemas."""
import hashlib
import random

import pytest

from mgcore.errors import MgError, SchemeError, UnknownScheme, WrongPassword
from mgcore.forms import FormField, FormSchema
from mgcore.schemes import (
    KeySystemRecord,
    compute_fingerprint,
    normalize_identity,
    registered_schemes,
    resolve_scheme,
    scheme_by_name,
)


def test_fingerprint_matches_sha256_oracle():
    digest = hashlib.sha256(b"abc").digest()
    assert compute_fingerprint(b"abc") == digest[:16]
    assert compute_fingerprint(b"abc").hex() == "ba7816bf8f01cfea414140de5dae2223"


def test_fingerprint_rejects_empty_input():
    with pytest.raises(MgError):
        compute_fingerprint(b"")


def test_fingerprint_deterministic_and_fixed_length():
    for material in (b"x", b"y" * 1000, bytes(range(256))):
        assert compute_fingerprint(material) == compute_fingerprint(material)
        assert len(compute_fingerprint(material)) == 16


def test_fingerprint_bit_flip_avalanche():
    rnd = random.Random(5)
    seen = set()
    for _ in range(10_000):
        material = bytearray(rnd.randbytes(24))
        fp_a = compute_fingerprint(bytes(material))
        bit = rnd.randrange(len(material) * 8)
        material[bit // 8] ^= 1 << (bit % 8)
        fp_b = compute_fingerprint(bytes(material))
        assert fp_a != fp_b
        seen.add(fp_a)
    assert len(seen) == 10_000  # no collisions across trials


def test_normalize_identity():
    assert normalize_identity("  Alice@X.COM ") == "alice@x.com"


def test_registry_resolves_known_schemes():
    assert resolve_scheme(0x01).name == "password"
    assert resolve_scheme(0x02).name == "rsa"
    assert resolve_scheme(0x03).name == "ibe"
    assert scheme_by_name("ibe").scheme_id == 0x03
    assert [s.scheme_id for s in registered_schemes()] == [1, 2, 3]


def test_registry_unknown_scheme():
    with pytest.raises(UnknownScheme):
        resolve_scheme(0x55)
    with pytest.raises(UnknownScheme):
        scheme_by_name("rot13")


def test_every_scheme_exposes_entry_points():
    for scheme in registered_schemes():
        ui = scheme.get_ui()
        assert isinstance(ui, FormSchema)
        for method in ("create", "update", "load", "handle_error"):
            assert callable(getattr(scheme, method))


def test_form_schema_rejects_duplicate_names():
    with pytest.raises(ValueError):
        FormSchema(fields=(FormField("a", "A"), FormField("a", "B")))


def test_form_field_validates_kind():
    with pytest.raises(ValueError):
        FormField("a", "A", input_kind="dropdown")


def test_scheme_error_recoverable_codes_carry_remediation():
    err = WrongPassword("nope")
    assert err.code == "WrongPassword"
    assert err.remediation is not None
    assert err.to_dict()["remediation"]["fields"]


def test_scheme_error_unknown_code_rejected():
    with pytest.raises(ValueError):
        SchemeError("x", code="Gremlins")


def test_scheme_dispatch_other_schemes_refuse():
    # a package names its scheme in the header; every other scheme refuses
    # it even if a recipient fingerprint were to collide
    from dataclasses import replace

    from mgcore.errors import FingerprintMismatch, NoMatchingKey
    from mgcore.package_format import SCHEME_IBE, SCHEME_RSA
    from mgcore.schemes.password import PasswordScheme
    from mgcore.schemes.rsa import RsaScheme

    pw_scheme = PasswordScheme()
    pw_system = pw_scheme.load(
        pw_scheme.create({"label": "d", "password": "p", "stored": "true"}, iterations=10)
    )
    package = pw_system.encrypt([], b"dispatch me")
    rsa_system = RsaScheme().load(RsaScheme().generate("d@x.com"))
    with pytest.raises(NoMatchingKey):
        rsa_system.decrypt(replace(package, scheme_id=SCHEME_RSA))
    with pytest.raises(FingerprintMismatch):
        pw_system.decrypt(replace(package, scheme_id=SCHEME_IBE))


def test_record_roundtrips_through_dict():
    record = KeySystemRecord(
        scheme_id=2,
        fingerprint=bytes(range(16)),
        identity="alice@x.com",
        can_have_recipients=True,
        attributes={"label": "alice"},
        state=b"\x00\x01\x02",
    )
    assert KeySystemRecord.from_dict(record.to_dict()) == record
    view = record.public_view()
    assert "state" not in view
    assert view["fingerprint"] == record.fingerprint.hex()
