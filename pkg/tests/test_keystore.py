"""Keystore persistence: round trips, wrong passwords, on-disk leak checks."""
import struct

import pytest

from mgcore.errors import (
    CorruptStore,
    EmptyPassword,
    KeyNotFound,
    KeystoreExists,
    KeystoreMissing,
    WrongPassword,
)
from mgcore.keystore import Keystore
from mgcore.schemes import KeySystemRecord

MASTER = "correct horse battery staple"


def record(n: int, secret: bytes = b"") -> KeySystemRecord:
    return KeySystemRecord(
        scheme_id=(n % 3) + 1,
        fingerprint=bytes([n]) * 16,
        identity=f"user{n}@example.com",
        can_have_recipients=True,
        attributes={"label": f"key {n}"},
        state=secret or f"state-{n}".encode(),
    )


def test_init_then_list_empty(tmp_path):
    store = Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    assert store.list() == []


def test_init_refuses_existing_file(tmp_path):
    Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    with pytest.raises(KeystoreExists):
        Keystore.init(tmp_path / "ks", MASTER, iterations=100)


def test_init_requires_password(tmp_path):
    with pytest.raises(EmptyPassword):
        Keystore.init(tmp_path / "ks", "", iterations=100)


def test_unlock_missing_file(tmp_path):
    with pytest.raises(KeystoreMissing):
        Keystore.unlock(tmp_path / "nope", MASTER)


def test_save_reopen_roundtrip(tmp_path):
    store = Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    records = [record(1), record(2), record(3)]
    for r in records:
        store.save_system(r)
    reopened = Keystore.unlock(tmp_path / "ks", MASTER)
    assert reopened.list() == sorted(
        records, key=lambda r: (r.scheme_id, r.identity, r.fingerprint.hex())
    )


def test_wrong_password_rejected(tmp_path):
    Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    with pytest.raises(WrongPassword):
        Keystore.unlock(tmp_path / "ks", "not the password")


def test_flipped_ciphertext_bit_detected(tmp_path):
    path = tmp_path / "ks"
    Keystore.init(path, MASTER, iterations=100)
    blob = bytearray(path.read_bytes())
    blob[-1] ^= 0x01
    path.write_bytes(bytes(blob))
    with pytest.raises((WrongPassword, CorruptStore)):
        Keystore.unlock(path, MASTER)


def test_truncated_file_is_corrupt(tmp_path):
    path = tmp_path / "ks"
    Keystore.init(path, MASTER, iterations=100)
    path.write_bytes(path.read_bytes()[:20])
    with pytest.raises(CorruptStore):
        Keystore.unlock(path, MASTER)


def test_delete_and_delete_unknown(tmp_path):
    store = Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    store.save_system(record(1))
    store.delete(record(1).fingerprint)
    assert store.list() == []
    with pytest.raises(KeyNotFound):
        store.delete(b"\xff" * 16)


def test_get_and_find(tmp_path):
    store = Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    store.save_system(record(1))
    store.save_system(record(2))
    assert store.get(record(2).fingerprint).identity == "user2@example.com"
    with pytest.raises(KeyNotFound):
        store.get(b"\x00" * 16)
    assert len(store.find(scheme_id=record(1).scheme_id)) == 1
    assert store.find(identity="user2@example.com")[0] == record(2)
    assert store.find(label="key 1")[0] == record(1)


def test_file_layout_header(tmp_path):
    path = tmp_path / "ks"
    Keystore.init(path, MASTER, iterations=1234)
    blob = path.read_bytes()
    # salt(16) || iterations(uint32 LE) || nonce(12) || ciphertext(>= tag)
    assert struct.unpack("<I", blob[16:20])[0] == 1234
    assert len(blob) >= 16 + 4 + 12 + 16


def test_on_disk_bytes_leak_nothing(tmp_path):
    path = tmp_path / "ks"
    store = Keystore.init(path, MASTER, iterations=100)
    secret = b"TOPSECRET-private-key-material-TOPSECRET"
    store.save_system(record(7, secret=secret))
    blob = path.read_bytes()
    assert MASTER.encode() not in blob
    assert secret not in blob
    assert b"MG1." not in blob
    assert b"user7@example.com" not in blob  # whole document is sealed


def test_list_sorted_by_scheme_then_identity(tmp_path):
    store = Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    a = KeySystemRecord(3, b"\x01" * 16, "zz@x.com", True, {}, b"s")
    b = KeySystemRecord(1, b"\x02" * 16, "aa@x.com", False, {}, b"s")
    c = KeySystemRecord(1, b"\x03" * 16, "bb@x.com", False, {}, b"s")
    for r in (a, b, c):
        store.save_system(r)
    assert [r.identity for r in store.list()] == ["aa@x.com", "bb@x.com", "zz@x.com"]


def test_keystore_roundtrip_many_random_records(tmp_path):
    import random

    rnd = random.Random(11)
    store = Keystore.init(tmp_path / "ks", MASTER, iterations=100)
    records = []
    for i in range(20):
        r = KeySystemRecord(
            scheme_id=rnd.choice([1, 2, 3]),
            fingerprint=rnd.randbytes(16),
            identity=f"u{i}@x.com",
            can_have_recipients=bool(rnd.getrandbits(1)),
            attributes={"label": f"l{i}", "extra": "é✓"},
            state=rnd.randbytes(rnd.randint(0, 400)),
        )
        records.append(r)
        store.save_system(r)
    reopened = Keystore.unlock(tmp_path / "ks", MASTER)
    assert {r.fingerprint: r for r in reopened.list()} == {r.fingerprint: r for r in records}
