"""RSA scheme: hybrid encryption, multi-recipient wrapping, signatures."""
import random

import pytest

from mgcore.errors import IntegrityFailure, NoMatchingKey, UnknownRecipient
from mgcore.keystore import Keystore
from mgcore.package_format import FLAG_MULTI_RECIPIENT, parse_package, assemble_package
from mgcore.schemes.rsa import (
    InMemoryDirectory,
    RsaScheme,
    decode_public_key,
    encode_public_key,
)

from conftest import seeded_rng


@pytest.fixture(scope="module")
def scheme():
    return RsaScheme()


@pytest.fixture(scope="module")
def parties(scheme):
    """Five identities with keypairs plus a shared directory."""
    directory = InMemoryDirectory()
    systems = {}
    for name in ("alice", "bob", "carol", "dan", "eve"):
        identity = f"{name}@example.com"
        record = scheme.generate(identity)
        directory.publish(identity, scheme.public_key_material(record))
        systems[identity] = scheme.load(record, directory=directory)
    return directory, systems


def test_public_key_encoding_roundtrip(parties):
    _, systems = parties
    material = systems["alice@example.com"].public_key_material()
    key = decode_public_key(material)
    assert encode_public_key(key) == material
    assert key.key_size == 2048


def test_generate_distinct_fingerprints(scheme):
    a = scheme.generate("same@example.com")
    b = scheme.generate("same@example.com")
    assert a.fingerprint != b.fingerprint


def test_single_recipient_roundtrip(parties):
    _, systems = parties
    alice = systems["alice@example.com"]
    bob = systems["bob@example.com"]
    pkg = alice.encrypt(["bob@example.com"], b"for bob only")
    assert len(pkg.recipient_blocks) == 1
    assert not pkg.multi_recipient
    assert bob.decrypt(pkg) == b"for bob only"


def test_two_recipients_same_ciphertext(parties):
    _, systems = parties
    alice = systems["alice@example.com"]
    pkg = alice.encrypt(["bob@example.com", "carol@example.com"], b"shared")
    assert pkg.flags & FLAG_MULTI_RECIPIENT
    assert len(pkg.recipient_blocks) == 2  # payload encrypted once
    assert systems["bob@example.com"].decrypt(pkg) == b"shared"
    assert systems["carol@example.com"].decrypt(pkg) == b"shared"


def test_non_recipient_cannot_decrypt(parties):
    _, systems = parties
    pkg = systems["alice@example.com"].encrypt(["bob@example.com"], b"private")
    with pytest.raises(NoMatchingKey):
        systems["eve@example.com"].decrypt(pkg)


def test_unknown_recipient(parties):
    _, systems = parties
    with pytest.raises(UnknownRecipient):
        systems["alice@example.com"].encrypt(["nobody@example.com"], b"x")


def test_tampered_wrapped_key_detected(parties):
    _, systems = parties
    pkg = systems["alice@example.com"].encrypt(["bob@example.com"], b"payload")
    block = pkg.recipient_blocks[0]
    bad = bytearray(block.wrapped_key)
    bad[5] ^= 0xFF
    tampered = parse_package(
        assemble_package(pkg).replace(block.wrapped_key, bytes(bad))
    )
    with pytest.raises(IntegrityFailure):
        systems["bob@example.com"].decrypt(tampered)


def test_tampered_ciphertext_detected(parties):
    _, systems = parties
    pkg = systems["alice@example.com"].encrypt(["bob@example.com"], b"payload")
    raw = bytearray(assemble_package(pkg))
    raw[-1] ^= 0x01  # last ciphertext/tag byte
    with pytest.raises(IntegrityFailure):
        systems["bob@example.com"].decrypt(parse_package(bytes(raw)))


def test_kem_dem_correctness_random_recipient_subsets(parties):
    _, systems = parties
    identities = sorted(systems)
    rnd = random.Random(71)
    for _ in range(20):
        chosen = rnd.sample(identities, rnd.randint(1, 5))
        msg = rnd.randbytes(rnd.randint(0, 5000))
        pkg = systems[identities[0]].encrypt(chosen, msg, rng=rnd.randbytes)
        for identity in chosen:
            assert systems[identity].decrypt(pkg) == msg
        for identity in identities:
            if identity not in chosen:
                with pytest.raises(NoMatchingKey):
                    systems[identity].decrypt(pkg)


def test_sign_verify_roundtrip(parties):
    _, systems = parties
    alice = systems["alice@example.com"]
    signature = alice.sign(b"abc")
    assert alice.verify(b"abc", signature) is True


def test_signature_soundness_and_completeness_randomized(parties):
    # >= 10^3 verification trials: valid signatures accepted, any bit flip
    # in data or signature rejected
    _, systems = parties
    alice = systems["alice@example.com"]
    rnd = random.Random(73)
    for _ in range(350):
        data = rnd.randbytes(rnd.randint(1, 200))
        signature = alice.sign(data)
        assert alice.verify(data, signature) is True
        flipped = bytearray(data)
        bit = rnd.randrange(len(flipped) * 8)
        flipped[bit // 8] ^= 1 << (bit % 8)
        assert alice.verify(bytes(flipped), signature) is False
        sig_flipped = bytearray(signature)
        bit = rnd.randrange(len(sig_flipped) * 8)
        sig_flipped[bit // 8] ^= 1 << (bit % 8)
        assert alice.verify(data, bytes(sig_flipped)) is False


def test_signature_wrong_key_fails(parties):
    _, systems = parties
    alice = systems["alice@example.com"]
    bob = systems["bob@example.com"]
    signature = alice.sign(b"statement")
    assert bob.verify(b"statement", signature) is False
    assert bob.verify(b"statement", signature, alice.public_key_material()) is True


def test_signed_package_flag_and_verification(parties):
    _, systems = parties
    alice = systems["alice@example.com"]
    bob = systems["bob@example.com"]
    pkg = alice.encrypt(["bob@example.com"], b"signed msg", sign=True)
    assert pkg.has_signature
    assert pkg.signature_block.signer_fingerprint == alice.fingerprint
    assert bob.decrypt(pkg) == b"signed msg"
    assert bob.verify(
        pkg.nonce + pkg.ciphertext,
        pkg.signature_block.signature,
        alice.public_key_material(),
    )


def test_record_roundtrips_through_keystore(tmp_path, scheme, parties):
    directory, _ = parties
    record = scheme.generate("store@example.com")
    directory.publish("store@example.com", scheme.public_key_material(record))
    store = Keystore.init(tmp_path / "ks", "master", iterations=100)
    store.save_system(record)
    reopened = Keystore.unlock(tmp_path / "ks", "master")
    system = scheme.load(reopened.get(record.fingerprint), directory=directory)
    pkg = system.encrypt(["store@example.com"], b"self")
    assert system.decrypt(pkg) == b"self"


def test_private_key_never_in_public_view(scheme):
    record = scheme.generate("leak@example.com")
    view = record.public_view()
    assert "state" not in view
    assert record.identity == "leak@example.com"
