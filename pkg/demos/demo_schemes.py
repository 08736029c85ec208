#!/usr/bin/env python3
"""Walk through the three key schemes end to end, in process.

Shows: armor detection, shared-password packaging, RSA hybrid encryption
with multiple recipients, and identity-based encryption where the sender
needs nothing but the recipient's email address and the public system
parameters.

Run: python3 demos/demo_schemes.py
"""
import random

from mgcore.ibe import extract, hash_identity_to_scalar, setup
from mgcore.ibe.groups import group_by_name
from mgcore.package_format import armor_encode, assemble_package, scan_text
from mgcore.schemes.ibe import IbeScheme, kem_encrypt
from mgcore.schemes.password import PasswordScheme
from mgcore.schemes.rsa import InMemoryDirectory, RsaScheme

rnd = random.Random(2024)


def banner(title):
    print(f"\n=== {title} ===")


banner("shared password")
scheme = PasswordScheme()
record = scheme.create({"label": "team chat", "password": "horse staple", "stored": "true"})
system = scheme.load(record)
package = system.encrypt([], b"<p>meet at noon</p>")
armored = armor_encode(assemble_package(package))
print("armored:", armored[:60] + "...")
print("decrypts to:", system.decrypt(package).decode())

banner("payload detection in page text")
page = f"<div>note from a colleague: {armored}</div><div>plain text stays put</div>"
for span in scan_text(page):
    print(f"found payload at codepoints [{span.start}, {span.end})")

banner("rsa with a key directory")
rsa = RsaScheme()
directory = InMemoryDirectory()
systems = {}
for name in ("alice", "bob"):
    identity = f"{name}@example.com"
    r = rsa.generate(identity)
    directory.publish(identity, rsa.public_key_material(r))
    systems[identity] = rsa.load(r, directory=directory)
pkg = systems["alice@example.com"].encrypt(
    ["alice@example.com", "bob@example.com"], b"quarterly draft attached"
)
print("recipient blocks:", len(pkg.recipient_blocks))
for identity, sys_ in systems.items():
    print(f"{identity} reads:", sys_.decrypt(pkg).decode())

banner("identity-based encryption")
group = group_by_name("ss512")
params, msk = setup(group)  # this role belongs to the key server
ibe = IbeScheme()
carol_key = extract(msk, params, hash_identity_to_scalar("carol@example.com", group))
carol = ibe.load(ibe.record_from_parts("carol@example.com", params, carol_key))
# the sender touches neither the key server account nor any keystore:
pkg = kem_encrypt(params, ["carol@example.com"], b"no key exchange needed")
print("carol reads:", carol.decrypt(pkg).decode())

print("\nall demos completed")
