"""Identity-based encryption: the efficient Boneh-Boyen construction.

Over a symmetric bilinear group (G = <g> of prime order q, pairing e):

    setup:    alpha random in Z_q;  g1 = g^alpha;  g2, h random in G;
              public params (g, g1, g2, h, v0 = e(g1, g2));
              master secret (alpha, msk = g2^alpha)
    extract:  for hashed identity v, random r in [1, q-1]:
              d0 = g2^alpha * (g1^v * h)^r,   d1 = g^r
    encrypt:  for m in GT, random s in [1, q-1]:
              C1 = m * v0^s,   C2 = g^s,   C3 = (g1^v * h)^s
    decrypt:  m = C1 * e(d1, C3) / e(d0, C2)

Correctness: e(d1,C3) = e(g, g1^v h)^(rs) and e(d0,C2) =
e(g2,g)^(alpha*s) * e(g1^v h, g)^(rs), so the blinding factor
v0^s = e(g1,g2)^s = e(g2,g)^(alpha*s) cancels exactly.

Identities map to scalars via SHA-256 reduced mod q.  A decryption under
the wrong identity yields a uniformly wrong GT element, never an error;
the hybrid layer above detects it through AEAD failure.
"""
from __future__ import annotations

import base64
import hashlib
import json
import secrets
from dataclasses import dataclass
from typing import Optional

from ..errors import MgError
from .groups import BilinearGroup, Element, GtElement, Rng, group_from_descriptor


def hash_identity_to_scalar(identity: str, group: BilinearGroup) -> int:
    """Deterministic scalar for an identity (normalized: trimmed, lowered)."""
    normalized = identity.strip().lower()
    return group.scalar_from_hash(normalized.encode("utf-8"))


@dataclass
class IbePublicParams:
    group: BilinearGroup
    g: Element
    g1: Element
    g2: Element
    h: Element
    v0: GtElement

    def to_bytes(self) -> bytes:
        doc = {
            "group": self.group.descriptor(),
            "g": base64.b64encode(self.group.element_to_bytes(self.g)).decode(),
            "g1": base64.b64encode(self.group.element_to_bytes(self.g1)).decode(),
            "g2": base64.b64encode(self.group.element_to_bytes(self.g2)).decode(),
            "h": base64.b64encode(self.group.element_to_bytes(self.h)).decode(),
            "v0": base64.b64encode(self.group.gt_to_bytes(self.v0)).decode(),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes) -> "IbePublicParams":
        try:
            doc = json.loads(data.decode("utf-8"))
            group = group_from_descriptor(doc["group"])
            return cls(
                group=group,
                g=group.element_from_bytes(base64.b64decode(doc["g"])),
                g1=group.element_from_bytes(base64.b64decode(doc["g1"])),
                g2=group.element_from_bytes(base64.b64decode(doc["g2"])),
                h=group.element_from_bytes(base64.b64decode(doc["h"])),
                v0=group.gt_from_bytes(base64.b64decode(doc["v0"])),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MgError(f"undecodable public parameters: {exc}") from None

    def digest(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()


@dataclass
class IbeMasterSecret:
    alpha: int
    msk: Element  # g2^alpha

    def to_bytes(self, group: BilinearGroup) -> bytes:
        doc = {
            "alpha": self.alpha,
            "msk": base64.b64encode(group.element_to_bytes(self.msk)).decode(),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes, group: BilinearGroup) -> "IbeMasterSecret":
        doc = json.loads(data.decode("utf-8"))
        return cls(
            alpha=int(doc["alpha"]),
            msk=group.element_from_bytes(base64.b64decode(doc["msk"])),
        )


@dataclass
class IbePrivateKey:
    v: int
    d0: Element
    d1: Element

    def to_bytes(self, group: BilinearGroup) -> bytes:
        doc = {
            "v": self.v,
            "d0": base64.b64encode(group.element_to_bytes(self.d0)).decode(),
            "d1": base64.b64encode(group.element_to_bytes(self.d1)).decode(),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes, group: BilinearGroup) -> "IbePrivateKey":
        try:
            doc = json.loads(data.decode("utf-8"))
            return cls(
                v=int(doc["v"]),
                d0=group.element_from_bytes(base64.b64decode(doc["d0"])),
                d1=group.element_from_bytes(base64.b64decode(doc["d1"])),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MgError(f"undecodable private key: {exc}") from None


@dataclass(frozen=True)
class IbeCiphertext:
    c1: GtElement
    c2: Element
    c3: Element


def setup(
    group: BilinearGroup,
    rng: Rng | None = None,
    *,
    alpha: Optional[int] = None,
    g2_exp: Optional[int] = None,
    h_exp: Optional[int] = None,
) -> tuple[IbePublicParams, IbeMasterSecret]:
    """Generate system parameters and the master secret.

    The keyword scalars pin the randomness for worked-example tests;
    normal callers let them default to fresh random draws.
    """
    rng = rng or secrets.token_bytes
    alpha = alpha if alpha is not None else group.random_scalar(rng)
    g2_exp = g2_exp if g2_exp is not None else group.random_scalar(rng)
    h_exp = h_exp if h_exp is not None else group.random_scalar(rng)
    g = group.generator()
    g1 = group.exp(g, alpha)
    g2 = group.exp(g, g2_exp)
    h = group.exp(g, h_exp)
    v0 = group.pair(g1, g2)
    params = IbePublicParams(group, g, g1, g2, h, v0)
    return params, IbeMasterSecret(alpha=alpha, msk=group.exp(g2, alpha))


def extract(
    msk: IbeMasterSecret,
    params: IbePublicParams,
    v: int,
    rng: Rng | None = None,
    *,
    r: Optional[int] = None,
) -> IbePrivateKey:
    """Issue the private key for hashed identity ``v``."""
    group = params.group
    rng = rng or secrets.token_bytes
    r = r if r is not None else group.random_scalar(rng)
    base = group.op(group.exp(params.g1, v), params.h)  # g1^v * h
    d0 = group.op(msk.msk, group.exp(base, r))
    d1 = group.exp(params.g, r)
    return IbePrivateKey(v=v, d0=d0, d1=d1)


def encrypt_element(
    params: IbePublicParams,
    v: int,
    m: GtElement,
    rng: Rng | None = None,
    *,
    s: Optional[int] = None,
) -> IbeCiphertext:
    """Encrypt a target-group element to hashed identity ``v``."""
    group = params.group
    rng = rng or secrets.token_bytes
    s = s if s is not None else group.random_scalar(rng)
    c1 = group.gt_mul(m, group.gt_exp(params.v0, s))
    c2 = group.exp(params.g, s)
    c3 = group.exp(group.op(group.exp(params.g1, v), params.h), s)
    return IbeCiphertext(c1, c2, c3)


def decrypt_element(params: IbePublicParams, key: IbePrivateKey, ct: IbeCiphertext) -> GtElement:
    """Recover m = C1 * e(d1, C3) / e(d0, C2)."""
    group = params.group
    numerator = group.gt_mul(ct.c1, group.pair(key.d1, ct.c3))
    return group.gt_mul(numerator, group.gt_inv(group.pair(key.d0, ct.c2)))


def random_gt_element(params: IbePublicParams, rng: Rng | None = None) -> GtElement:
    """Uniform element of GT (v0 generates it: q is prime and v0 != 1)."""
    return params.group.gt_exp(params.v0, params.group.random_scalar(rng))
