"""Bilinear group backends for identity-based encryption.

A backend supplies a prime-order source group G = <g>, a target group GT,
and a symmetric pairing e: G x G -> GT with

    e(g^a, g^b) = e(g, g)^(a*b)   (bilinearity)
    e(g, g) != 1                  (non-degeneracy)

plus canonical element serializations.  Two backends exist:

* :class:`MockGroup` represents elements of both groups by their discrete
  logarithms modulo a small prime, so the pairing is literal exponent
  multiplication.  Completely transparent, trivially breakable, and the
  correctness oracle for everything built on top.
* ``ss512`` (see :mod:`mgcore.ibe.curve`), a supersingular elliptic curve
  with a distortion-map pairing, for actual use.
"""
from __future__ import annotations

import hashlib
import secrets
from abc import ABC, abstractmethod
from typing import Any, Callable

from ..errors import MgError

Rng = Callable[[int], bytes]

Element = Any  # backend-defined representation
GtElement = Any


class BilinearGroup(ABC):
    kind: str
    order: int  # prime q

    # -- source group ---------------------------------------------------

    @abstractmethod
    def generator(self) -> Element: ...

    @abstractmethod
    def op(self, a: Element, b: Element) -> Element:
        """Group operation in G."""

    @abstractmethod
    def exp(self, a: Element, k: int) -> Element:
        """a composed with itself k times (k may be any integer)."""

    # -- pairing and target group ----------------------------------------

    @abstractmethod
    def pair(self, a: Element, b: Element) -> GtElement: ...

    @abstractmethod
    def gt_mul(self, x: GtElement, y: GtElement) -> GtElement: ...

    @abstractmethod
    def gt_exp(self, x: GtElement, k: int) -> GtElement: ...

    @abstractmethod
    def gt_inv(self, x: GtElement) -> GtElement: ...

    @abstractmethod
    def gt_one(self) -> GtElement: ...

    # -- serialization ----------------------------------------------------

    @abstractmethod
    def element_to_bytes(self, a: Element) -> bytes: ...

    @abstractmethod
    def element_from_bytes(self, data: bytes) -> Element: ...

    @abstractmethod
    def gt_to_bytes(self, x: GtElement) -> bytes: ...

    @abstractmethod
    def gt_from_bytes(self, data: bytes) -> GtElement: ...

    @abstractmethod
    def descriptor(self) -> dict:
        """JSON-able description sufficient to reconstruct the backend."""

    # -- scalars -----------------------------------------------------------

    def random_scalar(self, rng: Rng | None = None) -> int:
        """Uniform scalar in [1, q-1]; zero excluded to avoid degenerate
        ciphertexts and keys."""
        rng = rng or secrets.token_bytes
        width = (self.order.bit_length() + 7) // 8 + 16
        return int.from_bytes(rng(width), "big") % (self.order - 1) + 1

    def scalar_from_hash(self, data: bytes) -> int:
        return int.from_bytes(hashlib.sha256(data).digest(), "big") % self.order


class MockGroup(BilinearGroup):
    """Exponent-space stand-in: every element is its own discrete log.

    G and GT elements are plain ints modulo ``q``; the pairing multiplies
    logs.  Satisfies the full contract but offers no security whatsoever.
    Test use only.
    """

    kind = "mock"

    def __init__(self, q: int) -> None:
        if q < 3:
            raise ValueError("q must be an odd prime")
        self.order = q

    def generator(self) -> int:
        return 1

    def op(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def exp(self, a: int, k: int) -> int:
        return (a * k) % self.order

    def pair(self, a: int, b: int) -> int:
        return (a * b) % self.order

    def gt_mul(self, x: int, y: int) -> int:
        return (x + y) % self.order

    def gt_exp(self, x: int, k: int) -> int:
        return (x * k) % self.order

    def gt_inv(self, x: int) -> int:
        return (-x) % self.order

    def gt_one(self) -> int:
        return 0

    def _int_to_bytes(self, value: int) -> bytes:
        return value.to_bytes(8, "big")

    def element_to_bytes(self, a: int) -> bytes:
        return self._int_to_bytes(a)

    def element_from_bytes(self, data: bytes) -> int:
        if len(data) != 8:
            raise MgError("bad mock element encoding")
        value = int.from_bytes(data, "big")
        if value >= self.order:
            raise MgError("mock element out of range")
        return value

    def gt_to_bytes(self, x: int) -> bytes:
        return self._int_to_bytes(x)

    def gt_from_bytes(self, data: bytes) -> int:
        return self.element_from_bytes(data)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "q": self.order}


def group_from_descriptor(descriptor: dict) -> BilinearGroup:
    kind = descriptor.get("kind")
    if kind == "mock":
        return MockGroup(int(descriptor["q"]))
    if kind == "ss512":
        from .curve import Ss512Group

        return Ss512Group.from_descriptor(descriptor)
    raise MgError(f"unknown group kind: {kind!r}")


def group_by_name(name: str) -> BilinearGroup:
    if name == "mock":
        return MockGroup(1009)
    if name == "ss512":
        from .curve import Ss512Group

        return Ss512Group()
    raise MgError(f"unknown group name: {name!r}")
