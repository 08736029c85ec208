"""Supersingular-curve bilinear group (``ss512``).

Curve: y^2 = x^3 + x over F_p with p = 3 (mod 4), which is supersingular
with exactly p + 1 points.  G is the order-q subgroup (q | p + 1, 160-bit
prime); GT is the order-q subgroup of F_p^2* with F_p^2 = F_p[i]/(i^2+1).

The symmetric pairing is the reduced Tate pairing composed with the
distortion map phi(x, y) = (-x, i*y), which embeds the second argument
into a linearly independent subgroup so that e(P, P) != 1:

    e(A, B) = f_{q,A}(phi(B)) ^ ((p^2 - 1) / q)

Miller's algorithm uses denominator elimination: vertical-line factors lie
in F_p and die in the final exponentiation because (p - 1) divides it.

Element encodings (fixed, part of the wire format):
  * G:  x || y, each 64-byte big-endian         (128 bytes)
  * GT: real || imaginary, each 64-byte big-endian (128 bytes)

Sizes here (512-bit p, embedding degree 2) match classic pairing
deployments of the early IBE era, roughly 80-bit security: adequate for a
research artifact, not for protecting real secrets today.  Constants are
regenerated by ``tools/generate_group_params.py``.
"""
from __future__ import annotations

from typing import Optional

from ..errors import MgError
from .groups import BilinearGroup

try:
    from gmpy2 import invert as _fast_invert
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is an optional speedup
    _fast_invert = None

    def mpz(x):  # type: ignore[misc]
        return x

P = mpz(0xB51354BED549BAFAC466F34345B275DED46A87A7D2F470C82810F8C8F3B6EFBE7B06EE0E1CF92C72E8B5574408D061BC1F40B30E7E3FDC754D1478A768D78AEB)
Q = mpz(0xC802E0FB3BA94BB7BE9EB559535BFA55F9FFE98B)
COFACTOR = mpz(0xE7C37CD8C74241864A6951E83C6D5597006C689B3E819544F1D7ABFB19593779A5DBC1E26CBB454D2634C644)
GX = mpz(0x28C75EB83C4961B440DE793FDF73B15E1B1CE5777CA29087A22A3F25B737ABBE82B448D00D04C82809FE8288CE0A013FF152D5F618209011B8AC5CBFE4B242CF)
GY = mpz(0x5F14646A7C9540EF9FCE17704AC39C140A07FAB6916A39E862BAA2AF8DB1C48DF945FA69214F20BD23517D9B3DD999D27D5E8A97E14DDB7C8CB7D1E02D87E0E6)

_FIELD_BYTES = 64
_FINAL_EXP = (P * P - 1) // Q

Point = Optional[tuple]  # affine (x, y); None is the identity
Fp2 = tuple  # (real, imag)

_GT_ONE: Fp2 = (mpz(1), mpz(0))


if _fast_invert is not None:
    def _inv(a):
        return _fast_invert(a, P)
else:
    def _inv(a):
        return pow(a, P - 2, P)


def _pt_neg(a: Point) -> Point:
    if a is None:
        return None
    return (a[0], (-a[1]) % P)


def _pt_add(a: Point, b: Point) -> Point:
    if a is None:
        return b
    if b is None:
        return a
    x1, y1 = a
    x2, y2 = b
    if x1 == x2:
        if (y1 + y2) % P == 0:
            return None
        lam = (3 * x1 * x1 + 1) * _inv(2 * y1) % P
    else:
        lam = (y2 - y1) * _inv((x2 - x1) % P) % P
    x3 = (lam * lam - x1 - x2) % P
    return (x3, (lam * (x1 - x3) - y1) % P)


def _pt_mul(k, a: Point) -> Point:
    if k < 0:
        return _pt_mul(-k, _pt_neg(a))
    r: Point = None
    while k:
        if k & 1:
            r = _pt_add(r, a)
        a = _pt_add(a, a)
        k >>= 1
    return r


def _on_curve(x, y) -> bool:
    return (y * y - (x * x * x + x)) % P == 0


def _fp2_mul(u: Fp2, v: Fp2) -> Fp2:
    a, b = u
    c, d = v
    ac = a * c % P
    bd = b * d % P
    return ((ac - bd) % P, ((a + b) * (c + d) - ac - bd) % P)


def _fp2_sqr(u: Fp2) -> Fp2:
    a, b = u
    return ((a - b) * (a + b) % P, 2 * a * b % P)


def _fp2_inv(u: Fp2) -> Fp2:
    a, b = u
    norm_inv = _inv((a * a + b * b) % P)
    return (a * norm_inv % P, (-b) * norm_inv % P)


def _fp2_pow(u: Fp2, e) -> Fp2:
    if e < 0:
        return _fp2_pow(_fp2_inv(u), -e)
    r = _GT_ONE
    for bit in bin(e)[2:]:
        r = _fp2_sqr(r)
        if bit == "1":
            r = _fp2_mul(r, u)
    return r


def _miller(a: Point, b: Point) -> Fp2:
    """f_{Q,a} evaluated at phi(b), vertical lines omitted."""
    if a is None or b is None:
        raise MgError("cannot pair the identity element")
    xq, yq = b
    mxq = (-xq) % P  # x-coordinate of phi(b); its y is i*yq
    f = _GT_ONE
    r = a
    for bit in bin(Q)[3:]:
        x1, y1 = r
        lam = (3 * x1 * x1 + 1) * _inv(2 * y1) % P
        line = ((lam * (x1 + xq) - y1) % P, yq)
        f = _fp2_mul(_fp2_sqr(f), line)
        r = _pt_add(r, r)
        if bit == "1":
            x1, y1 = r
            x2, y2 = a
            if x1 == x2 and (y1 + y2) % P == 0:
                # final vertical line (r = -a, so r + a = identity); the
                # factor lies in F_p and is erased by the final exponentiation
                r = None
                continue
            lam = (y2 - y1) * _inv((x2 - x1) % P) % P
            line = ((lam * (x1 + xq) - y1) % P, yq)
            f = _fp2_mul(f, line)
            r = _pt_add(r, a)
    return f


class Ss512Group(BilinearGroup):
    kind = "ss512"

    def __init__(self) -> None:
        self.order = int(Q)
        self._g = (GX, GY)

    def generator(self) -> Point:
        return self._g

    def op(self, a: Point, b: Point) -> Point:
        return _pt_add(a, b)

    def exp(self, a: Point, k: int) -> Point:
        return _pt_mul(mpz(k % self.order), a)

    def pair(self, a: Point, b: Point) -> Fp2:
        return _fp2_pow(_miller(a, b), _FINAL_EXP)

    def gt_mul(self, x: Fp2, y: Fp2) -> Fp2:
        return _fp2_mul(x, y)

    def gt_exp(self, x: Fp2, k: int) -> Fp2:
        return _fp2_pow(x, mpz(k % self.order))

    def gt_inv(self, x: Fp2) -> Fp2:
        return _fp2_inv(x)

    def gt_one(self) -> Fp2:
        return _GT_ONE

    def element_to_bytes(self, a: Point) -> bytes:
        if a is None:
            raise MgError("the identity element has no encoding")
        return int(a[0]).to_bytes(_FIELD_BYTES, "big") + int(a[1]).to_bytes(_FIELD_BYTES, "big")

    def element_from_bytes(self, data: bytes) -> Point:
        if len(data) != 2 * _FIELD_BYTES:
            raise MgError("bad group element encoding")
        x = mpz(int.from_bytes(data[:_FIELD_BYTES], "big"))
        y = mpz(int.from_bytes(data[_FIELD_BYTES:], "big"))
        if x >= P or y >= P or not _on_curve(x, y):
            raise MgError("encoded point is not on the curve")
        return (x, y)

    def gt_to_bytes(self, x: Fp2) -> bytes:
        return int(x[0]).to_bytes(_FIELD_BYTES, "big") + int(x[1]).to_bytes(_FIELD_BYTES, "big")

    def gt_from_bytes(self, data: bytes) -> Fp2:
        if len(data) != 2 * _FIELD_BYTES:
            raise MgError("bad target-group element encoding")
        a = mpz(int.from_bytes(data[:_FIELD_BYTES], "big"))
        b = mpz(int.from_bytes(data[_FIELD_BYTES:], "big"))
        if a >= P or b >= P:
            raise MgError("target-group component out of range")
        return (a, b)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "p": hex(int(P)), "q": hex(int(Q))}

    @classmethod
    def from_descriptor(cls, descriptor: dict) -> "Ss512Group":
        group = cls()
        if "p" in descriptor and int(descriptor["p"], 16) != int(P):
            raise MgError("ss512 descriptor does not match compiled constants")
        if "q" in descriptor and int(descriptor["q"], 16) != int(Q):
            raise MgError("ss512 descriptor does not match compiled constants")
        return group
