#!/usr/bin/env python3
"""Regenerate the ss512 curve constants embedded in mgcore/ibe/curve.py.

Searches deterministically (fixed seed) for:
  * q: 160-bit prime subgroup order
  * p = c*q - 1: 512-bit prime with c divisible by 4, so p = 3 (mod 4)
    and the curve y^2 = x^3 + x over F_p is supersingular with p+1 points
  * a generator of the order-q subgroup (cofactor-cleared from the
    smallest valid x coordinate)

Run: python3 tools/generate_group_params.py
"""
import random

import sympy

SEED = 0x6D67636F7265  # ascii "mgcore"


def main() -> None:
    rnd = random.Random(SEED)
    q = sympy.nextprime(rnd.getrandbits(160) | (1 << 159))
    c_bits = 512 - q.bit_length()
    while True:
        c = (rnd.getrandbits(c_bits) | (1 << (c_bits - 1))) & ~0b11
        p = c * q - 1
        if p.bit_length() == 512 and p % 4 == 3 and sympy.isprime(p):
            break

    assert (p + 1) % q == 0

    # generator: smallest x with x^3 + x a quadratic residue whose
    # cofactor-cleared point is non-trivial
    def pt_add(a, b):
        if a is None:
            return b
        if b is None:
            return a
        x1, y1 = a
        x2, y2 = b
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            lam = (3 * x1 * x1 + 1) * pow(2 * y1, p - 2, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, p - 2, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return (x3, (lam * (x1 - x3) - y1) % p)

    def pt_mul(k, a):
        r = None
        while k:
            if k & 1:
                r = pt_add(r, a)
            a = pt_add(a, a)
            k >>= 1
        return r

    x = 1
    while True:
        rhs = (x * x * x + x) % p
        y = pow(rhs, (p + 1) // 4, p)  # sqrt when p = 3 (mod 4)
        if y * y % p == rhs:
            g = pt_mul(c, (x, min(y, p - y)))
            if g is not None:
                break
        x += 1

    assert pt_mul(q, g) is None, "generator must have order q"

    print(f"P = {hex(p)}")
    print(f"Q = {hex(q)}")
    print(f"COFACTOR = {hex(c)}")
    print(f"GX = {hex(g[0])}")
    print(f"GY = {hex(g[1])}")


if __name__ == "__main__":
    main()
