"""Binary BCH(255,131) codec over GF(2^8).

Primitive narrow-sense BCH with designed distance 2t+1 for t = 18: the
generator polynomial is the LCM of the minimal polynomials of alpha^1..
alpha^36 and has degree 124, giving k = 131. Decoding is the classic
syndrome / Berlekamp-Massey / Chien-search chain; a decode either corrects
up to t bit errors or reports failure, it never silently returns a word
outside the code.
"""

from __future__ import annotations

import numpy as np

_PRIM_POLY = 0x11D  # x^8 + x^4 + x^3 + x^2 + 1
N = 255
K = 131
T = 18

_EXP = np.zeros(512, dtype=np.int64)
_LOG = np.zeros(256, dtype=np.int64)


def _build_tables():
    x = 1
    for i in range(255):
        _EXP[i] = x
        _LOG[x] = i
        x <<= 1
        if x & 0x100:
            x ^= _PRIM_POLY
    _EXP[255:510] = _EXP[:255]


_build_tables()


def _gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(_EXP[_LOG[a] + _LOG[b]])


def _minimal_poly(exponent: int) -> list[int]:
    """Minimal polynomial of alpha^exponent over GF(2), low-order-first bits."""
    coset = set()
    e = exponent % 255
    while e not in coset:
        coset.add(e)
        e = (e * 2) % 255
    # product of (x - alpha^j) for j in the coset, coefficients in GF(256)
    poly = [1]
    for j in coset:
        root = int(_EXP[j])
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] ^= c
            nxt[i] ^= _gf_mul(c, root)
        poly = nxt
    assert all(c in (0, 1) for c in poly)
    return poly


def _generator_poly() -> np.ndarray:
    g = [1]
    seen = set()
    for e in range(1, 2 * T + 1):
        coset = frozenset((e * (1 << i)) % 255 for i in range(8))
        if coset in seen:
            continue
        seen.add(coset)
        m = _minimal_poly(e)
        prod = [0] * (len(g) + len(m) - 1)
        for i, a in enumerate(g):
            if a:
                for j, b in enumerate(m):
                    prod[i + j] ^= b
        g = prod
    arr = np.array(g, dtype=np.uint8)
    assert arr.size - 1 == N - K, f"generator degree {arr.size - 1}, expected {N - K}"
    return arr


_GEN = _generator_poly()  # low-order-first, degree 124


def bch_encode(message_bits: np.ndarray) -> np.ndarray:
    """Systematic encode of 131 bits into a 255-bit codeword.

    Layout: [131 message bits][124 parity bits].
    """
    msg = np.asarray(message_bits, dtype=np.uint8)
    if msg.size != K:
        raise ValueError(f"message must be {K} bits, got {msg.size}")
    deg = N - K
    rem = np.zeros(deg, dtype=np.uint8)
    gen_tail = _GEN[:deg][::-1]  # high-order-first without the leading 1
    for bit in msg:
        fb = bit ^ rem[0]
        rem[:-1] = rem[1:]
        rem[-1] = 0
        if fb:
            rem ^= gen_tail
    return np.concatenate([msg, rem])


def _syndromes(codeword: np.ndarray) -> np.ndarray:
    # S_i = r(alpha^i): codeword[0] is the x^(N-1) coefficient
    positions = np.flatnonzero(codeword)
    powers = (N - 1) - positions
    syn = np.zeros(2 * T, dtype=np.int64)
    if positions.size == 0:
        return syn
    for i in range(1, 2 * T + 1):
        terms = _EXP[(i * powers) % 255]
        syn[i - 1] = np.bitwise_xor.reduce(terms)
    return syn


def _berlekamp_massey(syn: np.ndarray) -> np.ndarray:
    """Error locator polynomial (low-order-first) from the syndromes."""
    C = [1] + [0] * (2 * T)
    B = [1] + [0] * (2 * T)
    L, m, b = 0, 1, 1
    for n in range(2 * T):
        d = int(syn[n])
        for i in range(1, L + 1):
            if C[i] and syn[n - i]:
                d ^= int(_EXP[_LOG[C[i]] + _LOG[syn[n - i]]])
        if d == 0:
            m += 1
        elif 2 * L <= n:
            tmp = C[:]
            coef = _EXP[(_LOG[d] - _LOG[b]) % 255]
            for i in range(2 * T + 1 - m):
                if B[i]:
                    C[i + m] ^= _gf_mul(int(coef), B[i])
            L = n + 1 - L
            B = tmp
            b = d
            m = 1
        else:
            coef = _EXP[(_LOG[d] - _LOG[b]) % 255]
            for i in range(2 * T + 1 - m):
                if B[i]:
                    C[i + m] ^= _gf_mul(int(coef), B[i])
            m += 1
    return np.array(C[: L + 1], dtype=np.int64)


def bch_decode(received_bits: np.ndarray) -> np.ndarray | None:
    """Correct up to T bit errors; return the 131 message bits or None on
    decode failure (detected uncorrectable pattern)."""
    r = np.asarray(received_bits, dtype=np.uint8).copy()
    if r.size != N:
        raise ValueError(f"codeword must be {N} bits, got {r.size}")
    syn = _syndromes(r)
    if not np.any(syn):
        return r[:K]
    locator = _berlekamp_massey(syn)
    nu = locator.size - 1
    if nu == 0 or nu > T:
        return None
    # Chien search: roots alpha^{-p} correspond to error positions p
    exps = np.arange(1, nu + 1)
    log_coeffs = np.where(locator[1:] > 0, _LOG[np.maximum(locator[1:], 1)], -1)
    error_powers = []
    for j in range(255):
        # evaluate locator at alpha^j
        acc = 1
        for i in range(nu):
            if log_coeffs[i] >= 0:
                acc ^= int(_EXP[(log_coeffs[i] + exps[i] * j) % 255])
        if acc == 0:
            error_powers.append((255 - j) % 255)
    if len(error_powers) != nu:
        return None
    positions = (N - 1) - np.array(error_powers)
    if np.any(positions < 0) or np.any(positions >= N):
        return None
    r[positions] ^= 1
    if np.any(_syndromes(r)):
        return None
    return r[:K]
