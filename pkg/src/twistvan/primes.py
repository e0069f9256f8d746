"""Prime sieves shared by the coefficient, character, and prediction code."""

from __future__ import annotations

import numpy as np


def primes_up_to(limit: int) -> np.ndarray:
    """Primes <= limit as an int64 array (Eratosthenes, odd wheel)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def smallest_prime_factor(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 0 <= n <= limit (spf[0]=spf[1]=0)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    if limit >= 2:
        spf[2::2] = 2
        for p in range(3, int(limit**0.5) + 1, 2):
            if spf[p] == 0:
                s = spf[p * p :: 2 * p]
                s[s == 0] = p
                spf[p * p :: 2 * p] = s
        rest = np.arange(limit + 1, dtype=np.int64)
        spf[spf == 0] = rest[spf == 0]
        spf[:2] = 0
    return spf


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality for small n (desk-scale only)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| by trial division; n must be nonzero."""
    if n == 0:
        raise ValueError("cannot factor 0")
    n = abs(n)
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def radical(n: int) -> int:
    """Product of the distinct primes dividing |n|."""
    r = 1
    for p in factorize(n):
        r *= p
    return r


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())
