"""Point-counting kernels for Dirichlet coefficients of an elliptic curve.

Two counting strategies are implemented:

* a quadratic-character sum over x (O(p) per prime), used for small primes and
  as the cross-check / fallback path;
* a Shanks--Mestre baby-step/giant-step order finder (O(p^{1/4}) group
  operations per prime) with quadratic-twist disambiguation, used for the bulk
  of the primes feeding long coefficient tables.

Both run under numba; all arithmetic stays in int64, which is exact for
p < 2^31.  Random points are drawn from a per-prime deterministic generator so
results are reproducible and independent of scheduling.
"""

from __future__ import annotations

import numpy as np
from numba import njit

CHARSUM_CUTOFF = 65536  # below: character sum; above: baby-step/giant-step


@njit(cache=True, nogil=True)
def _ap_charsum(p, b2, b4, b6):
    # a_p = -sum_x chi_p(4x^3 + b2 x^2 + 2 b4 x + b6); valid for odd good p
    qr = np.zeros(p, dtype=np.int8)
    for i in range(1, (p - 1) // 2 + 1):
        qr[(i * i) % p] = 1
    c3 = 4 % p
    c2 = b2 % p
    c1 = (2 * b4) % p
    c0 = b6 % p
    s = 0
    for x in range(p):
        g = ((((c3 * x + c2) % p) * x + c1) % p * x + c0) % p
        if g != 0:
            if qr[g]:
                s += 1
            else:
                s -= 1
    return -s


@njit(cache=True, nogil=True)
def _modinv(a, p):
    a %= p
    t, newt = 0, 1
    r, newr = p, a
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    return t % p


@njit(cache=True, nogil=True)
def _powmod(a, e, p):
    a %= p
    r = 1
    while e > 0:
        if e & 1:
            r = (r * a) % p
        a = (a * a) % p
        e >>= 1
    return r


@njit(cache=True, nogil=True)
def _sqrt_mod(a, p):
    # Tonelli-Shanks; caller guarantees a is a quadratic residue mod odd p
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return _powmod(a, (p + 1) // 4, p)
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while _powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m = s
    c = _powmod(z, q, p)
    t = _powmod(a, q, p)
    r = _powmod(a, (q + 1) // 2, p)
    while t != 1:
        i = 0
        t2 = t
        while t2 != 1:
            t2 = (t2 * t2) % p
            i += 1
        b = c
        for _ in range(m - i - 1):
            b = (b * b) % p
        m = i
        c = (b * b) % p
        t = (t * c) % p
        r = (r * b) % p
    return r


@njit(cache=True, nogil=True, inline="always")
def _ec_add(x1, y1, x2, y2, A, p):
    # affine addition on y^2 = x^3 + Ax + B; (-1, -1) is the identity
    if x1 < 0:
        return x2, y2
    if x2 < 0:
        return x1, y1
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return np.int64(-1), np.int64(-1)
        num = ((3 * x1) % p * x1 + A) % p
        lam = num * _modinv((2 * y1) % p, p) % p
    else:
        lam = (y2 - y1) % p * _modinv((x2 - x1) % p, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return x3, y3


@njit(cache=True, nogil=True)
def _ec_mul(n, x, y, A, p):
    rx, ry = np.int64(-1), np.int64(-1)
    qx, qy = x, y
    while n > 0:
        if n & 1:
            rx, ry = _ec_add(rx, ry, qx, qy, A, p)
        qx, qy = _ec_add(qx, qy, qx, qy, A, p)
        n >>= 1
    return rx, ry


@njit(cache=True, nogil=True)
def _isqrt(n):
    r = np.int64(np.sqrt(n))
    while (r + 1) * (r + 1) <= n:
        r += 1
    while r * r > n:
        r -= 1
    return r


@njit(cache=True, nogil=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True, nogil=True)
def _order_multiples(px, py, A, p, lo, hi, bx, by, hkey, hval):
    """All m in [lo, hi] with m*P = O, via baby-step/giant-step.

    Returns (count, first, gap): the number of matches, the smallest match,
    and the spacing between matches (= ord(P)) when count > 1.
    """
    L = hi - lo + 1
    s = _isqrt(L) + 1
    hsize = hkey.shape[0]
    hmask = hsize - 1
    hkey[:] = -1
    # baby steps j*P for j = 1..s; if the identity shows up early we know ord(P)
    qx, qy = px, py
    for j in range(1, s + 1):
        if qx < 0:
            o = np.int64(j)  # identity reached stepping to j*P, so ord(P) = j
            first = ((lo + o - 1) // o) * o
            if first > hi:
                return np.int64(0), np.int64(-1), np.int64(0)
            cnt = (hi - first) // o + 1
            return cnt, first, o
        bx[j] = qx
        by[j] = qy
        h = (qx * 0x9E3779B1) & hmask
        while hkey[h] != -1:
            h = (h + 1) & hmask
        hkey[h] = qx
        hval[h] = j
        qx, qy = _ec_add(qx, qy, px, py, A, p)
    # giant steps G_i = (lo + i*s)*P; matches m found as base -/+ j
    matches = np.empty(2 * s + 8, dtype=np.int64)
    n_match = 0
    sx, sy = _ec_mul(s, px, py, A, p)
    gx, gy = _ec_mul(lo, px, py, A, p)
    i = 0
    while lo + i * s <= hi + s:
        base = lo + i * s
        if gx < 0:
            if lo <= base <= hi and n_match < matches.shape[0]:
                matches[n_match] = base
                n_match += 1
        else:
            h = (gx * 0x9E3779B1) & hmask
            while hkey[h] != -1:
                if hkey[h] == gx:
                    j = hval[h]
                    if by[j] == gy:
                        m = base - j
                        if lo <= m <= hi and n_match < matches.shape[0]:
                            matches[n_match] = m
                            n_match += 1
                    if (p - by[j]) % p == gy:
                        m = base + j
                        if lo <= m <= hi and n_match < matches.shape[0]:
                            matches[n_match] = m
                            n_match += 1
                h = (h + 1) & hmask
        gx, gy = _ec_add(gx, gy, sx, sy, A, p)
        i += 1
    if n_match == 0:
        return np.int64(0), np.int64(-1), np.int64(0)
    first = matches[0]
    for t in range(1, n_match):
        if matches[t] < first:
            first = matches[t]
    # the match set is exactly the multiples of ord(P) in [lo, hi]; matches may
    # repeat or arrive out of order, so recover ord(P) as a gcd of offsets
    gap = np.int64(0)
    for t in range(n_match):
        gap = _gcd(gap, matches[t] - first)
    if gap == 0:
        return np.int64(1), first, np.int64(0)
    cnt = (hi - first) // gap + 1
    return cnt, first, gap


@njit(cache=True, nogil=True)
def _ec_group_order(A, B, p):
    """#E(F_p) for y^2 = x^3 + Ax + B, nonsingular mod p; -1 if undecided."""
    w = _isqrt(4 * p)
    lo = p + 1 - w
    hi = p + 1 + w
    L = hi - lo + 1
    s = _isqrt(L) + 1
    hsize = 1
    while hsize < 4 * (s + 2):
        hsize *= 2
    bx = np.empty(s + 2, dtype=np.int64)
    by = np.empty(s + 2, dtype=np.int64)
    hkey = np.empty(hsize, dtype=np.int64)
    hval = np.empty(hsize, dtype=np.int64)
    # quadratic twist by a non-residue c
    c = np.int64(2)
    while _powmod(c, (p - 1) // 2, p) != p - 1:
        c += 1
    At = (A * c % p) * c % p
    Bt = ((B * c % p) * c % p) * c % p
    lcm_e = np.int64(1)
    lcm_t = np.int64(1)
    state = np.uint64(p) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(12345)
    for rounds in range(48):
        on_twist = rounds & 1 == 1
        # deterministic random point on E (or on the twist)
        px = np.int64(-1)
        py = np.int64(-1)
        for _ in range(96):
            state = state * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
            x = np.int64((state >> np.uint64(17)) % np.uint64(p))
            if on_twist:
                t = (((x * x) % p * x) % p + At * x + Bt) % p
            else:
                t = (((x * x) % p * x) % p + A * x + B) % p
            if t == 0:
                px, py = x, np.int64(0)
                break
            if _powmod(t, (p - 1) // 2, p) == 1:
                px, py = x, _sqrt_mod(t, p)
                break
        if px < 0:
            continue
        Ause = At if on_twist else A
        cnt, first, gap = _order_multiples(px, py, Ause, p, lo, hi, bx, by, hkey, hval)
        if cnt == 1:
            if on_twist:
                return 2 * p + 2 - first
            return first
        if cnt > 1:
            if on_twist:
                lcm_t = lcm_t // _gcd(lcm_t, gap) * gap
            else:
                lcm_e = lcm_e // _gcd(lcm_e, gap) * gap
        # candidates: multiples of lcm_e in [lo,hi] with 2p+2-m divisible by lcm_t
        m0 = ((lo + lcm_e - 1) // lcm_e) * lcm_e
        n_cand = 0
        cand = np.int64(-1)
        m = m0
        while m <= hi:
            if (2 * p + 2 - m) % lcm_t == 0:
                n_cand += 1
                cand = m
                if n_cand > 1:
                    break
            m += lcm_e
        if n_cand == 1:
            return cand
    return np.int64(-1)


@njit(cache=True, nogil=True)
def ap_good_primes(ps, b2, b4, b6, c4, c6, cutoff):
    """a_p for an array of good odd primes (caller excludes p=2 and bad p)."""
    out = np.empty(ps.shape[0], dtype=np.int64)
    for i in range(ps.shape[0]):
        p = ps[i]
        if p < cutoff:
            out[i] = _ap_charsum(p, b2, b4, b6)
        else:
            A = (-27 * (c4 % p)) % p
            B = (-54 * (c6 % p)) % p
            N = _ec_group_order(A, B, p)
            if N < 0:
                out[i] = _ap_charsum(p, b2, b4, b6)
            else:
                out[i] = p + 1 - N
    return out


@njit(cache=True, nogil=True)
def an_from_ap(N, ps, aps, Q):
    """Extend a_p at primes to a_n for all n <= N (Hecke relations).

    ps/aps list all primes <= N with their coefficients; Q is the conductor
    (a_{p^e} = a_p^e at p | Q, the usual three-term recursion elsewhere).
    """
    spf = np.zeros(N + 1, dtype=np.int32)
    for i in range(2, N + 1, 2):
        spf[i] = 2
    p = 3
    while p * p <= N:
        if spf[p] == 0:
            for m in range(p * p, N + 1, 2 * p):
                if spf[m] == 0:
                    spf[m] = p
        p += 2
    for n in range(3, N + 1, 2):
        if spf[n] == 0:
            spf[n] = n
    # pp[n] = spf[n]^{v_spf(n)}: the full power of the smallest prime in n
    pp = np.zeros(N + 1, dtype=np.int32)
    a = np.zeros(N + 1, dtype=np.int64)
    if N >= 1:
        a[1] = 1
        pp[1] = 1
    for i in range(ps.shape[0]):
        if ps[i] <= N:
            a[ps[i]] = aps[i]
    for n in range(2, N + 1):
        p64 = np.int64(spf[n])
        m = n // p64
        if spf[m] == p64:
            pp[n] = pp[m] * p64
        else:
            pp[n] = p64
        if p64 == n:
            continue  # prime, already filled
        q = pp[n]
        r = n // q
        if r > 1:
            a[n] = a[q] * a[r]
        else:
            # n = p^e with e >= 2
            if Q % p64 == 0:
                a[n] = a[p64] * a[n // p64]
            else:
                a[n] = a[p64] * a[n // p64] - p64 * a[n // (p64 * p64)]
    return a
