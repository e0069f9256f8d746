"""Fundamental discriminants, Kronecker symbols, and twist families.

The twist families are, for a curve with squarefree conductor Q:

* minus: fundamental d with -X <= d < 0 and chi_d(p) = -a_p for every p | Q;
* plus (prime Q only): fundamental 0 < d <= X with chi_d(Q) = a_Q, d != 1.

Optionally a progression refinement keeps only d with chi_d(q) = lambda for a
fixed prime q not dividing Q.  Every emitted d must satisfy the even-sign
condition chi_d(-Q) * w_E = +1; a violation means the configured root number
or a pinned bad-prime coefficient is wrong, and enumeration refuses to emit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from numba import njit

from .curve_model import CurveSpec, ap
from .errors import ConfigError, DomainError
from .primes import is_prime, is_squarefree

SIEVE_BLOCK = 1 << 20


@njit(cache=True, nogil=True)
def _kron_numba(d, n):
    if n == 0:
        if d == 1 or d == -1:
            return np.int8(1)
        return np.int8(0)
    k = 1
    if n < 0:
        n = -n
        if d < 0:
            k = -1
    if d % 2 == 0 and n % 2 == 0:
        return np.int8(0)
    while n % 2 == 0:
        n //= 2
        dm8 = d % 8
        if dm8 == 3 or dm8 == 5:
            k = -k
    a = d % n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            nm8 = n % 8
            if nm8 == 3 or nm8 == 5:
                k = -k
        t = a
        a = n
        n = t
        if a % 4 == 3 and n % 4 == 3:
            k = -k
        a %= n
    if n == 1:
        return np.int8(k)
    return np.int8(0)


@njit(cache=True, nogil=True)
def chi_period(d, spf):
    """chi_d(r) for r = 0..|d|-1 (one full period), by a multiplicative sweep
    over residues: primes get the Kronecker symbol, composites split off
    their smallest prime factor."""
    m = -d if d < 0 else d
    chi = np.zeros(m, dtype=np.int8)
    if m == 1:
        chi[0] = 1  # d = +-1: the trivial character
        return chi
    chi[1] = 1
    for r in range(2, m):
        p = spf[r]
        if p == r:
            chi[r] = _kron_numba(d, r)
        else:
            chi[r] = chi[p] * chi[r // p]
    return chi


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d|n); completely multiplicative in n, period |d| for
    fundamental d.  n may be negative ((d|-1) is the sign character of d)."""
    if n == 0:
        return 1 if d in (1, -1) else 0
    k = 1
    if n < 0:
        n = -n
        if d < 0:
            k = -1
    if d % 2 == 0 and n % 2 == 0:
        return 0
    while n % 2 == 0:
        n //= 2
        dm8 = d % 8
        if dm8 in (3, 5):
            k = -k
    # n odd > 0: Jacobi symbol, periodic in d mod n
    a = d % n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                k = -k
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            k = -k
        a %= n
    return k if n == 1 else 0


def is_fundamental(d: int) -> bool:
    """True iff d is the discriminant of a quadratic field (or d = 1)."""
    if d == 0:
        raise DomainError("discriminants are nonzero")
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class FamilySelector:
    sign: str  # 'minus' or 'plus'
    bound: int
    curve: CurveSpec
    progression: Optional[tuple[int, int]] = None  # (q, lambda)

    def __post_init__(self):
        if self.sign not in ("minus", "plus"):
            raise ConfigError(f"sign must be 'minus' or 'plus', got {self.sign!r}")
        if self.bound < 1:
            raise ConfigError("family bound X must be positive")
        if self.sign == "plus" and not is_prime(self.curve.conductor):
            raise ConfigError(
                "the plus family is defined only for prime conductor, "
                f"got Q={self.curve.conductor}"
            )
        if self.progression is not None:
            q, lam = self.progression
            if not is_prime(q):
                raise ConfigError(f"progression modulus {q} is not prime")
            if self.curve.conductor % q == 0:
                raise ConfigError(f"progression prime q={q} divides the conductor")
            if lam not in (-1, 1):
                raise ConfigError("progression lambda must be +-1")


@dataclass(frozen=True)
class FamilyCensus:
    total: int
    n_plus: int = 0
    n_minus: int = 0
    n_zero: int = 0


def _squarefree_mask(X: int) -> np.ndarray:
    """mask[m] for 0 <= m <= X, marked blockwise to bound the working set."""
    mask = np.ones(X + 1, dtype=bool)
    mask[0] = False
    ps = []
    p = 2
    while p * p <= X:
        if all(p % r for r in ps):
            ps.append(p)
        p += 1
    for lo in range(0, X + 1, SIEVE_BLOCK):
        hi = min(lo + SIEVE_BLOCK, X + 1)
        for p in ps:
            p2 = p * p
            start = ((lo + p2 - 1) // p2) * p2
            if start < hi:
                mask[start:hi:p2] = False
    return mask


def fundamental_magnitudes(X: int, negative: bool) -> np.ndarray:
    """|d| of all fundamental discriminants with the given sign, |d| <= X,
    ascending.  Linear-time squarefree sieve; no per-d factorization."""
    sf = _squarefree_mask(X)
    m = np.arange(X + 1, dtype=np.int64)
    if negative:
        # d = -m: fundamental iff m = 3 mod 4 squarefree, or m = 4m' with
        # m' squarefree and m' = 1, 2 mod 4
        direct = sf & (m % 4 == 3)
        quarter = np.zeros(X + 1, dtype=bool)
        idx4 = m[4 :: 4]
        mp = idx4 >> 2
        quarter[idx4] = sf[mp] & ((mp % 4 == 1) | (mp % 4 == 2))
    else:
        direct = sf & (m % 4 == 1)
        quarter = np.zeros(X + 1, dtype=bool)
        idx4 = m[4 :: 4]
        mp = idx4 >> 2
        quarter[idx4] = sf[mp] & ((mp % 4 == 2) | (mp % 4 == 3))
    return m[direct | quarter]


def _chi_vec(ds: np.ndarray, p: int) -> np.ndarray:
    """Vector chi_d(p) over signed discriminants; chi_d(p) is periodic in
    d mod p for odd p and mod 8 for p = 2."""
    mod = 8 if p == 2 else p
    table = np.array([kronecker(r, p) for r in range(mod)], dtype=np.int8)
    return table[ds % mod]


def enumerate_family(sel: FamilySelector) -> np.ndarray:
    """All d in the family, ascending |d| (int64 array of signed d)."""
    curve = sel.curve
    d_sign = -1 if sel.sign == "minus" else 1
    mags = fundamental_magnitudes(sel.bound, negative=(d_sign < 0))
    ds = d_sign * mags
    keep = np.ones(len(ds), dtype=bool)
    if sel.sign == "minus":
        for p in curve.bad_primes:
            keep &= _chi_vec(ds, p) == -ap(curve, p)
    else:
        Q = curve.conductor
        keep &= _chi_vec(ds, Q) == ap(curve, Q)
        keep &= mags != 1  # the trivial character is not a genuine twist
    if sel.progression is not None:
        q, lam = sel.progression
        keep &= _chi_vec(ds, q) == lam
    ds = ds[keep]
    if len(ds):
        _check_even_sign(curve, sel, int(ds[0]))
    return ds


def _check_even_sign(curve: CurveSpec, sel: FamilySelector, d: int) -> None:
    """chi_d(-Q) * w_E must be +1; the family conditions make this constant
    across the family, so one witness decides for all."""
    sign = kronecker(d, -curve.conductor) * curve.root_number
    if sign != 1:
        raise ConfigError(
            f"{curve.label}: functional-equation sign is -1 on the {sel.sign} "
            f"family (witness d={d}); root_number or a pinned bad-prime "
            "coefficient is inconsistent"
        )


def family_census(sel: FamilySelector) -> FamilyCensus:
    """Family size and, when a progression prime is set, the lambda split."""
    base = FamilySelector(sel.sign, sel.bound, sel.curve, None)
    ds = enumerate_family(base)
    if sel.progression is None:
        return FamilyCensus(total=len(ds))
    q, _ = sel.progression
    chi = _chi_vec(ds, q)
    return FamilyCensus(
        total=len(ds),
        n_plus=int((chi == 1).sum()),
        n_minus=int((chi == -1).sum()),
        n_zero=int((chi == 0).sum()),
    )


def export_family_csv(sel: FamilySelector, path: str | Path) -> int:
    """Write the family as CSV (d, and chi_q when a progression was given)."""
    ds = enumerate_family(sel)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if sel.progression is not None:
            q, _ = sel.progression
            writer.writerow(["d", f"chi_{q}"])
            for d in ds:
                writer.writerow([int(d), kronecker(int(d), q)])
        else:
            writer.writerow(["d"])
            for d in ds:
                writer.writerow([int(d)])
    return len(ds)
