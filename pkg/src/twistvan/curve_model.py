"""Elliptic curves over Q with squarefree conductor: models, a_n, local factors.

A curve is loaded from a key=value config file carrying its label, the five
Weierstrass coefficients, the conductor, the functional-equation sign, and
optionally pinned bad-prime coefficients.  Loading validates that the
conductor is squarefree, that the discriminant is nonzero and supported on
exactly the conductor's primes (the model must be globally minimal; no
reduction is attempted), and that pinned bad-prime values agree with the
split/non-split tangent test.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from . import pointcount
from .errors import CapacityError, ConfigError, DomainError
from .primes import factorize, is_prime, primes_up_to

AN_BUDGET = 3 * 10**7  # largest coefficient table we agree to hold in memory

BUILTIN_CURVES = {"11A": "curve_11a.cfg", "307A": "curve_307a.cfg"}


@dataclass(frozen=True)
class CurveSpec:
    """A minimal Weierstrass model y^2+a1xy+a3y = x^3+a2x^2+a4x+a6."""

    label: str
    weierstrass: tuple[int, int, int, int, int]
    conductor: int
    root_number: int
    pinned_bad_ap: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = self.weierstrass
        if self.root_number not in (-1, 1):
            raise ConfigError(f"{self.label}: root number must be +-1")
        if self.conductor < 1:
            raise ConfigError(f"{self.label}: conductor must be positive")
        qfac = factorize(self.conductor)
        if any(e > 1 for e in qfac.values()):
            raise ConfigError(
                f"{self.label}: conductor {self.conductor} is not squarefree"
            )
        disc = discriminant(self.weierstrass)
        if disc == 0:
            raise ConfigError(f"{self.label}: singular model (discriminant 0)")
        if set(factorize(disc)) != set(qfac):
            raise ConfigError(
                f"{self.label}: discriminant {disc} is not supported on the "
                f"conductor's primes {sorted(qfac)}; the model is not minimal "
                "with squarefree conductor"
            )
        for p, val in self.pinned_bad_ap.items():
            if self.conductor % p != 0:
                raise ConfigError(f"{self.label}: pinned a_{p} but {p} does not divide Q")
            if val not in (-1, 1):
                raise ConfigError(f"{self.label}: pinned a_{p} must be +-1")
            computed = _bad_ap(self, p)
            if computed != val:
                raise ConfigError(
                    f"{self.label}: pinned a_{p}={val} contradicts the "
                    f"split/non-split test ({computed})"
                )

    @property
    def discriminant(self) -> int:
        return discriminant(self.weierstrass)

    @property
    def bad_primes(self) -> tuple[int, ...]:
        return tuple(sorted(factorize(self.conductor)))

    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.weierstrass
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
        return c4, c6


@dataclass(frozen=True)
class CoefficientTable:
    """Immutable a_1..a_N table; safe to share across threads once built."""

    curve: CurveSpec
    limit: int
    values: np.ndarray  # values[n] = a_n, index 0 unused

    def a(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise CapacityError(f"a_n requested beyond table limit {self.limit}")
        return int(self.values[n])


def discriminant(weierstrass) -> int:
    a1, a2, a3, a4, a6 = weierstrass
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def load_curve(source: str | Path) -> CurveSpec:
    """Load a curve config from a path, or by builtin label ('11A', '307A')."""
    if isinstance(source, str) and source in BUILTIN_CURVES:
        text = (
            resources.files("twistvan.data")
            .joinpath(BUILTIN_CURVES[source])
            .read_text()
        )
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"curve config not found: {source}")
        text = path.read_text()
    fields: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"malformed curve config line: {line!r}")
        key, _, val = line.partition("=")
        fields[key.strip()] = val.strip()
    try:
        label = fields["label"]
        ai = tuple(int(fields[k]) for k in ("a1", "a2", "a3", "a4", "a6"))
        conductor = int(fields["conductor"])
        w = int(fields["root_number"])
    except KeyError as exc:
        raise ConfigError(f"curve config missing field {exc}") from exc
    pinned: dict[int, int] = {}
    if "bad_ap" in fields and fields["bad_ap"]:
        for part in fields["bad_ap"].split(","):
            p_str, _, v_str = part.partition(":")
            pinned[int(p_str)] = int(v_str)
    return CurveSpec(label, ai, conductor, w, pinned)


def _brute_points(curve: CurveSpec, p: int) -> int:
    """#E(F_p) by direct enumeration (tiny p only)."""
    a1, a2, a3, a4, a6 = (c % p for c in curve.weierstrass)
    n = 1
    for x in range(p):
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y) % p == rhs:
                n += 1
    return n


def _singular_point(curve: CurveSpec, p: int) -> tuple[int, int]:
    a1, a2, a3, a4, a6 = (c % p for c in curve.weierstrass)
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % p:
                continue
            fx = (a1 * y - 3 * x * x - 2 * a2 * x - a4) % p
            fy = (2 * y + a1 * x + a3) % p
            if fx == 0 and fy == 0:
                return x, y
    raise ConfigError(f"{curve.label}: no singular point mod {p}, but p | Q")


def _bad_ap(curve: CurveSpec, p: int) -> int:
    """a_p at a multiplicative prime: +1 split, -1 non-split (tangent test)."""
    if p == 2:
        # char-2 tangent cone is awkward; count the nonsingular points instead
        return p - _nonsingular_points(curve, p)
    a1, a2, _, _, _ = (c % p for c in curve.weierstrass)
    x0, _ = _singular_point(curve, p)
    # quadratic part at the node: v^2 + a1*u*v - (3*x0 + a2)*u^2
    disc = (a1 * a1 + 4 * (3 * x0 + a2)) % p
    if disc == 0:
        raise ConfigError(
            f"{curve.label}: cusp at p={p}; additive reduction is unsupported"
        )
    return 1 if pow(disc, (p - 1) // 2, p) == 1 else -1


def _nonsingular_points(curve: CurveSpec, p: int) -> int:
    """#E_ns(F_p) including the point at infinity, by enumeration."""
    a1, a2, a3, a4, a6 = (c % p for c in curve.weierstrass)
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % p:
                continue
            fx = (a1 * y - 3 * x * x - 2 * a2 * x - a4) % p
            fy = (2 * y + a1 * x + a3) % p
            if fx == 0 and fy == 0:
                continue
            n += 1
    return n


def ap(curve: CurveSpec, p: int) -> int:
    """a_p = p + 1 - #E(F_p) at good p; the split/non-split sign at bad p."""
    if not is_prime(p):
        raise DomainError(f"ap requires a prime, got {p}")
    if curve.conductor % p == 0:
        if p in curve.pinned_bad_ap:
            return curve.pinned_bad_ap[p]
        return _bad_ap(curve, p)
    if p < 5:
        return p + 1 - _brute_points(curve, p)
    b2, b4, b6, _ = curve.b_invariants()
    return int(pointcount._ap_charsum(p, b2, b4, b6))


# ---------------------------------------------------------------------------
# bulk tables

_table_lock = threading.Lock()
_ap_cache: dict[tuple[str, tuple, int], tuple[np.ndarray, np.ndarray]] = {}


def ap_table(curve: CurveSpec, limit: int) -> tuple[np.ndarray, np.ndarray]:
    """(primes <= limit, a_p) as int64 arrays; memoized per curve model."""
    key = (curve.label, curve.weierstrass, limit)
    with _table_lock:
        hit = _ap_cache.get(key)
        if hit is not None:
            return hit
        for (lbl, wei, lim), (ps, aps) in _ap_cache.items():
            if lbl == curve.label and wei == curve.weierstrass and lim >= limit:
                n = int(np.searchsorted(ps, limit, side="right"))
                out = (ps[:n], aps[:n])
                _ap_cache[key] = out
                return out
    ps = primes_up_to(limit)
    aps = compute_ap_range(curve, ps)
    with _table_lock:
        _ap_cache[key] = (ps, aps)
    return ps, aps


def compute_ap_range(curve: CurveSpec, ps: np.ndarray) -> np.ndarray:
    """a_p for an arbitrary ascending array of primes."""
    aps = np.empty(len(ps), dtype=np.int64)
    b2, b4, b6, _ = curve.b_invariants()
    c4, c6 = curve.c_invariants()
    small_or_bad = []
    good = np.ones(len(ps), dtype=bool)
    for i, p in enumerate(ps):
        p = int(p)
        if p < 5 or curve.conductor % p == 0:
            small_or_bad.append(i)
            good[i] = False
    if good.any():
        aps[good] = pointcount.ap_good_primes(
            ps[good], b2, b4, b6, c4, c6, pointcount.CHARSUM_CUTOFF
        )
    for i in small_or_bad:
        aps[i] = ap(curve, int(ps[i]))
    return aps


def an_table(curve: CurveSpec, N: int, budget: int = AN_BUDGET) -> CoefficientTable:
    """Hecke coefficients a_1..a_N (primes counted, the rest by recursion)."""
    if N < 1:
        raise DomainError("an_table requires N >= 1")
    if N > budget:
        raise CapacityError(f"coefficient table of size {N} exceeds budget {budget}")
    ps, aps = ap_table(curve, N)
    values = pointcount.an_from_ap(N, ps, aps, curve.conductor)
    values.setflags(write=False)
    return CoefficientTable(curve, N, values)


def local_factor(curve: CurveSpec, p: int, x: float) -> float:
    """L_p(x): (1 - a_p x)^-1 at bad p, (1 - a_p x + p x^2)^-1 at good p."""
    if not is_prime(p):
        raise DomainError(f"local factor requires a prime, got {p}")
    a = ap(curve, p)
    if curve.discriminant % p == 0:
        denom = 1.0 - a * x
    else:
        denom = 1.0 - a * x + p * x * x
    if denom == 0.0:
        raise DomainError(f"local factor pole at p={p}, x={x}")
    return 1.0 / denom
