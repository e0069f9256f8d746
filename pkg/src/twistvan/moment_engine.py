"""Moment recipe for the twist families: local factor series, the arithmetic
Euler product, the k-fold residue defining the moment polynomial, and the
leading-order closed forms.

The k-th moment of the central values over a family is conjecturally
(1/X) Int_0^X Y_k(log t) dt where Y_k is a polynomial of degree k(k-1)/2
obtained as a k-fold residue.  Writing the zeta factors as
zeta(1+z_i+z_j)(z_i+z_j) times 1/(z_i+z_j) and absorbing the denominators
into the squared Vandermonde leaves

    Y_k(x) = c_k * [coeff of prod z_j^(2k-2)] h(z) * V(z) * e^(x sum z_j),

with c_k = (-1)^(k(k-1)/2) 2^k / k!, V = prod_{i<j} (z_j-z_i)^2 (z_i+z_j)
an exact polynomial, and h the analytic part (Euler product, Gamma-ratio
conductor factors, completed zeta pairs).  Since V is homogeneous of degree
3k(k-1)/2 and the target monomial has total degree 2k(k-1), only terms of h
and of the exponential up to total degree k(k-1)/2 contribute; everything is
computed in a dense truncated power-series ring of that degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.signal import convolve

from .curve_model import CurveSpec, ap, ap_table
from .errors import DomainError, NumericsError, TruncationError
from .primes import primes_up_to

# ---------------------------------------------------------------------------
# series constants

EULER_GAMMA = 0.5772156649015329

# Laurent coefficients of zeta(1+s) about s=0: zeta(1+s) = 1/s + sum (-1)^n g_n s^n / n!
STIELTJES = (
    0.5772156649015329,
    -0.07281584548367672,
    -0.009690363192872318,
    0.002053834420303346,
    0.0023253700654673,
    0.0007933238173010627,
)

# zeta(m) for m = 2..13; feeds the log Gamma(1+z) Taylor series
ZETA_VALUES = {
    2: 1.6449340668482264,
    3: 1.2020569031595943,
    4: 1.0823232337111382,
    5: 1.0369277551433699,
    6: 1.0173430619844491,
    7: 1.0083492773819228,
    8: 1.0040773561979443,
    9: 1.0020083928260822,
    10: 1.0009945751278181,
    11: 1.0004941886041195,
    12: 1.000246086553308,
    13: 1.0001227133475785,
}


def loggamma_taylor(degree: int) -> list[float]:
    """Taylor coefficients of log Gamma(1+z) up to z^degree."""
    if degree + 1 > 14:
        raise DomainError("log Gamma table holds degrees <= 13")
    coeffs = [0.0] * (degree + 1)
    if degree >= 1:
        coeffs[1] = -EULER_GAMMA
    for j in range(2, degree + 1):
        coeffs[j] = (-1) ** j * ZETA_VALUES[j] / j
    return coeffs


def zeta_pair_series(degree: int) -> list[float]:
    """Coefficients of zeta(1+s)*s = 1 + g0 s - g1 s^2 + g2 s^3/2! - ..."""
    if degree > len(STIELTJES):
        raise DomainError(f"Stieltjes table holds degrees <= {len(STIELTJES)}")
    out = [0.0] * (degree + 1)
    out[0] = 1.0
    for n in range(degree):
        out[n + 1] = (-1) ** n * STIELTJES[n] / math.factorial(n)
    return out


@dataclass(frozen=True)
class SeriesConstants:
    euler_gamma: float = EULER_GAMMA
    stieltjes: tuple[float, ...] = STIELTJES
    loggamma_taylor: tuple[float, ...] = tuple(loggamma_taylor(6))


# ---------------------------------------------------------------------------
# dense truncated multivariate power series

_mask_cache: dict[tuple[int, int, int], np.ndarray] = {}


def _total_degree_mask(nvars: int, cap: int, total_cap: int) -> np.ndarray:
    key = (nvars, cap, total_cap)
    m = _mask_cache.get(key)
    if m is None:
        grid = np.indices((cap + 1,) * nvars).sum(axis=0)
        m = grid <= total_cap
        _mask_cache[key] = m
    return m


@dataclass(frozen=True)
class SeriesRing:
    """Polynomials in z_1..z_nvars modulo per-variable and total degree caps."""

    nvars: int
    cap: int
    total_cap: int

    def zeros(self) -> "TruncatedSeries":
        return TruncatedSeries(self, np.zeros((self.cap + 1,) * self.nvars))

    def constant(self, c: float) -> "TruncatedSeries":
        s = self.zeros()
        s.c[(0,) * self.nvars] = c
        return s

    def from_univar(self, coeffs: Sequence[float], var: int) -> "TruncatedSeries":
        s = self.zeros()
        idx = [0] * self.nvars
        for i, ci in enumerate(coeffs):
            if i > min(self.cap, self.total_cap):
                break
            idx[var] = i
            s.c[tuple(idx)] = ci
        return s

    def from_pair_sum(self, coeffs: Sequence[float], i: int, j: int) -> "TruncatedSeries":
        """Substitute s = z_i + z_j into a univariate series."""
        s = self.zeros()
        for m, cm in enumerate(coeffs):
            if m > self.total_cap:
                break
            for t in range(m + 1):
                a, b = t, m - t
                if a > self.cap or b > self.cap:
                    continue
                idx = [0] * self.nvars
                idx[i] = a
                idx[j] = b
                s.c[tuple(idx)] += cm * math.comb(m, t)
        return s

    def sum_vars(self) -> "TruncatedSeries":
        s = self.zeros()
        if self.cap < 1 or self.total_cap < 1:
            return s
        for v in range(self.nvars):
            idx = [0] * self.nvars
            idx[v] = 1
            s.c[tuple(idx)] = 1.0
        return s


class TruncatedSeries:
    __slots__ = ("ring", "c")

    def __init__(self, ring: SeriesRing, c: np.ndarray):
        self.ring = ring
        self.c = c

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, self.c.copy())

    @property
    def constant_term(self) -> float:
        return float(self.c[(0,) * self.ring.nvars])

    def coefficient(self, exponents: tuple[int, ...]) -> float:
        return float(self.c[exponents])

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.ring, self.c + other.c)
        out = self.copy()
        out.c[(0,) * self.ring.nvars] += other
        return out

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.ring, self.c - other.c)
        out = self.copy()
        out.c[(0,) * self.ring.nvars] -= other
        return out

    def __mul__(self, other):
        r = self.ring
        if isinstance(other, TruncatedSeries):
            full = convolve(self.c, other.c, method="direct")
            sl = tuple(slice(0, r.cap + 1) for _ in range(r.nvars))
            out = full[sl]
            out = np.where(_total_degree_mask(r.nvars, r.cap, r.total_cap), out, 0.0)
            return TruncatedSeries(r, np.ascontiguousarray(out))
        return TruncatedSeries(r, self.c * other)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.c.any()

    def log(self) -> "TruncatedSeries":
        c0 = self.constant_term
        if c0 <= 0:
            raise DomainError("series log requires a positive constant term")
        u = self * (1.0 / c0)
        u.c[(0,) * self.ring.nvars] = 0.0
        out = self.ring.constant(math.log(c0))
        power = u.copy()
        for m in range(1, self.ring.total_cap + 1):
            if power.is_zero():
                break
            out = out + power * ((-1.0) ** (m + 1) / m)
            power = power * u
        return out

    def exp(self) -> "TruncatedSeries":
        c0 = self.constant_term
        u = self.copy()
        u.c[(0,) * self.ring.nvars] = 0.0
        out = self.ring.constant(1.0)
        power = self.ring.constant(1.0)
        for m in range(1, self.ring.total_cap + 1):
            power = power * u
            if power.is_zero():
                break
            out = out + power * (1.0 / math.factorial(m))
        return out * math.exp(c0)


def _inv_univar(denom: Sequence[float], degree: int) -> list[float]:
    """Reciprocal of a univariate series with nonzero constant term."""
    d0 = denom[0]
    out = [0.0] * (degree + 1)
    out[0] = 1.0 / d0
    for n in range(1, degree + 1):
        acc = 0.0
        for i in range(1, min(n, len(denom) - 1) + 1):
            acc += denom[i] * out[n - i]
        out[n] = -acc / d0
    return out


def _mul_univar(a: Sequence[float], b: Sequence[float], degree: int) -> list[float]:
    out = [0.0] * (degree + 1)
    for i, ai in enumerate(a[: degree + 1]):
        if ai == 0.0:
            continue
        for j, bj in enumerate(b[: degree + 1 - i]):
            out[i + j] += ai * bj
    return out


def _p_pow_series(p: int, degree: int) -> list[float]:
    """p^{-z} = exp(-z log p) as a univariate series."""
    lp = math.log(p)
    return [(-lp) ** i / math.factorial(i) for i in range(degree + 1)]


def _outer_product(ring: SeriesRing, univar: Sequence[float]) -> TruncatedSeries:
    """prod_j f(z_j) for a single univariate series f."""
    vec = np.array(univar[: ring.cap + 1], dtype=float)
    if len(vec) < ring.cap + 1:
        vec = np.pad(vec, (0, ring.cap + 1 - len(vec)))
    out = vec
    for _ in range(ring.nvars - 1):
        out = np.multiply.outer(out, vec)
    out = np.where(_total_degree_mask(ring.nvars, ring.cap, ring.total_cap), out, 0.0)
    return TruncatedSeries(ring, np.ascontiguousarray(out))


# ---------------------------------------------------------------------------
# local factors and the Euler product

def _twisted_local_inverse(p: int, coeff: float, degree: int) -> list[float]:
    """(1 - coeff * p^{-1-z} + p^{-1-2z})^{-1} as a univariate series in z."""
    e = _p_pow_series(p, degree)
    e2 = _mul_univar(e, e, degree)
    denom = [0.0] * (degree + 1)
    denom[0] = 1.0
    for i in range(degree + 1):
        denom[i] += -coeff / p * e[i] + e2[i] / p
    return _inv_univar(denom, degree)


def _bad_local_inverse(p: int, sign: str, degree: int) -> list[float]:
    """(1 +- p^{-1-z})^{-1}: + for the minus family, - for the plus family."""
    e = _p_pow_series(p, degree)
    s = 1.0 if sign == "minus" else -1.0
    denom = [0.0] * (degree + 1)
    denom[0] = 1.0
    for i in range(degree + 1):
        denom[i] += s / p * e[i]
    return _inv_univar(denom, degree)


def local_factor_series(
    curve: CurveSpec,
    p: int,
    k: int,
    sign: str,
    override: Optional[tuple[int, int]] = None,
    D: int = 1,
    ring: Optional[SeriesRing] = None,
) -> TruncatedSeries:
    """Maclaurin series (degree <= D) of the averaged local factor at p.

    Good primes get the family average over the two twist signs; primes
    dividing the conductor get the fixed bad-prime form; the progression
    prime q (when override=(q, lambda) is given) gets the lambda branch.
    """
    if ring is None:
        ring = SeriesRing(k, D, D)
    deg = min(ring.cap, ring.total_cap)
    if override is not None and p == override[0]:
        q, lam = override
        a_q = ap(curve, q)
        return _outer_product(ring, _twisted_local_inverse(p, lam * a_q, deg))
    if curve.conductor % p == 0:
        return _outer_product(ring, _bad_local_inverse(p, sign, deg))
    a_p = ap(curve, p)
    plus = _outer_product(ring, _twisted_local_inverse(p, float(a_p), deg))
    minus = _outer_product(ring, _twisted_local_inverse(p, float(-a_p), deg))
    avg = (plus + minus) * 0.5 + (1.0 / p)
    return avg * (p / (p + 1.0))


def _pair_compensation_log(ring: SeriesRing, p: int) -> TruncatedSeries:
    """log prod_{i<j} (1 - p^{-1-z_i-z_j}) within the ring."""
    deg = ring.total_cap
    e = _p_pow_series(p, deg)
    series = [0.0] * (deg + 1)
    series[0] = 1.0
    for i in range(deg + 1):
        series[i] -= e[i] / p
    # univariate log
    lg = [0.0] * (deg + 1)
    lg[0] = math.log(series[0])
    u = [c / series[0] for c in series]
    u[0] = 0.0
    power = u[:]
    for m in range(1, deg + 1):
        for i in range(deg + 1):
            lg[i] += (-1.0) ** (m + 1) / m * power[i]
        power = _mul_univar(power, u, deg)
    out = ring.zeros()
    for i in range(ring.nvars):
        for j in range(i + 1, ring.nvars):
            out = out + ring.from_pair_sum(lg, i, j)
    return out


@dataclass
class EulerProductResult:
    log_series: TruncatedSeries
    prime_cutoff: int
    last_term_magnitude: float
    constant_delta_half: float

    @property
    def series(self) -> TruncatedSeries:
        return self.log_series.exp()


def euler_A_log(
    curve: CurveSpec,
    k: int,
    sign: str,
    override: Optional[tuple[int, int]] = None,
    D: int = 1,
    prime_cutoff: int = 1000,
    ring: Optional[SeriesRing] = None,
    stability_tol: Optional[float] = None,
) -> EulerProductResult:
    """log A_k as a truncated series: sum over p <= cutoff of the local log."""
    if k < 0:
        raise DomainError("the Euler product series needs k >= 0")
    if ring is None:
        ring = SeriesRing(max(k, 1), D, D)
    if k == 0:
        return EulerProductResult(ring.constant(0.0), prime_cutoff, 0.0, 0.0)
    ps = primes_up_to(prime_cutoff)
    total = ring.zeros()
    const_half = 0.0
    last_mag = 0.0
    half = prime_cutoff // 2
    for p in ps:
        p = int(p)
        term = local_factor_series(curve, p, k, sign, override, ring=ring).log()
        term = term + _pair_compensation_log(ring, p)
        total = total + term
        last_mag = abs(term.constant_term)
        if p <= half:
            const_half = total.constant_term
    delta = abs(total.constant_term - const_half)
    if stability_tol is not None and delta > stability_tol:
        raise TruncationError(
            f"Euler product constant moved by {delta:.3g} between P/2 and "
            f"P={prime_cutoff}; raise the cutoff"
        )
    return EulerProductResult(total, prime_cutoff, last_mag, delta)


def euler_A_series(
    curve: CurveSpec,
    k: int,
    sign: str,
    override: Optional[tuple[int, int]] = None,
    D: int = 1,
    prime_cutoff: int = 1000,
    stability_tol: Optional[float] = None,
) -> EulerProductResult:
    """A_k as a truncated series (use .series); metadata records the cutoff."""
    return euler_A_log(curve, k, sign, override, D, prime_cutoff, None, stability_tol)


# ---------------------------------------------------------------------------
# closed-form constants

def g_k(k: int) -> Fraction:
    """Leading residue constant: 2^{k(k+1)/2} prod_{j<k} j!/(2j)!."""
    if k < 1:
        raise DomainError("g_k requires k >= 1")
    out = Fraction(2) ** (k * (k + 1) // 2)
    for j in range(1, k):
        out *= Fraction(math.factorial(j), math.factorial(2 * j))
    return out


def M_O(N: int, k: float) -> float:
    """Random-matrix moment 2^{2Nk} prod_j G(N+j-1)G(k+j-1/2)/(G(j-1/2)G(k+j+N-1))."""
    if N < 1:
        raise DomainError("M_O requires N >= 1")
    if abs(k + 0.5) < 1e-8:
        raise DomainError("M_O has its first pole at k = -1/2")
    if k < -0.5:
        raise DomainError("M_O is evaluated only right of the k = -1/2 pole")
    acc = 2 * N * k * math.log(2.0)
    for j in range(1, N + 1):
        acc += math.lgamma(N + j - 1) + math.lgamma(k + j - 0.5)
        acc -= math.lgamma(j - 0.5) + math.lgamma(k + j + N - 1)
    return math.exp(acc)


# ---------------------------------------------------------------------------
# the moment polynomial

@dataclass
class MomentPolynomial:
    """Y_k(x) = sum_j coefficients[j] x^j, degree k(k-1)/2."""

    k: int
    sign: str
    override: Optional[tuple[int, int]]
    coefficients: list[float]
    h0: float
    prime_cutoff: int
    stability_delta: float = 0.0

    def __post_init__(self):
        m = self.k * (self.k - 1) // 2
        if len(self.coefficients) != m + 1:
            raise NumericsError(
                f"moment polynomial bookkeeping: got degree "
                f"{len(self.coefficients) - 1}, expected {m}"
            )
        lead = self.coefficients[-1]
        closed = self.h0 * float(g_k(self.k))
        if abs(lead - closed) > 1e-6 * max(abs(closed), 1e-300):
            raise NumericsError(
                f"leading coefficient {lead!r} disagrees with h(0) g_k = {closed!r}"
            )

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc


def _vandermonde_polynomial(ring: SeriesRing) -> TruncatedSeries:
    """prod_{i<j} (z_j - z_i)^2 (z_i + z_j), exactly, within per-var caps."""
    out = ring.constant(1.0)
    for i in range(ring.nvars):
        for j in range(i + 1, ring.nvars):
            diff = ring.zeros()
            idx = [0] * ring.nvars
            idx[j] = 1
            diff.c[tuple(idx)] = 1.0
            idx[j] = 0
            idx[i] = 1
            diff.c[tuple(idx)] -= 1.0
            summ = ring.zeros()
            idx = [0] * ring.nvars
            idx[j] = 1
            summ.c[tuple(idx)] = 1.0
            idx[j] = 0
            idx[i] = 1
            summ.c[tuple(idx)] += 1.0
            out = out * diff * diff * summ
    return out


def _h_series(
    curve: CurveSpec,
    k: int,
    sign: str,
    override: Optional[tuple[int, int]],
    prime_cutoff: int,
    ring: SeriesRing,
) -> tuple[TruncatedSeries, float]:
    """h(z): Euler product * Gamma-ratio conductor factors * completed zeta pairs."""
    deg = ring.total_cap
    log_h = euler_A_log(curve, k, sign, override, deg, prime_cutoff, ring=ring)
    total_log = log_h.log_series
    # (Gamma(1+z)/Gamma(1-z) * (Q/4pi^2)^z)^(1/2) per variable, assembled in log form
    lg = loggamma_taylor(deg)
    conductor = math.log(curve.conductor / (4.0 * math.pi**2))
    gam = [0.0] * (deg + 1)
    for i in range(1, deg + 1):
        gam[i] = 0.5 * (lg[i] - (-1.0) ** i * lg[i])
    if deg >= 1:
        gam[1] += 0.5 * conductor
    for v in range(k):
        total_log = total_log + ring.from_univar(gam, v)
    h = total_log.exp()
    zs = zeta_pair_series(deg)
    for i in range(k):
        for j in range(i + 1, k):
            h = h * ring.from_pair_sum(zs, i, j)
    return h, log_h.constant_delta_half


def upsilon_poly(
    curve: CurveSpec,
    k: int,
    sign: str,
    override: Optional[tuple[int, int]] = None,
    prime_cutoff: int = 1000,
) -> MomentPolynomial:
    """The moment polynomial by residue extraction (engine bound k <= 3)."""
    if not 1 <= k <= 3:
        raise DomainError("the residue engine is bounded to k in {1, 2, 3}")
    m = k * (k - 1) // 2
    h_ring = SeriesRing(k, m, m)
    h, delta = _h_series(curve, k, sign, override, prime_cutoff, h_ring)
    v_ring = SeriesRing(k, 2 * k - 2, k * (2 * k - 2))
    vand = _vandermonde_polynomial(v_ring)
    target = (2 * k - 2,) * k
    # reversed view: rev[mu] = V[target - mu]
    rev = vand.c[tuple(slice(t, None, -1) for t in target)]
    prefactor = (-1.0) ** m * 2.0**k / math.factorial(k)
    sum_z = h_ring.sum_vars()
    coeffs = []
    term = h.copy()
    for j in range(m + 1):
        # embed the (cap m) array into the (cap 2k-2) frame of the reversal
        frame = np.zeros((2 * k - 1,) * k)
        sl = tuple(slice(0, m + 1) for _ in range(k))
        frame[sl] = term.c
        coeffs.append(prefactor / math.factorial(j) * float((frame * rev).sum()))
        if j < m:
            term = term * sum_z
    return MomentPolynomial(
        k, sign, override, coeffs, h.constant_term, prime_cutoff, delta
    )


def mean_upsilon(poly: MomentPolynomial, X: float) -> float:
    """(1/X) Int_0^X Y(log t) dt, exactly: Int_0^X (log t)^j dt has the closed
    form X sum_{i<=j} (-1)^{j-i} (j!/i!) (log X)^i."""
    if X <= 1:
        raise DomainError("the averaged moment needs X > 1")
    lx = math.log(X)
    acc = 0.0
    for j, cj in enumerate(poly.coefficients):
        inner = 0.0
        for i in range(j + 1):
            inner += (-1.0) ** (j - i) * (math.factorial(j) / math.factorial(i)) * lx**i
        acc += cj * inner
    return acc


# ---------------------------------------------------------------------------
# leading-order arithmetic factor and empirical moments

@dataclass
class ArithmeticFactor:
    value: float
    prime_cutoff: int
    stability_delta: float
    smoothed: bool


def arithmetic_factor(
    curve: CurveSpec,
    k: float,
    sign: str,
    prime_cutoff: int = 10**5,
    override: Optional[tuple[int, int]] = None,
    smoothed: bool = False,
    stability_tol: Optional[float] = 0.05,
) -> ArithmeticFactor:
    """Truncated Euler product A(k) (log-accumulated over p <= cutoff).

    The good-prime factors decay only conditionally (like (1 - a_p^2/p) log p
    / p on average), so the truncation carries a measured stability delta and
    an optional arithmetic-mean smoothing over the last decade of primes.
    """
    if k == 0:
        return ArithmeticFactor(1.0, prime_cutoff, 0.0, smoothed)
    ps, aps = ap_table(curve, prime_cutoff)
    logs = _arithmetic_factor_logs(curve, k, sign, ps, aps, override)
    partial = np.cumsum(logs)
    value_at = lambda limit: partial[np.searchsorted(ps, limit, side="right") - 1]
    if smoothed:
        checkpoints = np.unique(
            np.array(
                [max(int(prime_cutoff * 10 ** (-(15 - i) / 15.0)), 2) for i in range(16)]
            )
        )
        log_value = float(np.mean([value_at(c) for c in checkpoints]))
        half = float(
            np.mean([value_at(max(c // 2, 2)) for c in checkpoints])
        )
    else:
        log_value = float(partial[-1])
        half = float(value_at(prime_cutoff // 2))
    delta = abs(math.exp(log_value) - math.exp(half))
    if stability_tol is not None and delta > stability_tol:
        raise TruncationError(
            f"arithmetic factor moved by {delta:.3g} between P/2 and P={prime_cutoff}"
        )
    return ArithmeticFactor(math.exp(log_value), prime_cutoff, delta, smoothed)


def _arithmetic_factor_logs(
    curve: CurveSpec,
    k: float,
    sign: str,
    ps: np.ndarray,
    aps: np.ndarray,
    override: Optional[tuple[int, int]],
) -> np.ndarray:
    p = ps.astype(np.float64)
    a = aps.astype(np.float64)
    vand = (k * (k - 1) / 2.0) * np.log1p(-1.0 / p)
    f1 = 1.0 - a / p + 1.0 / p
    f2 = 1.0 + a / p + 1.0 / p
    good = vand + np.log(p / (p + 1.0)) + np.log(1.0 / p + 0.5 * (f1**-k + f2**-k))
    logs = good
    bad_sign = 1.0 if sign == "minus" else -1.0
    for pb in curve.bad_primes:
        i = int(np.searchsorted(ps, pb))
        if i < len(ps) and ps[i] == pb:
            logs[i] = (k * (k - 1) / 2.0) * math.log1p(-1.0 / pb) - k * math.log1p(
                bad_sign / pb
            )
    if override is not None:
        q, lam = override
        i = int(np.searchsorted(ps, q))
        if i < len(ps) and ps[i] == q:
            a_q = float(aps[i])
            logs[i] = (k * (k - 1) / 2.0) * math.log1p(-1.0 / q) - k * math.log(
                1.0 - lam * a_q / q + 1.0 / q
            )
    return logs


def empirical_moment(records, sel, k: int) -> float:
    """Mean of value^k over the family (progression-filtered when set)."""
    values = [r.value for r in records]
    if sel.progression is not None:
        from .characters import kronecker

        q, lam = sel.progression
        values = [
            r.value for r in records if kronecker(int(r.d), q) == lam
        ]
    if not values:
        raise DomainError("empirical moment over an empty family")
    if k == 0:
        return 1.0
    return float(np.mean(np.array(values) ** k))
