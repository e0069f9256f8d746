"""Closed-form two-term machinery for the vanishing-ratio prediction.

The ratio of vanishing counts between the chi_d(q) = +1 and -1 progressions
tends to R_q = ((q+1-a_q)/(q+1+a_q))^(1/2); the next-order correction is
driven by the linear Maclaurin coefficient beta of the log of the analytic
factor h, interpolated to k = -1/2:

    prediction(X) = R_q * (1 + (3/(8 log X)) (beta(q,+1) - 1))
                        / (1 + (3/(8 log X)) (beta(q,-1) - 1)).

beta assembles four per-factor linear coefficients (Gamma/conductor, zeta
pairs, per-prime Euler factors, and the progression prime's own factor); all
are elementary functions of k, so k = 2 (used to audit the residue engine)
and k = -1/2 (used for predictions) share one code path.

The prime sum converges only conditionally (terms look like
(k+1)(1 - a_p^2/p) log p / p on average), so by default partial sums are
averaged at 16 logarithmically spaced checkpoints over the last decade below
the cutoff; the raw truncated sum is available behind `smoothed=False`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .curve_model import CurveSpec, ap, ap_table
from .errors import ConfigError, DomainError, TruncationError
from .moment_engine import EULER_GAMMA, arithmetic_factor
from .primes import is_prime

DEFAULT_PRIME_CUTOFF = 10**5
DEFAULT_STABILITY_TOL = 5e-2


@dataclass(frozen=True)
class BetaExpansion:
    """Constant and linear Maclaurin data of log h at one (q, lambda)."""

    k: float
    sign: str
    q: int
    lam: int
    alpha: float
    beta: float
    prime_cutoff: int
    stability_delta: float
    smoothed: bool = True


@dataclass(frozen=True)
class Prediction:
    """Main term and two-term prediction for the vanishing ratio.

    The second-order factor is evaluated with the conductor scale absorbed
    into the polynomial argument: the per-variable factor (Q/4pi^2)^(z/2) is
    exactly a shift of the argument by log(sqrt(Q)/2pi), so the expansion is
    taken about log(sqrt(Q) X / 2pi) with the conductor term removed from
    beta.  Both forms agree to O(1/log^2 X); this one reproduces the
    published second-order residuals.
    """

    curve_label: str
    sign: str
    q: int
    a_q: int
    X: int
    r_main: float
    value: float
    beta_plus: BetaExpansion
    beta_minus: BetaExpansion
    conductor_shift: float
    k_eval: float = -0.5

    def second_order(self, X: float) -> float:
        """The two-term prediction as a function of X (natural log)."""
        c = self.k_eval * (self.k_eval - 1.0) / (
            2.0 * (math.log(X) + self.conductor_shift)
        )
        bp = self.beta_plus.beta - self.conductor_shift
        bm = self.beta_minus.beta - self.conductor_shift
        return self.r_main * (1.0 + c * (bp - 1.0)) / (1.0 + c * (bm - 1.0))


def gamma_factor_linear(curve: CurveSpec) -> float:
    """Linear coefficient of (1/2) log(Gamma(1+z)/Gamma(1-z) (Q/4pi^2)^z)."""
    return -EULER_GAMMA + math.log(math.sqrt(curve.conductor) / (2.0 * math.pi))


def zeta_factor_linear(k: float) -> float:
    """Linear coefficient (per z_j) of log prod zeta(1+z_i+z_j)(z_i+z_j)."""
    return (k - 1.0) * EULER_GAMMA


def vandermonde_compensation_linear(p: int, k: float) -> float:
    """Linear coefficient of log prod_{i<j} (1 - p^{-1-z_i-z_j})."""
    return (k - 1.0) * math.log(p) / (p - 1.0)


def good_prime_linear(curve: CurveSpec, p: int, k: float) -> float:
    """Linear coefficient of the averaged good-prime local log factor."""
    a = ap(curve, p)
    return _good_prime_linear_values(np.array([p], float), np.array([a], float), k)[0]


def _good_prime_linear_values(p: np.ndarray, a: np.ndarray, k: float) -> np.ndarray:
    f1 = 1.0 - a / p + 1.0 / p
    f2 = 1.0 + a / p + 1.0 / p
    num = (2.0 - a) * f1 ** (-k - 1.0) + (2.0 + a) * f2 ** (-k - 1.0)
    den = 2.0 + p * (f1**-k + f2**-k)
    return np.log(p) * num / den


def bad_prime_linear(p: int, sign: str) -> float:
    """Linear coefficient of the bad-prime local log factor."""
    if sign == "minus":
        return math.log(p) / (1.0 + p)
    if sign == "plus":
        return math.log(p) / (1.0 - p)
    raise ConfigError(f"sign must be 'minus' or 'plus', got {sign!r}")


def q_prime_linear(q: int, a_q: int, lam: int, k: float) -> float:
    """Full linear contribution of the progression prime (compensation plus
    the lambda-twisted local factor)."""
    if lam not in (-1, 1):
        raise DomainError("lambda must be +-1")
    denom = lam * a_q - q - 1
    assert denom != 0, "lambda a_q = q + 1 is impossible under the Hasse bound"
    return (k - 1.0) * math.log(q) / (q - 1.0) + math.log(q) * (lam * a_q - 2.0) / denom


@lru_cache(maxsize=64)
def _beta_context(label: str, weierstrass, conductor, sign: str, k: float, P: int):
    """Shared per-(curve, sign, k) prime data: cumulative sums of the
    non-progression beta terms and the checkpoint indices used for smoothing."""
    curve = _curve_registry[(label, weierstrass)]
    ps, aps = ap_table(curve, P)
    pf = ps.astype(np.float64)
    af = aps.astype(np.float64)
    comp = (k - 1.0) * np.log(pf) / (pf - 1.0)
    terms = comp + _good_prime_linear_values(pf, af, k)
    for pb in curve.bad_primes:
        i = int(np.searchsorted(ps, pb))
        if i < len(ps) and ps[i] == pb:
            terms[i] = vandermonde_compensation_linear(pb, k) + bad_prime_linear(pb, sign)
    partial = np.cumsum(terms)
    checkpoints = sorted(
        {max(int(P * 10 ** (-(15 - i) / 15.0)), 2) for i in range(16)}
    )
    idx = [int(np.searchsorted(ps, c, side="right")) - 1 for c in checkpoints]
    idx_half = [
        int(np.searchsorted(ps, max(c // 2, 2), side="right")) - 1 for c in checkpoints
    ]
    return ps, aps, partial, idx, idx_half


_curve_registry: dict = {}


def _context(curve: CurveSpec, sign: str, k: float, P: int):
    key = (curve.label, curve.weierstrass)
    _curve_registry[key] = curve
    return _beta_context(curve.label, curve.weierstrass, curve.conductor, sign, k, P)


def beta_total(
    curve: CurveSpec,
    sign: str,
    q: int,
    lam: int,
    k: float,
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF,
    smoothed: bool = True,
    stability_tol: Optional[float] = DEFAULT_STABILITY_TOL,
) -> BetaExpansion:
    """beta = (k-2) gamma + log(sqrt(Q)/2pi) + sum_p beta_k(p), truncated at
    the cutoff; alpha (= log h(0)) rides along from the same local data."""
    if not is_prime(q):
        raise DomainError(f"progression prime expected, got {q}")
    if curve.conductor % q == 0:
        raise DomainError("beta is defined for q not dividing the conductor")
    ps, aps, partial, idx, idx_half = _context(curve, sign, k, prime_cutoff)
    iq = int(np.searchsorted(ps, q))
    if iq >= len(ps) or ps[iq] != q:
        raise DomainError(f"q={q} exceeds the prime cutoff {prime_cutoff}")
    a_q = int(aps[iq])
    # swap the good-prime term at q for the lambda-twisted one
    base_at_q = vandermonde_compensation_linear(q, k) + float(
        _good_prime_linear_values(
            np.array([q], float), np.array([float(a_q)], float), k
        )[0]
    )
    swap = q_prime_linear(q, a_q, lam, k) - base_at_q
    head = gamma_factor_linear(curve) + zeta_factor_linear(k)
    if smoothed:
        if q >= ps[idx[0]]:
            raise ConfigError(
                f"q={q} reaches into the smoothing window of cutoff {prime_cutoff}; "
                "raise the cutoff"
            )
        tail = float(np.mean(partial[idx]))
        tail_half = float(np.mean(partial[idx_half]))
    else:
        tail = float(partial[-1])
        half_i = int(np.searchsorted(ps, prime_cutoff // 2, side="right")) - 1
        tail_half = float(partial[half_i])
    beta = head + tail + swap
    delta = abs(tail - tail_half)
    if stability_tol is not None and delta > stability_tol:
        raise TruncationError(
            f"beta prime sum moved by {delta:.3g} between P/2 and P={prime_cutoff}"
        )
    alpha = math.log(
        arithmetic_factor(
            curve, k, sign, prime_cutoff, override=(q, lam), smoothed=smoothed,
            stability_tol=None,
        ).value
    )
    return BetaExpansion(k, sign, q, lam, alpha, beta, prime_cutoff, delta, smoothed)


def h0_ratio(q: int, a_q: int, k: float) -> float:
    """h(0;q,+1)/h(0;q,-1) = ((q+1-a_q)/(q+1+a_q))^(-k)."""
    return ((q + 1.0 - a_q) / (q + 1.0 + a_q)) ** (-k)


def r_main(q: int, a_q: int) -> float:
    """The limiting vanishing ratio ((q+1-a_q)/(q+1+a_q))^(1/2)."""
    if not a_q * a_q < 4 * q:
        raise DomainError(f"|a_q| = {abs(a_q)} violates the Hasse bound at q={q}")
    return math.sqrt((q + 1.0 - a_q) / (q + 1.0 + a_q))


def r_predicted(
    curve: CurveSpec,
    sign: str,
    q: int,
    X: int,
    k_eval: float = -0.5,
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF,
    smoothed: bool = True,
) -> Prediction:
    """Two-term prediction for the vanishing ratio at height X.

    When a_q = 0 the two beta values coincide and the prediction is exactly 1
    for every X (the lambda dependence of the local factor drops out).
    """
    if X < 3:
        raise DomainError("the prediction needs X >= 3")
    if curve.conductor % q == 0:
        raise DomainError("predictions require q not dividing the conductor")
    beta_plus = beta_total(curve, sign, q, 1, k_eval, prime_cutoff, smoothed)
    beta_minus = beta_total(curve, sign, q, -1, k_eval, prime_cutoff, smoothed)
    a_q = ap(curve, q)
    main = r_main(q, a_q)
    shift = math.log(math.sqrt(curve.conductor) / (2.0 * math.pi))
    pred = Prediction(
        curve.label, sign, q, a_q, X, main, math.nan, beta_plus, beta_minus,
        shift, k_eval,
    )
    return Prediction(
        curve.label, sign, q, a_q, X, main, pred.second_order(X), beta_plus,
        beta_minus, shift, k_eval,
    )
