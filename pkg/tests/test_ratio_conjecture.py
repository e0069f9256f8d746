import math
import random

import mpmath as mp
import numpy as np
import pytest

from twistvan import ratio_conjecture as rc
from twistvan.curve_model import ap, ap_table
from twistvan.errors import ConfigError, DomainError, TruncationError
from twistvan.moment_engine import EULER_GAMMA
from twistvan.primes import primes_up_to

FD_STEP = 1e-6


class TestLinearCoefficients:
    def test_gamma_factor_value(self, e11):
        # -gamma + log(sqrt(11)/(2 pi)), pinned via 40-digit evaluation
        with mp.workdps(40):
            expected = float(-mp.euler + mp.log(mp.sqrt(11) / (2 * mp.pi)))
        assert rc.gamma_factor_linear(e11) == pytest.approx(expected, abs=1e-15)

    def test_gamma_factor_fd(self, e11):
        # central differences of (1/2) log(G(1+z)/G(1-z) (Q/4pi^2)^z)
        Q = e11.conductor

        def f(z):
            return 0.5 * float(
                mp.log(mp.gamma(1 + z) / mp.gamma(1 - z)) + z * mp.log(Q / (4 * mp.pi**2))
            )

        fd = (f(FD_STEP) - f(-FD_STEP)) / (2 * FD_STEP)
        assert abs(rc.gamma_factor_linear(e11) - fd) < 1e-6

    def test_zeta_factor_values(self):
        assert rc.zeta_factor_linear(1.0) == 0.0
        assert rc.zeta_factor_linear(2.0) == pytest.approx(EULER_GAMMA)
        assert rc.zeta_factor_linear(-0.5) == pytest.approx(-1.5 * EULER_GAMMA)
        assert rc.zeta_factor_linear(-0.5) == pytest.approx(-0.86582349735, abs=1e-10)

    def test_zeta_factor_fd(self):
        # k=2: single pair; d/dz1 log(zeta(1+z1+z2)(z1+z2)), evaluated a small
        # offset away from the removable singularity at z1+z2 = 0
        def f(z1, z2):
            return float(mp.log(mp.zeta(1 + z1 + z2) * (z1 + z2)))

        off = 4e-3
        fd = (f(FD_STEP, off) - f(-FD_STEP, off)) / (2 * FD_STEP)
        assert abs(rc.zeta_factor_linear(2.0) - fd) < 1e-3

    def test_vandermonde_values(self):
        assert rc.vandermonde_compensation_linear(3, 1.0) == 0.0
        assert rc.vandermonde_compensation_linear(2, -0.5) == pytest.approx(
            -1.5 * math.log(2), abs=1e-12
        )
        assert rc.vandermonde_compensation_linear(2, -0.5) == pytest.approx(
            -1.03972077084, abs=1e-10
        )

    def test_vandermonde_fd(self):
        # k=2, one pair: d/dz1 log(1 - p^{-1-z1-z2}) at 0
        for p in (2, 5, 13):
            def f(z1, z2=0.0):
                return math.log(1 - p ** (-1 - z1 - z2))

            fd = (f(FD_STEP) - f(-FD_STEP)) / (2 * FD_STEP)
            assert abs(rc.vandermonde_compensation_linear(p, 2.0) - fd) < 1e-6

    def test_good_prime_symmetry_collapse(self, e307):
        # a_p = 0: f1 = f2 = f and the coefficient is log p * 4 f^{-k-1} / (2 + 2 p f^{-k})
        p, k = 2, 2.0
        assert ap(e307, p) == 0
        f = 1 + 1 / p
        expected = math.log(p) * 4 * f ** (-k - 1) / (2 + 2 * p * f**-k)
        assert rc.good_prime_linear(e307, p, k) == pytest.approx(expected, abs=1e-15)

    def test_good_prime_fd_audit(self, e11):
        # k=2: central differences of log F_{2,p} at ten primes
        k = 2
        rng = random.Random(5)
        primes = [p for p in map(int, primes_up_to(200)) if p != 11]
        for p in rng.sample(primes, 10):
            a = ap(e11, p)

            def L(t):
                return 1.0 / (1.0 - a * t + p * t * t)

            def F(z1, z2):
                pr1 = L(p ** (-1 - z1)) * L(p ** (-1 - z2))
                pr2 = L(-(p ** (-1 - z1))) * L(-(p ** (-1 - z2)))
                return (1 / p + 0.5 * (pr1 + pr2)) / (1 + 1 / p)

            fd = (
                math.log(F(FD_STEP, 0.0)) - math.log(F(-FD_STEP, 0.0))
            ) / (2 * FD_STEP)
            assert abs(rc.good_prime_linear(e11, p, float(k)) - fd) < 1e-6, p

    def test_bad_prime_values(self):
        assert rc.bad_prime_linear(11, "minus") == pytest.approx(math.log(11) / 12)
        assert rc.bad_prime_linear(11, "minus") == pytest.approx(0.19983, abs=1e-5)
        assert rc.bad_prime_linear(11, "plus") == pytest.approx(-math.log(11) / 10)
        for p in (2, 3, 11, 307):
            assert rc.bad_prime_linear(p, "minus") > 0 > rc.bad_prime_linear(p, "plus")
        with pytest.raises(ConfigError):
            rc.bad_prime_linear(11, "both")

    def test_bad_prime_fd(self):
        for p, sign, s in ((11, "minus", 1.0), (11, "plus", -1.0)):
            def f(z):
                return -math.log(1 + s * p ** (-1 - z))

            fd = (f(FD_STEP) - f(-FD_STEP)) / (2 * FD_STEP)
            assert abs(rc.bad_prime_linear(p, sign) - fd) < 1e-6

    def test_q_prime_values(self):
        # a_q = 0: lambda drops out
        assert rc.q_prime_linear(5, 0, 1, -0.5) == rc.q_prime_linear(5, 0, -1, -0.5)
        v = rc.q_prime_linear(2, -2, 1, -0.5)
        assert v == pytest.approx(-1.039721 + 0.554518, abs=1e-6)
        assert v == pytest.approx(-0.485203, abs=1e-6)

    def test_q_prime_fd(self, e11):
        # k=2 against log F_{k,q,lambda} plus the pair compensation
        k, q = 2, 3
        a = ap(e11, q)
        for lam in (1, -1):
            def F(z1, z2):
                out = 1.0
                for z in (z1, z2):
                    out /= 1 - lam * a * q ** (-1 - z) + q ** (-1 - 2 * z)
                return out

            def comp(z1, z2):
                return 1 - q ** (-1 - z1 - z2)

            def f(z1, z2):
                return math.log(F(z1, z2)) + math.log(comp(z1, z2))

            fd = (f(FD_STEP, 0.0) - f(-FD_STEP, 0.0)) / (2 * FD_STEP)
            assert abs(rc.q_prime_linear(q, a, lam, float(k)) - fd) < 1e-6


class TestBetaTotal:
    def test_component_assembly_identity(self, e11):
        # beta equals the component sum exactly (same primes, same order)
        q, lam, k, P = 3, 1, -0.5, 2000
        beta = rc.beta_total(e11, "minus", q, lam, k, P, smoothed=False, stability_tol=None)
        ps = [int(p) for p in primes_up_to(P)]
        acc = rc.gamma_factor_linear(e11) + rc.zeta_factor_linear(k)
        terms = []
        for p in ps:
            if p == q:
                terms.append(rc.q_prime_linear(q, ap(e11, q), lam, k))
            elif e11.conductor % p == 0:
                terms.append(
                    rc.vandermonde_compensation_linear(p, k) + rc.bad_prime_linear(p, "minus")
                )
            else:
                terms.append(
                    rc.vandermonde_compensation_linear(p, k) + rc.good_prime_linear(e11, p, k)
                )
        assert beta.beta == pytest.approx(acc + sum(terms), rel=1e-13)

    def test_lambda_difference_locality(self, e11):
        # beta(q,+1) - beta(q,-1) equals the q-term difference, at any cutoff
        q, k = 3, -0.5
        a = ap(e11, q)
        want = rc.q_prime_linear(q, a, 1, k) - rc.q_prime_linear(q, a, -1, k)
        for P in (10**4, 10**5):
            bp = rc.beta_total(e11, "minus", q, 1, k, P)
            bm = rc.beta_total(e11, "minus", q, -1, k, P)
            assert bp.beta - bm.beta == pytest.approx(want, abs=1e-12)

    def test_head_equals_k_minus_2_gamma_plus_conductor(self, e11):
        # (k-2) gamma + log(sqrt(Q)/2pi) == gamma_factor + zeta_factor
        for k in (-0.5, 2.0, 3.0):
            head = rc.gamma_factor_linear(e11) + rc.zeta_factor_linear(k)
            expected = (k - 2) * EULER_GAMMA + math.log(math.sqrt(11) / (2 * math.pi))
            assert head == pytest.approx(expected, abs=1e-14)

    def test_pinned_value(self, e11):
        # frozen regression value for (11A, minus, q=3, lambda=+1, k=-1/2, P=1e5);
        # the smoothed tail moves by ~2.2e-3 between P/2 and P (conditional
        # convergence), so the delta bound reflects the measured scale
        b = rc.beta_total(e11, "minus", 3, 1, -0.5, 10**5)
        assert b.stability_delta < 5e-3
        assert b.beta == pytest.approx(-3.446455, abs=2e-3)

    def test_smoothed_vs_raw_flag(self, e11):
        s = rc.beta_total(e11, "minus", 3, 1, -0.5, 10**5, smoothed=True)
        r = rc.beta_total(e11, "minus", 3, 1, -0.5, 10**5, smoothed=False)
        assert s.smoothed and not r.smoothed
        assert s.beta != r.beta
        assert abs(s.beta - r.beta) < 5e-3

    def test_q_beyond_cutoff(self, e11):
        with pytest.raises(DomainError):
            rc.beta_total(e11, "minus", 10007, 1, -0.5, 10**4)

    def test_stability_gate(self, e11):
        with pytest.raises(TruncationError):
            rc.beta_total(e11, "minus", 3, 1, -0.5, 10**5, stability_tol=1e-12)

    def test_alpha_is_log_h0(self, e11):
        from twistvan.moment_engine import arithmetic_factor

        b = rc.beta_total(e11, "minus", 3, 1, 2.0, 2000, smoothed=False, stability_tol=None)
        af = arithmetic_factor(
            e11, 2.0, "minus", 2000, override=(3, 1), smoothed=False, stability_tol=None
        )
        assert b.alpha == pytest.approx(math.log(af.value), abs=1e-12)


class TestMainTermAndRatios:
    def test_r_main_values(self):
        assert rc.r_main(5, 0) == 1.0
        assert rc.r_main(2, -2) == pytest.approx(math.sqrt(5.0))
        assert rc.r_main(2, -2) == pytest.approx(2.2360680, abs=1e-7)
        assert rc.r_main(13, 4) == pytest.approx(0.7453560, abs=1e-7)

    def test_r_main_hasse_guard(self):
        with pytest.raises(DomainError):
            rc.r_main(2, 3)

    def test_h0_ratio_values(self):
        assert rc.h0_ratio(7, 0, -0.5) == 1.0
        assert rc.h0_ratio(2, -2, -0.5) == pytest.approx(math.sqrt(5.0))
        assert rc.h0_ratio(13, 4, -0.5) == pytest.approx(0.745356, abs=1e-6)
        # at k = -1/2 the ratio reproduces the main term
        assert rc.h0_ratio(13, 4, -0.5) == pytest.approx(rc.r_main(13, 4))


class TestPrediction:
    def test_aq_zero_is_exactly_one(self, e11, e307):
        for X in (10, 10**4, 10**8):
            pred = rc.r_predicted(e11, "minus", 19, X)
            assert pred.a_q == 0
            assert pred.value == 1.0
            assert pred.r_main == 1.0

    def test_large_X_limit_is_main_term(self, e11):
        pred = rc.r_predicted(e11, "minus", 2, 10**8)
        far = pred.second_order(1e300)
        assert far == pytest.approx(pred.r_main, rel=1e-3)

    def test_paper_scale_example(self, e11):
        # 11A, q=2, minus family, X=1e8: second order minus main term
        pred = rc.r_predicted(e11, "minus", 2, 10**8)
        assert pred.value - pred.r_main == pytest.approx(0.0287690661, abs=2e-4)

    def test_q_dividing_conductor_rejected(self, e11):
        with pytest.raises(DomainError):
            rc.r_predicted(e11, "minus", 11, 10**5)

    def test_small_X_rejected(self, e11):
        with pytest.raises(DomainError):
            rc.r_predicted(e11, "minus", 2, 2)

    def test_same_code_path_for_audit_and_prediction(self, e11):
        # the k = 2 evaluation feeding the residue-engine audit and the
        # k = -1/2 evaluation feeding predictions go through beta_total
        b2 = rc.beta_total(e11, "minus", 3, 1, 2.0, 2000, smoothed=False, stability_tol=None)
        bh = rc.beta_total(e11, "minus", 3, 1, -0.5, 2000, smoothed=False, stability_tol=None)
        assert b2.k == 2.0 and bh.k == -0.5
        assert b2.beta != bh.beta
