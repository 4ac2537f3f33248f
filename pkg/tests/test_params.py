"""Parameter math: entropy, leftover-hash sizing, security composition."""

import math
import random

import pytest

from qtoeplitz.params import (
    EntropyEstimate,
    SecuritySpec,
    collision_probability,
    collision_probability_log2,
    compose_security,
    compose_security_log10,
    leftover_hash_output_length,
    leftover_hash_output_length_log10,
    min_entropy_from_histogram,
    min_entropy_gaussian_adc,
    refresh_use_limit,
    throughput_accounting,
)


class TestHistogramMinEntropy:
    def test_uniform_eight_bins(self):
        assert min_entropy_from_histogram([5] * 8) == pytest.approx(3.0)

    def test_single_bin(self):
        assert min_entropy_from_histogram([4]) == 0.0

    def test_unbalanced(self):
        # -log2(3/4) = 0.4150374992788438 (high-precision log)
        assert min_entropy_from_histogram([3, 1]) == pytest.approx(0.415, abs=1e-3)
        assert min_entropy_from_histogram([3, 1]) == pytest.approx(
            0.4150374992788438, rel=1e-12
        )

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            min_entropy_from_histogram([])
        with pytest.raises(ValueError):
            min_entropy_from_histogram([0, 0])

    def test_permutation_and_scale_invariance(self):
        random.seed(5)
        for _ in range(50):
            counts = [random.randrange(0, 100) for _ in range(8)]
            if sum(counts) == 0:
                counts[0] = 1
            h = min_entropy_from_histogram(counts)
            shuffled = counts[:]
            random.shuffle(shuffled)
            assert min_entropy_from_histogram(shuffled) == pytest.approx(h)
            assert min_entropy_from_histogram([3 * c for c in counts]) == pytest.approx(h)


class TestGaussianAdcMinEntropy:
    def test_huge_sigma_one_bit(self):
        assert min_entropy_gaussian_adc(1000.0, 1.0, 1) == pytest.approx(1.0, abs=1e-3)

    def test_tiny_sigma_collapses(self):
        assert min_entropy_gaussian_adc(1e-12, 1.0, 8) == pytest.approx(0.0, abs=1e-9)

    def test_against_quadrature_oracle(self):
        # oracle: per-bin adaptive quadrature of the Gaussian pdf, max over
        # all 2**bits bins (frozen value checked against a live recompute)
        frozen_pmax = 0.3829249225480263  # sigma=1, full_scale=8, bits=3
        got = min_entropy_gaussian_adc(1.0, 8.0, 3)
        assert got == pytest.approx(-math.log2(frozen_pmax), abs=1e-6)

        from scipy.integrate import quad

        sigma, fs, bits = 1.0, 8.0, 3
        delta = fs / 2**bits
        qmin, qmax = -(2 ** (bits - 1)), 2 ** (bits - 1) - 1

        def pdf(x):
            return math.exp(-x * x / (2 * sigma * sigma)) / (
                sigma * math.sqrt(2 * math.pi)
            )

        masses = []
        for q in range(qmin, qmax + 1):
            lo = -math.inf if q == qmin else (q - 0.5) * delta
            hi = math.inf if q == qmax else (q + 0.5) * delta
            masses.append(quad(pdf, lo, hi)[0])
        assert max(masses) == pytest.approx(frozen_pmax, rel=1e-9)
        assert got == pytest.approx(-math.log2(max(masses)), abs=1e-6)

    def test_saturated_tail_dominates_when_sigma_large(self):
        # sigma = full_scale/4: the top saturating code outweighs the center
        from scipy.integrate import quad

        sigma, fs, bits = 0.25, 1.0, 8
        delta = fs / 2**bits
        qmin, qmax = -(2 ** (bits - 1)), 2 ** (bits - 1) - 1

        def pdf(x):
            return math.exp(-x * x / (2 * sigma * sigma)) / (
                sigma * math.sqrt(2 * math.pi)
            )

        top = quad(pdf, (qmax - 0.5) * delta, math.inf)[0]
        center = quad(pdf, -0.5 * delta, 0.5 * delta)[0]
        assert top > center
        assert min_entropy_gaussian_adc(sigma, fs, bits) == pytest.approx(
            -math.log2(top), abs=1e-9
        )

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            min_entropy_gaussian_adc(0.0, 1.0, 8)
        with pytest.raises(ValueError):
            min_entropy_gaussian_adc(1.0, -1.0, 8)
        with pytest.raises(ValueError):
            min_entropy_gaussian_adc(1.0, 1.0, 0)


class TestLeftoverHashSizing:
    def test_perfect_entropy_no_penalty(self):
        assert leftover_hash_output_length(100, 1.0, 1.0) == 100

    def test_clamped_at_zero(self):
        assert leftover_hash_output_length(10, 0.1, 1e-10) == 0

    def test_reference_configuration(self):
        # floor(2464*(13/16) - 2*log2(1e50)) = floor(1669.807...) = 1669,
        # verified with a 60-digit mpmath oracle
        assert leftover_hash_output_length(2464, 13.0 / 16, 1e-50) == 1669
        assert leftover_hash_output_length_log10(2464, 13.0 / 16, -50) == 1669

    def test_mpmath_oracle(self):
        import mpmath as mp

        mp.mp.dps = 60
        raw = mp.mpf(2464) * mp.mpf(13) / 16 + 2 * mp.log(mp.mpf(10) ** -50, 2)
        assert int(mp.floor(raw)) == 1669

    def test_monotone(self):
        random.seed(6)
        for _ in range(100):
            n = random.randrange(64, 4096)
            h = random.uniform(0.0, 1.0)
            eps = 10.0 ** random.uniform(-60, 0)
            base = leftover_hash_output_length(n, h, eps)
            assert leftover_hash_output_length(n + 64, h, eps) >= base
            assert leftover_hash_output_length(n, min(1.0, h + 0.05), eps) >= base
            assert leftover_hash_output_length(n, h, min(1.0, eps * 10)) >= base


class TestCollisionProbability:
    def test_examples(self):
        assert collision_probability(1, 1) == 1.0
        assert collision_probability(4, 8) == 0.03125

    def test_log_domain(self):
        # log2(1729) - 2463 = -2452.2442778463577 (mpmath, 60 digits)
        assert collision_probability_log2(1729, 2464) == pytest.approx(
            -2452.2442778463577, abs=1e-9
        )

    def test_halving_in_n(self):
        random.seed(7)
        for _ in range(50):
            m = random.randrange(1, 10**6)
            n = random.randrange(1, 3000)
            assert collision_probability_log2(m, n + 1) - collision_probability_log2(
                m, n
            ) == pytest.approx(-1.0, abs=1e-12)

    def test_linear_log_consistency(self):
        assert collision_probability(4, 8) == pytest.approx(
            2.0 ** collision_probability_log2(4, 8)
        )


class TestComposeSecurity:
    def test_n_zero(self):
        assert compose_security(0, 1e-50, 3e-7) == 3e-7

    def test_small_arithmetic(self):
        assert compose_security(2, 1e-50, 1e-50) == pytest.approx(3e-50, rel=1e-12)

    def test_crossing_count(self):
        spec = SecuritySpec(-50, -50, -36)
        n_star = refresh_use_limit(spec)
        assert n_star == 10**14 - 1
        # independent big-integer oracle: N*10^-50 + 10^-50 >= 10^-36
        # <=> N + 1 >= 10^14 after multiplying through by 10^50
        assert (n_star + 1) * 10**0 >= 10**14
        assert (n_star - 1) + 1 < 10**14

    def test_linear_in_n(self):
        random.seed(8)
        for _ in range(50):
            n1 = random.randrange(0, 10**12)
            n2 = random.randrange(0, 10**12)
            lh, ls = -50.0, -50.0
            a = compose_security_log10(n1 + n2, lh, ls)
            # difference in linear domain equals n2*eps_hash
            lin_diff = 10.0**a - 10.0 ** compose_security_log10(n1, lh, ls)
            assert lin_diff == pytest.approx(n2 * 10.0**lh, rel=1e-9, abs=1e-62)

    def test_log10_matches_linear_when_representable(self):
        for n in (0, 1, 17, 12345):
            got = compose_security_log10(n, -8.0, -9.0)
            want = math.log10(compose_security(n, 1e-8, 1e-9))
            assert got == pytest.approx(want, rel=1e-12)

    def test_immediate_threshold(self):
        # threshold == eps_seed: composed reaches it before the first use
        spec = SecuritySpec(-50, -36, -36)
        assert refresh_use_limit(spec) == 0

    def test_non_integer_exponents(self):
        spec = SecuritySpec(-49.5, -49.5, -36.5)
        n_star = refresh_use_limit(spec)
        # composed(n) = (n+1)*10^-49.5 >= 10^-36.5 <=> n >= 10^13 - 1
        assert abs(n_star - (10**13 - 1)) <= 10  # float path, ~15 digits


class TestSecuritySpec:
    def test_threshold_must_exceed_hash(self):
        with pytest.raises(ValueError):
            SecuritySpec(-36, -50, -36)

    def test_probabilities_at_most_one(self):
        with pytest.raises(ValueError):
            SecuritySpec(0.5, -50, -36)

    def test_universality_bound(self):
        with pytest.raises(ValueError):
            SecuritySpec(-50, -50, -36, universality=0.5)


class TestEntropyEstimate:
    def test_per_bit_normalization(self):
        est = EntropyEstimate(13.0, 16)
        assert est.hmin_per_bit == pytest.approx(0.8125)

    def test_range_check(self):
        with pytest.raises(ValueError):
            EntropyEstimate(17.0, 16)


class TestThroughputAccounting:
    def test_ratio_one(self):
        assert throughput_accounting([(64, 64, 1e6, 8)]) == pytest.approx(8e6)

    def test_single_channel(self):
        got = throughput_accounting([(1729, 2464, 250e6, 16)])
        assert got == pytest.approx(2.80682e9, rel=1e-5)

    def test_four_channel_reference(self):
        channels = [
            (1729, 2464, 250e6, 16),
            (1729, 2464, 250e6, 16),
            (1729, 2432, 250e6, 16),
            (1729, 2432, 250e6, 16),
        ]
        got = throughput_accounting(channels)
        assert got == pytest.approx(11.3e9, rel=0.01)

    def test_rejects_expansion(self):
        with pytest.raises(ValueError):
            throughput_accounting([(65, 64, 1e6, 8)])
