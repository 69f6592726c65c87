"""Merger-rate and jump-law tests against independent quadrature oracles."""
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

from betacoal.rates import (
    AlphaModel,
    JumpLawSampler,
    RateTable,
    centering_constant,
    jump_distribution,
    jump_probability,
    limit_jump_law,
    limit_jump_survivor,
    limit_jump_table,
    log_merger_rate,
    merger_rate,
    total_rate,
)

MODEL = AlphaModel(1.5)


def quadrature_rate(m, k, alpha):
    """Adaptive quadrature of the defining Beta-density integral."""
    val, err = quad(
        lambda t: 1.0,
        0.0,
        1.0,
        weight="alg",
        wvar=(k - alpha - 1.0, m - k + alpha - 1.0),
    )
    norm = math.exp(gammaln(2.0 - alpha) + gammaln(alpha))
    return val / norm


class TestAlphaModel:
    def test_derived_fields(self):
        m = AlphaModel(1.5)
        assert m.gamma == pytest.approx(2.0, abs=1e-15)
        assert m.one_over_alpha == pytest.approx(2.0 / 3.0)
        assert m.fluct_exponent == pytest.approx(1.0 / 6.0)
        assert m.centering_exponent == pytest.approx(0.5)

    @pytest.mark.parametrize("bad", [1.0, 2.0, 0.5, 2.5, -1.0])
    def test_rejects_boundary(self, bad):
        with pytest.raises(ValueError):
            AlphaModel(bad)

    def test_gamma_identity_random_alpha(self):
        rng = np.random.default_rng(0)
        for a in 1.0 + rng.random(20) * 0.999:
            m = AlphaModel(a)
            assert m.gamma * (a - 1.0) == pytest.approx(1.0, rel=1e-14)


class TestMergerRate:
    def test_pair_of_two_is_one(self):
        # integrand is the normalizing Beta density itself
        for a in (1.2, 1.5, 1.8):
            assert merger_rate(2, 2, AlphaModel(a)) == pytest.approx(1.0, abs=1e-12)

    def test_known_values_alpha_15(self):
        assert merger_rate(3, 2, MODEL) == pytest.approx(0.75, rel=1e-12)
        assert merger_rate(3, 3, MODEL) == pytest.approx(0.25, rel=1e-12)
        # second route for (3,3): (2 - alpha) / 2
        assert merger_rate(3, 3, MODEL) == pytest.approx((2 - 1.5) / 2, rel=1e-12)

    def test_quadrature_equivalence_random(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            m = int(rng.integers(2, 51))
            k = int(rng.integers(2, m + 1))
            a = float(1.01 + rng.random() * 0.98)
            model = AlphaModel(a)
            got = merger_rate(m, k, model)
            want = quadrature_rate(m, k, a)
            assert got == pytest.approx(want, rel=1e-8)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            merger_rate(3, 1, MODEL)
        with pytest.raises(ValueError):
            merger_rate(3, 4, MODEL)
        with pytest.raises(ValueError):
            merger_rate(1, 2, MODEL)

    def test_gamma_ratio_recursion(self):
        # lambda_{m,k+1} = lambda_{m,k} (k-alpha)/(m-k-1+alpha), in log domain
        rng = np.random.default_rng(7)
        for _ in range(50):
            m = int(rng.integers(3, 200))
            k = int(rng.integers(2, m))
            a = float(1.01 + rng.random() * 0.98)
            model = AlphaModel(a)
            lhs = log_merger_rate(m, k + 1, model)
            rhs = log_merger_rate(m, k, model) + math.log(
                (k - a) / (m - k - 1.0 + a)
            )
            assert lhs == pytest.approx(rhs, abs=1e-10)


class TestTotalRate:
    def test_two_blocks(self):
        assert total_rate(2, MODEL) == pytest.approx(1.0, abs=1e-14)

    def test_three_blocks(self):
        # 3 * 0.75 + 0.25, each summand quadrature-verified above
        assert total_rate(3, MODEL) == pytest.approx(2.5, rel=1e-12)

    def test_matches_binomial_weighted_sum(self):
        # closed form against the direct sum over merger sizes
        rng = np.random.default_rng(3)
        for _ in range(20):
            m = int(rng.integers(2, 120))
            a = float(1.05 + rng.random() * 0.9)
            model = AlphaModel(a)
            direct = sum(
                math.comb(m, k) * merger_rate(m, k, model) for k in range(2, m + 1)
            )
            assert total_rate(m, model) == pytest.approx(direct, rel=1e-10)

    def test_large_m_asymptote(self):
        m = 200
        target = m**1.5 / (1.5 * math.gamma(1.5))
        assert total_rate(m, MODEL) == pytest.approx(target, rel=0.05)

    def test_strictly_increasing(self):
        vals = total_rate(np.arange(2, 500), MODEL)
        assert np.all(np.diff(vals) > 0)

    @pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
    def test_normalized_asymptote_trend(self, alpha):
        # |lambda_m alpha Gamma(alpha) / m^alpha - 1| <= 5/m on a log grid
        model = AlphaModel(alpha)
        for m in (100, 1000, 10_000):
            ratio = total_rate(m, model) * alpha * math.gamma(alpha) / m**alpha
            assert abs(ratio - 1.0) <= 5.0 / m


class TestJumpDistribution:
    def test_two_blocks_forced(self):
        dist = jump_distribution(2, MODEL)
        assert dist.shape == (1,)
        assert dist[0] == pytest.approx(1.0, abs=1e-14)

    def test_three_blocks(self):
        dist = jump_distribution(3, MODEL)
        assert dist[0] == pytest.approx(0.9, rel=1e-12)
        assert dist[1] == pytest.approx(0.1, rel=1e-12)

    def test_normalization(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            m = int(rng.integers(2, 2000))
            a = float(1.01 + rng.random() * 0.98)
            dist = jump_distribution(m, AlphaModel(a))
            assert abs(dist.sum() - 1.0) <= 1e-12
            assert np.all(dist >= 0)

    def test_matches_log_domain_route(self):
        # cumprod recursion against direct log-gamma evaluation
        for m in (7, 40, 333):
            dist = jump_distribution(m, MODEL)
            direct = jump_probability(m, np.arange(1, m), MODEL)
            np.testing.assert_allclose(dist, direct, rtol=1e-10)

    def test_first_entry_closed_form(self):
        # P(1|m) = alpha m / (2(m + alpha - 2))
        for m in (2, 5, 100, 10_000):
            dist = jump_distribution(m, MODEL)
            assert dist[0] == pytest.approx(
                1.5 * m / (2 * (m + 1.5 - 2.0)), rel=1e-12
            )

    def test_approaches_limit_law(self):
        dist = jump_distribution(10_000, MODEL)
        assert dist[0] == pytest.approx(limit_jump_law(1, MODEL), rel=0.01)

    def test_tv_distance_decreasing(self):
        lim = limit_jump_table(MODEL, 50)
        tvs = []
        for m in (100, 1000, 10_000):
            dist = jump_distribution(m, MODEL)[:50]
            tvs.append(0.5 * np.abs(dist - lim).sum())
        assert tvs[0] > tvs[1] > tvs[2]


class TestLimitJumpLaw:
    def test_value_at_one(self):
        # (alpha/Gamma(2-alpha)) Gamma(2-alpha)/Gamma(3) = alpha/2; equals the
        # m -> infinity limit of the exact pre-limit law
        assert limit_jump_law(1, MODEL) == pytest.approx(0.75, rel=1e-12)
        assert limit_jump_law(1, MODEL) == pytest.approx(
            jump_distribution(10**7, MODEL.__class__(1.5))[0], rel=1e-6
        )

    def test_sums_to_one(self):
        total = limit_jump_table(MODEL, 10**6).sum()
        assert total == pytest.approx(1.0, abs=1e-3)
        # exact survivor closes the gap
        assert total + limit_jump_survivor(10**6, MODEL) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_mean_is_gamma(self):
        j = np.arange(1, 10**6 + 1)
        mean = float(np.sum(j * limit_jump_law(j, MODEL)))
        # truncated mean; tail contributes ~ j^(1-alpha)
        assert mean == pytest.approx(MODEL.gamma, abs=1e-2)

    def test_survivor_consistency(self):
        j = np.arange(1, 200)
        pmf = limit_jump_law(j, MODEL)
        surv = limit_jump_survivor(j, MODEL)
        np.testing.assert_allclose(
            surv, 1.0 - np.cumsum(pmf), rtol=1e-10, atol=1e-14
        )


class TestCenteringConstant:
    def test_order_one(self):
        assert centering_constant(1, MODEL) == pytest.approx(
            0.6646701940895684, rel=1e-12
        )

    def test_order_one_gamma_identity(self):
        # alpha (alpha-1)^2 Gamma(alpha-1) = alpha (alpha-1) Gamma(alpha)
        rng = np.random.default_rng(13)
        for a in 1.0 + rng.random(5) * 0.999:
            model = AlphaModel(a)
            assert centering_constant(1, model) == pytest.approx(
                a * (a - 1.0) * math.gamma(a), rel=1e-12
            )

    def test_order_three(self):
        want = 1.5 * 0.25 * math.gamma(2.5) / 6.0
        assert centering_constant(3, MODEL) == pytest.approx(want, rel=1e-12)
        assert centering_constant(3, MODEL) == pytest.approx(0.0830837742611960, rel=1e-10)


class TestRateTable:
    def test_rows_match_scalar_route(self):
        table = RateTable.build(MODEL, 40)
        for m in (2, 7, 40):
            for k in range(2, m + 1):
                assert table.log_rate(m, k) == pytest.approx(
                    log_merger_rate(m, k, MODEL), abs=1e-12
                )

    def test_jump_cdf_normalized(self):
        table = RateTable.build(MODEL, 60)
        for m in range(2, 61):
            assert table.jump_cdf[m][-1] == pytest.approx(1.0, abs=1e-12)

    def test_sample_jump_within_and_above_cap(self):
        table = RateTable.build(MODEL, 10)
        rng = np.random.default_rng(0)
        below = [table.sample_jump(5, rng) for _ in range(2000)]
        assert set(below) <= set(range(1, 5))
        frac_one = np.mean(np.array(below) == 1)
        assert frac_one == pytest.approx(jump_distribution(5, MODEL)[0], abs=0.05)
        above = [table.sample_jump(50, rng) for _ in range(2000)]
        assert set(above) <= set(range(1, 50))

    def test_csv_dump(self, tmp_path):
        table = RateTable.build(MODEL, 6)
        out = tmp_path / "row.csv"
        table.dump_rate_row(5, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "m,k,lambda_mk"
        assert len(lines) == 5
        m, k, lam = lines[1].split(",")
        assert (m, k) == ("5", "2")
        assert float(lam) == pytest.approx(merger_rate(5, 2, MODEL), rel=1e-15)


class TestJumpLawSampler:
    def test_matches_pmf(self):
        sampler = JumpLawSampler(MODEL, table_size=1000)
        rng = np.random.default_rng(9)
        draws = sampler.sample(rng, 200_000)
        for j in (1, 2, 5):
            assert np.mean(draws == j) == pytest.approx(
                limit_jump_law(j, MODEL), abs=0.005
            )

    def test_deep_tail_walk(self):
        sampler = JumpLawSampler(MODEL, table_size=50)
        rng = np.random.default_rng(10)
        draws = sampler.sample(rng, 100_000)
        frac_beyond = np.mean(draws > 50)
        assert frac_beyond == pytest.approx(
            limit_jump_survivor(50, MODEL), rel=0.25
        )
