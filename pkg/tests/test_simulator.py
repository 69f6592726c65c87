"""Trajectory simulation tests: identities, cross-mode equivalence, determinism."""
import numpy as np
import pytest

from betacoal.rates import AlphaModel, jump_distribution
from betacoal.simulator import (
    EXACT_MODE_CAP,
    RescaledWalk,
    dump_path_csv,
    order_r_lengths,
    recompute_lengths,
    rescaled_walk,
    simulate_partition,
    simulate_path,
)

MODEL = AlphaModel(1.5)


class TestSimulatePath:
    def test_two_leaves(self):
        path = simulate_path(2, MODEL, s=2, seed=1)
        assert path.tau_n == 1
        assert path.deltas.tolist() == [1]
        assert path.block_counts.tolist() == [2, 1]
        assert path.spectrum_rows[0].tolist() == [2, 0]
        assert path.spectrum_rows[1].tolist() == [0, 1]
        # single interval, two singleton branches, lambda_2 = 1
        assert path.lengths_exponential[0] == pytest.approx(
            2.0 * path.hold_samples[0], rel=1e-14
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            simulate_path(1, MODEL)
        with pytest.raises(ValueError):
            simulate_path(5, MODEL, s=6)
        with pytest.raises(ValueError):
            simulate_path(5, MODEL, s=0)

    def test_monotone_and_absorbing(self):
        path = simulate_path(500, MODEL, s=2, seed=3)
        assert path.block_counts[0] == 500
        assert path.block_counts[-1] == 1
        assert np.all(np.diff(path.block_counts) < 0)
        assert path.tau_n <= 499
        assert np.all(path.deltas >= 1)
        # jump sizes reproduce the block-count decrements
        np.testing.assert_array_equal(
            path.deltas, -np.diff(path.block_counts)
        )

    def test_determinism_bit_identical(self):
        a = simulate_path(300, MODEL, s=3, seed=42, replicate=5)
        b = simulate_path(300, MODEL, s=3, seed=42, replicate=5)
        np.testing.assert_array_equal(a.deltas, b.deltas)
        np.testing.assert_array_equal(a.hold_samples, b.hold_samples)
        np.testing.assert_array_equal(a.spectrum_rows, b.spectrum_rows)
        c = simulate_path(300, MODEL, s=3, seed=42, replicate=6)
        assert not np.array_equal(a.deltas, c.deltas)

    def test_spectrum_terminal_row(self):
        path = simulate_path(40, MODEL, s=40, seed=2)
        final = path.spectrum_rows[-1]
        assert final[39] == 1
        assert final[:39].sum() == 0

    def test_streamed_matches_recorded(self):
        rec = simulate_path(2000, MODEL, s=3, seed=9, record_spectrum=True)
        stream = simulate_path(2000, MODEL, s=3, seed=9, record_spectrum=False)
        assert stream.spectrum_rows is None
        np.testing.assert_array_equal(rec.deltas, stream.deltas)
        np.testing.assert_allclose(
            rec.lengths_exponential, stream.lengths_exponential, rtol=1e-15
        )
        np.testing.assert_allclose(
            rec.lengths_rao_blackwell, stream.lengths_rao_blackwell, rtol=1e-15
        )

    def test_length_accumulators_match_rows(self):
        path = simulate_path(800, MODEL, s=4, seed=17)
        np.testing.assert_allclose(
            order_r_lengths(path, "exponential"),
            recompute_lengths(path, "exponential"),
            rtol=1e-10,
        )
        np.testing.assert_allclose(
            order_r_lengths(path, "rao_blackwell"),
            recompute_lengths(path, "rao_blackwell"),
            rtol=1e-10,
        )

    def test_first_jump_matches_exact_law(self):
        # simulated Delta_1 frequencies against the exact jump distribution;
        # the raw mean is a poor statistic here (infinite variance), the
        # exact-law trend test below carries the limit claim instead
        n = 1000
        firsts = np.asarray(
            [simulate_path(n, MODEL, s=1, seed=21, replicate=i).deltas[0] for i in range(4000)],
            dtype=float,
        )
        dist = jump_distribution(n, MODEL)
        for d in (1, 2, 3, 4, 5):
            frac = float(np.mean(firsts == d))
            se = np.sqrt(dist[d - 1] * (1 - dist[d - 1]) / len(firsts))
            assert abs(frac - dist[d - 1]) < 4 * se

    def test_mean_jump_size_converges_to_gamma(self):
        # exact pre-limit means rise monotonically to gamma
        means = []
        for m in (100, 1000, 10_000, 100_000):
            dist = jump_distribution(m, MODEL)
            means.append(float(np.sum(np.arange(1, m) * dist)))
        assert means == sorted(means)
        assert means[-1] == pytest.approx(MODEL.gamma, abs=0.01)

    def test_jump_count_scale_trend(self):
        # mean tau_n / (n/gamma) -> 1; the O(n^(1/alpha)) correction is large
        # at small n, so assert a decreasing trend plus closeness at the top
        ratios = []
        for n in (30, 300, 3000):
            taus = np.array(
                [simulate_path(n, MODEL, s=1, seed=8, replicate=i).tau_n for i in range(3000)],
                dtype=float,
            )
            ratios.append(taus.mean() / (n / MODEL.gamma))
        assert ratios[0] > ratios[1] > ratios[2]
        assert abs(ratios[2] - 1.0) < 0.10

    def test_kingman_limit_pairwise_dominates(self):
        # alpha near 2: P(Delta = 1 | m) = alpha m / (2(m+alpha-2)) ~ alpha/2
        model = AlphaModel(1.95)
        dist = jump_distribution(1000, model)
        assert dist[0] == pytest.approx(1.95 / 2.0, abs=1e-3)
        assert dist[0] > 0.95
        path = simulate_path(1000, model, s=1, seed=0)
        assert np.mean(path.deltas == 1) > 0.9


class TestRescaledWalk:
    def test_starts_at_zero(self):
        walk = rescaled_walk(simulate_path(100, MODEL, s=1, seed=5))
        assert walk.values[0] == 0.0
        assert walk(0.0) == 0.0

    def test_block_count_identity(self):
        # X_k = n - gamma k - n^(1/alpha) S_{k/n}, exactly
        for seed in range(5):
            path = simulate_path(10_000, MODEL, s=1, seed=seed)
            walk = rescaled_walk(path)
            k = np.arange(path.tau_n + 1)
            recon = 10_000 - MODEL.gamma * k - 10_000 ** (1 / 1.5) * walk.values
            assert np.abs(path.block_counts - recon).max() <= 1e-6

    def test_jump_count_identity(self):
        # tau_n = (n-1)/gamma - (n^(1/alpha)/gamma) S_{tau/n}
        for seed in range(5):
            n = 10_000
            path = simulate_path(n, MODEL, s=1, seed=seed)
            walk = rescaled_walk(path)
            rhs = (n - 1) / MODEL.gamma - n ** (1 / 1.5) / MODEL.gamma * walk.values[-1]
            assert path.tau_n == pytest.approx(rhs, abs=1e-6 * path.tau_n)

    def test_step_function_lookup(self):
        path = simulate_path(50, MODEL, s=1, seed=1)
        walk = rescaled_walk(path)
        assert walk(10.0) == walk.values[-1]  # beyond tau: plateau
        assert walk(1.0 / MODEL.gamma) == walk.at_cut()
        assert isinstance(walk, RescaledWalk)


class TestExactMode:
    def test_two_leaves_single_merge(self):
        parts, _ = simulate_partition(2, MODEL, seed=0)
        assert len(parts) == 2
        assert parts[1].blocks == (frozenset({1, 2}),)

    def test_cap_enforced(self):
        with pytest.raises(ValueError):
            simulate_partition(EXACT_MODE_CAP + 1, MODEL, seed=0)

    def test_mass_conservation(self):
        parts, path = simulate_partition(60, MODEL, seed=4)
        for p in parts:
            p.validate(60)
            assert sum(len(b) for b in p.blocks) == 60

    def test_block_counts_match_chain(self):
        parts, path = simulate_partition(80, MODEL, seed=6)
        counts = np.array([len(p.blocks) for p in parts])
        np.testing.assert_array_equal(counts, path.block_counts)

    def test_shares_delta_stream_with_spectrum_mode(self):
        parts, exact_path = simulate_partition(50, MODEL, seed=123)
        spec_path = simulate_path(50, MODEL, s=50, seed=123)
        np.testing.assert_array_equal(exact_path.deltas, spec_path.deltas)
        np.testing.assert_array_equal(exact_path.hold_samples, spec_path.hold_samples)

    def test_first_jump_spectrum_three_leaves(self):
        # after one jump from n=3: either a 2-block plus singleton or one 3-block
        hits = {2: 0, 3: 0}
        for i in range(4000):
            parts, _ = simulate_partition(3, MODEL, seed=31, replicate=i)
            first = parts[1]
            sizes = sorted(len(b) for b in first.blocks)
            if sizes == [1, 2]:
                hits[2] += 1
            elif sizes == [3]:
                hits[3] += 1
        frac = hits[2] / (hits[2] + hits[3])
        # jump law at m = 3: 0.9 / 0.1
        assert frac == pytest.approx(0.9, abs=0.02)

    def test_cross_mode_spectrum_distribution(self):
        # Z_{2,5} distribution: exact labeled mode vs spectrum mode, chi^2
        n, level, reps = 50, 5, 4000
        exact_counts, spec_counts = [], []
        for i in range(reps):
            _, pe = simulate_partition(n, MODEL, seed=77, replicate=i, s=3)
            exact_counts.append(pe.spectrum_rows[level, 1])
            ps = simulate_path(n, MODEL, s=3, seed=778899, replicate=i)
            spec_counts.append(ps.spectrum_rows[level, 1])
        exact_counts = np.asarray(exact_counts)
        spec_counts = np.asarray(spec_counts)
        m = int(max(exact_counts.max(), spec_counts.max()))
        bins = np.arange(-0.5, m + 1.5)
        h1, _ = np.histogram(exact_counts, bins)
        h2, _ = np.histogram(spec_counts, bins)
        keep = (h1 + h2) >= 10
        h1, h2 = h1[keep], h2[keep]
        pooled = (h1 + h2) / 2.0
        chi2 = float(np.sum((h1 - pooled) ** 2 / pooled + (h2 - pooled) ** 2 / pooled))
        dof = max(len(pooled) - 1, 1)
        # generous bound ~ p > 0.01 for the realized dof
        from scipy.stats import chi2 as chi2_dist

        assert chi2 < chi2_dist.ppf(0.99, dof)


class TestSpectrumState:
    def test_accessor(self):
        path = simulate_path(30, MODEL, s=3, seed=2)
        st = path.spectrum_state(0)
        assert st.block_count == 30
        assert st.small_counts[0] == 30
        assert st.big_count == 0
        mid = path.spectrum_state(path.tau_n // 2)
        assert mid.block_count == int(path.block_counts[path.tau_n // 2])
        assert mid.big_count >= 0

    def test_big_block_bookkeeping(self):
        # with s = 1, everything beyond singletons is big
        path = simulate_path(200, MODEL, s=1, seed=3)
        for k in (0, 1, path.tau_n // 2, path.tau_n):
            st = path.spectrum_state(k)
            assert st.small_counts[0] + st.big_count == st.block_count


class TestPathDump:
    def test_csv_layout(self, tmp_path):
        path = simulate_path(12, MODEL, s=2, seed=5)
        out = tmp_path / "path.csv"
        dump_path_csv(path, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "k,X_k,Delta_k,Z_1,Z_2,W_k"
        assert len(lines) == path.tau_n + 2
        first = lines[1].split(",")
        assert first[:3] == ["0", "12", "0"]
        assert first[3] == "12"
        last = lines[-1].split(",")
        assert last[1] == "1"
        assert last[-1] == ""

    def test_round_trip_values(self, tmp_path):
        path = simulate_path(15, MODEL, s=3, seed=6)
        out = tmp_path / "path.csv"
        dump_path_csv(path, out)
        rows = [line.split(",") for line in out.read_text().strip().splitlines()[1:]]
        ks = [int(r[0]) for r in rows]
        assert ks == list(range(path.tau_n + 1))
        xs = np.array([int(r[1]) for r in rows])
        np.testing.assert_array_equal(xs, path.block_counts)
        ws = np.array([float(r[-1]) for r in rows[:-1]])
        np.testing.assert_allclose(ws, path.hold_samples, rtol=1e-16)
