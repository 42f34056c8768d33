import numpy as np
import pytest

from netgov.analysis import (
    density_distribution,
    grouped_series,
    phase_contrast,
    summarize,
    write_density_csv,
    write_grouped_csv,
    write_summary_csv,
)
from netgov.env import EpisodeTrace
from netgov.graphs import DensityCategory, pair_count


def make_trace(episode, bits_per_step, rewards=None):
    records = []
    for t, bits in enumerate(bits_per_step):
        links = sum(int(c) for c in bits)
        cost = 0.1 * links
        reward = rewards[t] if rewards is not None else -1.0
        records.append(
            {
                "episode": episode,
                "t": t,
                "agent_pos": [],
                "landmark_pos": [],
                "topology_bits": bits,
                "reward": reward,
                "performance": reward + cost,
                "cost": cost,
            }
        )
    return EpisodeTrace(
        episode,
        records,
        sum(r["reward"] for r in records),
        sum(r["performance"] for r in records),
        sum(r["cost"] for r in records),
    )


def flat(n, fill, steps=50):
    return [fill * pair_count(n)] * steps


class TestDensity:
    def test_all_empty_is_pure_sparse(self):
        traces = [make_trace(i, flat(10, "0")) for i in range(3)]
        series = density_distribution(traces)
        assert np.all(series.fractions[DensityCategory.SPARSE] == 1.0)
        assert np.all(series.fractions[DensityCategory.VERY_DENSE] == 0.0)

    def test_fractions_sum_to_one(self):
        rng = np.random.default_rng(0)
        traces = [
            make_trace(
                i,
                ["".join(rng.choice(["0", "1"], 45)) for _ in range(50)],
            )
            for i in range(5)
        ]
        series = density_distribution(traces)
        total = sum(series.fractions.values())
        assert np.allclose(total, 1.0, atol=1e-12)

    def test_dense_first_then_empty_fixture(self):
        steps = [("1" * 45 if t < 10 else "0" * 45) for t in range(50)]
        series = density_distribution([make_trace(0, steps)])
        very = series.fractions[DensityCategory.VERY_DENSE]
        sparse = series.fractions[DensityCategory.SPARSE]
        assert np.all(very[:10] == 1.0) and np.all(very[10:] == 0.0)
        assert np.all(sparse[10:] == 1.0) and np.all(sparse[:10] == 0.0)

    def test_mixed_sizes_rejected(self):
        traces = [make_trace(0, flat(10, "0")), make_trace(1, flat(4, "0"))]
        with pytest.raises(ValueError, match="mix"):
            density_distribution(traces)


class TestGrouped:
    VISIONS10 = (2.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0)

    def test_empty_series_is_zero(self):
        traces = [make_trace(0, flat(10, "0"))]
        series = grouped_series(traces, self.VISIONS10)
        assert series.groups == [2.0, 1.0, 0.5, 0.0]
        for g in series.groups:
            assert np.all(series.mean_degree[g] == 0.0)
            assert np.all(series.mean_betweenness[g] == 0.0)

    def test_complete_gives_degree_nine_everywhere(self):
        traces = [make_trace(0, flat(10, "1"))]
        series = grouped_series(traces, self.VISIONS10)
        for g in series.groups:
            assert np.all(series.mean_degree[g] == 9.0)

    def test_persistent_star_at_agent_zero(self):
        # star: links (0,j) for all j -> first 9 bits set in pair order
        bits = "1" * 9 + "0" * 36
        traces = [make_trace(0, [bits] * 50)]
        series = grouped_series(traces, self.VISIONS10)
        assert np.all(series.mean_degree[2.0] == 9.0)  # agent 0 alone in group
        assert np.all(series.mean_degree[1.0] == 1.0)
        assert np.all(series.mean_degree[0.0] == 1.0)

    def test_grouping_must_cover_agents(self):
        traces = [make_trace(0, flat(10, "0"))]
        with pytest.raises(ValueError, match="covers"):
            grouped_series(traces, (1.0, 1.0))

    def test_homogeneous_visions_form_one_group(self):
        traces = [make_trace(0, flat(4, "1"))]
        series = grouped_series(traces, (1.0, 1.0, 1.0, 1.0))
        assert series.groups == [1.0]
        assert np.all(series.mean_degree[1.0] == 3.0)


class TestPhaseContrast:
    def test_constant_topology_not_significant(self):
        traces = [make_trace(i, flat(4, "1")) for i in range(10)]
        pc = phase_contrast(traces)
        assert pc.difference == 0.0
        assert not pc.significant

    def test_dense_then_empty_significant(self):
        rng = np.random.default_rng(1)
        traces = []
        for i in range(20):
            steps = []
            for t in range(50):
                p = 0.8 if t < 10 else 0.1
                steps.append("".join(rng.choice(["1", "0"], 6, p=[p, 1 - p])))
            traces.append(make_trace(i, steps))
        pc = phase_contrast(traces)
        assert pc.early_mean_links > pc.late_mean_links
        assert pc.difference > 0
        assert pc.significant

    def test_reversed_fixture_flips_sign(self):
        rng = np.random.default_rng(2)
        traces = []
        for i in range(20):
            steps = []
            for t in range(50):
                p = 0.1 if t < 10 else 0.8
                steps.append("".join(rng.choice(["1", "0"], 6, p=[p, 1 - p])))
            traces.append(make_trace(i, steps))
        pc = phase_contrast(traces)
        assert pc.early_mean_links < pc.late_mean_links
        assert pc.difference < 0

    def test_short_horizon_windows_scale(self):
        traces = [make_trace(i, flat(4, "0", steps=20)) for i in range(4)]
        pc = phase_contrast(traces)  # implicit windows [0,4) and [16,20)
        assert pc.difference == 0.0


class TestSummarize:
    def test_constant_reward_episode(self):
        traces = [make_trace(i, flat(4, "0")) for i in range(100)]
        rows = summarize([("random", "vision_1.0", traces)])
        assert rows[0].mean_return == pytest.approx(-50.0)
        assert rows[0].stderr == 0.0

    def test_stderr_scales_with_episode_count(self):
        rng = np.random.default_rng(3)

        def noisy(count):
            traces = []
            for i in range(count):
                rewards = rng.normal(size=50)
                traces.append(make_trace(i, flat(4, "0"), rewards=rewards))
            return summarize([("m", "s", traces)])[0].stderr

        small, large = noisy(400), noisy(1600)
        assert large == pytest.approx(small / 2, rel=0.1)

    def test_empty_entries_rejected(self):
        with pytest.raises(ValueError):
            summarize([])
        with pytest.raises(ValueError, match="no traces"):
            summarize([("m", "s", [])])


class TestCsvWriters:
    VISIONS = (2.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0)

    def test_schemas_and_determinism(self, tmp_path):
        traces = [make_trace(i, flat(10, "0")) for i in range(2)]
        density = density_distribution(traces)
        grouped = grouped_series(traces, self.VISIONS)
        rows = summarize([("random", "hom_1.0", traces)])

        d1, d2 = tmp_path / "d1.csv", tmp_path / "d2.csv"
        write_density_csv(density, str(d1), header_comment="config_hash=x")
        write_density_csv(density, str(d2), header_comment="config_hash=x")
        assert d1.read_bytes() == d2.read_bytes()
        header = d1.read_text().splitlines()
        assert header[0] == "# config_hash=x"
        assert header[1] == "t,frac_sparse,frac_mid,frac_dense,frac_very"

        g = tmp_path / "g.csv"
        write_grouped_csv(grouped, str(g))
        assert g.read_text().splitlines()[0] == "t,group_vision,mean_degree,mean_betweenness"

        s = tmp_path / "s.csv"
        write_summary_csv(rows, str(s))
        lines = s.read_text().splitlines()
        assert lines[0] == "method,scenario,mean_return,stderr,mean_perf,mean_cost"
        assert lines[1].startswith("random,hom_1.0,")
