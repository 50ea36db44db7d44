import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cranemarket.dataset import GrowthSeries, RevenuePanel, growth_rates
from cranemarket.errors import InputError
from cranemarket.markov import (
    DiscretizationSpec,
    State,
    TransitionMatrix,
    discretize,
    estimate_transitions,
    external_competition_series,
    risk_profiles,
    risk_report,
    stacked_bar_svg,
    stationary,
    transition_counts,
)

from conftest import make_panel

D, S, G = State.DECLINING, State.STABLE, State.GROWING
state_seqs = st.lists(st.sampled_from(list(State)), min_size=2, max_size=30)


def random_stochastic(rng, n=3):
    p = rng.uniform(0.01, 1.0, (n, n))
    return p / p.sum(axis=1, keepdims=True)


class TestDiscretize:
    def test_bands(self):
        assert discretize(GrowthSeries("x", np.array([-0.1, 0.0, 0.1]))) == [D, S, G]

    def test_thresholds_are_stable(self):
        assert discretize([-0.02, 0.02]) == [S, S]

    def test_growth_example(self):
        assert discretize([0.25, -0.10]) == [G, D]

    def test_empty(self):
        with pytest.raises(InputError):
            discretize([])

    def test_spec_order(self):
        with pytest.raises(InputError):
            DiscretizationSpec(0.1, -0.1)


class TestTransitions:
    def test_hand_count(self):
        p = estimate_transitions([G, G, D, S, G]).p
        np.testing.assert_array_equal(p[G], [0.5, 0, 0.5])
        np.testing.assert_array_equal(p[D], [0, 1, 0])
        np.testing.assert_array_equal(p[S], [0, 0, 1])

    def test_unseen_rows_uniform(self):
        p = estimate_transitions([S, S, S, S]).p
        np.testing.assert_array_equal(p[S], [0, 1, 0])
        np.testing.assert_allclose(p[D], [1 / 3] * 3, atol=1e-15)
        np.testing.assert_allclose(p[G], [1 / 3] * 3, atol=1e-15)

    @given(state_seqs)
    def test_smoothing_positive(self, seq):
        assert np.all(estimate_transitions(seq, smoothing=1.0).p > 0)

    @given(state_seqs, st.floats(0, 5))
    def test_rows_stochastic(self, seq, smoothing):
        p = estimate_transitions(seq, smoothing).p
        np.testing.assert_allclose(p.sum(axis=1), 1, atol=1e-12)

    @given(state_seqs)
    def test_reads_consecutive_pairs_only(self, seq):
        counts = transition_counts(seq)
        assert counts.sum() == len(seq) - 1
        # reversing time transposes the count matrix
        np.testing.assert_array_equal(transition_counts(seq[::-1]), counts.T)

    def test_too_short(self):
        with pytest.raises(InputError):
            estimate_transitions([S])

    def test_rejects_bad_matrix(self):
        with pytest.raises(InputError):
            TransitionMatrix([[0.5, 0.4, 0], [0, 1, 0], [0, 0, 1]])


class TestStationary:
    @pytest.mark.parametrize("method", ["power_iteration", "eigen_solve"])
    def test_cycle(self, method):
        res = stationary([[0, 1, 0], [0, 0, 1], [1, 0, 0]], method)
        np.testing.assert_allclose(res.pi, [1 / 3] * 3, atol=1e-12)

    @pytest.mark.parametrize("method", ["power_iteration", "eigen_solve"])
    def test_two_state(self, method):
        res = stationary([[0.9, 0.1], [0.5, 0.5]], method)
        np.testing.assert_allclose(res.pi, [5 / 6, 1 / 6], atol=1e-10)

    @pytest.mark.parametrize("method", ["power_iteration", "eigen_solve"])
    def test_identity_tie_break(self, method):
        res = stationary(np.eye(3), method)
        np.testing.assert_allclose(res.pi, [1 / 3] * 3, atol=1e-15)

    def test_periodic_needs_damping(self):
        # period-2 chain: plain iteration from uniform oscillates
        p = [[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]]
        res = stationary(p, "power_iteration", max_iter=10_000)
        np.testing.assert_allclose(res.pi, [0.25, 0.5, 0.25], atol=1e-10)
        assert res.iterations_used > 5000
        assert res.residual <= 1e-10

    def test_non_convergence_reports_iterate(self):
        from cranemarket.errors import ConvergenceError

        p = [[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]]
        with pytest.raises(ConvergenceError) as exc:
            stationary(p, "power_iteration", max_iter=10)
        assert exc.value.last_iterate is not None
        assert exc.value.residual > 0

    def test_absorbing(self):
        p = [[0.5, 0.5, 0], [0, 0.5, 0.5], [0, 0, 1]]
        for method in ("power_iteration", "eigen_solve"):
            np.testing.assert_allclose(stationary(p, method).pi, [0, 0, 1], atol=1e-10)

    def test_unknown_method(self):
        with pytest.raises(InputError):
            stationary(np.eye(3), "qr")

    def test_positive_chains_agree(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p = random_stochastic(rng)
            a, b = stationary(p), stationary(p, "eigen_solve")
            assert b.method == "eigen_solve"
            assert a.residual <= 1e-10 and b.residual <= 1e-10
            assert np.max(np.abs(a.pi - b.pi)) <= 1e-8
            assert np.all(a.pi >= 0) and a.pi.sum() == pytest.approx(1, abs=1e-12)

    @given(state_seqs, st.floats(0.01, 3))
    def test_smoothed_chains_converge_without_damping(self, seq, smoothing):
        res = stationary(estimate_transitions(seq, smoothing), max_iter=100_000)
        assert res.iterations_used <= 50_000
        assert res.residual <= 1e-10


class TestExternal:
    def test_two_companies(self):
        panel = make_panel([[100, 120, 90], [50, 55, 66]])
        ext = external_competition_series(panel, "C0")
        np.testing.assert_allclose(ext.rates, growth_rates(panel)[1].rates, atol=1e-15)

    def test_flat_competitors(self):
        panel = make_panel([[100, 150, 90, 200], [50, 50, 50, 50], [10, 10, 10, 10]])
        ext = external_competition_series(panel, "C0")
        assert discretize(ext) == [S, S, S]

    def test_sample_leave_one_out(self, sample_panel):
        for k, name in enumerate(sample_panel.companies):
            cols = [sum(sample_panel.values[i, t] for i in range(7) if i != k) for t in range(5)]
            manual = [cols[t + 1] / cols[t] - 1 for t in range(4)]
            np.testing.assert_allclose(external_competition_series(sample_panel, name).rates, manual, atol=1e-15)

    def test_unknown_company(self, sample_panel):
        with pytest.raises(InputError, match="Nobody"):
            external_competition_series(sample_panel, "Nobody")


class TestProfiles:
    def test_steady_grower_absorbs(self):
        panel = make_panel([[100, 110, 121, 133.1, 146.41], [50, 49, 51, 50, 50.5]])
        prof = risk_profiles(panel)[0]
        np.testing.assert_allclose(prof.internal.pi, [0, 0, 1], atol=1e-10)

    def test_identical_companies_share_external(self):
        panel = make_panel([[100, 90, 120, 115], [100, 90, 120, 115], [30, 40, 35, 45]])
        a, b, _ = risk_profiles(panel)
        np.testing.assert_array_equal(a.external.pi, b.external.pi)

    @pytest.mark.parametrize("smoothing", [0.0, 1.0])
    def test_sample_fixed_points(self, sample_panel, smoothing):
        for prof in risk_profiles(sample_panel, smoothing=smoothing):
            for dist, tm in ((prof.internal, prof.internal_p), (prof.external, prof.external_p)):
                assert np.max(np.abs(dist.pi @ tm.p - dist.pi)) <= 1e-10
                assert dist.pi.sum() == pytest.approx(1, abs=1e-12)

    def test_report(self, sample_panel):
        import json

        profiles = risk_profiles(sample_panel)
        doc = json.loads(risk_report(profiles))
        assert doc["states"] == ["Declining", "Stable", "Growing"]
        assert set(doc["companies"]["Sany"]) == {"internal", "external"}
        assert "transitions" not in doc["companies"]["Sany"]["internal"]
        verbose = json.loads(risk_report(profiles, verbose=True))
        assert len(verbose["companies"]["Sany"]["internal"]["transitions"]) == 3


class TestStackedBar:
    def test_bars(self, sample_panel):
        profiles = risk_profiles(sample_panel)
        root = ET.fromstring(stacked_bar_svg(profiles))
        rects = list(root.iter("{http://www.w3.org/2000/svg}rect"))
        heights = {}
        for r in rects:
            cls = r.get("class") or ""
            if cls.startswith("bar-"):
                heights[(r.get("x"), cls)] = heights.get((r.get("x"), cls), 0) + float(r.get("height"))
        assert len(heights) == 2 * len(profiles)
        assert max(heights.values()) - min(heights.values()) < 0.05
        fills = [r.get("fill") for r in rects if (r.get("class") or "").startswith("bar-")]
        assert fills[:3] == ["#d62728", "#1f77b4", "#2ca02c"]

    def test_empty(self):
        with pytest.raises(InputError):
            stacked_bar_svg([])
