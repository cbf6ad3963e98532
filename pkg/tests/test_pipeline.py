import numpy as np
import pytest

from fsrprune import AttentionInput, PruneConfig, explain, format_report, prune
from fsrprune.pipeline import result_to_document
from fsrprune.scan import coverage_radius


def random_case(rng, n, d=4):
    tokens = rng.standard_normal((n, d))
    attn = AttentionInput.from_cls_rows(rng.random((2, n)))
    return tokens, attn, rng.standard_normal(d)


@pytest.fixture
def two_clusters():
    # tokens 0-2 sit near e1 (salient, query-aligned), tokens 3-5 near e2 (background)
    tokens = np.array([
        [1.0, 0.0, 0.0],
        [1.0, 0.1, 0.0],
        [1.0, 0.0, 0.1],
        [0.0, 1.0, 0.0],
        [0.1, 1.0, 0.0],
        [0.0, 1.0, 0.1],
    ])
    attn = AttentionInput.from_cls_rows([[0.3, 0.25, 0.25, 0.1, 0.05, 0.05]])
    return tokens, attn, np.array([1.0, 0.0, 0.0])


def test_planted_two_clusters(two_clusters):
    tokens, attn, query = two_clusters
    res = prune(tokens, attn, query, PruneConfig(budget_K=4))
    # hand trace: phi ~ [1, 0.788, 0.788, 0, 0, 0] -> 0.9 of the mass needs all three salient tokens
    assert res.stats.k_f == 3
    assert res.kept_indices[res.origins == "focus"].tolist() == [0, 1, 2]
    # from the focus set, token 5 is at distance 1 - 0.1/1.01 and token 3 at 1 - 0.1/sqrt(1.01)
    assert res.kept_indices[res.origins == "scan"].tolist() == [5]
    assert res.stats.m == 1


def test_budget_equal_to_n_is_passthrough():
    rng = np.random.default_rng(0)
    tokens, attn, q = random_case(rng, 12)
    for K in (12, 50):
        res = prune(tokens, attn, q, PruneConfig(budget_K=K))
        assert res.kept_indices.tolist() == list(range(12))
        np.testing.assert_array_equal(res.kept_vectors, tokens)
        assert res.stats.m == 0
        assert res.stats.coverage_radius == 0.0


def test_budget_one_keeps_top_token():
    rng = np.random.default_rng(1)
    tokens, attn, q = random_case(rng, 20)
    res = prune(tokens, attn, q, PruneConfig(budget_K=1))
    assert res.kept_indices.tolist() == [int(np.argmax(res.phi))]
    assert res.origins.tolist() == ["focus"]


@pytest.mark.parametrize("seed", range(30))
def test_result_shape_and_provenance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    tokens, attn, q = random_case(rng, n)
    K = int(rng.integers(1, n + 1))
    res = prune(tokens, attn, q, PruneConfig(budget_K=K, rho=float(rng.random())))
    assert res.kept_indices.size == K
    assert np.all(np.diff(res.kept_indices) > 0)
    assert res.stats.k_f + res.stats.k_s == K
    focus = res.origins == "focus"
    assert focus.sum() == res.stats.k_f
    np.testing.assert_array_equal(res.kept_vectors[focus], tokens[res.kept_indices[focus]])
    np.testing.assert_array_equal(res.weights[focus], res.phi[res.kept_indices[focus]])
    assert res.stats.coverage_radius == pytest.approx(coverage_radius(tokens, res.kept_indices))
    assert 0.0 <= res.stats.retained_priority_mass <= 1.0 + 1e-12


def test_zero_kappa_disables_refine():
    rng = np.random.default_rng(4)
    tokens, attn, q = random_case(rng, 40)
    res = prune(tokens, attn, q, PruneConfig(budget_K=10, kappa=0.0))
    assert res.stats.m == 0
    np.testing.assert_array_equal(res.kept_vectors, tokens[res.kept_indices])


def test_no_stats_flag():
    rng = np.random.default_rng(4)
    tokens, attn, q = random_case(rng, 40)
    res = prune(tokens, attn, q, PruneConfig(budget_K=10, compute_stats=False))
    assert res.stats.coverage_radius is None


def test_concentrating_priorities_never_grows_focus():
    rng = np.random.default_rng(9)
    tokens = rng.standard_normal((30, 4))
    raw = rng.random(30)
    top = int(np.argmax(raw))
    cfg = PruneConfig(budget_K=30, relevance_mode="none")
    previous = None
    for t in np.linspace(0, 1, 11):
        squeezed = raw.copy()
        others = np.arange(30) != top
        squeezed[others] = raw[others] + t * (raw.min() - raw[others])
        k_f = prune(tokens, AttentionInput.from_cls_rows(squeezed), None, cfg).stats.k_f
        if previous is not None:
            assert k_f <= previous
        previous = k_f
    assert previous == 1


def test_explain_reports_budget_and_radius():
    rng = np.random.default_rng(2)
    tokens, attn, q = random_case(rng, 50)
    res = prune(tokens, attn, q, PruneConfig(budget_K=12, rho=0.3))
    assert res.stats.k_s > 0
    report = explain(res)
    assert report["budget"]["k_f"] + report["budget"]["k_s"] == 12
    assert report["coverage_radius"] == pytest.approx(coverage_radius(tokens, res.kept_indices))
    assert report["scan"]["gain_sequence"] == res.scan.gain_sequence.tolist()
    assert explain(result_to_document(res)) == report
    text = format_report(report)
    assert "K_F + K_S = K: True" in text


def test_explain_marks_skipped_scan():
    tokens = np.eye(4)
    attn = AttentionInput.from_cls_rows([[0.4, 0.3, 0.2, 0.1]])
    res = prune(tokens, attn, None, PruneConfig(budget_K=1, relevance_mode="none"))
    report = explain(res)
    assert report["scan"] == {"status": "skipped"}
    assert "scan     skipped" in format_report(report)


def test_prune_is_deterministic():
    rng = np.random.default_rng(11)
    tokens, attn, q = random_case(rng, 100, 16)
    a = prune(tokens, attn, q, PruneConfig(budget_K=20))
    b = prune(tokens, attn, q, PruneConfig(budget_K=20))
    assert a.kept_vectors.tobytes() == b.kept_vectors.tobytes()
    assert result_to_document(a) == result_to_document(b)


def test_inputs_are_not_mutated():
    rng = np.random.default_rng(12)
    tokens, attn, q = random_case(rng, 40)
    before = tokens.copy()
    prune(tokens, attn, q, PruneConfig(budget_K=8, kappa=3))
    np.testing.assert_array_equal(tokens, before)
