import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphspde import (
    DataError,
    build_graph,
    fractional_laplacian,
    laplacian,
    line_graph,
)

from conftest import random_graph, union_find_components


class TestBuildGraph:
    def test_path_graph(self):
        g = build_graph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0)])
        assert g.n_vertices == 3
        assert g.labels == ("a", "b", "c")
        assert not g.directed

    def test_single_isolated_vertex(self):
        g = build_graph(["a"], [])
        assert g.n_vertices == 1
        assert g.edges == ()

    def test_self_loop_rejected(self):
        with pytest.raises(DataError, match="self-loop"):
            build_graph(["a", "b"], [("a", "a", 1.0)])

    def test_duplicate_label_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            build_graph(["a", "a"], [])

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(DataError, match="weight"):
            build_graph(["a", "b"], [("a", "b", 0.0)])

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(DataError, match="not a declared vertex"):
            build_graph(["a", "b"], [("a", "zz", 1.0)])

    def test_vertex_order_is_sorted_labels(self):
        g = build_graph(["c", "a", "b"], [("c", "a", 2.0)])
        assert g.labels == ("a", "b", "c")
        # edge c-a maps to indices (2, 0)
        assert g.edges[0][:2] in {(2, 0), (0, 2)}


class TestLaplacian:
    def test_path_graph_unnormalized(self):
        g = build_graph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0)])
        lap = laplacian(g)
        expected = np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
        np.testing.assert_allclose(lap.matrix, expected)
        assert lap.symmetric

    def test_single_vertex(self):
        g = build_graph(["a"], [])
        np.testing.assert_allclose(laplacian(g).matrix, [[0.0]])

    def test_weighted_two_path(self):
        g = build_graph(["a", "b"], [("a", "b", 2.0)])
        np.testing.assert_allclose(laplacian(g).matrix, [[2.0, -2.0], [-2.0, 2.0]])

    def test_sym_normalized_unit_diagonal(self):
        g = build_graph(["a", "b", "c"], [("a", "b", 3.0), ("b", "c", 0.5)])
        lap = laplacian(g, "sym_normalized")
        np.testing.assert_allclose(np.diag(lap.matrix), 1.0)
        eigs = np.linalg.eigvalsh(lap.matrix)
        assert eigs.min() >= -1e-10 and eigs.max() <= 2.0 + 1e-10

    def test_random_walk_rows_sum_to_zero(self):
        g = build_graph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 4.0)])
        lap = laplacian(g, "random_walk")
        np.testing.assert_allclose(lap.matrix.sum(axis=1), 0.0, atol=1e-12)

    def test_normalized_variants_reject_isolated_vertex(self):
        g = build_graph(["a", "b", "c"], [("a", "b", 1.0)])
        for variant in ("sym_normalized", "random_walk"):
            with pytest.raises(DataError, match="isolated"):
                laplacian(g, variant)

    def test_directed_laplacian_uses_out_weights(self):
        g = build_graph(["a", "b"], [("a", "b", 1.0)], directed=True)
        lap = laplacian(g)
        np.testing.assert_allclose(lap.matrix, [[1.0, -1.0], [0.0, 0.0]])
        assert not lap.symmetric


class TestFractionalLaplacian:
    def test_single_vertex_sqrt_two(self):
        g = build_graph(["a"], [])
        frac = fractional_laplacian(laplacian(g), nu=1.0, kappa=1.0)
        np.testing.assert_allclose(frac.matrix, [[np.sqrt(2.0)]])

    def test_nu2_large_kappa_coincides_with_laplacian(self):
        # exponent nu/2 = 1, shift 2*2/kappa^2 -> 0
        lap = laplacian(line_graph(3))
        frac = fractional_laplacian(lap, nu=2.0, kappa=1e6)
        np.testing.assert_allclose(frac.matrix, lap.matrix, atol=1e-5)

    def test_triangle_spectrum(self):
        g = build_graph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
        lap = laplacian(g)
        # oracle: brute-force eigendecomposition of the 3x3 Laplacian
        base_eigs = np.sort(np.linalg.eigvalsh(lap.matrix))
        np.testing.assert_allclose(base_eigs, [0.0, 3.0, 3.0], atol=1e-12)
        frac = fractional_laplacian(lap, nu=2.0, kappa=1.0)
        np.testing.assert_allclose(np.sort(frac.shifted_eigs), [4.0, 7.0, 7.0], atol=1e-12)

    def test_asymmetric_rejected(self):
        g = build_graph(["a", "b"], [("a", "b", 1.0)], directed=True)
        with pytest.raises(DataError):
            fractional_laplacian(laplacian(g), nu=1.0, kappa=1.0)

    def test_reconstruction_symmetric(self):
        rng = np.random.default_rng(3)
        g = random_graph(rng, 8)
        frac = fractional_laplacian(laplacian(g), nu=1.5, kappa=2.0)
        np.testing.assert_allclose(frac.matrix, frac.matrix.T)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_unnormalized_laplacian_psd_and_zero_row_sums(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 12, connected=False)
    lap = laplacian(g).matrix
    np.testing.assert_allclose(lap.sum(axis=1), 0.0, atol=1e-12)
    assert np.all(lap - np.diag(np.diag(lap)) <= 1e-15)
    norm = np.max(np.abs(lap)) or 1.0
    assert np.linalg.eigvalsh(lap).min() >= -1e-10 * norm


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_zero_eigenvalue_multiplicity_counts_components(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 10, connected=False)
    lap = laplacian(g).matrix
    eigs = np.linalg.eigvalsh(lap)
    norm = max(np.max(np.abs(lap)), 1.0)
    n_zero = int(np.sum(np.abs(eigs) < 1e-8 * norm))
    assert n_zero == union_find_components(g.n_vertices, g.edges)


def test_fractional_limit_property():
    rng = np.random.default_rng(7)
    for _ in range(5):
        g = random_graph(rng, 9)
        lap = laplacian(g)
        frac = fractional_laplacian(lap, nu=2.0, kappa=1e6)
        np.testing.assert_allclose(frac.matrix, lap.matrix, atol=1e-4)
