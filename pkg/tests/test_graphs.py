"""Graph representation, clustering, and spectral feature checks."""

import itertools

import numpy as np
import pytest

from edgediff.graphs import (
    GraphSample,
    adjacency_to_edges,
    canonical_signs,
    connected_components,
    degree_sequence,
    edge_index,
    edge_pairs,
    from_adjacency,
    graph_to_record,
    jacobi_eigh,
    largest_component_fraction,
    local_clustering,
    normalized_laplacian,
    num_edges,
    read_graphs,
    record_to_graph,
    spectral_basis_batch,
    spectral_features,
    to_adjacency,
    write_graphs,
)


def random_graph(rng, n, p=0.4):
    edges = (rng.random(num_edges(n)) < p).astype(np.uint8)
    return GraphSample(n, np.ones(n), edges)


def test_edge_index_first_last():
    assert edge_index(0, 1, 4) == 0
    assert edge_index(2, 3, 4) == 5


def test_edge_index_rejects_bad_pairs():
    for i, j in [(1, 1), (2, 1), (0, 4)]:
        with pytest.raises(ValueError):
            edge_index(i, j, 4)


def test_edge_index_bijective_exhaustive():
    for n in range(2, 65):
        seen = [edge_index(i, j, n) for i, j in itertools.combinations(range(n), 2)]
        assert sorted(seen) == list(range(num_edges(n)))


def test_edge_index_matches_pair_table():
    for n in (2, 5, 9, 16):
        iu, ju = edge_pairs(n)
        for pos, (i, j) in enumerate(zip(iu, ju)):
            assert edge_index(int(i), int(j), n) == pos


def test_adjacency_trivial_cases():
    empty = GraphSample(4, np.ones(4), np.zeros(6, dtype=np.uint8))
    np.testing.assert_array_equal(to_adjacency(empty), np.zeros((4, 4)))
    k4 = GraphSample(4, np.ones(4), np.ones(6, dtype=np.uint8))
    a = to_adjacency(k4)
    np.testing.assert_array_equal(a, np.ones((4, 4)) - np.eye(4))


def test_adjacency_round_trip():
    rng = np.random.default_rng(10)
    for _ in range(1000):
        g = random_graph(rng, int(rng.integers(2, 15)))
        back = adjacency_to_edges(to_adjacency(g))
        np.testing.assert_array_equal(back, g.edges)


def test_degree_handshake():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        g = random_graph(rng, int(rng.integers(2, 20)))
        assert degree_sequence(g).sum() == 2 * int(g.edges.sum())


def test_degrees_trivial():
    k5 = GraphSample(5, np.ones(5), np.ones(10, dtype=np.uint8))
    np.testing.assert_array_equal(degree_sequence(k5), [4] * 5)
    empty = GraphSample(5, np.ones(5), np.zeros(10, dtype=np.uint8))
    np.testing.assert_array_equal(degree_sequence(empty), [0] * 5)


def brute_clustering(g):
    a = to_adjacency(g)
    out = np.zeros(g.n)
    for i in range(g.n):
        nbrs = [j for j in range(g.n) if a[i, j]]
        if len(nbrs) < 2:
            continue
        tri = sum(1 for u, v in itertools.combinations(nbrs, 2) if a[u, v])
        out[i] = tri / (len(nbrs) * (len(nbrs) - 1) / 2)
    return out


def test_clustering_trivial_cases():
    tri = from_adjacency(np.ones((3, 3)) - np.eye(3))
    np.testing.assert_allclose(local_clustering(tri), [1, 1, 1])
    star = np.zeros((5, 5))
    star[0, 1:] = star[1:, 0] = 1
    np.testing.assert_allclose(local_clustering(from_adjacency(star)), np.zeros(5))


def test_clustering_matches_brute_force():
    rng = np.random.default_rng(12)
    for _ in range(500):
        g = random_graph(rng, int(rng.integers(2, 11)))
        np.testing.assert_allclose(local_clustering(g), brute_clustering(g), atol=1e-12)


def test_connected_components_and_fraction():
    # two triangles, disjoint
    a = np.zeros((6, 6))
    for u, v in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        a[u, v] = a[v, u] = 1
    g = from_adjacency(a)
    assert len(connected_components(g)) == 2
    assert largest_component_fraction(g) == pytest.approx(0.5)


# --- spectral ----------------------------------------------------------------

def test_k2_eigenvalues():
    g = from_adjacency(np.array([[0.0, 1.0], [1.0, 0.0]]))
    feats = spectral_features(g, k=2)
    np.testing.assert_allclose(feats.eigenvalues, [0.0, 2.0], atol=1e-12)


def test_empty_graph_identity_laplacian():
    g = GraphSample(5, np.ones(5), np.zeros(10, dtype=np.uint8))
    feats = spectral_features(g, k=5)
    np.testing.assert_allclose(feats.eigenvalues, np.ones(5), atol=1e-12)


def test_spectral_residuals_and_orthonormality():
    rng = np.random.default_rng(13)
    for method in ("jacobi", "eigh"):
        for _ in range(50):
            g = random_graph(rng, 8)
            lap = normalized_laplacian(to_adjacency(g))
            feats = spectral_features(g, k=5, method=method)
            for col in range(feats.basis.shape[1]):
                v = feats.basis[:, col]
                resid = lap @ v - feats.eigenvalues[col] * v
                assert np.linalg.norm(resid) < 1e-8
            gram = feats.basis.T @ feats.basis
            assert np.max(np.abs(gram - np.eye(feats.basis.shape[1]))) < 1e-8
            assert np.all(np.diff(feats.eigenvalues) >= -1e-12)


def test_jacobi_matches_eigh_eigenvalues():
    rng = np.random.default_rng(14)
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(2, 12)))
        lap = normalized_laplacian(to_adjacency(g))
        jv, _ = jacobi_eigh(lap)
        ev = np.linalg.eigvalsh(lap)
        np.testing.assert_allclose(np.sort(jv), ev, atol=1e-10)


def test_scaled_laplacian_variant_differs():
    rng = np.random.default_rng(15)
    g = random_graph(rng, 6, p=0.6)
    a = to_adjacency(g)
    std = normalized_laplacian(a, "normalized")
    lit = normalized_laplacian(a, "scaled")
    assert not np.allclose(std, lit)


def test_canonical_signs_fixed_point_and_batch():
    rng = np.random.default_rng(16)
    basis = rng.normal(size=(7, 3))
    fixed = canonical_signs(basis)
    np.testing.assert_array_equal(canonical_signs(fixed), fixed)
    for col in range(3):
        v = fixed[:, col]
        assert v[np.argmax(np.abs(v))] > 0
    stacked = canonical_signs(np.stack([basis, -basis]))
    np.testing.assert_allclose(stacked[0], stacked[1])


def test_spectral_basis_batch_matches_single():
    rng = np.random.default_rng(17)
    graphs = [random_graph(rng, 9) for _ in range(4)]
    adj = np.stack([to_adjacency(g) for g in graphs])
    batch = spectral_basis_batch(adj, k=5)
    for b, g in enumerate(graphs):
        single = spectral_features(g, k=5, method="eigh")
        np.testing.assert_allclose(batch[b], single.basis, atol=1e-10)


# --- interchange -------------------------------------------------------------

def test_graph_record_round_trip(tmp_path):
    rng = np.random.default_rng(18)
    graphs = [random_graph(rng, int(rng.integers(2, 12))) for _ in range(20)]
    for g in graphs:
        back = record_to_graph(graph_to_record(g))
        assert back.n == g.n
        np.testing.assert_array_equal(back.edges, g.edges)
        np.testing.assert_array_equal(back.node_features, g.node_features)
    path = tmp_path / "graphs.ndjson"
    write_graphs(path, graphs)
    loaded = read_graphs(path)
    assert len(loaded) == len(graphs)
    for a, b in zip(loaded, graphs):
        np.testing.assert_array_equal(a.edges, b.edges)
