"""Undirected simple graphs as binary edge vectors.

A graph on n nodes is stored as a uint8 vector of length C(n,2) over the
upper-triangular pairs (0,1), (0,2), ..., (0,n-1), (1,2), ... in row-major
order, plus one scalar feature per node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError


def num_edges(n: int) -> int:
    """Number of undirected edge slots for n nodes."""
    return n * (n - 1) // 2


def edge_index(i: int, j: int, n: int) -> int:
    """Position of pair (i, j) with i < j < n in the edge vector."""
    if not (0 <= i < j < n):
        raise ValueError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def edge_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) node indices for every edge slot, in edge-vector order."""
    return np.triu_indices(n, k=1)


@dataclass
class GraphSample:
    """An undirected simple graph: node count, per-node scalar features,
    and the binary edge vector."""

    n: int
    node_features: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        self.node_features = np.asarray(self.node_features, dtype=np.float64)
        self.edges = np.asarray(self.edges, dtype=np.uint8)
        if self.node_features.shape != (self.n,):
            raise ValueError(f"expected {self.n} node features, got shape {self.node_features.shape}")
        if self.edges.shape != (num_edges(self.n),):
            raise ValueError(f"expected {num_edges(self.n)} edge bits for n={self.n}, got shape {self.edges.shape}")

    def copy(self) -> "GraphSample":
        return GraphSample(self.n, self.node_features.copy(), self.edges.copy())


def to_adjacency(g: GraphSample) -> np.ndarray:
    """Symmetric 0/1 adjacency matrix with zero diagonal."""
    return edges_to_adjacency(g.edges, g.n)


def edges_to_adjacency(edges: np.ndarray, n: int) -> np.ndarray:
    a = np.zeros((n, n), dtype=np.float64)
    iu, ju = edge_pairs(n)
    a[iu, ju] = edges
    a[ju, iu] = edges
    return a


def adjacency_to_edges(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    iu, ju = edge_pairs(a.shape[0])
    return (a[iu, ju] != 0).astype(np.uint8)


def from_adjacency(a: np.ndarray, node_features=None) -> GraphSample:
    n = a.shape[0]
    if node_features is None:
        node_features = np.ones(n)
    return GraphSample(n, node_features, adjacency_to_edges(a))


def degree_sequence(g: GraphSample) -> np.ndarray:
    """Per-node degrees; their sum is twice the number of present edges."""
    deg = np.zeros(g.n, dtype=np.int64)
    iu, ju = edge_pairs(g.n)
    on = g.edges.astype(bool)
    np.add.at(deg, iu[on], 1)
    np.add.at(deg, ju[on], 1)
    return deg


def local_clustering(g: GraphSample) -> np.ndarray:
    """Local clustering coefficient per node; 0 for degree < 2."""
    a = to_adjacency(g)
    deg = a.sum(axis=1)
    triangles = np.diag(a @ a @ a) / 2.0
    possible = deg * (deg - 1) / 2.0
    out = np.zeros(g.n)
    ok = possible > 0
    out[ok] = triangles[ok] / possible[ok]
    return out


def connected_components(g: GraphSample) -> list[list[int]]:
    """Connected components as sorted node lists."""
    a = to_adjacency(g)
    seen = np.zeros(g.n, dtype=bool)
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in np.flatnonzero(a[v]):
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
        comps.append(sorted(comp))
    return comps


def largest_component_fraction(g: GraphSample) -> float:
    """Size of the largest connected component divided by n."""
    return max(len(c) for c in connected_components(g)) / g.n


# ---------------------------------------------------------------------------
# Spectral features


def normalized_laplacian(a: np.ndarray, variant: str = "normalized") -> np.ndarray:
    """Laplacian of an adjacency matrix.

    variant "normalized" is I - D^{-1/2} A D^{-1/2} with the convention that
    isolated nodes contribute 0 to the normalization (their row reduces to the
    identity row).  variant "scaled" uses D^{+1/2} A D^{+1/2} instead, for
    comparison runs.
    """
    deg = a.sum(axis=1)
    if variant == "normalized":
        with np.errstate(divide="ignore"):
            d = np.where(deg > 0, deg ** -0.5, 0.0)
    elif variant == "scaled":
        d = deg ** 0.5
    else:
        raise ValueError(f"unknown laplacian variant {variant!r}")
    return np.eye(a.shape[0]) - (d[:, None] * a) * d[None, :]


def jacobi_eigh(m: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).  Raises
    NumericError if the off-diagonal Frobenius norm has not dropped below
    tol after max_sweeps sweeps.
    """
    a = np.array(m, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[offdiag] ** 2))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:  # theta**2 would overflow
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NumericError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order]


def canonical_signs(basis: np.ndarray) -> np.ndarray:
    """Flip eigenvector signs so each column's largest-|entry| is positive.

    Ties in magnitude resolve to the lowest row index.  Works on a single
    [n, k] basis or a stacked [..., n, k] batch.
    """
    mags = np.abs(basis)
    idx = np.argmax(mags, axis=-2)
    picked = np.take_along_axis(basis, idx[..., None, :], axis=-2)[..., 0, :]
    signs = np.where(picked < 0, -1.0, 1.0)
    return basis * signs[..., None, :]


@dataclass
class SpectralFeatures:
    """Eigenvectors of the Laplacian for the k smallest eigenvalues."""

    eigenvalues: np.ndarray
    basis: np.ndarray  # [n, k], columns orthonormal


def spectral_features(g: GraphSample, k: int = 5, method: str = "jacobi",
                      variant: str = "normalized") -> SpectralFeatures:
    """Basis of the k lowest-frequency Laplacian eigenvectors.

    method "jacobi" uses the cyclic Jacobi solver; "eigh" delegates to
    numpy.linalg.eigh (faster, identical eigenvalues).
    """
    k = min(k, g.n)
    lap = normalized_laplacian(to_adjacency(g), variant)
    if method == "jacobi":
        vals, vecs = jacobi_eigh(lap)
    elif method == "eigh":
        vals, vecs = np.linalg.eigh(lap)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return SpectralFeatures(vals[:k], canonical_signs(vecs[:, :k]))


def spectral_basis_batch(adj: np.ndarray, k: int, variant: str = "normalized") -> np.ndarray:
    """Canonicalized [B, n, k] spectral bases for a stack of adjacency matrices."""
    b, n, _ = adj.shape
    k = min(k, n)
    deg = adj.sum(axis=-1)
    if variant == "normalized":
        with np.errstate(divide="ignore"):
            d = np.where(deg > 0, deg ** -0.5, 0.0)
    else:
        d = deg ** 0.5
    lap = np.eye(n)[None] - d[:, :, None] * adj * d[:, None, :]
    _, vecs = np.linalg.eigh(lap)
    return canonical_signs(vecs[:, :, :k])


# ---------------------------------------------------------------------------
# Interchange format: one JSON record per graph, newline-delimited.


def graph_to_record(g: GraphSample) -> dict:
    iu, ju = edge_pairs(g.n)
    on = g.edges.astype(bool)
    return {
        "n": g.n,
        "node_features": [float(x) for x in g.node_features],
        "edge_list": [[int(i), int(j)] for i, j in zip(iu[on], ju[on])],
    }


def record_to_graph(rec: dict) -> GraphSample:
    n = rec["n"]
    edges = np.zeros(num_edges(n), dtype=np.uint8)
    for i, j in rec["edge_list"]:
        edges[edge_index(min(i, j), max(i, j), n)] = 1
    return GraphSample(n, np.asarray(rec["node_features"], dtype=np.float64), edges)


def write_graphs(path, graphs) -> None:
    with open(path, "w") as fh:
        for g in graphs:
            fh.write(json.dumps(graph_to_record(g), separators=(",", ":")) + "\n")


def read_graphs(path) -> list[GraphSample]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(record_to_graph(json.loads(line)))
    return out
