"""Seeded generators for the four synthetic graph families.

Every sample is a pure function of (family, seed, epoch, index) through a
Philox counter-based generator, so cached datasets are byte-identical across
platforms and runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .graphs import GraphSample, edge_index, num_edges, write_graphs

GENERATOR_VERSION = "philox4x64-seedseq-1"

FAMILIES = ("community-small", "sbm", "cliques", "molecule-like")

_FAMILY_IDS = {name: i for i, name in enumerate(FAMILIES)}

# {5,6} would need 11 nodes on a 10-node graph, so it is excluded from the draw
_CLIQUE_PAIRS = [(3, 4), (3, 5), (3, 6), (4, 5), (4, 6)]


@dataclass(frozen=True)
class DatasetSpec:
    family: str
    count: int
    seed: int = 0
    streaming: bool = False  # False: fixed cache replayed every epoch

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; pick one of {FAMILIES}")
        if self.count < 1:
            raise ValueError("count must be >= 1")


def item_rng(family: str, seed: int, epoch: int, index: int) -> np.random.Generator:
    """Portable per-sample generator."""
    ss = np.random.SeedSequence([_FAMILY_IDS[family], seed, epoch, index])
    return np.random.Generator(np.random.Philox(ss))


def _er_bits(rng, count, p):
    return rng.random(count) < p


def gen_community_small(rng: np.random.Generator) -> GraphSample:
    """Two Erdos-Renyi(p=0.3) communities on 12..20 nodes joined by
    round(0.05 n) extra edges."""
    n = int(rng.integers(12, 21))
    n1 = (n + 1) // 2  # odd n: first community gets the extra node
    edges = np.zeros(num_edges(n), dtype=np.uint8)
    for lo, hi in ((0, n1), (n1, n)):
        for i in range(lo, hi):
            for j in range(i + 1, hi):
                if rng.random() < 0.3:
                    edges[edge_index(i, j, n)] = 1
    inter = [(i, j) for i in range(n1) for j in range(n1, n)]
    k = math.floor(0.05 * n + 0.5)  # round half up
    for pick in rng.choice(len(inter), size=k, replace=False):
        i, j = inter[pick]
        edges[edge_index(i, j, n)] = 1
    return GraphSample(n, np.ones(n), edges)


def gen_sbm(rng: np.random.Generator) -> GraphSample:
    """2..5 blocks of 20..40 nodes; intra-block p=0.3, inter-block p=0.05."""
    blocks = int(rng.integers(2, 6))
    sizes = rng.integers(20, 41, size=blocks)
    n = int(sizes.sum())
    member = np.repeat(np.arange(blocks), sizes)
    iu, ju = np.triu_indices(n, k=1)
    p = np.where(member[iu] == member[ju], 0.3, 0.05)
    edges = (rng.random(p.size) < p).astype(np.uint8)
    return GraphSample(n, np.ones(n), edges)


def gen_cliques(rng: np.random.Generator) -> GraphSample:
    """10 nodes holding two disjoint cliques of distinct sizes from {3,4,5,6};
    remaining nodes are singletons."""
    a, b = _CLIQUE_PAIRS[int(rng.integers(len(_CLIQUE_PAIRS)))]
    perm = rng.permutation(10)
    edges = np.zeros(num_edges(10), dtype=np.uint8)
    for members in (perm[:a], perm[a:a + b]):
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                i, j = sorted((int(members[x]), int(members[y])))
                edges[edge_index(i, j, 10)] = 1
    return GraphSample(10, np.ones(10), edges)


def gen_molecule_like(rng: np.random.Generator) -> GraphSample:
    """10-node molecule-like graph: 4..6 backbone nodes (feature 0) in a ring
    or a max-degree-4 random tree, 0..4 secondary leaf nodes (feature 1),
    padded with singletons of alternating label."""
    nb = int(rng.integers(4, 7))
    ns = int(rng.integers(0, 5))
    edges = np.zeros(num_edges(10), dtype=np.uint8)
    deg = np.zeros(10, dtype=np.int64)

    def link(i, j):
        edges[edge_index(min(i, j), max(i, j), 10)] = 1
        deg[i] += 1
        deg[j] += 1

    if rng.random() < 0.5:  # single simple cycle over the backbone
        order = rng.permutation(nb)
        for k in range(nb):
            link(int(order[k]), int(order[(k + 1) % nb]))
    else:  # random tree, each new node a leaf on a degree<4 node
        for new in range(1, nb):
            options = [v for v in range(new) if deg[v] < 4]
            link(new, options[int(rng.integers(len(options)))])

    for s in range(ns):  # each free backbone slot equally likely
        free = (4 - deg[:nb]).astype(np.float64)
        probs = free / free.sum()
        host = int(rng.choice(nb, p=probs))
        link(host, nb + s)

    features = np.ones(10)
    features[:nb] = 0.0
    pad_start = nb + ns
    for k in range(10 - pad_start):  # alternate backbone/secondary labels
        features[pad_start + k] = 0.0 if k % 2 == 0 else 1.0
    return GraphSample(10, features, edges)


_GENERATORS = {
    "community-small": gen_community_small,
    "sbm": gen_sbm,
    "cliques": gen_cliques,
    "molecule-like": gen_molecule_like,
}


def generate(family: str, seed: int, epoch: int, index: int) -> GraphSample:
    return _GENERATORS[family](item_rng(family, seed, epoch, index))


def dataset_stream(spec: DatasetSpec, epoch: int = 0):
    """Yield one epoch's graphs.  Cached specs replay epoch 0 forever;
    streaming specs draw fresh samples keyed by the epoch number."""
    effective = epoch if spec.streaming else 0
    for index in range(spec.count):
        yield generate(spec.family, spec.seed, effective, index)


def manifest(spec: DatasetSpec) -> dict:
    return {"family": spec.family, "seed": spec.seed, "count": spec.count,
            "streaming": spec.streaming, "generator_version": GENERATOR_VERSION}


def write_dataset(spec: DatasetSpec, path) -> None:
    """Write an epoch-0 dataset as newline-delimited JSON plus a sidecar
    manifest at <path>.manifest.json."""
    write_graphs(path, dataset_stream(spec))
    with open(str(path) + ".manifest.json", "w") as fh:
        json.dump(manifest(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- per-family structural validators (used by the test suite) --------------

def validate_sample(family: str, g: GraphSample) -> None:
    from .graphs import degree_sequence, to_adjacency

    deg = degree_sequence(g)
    if family == "community-small":
        assert 12 <= g.n <= 20
        assert np.all(g.node_features == 1)
        n1 = (g.n + 1) // 2
        a = to_adjacency(g)
        inter = int(a[:n1, n1:].sum())
        assert inter == math.floor(0.05 * g.n + 0.5)
    elif family == "sbm":
        assert 40 <= g.n <= 200
        assert np.all(g.node_features == 1)
    elif family == "cliques":
        assert g.n == 10
        assert np.all(g.node_features == 1)
        comps = _nontrivial_components(g)
        sizes = sorted(len(c) for c in comps)
        assert len(sizes) == 2 and sizes[0] != sizes[1]
        assert all(3 <= s <= 6 for s in sizes)
        assert sum(sizes) <= 10
        a = to_adjacency(g)
        for comp in comps:  # each component is a complete subgraph
            sub = a[np.ix_(comp, comp)]
            assert np.all(sub + np.eye(len(comp)) == 1)
    elif family == "molecule-like":
        assert g.n == 10
        backbone = np.flatnonzero(g.node_features == 0)
        secondary = np.flatnonzero(g.node_features == 1)
        assert np.all(deg[backbone] <= 4)
        a = to_adjacency(g)
        for s in secondary:
            if deg[s] > 0:
                assert deg[s] == 1
                nbr = int(np.flatnonzero(a[s])[0])
                assert g.node_features[nbr] == 0
    else:
        raise ValueError(family)


def _nontrivial_components(g: GraphSample):
    from .graphs import connected_components

    return [c for c in connected_components(g) if len(c) > 1]
