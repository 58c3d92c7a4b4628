"""Edge denoising network: predicts per-edge clean-bit probabilities from a
noisy graph and the diffusion time.

Pipeline per forward pass: a 3-component time embedding is projected and
concatenated onto each node's scalar feature, encoded by two ReLU dense
layers, then refined by attention blocks.  Each block optionally mixes a
low-frequency spectral projection into the input, runs all-pairs multi-head
attention with a learned per-head bias on the edge-present/absent attribute,
and applies dropout, residual layer norm, and two dense residual sublayers.
A final stack maps every node to a scalar s_i; edge (i, j) gets probability
sigmoid(s_i * s_j), which is symmetric by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import NumericError
from .graphs import GraphSample, edge_pairs, spectral_basis_batch

_LN_EPS = 1e-5


@dataclass(frozen=True)
class DenoiserConfig:
    hidden_dim: int = 64
    num_layers: int = 3
    num_heads: int = 4
    head_dim: int = 16
    dropout_p: float = 0.1
    use_spectral: bool = True
    spectral_k: int = 5
    time_dim: int = 256
    spectral_method: str = "eigh"  # batched fast path; "jacobi" also available

    def __post_init__(self):
        for name in ("hidden_dim", "num_layers", "num_heads", "head_dim", "spectral_k", "time_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not (0.0 <= self.dropout_p < 1.0):
            raise ValueError("dropout_p must be in [0, 1)")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "DenoiserConfig":
        return cls(**d)


def param_layout(cfg: DenoiserConfig):
    """Named (name, shape) segments of the flat parameter vector, in order."""
    h, td = cfg.hidden_dim, cfg.time_dim
    hd = cfg.num_heads * cfg.head_dim
    di = 2 * h if cfg.use_spectral else h
    out = [
        ("time_w", (3, td)), ("time_b", (td,)),
        ("enc0_w", (1 + td, h)), ("enc0_b", (h,)),
        ("enc1_w", (h, h)), ("enc1_b", (h,)),
    ]
    for l in range(cfg.num_layers):
        if cfg.use_spectral:
            out += [(f"l{l}.spec_w", (h, h)), (f"l{l}.spec_b", (h,))]
        out += [
            (f"l{l}.q_w", (di, hd)), (f"l{l}.q_b", (hd,)),
            (f"l{l}.k_w", (di, hd)), (f"l{l}.k_b", (hd,)),
            (f"l{l}.v_w", (di, hd)), (f"l{l}.v_b", (hd,)),
            (f"l{l}.edge_on", (cfg.num_heads,)), (f"l{l}.edge_off", (cfg.num_heads,)),
            (f"l{l}.ao_w", (hd, h)), (f"l{l}.ao_b", (h,)),
            (f"l{l}.ln0_g", (h,)), (f"l{l}.ln0_b", (h,)),
        ]
        for r in (1, 2):
            out += [
                (f"l{l}.ff{r}_w", (h, h)), (f"l{l}.ff{r}_b", (h,)),
                (f"l{l}.ln{r}_g", (h,)), (f"l{l}.ln{r}_b", (h,)),
            ]
    out += [
        ("dec0_w", (h, h)), ("dec0_b", (h,)),
        ("dec1_w", (h, h)), ("dec1_b", (h,)),
        ("head_w", (h, 1)), ("head_b", (1,)),
    ]
    return tuple(out)


@dataclass
class DenoiserParams:
    """Flat float64 parameter vector with a named segment layout."""

    layout: tuple
    flat: np.ndarray

    _offsets: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._offsets = {}
        pos = 0
        for name, shape in self.layout:
            size = int(np.prod(shape))
            self._offsets[name] = (pos, shape)
            pos += size
        if self.flat.shape != (pos,):
            raise ValueError(f"flat vector has {self.flat.shape}, layout needs ({pos},)")

    @property
    def size(self) -> int:
        return self.flat.size

    def segment(self, name: str) -> np.ndarray:
        pos, shape = self._offsets[name]
        return self.flat[pos:pos + int(np.prod(shape))].reshape(shape)

    def copy(self) -> "DenoiserParams":
        return DenoiserParams(self.layout, self.flat.copy())


def init_params(cfg: DenoiserConfig, rng: np.random.Generator) -> DenoiserParams:
    """Glorot-uniform weights, zero biases, unit layer-norm gains."""
    layout = param_layout(cfg)
    flat = np.zeros(sum(int(np.prod(s)) for _, s in layout))
    params = DenoiserParams(layout, flat)
    for name, shape in layout:
        seg = params.segment(name)
        if name.endswith("_w"):
            fan_in, fan_out = shape[0], shape[1]
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            seg[...] = rng.uniform(-bound, bound, size=shape)
        elif name.endswith("ln0_g") or name.endswith("ln1_g") or name.endswith("ln2_g"):
            seg[...] = 1.0
    return params


def time_embedding_base(t, T: int) -> np.ndarray:
    """[sin(pi/2 t/T), cos(pi/2 t/T), t/T] per batch element."""
    frac = np.asarray(t, dtype=np.float64) / T
    return np.stack([np.sin(0.5 * np.pi * frac), np.cos(0.5 * np.pi * frac), frac], axis=-1)


def _nodes_from_edges(e: int) -> int:
    n = (1 + math.isqrt(1 + 8 * e)) // 2
    if n * (n - 1) // 2 != e:
        raise ValueError(f"edge vector length {e} is not a triangular number")
    return n


def _adjacency_batch(edges: np.ndarray, n: int) -> np.ndarray:
    b = edges.shape[0]
    iu, ju = edge_pairs(n)
    adj = np.zeros((b, n, n))
    adj[:, iu, ju] = edges
    adj[:, ju, iu] = edges
    return adj


def _check_finite(x: Tensor, where: str):
    if not np.all(np.isfinite(x.data)):
        raise NumericError(f"non-finite activations at {where}")


def _forward_logits(P, cfg: DenoiserConfig, edges: np.ndarray, features: np.ndarray,
                    t: np.ndarray, T: int, train_mode: bool, rng) -> Tensor:
    """Shared forward pass.  P maps segment name -> Tensor.  edges is
    [B, E] float, features [B, n], t [B] integer steps."""
    B, E = edges.shape
    n = _nodes_from_edges(E)
    adj = _adjacency_batch(edges, n)
    h = cfg.hidden_dim
    H, dh = cfg.num_heads, cfg.head_dim

    def dropout(x: Tensor) -> Tensor:
        if not train_mode or cfg.dropout_p == 0.0:
            return x
        keep = rng.random(x.shape) >= cfg.dropout_p
        return x * Tensor(keep / (1.0 - cfg.dropout_p))

    te = Tensor(time_embedding_base(t, T)) @ P["time_w"] + P["time_b"]  # [B, td]
    te_nodes = te.reshape(B, 1, cfg.time_dim) * Tensor(np.ones((1, n, 1)))
    x = ad.concat([Tensor(features[:, :, None]), te_nodes], axis=2)
    x = ad.relu(x @ P["enc0_w"] + P["enc0_b"])
    x = ad.relu(x @ P["enc1_w"] + P["enc1_b"])  # [B, n, h]

    if cfg.use_spectral:
        basis = spectral_basis_batch(adj, cfg.spectral_k)  # [B, n, k]
        v_t = Tensor(basis)
        vt_t = Tensor(np.swapaxes(basis, 1, 2))

    scale = 1.0 / math.sqrt(dh)
    adj_h = adj[:, None, :, :]  # edge attribute per head, diagonal counts as absent
    for l in range(cfg.num_layers):
        p = lambda key: P[f"l{l}.{key}"]
        if cfg.use_spectral:
            smooth = v_t @ (vt_t @ x)
            sp = smooth @ p("spec_w") + p("spec_b")
            ai = ad.concat([sp, x], axis=2)
        else:
            ai = x

        def heads(key):
            proj = ai @ p(key + "_w") + p(key + "_b")
            return proj.reshape(B, n, H, dh).transpose((0, 2, 1, 3))

        q, k, v = heads("q"), heads("k"), heads("v")
        scores = (q @ k.transpose((0, 1, 3, 2))) * scale
        scores = scores + p("edge_on").reshape(1, H, 1, 1) * Tensor(adj_h)
        scores = scores + p("edge_off").reshape(1, H, 1, 1) * Tensor(1.0 - adj_h)
        attn = ad.softmax(scores, axis=-1) @ v  # [B, H, n, dh]
        g = attn.transpose((0, 2, 1, 3)).reshape(B, n, H * dh) @ p("ao_w") + p("ao_b")
        x = ad.layer_norm(ad.relu(dropout(g)) + g, p("ln0_g"), p("ln0_b"), _LN_EPS)
        for r in (1, 2):
            d = dropout(x @ p(f"ff{r}_w") + p(f"ff{r}_b"))
            x = ad.layer_norm(d + x, p(f"ln{r}_g"), p(f"ln{r}_b"), _LN_EPS)
        _check_finite(x, f"attention block {l}")

    x = ad.relu(x @ P["dec0_w"] + P["dec0_b"])
    x = ad.relu(x @ P["dec1_w"] + P["dec1_b"])
    s = (x @ P["head_w"] + P["head_b"]).reshape(B, n)
    iu, ju = edge_pairs(n)
    logits = s.take(iu, axis=1) * s.take(ju, axis=1)  # [B, E]
    _check_finite(logits, "edge head")
    return logits


def _tensorize(params: DenoiserParams, requires_grad: bool) -> dict:
    return {name: Tensor(params.segment(name), requires_grad=requires_grad)
            for name, _ in params.layout}


def forward_batch(params: DenoiserParams, cfg: DenoiserConfig, edges: np.ndarray,
                  features: np.ndarray, t, T: int, train_mode: bool = False,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-edge probabilities [B, E] for a same-size batch of noisy graphs."""
    edges = np.asarray(edges, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    t = np.broadcast_to(np.asarray(t, dtype=np.float64), (edges.shape[0],))
    if features.ndim == 1:
        features = np.broadcast_to(features, (edges.shape[0], features.size))
    P = _tensorize(params, requires_grad=False)
    logits = _forward_logits(P, cfg, edges, features, t, T, train_mode, rng)
    return 1.0 / (1.0 + np.exp(-logits.data))


def forward(params: DenoiserParams, cfg: DenoiserConfig, graph: GraphSample, t: int,
            T: int, train_mode: bool = False,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-edge probabilities for a single graph at diffusion time t."""
    if not 0 <= t <= T:
        raise ValueError(f"t={t} outside [0, {T}]")
    return forward_batch(params, cfg, graph.edges[None, :].astype(np.float64),
                         graph.node_features[None, :], np.array([t]), T,
                         train_mode, rng)[0]


def bernoulli_cross_entropy(p, x, eps: float = 1e-12) -> np.ndarray:
    """Elementwise BCE with probabilities clamped to [eps, 1-eps]."""
    p = np.clip(np.asarray(p, dtype=np.float64), eps, 1.0 - eps)
    x = np.asarray(x, dtype=np.float64)
    return -(x * np.log(p) + (1.0 - x) * np.log(1.0 - p))


def loss_and_grad(params: DenoiserParams, cfg: DenoiserConfig, batch, T: int,
                  rng: np.random.Generator):
    """Mean BCE over all edges in the batch, plus its exact gradient.

    batch is a sequence of (noisy GraphSample, t, clean edge bits).  Graphs of
    equal size run as one vectorized forward; groups are processed in
    ascending node-count order so dropout draws are reproducible.
    """
    if len(batch) == 0:
        raise ValueError("batch must be nonempty")
    P = _tensorize(params, requires_grad=True)
    groups: dict[int, list] = {}
    for item in batch:
        groups.setdefault(item[0].n, []).append(item)

    total_edges = 0
    total_sum = 0.0
    for n in sorted(groups):
        items = groups[n]
        edges = np.stack([g.edges for g, _, _ in items]).astype(np.float64)
        feats = np.stack([g.node_features for g, _, _ in items])
        ts = np.array([t for _, t, _ in items], dtype=np.float64)
        x0 = np.stack([np.asarray(x, dtype=np.float64) for _, _, x in items])
        logits = _forward_logits(P, cfg, edges, feats, ts, T, True, rng)
        # BCE with logits: softplus(l) - x0 * l, summed over the group
        group_sum = (ad.softplus(logits) - Tensor(x0) * logits).sum()
        group_sum.backward()
        total_sum += float(group_sum.data)
        total_edges += edges.size

    grad = np.zeros_like(params.flat)
    out = DenoiserParams(params.layout, grad)
    for name, _ in params.layout:
        leaf = P[name]
        if leaf.grad is not None:
            out.segment(name)[...] = leaf.grad
    grad /= total_edges
    return total_sum / total_edges, grad
