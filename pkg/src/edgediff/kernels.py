"""Bernoulli diffusion kernels on binary vectors.

Three per-bit corruption processes over a noise schedule beta[1..T]:

* bit-flip: flip each bit with probability beta_t (prior: Bern(1/2))
* bit-one:  set each bit to 1 with probability beta_t (prior: all ones)
* bit-zero: set each bit to 0 with probability beta_t (prior: all zeros)

All marginals and posteriors are closed-form Bernoulli parameters; the
schedule caches the cumulative products they need so every query is O(1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ImpossibleTransitionError

PROB_SLACK = 1e-9  # tolerated float drift outside [0, 1] before it's an error


class Kernel(str, Enum):
    BIT_FLIP = "bit-flip"
    BIT_ONE = "bit-one"
    BIT_ZERO = "bit-zero"


@dataclass(frozen=True)
class NoiseSchedule:
    """Corruption probabilities beta[0..T] (beta[0] = 0 means "no noise")
    with cached cumulative products.

    cum_half[t] = prod_{i=1..t} (1/2 - beta_i)
    cum_keep[t] = prod_{i=1..t} (1 - beta_i)
    log_flip[t] = sum_{i=1..t} log(1 - 2 beta_i), kept in log space so the
    bit-flip coefficient 2^{t-1} cum_half[t] = exp(log_flip[t]) / 2 survives
    T = 1000 without overflow/underflow games.
    """

    T: int
    beta: np.ndarray
    cum_half: np.ndarray = field(repr=False)
    cum_keep: np.ndarray = field(repr=False)
    log_flip: np.ndarray = field(repr=False)

    @classmethod
    def from_betas(cls, betas) -> "NoiseSchedule":
        """Build a schedule from beta values for t = 1..T."""
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 1:
            raise ValueError("need a 1-d sequence of at least one beta")
        if np.any(betas < 0) or np.any(betas >= 0.5 + 1e-12):
            raise ValueError("betas must satisfy 0 <= beta < 1/2 + 1e-12")
        T = betas.size
        beta = np.concatenate([[0.0], betas])
        cum_half = np.cumprod(np.concatenate([[1.0], 0.5 - betas]))
        cum_keep = np.cumprod(np.concatenate([[1.0], 1.0 - betas]))
        with np.errstate(divide="ignore"):
            log_terms = np.log(np.maximum(1.0 - 2.0 * betas, 0.0))
        log_flip = np.concatenate([[0.0], np.cumsum(log_terms)])
        return cls(T, beta, cum_half, cum_keep, log_flip)

    def half_coeff(self, t) -> np.ndarray | float:
        """2^{t-1} * cum_half[t], computed in log space."""
        return np.exp(self.log_flip[t]) / 2.0

    def to_record(self, kind: Kernel) -> dict:
        return {"kind": Kernel(kind).value, "T": self.T,
                "beta": [float(b) for b in self.beta[1:]]}

    @classmethod
    def from_record(cls, rec: dict) -> tuple[Kernel, "NoiseSchedule"]:
        return Kernel(rec["kind"]), cls.from_betas(rec["beta"])


def default_schedule(T: int) -> NoiseSchedule:
    """beta_t = min(logistic(t/100 - 10), 1/2 - 1e-6) for t = 1..T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    t = np.arange(1, T + 1, dtype=np.float64)
    betas = np.minimum(1.0 / (1.0 + np.exp(-(t / 100.0 - 10.0))), 0.5 - 1e-6)
    return NoiseSchedule.from_betas(betas)


def schedule_to_json(kind: Kernel, sched: NoiseSchedule) -> str:
    return json.dumps(sched.to_record(kind))


def schedule_from_json(text: str) -> tuple[Kernel, NoiseSchedule]:
    return NoiseSchedule.from_record(json.loads(text))


def _check_t(sched: NoiseSchedule, t: int, lo: int = 0) -> None:
    if not (lo <= t <= sched.T):
        raise ValueError(f"t={t} outside [{lo}, {sched.T}]")


def _as_prob(p):
    """Clamp float drift back into [0, 1]; anything further out is a bug."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr < -PROB_SLACK) or np.any(arr > 1.0 + PROB_SLACK):
        raise ValueError(f"probability outside [0, 1] beyond tolerance: {arr}")
    out = np.clip(arr, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def forward_prob(kind: Kernel, sched: NoiseSchedule, x0, t: int):
    """q(x_t = 1 | x_0).  x0 may be a bit or an array of bits."""
    _check_t(sched, t)
    x0 = np.asarray(x0, dtype=np.float64)
    kind = Kernel(kind)
    if kind is Kernel.BIT_FLIP:
        flipbar = 0.5 - sched.half_coeff(t)
        p = (1.0 - x0) * flipbar + x0 * (1.0 - flipbar)
    elif kind is Kernel.BIT_ONE:
        p = x0 + (1.0 - x0) * (1.0 - sched.cum_keep[t])
    else:
        p = x0 * sched.cum_keep[t]
    return _as_prob(p)


def forward_pmf(kind: Kernel, sched: NoiseSchedule, xt, x0, t: int):
    """q(x_t = xt | x_0) for given bits."""
    p1 = forward_prob(kind, sched, x0, t)
    xt = np.asarray(xt, dtype=np.float64)
    return _as_prob(xt * p1 + (1.0 - xt) * (1.0 - np.asarray(p1)))


def step_prob(kind: Kernel, sched: NoiseSchedule, x_prev, t: int):
    """P(x_t = 1 | x_{t-1}) for the single step at time t."""
    _check_t(sched, t, lo=1)
    b = sched.beta[t]
    x = np.asarray(x_prev, dtype=np.float64)
    kind = Kernel(kind)
    if kind is Kernel.BIT_FLIP:
        p = x * (1.0 - b) + (1.0 - x) * b
    elif kind is Kernel.BIT_ONE:
        p = x + (1.0 - x) * b
    else:
        p = x * (1.0 - b)
    return _as_prob(p)


def _posterior_pieces(kind: Kernel, sched: NoiseSchedule, x0, xt, t: int):
    """(numerator, denominator) of q(x_{t-1} = 1 | x_t, x_0).

    The denominator is q(x_t | x_0); a zero denominator marks an impossible
    (xt, x0) pair under the kernel.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    xt = np.asarray(xt, dtype=np.float64)
    b = sched.beta[t]
    # x_t + b - 2 x_t b written in branch form so absorbing posteriors come
    # out exactly 0 or 1 instead of 1 - 2 ulp
    step = np.where(xt > 0.5, 1.0 - b, b)
    kind = Kernel(kind)
    if kind is Kernel.BIT_FLIP:
        prev = 0.5 + (2.0 * x0 - 1.0) * sched.half_coeff(t - 1)
        num = step * prev
        xor = (xt - x0) ** 2
        den = 0.5 + (1.0 - 2.0 * xor) * sched.half_coeff(t)
    elif kind is Kernel.BIT_ONE:
        num = xt * (x0 + (1.0 - x0) * (1.0 - sched.cum_keep[t - 1]))
        den = (x0 * xt
               + (1.0 - x0) * xt * (1.0 - sched.cum_keep[t])
               + (1.0 - x0) * (1.0 - xt) * sched.cum_keep[t])
    else:
        num = step * x0 * sched.cum_keep[t - 1]
        den = ((1.0 - x0) * (1.0 - xt)
               + x0 * (1.0 - xt) * (1.0 - sched.cum_keep[t])
               + x0 * xt * sched.cum_keep[t])
    return num, den


def posterior_prob(kind: Kernel, sched: NoiseSchedule, x0, xt, t: int):
    """q(x_{t-1} = 1 | x_t, x_0), exact per kernel.

    Raises ImpossibleTransitionError when (xt, x0) has zero forward
    probability, e.g. bit-one with x0 = 1, xt = 0.
    """
    _check_t(sched, t, lo=1)
    num, den = _posterior_pieces(kind, sched, x0, xt, t)
    if np.any(np.asarray(den) == 0.0):
        raise ImpossibleTransitionError(
            f"{Kernel(kind).value}: pair (xt={xt}, x0={x0}) has zero probability at t={t}")
    return _as_prob(num / den)


def posterior_mixture(kind: Kernel, sched: NoiseSchedule, p_hat: np.ndarray,
                      xt: np.ndarray, t: int) -> np.ndarray:
    """Posterior parameter with the clean bit marginalized under p_hat.

    p_hat is the predicted probability that x_0 = 1 per bit.  Branches whose
    forward mass q(x_t | x_0 = b) is zero are dropped and the remaining
    weights renormalized, which preserves the kernels' absorbing structure
    (e.g. bit-zero keeps a present bit present in reverse).
    """
    _check_t(sched, t, lo=1)
    p_hat = np.asarray(p_hat, dtype=np.float64)
    xt = np.asarray(xt, dtype=np.float64)
    num1, den1 = _posterior_pieces(kind, sched, 1.0, xt, t)
    num0, den0 = _posterior_pieces(kind, sched, 0.0, xt, t)
    num1, den1, num0, den0 = np.broadcast_arrays(
        np.asarray(num1, dtype=np.float64), np.asarray(den1, dtype=np.float64),
        np.asarray(num0, dtype=np.float64), np.asarray(den0, dtype=np.float64))
    post1 = np.divide(num1, den1, out=np.zeros_like(num1), where=den1 > 0)
    post0 = np.divide(num0, den0, out=np.zeros_like(num0), where=den0 > 0)
    w1 = np.where(den1 > 0, p_hat, 0.0)
    w0 = np.where(den0 > 0, 1.0 - p_hat, 0.0)
    norm = w1 + w0
    if np.any(norm == 0.0):
        raise ImpossibleTransitionError(
            f"{Kernel(kind).value}: state impossible under both x0 branches at t={t}")
    return _as_prob((w1 * post1 + w0 * post0) / norm)


def sample_forward(kind: Kernel, sched: NoiseSchedule, x0: np.ndarray, t: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draw x_t ~ q(x_t | x_0) bit-wise.  t = 0 returns x0 unchanged."""
    x0 = np.asarray(x0)
    if t == 0:
        _check_t(sched, t)
        return x0.astype(np.uint8).copy()
    p = forward_prob(kind, sched, x0.astype(np.float64), t)
    return (rng.random(x0.shape) < p).astype(np.uint8)


def sample_prior(kind: Kernel, sched: NoiseSchedule, n_edges: int,
                 rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw x_T from the kernel's prior: Bern(1/2) / all ones / all zeros.

    size, when given, prepends batch dimensions (e.g. size=(B,) gives [B, n_edges]).
    """
    if n_edges < 0:
        raise ValueError("n_edges must be >= 0")
    shape = (n_edges,) if size is None else tuple(np.atleast_1d(size)) + (n_edges,)
    kind = Kernel(kind)
    if kind is Kernel.BIT_FLIP:
        return (rng.random(shape) < 0.5).astype(np.uint8)
    if kind is Kernel.BIT_ONE:
        return np.ones(shape, dtype=np.uint8)
    return np.zeros(shape, dtype=np.uint8)
