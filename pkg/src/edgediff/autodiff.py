"""Minimal reverse-mode automatic differentiation over numpy arrays.

A Tensor wraps a float64 ndarray and, when gradients are requested, records
its parents and a backward closure.  Ops broadcast like numpy; gradients of
broadcast operands are summed back to the operand's shape.  When no input
requires a gradient the graph is not recorded, so inference costs only the
forward arithmetic.
"""

from __future__ import annotations

import numpy as np


def _sum_to_shape(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the original operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, parents=(), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    # -- graph plumbing ------------------------------------------------------

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self, seed=None):
        """Backpropagate from this tensor (defaults to d(self)/d(self) = 1)."""
        topo, seen = [], set()

        def visit(t):
            if id(t) in seen or not t.requires_grad:
                return
            seen.add(id(t))
            for p in t._parents:
                visit(p)
            topo.append(t)

        visit(self)
        self.grad = np.ones_like(self.data) if seed is None else np.asarray(seed, dtype=np.float64)
        for t in reversed(topo):
            if t._backward is not None:
                t._backward(t.grad)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out_data = self.data + other.data
        if not (self.requires_grad or other.requires_grad):
            return Tensor(out_data)

        def back(g):
            if self.requires_grad:
                self._accumulate(_sum_to_shape(g, self.shape))
            if other.requires_grad:
                other._accumulate(_sum_to_shape(g, other.shape))

        return Tensor(out_data, True, (self, other), back)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        out_data = self.data * other.data
        if not (self.requires_grad or other.requires_grad):
            return Tensor(out_data)

        def back(g):
            if self.requires_grad:
                self._accumulate(_sum_to_shape(g * other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_sum_to_shape(g * self.data, other.shape))

        return Tensor(out_data, True, (self, other), back)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        out_data = self.data / other.data
        if not (self.requires_grad or other.requires_grad):
            return Tensor(out_data)

        def back(g):
            if self.requires_grad:
                self._accumulate(_sum_to_shape(g / other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_sum_to_shape(-g * out_data / other.data, other.shape))

        return Tensor(out_data, True, (self, other), back)

    def __pow__(self, exponent: float):
        out_data = self.data ** exponent
        if not self.requires_grad:
            return Tensor(out_data)

        def back(g):
            self._accumulate(g * exponent * self.data ** (exponent - 1.0))

        return Tensor(out_data, True, (self,), back)

    def __matmul__(self, other):
        other = as_tensor(other)
        out_data = self.data @ other.data
        if not (self.requires_grad or other.requires_grad):
            return Tensor(out_data)

        def back(g):
            if self.requires_grad:
                ga = g @ np.swapaxes(other.data, -1, -2)
                self._accumulate(_sum_to_shape(ga, self.shape))
            if other.requires_grad:
                gb = np.swapaxes(self.data, -1, -2) @ g
                other._accumulate(_sum_to_shape(gb, other.shape))

        return Tensor(out_data, True, (self, other), back)

    # -- shape ops -----------------------------------------------------------

    def reshape(self, *shape):
        out_data = self.data.reshape(*shape)
        if not self.requires_grad:
            return Tensor(out_data)
        orig = self.shape

        def back(g):
            self._accumulate(g.reshape(orig))

        return Tensor(out_data, True, (self,), back)

    def transpose(self, axes):
        out_data = np.transpose(self.data, axes)
        if not self.requires_grad:
            return Tensor(out_data)
        inverse = np.argsort(axes)

        def back(g):
            self._accumulate(np.transpose(g, inverse))

        return Tensor(out_data, True, (self,), back)

    def sum(self, axis=None, keepdims=False):
        out_data = self.data.sum(axis=axis, keepdims=keepdims)
        if not self.requires_grad:
            return Tensor(out_data)
        shape = self.shape

        def back(g):
            if axis is None:
                self._accumulate(np.broadcast_to(g, shape).copy())
                return
            if not keepdims:
                g = np.expand_dims(g, axis)
            self._accumulate(np.broadcast_to(g, shape).copy())

        return Tensor(out_data, True, (self,), back)

    def mean(self, axis=None, keepdims=False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def take(self, indices, axis):
        """Gather along an axis with an integer index array."""
        out_data = np.take(self.data, indices, axis=axis)
        if not self.requires_grad:
            return Tensor(out_data)
        shape = self.shape

        def back(g):
            full = np.zeros(shape)
            key = (slice(None),) * axis + (indices,)
            np.add.at(full, key, g)
            self._accumulate(full)

        return Tensor(out_data, True, (self,), back)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def concat(tensors, axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    if not any(t.requires_grad for t in tensors):
        return Tensor(out_data)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def back(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            if t.requires_grad:
                t._accumulate(piece)

    return Tensor(out_data, True, tuple(tensors), back)


def relu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out_data = np.maximum(x.data, 0.0)
    if not x.requires_grad:
        return Tensor(out_data)
    mask = x.data > 0

    def back(g):
        x._accumulate(g * mask)

    return Tensor(out_data, True, (x,), back)


def exp(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out_data = np.exp(x.data)
    if not x.requires_grad:
        return Tensor(out_data)

    def back(g):
        x._accumulate(g * out_data)

    return Tensor(out_data, True, (x,), back)


def log(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out_data = np.log(x.data)
    if not x.requires_grad:
        return Tensor(out_data)

    def back(g):
        x._accumulate(g / x.data)

    return Tensor(out_data, True, (x,), back)


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out_data = 1.0 / (1.0 + np.exp(-x.data))
    if not x.requires_grad:
        return Tensor(out_data)

    def back(g):
        x._accumulate(g * out_data * (1.0 - out_data))

    return Tensor(out_data, True, (x,), back)


def softplus(x: Tensor) -> Tensor:
    """log(1 + e^x), computed stably for large |x|."""
    x = as_tensor(x)
    out_data = np.maximum(x.data, 0.0) + np.log1p(np.exp(-np.abs(x.data)))
    if not x.requires_grad:
        return Tensor(out_data)
    sig = 1.0 / (1.0 + np.exp(-x.data))

    def back(g):
        x._accumulate(g * sig)

    return Tensor(out_data, True, (x,), back)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    # shifting by a detached max leaves both value and gradient unchanged
    shift = x - Tensor(x.data.max(axis=axis, keepdims=True))
    e = exp(shift)
    return e / e.sum(axis=axis, keepdims=True)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then affine."""
    m = x.mean(axis=-1, keepdims=True)
    centered = x - m
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered * ((var + eps) ** -0.5) * gain + bias
