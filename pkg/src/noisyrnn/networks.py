"""Sigmoid feedforward networks, their noisy versions and recurrent application.

Conventions
-----------
A layer with weight matrix ``W`` of shape ``(d, p)`` maps ``x`` in ``R^d`` to
``Phi(W.T @ x)`` in ``(-1/2, 1/2)^p``.  There are no biases.  A recurring block
maps ``R^s -> R^q`` with ``s = p + q - 1``; the first ``q - 1`` outputs are fed
back as state and the last output is the prediction.

Batched helpers accept trailing-feature arrays, i.e. ``x`` of shape
``(..., d)`` and sequences of shape ``(n, p, T)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import (
    InvalidParameterError,
    RngLike,
    as_generator,
    gaussian_sample,
    sigmoid_centered,
    sigmoid_centered_inverse,
)


class ShapeError(ValueError):
    """Raised on incompatible array dimensions."""


class DomainError(ValueError):
    """Raised when an input lies outside the domain an operation is defined on."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MLPSpec:
    """Architecture ``(p_0, ..., p_k)`` together with its ``k`` weight matrices.

    Matrix ``i`` has shape ``(p_{i-1}, p_i)``.  Instances are immutable; use
    :meth:`with_flat` or :func:`rescale_last_row` to derive new ones.
    """

    dims: tuple
    weights: tuple = field(repr=False)

    def __init__(self, dims: Sequence[int], weights: Sequence, n_weights: Optional[int] = None):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ShapeError(f"need at least two positive layer widths, got {dims}")
        weights = tuple(_frozen(W) for W in weights)
        if len(weights) != len(dims) - 1:
            raise ShapeError(f"{len(dims) - 1} weight matrices expected, got {len(weights)}")
        for i, W in enumerate(weights):
            if W.shape != (dims[i], dims[i + 1]):
                raise ShapeError(f"layer {i}: expected shape {(dims[i], dims[i + 1])}, got {W.shape}")
            if not np.all(np.isfinite(W)):
                raise InvalidParameterError(f"layer {i} contains non-finite weights")
        w = sum(dims[i] * dims[i + 1] for i in range(len(dims) - 1))
        if n_weights is not None and int(n_weights) != w:
            raise ShapeError(f"architecture {dims} has {w} weights, not {n_weights}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weights", weights)

    @property
    def n_layers(self) -> int:
        return len(self.dims) - 1

    @property
    def n_weights(self) -> int:
        return sum(W.size for W in self.weights)

    @property
    def n_in(self) -> int:
        return self.dims[0]

    @property
    def n_out(self) -> int:
        return self.dims[-1]

    def flat(self) -> np.ndarray:
        """All weights, layer by layer, each matrix in row-major order."""
        return np.concatenate([W.ravel() for W in self.weights])

    def with_flat(self, theta) -> "MLPSpec":
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n_weights,):
            raise ShapeError(f"expected {self.n_weights} weights, got shape {theta.shape}")
        out, pos = [], 0
        for W in self.weights:
            out.append(theta[pos:pos + W.size].reshape(W.shape))
            pos += W.size
        return MLPSpec(self.dims, out)

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "MLPSpec":
        return cls(dims, [np.zeros((dims[i], dims[i + 1])) for i in range(len(dims) - 1)])

    @classmethod
    def random(cls, dims: Sequence[int], rng: RngLike = None, scale: float = 1.0) -> "MLPSpec":
        """Weights drawn uniformly from ``[-scale, scale]``."""
        gen = as_generator(rng)
        return cls(dims, [gen.uniform(-scale, scale, size=(dims[i], dims[i + 1]))
                          for i in range(len(dims) - 1)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, MLPSpec):
            return NotImplemented
        return self.dims == other.dims and all(
            np.array_equal(a, b) for a, b in zip(self.weights, other.weights))

    def __hash__(self) -> int:
        return hash((self.dims, self.flat().tobytes()))


@dataclass(frozen=True)
class RecurrentConfig:
    """Input width ``p``, state/output width ``q`` and horizon ``T``."""

    p: int
    q: int
    T: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1 or self.T < 1:
            raise InvalidParameterError(f"p, q, T must be positive: {self}")

    @property
    def s(self) -> int:
        return self.p + self.q - 1

    def check_spec(self, spec: MLPSpec) -> None:
        if spec.n_in != self.s or spec.n_out != self.q:
            raise ShapeError(
                f"block must map R^{self.s} -> R^{self.q}, got {spec.n_in} -> {spec.n_out}")
        if spec.n_in < spec.n_out:
            raise ShapeError("recurrent class is not well-defined: p_0 < p_k")


def check_noise_scale(sigma: float) -> float:
    sigma = float(sigma)
    if not 0.0 <= sigma < 1.0:
        raise InvalidParameterError(f"noise scale must lie in [0, 1), got {sigma}")
    return sigma


def check_sequence(U, cfg: RecurrentConfig) -> np.ndarray:
    """Validate a single ``p x T`` input sequence with entries in ``[-1/2, 1/2]``."""
    U = np.asarray(U, dtype=np.float64)
    if U.shape != (cfg.p, cfg.T):
        raise ShapeError(f"sequence must have shape {(cfg.p, cfg.T)}, got {U.shape}")
    if np.any(np.abs(U) > 0.5):
        raise DomainError("sequence entries must lie in [-1/2, 1/2]")
    return U


def check_sequences(U, cfg: RecurrentConfig) -> np.ndarray:
    """Batched version of :func:`check_sequence` for arrays of shape ``(n, p, T)``."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim == 2:
        U = U[None]
    if U.ndim != 3 or U.shape[1:] != (cfg.p, cfg.T):
        raise ShapeError(f"sequences must have shape (n, {cfg.p}, {cfg.T}), got {U.shape}")
    if np.any(np.abs(U) > 0.5):
        raise DomainError("sequence entries must lie in [-1/2, 1/2]")
    return U


# -- feedforward -----------------------------------------------------------

def layer_forward(W, x) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if W.ndim != 2 or x.shape[-1:] != (W.shape[0],):
        raise ShapeError(f"input width {x.shape[-1:]} does not match {W.shape[0]} weight rows")
    return sigmoid_centered(x @ W)


def mlp_forward(spec: MLPSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (spec.n_in,):
        raise ShapeError(f"expected input width {spec.n_in}, got {x.shape}")
    for W in spec.weights:
        x = layer_forward(W, x)
    return x


def noisy_mlp_forward(spec: MLPSpec, sigma: float, x, rng: RngLike = None, *,
                      output_noise: bool = False, noise=None) -> np.ndarray:
    """One draw of the noisy network: Gaussian noise before every layer.

    ``noise`` may supply the realization explicitly as a list with one array per
    layer input (plus a trailing output array when ``output_noise``); this is
    how coupled evaluations share randomness.
    """
    sigma = check_noise_scale(sigma)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (spec.n_in,):
        raise ShapeError(f"expected input width {spec.n_in}, got {x.shape}")
    gen = None if noise is not None or sigma == 0 else as_generator(rng)

    def draw(i, width):
        if noise is not None:
            return np.asarray(noise[i], dtype=np.float64)
        if sigma == 0:
            return 0.0
        if x.ndim == 1:
            return gaussian_sample(gen, width, sigma)
        return sigma * gen.standard_normal(x.shape[:-1] + (width,))

    for i, W in enumerate(spec.weights):
        x = layer_forward(W, x + draw(i, W.shape[0]))
    if output_noise:
        x = x + draw(spec.n_layers, spec.n_out)
    return x


# -- recurrence -------------------------------------------------------------

def split_state(v):
    """Return ``(First(v), Last(v))``: all but the last coordinate, and the last."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim < 1 or v.shape[-1] < 2:
        raise ShapeError("split_state needs a vector of dimension at least 2")
    return v[..., :-1], v[..., -1]


def recurrent_states(block: Callable[[np.ndarray], np.ndarray], U, t: int, q: int) -> np.ndarray:
    """``f^R(U, t)`` for an arbitrary block; calls ``block`` exactly ``t + 1`` times."""
    U = np.asarray(U, dtype=np.float64)
    if not 0 <= t < U.shape[-1]:
        raise IndexError(f"time index {t} outside [0, {U.shape[-1] - 1}]")
    state = np.zeros(q - 1)
    for step in range(t + 1):
        out = block(np.concatenate([state, U[:, step]]))
        state = out[:-1]
    return out


def recurrent_apply(spec: MLPSpec, sigma: float, cfg: RecurrentConfig, U, t: int,
                    rng: RngLike = None) -> np.ndarray:
    """Recurrent application of a (noisy) block, fresh noise at every step."""
    cfg.check_spec(spec)
    U = check_sequence(U, cfg)
    gen = as_generator(rng) if sigma > 0 else None
    return recurrent_states(lambda x: noisy_mlp_forward(spec, sigma, x, gen), U, t, cfg.q)


def recurrent_hypothesis(spec: MLPSpec, sigma: float, cfg: RecurrentConfig, U,
                         rng: RngLike = None, *, output_noise: bool = False) -> float:
    """``Last(f^R(U, T-1))``, optionally followed by scalar output noise."""
    gen = as_generator(rng) if sigma > 0 else None
    out = float(recurrent_apply(spec, sigma, cfg, U, cfg.T - 1, gen)[-1])
    if output_noise and sigma > 0:
        out += float(gaussian_sample(gen, 1, sigma)[0])
    return out


def noise_width(spec: MLPSpec) -> int:
    """Number of scalar noise draws one block evaluation consumes."""
    return sum(spec.dims[:-1])


def draw_recurrent_noise(spec: MLPSpec, sigma: float, T: int, shape: tuple, rng: RngLike):
    """Noise for ``recurrent_forward``: ``(*shape, T, noise_width)`` and ``shape``."""
    gen = as_generator(rng)
    steps = sigma * gen.standard_normal(tuple(shape) + (T, noise_width(spec)))
    out = sigma * gen.standard_normal(tuple(shape))
    return steps, out


def recurrent_forward(spec: MLPSpec, U, step_noise=None, out_noise=None,
                      return_state: bool = False):
    """Vectorized recurrence over a batch of sequences with explicit noise.

    Parameters
    ----------
    U : array, shape (n, p, T)
    step_noise : array broadcastable to (..., n, T, noise_width) or None
    out_noise : array broadcastable to (..., n) or None

    Returns the final scalar output of shape ``(..., n)`` (or the full final
    block output of shape ``(..., n, q)`` with ``return_state``).
    """
    U = np.asarray(U, dtype=np.float64)
    n, p, T = U.shape
    q = spec.n_out
    if spec.n_in != p + q - 1:
        raise ShapeError(f"block input width {spec.n_in} != p + q - 1 = {p + q - 1}")
    lead = () if step_noise is None else np.shape(step_noise)[:-3]
    offsets = np.cumsum((0,) + spec.dims[:-1])
    state = np.zeros(lead + (n, q - 1))
    for t in range(T):
        x = np.concatenate([state, np.broadcast_to(U[:, :, t], lead + (n, p))], axis=-1)
        for i, W in enumerate(spec.weights):
            if step_noise is not None:
                x = x + step_noise[..., t, offsets[i]:offsets[i + 1]]
            x = sigmoid_centered(x @ W)
        state = x[..., :-1]
    if return_state:
        return x
    out = x[..., -1]
    if out_noise is not None:
        out = out + out_noise
    return out


# -- margin rescaling -------------------------------------------------------

def rescale_last_row(spec: MLPSpec, c: float) -> MLPSpec:
    """Multiply the weights feeding the final output unit by ``c > 0``.

    Only the last column of the last weight matrix changes; every other weight
    is carried over bit for bit.
    """
    c = float(c)
    if not c > 0:
        raise InvalidParameterError(f"rescaling factor must be positive, got {c}")
    last = np.array(spec.weights[-1])
    last[:, -1] = last[:, -1] * c
    return MLPSpec(spec.dims, list(spec.weights[:-1]) + [last])


def margin_rescale_factor(z: float, gamma: float) -> float:
    """``c = phi^{-1}(gamma) / phi^{-1}(z)`` so that ``phi(c * phi^{-1}(z)) = gamma``."""
    for name, v in (("z", z), ("gamma", gamma)):
        if not 0.0 < v < 0.5:
            raise DomainError(f"{name} must lie in (0, 1/2), got {v}")
    return float(sigmoid_centered_inverse(gamma) / sigmoid_centered_inverse(z))
