"""Losses, derandomized prediction, empirical risk minimization and training."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .networks import (
    MLPSpec,
    RecurrentConfig,
    ShapeError,
    check_noise_scale,
    check_sequence,
    check_sequences,
    draw_recurrent_noise,
    noise_width,
    recurrent_forward,
)
from .numerics import (
    InvalidParameterError,
    RngLike,
    RngStream,
    as_generator,
    ramp,
    ramp_grad,
    sigmoid_centered_grad,
)


class TrainingDivergedError(FloatingPointError):
    """Raised when a gradient step produces non-finite values."""


@dataclass(frozen=True)
class SampleSet:
    """``m`` labelled sequences stored as ``U`` of shape ``(m, p, T)`` and ``y``."""

    U: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if U.ndim != 3 or y.shape != (U.shape[0],) or U.shape[0] < 1:
            raise ShapeError(f"inconsistent sample set: U {U.shape}, y {y.shape}")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise InvalidParameterError("labels must be -1 or +1")
        if np.any(np.abs(U) > 0.5):
            raise InvalidParameterError("sequence entries must lie in [-1/2, 1/2]")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return len(self.y)

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, idx) -> "SampleSet":
        idx = np.atleast_1d(np.arange(self.m)[idx])
        return SampleSet(self.U[idx], self.y[idx])


# -- losses -------------------------------------------------------------------

def ramp_loss(fval, y, gamma: float):
    """``r_gamma(-fval * y)``; vectorizes over matching arrays."""
    return ramp(-np.asarray(fval, dtype=np.float64) * np.asarray(y, dtype=np.float64), gamma)


def sign(x):
    """Sign with the convention ``sign(0) = +1``."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def zero_one_loss(fval, y):
    out = (sign(fval) != np.asarray(y)).astype(np.float64)
    return float(out) if out.ndim == 0 else out


# -- derandomization ------------------------------------------------------------

def derandomized_predictions(spec: MLPSpec, sigma: float, cfg: RecurrentConfig, U, K: int,
                             rng: RngLike = None, *, output_noise: bool = True):
    """Monte Carlo estimate of ``E[h(U)]`` for each sequence in a batch.

    Returns ``(mean, stderr)`` arrays of shape ``(n,)``.  With ``sigma == 0`` the
    deterministic output is returned with zero standard error.
    """
    sigma = check_noise_scale(sigma)
    if K < 1:
        raise InvalidParameterError("K must be at least 1")
    cfg.check_spec(spec)
    U = check_sequences(U, cfg)
    if sigma == 0:
        out = recurrent_forward(spec, U)
        return out, np.zeros_like(out)
    gen = as_generator(rng)
    total = np.zeros(U.shape[0])
    total_sq = np.zeros(U.shape[0])
    # Chunking keeps the (K, n, T, width) noise tensor bounded in memory.
    chunk = max(1, 2_000_000 // max(1, U.shape[0] * cfg.T * noise_width(spec)))
    done = 0
    while done < K:
        k = min(chunk, K - done)
        steps, out_noise = draw_recurrent_noise(spec, sigma, cfg.T, (k, U.shape[0]), gen)
        vals = recurrent_forward(spec, U, steps, out_noise if output_noise else None)
        total += vals.sum(axis=0)
        total_sq += (vals * vals).sum(axis=0)
        done += k
    mean = total / K
    if K == 1:
        return mean, np.full_like(mean, np.inf)
    var = np.maximum(total_sq / K - mean * mean, 0.0) * K / (K - 1)
    return mean, np.sqrt(var / K)


def derandomized_predict(spec: MLPSpec, sigma: float, cfg: RecurrentConfig, U, K: int,
                         rng: RngLike = None, *, output_noise: bool = True):
    """Single-sequence form of :func:`derandomized_predictions`: ``(mean, stderr)``."""
    U = check_sequence(U, cfg)
    mean, se = derandomized_predictions(spec, sigma, cfg, U[None], K, rng,
                                        output_noise=output_noise)
    return float(mean[0]), float(se[0])


# -- empirical risk and ERM --------------------------------------------------------

Predictor = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, Sequence[float]]


def empirical_ramp_risk(predictor: Predictor, S: SampleSet, gamma: float) -> float:
    """Mean ramp loss of ``predictor`` over ``S``.

    ``predictor`` is either a callable mapping the ``(m, p, T)`` batch to ``m``
    real outputs, or the precomputed outputs themselves.
    """
    vals = predictor(S.U) if callable(predictor) else predictor
    vals = np.asarray(vals, dtype=np.float64)
    if vals.shape != (S.m,):
        raise ShapeError(f"predictor returned shape {vals.shape}, expected ({S.m},)")
    return float(np.mean(ramp_loss(vals, S.y, gamma)))


def empirical_zero_one_risk(predictor: Predictor, S: SampleSet) -> float:
    vals = predictor(S.U) if callable(predictor) else predictor
    return float(np.mean(zero_one_loss(np.asarray(vals, dtype=np.float64), S.y)))


def erm_grid(class_list: Sequence[MLPSpec], sigma: float, cfg: RecurrentConfig, S: SampleSet,
             gamma: float, K: int = 1, rng: RngLike = None, *, output_noise: bool = True):
    """Index and empirical ramp risk of the empirical risk minimizer.

    Every candidate is evaluated with the same noise stream (common random
    numbers); ties go to the smallest index.
    """
    if len(class_list) == 0:
        raise InvalidParameterError("class list is empty")
    stream = rng if isinstance(rng, RngStream) else RngStream(
        int(as_generator(rng).integers(2**63)))
    risks = np.array([
        empirical_ramp_risk(
            derandomized_predictions(f, sigma, cfg, S.U, K, stream, output_noise=output_noise)[0],
            S, gamma)
        for f in class_list
    ])
    best = int(np.argmin(risks))
    return best, float(risks[best])


def pac_excess_risk_bound(m: int, logN: float, epsilon: float, delta: float, gamma: float) -> float:
    """Excess ramp risk of ERM: ``16 eps + 24 sqrt(logN / m) + 6 sqrt(ln(2/delta) / (2m))``.

    ``logN`` is the natural log of the l2 uniform covering number at scale
    ``gamma * epsilon``.
    """
    if m < 1:
        raise InvalidParameterError("m must be at least 1")
    if not 0 < delta < 1 or not 0 < epsilon < 1:
        raise InvalidParameterError("epsilon and delta must lie in (0, 1)")
    if logN < 0 or not gamma > 0:
        raise InvalidParameterError("logN must be non-negative and gamma positive")
    return (16.0 * epsilon + 24.0 / math.sqrt(m) * math.sqrt(logN)
            + 6.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * m)))


# -- gradient training ----------------------------------------------------------------

def ramp_objective_and_grad(spec: MLPSpec, S: SampleSet, gamma: float,
                            step_noise=None, out_noise=None):
    """Mean ramp loss of the derandomized recurrent net and its weight gradient.

    The derandomized output is the average over the leading ``K`` axis of the
    supplied noise realizations (``K = 1`` when noise is omitted).  Gradients
    are exact for the fixed realization (backpropagation through time).
    """
    U, y = S.U, S.y
    n, p, T = U.shape
    q = spec.n_out
    if step_noise is None:
        step_noise = np.zeros((1, n, T, noise_width(spec)))
    K = step_noise.shape[0]
    offsets = np.cumsum((0,) + spec.dims[:-1])

    inputs, pre = [], []   # per step, per layer
    state = np.zeros((K, n, q - 1))
    for t in range(T):
        x = np.concatenate([state, np.broadcast_to(U[:, :, t], (K, n, p))], axis=-1)
        ins, zs = [], []
        for i, W in enumerate(spec.weights):
            x = x + step_noise[..., t, offsets[i]:offsets[i + 1]]
            z = x @ W
            ins.append(x)
            zs.append(z)
            x = 0.5 * np.tanh(0.5 * z)
        inputs.append(ins)
        pre.append(zs)
        state = x[..., :-1]
    outs = x[..., -1]
    if out_noise is not None:
        outs = outs + out_noise
    h = outs.mean(axis=0)
    margin = -y * h
    loss = float(np.mean(ramp(margin, gamma)))

    dh = ramp_grad(margin, gamma) * (-y) / n
    d_out = np.zeros((K, n, q))
    d_out[..., -1] = dh / K
    grads = [np.zeros_like(W) for W in spec.weights]
    for t in range(T - 1, -1, -1):
        d = d_out
        for i in range(spec.n_layers - 1, -1, -1):
            dz = d * sigmoid_centered_grad(pre[t][i])
            grads[i] += np.einsum("knd,knp->dp", inputs[t][i], dz)
            d = dz @ spec.weights[i].T
        if t > 0:
            d_out = np.zeros((K, n, q))
            d_out[..., :-1] = d[..., :q - 1]
    return loss, np.concatenate([g.ravel() for g in grads])


@dataclass(frozen=True)
class SGDParams:
    lr: float = 0.5
    epochs: int = 200
    K_noise: int = 8
    seed: int = 0


def sgd_train(spec0: MLPSpec, sigma: float, cfg: RecurrentConfig, S: SampleSet, gamma: float,
              hyper: SGDParams = SGDParams(), *, output_noise: bool = True,
              return_history: bool = False):
    """Full-batch gradient descent on the empirical ramp risk.

    Noise enters through the reparameterization ``x + sigma * z``: every epoch
    draws ``K_noise`` fresh realizations from a stream fixed by ``hyper.seed``.
    """
    sigma = check_noise_scale(sigma)
    cfg.check_spec(spec0)
    if hyper.lr < 0 or hyper.epochs < 0 or hyper.K_noise < 1:
        raise InvalidParameterError(f"invalid training hyperparameters: {hyper}")
    theta = spec0.flat()
    history = []
    stream = RngStream(hyper.seed, 0)
    for epoch in range(hyper.epochs):
        spec = spec0.with_flat(theta)
        if sigma > 0:
            steps, out_noise = draw_recurrent_noise(
                spec, sigma, cfg.T, (hyper.K_noise, S.m), stream.child(epoch))
            if not output_noise:
                out_noise = None
        else:
            steps = out_noise = None
        loss, grad = ramp_objective_and_grad(spec, S, gamma, steps, out_noise)
        if not np.all(np.isfinite(grad)) or not math.isfinite(loss):
            raise TrainingDivergedError(
                f"non-finite gradient at epoch {epoch} (loss={loss}, |theta|={np.linalg.norm(theta)})")
        history.append(loss)
        theta = theta - hyper.lr * grad
        if not np.all(np.isfinite(theta)):
            raise TrainingDivergedError(f"weights became non-finite at epoch {epoch}")
    result = spec0.with_flat(theta) if hyper.epochs else spec0
    return (result, history) if return_history else result
