"""Total-variation distance: exact, closed-form and Monte Carlo estimators,
extended metrics, and executable checks of the TV contraction inequalities.

Distributions are represented by :class:`DistributionHandle`.  Handles that
carry a :class:`GaussianMixture` have a tractable density; a handle may also
carry a Dirac part (``atom``), appended after its continuous coordinates.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .numerics import RngLike, as_generator, sigmoid_centered

TOLERANCE_K = 3.0
METHODS = ("exact-1d", "gaussian-pair", "mixture-mc", "coupling-lower")


class CoverageError(ValueError):
    """The quadrature grid misses more probability mass than allowed."""


class CapabilityError(TypeError):
    """The estimator needs a density the handle does not provide."""


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class TVEstimate:
    value: float
    stderr: float
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")
        if not -TOLERANCE_K * self.stderr - 1e-12 <= self.value <= 1 + TOLERANCE_K * self.stderr + 1e-12:
            raise ValueError(f"raw TV estimate {self.value} outside [0, 1] beyond its error")


# -- Gaussian mixtures ----------------------------------------------------------

class GaussianMixture:
    """Finite mixture ``sum_j w_j N(means_j, cov)`` with one shared covariance.

    ``cov`` may be a scalar standard deviation (isotropic) or a full matrix.
    """

    def __init__(self, means, scale, weights=None):
        means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        M, d = means.shape
        scale = np.asarray(scale, dtype=np.float64)
        if scale.ndim == 0:
            if not scale > 0:
                raise ValueError("mixture scale must be positive")
            cov = float(scale) ** 2 * np.eye(d)
        else:
            cov = scale.reshape(d, d)
        if weights is None:
            weights = np.full(M, 1.0 / M)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (M,) or np.any(weights < 0):
            raise ValueError("mixture weights must be non-negative, one per component")
        self.means = means
        self.cov = cov
        self.weights = weights / weights.sum()
        self.chol = np.linalg.cholesky(cov)
        self._log_w = np.log(np.where(self.weights > 0, self.weights, 1e-300))
        self._whiten = np.linalg.inv(self.chol)
        self._white_means = means @ self._whiten.T
        self._log_norm = -0.5 * d * math.log(2 * math.pi) - np.log(np.diag(self.chol)).sum()

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def logpdf(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None] if self.dim == 1 else y[None, :]
        z = y @ self._whiten.T
        out = np.empty(len(z))
        block = max(1, 4_000_000 // (len(self.means) * self.dim))
        for lo in range(0, len(z), block):
            diff = z[lo:lo + block, None, :] - self._white_means[None, :, :]
            maha = np.einsum("nmd,nmd->nm", diff, diff)
            out[lo:lo + block] = special.logsumexp(self._log_w - 0.5 * maha, axis=1)
        return out + self._log_norm

    def pdf(self, y) -> np.ndarray:
        return np.exp(self.logpdf(y))

    def sample(self, rng: RngLike, n: int) -> np.ndarray:
        gen = as_generator(rng)
        idx = gen.choice(len(self.weights), size=n, p=self.weights)
        return self.means[idx] + gen.standard_normal((n, self.dim)) @ self.chol.T

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def marginal(self, coords: Sequence[int]) -> "GaussianMixture":
        coords = list(coords)
        return GaussianMixture(self.means[:, coords], self.cov[np.ix_(coords, coords)], self.weights)


# -- handles ------------------------------------------------------------------------

@dataclass(frozen=True)
class DistributionHandle:
    """Sampler plus optional density for a random vector.

    ``dim`` counts continuous coordinates only; ``atom`` holds the Dirac
    coordinates appended after them (empty for purely continuous handles).
    """

    dim: int
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    logpdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    mixture: Optional[GaussianMixture] = None
    atom: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def total_dim(self) -> int:
        return self.dim + len(self.atom)

    def density(self, y) -> np.ndarray:
        if self.logpdf is None:
            raise CapabilityError("handle has no density")
        return np.exp(self.logpdf(y))

    def sample(self, rng: RngLike, n: int) -> np.ndarray:
        gen = as_generator(rng)
        cont = self.sampler(gen, n) if self.dim else np.zeros((n, 0))
        return np.hstack([cont, np.broadcast_to(self.atom, (n, len(self.atom)))])

    @classmethod
    def from_mixture(cls, gm: GaussianMixture, atom=()) -> "DistributionHandle":
        return cls(gm.dim, gm.sample, gm.logpdf, gm, np.asarray(atom, dtype=np.float64))

    @classmethod
    def gaussian(cls, mu, scale) -> "DistributionHandle":
        return cls.from_mixture(GaussianMixture(np.atleast_1d(mu)[None, :], scale))

    @classmethod
    def dirac(cls, point) -> "DistributionHandle":
        return cls(0, lambda gen, n: np.zeros((n, 0)), None, None,
                   np.atleast_1d(np.asarray(point, dtype=np.float64)))


def first(h: DistributionHandle) -> DistributionHandle:
    """Law of all but the last coordinate."""
    return _project(h, list(range(h.total_dim - 1)))


def last(h: DistributionHandle) -> DistributionHandle:
    """Law of the last coordinate."""
    return _project(h, [h.total_dim - 1])


def _project(h: DistributionHandle, coords: List[int]) -> DistributionHandle:
    if h.total_dim < 2:
        raise UnsupportedDimensionError("First/Last need dimension at least 2")
    cont = [c for c in coords if c < h.dim]
    atom = h.atom[[c - h.dim for c in coords if c >= h.dim]]
    if not cont:
        return DistributionHandle.dirac(atom)
    if h.mixture is None:
        raise CapabilityError("projection of a non-mixture handle is not supported")
    return DistributionHandle.from_mixture(h.mixture.marginal(cont), atom)


def concat_dirac(h: DistributionHandle, y) -> DistributionHandle:
    """Law of ``[x; y]`` for ``x ~ h`` and a fixed point ``y``."""
    return DistributionHandle(h.dim, h.sampler, h.logpdf, h.mixture,
                              np.concatenate([h.atom, np.atleast_1d(np.asarray(y, float))]))


# -- estimators ----------------------------------------------------------------------

def _simpson_abs(fn, a: float, b: float, n: int) -> Tuple[float, float]:
    n = max(8, n + (n % 2))
    xs = np.linspace(a, b, n + 1)
    vals = np.abs(fn(xs))
    fine = integrate.simpson(vals, x=xs)
    coarse = integrate.simpson(vals[::2], x=xs[::2])
    return float(fine), abs(fine - coarse) / 15.0


def tv_numeric_1d(dens1: Callable, dens2: Callable, grid=(-10.0, 10.0, 4096)) -> TVEstimate:
    """``1/2 * integral |f - g|`` by composite Simpson on ``grid = (lo, hi, n)``.

    The grid is split at every sign change of ``f - g`` (located by Brent's
    method) so the integrand is smooth on each piece.  The reported stderr is
    the Richardson estimate of the quadrature error.
    """
    lo, hi, n = float(grid[0]), float(grid[1]), int(grid[2])
    f = lambda x: np.asarray(dens1(np.asarray(x)), dtype=np.float64).reshape(np.shape(x))
    g = lambda x: np.asarray(dens2(np.asarray(x)), dtype=np.float64).reshape(np.shape(x))
    diff = lambda x: f(x) - g(x)

    xs = np.linspace(lo, hi, n + 1)
    for name, dens in (("first", f), ("second", g)):
        mass = integrate.simpson(dens(xs), x=xs)
        if mass < 1 - 1e-6:
            raise CoverageError(f"grid [{lo}, {hi}] covers only {mass:.8f} of the {name} density")

    d = diff(xs)
    cuts = [lo]
    for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]:
        cuts.append(optimize.brentq(lambda x: float(diff(np.array([x]))[0]), xs[i], xs[i + 1],
                                    xtol=1e-14, rtol=1e-14))
    cuts.append(hi)
    total, err = 0.0, 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        val, e = _simpson_abs(diff, a, b, int(math.ceil(n * (b - a) / (hi - lo))))
        total += val
        err += e
    return TVEstimate(0.5 * total, 0.5 * err, "exact-1d")


def tv_gaussian_pair(mu1, mu2, sigma: float) -> TVEstimate:
    """Exact TV between ``N(mu1, sigma^2 I)`` and ``N(mu2, sigma^2 I)``."""
    delta = float(np.linalg.norm(np.atleast_1d(np.asarray(mu1, float) - np.asarray(mu2, float))))
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return TVEstimate(0.0 if delta == 0 else 1.0, 0.0, "gaussian-pair")
    return TVEstimate(float(special.erf(delta / (2.0 * math.sqrt(2.0) * sigma))), 0.0, "gaussian-pair")


def tv_mixture_mc(h1: DistributionHandle, h2: DistributionHandle, N: int = 100_000,
                  rng: RngLike = None) -> TVEstimate:
    """Importance-sampling estimate of TV for handles with densities.

    Uses ``TV = 1/2 E_r |p - q| / r`` with ``r = (p + q)/2``, sampling ``N/2``
    points from each of ``p`` and ``q`` (stratified).  The integrand equals
    ``|tanh((log p - log q)/2)|`` and is evaluated in log space.
    """
    for h in (h1, h2):
        if h.logpdf is None:
            raise CapabilityError("tv_mixture_mc needs densities on both handles")
    if h1.dim != h2.dim:
        raise ValueError("handles have different dimensions")
    if h1.dim > 3:
        raise UnsupportedDimensionError("TV estimation is supported up to dimension 3")
    gen = as_generator(rng)
    half = max(2, N // 2)
    vals = []
    for h in (h1, h2):
        y = h.sampler(gen, half)
        vals.append(np.abs(np.tanh(0.5 * (h1.logpdf(y) - h2.logpdf(y)))))
    a, b = vals
    value = 0.5 * (a.mean() + b.mean())
    stderr = 0.5 * math.sqrt(a.var(ddof=1) / half + b.var(ddof=1) / half)
    return TVEstimate(float(value), float(stderr), "mixture-mc")


def maximal_coupling(h1: DistributionHandle, h2: DistributionHandle, N: int,
                     rng: RngLike = None) -> Tuple[np.ndarray, np.ndarray]:
    """``N`` draws from a maximal coupling of two continuous handles.

    Standard two-stage rejection construction: ``x ~ p`` is kept for both
    coordinates when ``U p(x) <= q(x)``; otherwise ``y`` is drawn from the
    residual of ``q``.  The disagreement probability equals the TV distance.
    """
    gen = as_generator(rng)
    x = h1.sample(gen, N)
    y = x.copy()
    lp, lq = h1.logpdf(x[:, :h1.dim]), h2.logpdf(x[:, :h1.dim])
    reject = np.log(gen.uniform(size=N)) + lp > lq
    todo = np.nonzero(reject)[0]
    while len(todo):
        cand = h2.sample(gen, len(todo))
        c = cand[:, :h2.dim]
        keep = np.log(gen.uniform(size=len(todo))) + h2.logpdf(c) > h1.logpdf(c)
        y[todo[keep]] = cand[keep]
        todo = todo[~keep]
    return x, y


def tv_maximal_coupling(h1: DistributionHandle, h2: DistributionHandle, N: int = 100_000,
                        rng: RngLike = None) -> TVEstimate:
    """TV as the disagreement rate of a sampled maximal coupling (binomial stderr)."""
    x, y = maximal_coupling(h1, h2, N, rng)
    p = float(np.mean(np.any(x != y, axis=1)))
    return TVEstimate(p, math.sqrt(max(p * (1 - p), 1.0 / N) / N), "coupling-lower")


def coupling_disagreement(f1: Callable, f2: Callable, inputs: Sequence, N: int,
                          rng: RngLike = None,
                          noise_sampler: Optional[Callable[[np.random.Generator, int], object]] = None
                          ) -> float:
    """Empirical ``P[f1 != f2]`` when both maps receive the same noise.

    ``f1(x, noise)`` and ``f2(x, noise)`` evaluate a batch of ``N`` draws at
    input ``x``.  Any coupling's disagreement rate upper-bounds the TV distance
    of the two output laws; the supremum over ``inputs`` is returned.
    """
    gen = as_generator(rng)
    worst = 0.0
    for x in inputs:
        noise = noise_sampler(gen, N) if noise_sampler is not None else None
        a = np.asarray(f1(x, noise)).reshape(N, -1)
        b = np.asarray(f2(x, noise)).reshape(N, -1)
        worst = max(worst, float(np.mean(np.any(a != b, axis=1))))
    return worst


def default_grid(gm1: GaussianMixture, gm2: GaussianMixture, n: int = 4096, width: float = 8.0):
    """Grid spanning ``width`` standard deviations beyond every 1-D component."""
    sd = math.sqrt(max(gm1.cov[0, 0], gm2.cov[0, 0]))
    ms = np.concatenate([gm1.means[:, 0], gm2.means[:, 0]])
    return (float(ms.min() - width * sd), float(ms.max() + width * sd), n)


def estimate_tv(h1: DistributionHandle, h2: DistributionHandle, N: int = 100_000,
                rng: RngLike = None) -> TVEstimate:
    """Default estimator: exact for Dirac parts and 1-D mixtures, Monte Carlo otherwise.

    Dirac parts at different points are mutually singular, giving TV 1; equal
    Dirac parts drop out (the product with a common point mass leaves TV
    unchanged).
    """
    if len(h1.atom) != len(h2.atom) or h1.dim != h2.dim:
        raise ValueError("handles have incompatible dimensions")
    if not np.array_equal(h1.atom, h2.atom):
        return TVEstimate(1.0, 0.0, "exact-1d")
    if h1.dim == 0:
        return TVEstimate(0.0, 0.0, "exact-1d")
    if h1.dim == 1 and h1.mixture is not None and h2.mixture is not None:
        return tv_numeric_1d(h1.mixture.pdf, h2.mixture.pdf, default_grid(h1.mixture, h2.mixture))
    return tv_mixture_mc(h1, h2, N, rng)


# -- extended metrics -------------------------------------------------------------------

def extended_metric(vals1: Sequence, vals2: Sequence, base: Callable = None, mode: str = "inf") -> float:
    """``max_i rho(a_i, b_i)`` (``mode='inf'``) or ``sqrt(mean rho^2)`` (``'l2'``)."""
    if len(vals1) != len(vals2) or len(vals1) == 0:
        raise ValueError("extended metric needs two non-empty tuples of equal length")
    if base is None:
        base = lambda a, b: float(np.linalg.norm(np.atleast_1d(np.subtract(a, b))))
    rho = np.array([base(a, b) for a, b in zip(vals1, vals2)], dtype=np.float64)
    if mode == "inf":
        return float(rho.max())
    if mode == "l2":
        return float(math.sqrt(np.mean(rho ** 2)))
    raise ValueError(f"unknown mode {mode!r}")


# -- maps and their pushforwards ----------------------------------------------------------

def _hermite_nodes(n: int, d: int):
    x, w = np.polynomial.hermite.hermgauss(n)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1) * math.sqrt(2.0)
    weights = np.prod(np.meshgrid(*([w] * d), indexing="ij"), axis=0).ravel() / math.pi ** (d / 2)
    return nodes, weights


class RandomMap:
    """A (possibly random) map whose pushforward of a mixture handle is computable."""

    name = "map"

    def pushforward(self, h: DistributionHandle) -> DistributionHandle:
        raise NotImplementedError


class ConstantMap(RandomMap):
    name = "constant"

    def __init__(self, value):
        self.value = np.atleast_1d(np.asarray(value, dtype=np.float64))

    def pushforward(self, h):
        return DistributionHandle.dirac(self.value)


class IdentityMap(RandomMap):
    name = "identity"

    def pushforward(self, h):
        return h


class AffineNoiseMap(RandomMap):
    """``x -> A x + b + N(0, tau^2 I)``; ``tau = 0`` requires an invertible ``A``."""

    name = "affine"

    def __init__(self, A, b=None, tau: float = 0.0):
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.b = np.zeros(self.A.shape[0]) if b is None else np.asarray(b, dtype=np.float64)
        self.tau = float(tau)

    def pushforward(self, h):
        gm = h.mixture
        cov = self.A @ gm.cov @ self.A.T + self.tau ** 2 * np.eye(self.A.shape[0])
        return DistributionHandle.from_mixture(
            GaussianMixture(gm.means @ self.A.T + self.b, cov, gm.weights))


class SigmoidLayerMap(RandomMap):
    """``x -> Phi(W^T x) + N(0, tau^2 I)``, pushforward via Gauss-Hermite nodes."""

    name = "sigmoid"

    def __init__(self, W, tau: float, n_nodes: int = 16):
        self.W = np.atleast_2d(np.asarray(W, dtype=np.float64))
        self.tau = float(tau)
        self.n_nodes = n_nodes

    def pushforward(self, h):
        gm = h.mixture
        nodes, w = _hermite_nodes(self.n_nodes, gm.dim)
        pts = gm.means[:, None, :] + (nodes @ gm.chol.T)[None, :, :]
        out = sigmoid_centered(pts.reshape(-1, gm.dim) @ self.W)
        weights = (gm.weights[:, None] * w[None, :]).ravel()
        return DistributionHandle.from_mixture(GaussianMixture(out, self.tau, weights))


# -- inequality checkers -----------------------------------------------------------------

@dataclass
class CertificationReport:
    """Per-trial ``lhs <= rhs + k * combined stderr`` outcomes."""

    name: str
    k: float = TOLERANCE_K
    rows: list = field(default_factory=list)

    COLUMNS = ("trial_id", "lhs", "rhs", "lhs_stderr", "rhs_stderr", "pass")

    def add(self, trial_id, lhs: TVEstimate, rhs: TVEstimate, slack: float = 0.0) -> bool:
        ok = check_le(lhs, rhs, self.k, slack)
        self.rows.append((str(trial_id), lhs.value, rhs.value, lhs.stderr, rhs.stderr, ok))
        return ok

    def add_values(self, trial_id, lhs: float, rhs: float, lhs_se: float = 0.0,
                   rhs_se: float = 0.0, ok: Optional[bool] = None) -> bool:
        if ok is None:
            ok = lhs <= rhs + self.k * math.hypot(lhs_se, rhs_se)
        self.rows.append((str(trial_id), float(lhs), float(rhs), float(lhs_se), float(rhs_se), bool(ok)))
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(r[-1] for r in self.rows)

    @property
    def n_failed(self) -> int:
        return sum(not r[-1] for r in self.rows)

    def failures(self) -> list:
        return [r[0] for r in self.rows if not r[-1]]

    def write_csv(self, path_or_file, header: Iterable[str] = ()) -> None:
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
        try:
            for line in header:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.COLUMNS)
            for r in self.rows:
                w.writerow([r[0]] + [repr(float(v)) for v in r[1:5]] + [int(r[5])])
        finally:
            if own:
                fh.close()


def check_le(lhs: TVEstimate, rhs: TVEstimate, k: float = TOLERANCE_K, slack: float = 0.0) -> bool:
    return lhs.value <= rhs.value + slack + k * math.hypot(lhs.stderr, rhs.stderr) + 1e-12


Estimator = Callable[[DistributionHandle, DistributionHandle, RngLike], TVEstimate]


def _default_estimator(N: int) -> Estimator:
    return lambda a, b, rng: estimate_tv(a, b, N, rng)


def check_dpi(trials: Iterable[Tuple[RandomMap, DistributionHandle, DistributionHandle]],
              estimator: Optional[Estimator] = None, rng: RngLike = None,
              k: float = TOLERANCE_K, name: str = "dpi") -> CertificationReport:
    """Data processing: ``TV(map(x1), map(x2)) <= TV(x1, x2)`` for every trial."""
    estimator = estimator or _default_estimator(20_000)
    gen = as_generator(rng)
    report = CertificationReport(name, k)
    for i, (fmap, h1, h2) in enumerate(trials):
        rhs = estimator(h1, h2, gen)
        lhs = estimator(fmap.pushforward(h1), fmap.pushforward(h2), gen)
        report.add(f"{i}:{fmap.name}", lhs, rhs)
    return report


def check_first_last_contraction(pairs: Iterable[Tuple[DistributionHandle, DistributionHandle]],
                                 estimator: Optional[Estimator] = None, rng: RngLike = None,
                                 k: float = TOLERANCE_K, name: str = "first_last"
                                 ) -> CertificationReport:
    """``TV(First x1, First x2)`` and ``TV(Last x1, Last x2)`` never exceed ``TV(x1, x2)``."""
    estimator = estimator or _default_estimator(20_000)
    gen = as_generator(rng)
    report = CertificationReport(name, k)
    for i, (h1, h2) in enumerate(pairs):
        if h1.total_dim < 2:
            raise UnsupportedDimensionError("First/Last need dimension at least 2")
        rhs = estimator(h1, h2, gen)
        report.add(f"{i}:first", estimator(first(h1), first(h2), gen), rhs)
        report.add(f"{i}:last", estimator(last(h1), last(h2), gen), rhs)
    return report


def check_concat_preservation(pairs: Iterable[Tuple[DistributionHandle, DistributionHandle, object]],
                              estimator: Optional[Estimator] = None, rng: RngLike = None,
                              k: float = TOLERANCE_K, name: str = "concat"
                              ) -> CertificationReport:
    """Appending a common Dirac point ``y`` does not increase the TV distance."""
    estimator = estimator or _default_estimator(20_000)
    gen = as_generator(rng)
    report = CertificationReport(name, k)
    for i, (h1, h2, y) in enumerate(pairs):
        rhs = estimator(h1, h2, gen)
        lhs = estimator(concat_dirac(h1, y), concat_dirac(h2, y), gen)
        report.add(i, lhs, rhs)
    return report
