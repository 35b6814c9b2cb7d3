"""Finite weight-grid classes, greedy empirical covers and certification of
the recurrent cover inflation (block radius ``eps/T`` gives recurrent radius ``eps``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence

import numpy as np

from .networks import (
    MLPSpec,
    RecurrentConfig,
    ShapeError,
    check_noise_scale,
    check_sequences,
    draw_recurrent_noise,
    mlp_forward,
    recurrent_forward,
)
from .numerics import InvalidParameterError, RngStream, as_generator
from .tv import (
    CertificationReport,
    DistributionHandle,
    GaussianMixture,
    TOLERANCE_K,
    TVEstimate,
    _hermite_nodes,
    tv_mixture_mc,
    tv_numeric_1d,
)


class ClassSizeError(ValueError):
    """The enumerated class would exceed the configured size cap."""


# -- grid classes -----------------------------------------------------------------

@dataclass(frozen=True)
class GridClassSpec:
    """All networks of architecture ``dims`` whose weights take values on a grid.

    With ``base`` and ``free`` set, only the flat weight positions listed in
    ``free`` vary; the other weights are copied from ``base``.
    """

    dims: tuple
    weight_values: tuple
    base: Optional[MLPSpec] = None
    free: Optional[tuple] = None
    cap: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        values = tuple(sorted(set(float(v) for v in self.weight_values)))
        if not values:
            raise InvalidParameterError("weight grid is empty")
        object.__setattr__(self, "weight_values", values)
        total = sum(a * b for a, b in zip(self.dims[:-1], self.dims[1:]))
        if self.free is not None:
            free = tuple(int(i) for i in self.free)
            if len(set(free)) != len(free) or any(not 0 <= i < total for i in free):
                raise InvalidParameterError(f"free positions must be distinct indices below {total}")
            if self.base is None or self.base.dims != self.dims:
                raise ShapeError("a base network with matching dims is required with free positions")
            object.__setattr__(self, "free", free)

    @property
    def n_free(self) -> int:
        return len(self.free) if self.free is not None else sum(
            a * b for a, b in zip(self.dims[:-1], self.dims[1:]))

    @property
    def size(self) -> int:
        return len(self.weight_values) ** self.n_free


def enumerate_grid_class(spec: GridClassSpec) -> Iterator[MLPSpec]:
    """Yield every member in lexicographic order of its free weights."""
    if spec.size > spec.cap:
        raise ClassSizeError(f"class has {spec.size} members, above the cap of {spec.cap}")
    template = spec.base.flat() if spec.base is not None else np.zeros(spec.n_free)
    proto = spec.base if spec.base is not None else MLPSpec.zeros(spec.dims)
    positions = list(spec.free) if spec.free is not None else list(range(spec.n_free))
    for combo in itertools.product(spec.weight_values, repeat=spec.n_free):
        theta = template.copy()
        theta[positions] = combo
        yield proto.with_flat(theta)


# -- greedy cover ---------------------------------------------------------------------

@dataclass(frozen=True)
class CoverResult:
    center_indices: tuple
    radius: float
    metric: str
    certified: bool

    def __len__(self) -> int:
        return len(self.center_indices)


def validate_cover(dist: np.ndarray, centers: Sequence[int], epsilon: float) -> bool:
    dist = np.asarray(dist, dtype=np.float64)
    return bool(np.all(dist[:, list(centers)].min(axis=1) <= epsilon))


def empirical_cover_greedy(dist_matrix, epsilon: float, metric: str = "given") -> CoverResult:
    """Greedy set cover: repeatedly take the point covering most uncovered points.

    Ties go to the smallest index.  The resulting size upper-bounds the
    minimal ``epsilon``-cover of the finite point set.
    """
    D = np.asarray(dist_matrix, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
        raise ShapeError("distance matrix must be square and non-empty")
    if not np.allclose(D, D.T, rtol=0, atol=1e-12) or np.any(np.diag(D) != 0) or np.any(D < 0):
        raise InvalidParameterError("distance matrix must be symmetric, non-negative, zero on the diagonal")
    if epsilon < 0:
        raise InvalidParameterError("epsilon must be non-negative")
    within = D <= epsilon
    uncovered = np.ones(len(D), dtype=bool)
    centers: List[int] = []
    while uncovered.any():
        gains = (within & uncovered[None, :]).sum(axis=1)
        best = int(np.argmax(gains))
        centers.append(best)
        uncovered &= ~within[best]
    return CoverResult(tuple(centers), float(epsilon), metric, validate_cover(D, centers, epsilon))


# -- distributions of noisy blocks and recurrent outputs ---------------------------------

def block_output_mixture(spec: MLPSpec, sigma: float, x, *, n_nodes: int = 16,
                         n_draws: int = 256, rng=None) -> GaussianMixture:
    """Density of ``f(x + noise) + output noise`` as a Gaussian mixture.

    Single-layer blocks integrate the input noise with a tensor Gauss-Hermite
    rule; deeper blocks use ``n_draws`` sampled noise realizations.
    """
    x = np.asarray(x, dtype=np.float64)
    if spec.n_layers == 1:
        nodes, weights = _hermite_nodes(n_nodes, spec.n_in)
        means = mlp_forward(spec, x + sigma * nodes)
        return GaussianMixture(means, sigma, weights)
    gen = as_generator(rng)
    pts = np.broadcast_to(x, (n_draws, spec.n_in)).copy()
    for W in spec.weights:
        pts = mlp_forward(MLPSpec((W.shape[0], W.shape[1]), [W]), pts + sigma * gen.standard_normal(pts.shape))
    return GaussianMixture(pts, sigma)


def block_tv(f: MLPSpec, g: MLPSpec, sigma: float, probes, N: int, stream: RngStream,
             n_nodes: int = 10) -> TVEstimate:
    """Supremum over probe inputs of the TV between two smoothed noisy blocks.

    Returns the estimate at the maximizing probe.
    """
    if f == g:
        return TVEstimate(0.0, 0.0, "mixture-mc")
    best = None
    for j, x in enumerate(probes):
        h1 = DistributionHandle.from_mixture(block_output_mixture(f, sigma, x, n_nodes=n_nodes))
        h2 = DistributionHandle.from_mixture(block_output_mixture(g, sigma, x, n_nodes=n_nodes))
        est = tv_mixture_mc(h1, h2, N, stream.child(j))
        if best is None or est.value > best.value:
            best = est
    return best


def recurrent_output_tv(f: MLPSpec, g: MLPSpec, sigma: float, cfg: RecurrentConfig, U,
                        n_paths: int, replicates: int, stream: RngStream,
                        grid_n: int = 1024) -> TVEstimate:
    """TV between ``Last(f^R(U, T-1)) + noise`` and the same for ``g``.

    Each replicate draws ``n_paths`` noise paths shared by both networks and
    compares the two resulting 1-D Gaussian mixtures by quadrature; the
    spread across replicates gives the standard error.
    """
    if f == g:
        return TVEstimate(0.0, 0.0, "mixture-mc")
    U = check_sequences(U, cfg)
    vals = []
    for r in range(replicates):
        steps, _ = draw_recurrent_noise(f, sigma, cfg.T, (n_paths, 1), stream.child(r))
        a = recurrent_forward(f, U, steps)[:, 0]
        b = recurrent_forward(g, U, steps)[:, 0]
        lo = min(a.min(), b.min()) - 9 * sigma
        hi = max(a.max(), b.max()) + 9 * sigma
        vals.append(tv_numeric_1d(GaussianMixture(a[:, None], sigma).pdf,
                                  GaussianMixture(b[:, None], sigma).pdf, (lo, hi, grid_n)).value)
    vals = np.array(vals)
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("inf")
    return TVEstimate(float(vals.mean()), se, "mixture-mc")


def probe_grid(dim: int, per_axis: int = 5) -> np.ndarray:
    """Regular grid of Dirac probe inputs in ``[-1/2, 1/2]^dim``."""
    axis = np.linspace(-0.5, 0.5, per_axis)
    return np.stack([g.ravel() for g in np.meshgrid(*([axis] * dim), indexing="ij")], axis=1)


@dataclass
class CoverCertification:
    report: CertificationReport
    block: np.ndarray           # sup-over-probes block TV, members x members
    block_stderr: np.ndarray
    assignment: dict            # member index -> center index (None when uncovered)


BlockEstimator = Callable[[MLPSpec, MLPSpec, float, np.ndarray, int, RngStream], TVEstimate]


def certify_recurrent_cover(grid: GridClassSpec, cover_subset: Optional[Sequence[int]],
                            cfg: RecurrentConfig, sigma: float, probe_inputs, probe_sequences,
                            epsilon: Optional[float], estimator: Optional[BlockEstimator] = None,
                            rng: RngStream = RngStream(0), *, N: int = 4000, n_paths: int = 512,
                            replicates: int = 5, k: float = TOLERANCE_K) -> CoverCertification:
    """Check that block-level closeness ``eps/T`` yields recurrent closeness ``eps``.

    With ``epsilon`` given, every member is assigned to the nearest center of
    ``cover_subset`` whose block TV is at most ``eps/T`` (within ``k`` standard
    errors) and its recurrent-output TV must stay below ``eps``; a member with
    no such center is reported as a failing row.  With ``epsilon=None`` every
    pair is checked against its own inflation bound ``T * block TV``.
    """
    sigma = check_noise_scale(sigma)
    if sigma == 0:
        raise InvalidParameterError("cover certification needs sigma > 0 for densities to exist")
    if cfg.q > 3:
        raise InvalidParameterError("block outputs above dimension 3 are not supported")
    if cfg.T > 4:
        raise InvalidParameterError("certification is limited to T <= 4")
    members = list(enumerate_grid_class(grid))
    for f in members:
        cfg.check_spec(f)
    n = len(members)
    estimator = estimator or block_tv
    probes = np.asarray(probe_inputs, dtype=np.float64)
    seqs = check_sequences(probe_sequences, cfg)

    block = np.zeros((n, n))
    block_se = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        est = estimator(members[i], members[j], sigma, probes, N, rng.child(i * n + j))
        block[i, j] = block[j, i] = est.value
        block_se[i, j] = block_se[j, i] = est.stderr

    def rec(i, j):
        lo, hi = min(i, j), max(i, j)
        worst = TVEstimate(0.0, 0.0, "mixture-mc")
        for s, U in enumerate(seqs):
            est = recurrent_output_tv(members[lo], members[hi], sigma, cfg, U, n_paths, replicates,
                                      rng.child(n * n + (lo * n + hi) * len(seqs) + s))
            if est.value > worst.value:
                worst = est
        return worst

    report = CertificationReport("recurrent_cover", k)
    assignment = {}
    if epsilon is None:
        for i, j in itertools.combinations(range(n), 2):
            r = rec(i, j)
            report.add_values(f"member={i},center={j}", r.value, cfg.T * block[i, j],
                              r.stderr, cfg.T * block_se[i, j])
        return CoverCertification(report, block, block_se, assignment)

    centers = list(range(n)) if cover_subset is None else [int(c) for c in cover_subset]
    if any(not 0 <= c < n for c in centers):
        raise InvalidParameterError(f"cover subset indices must lie in [0, {n})")
    radius = epsilon / cfg.T
    for i in range(n):
        ok = [c for c in centers if block[i, c] <= radius + k * block_se[i, c]]
        if not ok:
            c = min(centers, key=lambda c: block[i, c])
            assignment[i] = None
            report.add_values(f"member={i},center={c},uncovered", block[i, c], radius,
                              block_se[i, c], 0.0, ok=False)
            continue
        c = min(ok, key=lambda c: (block[i, c], c))
        assignment[i] = c
        r = rec(i, c)
        report.add_values(f"member={i},center={c}", r.value, epsilon, r.stderr, 0.0)
    return CoverCertification(report, block, block_se, assignment)
