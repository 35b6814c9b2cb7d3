"""Executable certification checks and the experiments behind the CLI.

Each ``check_*`` function takes a seed stream and returns a
:class:`~noisyrnn.tv.CertificationReport`; statistical rows pass when
``lhs <= rhs + k * combined stderr``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from . import bounds as bd
from .covers import GridClassSpec, certify_recurrent_cover, empirical_cover_greedy, probe_grid
from .learning import (
    SampleSet,
    SGDParams,
    TrainingDivergedError,
    derandomized_predictions,
    empirical_ramp_risk,
    empirical_zero_one_risk,
    sgd_train,
    sign,
)
from .networks import (
    MLPSpec,
    RecurrentConfig,
    margin_rescale_factor,
    mlp_forward,
    noisy_mlp_forward,
    recurrent_forward,
    rescale_last_row,
)
from .numerics import RngStream, sigmoid_centered
from .tv import (
    TOLERANCE_K,
    AffineNoiseMap,
    CertificationReport,
    ConstantMap,
    DistributionHandle,
    GaussianMixture,
    IdentityMap,
    SigmoidLayerMap,
    TVEstimate,
    check_concat_preservation,
    check_dpi,
    check_first_last_contraction,
    concat_dirac,
    coupling_disagreement,
    estimate_tv,
    tv_gaussian_pair,
    tv_maximal_coupling,
    tv_mixture_mc,
    tv_numeric_1d,
)


def run_parallel(jobs: Sequence[Callable[[], object]], threads: int = 1) -> list:
    """Run independent jobs and return their results in submission order."""
    if threads <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job(), jobs))


# -- random trial material ------------------------------------------------------------

def random_mixture(gen: np.random.Generator, dim: int, max_components: int = 2) -> GaussianMixture:
    M = int(gen.integers(1, max_components + 1))
    return GaussianMixture(gen.uniform(-1.5, 1.5, (M, dim)), gen.uniform(0.25, 1.0),
                           gen.uniform(0.2, 1.0, M))


def random_handle_pair(gen: np.random.Generator, dim: int):
    a = random_mixture(gen, dim)
    if gen.uniform() < 0.25:
        # a nearby pair, where the statistical checks are tightest
        b = GaussianMixture(a.means + gen.normal(0, 0.1, a.means.shape), a.cov, a.weights)
    else:
        b = random_mixture(gen, dim)
    return DistributionHandle.from_mixture(a), DistributionHandle.from_mixture(b)


def random_map(gen: np.random.Generator, dim: int):
    kind = ("constant", "identity", "affine", "sigmoid", "project")[int(gen.integers(5))]
    if kind == "project" and dim < 2:
        kind = "affine"
    if kind == "constant":
        return ConstantMap(gen.uniform(-0.5, 0.5, int(gen.integers(1, 3))))
    if kind == "identity":
        return IdentityMap()
    if kind == "project":
        return AffineNoiseMap(np.eye(dim)[[int(gen.integers(dim))]])
    out = int(gen.integers(1, 3))
    if kind == "affine":
        return AffineNoiseMap(gen.normal(0, 1.0, (out, dim)), gen.normal(0, 0.5, out),
                              gen.uniform(0.05, 0.5))
    return SigmoidLayerMap(gen.normal(0, 1.5, (dim, out)), gen.uniform(0.1, 0.5))


# -- TV estimator checks ------------------------------------------------------------------

def check_tv_oracles(n: int, stream: RngStream, N: int = 100_000, k: float = TOLERANCE_K
                     ) -> CertificationReport:
    """Closed form vs quadrature (1e-6) and vs mixture Monte Carlo (``k`` stderr)."""
    gen = stream.generator()
    report = CertificationReport("tv_oracle", k)
    for i in range(n):
        # separations beyond ~5 sigma make the integrand lognormal-tailed and
        # its sample variance unreliable, so they are not drawn here
        sigma = gen.uniform(0.2, 2.0)
        mu1 = gen.uniform(-3, 3)
        mu2 = mu1 + sigma * gen.uniform(-5, 5)
        exact = tv_gaussian_pair(mu1, mu2, sigma)
        f = lambda x, m=mu1: np.exp(-0.5 * ((x - m) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
        g = lambda x, m=mu2: np.exp(-0.5 * ((x - m) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
        lo, hi = min(mu1, mu2) - 8.5 * sigma, max(mu1, mu2) + 8.5 * sigma
        quad = tv_numeric_1d(f, g, (lo, hi, 4096))
        report.add_values(f"{i}:quadrature", abs(quad.value - exact.value), 1e-6, ok=None)
        mc = tv_mixture_mc(DistributionHandle.gaussian([mu1], sigma),
                           DistributionHandle.gaussian([mu2], sigma), N, stream.child(i))
        report.add_values(f"{i}:mixture_mc", abs(mc.value - exact.value), 0.0, mc.stderr, 0.0)
    return report


def check_dpi_trials(n: int, stream: RngStream, N: int = 20_000, k: float = TOLERANCE_K
                     ) -> CertificationReport:
    gen = stream.generator()
    trials = []
    for _ in range(n):
        dim = int(gen.integers(1, 3))
        h1, h2 = random_handle_pair(gen, dim)
        trials.append((random_map(gen, dim), h1, h2))
    return check_dpi(trials, lambda a, b, r: estimate_tv(a, b, N, r), stream.child(0), k)


def check_first_last_trials(n: int, stream: RngStream, N: int = 20_000, k: float = TOLERANCE_K
                            ) -> CertificationReport:
    gen = stream.generator()
    pairs = []
    for i in range(n):
        if i % 4 == 3:
            # product law differing only in the last coordinate
            a = GaussianMixture([[0.3, gen.uniform(-1, 1)]], 0.5)
            b = GaussianMixture([[0.3, gen.uniform(-1, 1)]], 0.5)
            pairs.append((DistributionHandle.from_mixture(a), DistributionHandle.from_mixture(b)))
        else:
            pairs.append(random_handle_pair(gen, 2))
    return check_first_last_contraction(pairs, lambda a, b, r: estimate_tv(a, b, N, r),
                                        stream.child(0), k)


def check_concat_trials(n: int, stream: RngStream, N: int = 20_000, k: float = TOLERANCE_K
                        ) -> CertificationReport:
    """Concatenation with a shared Dirac point, checked two ways.

    Rows ``i`` use the density-based estimator on both sides; rows ``i:coupling``
    take the disagreement rate of a maximal coupling of ``x1, x2`` extended by
    the common point, an upper bound on the concatenated TV.
    """
    gen = stream.generator()
    pairs = []
    for _ in range(n):
        dim = int(gen.integers(1, 3))
        h1, h2 = random_handle_pair(gen, dim)
        pairs.append((h1, h2, gen.uniform(-0.5, 0.5, int(gen.integers(1, 3)))))
    report = check_concat_preservation(pairs, lambda a, b, r: estimate_tv(a, b, N, r),
                                       stream.child(0), k)
    for i, (h1, h2, y) in enumerate(pairs):
        rhs = estimate_tv(h1, h2, N, stream.child(1000 + i))
        lhs = tv_maximal_coupling(concat_dirac(h1, y), concat_dirac(h2, y), N, stream.child(2000 + i))
        report.add(f"{i}:coupling", lhs, rhs)
    return report


def check_coupling_bound(n: int, stream: RngStream, N: int = 20_000, k: float = TOLERANCE_K
                         ) -> CertificationReport:
    """TV never exceeds the disagreement rate of the shared-noise coupling."""
    gen = stream.generator()
    report = CertificationReport("coupling", k)
    for i in range(n):
        a = gen.uniform(0.3, 2.0)
        b = a if i % 3 == 0 else a + gen.uniform(-0.2, 0.2)
        sigma = gen.uniform(0.1, 0.9)
        xs = gen.uniform(-0.5, 0.5, 4)
        f1 = lambda x, z, w=a: sigmoid_centered(w * (x + z))
        f2 = lambda x, z, w=b: sigmoid_centered(w * (x + z))
        dis = coupling_disagreement(f1, f2, xs, N, stream.child(i),
                                    noise_sampler=lambda g_, m, s=sigma: s * g_.standard_normal(m))
        tv = max(tv_gaussian_1d(a * x, abs(a) * sigma, b * x, abs(b) * sigma).value for x in xs)
        report.add_values(i, tv, dis, 0.0, math.sqrt(max(dis * (1 - dis), 1.0 / N) / N))
    return report


def tv_gaussian_1d(m1, s1, m2, s2) -> TVEstimate:
    """Exact-quadrature TV of two 1-D Gaussians with possibly different scales."""
    if s1 == s2:
        return TVEstimate(tv_gaussian_pair([m1], [m2], s1).value, 0.0, "exact-1d")
    lo = min(m1 - 9 * s1, m2 - 9 * s2)
    hi = max(m1 + 9 * s1, m2 + 9 * s2)
    return tv_numeric_1d(GaussianMixture([[m1]], s1).pdf, GaussianMixture([[m2]], s2).pdf,
                         (lo, hi, 4096))


# -- margin rescaling and the ramp-risk transfer ---------------------------------------------

def random_recurrent_net(gen: np.random.Generator, T: int = 4, scale: float = 2.0):
    """Random block with 0 or 1 hidden layers; ``s = p + q - 1 >= q`` always holds."""
    p = int(gen.integers(1, 3))
    q = int(gen.integers(1, 4))
    hidden = [int(gen.integers(1, 4)) for _ in range(int(gen.integers(0, 2)))]
    return MLPSpec.random([p + q - 1] + hidden + [q], gen, scale), RecurrentConfig(p, q, T)


def _states(spec: MLPSpec, U) -> List[np.ndarray]:
    """Block outputs ``f^R(U, t)`` for every ``t`` (deterministic net)."""
    out, state = [], np.zeros(spec.n_out - 1)
    for t in range(U.shape[1]):
        y = mlp_forward(spec, np.concatenate([state, U[:, t]]))
        out.append(y)
        state = y[:-1]
    return out


def check_margin_rescaling(n_nets: int, stream: RngStream, n_inputs: int = 100, T: int = 4
                           ) -> CertificationReport:
    """State coordinates are bit-identical and output signs unchanged after rescaling."""
    gen = stream.generator()
    report = CertificationReport("margin_rescaling", 0.0)
    for i in range(n_nets):
        spec, cfg = random_recurrent_net(gen, T)
        c = float(np.exp(gen.uniform(-3, 3)))
        other = rescale_last_row(spec, c)
        bad_state = bad_sign = 0
        for _ in range(n_inputs):
            U = gen.uniform(-0.5, 0.5, (cfg.p, T))
            for a, b in zip(_states(spec, U), _states(other, U)):
                bad_state += int(not np.array_equal(a[:-1], b[:-1]))
                bad_sign += int(sign(a[-1]) != sign(b[-1]))
        report.add_values(f"{i}:c={c:.4g}", bad_state + bad_sign, 0.0, ok=bad_state + bad_sign == 0)
    return report


def choose_margin_level(outputs, eta: float, levels=None) -> float:
    """Largest ``z`` on a grid in ``(0, 1/2)`` with ``P(|output| < z) < eta``."""
    levels = np.linspace(0.5, 0.0, 501)[1:-1] if levels is None else levels
    a = np.abs(np.asarray(outputs))
    for z in levels:
        if np.mean(a < z) < eta:
            return float(z)
    return float(levels[-1])


def check_ramp_transfer(n: int, stream: RngStream, m: int = 2000, eta: float = 0.1,
                        gamma: float = 0.1, slack: float = 0.02) -> CertificationReport:
    """Ramp risk of the rescaled net is at most 0-1 risk of the original plus ``eta_hat``.

    ``z`` is chosen on an independent probe sample; ``eta_hat`` is the
    small-margin mass ``P(|output| < z)`` on the evaluation sample.
    """
    gen = stream.generator()
    report = CertificationReport("ramp_transfer", 0.0)
    for i in range(n):
        spec, cfg = random_recurrent_net(gen, T=int(gen.integers(1, 5)), scale=3.0)
        teacher = MLPSpec.random(spec.dims, gen, 3.0)
        probe = gen.uniform(-0.5, 0.5, (m, cfg.p, cfg.T))
        z = choose_margin_level(recurrent_forward(spec, probe), eta)
        scaled = rescale_last_row(spec, margin_rescale_factor(z, gamma))
        U = gen.uniform(-0.5, 0.5, (m, cfg.p, cfg.T))
        y = sign(recurrent_forward(teacher, U))
        flip = gen.uniform(size=m) < 0.1
        y = np.where(flip, -y, y)
        S = SampleSet(U, y)
        f = recurrent_forward(spec, U)
        eta_hat = float(np.mean(np.abs(f) < z))
        lhs = empirical_ramp_risk(recurrent_forward(scaled, U), S, gamma)
        rhs = empirical_zero_one_risk(f, S) + eta_hat
        report.add_values(f"{i}:z={z:.3f}", lhs, rhs + slack, ok=lhs <= rhs + slack)
    return report


# -- derandomization and composition covers ------------------------------------------------------

def check_derandomized_radius(n_pairs: int, stream: RngStream, K: int = 100_000, m: int = 5,
                              k: float = 5.0, B: float = 0.5) -> CertificationReport:
    """l2-extended distance of Monte Carlo means vs ``2 B eps sqrt(q)``.

    Pairs are single-layer noisy nets ``R^d -> R`` (``q = 1``).  Their output
    laws are images of 1-D Gaussians under the same bijection, so the TV is
    computed exactly; ``eps`` is its maximum over the ``m`` inputs.  The
    combined stderr is ``sqrt(mean_i(se1_i^2 + se2_i^2))``, which bounds the
    noise of the l2-extended distance.
    """
    gen = stream.generator()
    report = CertificationReport("derandomized_radius", k)
    for i in range(n_pairs):
        d = int(gen.integers(1, 4))
        sigma = gen.uniform(0.1, 0.9)
        W = gen.uniform(-2, 2, (d, 1))
        V = W + gen.uniform(0.02, 0.5) * gen.normal(size=(d, 1))
        f, g = MLPSpec((d, 1), [W]), MLPSpec((d, 1), [V])
        xs = gen.uniform(-0.5, 0.5, (m, d))
        eps = max(tv_gaussian_1d((x @ W).item(), sigma * float(np.linalg.norm(W)),
                                 (x @ V).item(), sigma * float(np.linalg.norm(V))).value for x in xs)
        sub = stream.child(i).generator()
        diffs, var = [], []
        for x in xs:
            a = noisy_mlp_forward(f, sigma, np.broadcast_to(x, (K, d)), sub)[:, 0]
            b = noisy_mlp_forward(g, sigma, np.broadcast_to(x, (K, d)), sub)[:, 0]
            diffs.append(a.mean() - b.mean())
            var.append(a.var(ddof=1) / K + b.var(ddof=1) / K)
        dist = float(np.sqrt(np.mean(np.square(diffs))))
        report.add_values(i, dist, bd.ell2_cover_radius_from_tv(B, 1, eps),
                          float(np.sqrt(np.mean(var))), 0.0)
    return report


def _unit_tv(a: float, b: float, sigma: float, x: float) -> float:
    # x -> phi(a (x + n)) is a bijective image of N(a x, a^2 sigma^2)
    return tv_gaussian_1d(a * x, abs(a) * sigma, b * x, abs(b) * sigma).value


def _composite_tv(a1, b1, a2, b2, sigma, x, nodes=40) -> float:
    # h o f with h = phi(b (. + n2)), f = phi(a (x + n1)); law of b (f + n2) as a mixture over n1
    z, w = np.polynomial.hermite.hermgauss(nodes)
    w = w / math.sqrt(math.pi)
    inner1 = sigmoid_centered(a1 * (x + sigma * math.sqrt(2) * z))
    inner2 = sigmoid_centered(a2 * (x + sigma * math.sqrt(2) * z))
    m1 = GaussianMixture((b1 * inner1)[:, None], abs(b1) * sigma, w)
    m2 = GaussianMixture((b2 * inner2)[:, None], abs(b2) * sigma, w)
    lo = min(m1.means.min(), m2.means.min()) - 9 * max(abs(b1), abs(b2)) * sigma
    hi = max(m1.means.max(), m2.means.max()) + 9 * max(abs(b1), abs(b2)) * sigma
    return tv_numeric_1d(m1.pdf, m2.pdf, (lo, hi, 2048)).value


def check_composition_cover(stream: RngStream, values=(0.5, 1.0, 1.5, 2.0, 2.5), sigma: float = 0.4,
                            eps1: float = 0.2, eps2: float = 0.2, n_probes: int = 9
                            ) -> CertificationReport:
    """Covers of two single-unit noisy classes compose with added radii and multiplied sizes.

    Both classes are ``{x -> phi(a (x + noise)) : a in values}``.  Greedy covers
    are built from sup-over-probe TV matrices; every composite ``h o f`` must
    lie within ``eps1 + eps2`` of its composed center on the probe inputs.
    """
    probes = np.linspace(-0.5, 0.5, n_probes)
    vals = list(values)
    D = np.array([[max(_unit_tv(a, b, sigma, x) for x in probes) for b in vals] for a in vals])
    D = np.maximum(D, D.T)
    np.fill_diagonal(D, 0.0)
    c1 = empirical_cover_greedy(D, eps1, "tv_inf")
    c2 = empirical_cover_greedy(D, eps2, "tv_inf")
    report = CertificationReport("composition", 0.0)
    near = lambda i, cover: min(cover.center_indices, key=lambda c: (D[i, c], c))
    for i, a in enumerate(vals):
        for j, b in enumerate(vals):
            ca, cb = vals[near(i, c1)], vals[near(j, c2)]
            dist = max(_composite_tv(a, b, ca, cb, sigma, x) for x in probes)
            report.add_values(f"f={a},h={b}->({ca},{cb})", dist, eps1 + eps2)
    report.add_values("log_size", math.log(len(c1)) + math.log(len(c2)),
                      bd.composition_cover_bound(math.log(len(c1)), math.log(len(c2))).log_cover)
    return report


# -- recurrent cover certification ------------------------------------------------------------

@dataclass(frozen=True)
class CoverSetup:
    base_weights: tuple = (0.9, 0.6, -0.7, 0.0)
    free: tuple = (3,)
    values: tuple = (-1.0, 0.0, 1.0)
    p: int = 1
    q: int = 2
    T: int = 3
    sigma: float = 0.5
    probes_per_axis: int = 3
    n_sequences: int = 6
    N: int = 4000
    n_paths: int = 512
    replicates: int = 5


def run_cover_certification(setup: CoverSetup, epsilon, cover_subset, stream: RngStream,
                            k: float = TOLERANCE_K):
    cfg = RecurrentConfig(setup.p, setup.q, setup.T)
    base = MLPSpec((cfg.s, cfg.q), [np.asarray(setup.base_weights, float).reshape(cfg.s, cfg.q)])
    grid = GridClassSpec(base.dims, setup.values, base=base, free=setup.free)
    gen = stream.child(0).generator()
    corners = np.stack([np.full((cfg.p, cfg.T), 0.5), np.full((cfg.p, cfg.T), -0.5)])
    seqs = np.concatenate([gen.uniform(-0.5, 0.5, (max(setup.n_sequences - 2, 0), cfg.p, cfg.T)), corners])
    return certify_recurrent_cover(grid, cover_subset, cfg, setup.sigma,
                                   probe_grid(cfg.s, setup.probes_per_axis), seqs, epsilon,
                                   rng=stream.child(1), N=setup.N, n_paths=setup.n_paths,
                                   replicates=setup.replicates, k=k)


# -- bound table --------------------------------------------------------------------------

BOUND_COLUMNS = ("T", "w", "sigma", "epsilon", "delta", "upper_m", "lower_m", "log_cover")


def bound_rows(w_list, T_list, sigma_list, epsilon, delta, gamma=0.1, C=1.0, threads=1) -> list:
    points = sorted({(int(T), int(w), float(s)) for T in T_list for w in w_list for s in sigma_list})

    def row(T, w, s):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", bd.RangeWarning)
            lower = bd.sample_complexity_lower(w, T, epsilon, delta, C)
        return (T, w, s, epsilon, delta, bd.sample_complexity_upper(w, T, s, epsilon, delta, gamma),
                lower, bd.upper_bound_cover_log(w, T, s, epsilon, gamma))

    return run_parallel([lambda pt=pt: row(*pt) for pt in points], threads)


# -- generalization-gap experiment -----------------------------------------------------------

GAP_COLUMNS = ("T", "sigma", "m", "train_risk", "test_risk", "gap", "seed")


@dataclass(frozen=True)
class GapSetup:
    p: int = 1
    q: int = 2
    hidden: tuple = ()
    m: int = 64
    m_test: int = 2000
    gamma: float = 0.1
    eta: float = 0.1
    label_noise: float = 0.05
    label_mode: str = "teacher"     # or "constant"
    teacher_scale: float = 3.0
    lr: float = 0.5
    epochs: int = 100
    K_noise: int = 8
    K_eval: int = 64


def synthetic_task(setup: GapSetup, T: int, n: int, gen: np.random.Generator, teacher: MLPSpec):
    cfg = RecurrentConfig(setup.p, setup.q, T)
    U = gen.uniform(-0.5, 0.5, (n, cfg.p, T))
    if setup.label_mode == "constant":
        return SampleSet(U, np.ones(n))
    y = sign(recurrent_forward(teacher, U))
    flip = gen.uniform(size=n) < setup.label_noise
    return SampleSet(U, np.where(flip, -y, y))


def make_teacher(setup: GapSetup, T: int, gen: np.random.Generator) -> MLPSpec:
    """Random recurrent net rescaled so most outputs clear the margin ``gamma``."""
    cfg = RecurrentConfig(setup.p, setup.q, T)
    raw = MLPSpec.random((cfg.s,) + tuple(setup.hidden) + (cfg.q,), gen, setup.teacher_scale)
    probe = gen.uniform(-0.5, 0.5, (2000, cfg.p, T))
    z = choose_margin_level(recurrent_forward(raw, probe), setup.eta)
    return rescale_last_row(raw, margin_rescale_factor(z, min(2 * setup.gamma, 0.45)))


def gap_point(setup: GapSetup, T: int, sigma: float, task_stream: RngStream, seed: int) -> tuple:
    """Train on one synthetic task and report ramp risks; ``seed`` drives training noise.

    The task (teacher, train and test samples) depends on ``task_stream`` only,
    so noisy and deterministic students at the same horizon see the same data.
    """
    gen = task_stream.generator()
    teacher = make_teacher(setup, T, gen)
    train = synthetic_task(setup, T, setup.m, gen, teacher)
    test = synthetic_task(setup, T, setup.m_test, gen, teacher)
    cfg = RecurrentConfig(setup.p, setup.q, T)
    init = MLPSpec.random(teacher.dims, gen, 0.5)
    try:
        spec = sgd_train(init, sigma, cfg, train, setup.gamma,
                         SGDParams(setup.lr, setup.epochs, setup.K_noise, seed))
    except TrainingDivergedError:
        return (T, sigma, setup.m, float("nan"), float("nan"), float("nan"), seed)
    eval_stream = RngStream(seed, 1)
    risks = []
    for j, S in enumerate((train, test)):
        pred, _ = derandomized_predictions(spec, sigma, cfg, S.U, setup.K_eval, eval_stream.child(j))
        risks.append(empirical_ramp_risk(pred, S, setup.gamma))
    return (T, sigma, setup.m, risks[0], risks[1], risks[1] - risks[0], seed)


def gap_rows(setup: GapSetup, T_list, sigmas, master_seed: int, threads: int = 1) -> list:
    """One row per ``(T, sigma)``, sorted; the seed column is the per-point training seed."""
    points = sorted({(int(T), float(s)) for T in T_list for s in sigmas})
    root = RngStream(master_seed)
    jobs = [lambda T=T, s=s, i=i: gap_point(setup, T, s, root.child(T), master_seed * 1_000_003 + i)
            for i, (T, s) in enumerate(points)]
    return run_parallel(jobs, threads)


# -- the certification battery -----------------------------------------------------------------

SUITE_COLUMNS = ("check",) + CertificationReport.COLUMNS


@dataclass(frozen=True)
class SuiteSetup:
    k: float = TOLERANCE_K
    n_oracle: int = 40
    n_dpi: int = 60
    n_first_last: int = 30
    n_concat: int = 30
    n_coupling: int = 20
    n_rescale: int = 20
    n_transfer: int = 10
    n_derandomized: int = 20
    N: int = 20_000
    K: int = 100_000
    cover: CoverSetup = CoverSetup()
    cover_epsilon: float = 0.6


def suite_reports(setup: SuiteSetup, master_seed: int, threads: int = 1) -> List[CertificationReport]:
    root = RngStream(master_seed)
    k = setup.k
    jobs = [
        lambda: check_tv_oracles(setup.n_oracle, root.child(1), setup.N, k),
        lambda: check_dpi_trials(setup.n_dpi, root.child(2), setup.N, k),
        lambda: check_first_last_trials(setup.n_first_last, root.child(3), setup.N, k),
        lambda: check_concat_trials(setup.n_concat, root.child(4), setup.N, k),
        lambda: check_coupling_bound(setup.n_coupling, root.child(5), setup.N, k),
        lambda: check_margin_rescaling(setup.n_rescale, root.child(6)),
        lambda: check_ramp_transfer(setup.n_transfer, root.child(7)),
        lambda: check_derandomized_radius(setup.n_derandomized, root.child(8), setup.K,
                                                  k=5.0 * k / TOLERANCE_K),
        lambda: check_composition_cover(root.child(9)),
        lambda: _cover_report(setup, root.child(10), k),
    ]
    return run_parallel(jobs, threads)


def _cover_report(setup: SuiteSetup, stream: RngStream, k: float) -> CertificationReport:
    rep = run_cover_certification(setup.cover, setup.cover_epsilon, [1], stream, k).report
    pairs = run_cover_certification(setup.cover, None, None, stream, k).report
    rep.rows.extend((f"pair:{r[0]}",) + tuple(r[1:]) for r in pairs.rows)
    return rep


def suite_table(reports: Sequence[CertificationReport]) -> list:
    return [(rep.name,) + tuple(row) for rep in reports for row in rep.rows]
