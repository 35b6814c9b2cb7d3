"""The twelve acceptance criteria, each reported as one PASS/FAIL line.

Every statistical check uses a stream derived from a single fixed master seed
and is evaluated at its stated tolerance; nothing is retried.
"""
import itertools
import math
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

import oracles
from acceptance_log import record
from noisyrnn import bounds as bd
from noisyrnn import experiments as ex
from noisyrnn.cli import main
from noisyrnn.learning import SampleSet, erm_grid, ramp_objective_and_grad
from noisyrnn.networks import MLPSpec, RecurrentConfig, draw_recurrent_noise
from noisyrnn.numerics import RngStream

MASTER_SEED = 20240601
ROOT = RngStream(MASTER_SEED)
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def rows_passing(report, suffix=None):
    rows = [r for r in report.rows if suffix is None or str(r[0]).endswith(suffix)]
    return sum(bool(r[-1]) for r in rows), len(rows)


def test_criterion_01_tv_oracles():
    with Timer() as t:
        rep = ex.check_tv_oracles(100, ROOT.child(1), N=100_000, k=3.0)
    quad_ok, quad_n = rows_passing(rep, ":quadrature")
    mc_ok, mc_n = rows_passing(rep, ":mixture_mc")
    ok = quad_ok == quad_n == 100 and mc_ok >= 99 and mc_n == 100 and t.seconds < 60
    assert record(1, "TV oracle agreement", ok,
                  f"quadrature {quad_ok}/{quad_n} within 1e-6, mixture MC {mc_ok}/{mc_n} within 3 se, {t.seconds:.1f}s")


def test_criterion_02_data_processing():
    with Timer() as t:
        rep = ex.check_dpi_trials(200, ROOT.child(2), k=3.0)
    n_ok, n = rows_passing(rep)
    assert record(2, "data processing inequality", n_ok == n == 200 and t.seconds < 300,
                  f"{n_ok}/{n} trials at 3 se, {t.seconds:.1f}s")


def test_criterion_03_first_last_and_concatenation():
    with Timer() as t:
        fl = ex.check_first_last_trials(100, ROOT.child(3), k=3.0)
        cc = ex.check_concat_trials(100, ROOT.child(4), k=3.0)
    fl_ok, fl_n = rows_passing(fl)
    cc_ok, cc_n = rows_passing(cc)
    ok = fl_ok == fl_n == 200 and cc_ok == cc_n == 200 and t.seconds < 300
    assert record(3, "first/last and concatenation", ok,
                  f"first/last {fl_ok}/{fl_n}, concatenation {cc_ok}/{cc_n} (density and coupling rows), "
                  f"{t.seconds:.1f}s; failing: {fl.failures() + cc.failures()}")


def test_criterion_04_margin_rescaling():
    with Timer() as t:
        rep = ex.check_margin_rescaling(50, ROOT.child(5), n_inputs=100, T=4)
    n_ok, n = rows_passing(rep)
    assert record(4, "margin rescaling exactness", n_ok == n == 50 and t.seconds < 60,
                  f"{n_ok}/{n} nets with identical states and signs on 100 inputs, {t.seconds:.1f}s")


def test_criterion_05_ramp_transfer():
    with Timer() as t:
        rep = ex.check_ramp_transfer(20, ROOT.child(6), m=2000, eta=0.1, gamma=0.1, slack=0.02)
    n_ok, n = rows_passing(rep)
    worst = max(r[1] - r[2] for r in rep.rows)
    assert record(5, "ramp risk after rescaling", n_ok == n == 20 and t.seconds < 120,
                  f"{n_ok}/{n} instances, worst lhs - (rhs + slack) = {worst:.4f}, {t.seconds:.1f}s")


def test_criterion_06_recurrent_cover_inflation():
    setup = ex.CoverSetup()
    with Timer() as t:
        pairs = ex.run_cover_certification(setup, None, None, ROOT.child(7), k=3.0)
        cover = ex.run_cover_certification(setup, 0.6, [1], ROOT.child(8), k=3.0)
    p_ok, p_n = rows_passing(pairs.report)
    c_ok, c_n = rows_passing(cover.report)
    ok = p_ok == p_n == 3 and c_ok == c_n == 3 and t.seconds < 600
    detail = "; ".join(f"{r[0]}: {r[1]:.3f} <= {r[2]:.3f}" for r in pairs.report.rows)
    assert record(6, "recurrent cover inflation", ok,
                  f"all pairs {p_ok}/{p_n} [{detail}], eps=0.6 cover {c_ok}/{c_n}, {t.seconds:.1f}s")


def test_criterion_07_derandomized_radius():
    with Timer() as t:
        rep = ex.check_derandomized_radius(50, ROOT.child(9), K=100_000, k=5.0)
    n_ok, n = rows_passing(rep)
    assert record(7, "derandomized cover radius", n_ok == n == 50 and t.seconds < 600,
                  f"{n_ok}/{n} pairs within 5 combined se, {t.seconds:.1f}s")


def bound_grid(n=1000, seed=MASTER_SEED):
    gen = np.random.default_rng(seed)
    logu = lambda lo, hi: float(np.exp(gen.uniform(np.log(lo), np.log(hi))))
    return [dict(w=int(gen.integers(19, 500)), T=int(gen.integers(3, 5000)), d=int(gen.integers(1, 50)),
                 p=int(gen.integers(1, 10)), eps=logu(1e-4, 0.9), sigma=logu(1e-6, 0.9),
                 lo_eps=logu(1e-4, 0.024), delta=logu(1e-9, 0.024))
            for _ in range(n)]


def test_criterion_08_bound_fidelity():
    grid = bound_grid()
    mismatches, monotone_bad = [], 0
    with Timer() as t:
        for g in grid:
            pairs = [
                (bd.single_layer_cover_bound(g["d"], g["p"], g["eps"], g["sigma"]),
                 oracles.single_layer(g["d"], g["p"], g["eps"], g["sigma"])),
                (bd.multilayer_cover_bound(g["w"], g["eps"], g["sigma"]), oracles.multilayer(g["w"], g["eps"], g["sigma"])),
                (bd.rnn_cover_bound(g["w"], g["T"], g["eps"], g["sigma"]),
                 oracles.rnn(g["w"], g["T"], g["eps"], g["sigma"])),
                (bd.sample_complexity_lower(g["w"], g["T"], g["lo_eps"], g["delta"]),
                 oracles.lower(g["w"], g["T"], g["lo_eps"], g["delta"])),
            ]
            mismatches += [(g, a, b) for a, b in pairs if abs(a - b) > 1e-9 * abs(b)]
            w, T, e, s = g["w"], g["T"], g["eps"], g["sigma"]
            base = bd.rnn_cover_bound(w, T, e, s)
            monotone_bad += not (bd.rnn_cover_bound(w, T, e * 0.9, s) >= base
                                 and bd.rnn_cover_bound(w + 1, T, e, s) >= base
                                 and bd.rnn_cover_bound(w, T + 1, e, s) >= base
                                 and bd.rnn_cover_bound(w, T, e, s * 0.9) >= base)
            mbase = bd.multilayer_cover_bound(w, e, s)
            monotone_bad += not (bd.multilayer_cover_bound(w, e * 0.9, s) >= mbase
                                 and bd.multilayer_cover_bound(w + 1, e, s) >= mbase
                                 and bd.multilayer_cover_bound(w, e, s * 0.9) >= mbase)
            sbase = bd.single_layer_cover_bound(g["d"], g["p"], e, s)
            monotone_bad += not (bd.single_layer_cover_bound(g["d"], g["p"], e * 0.9, s) >= sbase
                                 and bd.single_layer_cover_bound(g["d"], g["p"], e, s * 0.9) >= sbase
                                 and bd.single_layer_cover_bound(g["d"] + 1, g["p"], e, s) >= sbase)
            lbase = bd.sample_complexity_lower(w, T, g["lo_eps"], g["delta"])
            monotone_bad += not (bd.sample_complexity_lower(w, T, g["lo_eps"] * 0.9, g["delta"]) >= lbase
                                 and bd.sample_complexity_lower(w + 1, T, g["lo_eps"], g["delta"]) >= lbase
                                 and bd.sample_complexity_lower(w, T + 1, g["lo_eps"], g["delta"]) >= lbase)
    ok = not mismatches and monotone_bad == 0 and t.seconds < 10
    assert record(8, "bound formula fidelity", ok,
                  f"{4 * len(grid)} evaluations, {len(mismatches)} beyond 1e-9 relative, "
                  f"{monotone_bad} monotonicity violations, {t.seconds:.1f}s")


def r_squared(x, y):
    fit = np.polyval(np.polyfit(x, y, 1), x)
    return 1 - ((y - fit) ** 2).sum() / ((y - y.mean()) ** 2).sum()


def test_criterion_09_scaling_laws():
    Ts = np.arange(2, 4097, 2)
    with Timer() as t, warnings.catch_warnings():
        warnings.simplefilter("ignore", bd.RangeWarning)
        upper = np.array([bd.sample_complexity_upper(19, int(T), 0.01, 0.1, 0.1) for T in Ts], dtype=float)
        lower = np.array([bd.sample_complexity_lower(19, int(T), 0.1, 0.1) for T in Ts])
    r2 = r_squared(np.log(Ts), upper)
    steps = np.diff(lower) / np.diff(Ts)
    linear = np.allclose(steps, 19 / 0.1 ** 2, rtol=1e-9, atol=0)
    at = {int(T): lo / up for T, lo, up in zip(Ts, lower, upper)}
    growth = at[4096] / at[16]
    ok = r2 >= 0.99 and linear and growth >= 10 and t.seconds < 30
    assert record(9, "scaling laws", ok,
                  f"upper vs ln T R^2={r2:.6f}, lower linear={linear}, ratio growth 16->4096 = {growth:.1f}x, "
                  f"{t.seconds:.1f}s")


def brute_force_erm(members, cfg, S, gamma):
    best, best_risk = None, math.inf
    for idx, f in enumerate(members):
        w = [W.tolist() for W in f.weights]
        losses = []
        for j in range(S.m):
            out = oracles.recurrent_last(w, S.U[j].T.tolist(), cfg.q)
            losses.append(min(1.0, max(0.0, 1.0 - S.y[j] * out / gamma)))
        risk = math.fsum(losses) / S.m
        if risk < best_risk - 1e-12:
            best, best_risk = idx, risk
    return best, best_risk


def test_criterion_10_erm_oracle():
    gen = ROOT.child(10).generator()
    mismatches = []
    with Timer() as t:
        for i in range(20):
            dims = [(3, 1), (2, 1, 1)][i % 2]
            p = dims[0]
            cfg = RecurrentConfig(p, 1, int(gen.integers(1, 4)))
            members = [MLPSpec.zeros(dims).with_flat(np.array(c))
                       for c in itertools.product((-1.0, 0.0, 1.0), repeat=3)]
            S = SampleSet(gen.uniform(-0.5, 0.5, (8, p, cfg.T)), np.where(gen.uniform(size=8) < 0.5, -1.0, 1.0))
            gamma = float(gen.uniform(0.02, 0.3))
            got = erm_grid(members, 0.0, cfg, S, gamma)
            want = brute_force_erm(members, cfg, S, gamma)
            if got[0] != want[0] or abs(got[1] - want[1]) > 1e-12:
                mismatches.append((i, got, want))
        # constructed ties: all-zero inputs make every member output 0
        cfg = RecurrentConfig(3, 1, 2)
        members = [MLPSpec.zeros((3, 1)).with_flat(np.array(c)) for c in itertools.product((-1.0, 0.0, 1.0), repeat=3)]
        tie_all = erm_grid(members, 0.0, cfg, SampleSet(np.zeros((8, 3, 2)), np.ones(8)), 0.1)[0] == 0
        S = SampleSet(gen.uniform(-0.5, 0.5, (8, 3, 2)), np.ones(8))
        first = erm_grid(members, 0.0, cfg, S, 0.1)[0]
        doubled = erm_grid(members + members, 0.0, cfg, S, 0.1)[0] == first
        shifted = erm_grid([members[first]] * 3 + members, 0.0, cfg, S, 0.1)[0] == 0
    ok = not mismatches and tie_all and doubled and shifted and t.seconds < 60
    assert record(10, "ERM oracle equivalence", ok,
                  f"{20 - len(mismatches)}/20 instances match brute force, ties resolved to first index: "
                  f"{tie_all and doubled and shifted}, {t.seconds:.1f}s")


def finite_difference(spec, S, gamma, steps=None, out=None, h=1e-6):
    theta = spec.flat()
    grad = np.zeros_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        grad[i] = (ramp_objective_and_grad(spec.with_flat(theta + e), S, gamma, steps, out)[0]
                   - ramp_objective_and_grad(spec.with_flat(theta - e), S, gamma, steps, out)[0]) / (2 * h)
    return grad


def test_criterion_11_gradient_check():
    gen = ROOT.child(11).generator()
    worst = {0.0: 0.0, 0.3: 0.0}
    with Timer() as t:
        for _ in range(20):
            p, q = int(gen.integers(1, 3)), int(gen.integers(1, 4))
            hidden = [int(gen.integers(1, 4)) for _ in range(int(gen.integers(0, 2)))]
            spec = MLPSpec.random([p + q - 1] + hidden + [q], gen, 2.0)
            T = int(gen.integers(1, 5))
            S = SampleSet(gen.uniform(-0.5, 0.5, (6, p, T)), np.where(gen.uniform(size=6) < 0.5, -1.0, 1.0))
            for sigma in (0.0, 0.3):
                steps, out = (None, None) if sigma == 0 else \
                    draw_recurrent_noise(spec, sigma, T, (2, 6), RngStream(int(gen.integers(2 ** 32))))
                g = ramp_objective_and_grad(spec, S, 1.0, steps, out)[1]
                fd = finite_difference(spec, S, 1.0, steps, out)
                rel = np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.linalg.norm(fd), 1e-300)
                worst[sigma] = max(worst[sigma], rel)
    ok = worst[0.0] < 1e-5 and worst[0.3] < 1e-4 and t.seconds < 60
    assert record(11, "gradient check", ok,
                  f"worst relative error {worst[0.0]:.2e} (sigma=0), {worst[0.3]:.2e} (sigma=0.3, fixed noise), "
                  f"{t.seconds:.1f}s")


@pytest.mark.parametrize("command", ["suite", "bounds"])
def test_criterion_12_determinism(tmp_path, command):
    cfg = CONFIGS / ("suite.cfg" if command == "suite" else "bounds.cfg")
    outputs, times = [], []
    for run, threads in enumerate((1, 1, 8)):
        out = tmp_path / f"{command}-{run}.csv"
        with Timer() as t:
            code = main([command, "--config", str(cfg), "--out", str(out), "--threads", str(threads)])
        assert code == 0
        outputs.append(out.read_bytes())
        times.append(t.seconds)
    identical = outputs[0] == outputs[1] == outputs[2]
    ok = identical and times[2] < 2 * times[0]
    line = record(12, f"determinism ({command})", ok,
                  f"byte-identical across two runs and threads 1/8: {identical}, "
                  f"runtimes {', '.join(f'{s:.1f}s' for s in times)}")
    assert line
