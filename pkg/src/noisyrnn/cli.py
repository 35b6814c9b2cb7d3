"""Command-line entry point: ``noisyrnn {bounds,suite,gap,certify-cover}``.

Exit codes: 0 success, 1 a certification check failed, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

from . import experiments as ex
from .io import Config, ConfigError, config_hash, render_table
from .networks import DomainError
from .numerics import InvalidParameterError, RngStream

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2

DEFAULT_T = ",".join(str(2 ** i) for i in range(1, 13))

KEYS: Dict[str, Dict[str, str]] = {
    "bounds": {"w": "19", "T": DEFAULT_T, "sigma": "0.01", "epsilon": "0.1", "delta": "0.1",
               "gamma": "0.1", "C": "1"},
    "suite": {"tolerance_k": "3", "n_oracle": "40", "n_dpi": "60", "n_first_last": "30",
              "n_concat": "30", "n_coupling": "20", "n_rescale": "20", "n_transfer": "10",
              "n_derandomized": "20", "N": "20000", "K": "100000", "cover_epsilon": "0.6"},
    "gap": {"T": "2,4,8", "sigma": "0.1", "m": "64", "m_test": "2000", "p": "1", "q": "2",
            "hidden": "", "gamma": "0.1", "eta": "0.1", "label_noise": "0.05",
            "label_mode": "teacher", "lr": "0.5", "epochs": "100", "K_noise": "8", "K_eval": "64"},
    "certify-cover": {"T": "3", "sigma": "0.5", "values": "-1,0,1", "base_weights": "0.9,0.6,-0.7,0.0",
                      "free": "3", "p": "1", "q": "2", "epsilon": "0.6", "cover_subset": "1",
                      "probes_per_axis": "3", "n_sequences": "6", "N": "4000", "n_paths": "512",
                      "replicates": "5", "tolerance_k": "3"},
}


def _validate_keys(cmd: str, cfg: Config) -> None:
    allowed = set(KEYS[cmd]) | {"master_seed", "out"}
    unknown = sorted(set(cfg.values) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys for '{cmd}': {', '.join(unknown)}")


def _unit(cfg: Config, key: str, default: str, closed_low: bool = False) -> float:
    return cfg.require_range(key, cfg.get_float(key, default), 0.0, 1.0, lo_open=not closed_low)


def _cmd_bounds(cfg: Config, seed: int, threads: int):
    d = KEYS["bounds"]
    ws = [cfg.require_range("w", w, 1, None, lo_open=False) for w in cfg.get_list("w", int, d["w"])]
    Ts = [cfg.require_range("T", t, 1, None, lo_open=False) for t in cfg.get_list("T", int, d["T"])]
    sigmas = [cfg.require_range("sigma", s, 0.0, 1.0) for s in cfg.get_list("sigma", float, d["sigma"])]
    eps, delta = _unit(cfg, "epsilon", d["epsilon"]), _unit(cfg, "delta", d["delta"])
    gamma = cfg.require_range("gamma", cfg.get_float("gamma", d["gamma"]), 0.0, 0.5, hi_open=False)
    C = cfg.require_range("C", cfg.get_float("C", d["C"]), 0.0)
    rows = ex.bound_rows(ws, Ts, sigmas, eps, delta, gamma, C, threads)
    return ex.BOUND_COLUMNS, rows, []


def _cmd_suite(cfg: Config, seed: int, threads: int):
    d = KEYS["suite"]
    n = {key: cfg.require_range(key, cfg.get_int(key, d[key]), 0, None, lo_open=False)
         for key in d if key.startswith("n_")}
    setup = ex.SuiteSetup(
        k=cfg.require_range("tolerance_k", cfg.get_float("tolerance_k", d["tolerance_k"]), 0.0, None,
                            lo_open=False),
        N=cfg.require_range("N", cfg.get_int("N", d["N"]), 2, None, lo_open=False),
        K=cfg.require_range("K", cfg.get_int("K", d["K"]), 2, None, lo_open=False),
        cover_epsilon=cfg.require_range("cover_epsilon", cfg.get_float("cover_epsilon", d["cover_epsilon"]), 0.0),
        **n)
    reports = ex.suite_reports(setup, seed, threads)
    failed = [f"{r.name}:{t}" for r in reports for t in r.failures()]
    return ex.SUITE_COLUMNS, ex.suite_table(reports), failed


def _cmd_gap(cfg: Config, seed: int, threads: int):
    d = KEYS["gap"]
    mode = cfg.get_str("label_mode", d["label_mode"])
    if mode not in ("teacher", "constant"):
        raise ConfigError("label_mode must be 'teacher' or 'constant'")
    setup = ex.GapSetup(
        p=cfg.require_range("p", cfg.get_int("p", d["p"]), 1, None, lo_open=False),
        q=cfg.require_range("q", cfg.get_int("q", d["q"]), 1, None, lo_open=False),
        hidden=tuple(cfg.get_list("hidden", int, d["hidden"])),
        m=cfg.require_range("m", cfg.get_int("m", d["m"]), 1, None, lo_open=False),
        m_test=cfg.require_range("m_test", cfg.get_int("m_test", d["m_test"]), 1, None, lo_open=False),
        gamma=cfg.require_range("gamma", cfg.get_float("gamma", d["gamma"]), 0.0, 0.5),
        eta=_unit(cfg, "eta", d["eta"]),
        label_noise=cfg.require_range("label_noise", cfg.get_float("label_noise", d["label_noise"]),
                                      0.0, 1.0, lo_open=False),
        label_mode=mode,
        lr=cfg.require_range("lr", cfg.get_float("lr", d["lr"]), 0.0, None, lo_open=False),
        epochs=cfg.require_range("epochs", cfg.get_int("epochs", d["epochs"]), 0, None, lo_open=False),
        K_noise=cfg.require_range("K_noise", cfg.get_int("K_noise", d["K_noise"]), 1, None, lo_open=False),
        K_eval=cfg.require_range("K_eval", cfg.get_int("K_eval", d["K_eval"]), 2, None, lo_open=False),
    )
    Ts = [cfg.require_range("T", t, 1, None, lo_open=False) for t in cfg.get_list("T", int, d["T"])]
    sigma0 = cfg.require_range("sigma", cfg.get_float("sigma", d["sigma"]), 0.0, 1.0)
    return ex.GAP_COLUMNS, ex.gap_rows(setup, Ts, [0.0, sigma0], seed, threads), []


def _cmd_certify_cover(cfg: Config, seed: int, threads: int):
    d = KEYS["certify-cover"]
    p = cfg.require_range("p", cfg.get_int("p", d["p"]), 1, None, lo_open=False)
    q = cfg.require_range("q", cfg.get_int("q", d["q"]), 1, 3, lo_open=False, hi_open=False)
    base = tuple(cfg.get_list("base_weights", float, d["base_weights"]))
    if len(base) != (p + q - 1) * q:
        raise ConfigError(f"base_weights needs {(p + q - 1) * q} values for a single-layer block")
    eps_text = cfg.get_str("epsilon", d["epsilon"])
    epsilon = None if eps_text == "pairs" else cfg.require_range("epsilon", cfg.get_float("epsilon", d["epsilon"]), 0.0)
    setup = ex.CoverSetup(
        base_weights=base, free=tuple(cfg.get_list("free", int, d["free"])),
        values=tuple(cfg.get_list("values", float, d["values"])), p=p, q=q,
        T=cfg.require_range("T", cfg.get_int("T", d["T"]), 1, 4, lo_open=False, hi_open=False),
        sigma=cfg.require_range("sigma", cfg.get_float("sigma", d["sigma"]), 0.0, 1.0),
        probes_per_axis=cfg.require_range("probes_per_axis", cfg.get_int("probes_per_axis", d["probes_per_axis"]),
                                          1, None, lo_open=False),
        n_sequences=cfg.require_range("n_sequences", cfg.get_int("n_sequences", d["n_sequences"]), 1, None,
                                      lo_open=False),
        N=cfg.require_range("N", cfg.get_int("N", d["N"]), 2, None, lo_open=False),
        n_paths=cfg.require_range("n_paths", cfg.get_int("n_paths", d["n_paths"]), 1, None, lo_open=False),
        replicates=cfg.require_range("replicates", cfg.get_int("replicates", d["replicates"]), 2, None,
                                     lo_open=False),
    )
    subset = cfg.get_list("cover_subset", int, d["cover_subset"])
    k = cfg.require_range("tolerance_k", cfg.get_float("tolerance_k", d["tolerance_k"]), 0.0, None, lo_open=False)
    try:
        report = ex.run_cover_certification(setup, epsilon, subset, RngStream(seed), k).report
    except (InvalidParameterError, ValueError) as exc:
        raise ConfigError(f"{exc} (hint: keep T <= 4, q <= 3, sigma > 0 and the class within the size cap)") \
            from exc
    return report.COLUMNS, report.rows, [f"recurrent_cover:{t}" for t in report.failures()]


COMMANDS = {"bounds": _cmd_bounds, "suite": _cmd_suite, "gap": _cmd_gap,
            "certify-cover": _cmd_certify_cover}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyrnn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="flat 'key = value' configuration file")
        sp.add_argument("--out", help="output CSV path (default: the 'out' key, else stdout)")
        sp.add_argument("--seed", type=int, help="override master_seed")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (output is identical)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = Config.load(args.config)
        _validate_keys(args.command, cfg)
        if args.seed is not None:
            cfg.values["master_seed"] = str(args.seed)
        seed = cfg.get_int("master_seed")
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        out = args.out or cfg.values.get("out")
        columns, rows, failed = COMMANDS[args.command](cfg, seed, args.threads)
    except (ConfigError, DomainError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    hashed = {k: v for k, v in cfg.values.items() if k != "out"}
    text = render_table(columns, rows, [f"config_sha256={config_hash(hashed)} seed={seed}"])
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if failed:
        print("FAILED checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"{args.command}: {len(rows)} rows, all checks passed" if args.command in ("suite", "certify-cover")
          else f"{args.command}: {len(rows)} rows", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
