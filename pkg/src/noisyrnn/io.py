"""File formats: network weights (JSON), sample sets and result tables (CSV),
and the flat ``key = value`` experiment configuration."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import numpy as np

from .learning import SampleSet
from .networks import MLPSpec


class ConfigError(ValueError):
    """Malformed or out-of-domain experiment configuration."""


# -- weights -----------------------------------------------------------------------

def spec_to_json(spec: MLPSpec) -> str:
    """Serialize weights as hexadecimal floats so that a round trip is bit-exact."""
    return json.dumps({
        "dims": list(spec.dims),
        "weights": [[float(v).hex() for v in W.ravel()] for W in spec.weights],
    }, indent=1)


def spec_from_json(text: str) -> MLPSpec:
    doc = json.loads(text)
    dims = [int(d) for d in doc["dims"]]
    mats = [np.array([float.fromhex(v) if isinstance(v, str) else float(v) for v in layer])
            .reshape(dims[i], dims[i + 1]) for i, layer in enumerate(doc["weights"])]
    return MLPSpec(dims, mats)


def save_spec(spec: MLPSpec, path) -> None:
    Path(path).write_text(spec_to_json(spec), encoding="utf-8")


def load_spec(path) -> MLPSpec:
    return spec_from_json(Path(path).read_text(encoding="utf-8"))


# -- sample sets ----------------------------------------------------------------------

def sample_columns(p: int, T: int) -> List[str]:
    return ["y"] + [f"u_{i}_{t}" for i in range(p) for t in range(T)]


def write_samples(S: SampleSet, path) -> None:
    m, p, T = S.U.shape
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sample_columns(p, T))
        for j in range(m):
            w.writerow([int(S.y[j])] + [repr(float(v)) for v in S.U[j].ravel()])


def read_samples(path) -> SampleSet:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    if header[0] != "y":
        raise ValueError("sample file must start with a 'y' column")
    idx = [tuple(int(k) for k in c.split("_")[1:]) for c in header[1:]]
    p = max(i for i, _ in idx) + 1
    T = max(t for _, t in idx) + 1
    if header != sample_columns(p, T):
        raise ValueError("sample columns must be u_i_t ordered by i, then t")
    data = np.array(body, dtype=np.float64)
    return SampleSet(data[:, 1:].reshape(-1, p, T), data[:, 0])


# -- tables ---------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def render_table(columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        if len(r) != len(columns):
            raise ValueError(f"row has {len(r)} fields, header has {len(columns)}")
        w.writerow([format_value(v) for v in r])
    return buf.getvalue()


def write_table(path, columns, rows, comments=()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(render_table(columns, rows, comments))


def read_table(path):
    """Return ``(comments, header, rows)`` of a CSV written by :func:`write_table`."""
    comments, lines = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        (comments if line.startswith("#") else lines).append(line)
    rows = list(csv.reader(lines))
    return [c[1:].strip() for c in comments], rows[0], rows[1:]


# -- configuration ---------------------------------------------------------------------------

def parse_config(text: str) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: Dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: empty key")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    return out


def config_hash(cfg: Dict[str, str]) -> str:
    """SHA-256 over the canonical (sorted) rendering of the configuration."""
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class Config:
    """Typed accessors over a parsed configuration with defaults."""

    def __init__(self, values: Dict[str, str]):
        self.values = dict(values)

    @classmethod
    def load(cls, path) -> "Config":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls(parse_config(text))

    def _raw(self, key, default):
        if key in self.values:
            return self.values[key]
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default

    def _convert(self, key, text, kind):
        try:
            return kind(text)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: cannot parse {text!r} as {kind.__name__}") from exc

    def get_int(self, key, default=None) -> int:
        v = self._raw(key, default)
        return v if isinstance(v, int) else self._convert(key, v, int)

    def get_float(self, key, default=None) -> float:
        v = self._raw(key, default)
        return float(v) if isinstance(v, (int, float)) else self._convert(key, v, float)

    def get_str(self, key, default=None) -> str:
        return str(self._raw(key, default))

    def get_list(self, key, kind=float, default=None) -> list:
        v = self._raw(key, default)
        if isinstance(v, (list, tuple)):
            return [kind(x) for x in v]
        return [self._convert(key, x.strip(), kind) for x in v.split(",") if x.strip()]

    def require_range(self, key, value, lo=None, hi=None, lo_open=True, hi_open=True):
        bad = (lo is not None and (value <= lo if lo_open else value < lo)) or \
              (hi is not None and (value >= hi if hi_open else value > hi))
        if bad:
            raise ConfigError(f"key {key!r}={value} outside its admissible range")
        return value
