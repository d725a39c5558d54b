"""On-disk formats: algebra/SSM/path specs (JSON), datasets (JSONL), CSV tables.

All writers are deterministic byte-for-byte for identical inputs: JSON keeps
insertion order and Python's float repr round-trips doubles exactly; CSV
numbers are written in scientific notation with 17 significant digits.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .flows import PiecewisePath
from .ssm import SSMSpec

TOOL_TAG = f"liessm {__version__}"


def _num(x: float) -> str:
    return format(float(x), ".16e")


def metadata(subcommand: str, seed=None, **config) -> dict:
    meta = {"tool": TOOL_TAG, "subcommand": subcommand}
    if seed is not None:
        meta["seed"] = int(seed)
    meta["config"] = {k: v for k, v in sorted(config.items())}
    return meta


def _matrix_rows(data, n: int, what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape == (n * n,):
        arr = arr.reshape(n, n)
    if arr.shape != (n, n):
        raise ValidationError(f"{what}: expected {n}x{n} rows (or a flat row-major list)")
    return arr


def load_algebra(path) -> tuple[int, dict]:
    """Read ``{"n": ..., "matrices": {name: rows}}``; rows are row-major."""
    doc = json.loads(Path(path).read_text())
    try:
        n = int(doc["n"])
        raw = doc["matrices"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"algebra file {path} is missing 'n' or 'matrices'") from exc
    if not raw:
        raise ValidationError(f"algebra file {path} lists no matrices")
    return n, {name: _matrix_rows(rows, n, f"matrix {name!r}") for name, rows in raw.items()}


def save_algebra(path, n: int, matrices: dict):
    doc = {"n": int(n), "matrices": {k: np.asarray(v, float).tolist() for k, v in matrices.items()}}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_ssm(path) -> SSMSpec:
    """Read an SSM spec: n, alphabet, per-symbol A and b, initial state h0."""
    doc = json.loads(Path(path).read_text())
    try:
        n = int(doc["n"])
        alphabet = tuple(doc["alphabet"])
        raw_A = doc["A"]
        raw_b = doc.get("b")
        h0 = np.asarray(doc["h0"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"SSM file {path} is malformed: {exc}") from exc
    A = np.stack([_matrix_rows(raw_A[name], n, f"A[{name!r}]") for name in alphabet])
    if raw_b is None:
        b = np.zeros((len(alphabet), n))
    else:
        b = np.stack([np.asarray(raw_b[name], dtype=float) for name in alphabet])
    return SSMSpec(A=A, b=b, h0=h0, alphabet=alphabet)


def save_ssm(path, ssm: SSMSpec):
    doc = {
        "n": ssm.n,
        "alphabet": list(ssm.alphabet),
        "A": {name: ssm.A[i].tolist() for i, name in enumerate(ssm.alphabet)},
        "b": {name: ssm.b[i].tolist() for i, name in enumerate(ssm.alphabet)},
        "h0": ssm.h0.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_path(path, ssm: SSMSpec | None = None) -> PiecewisePath:
    """Read ``{"segments": [[symbol, duration], ...]}``.

    Symbols may be alphabet names (resolved against ``ssm``) or raw indices.
    """
    doc = json.loads(Path(path).read_text())
    try:
        raw = doc["segments"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"path file {path} is missing 'segments'") from exc
    segments = []
    for sym, dur in raw:
        if isinstance(sym, str):
            if ssm is None:
                raise ValidationError(f"path file {path} uses symbol names but no SSM was given")
            sym = ssm.symbol_index(sym)
        segments.append((int(sym), float(dur)))
    return PiecewisePath(tuple(segments))


def save_path(path, piecewise: PiecewisePath, alphabet=None):
    segs = [
        [alphabet[s] if alphabet else s, d] for s, d in piecewise.segments
    ]
    Path(path).write_text(json.dumps({"segments": segs}, indent=2) + "\n")


def write_json_report(path, payload: dict, meta: dict):
    doc = {"meta": meta}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_scaling_csv(path, rows, slopes: dict, meta: dict):
    """Comma-separated (epsilon, order, error, replicate) plus a slope block."""
    lines = [f"# {k}={v}" for k, v in _flatten_meta(meta)]
    lines.append("epsilon,order,error,replicate")
    for row in rows:
        lines.append(f"{_num(row.epsilon)},{row.order},{_num(row.error)},{row.replicate}")
    for order in sorted(slopes):
        lines.append(f"# slope order={order} value={_num(slopes[order])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_scaling_csv(path) -> tuple[list[tuple], dict]:
    rows, slopes = [], {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("# slope "):
            parts = dict(p.split("=", 1) for p in line[2:].split()[1:])
            slopes[int(parts["order"])] = float(parts["value"])
        elif line.startswith("#") or line.startswith("epsilon"):
            continue
        else:
            eps, order, err, rep = line.split(",")
            rows.append((float(eps), int(order), float(err), int(rep)))
    return rows, slopes


def write_count_csv(path, rows, meta: dict):
    """Rows of (n, m, count, cumulative) for Lyndon/Witt tables."""
    lines = [f"# {k}={v}" for k, v in _flatten_meta(meta)]
    lines.append("n,m,count,cumulative")
    for n, m, count, cumulative in rows:
        lines.append(f"{n},{m},{count},{cumulative}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_jsonl(path, records, meta: dict):
    """One compact JSON object per line, plus a sidecar .meta.json file."""
    out = Path(path)
    count = 0
    with out.open("w") as fh:
        for record in records:
            fh.write(json.dumps(record, separators=(",", ":")))
            fh.write("\n")
            count += 1
    meta = dict(meta)
    meta["records"] = count
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return count


def read_jsonl(path):
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def _flatten_meta(meta: dict):
    flat = []
    for k, v in meta.items():
        if isinstance(v, dict):
            flat.extend((f"{k}.{k2}", v2) for k2, v2 in v.items())
        else:
            flat.append((k, v))
    return flat
