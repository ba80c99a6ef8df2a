"""Reading and writing edge lists, covariate tables and label files.

Edge lists are UTF-8 text with two whitespace-separated node identifiers
per line; blank lines and lines starting with ``#`` are skipped. Node
indices follow first appearance. Covariates are CSV with a header
``node,<name1>,...``. Floats are written with 17 significant digits so
that a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestError, JoinError
from .network import Network

FLOAT_FORMAT = "{:.17g}"


def format_float(x) -> str:
    return FLOAT_FORMAT.format(float(x))


def _read_lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise IngestError(f"{path}: not valid UTF-8 ({exc.reason})") from None


def parse_edge_lines(lines, nodes=None):
    """Edge pairs and node identifiers from edge-list lines.

    ``nodes`` optionally seeds the identifier order; new identifiers are
    appended on first appearance.
    """
    index = {}
    order = []
    for v in nodes or ():
        index[v] = len(order)
        order.append(v)
    pairs = []
    seen = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise IngestError(f"expected two node identifiers, got {len(fields)}", lineno)
        a, b = fields
        if a == b:
            raise IngestError(f"self-loop on node {a!r}", lineno)
        key = (a, b) if a < b else (b, a)
        if key in seen:
            raise IngestError(f"duplicate edge {a} {b} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        for v in (a, b):
            if v not in index:
                index[v] = len(order)
                order.append(v)
        pairs.append((index[a], index[b]))
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2), order


def load_network(path, nodes=None) -> Network:
    """Read an edge list; the returned network carries the identifiers."""
    edges, order = parse_edge_lines(_read_lines(path), nodes)
    return Network(len(order), edges, nodes=order)


@dataclass(frozen=True)
class CovariateTable:
    nodes: tuple
    names: tuple
    values: np.ndarray


def load_covariate_table(path) -> CovariateTable:
    """Read a covariate CSV without aligning it to any network."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise IngestError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    if not rows:
        raise IngestError("empty covariate file", 1)
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "node":
        raise IngestError("header must start with 'node'", 1)
    names = tuple(header[1:])
    nodes, values, seen = [], [], {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise IngestError(f"expected {len(header)} fields, got {len(row)}", lineno)
        node = row[0].strip()
        if node in seen:
            raise IngestError(f"node {node!r} repeated (first on line {seen[node]})", lineno)
        seen[node] = lineno
        try:
            vals = [float(f) for f in row[1:]]
        except ValueError as exc:
            raise IngestError(str(exc), lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise IngestError("non-finite covariate value", lineno)
        nodes.append(node)
        values.append(vals)
    X = np.asarray(values, dtype=float).reshape(len(nodes), len(names))
    return CovariateTable(tuple(nodes), names, X)


def align_covariates(table: CovariateTable, nodes) -> np.ndarray:
    """Rows of ``table`` in the order of ``nodes``; every node must appear
    exactly once and no others."""
    where = {v: i for i, v in enumerate(table.nodes)}
    missing = [v for v in nodes if v not in where]
    node_set = set(nodes)
    extra = [v for v in table.nodes if v not in node_set]
    if missing or extra:
        raise JoinError(missing, extra)
    return table.values[[where[v] for v in nodes]]


def load_covariates(path, net: Network) -> np.ndarray:
    """Covariate matrix for ``net`` (no intercept column)."""
    return align_covariates(load_covariate_table(path), net.nodes)


def load_dataset(edges_path, covariates_path, allow_isolated=False):
    """Network and aligned covariates from an edge list and a covariate CSV.

    With ``allow_isolated`` nodes present only in the covariate file are
    kept as isolated nodes, appended in covariate-file order.
    """
    table = load_covariate_table(covariates_path)
    net = load_network(edges_path)
    if allow_isolated:
        known = set(net.nodes)
        extra = [v for v in table.nodes if v not in known]
        if extra:
            net = Network(net.n + len(extra), net.edges, nodes=net.nodes + tuple(extra))
    return net, align_covariates(table, net.nodes), table.names


def write_edges(net: Network, path):
    names = net.nodes
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in net.edges:
            fh.write(f"{names[i]} {names[j]}\n")


def write_covariates(path, nodes, X, names=None):
    X = np.asarray(X, dtype=float).reshape(len(nodes), -1)
    names = names or [f"x{p + 1}" for p in range(X.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", *names])
        for v, row in zip(nodes, X):
            w.writerow([v, *(format_float(x) for x in row)])


def write_labels(path, nodes, labels, column="label"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", column])
        for v, c in zip(nodes, labels):
            w.writerow([v, int(c)])


def load_labels(path, nodes=None) -> np.ndarray:
    """Integer labels from a ``node,label`` CSV or a one-label-per-line file.

    When ``nodes`` is given (CSV form only) the labels are returned in that
    order.
    """
    numbered = [(k, ln.strip()) for k, ln in enumerate(_read_lines(path), start=1) if ln.strip()]
    if numbered and numbered[0][1].split(",")[0].strip() == "node":
        table = {}
        for lineno, ln in numbered[1:]:
            fields = [f.strip() for f in ln.split(",")]
            if len(fields) != 2:
                raise IngestError("expected node,label", lineno)
            if fields[0] in table:
                raise IngestError(f"node {fields[0]!r} repeated", lineno)
            try:
                table[fields[0]] = int(fields[1])
            except ValueError:
                raise IngestError(f"label {fields[1]!r} is not an integer", lineno) from None
        if nodes is None:
            return np.asarray(list(table.values()), dtype=np.int64)
        missing = [v for v in nodes if v not in table]
        if missing:
            raise JoinError(missing)
        return np.asarray([table[v] for v in nodes], dtype=np.int64)
    out = []
    for lineno, ln in numbered:
        try:
            out.append(int(ln))
        except ValueError:
            raise IngestError(f"label {ln!r} is not an integer", lineno) from None
    return np.asarray(out, dtype=np.int64)


def label_nodes(path):
    """Node identifiers of a ``node,label`` CSV, or ``None`` for a plain list."""
    lines = [ln.strip() for ln in _read_lines(path) if ln.strip()]
    if lines and lines[0].split(",")[0].strip() == "node":
        return [ln.split(",")[0].strip() for ln in lines[1:]]
    return None


def save_synthetic(sn, directory, prefix="network"):
    """Write a synthetic network as ``<prefix>.edges``, ``<prefix>.covariates.csv``
    and ``<prefix>.truth.csv``; returns the three paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = (d / f"{prefix}.edges", d / f"{prefix}.covariates.csv", d / f"{prefix}.truth.csv")
    write_edges(sn.net, paths[0])
    write_covariates(paths[1], sn.net.nodes, sn.X)
    write_labels(paths[2], sn.net.nodes, sn.c_true)
    return paths


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or (isinstance(obj, float) and not math.isfinite(obj)):
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, val) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key), ensure_ascii=False)}: ")
            _emit(val, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not items:
            out.append("[]")
            return
        out.append("[\n")
        for k, val in enumerate(items):
            out.append(pad)
            _emit(val, indent, level + 1, out)
            out.append(",\n" if k < len(items) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj, indent=2) -> str:
    """JSON text with every float at 17 significant digits and non-finite
    floats as ``null``; key order is preserved."""
    out = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_json(obj))
