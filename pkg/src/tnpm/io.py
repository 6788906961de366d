"""File formats: edge lists, label files, matrices, and fit reports.

All formats are line-oriented, tab-separated text with '#' comment
lines and a version marker, so outputs stay reviewable in diffs.
Node ids are arbitrary strings (no tabs or newlines) mapped to dense
indices in first-appearance order; label files always refer to the
original string ids.  Floats are written with 17 significant digits so
write-then-read round-trips are exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import BipartiteAdjacency

EDGE_LIST_MARKER = "# tnpm edge-list v1"
LABELS_MARKER = "# tnpm labels v1"
MATRIX_MARKER = "# tnpm matrix v1"
FIT_REPORT_MARKER = "# tnpm fit-report v1"


class DataError(Exception):
    """Malformed or inconsistent input data (CLI exit code 2)."""


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _data_lines(path):
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            yield number, line


def read_edge_list(
    path, *, binary: bool = False, undirected: bool = False
) -> tuple[BipartiteAdjacency, list[str], list[str]]:
    """Parse an edge-list file into an adjacency matrix and id tables.

    Lines are "row_id<TAB>col_id[<TAB>count]" with a default count of 1;
    duplicate lines in the same orientation sum.  With ``binary=True``
    every aggregated positive count becomes 1.  With ``undirected=True``
    both columns share one id space and self-loops are rejected; a pair
    listed in one orientation is mirrored, while a pair listed in both
    orientations must carry equal totals (anything else is asymmetric
    and raises DataError).

    Returns (adjacency, row_ids, col_ids); in undirected mode both id
    lists are the same object.
    """
    row_index: dict[str, int] = {}
    col_index: dict[str, int] = row_index if undirected else {}
    rows: list[int] = []
    cols: list[int] = []
    counts: list[int] = []
    for number, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise DataError(f"{path}: line {number}: expected 2 or 3 tab-separated fields")
        if len(fields) == 3:
            try:
                count = int(fields[2])
            except ValueError:
                raise DataError(f"{path}: line {number}: count {fields[2]!r} is not an integer") from None
            if count < 1:
                raise DataError(f"{path}: line {number}: count must be a positive integer")
        else:
            count = 1
        a, b = fields[0], fields[1]
        if undirected and a == b:
            raise DataError(f"{path}: line {number}: self-loop on {a!r} is not allowed")
        i = row_index.setdefault(a, len(row_index))
        j = col_index.setdefault(b, len(col_index))
        rows.append(i)
        cols.append(j)
        counts.append(count)
    if not rows:
        raise DataError(f"{path}: no edges found")
    row_ids = list(row_index)
    col_ids = row_ids if undirected else list(col_index)
    if undirected:
        directed: dict[tuple[int, int], int] = {}
        for i, j, c in zip(rows, cols, counts):
            directed[i, j] = directed.get((i, j), 0) + c
        rows, cols, counts = [], [], []
        for lo, hi in {(min(i, j), max(i, j)) for i, j in directed}:
            forward = directed.get((lo, hi))
            backward = directed.get((hi, lo))
            if forward is not None and backward is not None and forward != backward:
                raise DataError(
                    f"{path}: asymmetric counts for pair "
                    f"({row_ids[lo]!r}, {row_ids[hi]!r}): {forward} vs {backward}"
                )
            count = forward if forward is not None else backward
            rows.extend((lo, hi))
            cols.extend((hi, lo))
            counts.extend((count, count))
    A = BipartiteAdjacency.from_entries(
        len(row_ids), len(col_ids), np.array(rows), np.array(cols), np.array(counts)
    )
    if binary:
        A = BipartiteAdjacency(A.m, A.n, A.rows, A.cols, np.ones_like(A.counts))
    return A, row_ids, col_ids


def write_edge_list(
    path, A: BipartiteAdjacency, row_ids: list[str], col_ids: list[str], *, undirected: bool = False
) -> None:
    """Write entries sorted by (i, j); undirected matrices store i < j once."""
    if len(row_ids) != A.m or len(col_ids) != A.n:
        raise ValueError("id lists must match the adjacency dimensions")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(EDGE_LIST_MARKER + "\n")
        for i, j, c in zip(A.rows, A.cols, A.counts):
            if undirected and i >= j:
                continue
            handle.write(f"{row_ids[i]}\t{col_ids[j]}\t{c}\n")


def read_labels(path) -> tuple[list[str], np.ndarray]:
    """Parse "node_id<TAB>cluster_index" lines, one per node.

    Every node must appear exactly once; indices are non-negative ints.
    A written labeling may leave clusters empty, so gaps in the used
    indices are tolerated and the cluster count is taken as max + 1.
    """
    ids: list[str] = []
    seen: set[str] = set()
    labels: list[int] = []
    for number, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataError(f"{path}: line {number}: expected 2 tab-separated fields")
        node, raw = fields
        try:
            label = int(raw)
        except ValueError:
            raise DataError(f"{path}: line {number}: label {raw!r} is not an integer") from None
        if label < 0:
            raise DataError(f"{path}: line {number}: label must be >= 0")
        if node in seen:
            raise DataError(f"{path}: line {number}: duplicate node id {node!r}")
        seen.add(node)
        ids.append(node)
        labels.append(label)
    if not ids:
        raise DataError(f"{path}: no labels found")
    return ids, np.array(labels, dtype=np.int64)


def write_labels(path, ids: list[str], labels) -> None:
    labels = np.asarray(labels)
    if len(ids) != labels.size:
        raise ValueError("id list and label vector must have equal length")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(LABELS_MARKER + "\n")
        for node, label in zip(ids, labels):
            handle.write(f"{node}\t{int(label)}\n")


def align_labels(
    ids_a: list[str], labels_a: np.ndarray, ids_b: list[str], labels_b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Align two labelings on their shared node ids (order of the first).

    Raises DataError listing the missing ids when the node sets differ.
    """
    set_a, set_b = set(ids_a), set(ids_b)
    if set_a != set_b:
        only_a = sorted(set_a - set_b)
        only_b = sorted(set_b - set_a)
        parts = []
        if only_a:
            parts.append("missing from second file: " + ", ".join(only_a[:10]))
        if only_b:
            parts.append("missing from first file: " + ", ".join(only_b[:10]))
        raise DataError("node sets differ; " + "; ".join(parts))
    pos_b = {node: k for k, node in enumerate(ids_b)}
    order = np.array([pos_b[node] for node in ids_a], dtype=np.int64)
    return np.asarray(labels_a), np.asarray(labels_b)[order]


def write_matrix(path, name: str, array) -> None:
    """Self-describing tab-separated matrix with 17-digit floats."""
    array = np.atleast_2d(np.asarray(array, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(MATRIX_MARKER + "\n")
        handle.write(f"# name: {name}\n")
        handle.write(f"# shape: {array.shape[0]} {array.shape[1]}\n")
        for row in array:
            handle.write("\t".join(fmt_float(x) for x in row) + "\n")


def read_matrix(path) -> np.ndarray:
    shape = None
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            if raw.startswith("# shape: "):
                parts = raw[len("# shape: ") :].split()
                shape = (int(parts[0]), int(parts[1]))
                break
    if shape is None:
        raise DataError(f"{path}: missing shape header")
    rows = [
        [float(x) for x in line.split("\t")] for _, line in _data_lines(path)
    ]
    out = np.array(rows, dtype=np.float64)
    if out.shape != shape:
        raise DataError(f"{path}: shape header {shape} does not match data {out.shape}")
    return out


def write_fit_report(path, fields: dict) -> None:
    """Key-value fit report; list values are comma-joined floats."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(FIT_REPORT_MARKER + "\n")
        for key, value in fields.items():
            if isinstance(value, (list, tuple, np.ndarray)):
                rendered = ",".join(fmt_float(v) for v in value)
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, float):
                rendered = fmt_float(value)
            else:
                rendered = str(value)
            handle.write(f"{key}\t{rendered}\n")


def read_fit_report(path) -> dict[str, str]:
    out: dict[str, str] = {}
    for _, line in _data_lines(path):
        key, _, value = line.partition("\t")
        out[key] = value
    return out


def write_metadata(path, mapping: dict) -> None:
    """Deterministic JSON sidecar (sorted keys, no timestamps)."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(mapping, handle, sort_keys=True, indent=2)
        handle.write("\n")


def read_metadata(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def ensure_parent(path) -> None:
    parent = Path(path).parent
    if parent and not parent.exists():
        raise DataError(f"output directory {parent} does not exist")
