"""Attributed-network data model, degree normalizations, and file formats.

Conventions shared by every other module: dense float64 matrices, symmetric
binary adjacency with zero diagonal, per-node integer group ids for the
sensitive attribute. Degree-0 nodes get zero rows/columns under D^{-1/2}
(the self-loop term of the propagation operator still reaches them).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

# Dense-matrix representation throughout; structural optimization gradients
# are dense over all node pairs, so large graphs are rejected up front.
MAX_NODES = 10_000


class GraphFormatError(ValueError):
    """Input text/JSON could not be parsed into a valid network."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AttributedNetwork:
    """Undirected attributed network with a per-node sensitive-group id.

    adjacency  : (n, n) symmetric binary matrix, zero diagonal
    attributes : (n, m) float matrix; the sensitive attribute is kept out of
                 this matrix and carried separately in ``sensitive``
    sensitive  : (n,) int group ids 0..G-1, every group nonempty, G >= 2
    labels     : optional (n,) binary class labels
    splits     : optional dict of pairwise-disjoint node-index arrays

    Instances are immutable after construction (arrays are marked read-only)
    and safe to share across threads.
    """

    adjacency: np.ndarray
    attributes: np.ndarray
    sensitive: np.ndarray
    labels: Optional[np.ndarray] = None
    splits: Optional[dict] = None

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        n = adj.shape[0]
        if n > MAX_NODES:
            raise ValueError(f"dense representation capped at {MAX_NODES} nodes, got {n}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diagonal(adj) != 0):
            raise ValueError("adjacency diagonal must be zero")
        if not np.all((adj == 0) | (adj == 1)):
            raise ValueError("adjacency entries must be binary")

        attrs = np.asarray(self.attributes, dtype=float)
        if attrs.ndim != 2 or attrs.shape[0] != n:
            raise ValueError("attributes must be an (n, m) matrix")
        if not np.all(np.isfinite(attrs)):
            raise ValueError("attributes must be finite")

        sens = np.asarray(self.sensitive, dtype=int)
        if sens.shape != (n,):
            raise ValueError("sensitive must be a length-n vector")
        if sens.min(initial=0) < 0:
            raise ValueError("sensitive ids must be nonnegative")
        groups = int(sens.max()) + 1 if n else 0
        if groups < 2:
            raise ValueError("at least two sensitive groups are required")
        counts = np.bincount(sens, minlength=groups)
        if np.any(counts == 0):
            raise ValueError("every sensitive group must be nonempty")

        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=int)
            if labels.shape != (n,):
                raise ValueError("labels must be a length-n vector")
            if not np.all(np.isin(labels, (0, 1))):
                raise ValueError("labels must be binary")
            labels = _readonly(labels)

        splits = self.splits
        if splits is not None:
            splits = {k: _readonly(np.asarray(v, dtype=int)) for k, v in splits.items()}
            seen = np.zeros(n, dtype=bool)
            for name, idx in splits.items():
                if idx.size and (idx.min() < 0 or idx.max() >= n):
                    raise ValueError(f"split '{name}' has out-of-range node ids")
                if np.any(seen[idx]):
                    raise ValueError("splits must be pairwise disjoint")
                seen[idx] = True

        object.__setattr__(self, "adjacency", _readonly(adj))
        object.__setattr__(self, "attributes", _readonly(attrs))
        object.__setattr__(self, "sensitive", _readonly(sens))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "splits", splits)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.attributes.shape[1]

    @property
    def n_groups(self) -> int:
        return int(self.sensitive.max()) + 1

    def group_indices(self) -> list[np.ndarray]:
        """Node index arrays, one per sensitive group."""
        return [np.flatnonzero(self.sensitive == g) for g in range(self.n_groups)]


def include_sensitive_feature(net: AttributedNetwork) -> AttributedNetwork:
    """Return a copy with the group id appended as the last attribute column."""
    attrs = np.hstack([net.attributes, net.sensitive[:, None].astype(float)])
    return AttributedNetwork(net.adjacency, attrs, net.sensitive, net.labels, net.splits)


def degree_normalize(adjacency: np.ndarray) -> np.ndarray:
    """Symmetric degree normalization D^{-1/2} A D^{-1/2}.

    Works on any square symmetric nonnegative matrix (also the continuous
    adjacency used during debiasing). Rows/columns of degree-0 nodes are
    zeroed rather than adding self-loops.
    """
    a = np.asarray(adjacency, dtype=float)
    deg = a.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    pos = deg > 0
    inv_sqrt[pos] = deg[pos] ** -0.5
    return (a * inv_sqrt[:, None]) * inv_sqrt[None, :]


def normalized_laplacian(adjacency: np.ndarray) -> np.ndarray:
    """D^{-1/2} (D - A) D^{-1/2}, with zero diagonal entries for degree-0 nodes."""
    a = np.asarray(adjacency, dtype=float)
    lap = -degree_normalize(a)
    idx = np.arange(a.shape[0])
    lap[idx, idx] += (a.sum(axis=1) > 0).astype(float)
    return lap


def selfloop_normalize(adjacency: np.ndarray) -> np.ndarray:
    """Single-propagation operator with self-loops: D^{-1/2} (A + I) D^{-1/2}."""
    a = np.asarray(adjacency, dtype=float) + np.eye(adjacency.shape[0])
    return degree_normalize(a)


@dataclass(frozen=True)
class PropagationOperator:
    """Reweighted-self-loop propagation operator and its hop weights.

    p_norm = alpha * A_norm + (1 - alpha) * I; betas weight hops 1..H and
    must be positive and non-increasing (short-distance terms emphasized).
    """

    p_norm: np.ndarray
    alpha: float
    horizon: int
    betas: tuple

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        betas = tuple(float(b) for b in self.betas)
        if len(betas) != self.horizon:
            raise ValueError("need exactly one beta per hop")
        if any(b <= 0 for b in betas):
            raise ValueError("betas must be positive")
        if any(b2 > b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("betas must be non-increasing")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "p_norm", _readonly(np.asarray(self.p_norm, dtype=float)))


def propagation_operator(a_norm: np.ndarray, alpha: float, horizon: int,
                         betas) -> PropagationOperator:
    """Build alpha * A_norm + (1 - alpha) * I from a normalized adjacency."""
    a_norm = np.asarray(a_norm, dtype=float)
    p = alpha * a_norm + (1.0 - alpha) * np.eye(a_norm.shape[0])
    return PropagationOperator(p, float(alpha), int(horizon), tuple(betas))


def geometric_betas(horizon: int) -> tuple:
    """Hop weights proportional to 2^{-h}, normalized to sum to one."""
    raw = 0.5 ** np.arange(1, horizon + 1)
    return tuple(raw / raw.sum())


def default_operator(adjacency: np.ndarray, alpha: float = 0.5, horizon: int = 2,
                     betas=None) -> PropagationOperator:
    if betas is None:
        betas = geometric_betas(horizon)
    return propagation_operator(degree_normalize(adjacency), alpha, horizon, betas)


def minmax_normalize(attributes: np.ndarray) -> np.ndarray:
    """Map each column affinely onto [0, 1]; constant columns map to 0.5."""
    x = np.asarray(attributes, dtype=float)
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    out = np.full_like(x, 0.5)
    keep = span > 0
    out[:, keep] = (x[:, keep] - lo[keep]) / span[keep]
    return out


# ---------------------------------------------------------------------------
# file formats


@dataclass(frozen=True)
class ColumnSchema:
    """Names the sensitive (and optionally the label) column of a CSV table."""

    sensitive: str
    label: Optional[str] = None


def _encode_categories(values: list[str], what: str) -> np.ndarray:
    """Re-encode raw cells to 0..G-1 by sorted distinct value."""
    distinct = sorted(set(values))
    try:
        distinct = sorted(distinct, key=float)
    except ValueError:
        pass  # non-numeric categories sort lexically
    mapping = {v: i for i, v in enumerate(distinct)}
    if what == "label" and len(distinct) > 2:
        raise GraphFormatError(f"label column must be binary, found {len(distinct)} values")
    return np.array([mapping[v] for v in values], dtype=int)


def load_graph(edge_text: str, attribute_text: str, schema: ColumnSchema) -> AttributedNetwork:
    """Parse an edge list and a CSV attribute table into a network.

    Edge list: one whitespace-separated "u v" pair per line, 0-based ids.
    Attribute table: CSV with a header row; the schema names the sensitive
    column and an optional label column, every other column must be numeric.
    Directed pairs are symmetrized and self-loops dropped.
    """
    reader = csv.reader(io.StringIO(attribute_text))
    try:
        header = next(reader)
    except StopIteration:
        raise GraphFormatError("attribute table is empty") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise GraphFormatError("duplicate column names in attribute table header")
    if schema.sensitive not in header:
        raise GraphFormatError(f"missing sensitive column '{schema.sensitive}'")
    if schema.label is not None and schema.label not in header:
        raise GraphFormatError(f"missing label column '{schema.label}'")

    rows = [row for row in reader if row]
    n = len(rows)
    sens_col = header.index(schema.sensitive)
    label_col = header.index(schema.label) if schema.label is not None else None
    attr_cols = [i for i in range(len(header)) if i not in (sens_col, label_col)]

    attrs = np.empty((n, len(attr_cols)))
    sens_raw, label_raw = [], []
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise GraphFormatError(f"row {r} has {len(row)} cells, expected {len(header)}")
        for k, c in enumerate(attr_cols):
            try:
                attrs[r, k] = float(row[c])
            except ValueError:
                raise GraphFormatError(
                    f"non-numeric attribute cell '{row[c]}' at row {r}, column '{header[c]}'"
                ) from None
        sens_raw.append(row[sens_col].strip())
        if label_col is not None:
            label_raw.append(row[label_col].strip())

    sensitive = _encode_categories(sens_raw, "sensitive")
    labels = _encode_categories(label_raw, "label") if label_col is not None else None

    adjacency = np.zeros((n, n))
    for lineno, line in enumerate(edge_text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise GraphFormatError(f"edge line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"edge line {lineno}: non-integer node id") from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge line {lineno}: unknown node id (n={n})")
        if u == v:
            continue  # self-loops dropped
        adjacency[u, v] = adjacency[v, u] = 1.0

    return AttributedNetwork(adjacency, attrs, sensitive, labels)


def load_graph_files(edge_path, attribute_path, schema: ColumnSchema) -> AttributedNetwork:
    with open(edge_path, encoding="utf-8") as fh:
        edge_text = fh.read()
    with open(attribute_path, encoding="utf-8") as fh:
        attribute_text = fh.read()
    return load_graph(edge_text, attribute_text, schema)


def network_to_dict(net: AttributedNetwork) -> dict:
    iu, ju = np.nonzero(np.triu(net.adjacency, k=1))
    d = {
        "n": net.n_nodes,
        "edges": [[int(i), int(j)] for i, j in zip(iu, ju)],
        "attributes": net.attributes.tolist(),
        "sensitive": net.sensitive.tolist(),
        "labels": net.labels.tolist() if net.labels is not None else None,
        "splits": {k: v.tolist() for k, v in net.splits.items()} if net.splits else None,
    }
    return d


def network_from_dict(d: dict) -> AttributedNetwork:
    try:
        n = int(d["n"])
        adjacency = np.zeros((n, n))
        for u, v in d["edges"]:
            adjacency[u, v] = adjacency[v, u] = 1.0
        np.fill_diagonal(adjacency, 0.0)
        attributes = np.asarray(d["attributes"], dtype=float)
        sensitive = np.asarray(d["sensitive"], dtype=int)
        labels = d.get("labels")
        splits = d.get("splits")
    except (KeyError, TypeError, IndexError) as exc:
        raise GraphFormatError(f"malformed network JSON: {exc}") from None
    return AttributedNetwork(adjacency, attributes, sensitive, labels, splits)


def save_network(net: AttributedNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, sort_keys=True)


def load_network(path) -> AttributedNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"invalid JSON in {path}: {exc}") from None
    return network_from_dict(d)
