"""Pattern similarity: weighted DTW, average-linkage clustering, silhouette
scores and distance correlation.

The DTW variant here weights the three alignment moves separately and adds
an off-diagonal penalty, so warped alignments can be made progressively more
expensive than lockstep ones. Because unequal horizontal and vertical
weights break symmetry, the pairwise matrix averages both directions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._util import fmt, parse_float
from .errors import (
    ContractError,
    DegenerateDataError,
    EmptyInputError,
    ParseError,
    SampleTooSmallError,
)

METRICS = ("absolute", "squared")


@dataclass(frozen=True)
class DtwConfig:
    """Move weights, off-diagonal penalty and local cost metric for DTW.

    ``wh`` scales steps that advance only the first series, ``wv`` steps that
    advance only the second, ``wd`` diagonal steps. ``lam`` is the penalty
    per cell on the warping path times its distance |i - j| from the
    diagonal.
    """

    wh: float = 1.0
    wv: float = 1.0
    wd: float = 2.0
    lam: float = 0.0
    metric: str = "absolute"

    def __post_init__(self):
        if min(self.wh, self.wv, self.wd) <= 0:
            raise ContractError("DTW move weights must be positive")
        if self.lam < 0:
            raise ContractError("DTW penalty lam must be non-negative")
        if self.metric not in METRICS:
            raise ContractError(f"unknown metric {self.metric!r}, expected one of {METRICS}")


DEFAULT_CONFIG = DtwConfig()


def _local_cost(x: np.ndarray, y: np.ndarray, metric: str) -> np.ndarray:
    diff = x[:, None] - y[None, :]
    return np.abs(diff) if metric == "absolute" else diff * diff


def dtw_distance(x: Sequence[float], y: Sequence[float],
                 config: DtwConfig = DEFAULT_CONFIG,
                 return_path: bool = False):
    """Weighted DTW alignment cost between two sequences.

    Every path cell (i, j) contributes its move weight times the local cost
    plus ``lam * |i - j|``; the starting cell carries its bare local cost.
    With ``return_path`` the optimal path is returned as well, as 0-based
    (i, j) pairs; cost ties prefer diagonal over horizontal over vertical
    moves during backtracking.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.size == 0 or ya.size == 0:
        raise EmptyInputError("DTW inputs must be non-empty")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise ContractError("DTW inputs must be finite")
    n, m = xa.size, ya.size
    cost = _local_cost(xa, ya, config.metric)
    penalty = config.lam * np.abs(np.arange(n)[:, None] - np.arange(m)[None, :])
    D = np.full((n + 1, m + 1), np.inf)
    D[1, 1] = cost[0, 0]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if i == 1 and j == 1:
                continue
            c = cost[i - 1, j - 1]
            D[i, j] = min(D[i - 1, j - 1] + config.wd * c,
                          D[i - 1, j] + config.wh * c,
                          D[i, j - 1] + config.wv * c) + penalty[i - 1, j - 1]
    total = float(D[n, m])
    if not return_path:
        return total
    path = [(n - 1, m - 1)]
    i, j = n, m
    while (i, j) != (1, 1):
        c = cost[i - 1, j - 1]
        pen = penalty[i - 1, j - 1]
        here = D[i, j]
        if math.isclose(here, D[i - 1, j - 1] + config.wd * c + pen,
                        rel_tol=1e-12, abs_tol=1e-12):
            i, j = i - 1, j - 1
        elif math.isclose(here, D[i - 1, j] + config.wh * c + pen,
                          rel_tol=1e-12, abs_tol=1e-12):
            i = i - 1
        else:
            j = j - 1
        path.append((i - 1, j - 1))
    path.reverse()
    return total, path


@dataclass
class DistanceMatrix:
    """A symmetric labeled distance matrix."""

    labels: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        n = len(self.labels)
        if self.values.shape != (n, n):
            raise ContractError(f"distance matrix must be {n}x{n}")
        if len(set(self.labels)) != n:
            raise ContractError("distance matrix labels must be unique")
        if not np.allclose(self.values, self.values.T, atol=1e-9):
            raise ContractError("distance matrix must be symmetric")

    @property
    def n(self) -> int:
        return len(self.labels)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])


def pairwise_dtw(profiles: Mapping[str, Sequence[float]],
                 config: DtwConfig = DEFAULT_CONFIG) -> DistanceMatrix:
    """All-pairs DTW distances, symmetrized as (d(a,b) + d(b,a)) / 2.

    Labels are taken in sorted order so the matrix layout does not depend
    on dict insertion order.
    """
    labels = sorted(profiles)
    if len(labels) < 2:
        raise SampleTooSmallError("pairwise DTW needs at least 2 profiles")
    arrays = [np.asarray(profiles[lab], dtype=np.float64) for lab in labels]
    n = len(labels)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            ab = dtw_distance(arrays[i], arrays[j], config)
            ba = dtw_distance(arrays[j], arrays[i], config)
            values[i, j] = values[j, i] = 0.5 * (ab + ba)
    return DistanceMatrix(labels, values)


@dataclass(frozen=True)
class Merge:
    step: int
    cluster_a: str
    cluster_b: str
    height: float


@dataclass
class ClusterReport:
    """Flat clustering cut from an average-linkage merge sequence.

    ``assignment`` maps each original label to a cluster id 1..k; ids are
    ordered by each cluster's smallest member label. ``merges`` holds the
    full merge sequence down to one cluster, clusters being named by their
    sorted members joined with '+'.
    """

    k: int
    labels: list[str]
    assignment: dict[str, int]
    merges: list[Merge]

    def members(self, cluster_id: int) -> list[str]:
        return sorted(lab for lab, c in self.assignment.items() if c == cluster_id)


def _cluster_name(members: frozenset[str]) -> str:
    return "+".join(sorted(members))


def agglomerative_cluster(dist: DistanceMatrix, k: int) -> ClusterReport:
    """Average-linkage agglomerative clustering cut at k clusters.

    The distance between clusters is the unweighted mean of all original
    cross-pair distances. Merge ties pick the pair whose (sorted) name pair
    is lexicographically smallest, which pins the dendrogram down for tied
    inputs.
    """
    n = dist.n
    if not 1 <= k <= n:
        raise ContractError(f"k must be in 1..{n}, got {k}")
    index = {lab: i for i, lab in enumerate(dist.labels)}
    clusters: list[frozenset[str]] = [frozenset([lab]) for lab in dist.labels]
    merges: list[Merge] = []
    cut: list[frozenset[str]] | None = [set(c) for c in clusters] if k == n else None

    def linkage(a: frozenset[str], b: frozenset[str]) -> float:
        rows = [index[x] for x in a]
        cols = [index[y] for y in b]
        return float(dist.values[np.ix_(rows, cols)].mean())

    step = 0
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                h = linkage(clusters[i], clusters[j])
                names = tuple(sorted((_cluster_name(clusters[i]), _cluster_name(clusters[j]))))
                key = (h, names)
                if best is None or key < best[0]:
                    best = (key, i, j)
        (h, names), i, j = best
        step += 1
        merges.append(Merge(step, names[0], names[1], h))
        merged = clusters[i] | clusters[j]
        clusters = [c for idx, c in enumerate(clusters) if idx not in (i, j)]
        clusters.append(merged)
        if len(clusters) == k:
            cut = [set(c) for c in clusters]
    ordered = sorted(cut, key=lambda c: min(c))
    assignment = {lab: cid for cid, members in enumerate(ordered, start=1) for lab in members}
    return ClusterReport(k, list(dist.labels), assignment, merges)


def silhouette(dist: DistanceMatrix, assignment: Mapping[str, int]) -> tuple[dict[str, float], float]:
    """Silhouette score per sample plus the overall mean.

    a(i) is the mean distance to the sample's own cluster (excluding
    itself), b(i) the smallest mean distance to any other cluster. Samples
    in singleton clusters score 0, as does the a == b case; with a single
    cluster overall every score is 0.
    """
    if set(assignment) != set(dist.labels):
        raise ContractError("assignment must cover exactly the matrix labels")
    members: dict[int, list[int]] = {}
    for lab, cid in assignment.items():
        members.setdefault(cid, []).append(dist.labels.index(lab))
    scores: dict[str, float] = {}
    for lab in dist.labels:
        i = dist.labels.index(lab)
        own = assignment[lab]
        own_rows = [r for r in members[own] if r != i]
        if not own_rows or len(members) == 1:
            scores[lab] = 0.0
            continue
        a = float(dist.values[i, own_rows].mean())
        b = min(float(dist.values[i, rows].mean())
                for cid, rows in members.items() if cid != own)
        denom = max(a, b)
        scores[lab] = 0.0 if denom == 0 or a == b else (b - a) / denom
    mean = sum(scores.values()) / len(scores)
    return scores, float(mean)


def _centered_distances(x: np.ndarray) -> np.ndarray:
    d = np.abs(x[:, None] - x[None, :])
    row = d.mean(axis=1, keepdims=True)
    col = d.mean(axis=0, keepdims=True)
    return d - row - col + d.mean()


def dcor(x: Sequence[float], y: Sequence[float]) -> float:
    """Distance correlation between two equal-length 1-D samples.

    Pairwise absolute-difference matrices are double-centered; dcor is
    dCov/sqrt(dVarX*dVarY), clamped to [0, 1]. A constant sample has zero
    distance variance and scores 0 against anything.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.size != ya.size:
        raise ContractError("dcor inputs must have equal length")
    if xa.size < 2:
        raise SampleTooSmallError(f"dcor needs at least 2 values, got {xa.size}")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise ContractError("dcor inputs must be finite")
    A = _centered_distances(xa)
    B = _centered_distances(ya)
    return _dcor_from_centered(A, B)


def _dcor_from_centered(A: np.ndarray, B: np.ndarray) -> float:
    a2 = float((A * A).mean())
    b2 = float((B * B).mean())
    if a2 <= 0.0 or b2 <= 0.0:
        return 0.0
    ab = float((A * B).mean())
    if ab <= 0.0:
        return 0.0
    return min(1.0, math.sqrt(ab / math.sqrt(a2 * b2)))


@dataclass(frozen=True)
class DcorResult:
    dcor: float
    p_value: float
    n_perm: int


def dcor_permutation_test(x: Sequence[float], y: Sequence[float],
                          n_perm: int = 199,
                          seed: int | Sequence[int] = 0) -> DcorResult:
    """Permutation p-value for dcor(x, y).

    y is permuted ``n_perm`` times with a seeded generator; the p-value is
    (1 + #{dcor_perm >= dcor_observed}) / (n_perm + 1), so it can never be
    exactly zero. Fewer than 99 permutations would put the resolution above
    the usual 0.05 working level, so that is the allowed minimum.
    """
    if n_perm < 99:
        raise ContractError(f"n_perm must be at least 99, got {n_perm}")
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.size != ya.size:
        raise ContractError("dcor inputs must have equal length")
    if xa.size < 2:
        raise SampleTooSmallError(f"dcor needs at least 2 values, got {xa.size}")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise ContractError("dcor inputs must be finite")
    A = _centered_distances(xa)
    B = _centered_distances(ya)
    observed = _dcor_from_centered(A, B)
    # Permuting y and re-centering equals permuting the centered matrix's
    # rows and columns together, so B is centered once up front.
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_perm):
        perm = rng.permutation(xa.size)
        if _dcor_from_centered(A, B[np.ix_(perm, perm)]) >= observed:
            hits += 1
    return DcorResult(observed, (1 + hits) / (n_perm + 1), n_perm)


def write_distance_csv(path: str | Path, dist: DistanceMatrix) -> None:
    """Write a labeled distance matrix; first column holds the row label."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + dist.labels)
        for i, lab in enumerate(dist.labels):
            writer.writerow([lab] + [fmt(float(v)) for v in dist.values[i]])


def read_distance_csv(path: str | Path) -> DistanceMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(f.strip() for f in row)]
    if not rows:
        raise EmptyInputError(f"no distance rows found in {path}")
    header = rows[0]
    if header[0].strip() != "label":
        raise ParseError("distance matrix header must start with 'label'", 1)
    labels = [f.strip() for f in header[1:]]
    n = len(labels)
    values = np.zeros((n, n))
    if len(rows) - 1 != n:
        raise ParseError(f"expected {n} data rows, got {len(rows) - 1}")
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise ParseError(f"expected {n + 1} fields, got {len(row)}", r)
        if row[0].strip() != labels[r - 2]:
            raise ParseError(f"row label {row[0]!r} does not match column order", r)
        try:
            values[r - 2] = [parse_float(f) for f in row[1:]]
        except ValueError:
            raise ParseError("malformed distance", r) from None
    return DistanceMatrix(labels, values)
