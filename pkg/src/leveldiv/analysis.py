"""Corpus-level divergence tools.

Pairwise weighted-divergence matrices between levels, agglomerative clustering
with average linkage (plus dendrogram cutting and Newick export), and
mean-divergence tables comparing directories of generated levels against a
training set.
"""

from __future__ import annotations

import csv
import json
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

from .divergence import DivergenceConfig, kl_div
from .errors import (
    EmptyInputError,
    FilterTooLargeError,
    InvalidCharacterError,
    InvalidCutError,
    LevelIoError,
    NegativeDistanceError,
    RaggedRowsError,
)
from .levels import LevelSet, TileGrid, load_level
from .patterns import (
    FilterDims,
    PatternDistribution,
    extract_distribution,
    merge_distributions,
)

# Symmetrized entries may dip this far below zero before it is treated as a
# smoothing pathology rather than rounding noise.
_NEGATIVE_TOLERANCE = -1e-9


@dataclass(frozen=True)
class DistanceMatrix:
    """Weighted divergence d(i,j) = w*kl(i,j) + (1-w)*kl(j,i) between levels."""

    names: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    config: DivergenceConfig

    def __len__(self) -> int:
        return len(self.names)

    def symmetrized(self) -> list[list[float]]:
        """(d(i,j) + d(j,i)) / 2; identical to the raw values at w = 0.5."""
        n = len(self.names)
        return [
            [(self.values[i][j] + self.values[j][i]) / 2.0 for j in range(n)]
            for i in range(n)
        ]

    def write_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["level", *self.names])
        for name, row in zip(self.names, self.values):
            writer.writerow([name, *[repr(v) for v in row]])


@dataclass(frozen=True)
class DendrogramMerge:
    """One agglomeration step; ids < n are leaves, larger ids earlier merges."""

    cluster_a: int
    cluster_b: int
    height: float
    new_id: int


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[DendrogramMerge, ...]

    def newick(self) -> str:
        """Ultrametric Newick string; leaves sit at half the merge height."""
        n = len(self.leaves)
        if not self.merges:
            return f"{self.leaves[0]};"
        height = {i: 0.0 for i in range(n)}
        children: dict[int, tuple[int, int]] = {}
        for merge in self.merges:
            children[merge.new_id] = (merge.cluster_a, merge.cluster_b)
            height[merge.new_id] = merge.height

        def render(node: int, parent_height: float) -> str:
            length = parent_height / 2.0 - height[node] / 2.0
            if node < n:
                return f"{self.leaves[node]}:{length:.12g}"
            a, b = children[node]
            inner = f"({render(a, height[node])},{render(b, height[node])})"
            return f"{inner}:{length:.12g}"

        root = self.merges[-1].new_id
        a, b = children[root]
        return f"({render(a, height[root])},{render(b, height[root])});"

    def to_json(self) -> str:
        return json.dumps(
            {
                "leaves": list(self.leaves),
                "merges": [
                    {
                        "a": m.cluster_a,
                        "b": m.cluster_b,
                        "height": m.height,
                        "id": m.new_id,
                    }
                    for m in self.merges
                ],
                "newick": self.newick(),
            },
            indent=2,
        )


def _directed_row(
    args: tuple[int, list[PatternDistribution], float]
) -> list[float]:
    i, dists, epsilon = args
    return [
        0.0 if i == j else kl_div(dists[i], dists[j], epsilon)
        for j in range(len(dists))
    ]


def pairwise_matrix(
    levels: LevelSet, config: DivergenceConfig, jobs: int = 1
) -> DistanceMatrix:
    """Weighted divergence between every ordered level pair; zero diagonal.

    Each level's distribution is extracted once and both directed divergences
    are computed per unordered pair. `jobs` > 1 spreads rows over processes;
    results are assembled in order either way.
    """
    if len(levels) < 2:
        raise EmptyInputError("pairwise matrix needs at least 2 levels")
    dists = []
    for name, grid in levels:
        try:
            dists.append(extract_distribution(grid, config.dims))
        except FilterTooLargeError as exc:
            raise FilterTooLargeError(f"level {name}: {exc}") from exc
    n = len(dists)
    tasks = [(i, dists, config.epsilon) for i in range(n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            directed = list(pool.map(_directed_row, tasks))
    else:
        directed = [_directed_row(task) for task in tasks]
    w = config.weight
    values = tuple(
        tuple(
            0.0 if i == j else w * directed[i][j] + (1.0 - w) * directed[j][i]
            for j in range(n)
        )
        for i in range(n)
    )
    return DistanceMatrix(tuple(levels.names), values, config)


def average_linkage(matrix: DistanceMatrix) -> Dendrogram:
    """Agglomerate with unweighted pair-group average linkage.

    The matrix is symmetrized first; inter-cluster distance is the arithmetic
    mean over all cross pairs. Ties pick the earliest pair in current cluster
    order, so the merge sequence is deterministic.
    """
    n = len(matrix)
    if n < 2:
        raise EmptyInputError("clustering needs at least 2 leaves")
    sym = matrix.symmetrized()
    for i in range(n):
        for j in range(i + 1, n):
            if sym[i][j] < _NEGATIVE_TOLERANCE:
                raise NegativeDistanceError(
                    f"symmetrized distance {sym[i][j]!r} between "
                    f"{matrix.names[i]} and {matrix.names[j]} is negative"
                )
    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = sym[i][j]
    size = {i: 1 for i in range(n)}
    active = list(range(n))
    merges = []
    next_id = n
    while len(active) > 1:
        best = None
        best_a = best_b = -1
        for ai in range(len(active)):
            for aj in range(ai + 1, len(active)):
                a, b = active[ai], active[aj]
                value = dist[(a, b) if a < b else (b, a)]
                if best is None or value < best:
                    best, best_a, best_b = value, a, b
        new = next_id
        next_id += 1
        for c in active:
            if c == best_a or c == best_b:
                continue
            d_a = dist[(c, best_a) if c < best_a else (best_a, c)]
            d_b = dist[(c, best_b) if c < best_b else (best_b, c)]
            dist[(c, new)] = (size[best_a] * d_a + size[best_b] * d_b) / (
                size[best_a] + size[best_b]
            )
        size[new] = size[best_a] + size[best_b]
        active.remove(best_a)
        active.remove(best_b)
        active.append(new)
        merges.append(DendrogramMerge(best_a, best_b, best, new))
    return Dendrogram(tuple(matrix.names), tuple(merges))


def cut_dendrogram(dendrogram: Dendrogram, k: int) -> list[int]:
    """Labels per leaf after undoing the last k-1 merges.

    Labels are cluster indices in order of first leaf appearance, so leaf 0
    always gets label 0.
    """
    n = len(dendrogram.leaves)
    if not 1 <= k <= n:
        raise InvalidCutError(f"cannot cut {n} leaves into {k} clusters")
    parent: dict[int, int] = {}
    for merge in dendrogram.merges[: n - k]:
        parent[merge.cluster_a] = merge.new_id
        parent[merge.cluster_b] = merge.new_id
    labels: dict[int, int] = {}
    out = []
    for leaf in range(n):
        root = leaf
        while root in parent:
            root = parent[root]
        if root not in labels:
            labels[root] = len(labels)
        out.append(labels[root])
    return out


@dataclass(frozen=True)
class HeatmapCell:
    mean: float
    std: float
    count: int


@dataclass(frozen=True)
class HeatmapTable:
    """Mean weighted divergence per generator (row) and (filter, weight) column."""

    rows: tuple[str, ...]
    columns: tuple[tuple[FilterDims, float], ...]
    cells: tuple[tuple[HeatmapCell, ...], ...]
    skipped: tuple[int, ...]

    @staticmethod
    def column_name(dims: FilterDims, weight: float) -> str:
        return f"{dims}_{weight:g}"

    def write_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        header = ["generator"]
        for dims, weight in self.columns:
            name = self.column_name(dims, weight)
            header.extend([name, f"{name}_std", f"{name}_count"])
        writer.writerow(header)
        for name, row in zip(self.rows, self.cells):
            out = [name]
            for cell in row:
                out.extend([repr(cell.mean), repr(cell.std), cell.count])
            writer.writerow(out)


def _load_directory(directory: str | os.PathLike) -> tuple[str, list[TileGrid], int]:
    path = Path(directory)
    try:
        files = sorted(p for p in path.iterdir() if p.is_file())
    except OSError as exc:
        raise LevelIoError(path, exc) from exc
    grids = []
    skipped = 0
    for file in files:
        try:
            grids.append(load_level(file))
        except (EmptyInputError, RaggedRowsError, InvalidCharacterError, LevelIoError):
            skipped += 1
    if not grids:
        raise EmptyInputError(f"no parseable levels in directory {path}")
    return path.name, grids, skipped


def compare_sets(
    training: LevelSet,
    generated_dirs: Sequence[str | os.PathLike],
    filters: Sequence[FilterDims],
    weights: Sequence[float],
    epsilon: float = 1e-5,
    jobs: int = 1,
) -> HeatmapTable:
    """Score each directory of generated levels against the training set.

    For every (filter, weight) column the cell is the mean over the
    directory's levels of w*kl(P,Q) + (1-w)*kl(Q,P), with P the merged
    training distribution; std is population standard deviation and count the
    number of parsed levels. Unparseable files are skipped and tallied in
    `skipped`; a directory without any parseable level is an error.
    """
    if not generated_dirs:
        raise EmptyInputError("no generated-level directories given")
    if not filters or not weights:
        raise EmptyInputError("need at least one filter and one weight")
    training_dists = {
        dims: merge_distributions(
            [extract_distribution(grid, dims) for grid in training.grids]
        )
        for dims in filters
    }
    columns = tuple((dims, float(w)) for dims in filters for w in weights)
    tasks = [(d, training_dists, epsilon) for d in generated_dirs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            loaded = list(pool.map(_compare_one_directory, tasks))
    else:
        loaded = [_compare_one_directory(task) for task in tasks]
    rows = []
    cells = []
    skipped = []
    for name, directed, skip in loaded:
        row = []
        for dims, weight in columns:
            values = [
                weight * pq + (1.0 - weight) * qp for pq, qp in directed[dims]
            ]
            row.append(
                HeatmapCell(
                    statistics.fmean(values),
                    statistics.pstdev(values),
                    len(values),
                )
            )
        rows.append(name)
        cells.append(tuple(row))
        skipped.append(skip)
    return HeatmapTable(tuple(rows), columns, tuple(cells), tuple(skipped))


def _compare_one_directory(
    args: tuple[str | os.PathLike, dict[FilterDims, PatternDistribution], float]
) -> tuple[str, dict[FilterDims, list[tuple[float, float]]], int]:
    """Both directed divergences per level and filter for one directory."""
    directory, training_dists, epsilon = args
    name, grids, skipped = _load_directory(directory)
    directed: dict[FilterDims, list[tuple[float, float]]] = {}
    for dims, p in training_dists.items():
        pairs = []
        for grid in grids:
            q = extract_distribution(grid, dims)
            pairs.append((kl_div(p, q, epsilon), kl_div(q, p, epsilon)))
        directed[dims] = pairs
    return name, directed, skipped
