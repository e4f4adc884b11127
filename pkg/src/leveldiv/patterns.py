"""Sliding-window tile pattern extraction and empirical count distributions.

A pattern is the contents of a fixed-size window placed fully inside a grid
(stride 1, no wrap-around, no padding). Distributions map each distinct
pattern to its occurrence count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import DimsMismatchError, EmptyInputError, FilterTooLargeError
from .levels import TileGrid


@dataclass(frozen=True)
class FilterDims:
    """Window width and height in tiles."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"filter dims must be >= 1, got {self.width}x{self.height}")

    @classmethod
    def parse(cls, text: str) -> FilterDims:
        """Parse the "WxH" flag syntax, e.g. "4x4"."""
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"expected WxH filter syntax, got {text!r}")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError as exc:
            raise ValueError(f"expected WxH filter syntax, got {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"


@dataclass(frozen=True)
class Pattern:
    """One window's cells in row-major order."""

    dims: FilterDims
    cells: str

    def __post_init__(self) -> None:
        if len(self.cells) != self.dims.width * self.dims.height:
            raise ValueError(
                f"pattern cells length {len(self.cells)} != {self.dims.width}x{self.dims.height}"
            )

    @property
    def key(self) -> str:
        """Stable text key: dims header plus row-major cells."""
        return f"{self.dims}:{self.cells}"

    def row(self, y: int) -> str:
        w = self.dims.width
        return self.cells[y * w : (y + 1) * w]


def window_count(grid_width: int, grid_height: int, dims: FilterDims) -> int:
    """Number of window placements of `dims` inside a grid."""
    if dims.width > grid_width or dims.height > grid_height:
        raise FilterTooLargeError(
            f"filter {dims} does not fit in {grid_width}x{grid_height} grid"
        )
    return (1 + grid_width - dims.width) * (1 + grid_height - dims.height)


@dataclass(frozen=True)
class PatternDistribution:
    """Occurrence counts of all window patterns of one size.

    `counts` maps row-major cell strings to counts >= 1; `total` is the
    number of windows counted (sum of counts).
    """

    dims: FilterDims
    counts: dict[str, int]
    total: int

    @property
    def distinct(self) -> int:
        return len(self.counts)

    def count(self, cells: str) -> int:
        return self.counts.get(cells, 0)

    def pattern(self, cells: str) -> Pattern:
        return Pattern(self.dims, cells)

    def sorted_cells(self) -> list[str]:
        """Cell strings in the canonical (lexicographic) summation order."""
        return sorted(self.counts)

    def __contains__(self, cells: str) -> bool:
        return cells in self.counts


def extract_distribution(grid: TileGrid, dims: FilterDims) -> PatternDistribution:
    """Count every window of `dims` in `grid` (stride 1, windows fully inside)."""
    total = window_count(grid.width, grid.height, dims)
    fw, fh = dims.width, dims.height
    counts: dict[str, int] = {}
    rows = grid.rows
    for y in range(grid.height - fh + 1):
        band = rows[y : y + fh]
        for x in range(grid.width - fw + 1):
            key = "".join(row[x : x + fw] for row in band)
            counts[key] = counts.get(key, 0) + 1
    return PatternDistribution(dims, counts, total)


def merge_distributions(dists: Sequence[PatternDistribution]) -> PatternDistribution:
    """Pattern-wise sum of counts; all inputs must share filter dims."""
    if not dists:
        raise EmptyInputError("no distributions to merge")
    dims = dists[0].dims
    counts: dict[str, int] = {}
    total = 0
    for dist in dists:
        if dist.dims != dims:
            raise DimsMismatchError(f"cannot merge {dist.dims} into {dims} distribution")
        for cells, count in dist.counts.items():
            counts[cells] = counts.get(cells, 0) + count
        total += dist.total
    return PatternDistribution(dims, counts, total)


def frequency_report(dist: PatternDistribution) -> list[tuple[Pattern, int]]:
    """Patterns from most to least frequent; ties broken by cell string."""
    ordered = sorted(dist.counts.items(), key=lambda item: (-item[1], item[0]))
    return [(Pattern(dist.dims, cells), count) for cells, count in ordered]


def write_frequency_csv(dist: PatternDistribution, stream: IO[str]) -> None:
    """CSV export of a frequency report: pattern_key,count."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["pattern_key", "count"])
    for pattern, count in frequency_report(dist):
        writer.writerow([pattern.key, count])


def distributions_for(
    grids: Iterable[TileGrid], dims: FilterDims
) -> list[PatternDistribution]:
    return [extract_distribution(grid, dims) for grid in grids]
