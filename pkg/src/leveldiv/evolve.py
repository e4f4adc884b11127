"""(1+1) evolutionary level generation driven by pattern-divergence fitness.

A single candidate grid is mutated, evaluated against the merged training
distribution, and replaced by its child whenever the child's fitness is no
worse. Candidate pattern counts are maintained incrementally: an edit only
recounts the windows that overlap it, and the resulting fitness is
bit-identical to a from-scratch recomputation because terms are produced by
the same expressions in the same sorted-pattern order.

Randomness comes from `random.Random` (Mersenne Twister); a fixed seed
reproduces a run exactly within this implementation. Draw order is documented
per operator so traces stay stable across refactors.
"""

from __future__ import annotations

import math
import random
import time
from bisect import bisect_left, insort
from dataclasses import dataclass, field

from .divergence import (
    DivergenceConfig,
    DivergenceResult,
    fitness,
    smoothed_prob,
    weighted_fitness,
)
from .errors import FilterTooLargeError, SnippetTooWideError
from .levels import LevelSet, TileAlphabet, TileGrid
from .patterns import (
    FilterDims,
    PatternDistribution,
    extract_distribution,
    merge_distributions,
    window_count,
)


@dataclass(frozen=True)
class Flip:
    """Resample random cells; `rate` is the expected number of changed tiles."""

    rate: float = 3.0

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError(f"flip rate must be > 0, got {self.rate}")


@dataclass(frozen=True)
class Conv:
    """Copy one filter-sized patch from a training level into the candidate."""


MutationKind = Flip | Conv


@dataclass(frozen=True)
class EvolutionConfig:
    """Settings of one hill-climb run.

    `target_height` of None means "same height as the first training level",
    resolved when the run starts.
    """

    divergence: DivergenceConfig = field(default_factory=DivergenceConfig)
    target_width: int = 30
    target_height: int | None = None
    budget: int = 10_000
    mutation: MutationKind = Conv()
    seed: int = 0
    accept_equal: bool = True

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        dims = self.divergence.dims
        if self.target_width < dims.width:
            raise FilterTooLargeError(
                f"target width {self.target_width} is narrower than the {dims} filter"
            )
        if self.target_height is not None and self.target_height < dims.height:
            raise FilterTooLargeError(
                f"target height {self.target_height} is shorter than the {dims} filter"
            )


@dataclass(frozen=True)
class TraceEntry:
    evaluation_index: int
    candidate_fitness: float
    best_fitness_so_far: float


@dataclass(frozen=True)
class Trace:
    """Fitness log: entry 0 is the initial candidate, then one entry per evaluation."""

    entries: tuple[TraceEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class EvolutionResult:
    best: TileGrid
    best_fitness: float
    trace: Trace
    elapsed: float


@dataclass(frozen=True)
class GridEdit:
    """Replacement rows for the rectangle whose top-left cell is (x, y)."""

    x: int
    y: int
    rows: tuple[str, ...]

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def height(self) -> int:
        return len(self.rows)


class CandidateCounts:
    """Window-pattern counts of a working grid, kept current under edits.

    Holds the mutable row strings plus the count map and its sorted key list;
    the sorted list exists so divergence sums can run in canonical order
    without re-sorting on every evaluation.
    """

    def __init__(self, grid: TileGrid, dims: FilterDims):
        self.dims = dims
        self.width = grid.width
        self.height = grid.height
        self.rows: list[str] = list(grid.rows)
        dist = extract_distribution(grid, dims)
        self.counts: dict[str, int] = dict(dist.counts)
        self.total = dist.total
        self.sorted_cells: list[str] = sorted(self.counts)

    def grid(self) -> TileGrid:
        return TileGrid(tuple(self.rows))

    def distribution(self) -> PatternDistribution:
        return PatternDistribution(self.dims, dict(self.counts), self.total)

    def apply(self, edit: GridEdit) -> GridEdit:
        """Apply `edit`, recount only windows overlapping it, return the undo edit."""
        x, y = edit.x, edit.y
        ew, eh = edit.width, edit.height
        if x < 0 or y < 0 or x + ew > self.width or y + eh > self.height:
            raise ValueError(
                f"edit {ew}x{eh}@({x},{y}) outside {self.width}x{self.height} grid"
            )
        fw, fh = self.dims.width, self.dims.height
        x_lo = max(0, x - fw + 1)
        x_hi = min(self.width - fw, x + ew - 1)
        y_lo = max(0, y - fh + 1)
        y_hi = min(self.height - fh, y + eh - 1)
        rows = self.rows
        counts = self.counts
        cells = self.sorted_cells
        for wy in range(y_lo, y_hi + 1):
            band = rows[wy : wy + fh]
            for wx in range(x_lo, x_hi + 1):
                key = "".join(r[wx : wx + fw] for r in band)
                count = counts[key]
                if count == 1:
                    del counts[key]
                    del cells[bisect_left(cells, key)]
                else:
                    counts[key] = count - 1
        undo_rows = tuple(rows[y + i][x : x + ew] for i in range(eh))
        for i, patch_row in enumerate(edit.rows):
            row = rows[y + i]
            rows[y + i] = row[:x] + patch_row + row[x + ew :]
        for wy in range(y_lo, y_hi + 1):
            band = rows[wy : wy + fh]
            for wx in range(x_lo, x_hi + 1):
                key = "".join(r[wx : wx + fw] for r in band)
                count = counts.get(key, 0)
                if count == 0:
                    insort(cells, key)
                counts[key] = count + 1
        return GridEdit(x, y, undo_rows)


def incremental_fitness_update(state: CandidateCounts, edit: GridEdit) -> CandidateCounts:
    """Fold `edit` into the cached counts; only overlapping windows are recounted."""
    state.apply(edit)
    return state


class FitnessEvaluator:
    """Fitness of evolving candidates against a fixed training distribution.

    The candidate's window total is fixed by its dimensions, so both smoothed
    estimates reduce to per-count lookup tables built once up front. Sums run
    in the same order and with the same expressions as kl_div, which makes the
    fast path bit-identical to the from-scratch one.
    """

    def __init__(
        self, training: PatternDistribution, config: DivergenceConfig, candidate_total: int
    ):
        if training.dims != config.dims:
            raise FilterTooLargeError(
                f"training distribution is {training.dims} but config expects {config.dims}"
            )
        self.config = config
        self.training = training
        eps = config.epsilon
        self.p_cells = sorted(training.counts)
        self.p_prime = [
            smoothed_prob(training.counts[c], training.total, eps) for c in self.p_cells
        ]
        self.log_p_prime = [math.log(v) for v in self.p_prime]
        self.q_prime_by_count = [
            smoothed_prob(c, candidate_total, eps) for c in range(candidate_total + 1)
        ]
        self.log_q_by_count = [math.log(v) for v in self.q_prime_by_count]
        self.log_p_by_count = {
            0: math.log(smoothed_prob(0, training.total, eps))
        }
        for c in set(training.counts.values()):
            self.log_p_by_count[c] = math.log(smoothed_prob(c, training.total, eps))

    def divergences(self, state: CandidateCounts) -> tuple[float, float]:
        """(kl_p_q, kl_q_p) of the candidate against the training distribution."""
        q_counts = state.counts
        get_q = q_counts.get
        log_q = self.log_q_by_count
        kl_p_q = 0.0
        for p_prime, log_p, cells in zip(self.p_prime, self.log_p_prime, self.p_cells):
            kl_p_q += p_prime * (log_p - log_q[get_q(cells, 0)])
        q_prime = self.q_prime_by_count
        get_p = self.training.counts.get
        log_p_by = self.log_p_by_count
        kl_q_p = 0.0
        for cells in state.sorted_cells:
            count = q_counts[cells]
            kl_q_p += q_prime[count] * (log_q[count] - log_p_by[get_p(cells, 0)])
        return kl_p_q, kl_q_p

    def fitness_of(self, state: CandidateCounts) -> float:
        kl_p_q, kl_q_p = self.divergences(state)
        return weighted_fitness(kl_p_q, kl_q_p, self.config.weight)

    def result_of(self, state: CandidateCounts) -> DivergenceResult:
        kl_p_q, kl_q_p = self.divergences(state)
        return DivergenceResult(
            kl_p_q, kl_q_p, weighted_fitness(kl_p_q, kl_q_p, self.config.weight)
        )


def random_init(
    alphabet: TileAlphabet, width: int, height: int, rng: random.Random
) -> TileGrid:
    """Uniform random grid over `alphabet`; one draw per cell in row-major order."""
    symbols = alphabet.symbols
    return TileGrid(
        tuple("".join(rng.choice(symbols) for _ in range(width)) for _ in range(height))
    )


def _flip_edits(
    rows: list[str], rate: float, symbols: tuple[str, ...], rng: random.Random
) -> list[GridEdit]:
    """Single-cell edits of one flip application; empty for singleton alphabets.

    Draw order: one rng.random() per cell in row-major order, plus one
    rng.randrange() per flipped cell.
    """
    n = len(symbols)
    if n < 2:
        return []
    height = len(rows)
    width = len(rows[0])
    prob = rate / (width * height)
    edits = []
    for y in range(height):
        row = rows[y]
        for x in range(width):
            if rng.random() < prob:
                current = row[x]
                # Uniform over the other n-1 symbols: collisions with the
                # current symbol map to the last one, which the draw skips.
                symbol = symbols[rng.randrange(n - 1)]
                if symbol == current:
                    symbol = symbols[n - 1]
                edits.append(GridEdit(x, y, (symbol,)))
    return edits


def flip_mutate(
    grid: TileGrid, rate: float, alphabet: TileAlphabet, rng: random.Random
) -> TileGrid:
    """Mutate each cell with probability rate/(width*height) to a different symbol.

    Returns a new grid; the input is untouched. With a single-symbol alphabet
    there is nothing to flip to, so the grid comes back unchanged.
    """
    if rate <= 0:
        raise ValueError(f"flip rate must be > 0, got {rate}")
    rows = list(grid.rows)
    for edit in _flip_edits(rows, rate, alphabet.symbols, rng):
        row = rows[edit.y]
        rows[edit.y] = row[: edit.x] + edit.rows[0] + row[edit.x + 1 :]
    return TileGrid(tuple(rows))


def _conv_edit(
    candidate_width: int,
    candidate_height: int,
    training: LevelSet,
    dims: FilterDims,
    rng: random.Random,
) -> GridEdit:
    """One convolutional mutation as an edit.

    Draw order: training level index, source x, source y, destination x,
    destination y, each uniform via rng.randrange().
    """
    window_count(candidate_width, candidate_height, dims)
    source = training.levels[rng.randrange(len(training.levels))][1]
    sx = rng.randrange(1 + source.width - dims.width)
    sy = rng.randrange(1 + source.height - dims.height)
    dx = rng.randrange(1 + candidate_width - dims.width)
    dy = rng.randrange(1 + candidate_height - dims.height)
    patch = tuple(
        source.rows[sy + i][sx : sx + dims.width] for i in range(dims.height)
    )
    return GridEdit(dx, dy, patch)


def conv_mutate(
    grid: TileGrid, training: LevelSet, dims: FilterDims, rng: random.Random
) -> TileGrid:
    """Copy a random filter-sized training patch to a random spot in `grid`.

    Training level, source corner and destination corner are each uniform.
    Returns a new grid; the input is untouched.
    """
    _check_training_fits(training, dims)
    edit = _conv_edit(grid.width, grid.height, training, dims, rng)
    rows = list(grid.rows)
    for i, patch_row in enumerate(edit.rows):
        row = rows[edit.y + i]
        rows[edit.y + i] = row[: edit.x] + patch_row + row[edit.x + edit.width :]
    return TileGrid(tuple(rows))


def _check_training_fits(training: LevelSet, dims: FilterDims) -> None:
    for name, grid in training:
        if grid.width < dims.width or grid.height < dims.height:
            raise FilterTooLargeError(
                f"training level {name} is {grid.width}x{grid.height}, "
                f"smaller than the {dims} filter"
            )


def hill_climb(training: LevelSet, config: EvolutionConfig) -> EvolutionResult:
    """Run the (1+1) climber: mutate, evaluate, keep the child when no worse.

    The training distribution is merged once up front; the initial candidate's
    evaluation is logged at trace index 0 and does not count against the
    budget. Rejected children are rolled back by applying the undo edits in
    reverse order.
    """
    start = time.perf_counter()
    dims = config.divergence.dims
    _check_training_fits(training, dims)
    height = (
        config.target_height
        if config.target_height is not None
        else training.grids[0].height
    )
    if height < dims.height:
        raise FilterTooLargeError(
            f"target height {height} is shorter than the {dims} filter"
        )
    p_dist = merge_distributions(
        [extract_distribution(grid, dims) for grid in training.grids]
    )
    rng = random.Random(config.seed)
    state = CandidateCounts(
        random_init(training.alphabet, config.target_width, height, rng), dims
    )
    evaluator = FitnessEvaluator(p_dist, config.divergence, state.total)
    parent_fitness = evaluator.fitness_of(state)
    best_fitness = parent_fitness
    entries = [TraceEntry(0, parent_fitness, best_fitness)]
    mutation = config.mutation
    accept_equal = config.accept_equal
    symbols = training.alphabet.symbols
    flip = isinstance(mutation, Flip)
    for index in range(1, config.budget + 1):
        if flip:
            edits = _flip_edits(state.rows, mutation.rate, symbols, rng)
        else:
            edits = [_conv_edit(state.width, state.height, training, dims, rng)]
        undos = [state.apply(edit) for edit in edits]
        child_fitness = evaluator.fitness_of(state)
        if child_fitness > parent_fitness or (
            accept_equal and child_fitness == parent_fitness
        ):
            parent_fitness = child_fitness
        else:
            for undo in reversed(undos):
                state.apply(undo)
        if child_fitness > best_fitness:
            best_fitness = child_fitness
        entries.append(TraceEntry(index, child_fitness, best_fitness))
    return EvolutionResult(
        state.grid(), parent_fitness, Trace(tuple(entries)), time.perf_counter() - start
    )


def snippet_fitness(
    training: LevelSet, snippet_width: int, config: DivergenceConfig
) -> list[tuple[int, float]]:
    """Fitness of every full-height training snippet of `snippet_width` tiles.

    Snippets slide one column at a time over each training level (levels in
    set order) and are scored against the merged training distribution, so
    they answer "how fit is the training data itself at this size".
    """
    dims = config.dims
    if snippet_width < dims.width:
        raise FilterTooLargeError(
            f"snippet width {snippet_width} is narrower than the {dims} filter"
        )
    _check_training_fits(training, dims)
    for name, grid in training:
        if snippet_width > grid.width:
            raise SnippetTooWideError(
                f"snippet width {snippet_width} exceeds level {name} "
                f"width {grid.width}"
            )
    p_dist = merge_distributions(
        [extract_distribution(grid, dims) for grid in training.grids]
    )
    results = []
    for _, grid in training:
        for offset in range(grid.width - snippet_width + 1):
            snippet = grid.crop(offset, 0, snippet_width, grid.height)
            q_dist = extract_distribution(snippet, dims)
            results.append((offset, fitness(p_dist, q_dist, config).fitness))
    return results
