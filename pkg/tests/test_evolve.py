import random

import pytest

from leveldiv import (
    CandidateCounts,
    Conv,
    DivergenceConfig,
    EvolutionConfig,
    FilterDims,
    FilterTooLargeError,
    FitnessEvaluator,
    Flip,
    GridEdit,
    LevelSet,
    SnippetTooWideError,
    TileAlphabet,
    TileGrid,
    conv_mutate,
    extract_distribution,
    fitness,
    flip_mutate,
    hill_climb,
    incremental_fitness_update,
    load_smb_level,
    merge_distributions,
    random_init,
    snippet_fitness,
)


def _training_set():
    grid = TileGrid((
        "----------",
        "---?------",
        "--XXX--<>-",
        "XXXXXXX[]X",
    ))
    return LevelSet.from_grids([("tiny", grid)])


def _small_config(**overrides):
    settings = dict(
        divergence=DivergenceConfig(dims=FilterDims(2, 2)),
        target_width=12,
        target_height=6,
        budget=120,
        mutation=Conv(),
        seed=9,
    )
    settings.update(overrides)
    return EvolutionConfig(**settings)


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(budget=0)
    with pytest.raises(FilterTooLargeError):
        EvolutionConfig(target_width=3)  # narrower than the default 4x4 filter
    with pytest.raises(FilterTooLargeError):
        EvolutionConfig(target_height=3)
    with pytest.raises(ValueError):
        Flip(rate=0.0)
    with pytest.raises(ValueError):
        Flip(rate=-1.0)


def test_random_init_properties():
    alpha = TileAlphabet.from_symbols("ab-")
    grid = random_init(alpha, 7, 4, random.Random(1))
    assert grid.width == 7 and grid.height == 4
    assert set(grid.cells) <= set(alpha.symbols)
    again = random_init(alpha, 7, 4, random.Random(1))
    assert grid == again


def test_flip_mutate_changes_cells_to_different_symbols():
    base = TileGrid.filled("a", 10, 10)
    alpha = TileAlphabet.from_symbols("abc")
    rng = random.Random(2)
    changed_totals = 0
    for _ in range(500):
        mutated = flip_mutate(base, 3.0, alpha, rng)
        diff = [
            (x, y)
            for y in range(10)
            for x in range(10)
            if mutated.cell(x, y) != base.cell(x, y)
        ]
        changed_totals += len(diff)
        for x, y in diff:
            assert mutated.cell(x, y) in ("b", "c")
    assert changed_totals > 0


def test_flip_mutate_mean_flip_count():
    base = TileGrid.filled("-", 30, 14)
    alpha = TileAlphabet.from_symbols("-Xo")
    rng = random.Random(3)
    applications = 10_000
    flips = 0
    for _ in range(applications):
        mutated = flip_mutate(base, 3.0, alpha, rng)
        flips += sum(
            1
            for y in range(14)
            for x in range(30)
            if mutated.cell(x, y) != "-"
        )
    mean = flips / applications
    assert 2.8 <= mean <= 3.2


def test_flip_mutate_uniform_over_other_symbols():
    base = TileGrid.filled("b", 1, 1)
    alpha = TileAlphabet.from_symbols("abc")
    rng = random.Random(4)
    seen = {"a": 0, "c": 0}
    for _ in range(4000):
        mutated = flip_mutate(base, 1.0, alpha, rng)  # rate 1 on a 1x1: always flips
        assert mutated.cell(0, 0) != "b"
        seen[mutated.cell(0, 0)] += 1
    ratio = seen["a"] / (seen["a"] + seen["c"])
    assert 0.45 < ratio < 0.55


def test_flip_mutate_singleton_alphabet_is_identity():
    base = TileGrid.filled("a", 5, 5)
    alpha = TileAlphabet.from_symbols("a")
    assert flip_mutate(base, 3.0, alpha, random.Random(5)) == base


def test_flip_mutate_rejects_bad_rate():
    base = TileGrid.filled("a", 5, 5)
    alpha = TileAlphabet.from_symbols("ab")
    with pytest.raises(ValueError):
        flip_mutate(base, 0.0, alpha, random.Random(6))


def test_conv_mutate_copies_a_training_window():
    training = _training_set()
    dims = FilterDims(2, 2)
    base = TileGrid.filled("-", 8, 5)
    rng = random.Random(7)
    for _ in range(200):
        mutated = conv_mutate(base, training, dims, rng)
        diff = [
            (x, y)
            for y in range(5)
            for x in range(8)
            if mutated.cell(x, y) != base.cell(x, y)
        ]
        if not diff:
            continue  # patch can equal what it overwrote
        xs = [x for x, _ in diff]
        ys = [y for _, y in diff]
        assert max(xs) - min(xs) < dims.width
        assert max(ys) - min(ys) < dims.height
        assert set(mutated.cells) <= set(training.alphabet.symbols) | {"-"}
    # a seeded draw reproduces exactly
    a = conv_mutate(base, training, dims, random.Random(8))
    b = conv_mutate(base, training, dims, random.Random(8))
    assert a == b


def test_conv_mutate_patch_contents_match_source():
    # with a single training level every patch must be one of its windows
    training = _training_set()
    grid = training.grids[0]
    dims = FilterDims(3, 2)
    windows = set()
    for y in range(grid.height - 1):
        for x in range(grid.width - 2):
            windows.add("".join(r[x : x + 3] for r in grid.rows[y : y + 2]))
    base = TileGrid.filled("#", 9, 6)
    rng = random.Random(9)
    for _ in range(100):
        mutated = conv_mutate(base, training, dims, rng)
        diff = [(x, y) for y in range(6) for x in range(9)
                if mutated.cell(x, y) != "#"]
        xs = {x for x, _ in diff}
        ys = {y for _, y in diff}
        # '#' never occurs in training patches, so the patch rectangle is exact
        assert len(xs) == 3 and len(ys) == 2
        x0, y0 = min(xs), min(ys)
        patch = "".join(
            "".join(mutated.cell(x0 + i, y0 + j) for i in range(3)) for j in range(2)
        )
        assert patch in windows


def test_conv_mutate_training_must_fit_filter():
    training = LevelSet.from_grids([("dot", TileGrid(("ab", "ba")))])
    base = TileGrid.filled("-", 8, 8)
    with pytest.raises(FilterTooLargeError):
        conv_mutate(base, training, FilterDims(3, 3), random.Random(10))


def test_candidate_counts_apply_and_undo():
    rng = random.Random(11)
    grid = random_init(TileAlphabet.from_symbols("ab-"), 9, 7, rng)
    dims = FilterDims(3, 2)
    state = CandidateCounts(grid, dims)
    original_rows = list(state.rows)
    original_counts = dict(state.counts)
    for _ in range(300):
        ew = rng.randint(1, 4)
        eh = rng.randint(1, 4)
        x = rng.randint(0, 9 - ew)
        y = rng.randint(0, 7 - eh)
        patch = tuple(
            "".join(rng.choice("ab-") for _ in range(ew)) for _ in range(eh)
        )
        undo = state.apply(GridEdit(x, y, patch))
        fresh = extract_distribution(state.grid(), dims)
        assert state.counts == fresh.counts
        assert state.total == fresh.total
        assert state.sorted_cells == sorted(state.counts)
        state.apply(undo)
        assert state.rows == original_rows
        assert state.counts == original_counts


def test_candidate_counts_rejects_out_of_bounds_edit():
    state = CandidateCounts(TileGrid.filled("a", 4, 4), FilterDims(2, 2))
    with pytest.raises(ValueError):
        state.apply(GridEdit(3, 0, ("bb",)))
    with pytest.raises(ValueError):
        state.apply(GridEdit(-1, 0, ("b",)))


def test_incremental_fitness_update_returns_state():
    state = CandidateCounts(TileGrid.filled("a", 4, 4), FilterDims(2, 2))
    out = incremental_fitness_update(state, GridEdit(0, 0, ("b",)))
    assert out is state
    assert state.grid().cell(0, 0) == "b"


def test_evaluator_matches_scratch_fitness():
    rng = random.Random(13)
    training = _training_set()
    dims = FilterDims(2, 2)
    config = DivergenceConfig(dims=dims, weight=0.3)
    p_dist = merge_distributions(
        [extract_distribution(g, dims) for g in training.grids]
    )
    state = CandidateCounts(
        random_init(training.alphabet, 10, 6, rng), dims
    )
    evaluator = FitnessEvaluator(p_dist, config, state.total)
    for _ in range(50):
        edit = GridEdit(
            rng.randint(0, 8), rng.randint(0, 4),
            (rng.choice(training.alphabet.symbols) * 2,),
        )
        state.apply(edit)
        scratch = fitness(p_dist, extract_distribution(state.grid(), dims), config)
        result = evaluator.result_of(state)
        assert evaluator.fitness_of(state) == scratch.fitness
        assert result.kl_p_q == scratch.kl_p_q
        assert result.kl_q_p == scratch.kl_q_p
        assert result.fitness == scratch.fitness


def test_evaluator_dims_guard():
    p_dist = extract_distribution(TileGrid.filled("a", 4, 4), FilterDims(2, 2))
    with pytest.raises(FilterTooLargeError):
        FitnessEvaluator(p_dist, DivergenceConfig(dims=FilterDims(3, 3)), 10)


def test_hill_climb_determinism():
    training = _training_set()
    first = hill_climb(training, _small_config())
    second = hill_climb(training, _small_config())
    assert first.best == second.best
    assert first.best_fitness == second.best_fitness
    assert [
        (e.evaluation_index, e.candidate_fitness, e.best_fitness_so_far)
        for e in first.trace
    ] == [
        (e.evaluation_index, e.candidate_fitness, e.best_fitness_so_far)
        for e in second.trace
    ]
    other = hill_climb(training, _small_config(seed=10))
    assert other.best != first.best


def test_hill_climb_trace_invariants():
    training = _training_set()
    for mutation in (Conv(), Flip(rate=3.0)):
        result = hill_climb(training, _small_config(mutation=mutation))
        trace = list(result.trace)
        assert len(trace) == 121  # initial entry plus one per evaluation
        assert [e.evaluation_index for e in trace] == list(range(121))
        best = trace[0].best_fitness_so_far
        assert trace[0].candidate_fitness == best
        for entry in trace:
            assert entry.best_fitness_so_far >= best
            best = entry.best_fitness_so_far
            assert entry.best_fitness_so_far >= entry.candidate_fitness
        assert result.best_fitness == trace[-1].best_fitness_so_far
        assert result.elapsed > 0.0


def test_hill_climb_result_matches_scratch_recompute():
    training = _training_set()
    for mutation in (Conv(), Flip(rate=3.0)):
        for accept_equal in (True, False):
            config = _small_config(mutation=mutation, accept_equal=accept_equal)
            result = hill_climb(training, config)
            dims = config.divergence.dims
            p_dist = merge_distributions(
                [extract_distribution(g, dims) for g in training.grids]
            )
            q_dist = extract_distribution(result.best, dims)
            scratch = fitness(p_dist, q_dist, config.divergence)
            assert result.best_fitness == scratch.fitness


def test_hill_climb_target_dims():
    training = _training_set()
    result = hill_climb(training, _small_config(target_width=15, target_height=9))
    assert result.best.width == 15
    assert result.best.height == 9
    # default height comes from the first training level
    result = hill_climb(training, _small_config(target_height=None, budget=5))
    assert result.best.height == training.grids[0].height


def test_hill_climb_alphabet_closure():
    training = _training_set()
    result = hill_climb(training, _small_config())
    assert set(result.best.cells) <= set(training.alphabet.symbols)


def test_hill_climb_singleton_alphabet_flip_stalls():
    # nothing to flip to: every candidate equals its parent
    training = LevelSet.from_grids([("flat", TileGrid.filled("-", 6, 6))])
    config = EvolutionConfig(
        divergence=DivergenceConfig(dims=FilterDims(2, 2)),
        target_width=6,
        target_height=6,
        budget=20,
        mutation=Flip(rate=3.0),
        seed=0,
    )
    result = hill_climb(training, config)
    assert result.best == TileGrid.filled("-", 6, 6)
    assert result.best_fitness == 0.0
    assert all(e.candidate_fitness == 0.0 for e in result.trace)


def test_hill_climb_training_must_fit_filter():
    training = LevelSet.from_grids([("dot", TileGrid(("ab", "ba")))])
    config = EvolutionConfig(
        divergence=DivergenceConfig(dims=FilterDims(3, 3)),
        target_width=8,
        target_height=8,
        budget=5,
    )
    with pytest.raises(FilterTooLargeError):
        hill_climb(training, config)


def test_snippet_fitness_mario(mario_1_1):
    training = LevelSet.from_grids([("mario-1-1", mario_1_1)])
    config = DivergenceConfig(dims=FilterDims(4, 4))
    rows = snippet_fitness(training, 30, config)
    assert len(rows) == mario_1_1.width - 30 + 1
    offsets = [offset for offset, _ in rows]
    assert offsets == list(range(200))
    # spot-check a few offsets against the direct computation
    p_dist = extract_distribution(mario_1_1, config.dims)
    for offset in (0, 57, 199):
        snippet = mario_1_1.crop(offset, 0, 30, mario_1_1.height)
        expected = fitness(p_dist, extract_distribution(snippet, config.dims), config)
        assert rows[offset][1] == expected.fitness


def test_snippet_fitness_multiple_levels():
    g1 = TileGrid.filled("a", 6, 3)
    g2 = TileGrid(("ababab", "bababa", "aaabbb"))
    training = LevelSet.from_grids([("one", g1), ("two", g2)])
    config = DivergenceConfig(dims=FilterDims(2, 2))
    rows = snippet_fitness(training, 4, config)
    assert len(rows) == 3 + 3
    assert [offset for offset, _ in rows] == [0, 1, 2, 0, 1, 2]


def test_snippet_fitness_errors(mario_1_1):
    training = LevelSet.from_grids([("mario-1-1", mario_1_1)])
    with pytest.raises(SnippetTooWideError):
        snippet_fitness(training, 300, DivergenceConfig(dims=FilterDims(4, 4)))
    with pytest.raises(FilterTooLargeError):
        snippet_fitness(training, 3, DivergenceConfig(dims=FilterDims(4, 4)))


def test_incremental_equals_scratch_under_mutation_stream():
    # shorter version of the full acceptance check, mixed flip and conv edits
    training = LevelSet.from_grids([("mario-1-1", load_smb_level("mario-1-1"))])
    dims = FilterDims(4, 4)
    config = DivergenceConfig(dims=dims)
    p_dist = extract_distribution(training.grids[0], dims)
    rng = random.Random(55)
    state = CandidateCounts(random_init(training.alphabet, 30, 14, rng), dims)
    evaluator = FitnessEvaluator(p_dist, config, state.total)
    from leveldiv.evolve import _conv_edit, _flip_edits

    for step in range(100):
        if step % 2:
            edits = _flip_edits(state.rows, 3.0, training.alphabet.symbols, rng)
        else:
            edits = [_conv_edit(30, 14, training, dims, rng)]
        for edit in edits:
            state.apply(edit)
        fast = evaluator.fitness_of(state)
        scratch_state = CandidateCounts(state.grid(), dims)
        scratch = evaluator.fitness_of(scratch_state)
        assert fast == scratch


def test_random_init_frequencies_near_uniform():
    # 10,000 cells over 11 symbols: each count within 5 binomial sigma of n/11
    alpha = TileAlphabet.from_symbols("-<>?EQSX[]o")
    grid = random_init(alpha, 100, 100, random.Random(3))
    joined = "".join(grid.rows)
    n = 100 * 100
    p = 1.0 / len(alpha.symbols)
    sigma = (n * p * (1.0 - p)) ** 0.5
    for symbol in alpha.symbols:
        assert abs(joined.count(symbol) - n * p) < 5.0 * sigma


def test_conv_mutate_filter_sized_candidate_is_a_training_window():
    training = _training_set()
    dims = FilterDims(2, 2)
    windows = extract_distribution(training.grids[0], dims).counts
    base = TileGrid.filled("#", 2, 2)
    for seed in range(20):
        out = conv_mutate(base, training, dims, random.Random(seed))
        assert "".join(out.rows) in windows


def test_candidate_counts_whole_grid_edit_matches_full_extraction():
    rng = random.Random(11)
    alpha = TileAlphabet.from_symbols("ab-")
    dims = FilterDims(2, 2)
    state = CandidateCounts(random_init(alpha, 9, 5, rng), dims)
    replacement = random_init(alpha, 9, 5, rng)
    state.apply(GridEdit(0, 0, replacement.rows))
    fresh = extract_distribution(replacement, dims)
    assert state.counts == fresh.counts
    assert state.total == fresh.total
    assert state.sorted_cells == sorted(fresh.counts)


def test_snippet_fitness_full_width_is_zero(mario_1_1):
    training = LevelSet.from_grids([("mario-1-1", mario_1_1)])
    rows = snippet_fitness(
        training, mario_1_1.width, DivergenceConfig(dims=FilterDims(4, 4))
    )
    assert len(rows) == 1
    assert rows[0][0] == 0
    assert rows[0][1] == 0.0


def test_snippet_fitness_proper_snippets_all_negative(mario_1_1):
    # every strict snippet omits some training patterns, so both terms
    # of the weighted divergence are positive
    training = LevelSet.from_grids([("mario-1-1", mario_1_1)])
    rows = snippet_fitness(training, 30, DivergenceConfig(dims=FilterDims(4, 4)))
    assert all(value < 0.0 for _, value in rows)
