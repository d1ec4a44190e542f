import random

import pytest

from coarse_embed.covers import (Cover, balls_cover, certified_lebesgue,
                                 check_pullback_inequalities, cover_stats,
                                 delta_consistency_report, extend_by_cosets,
                                 eval_step, interval_cover, lebesgue_condition,
                                 map_compression, mesh, multiplicity,
                                 pullback_cover, set_diameter,
                                 set_diameter_bounds, type_function_upper)
from coarse_embed.errors import ContractViolation, CoverageError
from coarse_embed.lamplighter import lamp_window, lamp_coordinates, block_window
from coarse_embed.lattice import canonical_spec, zk_cover
from coarse_embed.spaces import grid_space, lattice_window


def test_single_set_cover_stats():
    g = grid_space(2, 5)
    cover = Cover(g, [list(range(len(g)))], name="everything")
    st = cover_stats(cover)
    assert st.multiplicity == 1
    assert st.mesh == 20          # diameter of the window
    # every certifiable level holds, so the value is the window cap
    assert st.lebesgue == g.max_interior_radius() + 1
    assert st.lebesgue_truncated
    assert st.delta[2] == pytest.approx(st.lebesgue / 1.0)


def test_interval_cover_statistics(line_window):
    cover = interval_cover(line_window)
    st = cover_stats(cover)
    assert st.multiplicity == 2
    assert st.mesh == 2
    assert st.lebesgue == 1
    assert not st.lebesgue_truncated
    assert st.delta[1] == pytest.approx(1 / 2 ** 2)


def test_interval_cover_level_two_fails_at_odd_points(line_window):
    cover = interval_cover(line_window)
    witness = lebesgue_condition(cover, 2)
    assert witness is not None
    assert witness[0] % 2 != 0


def test_balls_cover_radius_half_gives_singletons():
    g = grid_space(1, 10)
    cover = balls_cover(g, 0.5)
    st = cover_stats(cover)
    assert st.multiplicity == 1
    assert st.mesh == 0


def test_balls_cover_on_plane():
    g = grid_space(2, 8)
    cover = balls_cover(g, 2)
    st = cover_stats(cover)
    assert st.multiplicity == 13        # lattice ball of radius 2
    assert st.mesh == 4
    assert st.lebesgue == 3             # open 3-ball is the closed 2-ball
    bound = 2 ** (2.0 / 1 - 1) * 13 ** (-2.0 / 1) * 4 ** (1 - 2 * 2 / 1.0)
    assert st.delta[1] >= bound         # polynomial-growth floor, p = 1


def test_coverage_error_carries_witness():
    g = grid_space(1, 3)
    with pytest.raises(CoverageError) as err:
        Cover(g, [[0, 1, 2]], name="partial").check_coverage()
    assert err.value.witness in g.points


def test_multiplicity_and_mesh_against_bruteforce():
    g = grid_space(2, 4)
    rng = random.Random(21)
    for _ in range(20):
        sets = []
        for _ in range(rng.randrange(3, 7)):
            size = rng.randrange(1, 12)
            sets.append(rng.sample(range(len(g)), size))
        cover = Cover(g, sets)
        mult, _ = multiplicity(cover)
        counts = [0] * len(g)
        for s in sets:
            for i in set(s):
                counts[i] += 1
        assert mult == max(counts)
        value, exact, _ = mesh(cover)
        assert exact
        brute = max(
            max((g.dist_i(i, j) for i in s for j in s), default=0) for s in sets)
        assert value == brute


def test_set_diameter_bounds_bracket_exact():
    g = grid_space(2, 6)
    rng = random.Random(5)
    ids = rng.sample(range(len(g)), 60)
    exact = set_diameter(g, ids)
    lo, up = set_diameter_bounds(g, ids, probes=4, probe_top=10)
    assert lo <= exact <= up


def test_certified_lebesgue_scan_cap():
    g = grid_space(2, 6)
    cover = Cover(g, [list(range(len(g)))])
    level, truncated = certified_lebesgue(cover, scan_cap=2)
    assert level == 2 and truncated


def test_map_compression_envelopes():
    pairs = [((0,), (d,)) for d in range(1, 9)]
    rho_minus, rho_plus = map_compression(
        pairs, lambda a, b: abs(a[0] - b[0]), lambda a, b: (a[0] - b[0]) % 3)
    assert all(v1 <= v2 for (_, v1), (_, v2) in zip(rho_minus, rho_minus[1:]))
    assert all(v1 <= v2 for (_, v1), (_, v2) in zip(rho_plus, rho_plus[1:]))
    for (d, lo), (_, hi) in zip(rho_minus, rho_plus):
        assert lo <= hi
    assert eval_step(rho_plus, 0.5, default=0) == 0


def test_pullback_identity_keeps_stats(small_grid):
    cover = balls_cover(small_grid, 2)
    pulled = pullback_cover(lambda p: p, small_grid, cover)
    st, st2 = cover_stats(cover), cover_stats(pulled)
    assert (st.lebesgue, st.multiplicity, st.mesh) == \
        (st2.lebesgue, st2.multiplicity, st2.mesh)


def test_pullback_through_grid_embedding_matches_direct(small_grid):
    # the pullback machinery reproduces the direct lattice cover when fed
    # the membership listing as an abstract cover of the image points
    direct, stats, spec = zk_cover(small_grid, 2, 1)
    rho = check_pullback_inequalities(
        lambda p: p, small_grid, direct,
        pullback_cover(lambda p: p, small_grid, direct),
        [(a, b) for a in small_grid.points[:40] for b in small_grid.points[:40] if a != b])
    assert rho["plus_ok"] and rho["minus_ok"]


def test_pullback_through_block_coordinates(ball10):
    # pull a grid cover back through the lamp-coordinate map of the block;
    # the canonical scale guarantees margin 2m around each closed cell, so
    # the certification survives the transfer to the subgroup window
    m = 2
    block = block_window(ball10, m)
    coords = {p: lamp_coordinates(p, m) for p in block.points}
    grid = lattice_window(sorted(set(coords.values())), 2 * m - 1,
                          "block coordinates m=2")
    cover_z, stats_z, _ = zk_cover(grid, 2 * m - 1, 2 * m,
                                   spec=canonical_spec(2 * m - 1, 2 * m),
                                   strict=False,
                                   mesh_bound=16 * m ** 3 - 4 * (m - 1))
    pulled = pullback_cover(lambda p: coords[p], block, cover_z)
    st = cover_stats(pulled)
    assert st.mesh <= 16 * m ** 3
    assert st.lebesgue >= 2 * m or st.lebesgue_truncated
    rng = random.Random(31)
    pairs = [(rng.choice(block.points), rng.choice(block.points)) for _ in range(300)]
    pairs = [(a, b) for a, b in pairs if a != b]
    rho = check_pullback_inequalities(lambda p: coords[p], block, cover_z,
                                      pulled, pairs)
    assert rho["plus_ok"] and rho["minus_ok"]


def test_extend_by_cosets_identity_when_window_is_block(ball8):
    m = 6   # central block swallows every lamp pattern of the radius-8 ball
    lamps = lamp_window(ball8)
    base = Cover(lamps, [list(range(len(lamps)))], name="one")
    extended = extend_by_cosets(base, m, lamps)
    assert len(extended) == 1
    assert sorted(extended.sets[0]) == sorted(base.sets[0])


def test_extend_by_cosets_preserves_mesh_and_multiplicity(ball8):
    m = 2
    lamps = lamp_window(ball8)
    block_labels = [p for p in lamps.points
                    if all(-m + 1 <= pos <= m - 1 for pos, _ in p[0])]
    block = lamps.subspace(block_labels, "block")
    cover = balls_cover(block, 2)
    st_in = cover_stats(cover)
    extended = extend_by_cosets(cover, m, lamps)
    st_out = cover_stats(extended)
    assert st_out.multiplicity == st_in.multiplicity
    assert st_out.mesh == st_in.mesh
    assert st_out.lebesgue <= min(st_in.lebesgue, 2 * m + 1)


def test_type_function_upper_monotone():
    window = grid_space(2, 15)

    def builder(L):
        try:
            cover, stats, _ = zk_cover(window, 2, L, strict=False)
        except ContractViolation:
            return None
        return cover, stats

    rows = type_function_upper(builder, [1, 2, 3])
    meshes = [s for _, s in rows]
    assert meshes == sorted(meshes)


def test_type_function_single_point_space():
    g = grid_space(1, 1).subspace([(0,)], "point", interior_radius=[0])

    def builder(L):
        cover = Cover(g, [[0]])
        return cover, cover_stats(cover)

    rows = type_function_upper(builder, [1, 2, 5])
    assert all(s == 0 for _, s in rows)


def test_cover_json_shape():
    import json
    g = grid_space(1, 5)
    cover = interval_cover(g)
    doc = json.loads(json.dumps(cover.to_json()))
    assert doc["space"] == g.window_tag
    assert all(isinstance(s, list) for s in doc["sets"])
    assert len(doc["family"]) == len(doc["sets"])
    rebuilt = Cover(g, doc["sets"])
    assert cover_stats(rebuilt).multiplicity == cover_stats(cover).multiplicity


def test_delta_consistency_rows():
    g = grid_space(1, 20)
    st = cover_stats(interval_cover(g))
    rows = delta_consistency_report(st, p_list=(1, 2))
    assert [r["p"] for r in rows] == [1, 2]
    for r in rows:
        assert r["mesh_growth_upper_at_L"] == float(st.mesh)
