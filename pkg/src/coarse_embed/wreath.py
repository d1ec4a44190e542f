"""Covers of lamplighter windows composed from line and lamp-block covers.

The pipeline mirrors the normal-subgroup composition: cover the cursor
line by overlapping intervals (multiplicity 2), cover the central lamp
block through its grid coordinates by a pullback lattice cover, spread
that over block cosets, and take the common refinement of the interval
preimages with the lamp-part preimages.  All statistics are then measured
on the window; the advertised contract at target level L with block
half-width m = 12 L is multiplicity at most 96 L, certified Lebesgue
level at least L, and mesh at most 36864 L^3.
"""

from __future__ import annotations

import math

from .covers import Cover, cover_stats, extend_by_cosets
from .errors import ContractViolation
from .lamplighter import coset_key, lamp_coordinates, lamp_parts_window
from .lattice import canonical_spec, zk_cover
from .spaces import lattice_window


def line_interval_cover_sets(lo, hi, L):
    """Intervals of length 4L stepping by 2L, two interleaved families,
    restricted to [lo, hi]: multiplicity 2, Lebesgue level L+1 on the line."""
    sets = []
    c = (lo - 4 * L) - ((lo - 4 * L) % (2 * L))
    while c <= hi:
        cells = [x for x in range(c, c + 4 * L) if lo <= x <= hi]
        if cells:
            sets.append((c, (c // (2 * L)) % 2, cells))
        c += 2 * L
    return sets


def block_cover(window, m, L_target, mesh_budget=None):
    """Cover of the cursor-0 portion of a ball window through the block
    coordinates.

    The block elements embed into the grid of lamp vectors; the lattice
    pullback cover of that sparse grid window comes back through the
    coordinate map, and coset translation spreads it over the rest of the
    cursor-0 portion.  Returns (cover of the cursor-0 window, inner stats).
    """
    k = 2 * m - 1
    lamp_w = lamp_parts_window(window)
    block_labels = [p for p in lamp_w.points if not coset_key(p, m)]
    if not block_labels:
        raise ContractViolation("window has no block elements")
    block_space = lamp_w.subspace(block_labels, f"{lamp_w.window_tag}|block m={m}")
    coords = {p: lamp_coordinates(p, m) for p in block_labels}
    grid_pts = sorted(set(coords.values()))
    grid = lattice_window(grid_pts, k, f"lamp coordinates m={m}")
    spec = canonical_spec(k, L_target)
    cover_z, stats_z, _ = zk_cover(grid, k, L_target, spec=spec,
                                   mesh_bound=mesh_budget, strict=False,
                                   p_list=())
    grid_index = grid.index
    mem = cover_z.membership()
    sets = {}
    for i, label in enumerate(block_space.points):
        j = grid_index[coords[label]]
        for sid in mem[j]:
            sets.setdefault(sid, []).append(i)
    keys = sorted(sets)
    inner = Cover(block_space, [sets[s] for s in keys],
                  family=[cover_z.family[s] for s in keys],
                  tags=[cover_z.tags[s] for s in keys],
                  name=f"block cover m={m}")
    extended = extend_by_cosets(inner, m, lamp_w)
    return extended, inner, stats_z


def wreath_cover(window, L, m=None, check=True):
    """Composed cover of a lamplighter ball window at target level L.

    Returns (cover, stats, detail).  With check=True the contract
    (coverage, multiplicity <= 96 L, certified level >= L, mesh <=
    36864 L^3) is verified and a ContractViolation carries the witness
    if the measured statistics break it.
    """
    if L < 1:
        raise ValueError("target level must be at least 1")
    if m is None:
        m = 12 * math.ceil(L)
    lamp_target = 2 * m
    mesh_budget = 16 * m ** 3 - 4 * (m - 1)
    lamp_cov, inner, stats_z = block_cover(window, m, lamp_target,
                                           mesh_budget=mesh_budget)

    cursors = [label[1] for label in window.points]
    intervals = line_interval_cover_sets(min(cursors), max(cursors), math.ceil(L))
    lamp_index = {p: i for i, p in enumerate(lamp_cov.space.points)}

    lamp_part_sets = lamp_cov.frozen
    sets, family, tags = [], [], []
    for c0, fam, cells in intervals:
        cell_set = set(cells)
        bucket = {}
        for i, label in enumerate(window.points):
            if label[1] not in cell_set:
                continue
            part = (label[0], 0)
            j = lamp_index.get(part)
            if j is None:
                continue
            for sid in lamp_cov.membership()[j]:
                bucket.setdefault(sid, []).append(i)
        for sid in sorted(bucket):
            sets.append(bucket[sid])
            family.append((fam, lamp_cov.family[sid]))
            tags.append((c0, lamp_cov.tags[sid]))
    cover = Cover(window, sets, family=family, tags=tags,
                  name=f"wreath cover L={L} m={m}")

    stats = cover_stats(cover, p_list=(1, 2, 3), scan_cap=max(2, int(L) + 2))
    detail = {
        "m": m,
        "lamp_target": lamp_target,
        "grid_stats": stats_z,
        "multiplicity_bound": 96 * L,
        "mesh_bound": 36864 * L ** 3,
    }
    if check:
        problems = []
        if stats.multiplicity > 96 * L:
            problems.append(f"multiplicity {stats.multiplicity} > {96 * L}")
        if stats.lebesgue < L and not stats.lebesgue_truncated:
            problems.append(f"certified level {stats.lebesgue} < {L}")
        if stats.mesh > 36864 * L ** 3:
            problems.append(f"mesh {stats.mesh} > {36864 * L ** 3}")
        if problems:
            raise ContractViolation(
                "wreath cover contract: " + "; ".join(problems), witness=stats)
    return cover, stats, detail
