"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Every tolerance is pinned here.  Criterion 4 exercises the advertised
plane-cover constants exactly as stated; its level-3 row is not reachable
by this construction family (see the analysis in the repository notes),
so that test documents the defect and is expected to fail honestly.
"""

import math
import random
import time
from fractions import Fraction

from coarse_embed.covers import (Cover, balls_cover, cover_stats,
                                 interval_cover, lebesgue_condition)
from coarse_embed.embeddings import (KernelField, build_embedding,
                                     compression_report, overlog_shape,
                                     shape_condition, weight_from_type)
from coarse_embed.errors import ContractViolation
from coarse_embed.kernels import (kernel_stats, mazur_map, p_norm, pou_kernel,
                                  pou_lipschitz_bound, pullback_kernel,
                                  tent_norm_floor, tent_profile,
                                  tree_kernel_tent)
from coarse_embed.lamplighter import (bfs_ball, block_window,
                                      lamp_coordinates, lamplighter_ball,
                                      word_length)
from coarse_embed.lattice import (LatticeCoverSpec, cell_contains,
                                  cell_contains_bruteforce, embed_grid_point,
                                  in_family_separation_bound, membership,
                                  zk_cover)
from coarse_embed.spaces import FiniteMetricSpace, grid_space, l1_dist, tree_ball
from coarse_embed.wreath import wreath_cover


def test_criterion_01_partition_of_unity_suite(announce):
    t0 = time.time()
    failures = []
    checked = []

    def check(name, cover, stats, p):
        kern = pou_kernel(cover, p)
        ks = kernel_stats(kern, min_interior=max(0, stats.lebesgue - 1), seed=0)
        bound = pou_lipschitz_bound(stats, p=p)
        if ks.norm_error > 1e-9:
            failures.append(f"{name} p={p}: norm error {ks.norm_error}")
        if ks.support_radius > stats.mesh:
            failures.append(f"{name} p={p}: support {ks.support_radius} > mesh {stats.mesh}")
        if ks.lipschitz > bound + 1e-9:
            failures.append(f"{name} p={p}: eps {ks.lipschitz} > {bound}")
        checked.append(f"{name}/p{p}")

    line = grid_space(1, 100)
    cov = interval_cover(line)
    st = cover_stats(cov)
    for p in (1, 2, 3):
        check("interval", cov, st, p)

    plane = grid_space(2, 40)
    cov = balls_cover(plane, 2)
    st = cover_stats(cov, scan_cap=4)
    for p in (1, 2, 3):
        check("balls", cov, st, p)

    for L in (1, 3):
        cover, stats, _ = zk_cover(plane, 2, L, strict=False)
        for p in (1, 2, 3):
            check(f"zk L={L}", cover, stats, p)

    elapsed = time.time() - t0
    ok = not failures and elapsed < 120
    announce(1, ok, elapsed, 120, f"{len(checked)} kernel checks; " + "; ".join(failures[:3]))
    assert not failures, failures
    assert elapsed < 120


def test_criterion_02_tree_tent_kernels(announce):
    t0 = time.time()
    tree = tree_ball(3, 12)
    failures = []
    for S in (2, 4, 8, 16):
        for p in (1, 2):
            kern = tree_kernel_tent(tree, S, p)
            ks = kernel_stats(kern, seed=0, sample_pairs=5000)
            if ks.lipschitz > 8.0 / S + 1e-9:
                failures.append(f"S={S} p={p}: eps {ks.lipschitz} > {8.0 / S}")
            if ks.norm_error > 1e-9:
                failures.append(f"S={S} p={p}: norm error {ks.norm_error}")
            raw = p_norm(tent_profile(S), p)
            if not raw > tent_norm_floor(S, p):
                failures.append(f"S={S} p={p}: profile norm {raw} below floor")
    elapsed = time.time() - t0
    ok = not failures and elapsed < 60
    announce(2, ok, elapsed, 60, "8 tent kernels" + ("; " + failures[0] if failures else ""))
    assert not failures, failures
    assert elapsed < 60


def test_criterion_03_voronoi_cover(announce):
    t0 = time.time()
    rng = random.Random(0)
    failures = []
    for n in (2, 4, 6):
        spec = LatticeCoverSpec.standard(n)
        mismatch = uncovered = 0
        max_mult = 0
        for _ in range(10_000):
            vec = [Fraction(rng.randrange(-6 * n, 6 * n), rng.choice((1, 2, 3, 4, 6, 8)))
                   for _ in range(n - 1)]
            vec.append(-sum(vec))
            x = tuple(vec)
            if cell_contains(x, 0) != cell_contains_bruteforce(x, 0):
                mismatch += 1
            found = membership(x, spec)
            if not found:
                uncovered += 1
            max_mult = max(max_mult, len(found))
        if mismatch:
            failures.append(f"n={n}: {mismatch} prefix/bruteforce mismatches")
        if uncovered:
            failures.append(f"n={n}: {uncovered} uncovered points")
        if max_mult > n:
            failures.append(f"n={n}: multiplicity {max_mult} > {n}")
        target = Fraction(1, n - 1)
        box = {2: 6, 4: 2, 6: 1}[n]     # the bound grows with the offset,
        import itertools                 # so small boxes hold the tight cases
        pts = []
        for combo in itertools.product(range(-box, box + 1), repeat=n - 1):
            last = -sum(combo)
            if abs(last) <= box:
                pts.append(tuple(combo) + (last,))
        pair_count = 0
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                delta = tuple(u - v for u, v in zip(a, b))
                pair_count += 1
                if in_family_separation_bound(delta) < target:
                    failures.append(f"n={n}: separation below {target} at {delta}")
                    break
        assert pair_count > 50
    elapsed = time.time() - t0
    ok = not failures and elapsed < 120
    announce(3, ok, elapsed, 120, "3 dimensions x 10000 samples"
             + ("; " + failures[0] if failures else ""))
    assert not failures, failures
    assert elapsed < 120


def test_criterion_04_plane_cover_type_bound(announce):
    t0 = time.time()
    window = grid_space(2, 40)
    results = []
    failures = []
    for L in (1, 3):
        try:
            cover, stats, spec = zk_cover(window, 2, L, strict=True)
            results.append(f"L={L}: lebesgue {stats.lebesgue}, mesh {stats.mesh}, "
                           f"mult {stats.multiplicity}")
        except ContractViolation as exc:
            failures.append(f"L={L}: {exc}")
    elapsed = time.time() - t0
    ok = not failures and elapsed < 60
    announce(4, ok, elapsed, 60,
             "; ".join(results + failures[:1])
             + ("  [known defect: the advertised mesh constant is unreachable; "
                "see notes]" if failures else ""))
    assert not failures, failures
    assert elapsed < 60


def test_criterion_05_lamplighter_length_formula(announce):
    t0 = time.time()
    depth = bfs_ball(8, certify=False)
    mismatches = [g for g, d in depth.items() if word_length(g) != d]
    elapsed = time.time() - t0
    ok = not mismatches and elapsed < 120
    announce(5, ok, elapsed, 120,
             f"{len(depth)} elements of the radius-8 ball, {len(mismatches)} mismatches")
    assert not mismatches
    assert elapsed < 120


def test_criterion_06_block_coordinate_sandwich(announce):
    t0 = time.time()
    ball = lamplighter_ball(10, certify=False)
    rng = random.Random(1)
    violations = []
    for m in (2, 3):
        block = block_window(ball, m)
        labels = block.points
        for _ in range(200):
            a, b = rng.choice(labels), rng.choice(labels)
            va, vb = lamp_coordinates(a, m), lamp_coordinates(b, m)
            l1 = sum(abs(x - y) for x, y in zip(va, vb))
            dk = block.dist(a, b)
            if not (dk - 4 * (m - 1) <= l1 <= dk):
                violations.append((m, a, b))
    elapsed = time.time() - t0
    ok = not violations and elapsed < 60
    announce(6, ok, elapsed, 60, f"400 pairs, {len(violations)} sandwich violations")
    assert not violations
    assert elapsed < 60


def test_criterion_07_tree_embedding_floor(announce):
    t0 = time.time()
    p, a = 2, 1.0
    tree = tree_ball(3, 14)
    levels = [2, 4, 8, 16]
    top = 32
    u = overlog_shape(a, p)
    curve = [(float(S), float(S)) for S in levels + [top]]
    weight = weight_from_type(u, curve, cutoff=float(levels[0]))
    field_levels = []
    for S in levels:
        kern = tree_kernel_tent(tree, S, p)
        ks = kernel_stats(kern, seed=0, sample_pairs=3000)
        field_levels.append((S, kern, ks.lipschitz))
    field = KernelField(field_levels, top=top)
    theta = build_embedding(field, weight, x0=(), p=p)
    dom = theta.domain
    rng = random.Random(3)
    sample = {dom.points[rng.randrange(len(dom))] for _ in range(130)}
    sample = sorted(sample, key=str)
    pairs = [(x, y) for i, x in enumerate(sample) for y in sample[i + 1:]]
    lip_bad = floor_bad = 0
    rows = []
    for x, y in pairs:
        d = dom.dist(x, y)
        if d == 0:
            continue
        e = theta.distance(x, y)
        rows.append((d, e))
        if e > theta.theoretical_C * d + 1e-6:
            lip_bad += 1
    report = compression_report(dom.dist, theta.distance, pairs,
                                theoretical_C=theta.theoretical_C)
    for d, lo in report.rho_minus:
        if lo < theta.floor(d) - 1e-6:
            floor_bad += 1
    elapsed = time.time() - t0
    ok = lip_bad == 0 and floor_bad == 0 and elapsed < 120
    announce(7, ok, elapsed, 120,
             f"{len(rows)} pairs, C={theta.theoretical_C:.4f}, "
             f"lipschitz violations {lip_bad}, floor violations {floor_bad}")
    assert lip_bad == 0 and floor_bad == 0
    assert elapsed < 120


def test_criterion_08_mazur_contraction(announce):
    t0 = time.time()
    rng = random.Random(4)
    dim = 16
    violations = 0
    for _ in range(10_000):
        f = [rng.gauss(0, 1) for _ in range(dim)]
        g = [rng.gauss(0, 1) for _ in range(dim)]
        nf, ng = p_norm(f, 2), p_norm(g, 2)
        f = [v / nf for v in f]
        g = [v / ng for v in g]
        mf, mg = mazur_map(f, 2, 1), mazur_map(g, 2, 1)
        d2 = p_norm([x - y for x, y in zip(f, g)], 2)
        d1 = p_norm([x - y for x, y in zip(mf, mg)], 1)
        if d1 > 2.0 * d2 + 1e-12:
            violations += 1
    elapsed = time.time() - t0
    ok = violations == 0 and elapsed < 30
    announce(8, ok, elapsed, 30, f"10000 unit pairs, {violations} violations")
    assert violations == 0
    assert elapsed < 30


def test_criterion_09_subspace_pullback(announce):
    t0 = time.time()
    grid = grid_space(2, 10)
    image = [embed_grid_point(z) for z in grid.points]
    rng = random.Random(6)
    extras = []
    bumps = [(Fraction(1, 3), Fraction(-1, 3), 0, 0),
             (0, 0, Fraction(1, 3), Fraction(-1, 3)),
             (Fraction(1, 5), Fraction(-1, 5), Fraction(2, 5), Fraction(-2, 5))]
    for _ in range(40):
        z = rng.choice(grid.points)
        bump = rng.choice(bumps)
        cand = tuple(c + b for c, b in zip(embed_grid_point(z), bump))
        if cand not in image and cand not in extras:
            extras.append(cand)
    points = image + extras
    rad = max(sum(abs(c) for c in pt) for pt in points)
    target = FiniteMetricSpace(points, l1_dist, "plane sample",
                               [rad - sum(abs(c) for c in pt) for pt in points],
                               dist_tag="l1-rational", kind="rational")
    spec = LatticeCoverSpec.standard(4, scale=2)
    cell_sets = {}
    for idx, y in enumerate(target.points):
        for key in membership(y, spec):
            cell_sets.setdefault(key, []).append(idx)
    cover = Cover(target, list(cell_sets.values()), name="plane cells")
    kern = pou_kernel(cover, 1, exact=True)
    pairs = []
    for _ in range(2000):
        x, y = rng.choice(grid.points), rng.choice(grid.points)
        if x != y:
            pairs.append((x, y))
    sigma, report = pullback_kernel(embed_grid_point, grid, kern, pairs=pairs)
    elapsed = time.time() - t0
    norm_ok = report["norm_error"] <= 1e-12
    contraction_ok = report["contraction_margin"] <= 0
    support_ok = report["support_ok"]
    ok = norm_ok and contraction_ok and support_ok and elapsed < 60
    announce(9, ok, elapsed, 60,
             f"norm err {float(report['norm_error']):.1e}, contraction margin "
             f"{float(report['contraction_margin']):.1e}, "
             f"rho_f(S(sigma))={float(report['rho_f_at_support']):.3g} "
             f"<= 3*{float(report['support_radius_xi']):.3g}")
    assert norm_ok and contraction_ok and support_ok
    assert elapsed < 60


def test_criterion_10_shape_integral_diagnostics(announce):
    t0 = time.time()
    ident = shape_condition(lambda t: t, 1, 2.0, math.e ** 20, subdivisions=64)
    u = overlog_shape(1.0, 2)
    coarse = shape_condition(u, 2, 3.0, math.e ** 45, subdivisions=64)
    fine = shape_condition(u, 2, 3.0, math.e ** 45, subdivisions=128)
    rel = abs(fine["value"] - coarse["value"]) / coarse["value"]
    elapsed = time.time() - t0
    checks = {
        "identity diverging": ident["verdict"] == "diverging" and ident["value"] > 10,
        "overlog converging": coarse["verdict"] == "converging",
        "tail below 1e-3": coarse["tail_estimate"] < 1e-3,
        "stable to 1e-2": rel < 1e-2,
    }
    ok = all(checks.values()) and elapsed < 10
    announce(10, ok, elapsed, 10,
             f"identity {ident['value']:.2f}, overlog {coarse['value']:.5f} "
             f"(tail {coarse['tail_estimate']:.1e}, refinement change {rel:.1e})")
    assert all(checks.values()), checks
    assert elapsed < 10


def test_criterion_11_lamplighter_cover_contract(announce):
    t0 = time.time()
    ball = lamplighter_ball(10, certify=False)
    cover, stats, detail = wreath_cover(ball, 1)
    coverage_ok = lebesgue_condition(cover, 1) is None
    elapsed = time.time() - t0
    checks = {
        "coverage": coverage_ok,
        "multiplicity<=96": stats.multiplicity <= 96,
        "lebesgue>=1": stats.lebesgue >= 1 or stats.lebesgue_truncated,
        "mesh<=36864": stats.mesh <= 36864,
    }
    ok = all(checks.values()) and elapsed < 300
    announce(11, ok, elapsed, 300,
             f"{len(ball)} elements, mult {stats.multiplicity}, "
             f"lebesgue {stats.lebesgue}, mesh <= {stats.mesh} "
             f"(witnessed {stats.mesh_witnessed}, exact={stats.mesh_exact})")
    assert all(checks.values()), checks
    assert elapsed < 300


def test_criterion_12_profile_shape_report(announce):
    t0 = time.time()
    p = 2
    rows = []
    grid = grid_space(2, 15)
    for L in (1, 2):
        try:
            cover, stats, _ = zk_cover(grid, 2, L, strict=False)
        except ContractViolation:
            continue
        kern = pou_kernel(cover, p)
        ks = kernel_stats(kern, seed=0)
        rows.append(("grid2", float(stats.mesh), ks.lipschitz))
    tree = tree_ball(3, 10)
    for S in (2, 4, 8, 16):
        kern = tree_kernel_tent(tree, S, p)
        ks = kernel_stats(kern, seed=0, sample_pairs=3000)
        rows.append(("tree", float(S), ks.lipschitz))
    ball = lamplighter_ball(5, certify=False)
    wreath_pts = []
    cover, stats, _ = wreath_cover(ball, 1, check=False)
    kern = pou_kernel(cover, p)
    ks = kernel_stats(kern, seed=0, sample_pairs=3000)
    wreath_pts.append((max(2.0, float(stats.mesh)), ks.lipschitz))
    rows.append(("wreath", float(stats.mesh), ks.lipschitz))
    fitted = max(e / (math.log(S) / S ** (1 / 3)) for S, e in wreath_pts)
    warnings = []
    for S, e in wreath_pts:
        if e > fitted * math.log(S) / S ** (1 / 3) + 1e-12:
            warnings.append(f"wreath point above fitted curve at S={S}")
    elapsed = time.time() - t0
    for w in warnings:
        print("warning:", w)
    ok = len(rows) >= 6       # curves emitted for all three spaces
    announce(12, ok, elapsed, 120,
             f"{len(rows)} profile rows, fitted C={fitted:.3f}, "
             f"warnings {len(warnings)} (non-assertive)")
    assert ok
