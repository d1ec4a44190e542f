"""Covers of finite metric windows and their measured statistics.

Lebesgue numbers use the open-ball convention: the Lebesgue number at a
point is the largest r such that the open r-ball around it lies inside
some cover set.  On integer metrics the open r-ball is the closed
(r-1)-ball, so the certified condition at level r reads: every point
whose interior radius is at least r-1 admits a set containing its closed
(r-1)-ball.  The reported Lebesgue number is the largest r for which the
condition holds, capped at 1 + max interior radius; when the cap binds
the value is flagged as window-truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CoverageError, ContractViolation

MESH_PAIR_BUDGET = 30_000_000


class Cover:
    """A finite family of point sets over a FiniteMetricSpace.

    sets     list of tuples of point indices
    family   parallel list of family labels (hashable; None allowed)
    tags     parallel list of construction tags (e.g. lattice translate)
    """

    def __init__(self, space, sets, family=None, tags=None, name=""):
        self.space = space
        self.sets = [tuple(sorted(s)) for s in sets]
        self.frozen = [frozenset(s) for s in self.sets]
        self.family = list(family) if family is not None else [None] * len(self.sets)
        self.tags = list(tags) if tags is not None else [None] * len(self.sets)
        self.name = name
        if any(not s for s in self.sets):
            raise ValueError("empty cover set")
        self._membership = None

    def __len__(self):
        return len(self.sets)

    def membership(self):
        """point index -> list of set ids containing it (cached)."""
        if self._membership is None:
            mem = [[] for _ in range(len(self.space))]
            for sid, s in enumerate(self.sets):
                for i in s:
                    mem[i].append(sid)
            self._membership = mem
        return self._membership

    def check_coverage(self):
        for i, owners in enumerate(self.membership()):
            if not owners:
                raise CoverageError(
                    f"cover {self.name or '?'} misses point {self.space.points[i]}",
                    witness=self.space.points[i])
        return True

    def to_json(self):
        return {
            "space": self.space.window_tag,
            "sets": [list(s) for s in self.sets],
            "family": ["" if f is None else f for f in self.family],
        }


@dataclass
class CoverStats:
    """Measured statistics of a cover on its window.

    mesh is exact when mesh_exact is set; otherwise it is a certified
    upper bound and mesh_witnessed the largest diameter actually seen.
    """
    lebesgue: int
    lebesgue_truncated: bool
    multiplicity: int
    mesh: object            # int or Fraction
    delta: dict = field(default_factory=dict)   # p -> lebesgue / multiplicity^(2/p)
    n_sets: int = 0
    mesh_exact: bool = True
    mesh_witnessed: int = 0


def multiplicity(cover):
    mem = cover.membership()
    best_i = max(range(len(mem)), key=lambda i: len(mem[i]))
    return len(mem[best_i]), cover.space.points[best_i]


def set_diameter(space, point_indices, pair_budget=MESH_PAIR_BUDGET):
    """Exact diameter of one set.

    Grids use the signed-coordinate trick (l1 diameter from linear
    extremes).  Other spaces run a pairwise scan, pruned by the triangle
    inequality through a base point; the prune is exact, the budget only
    guards against pathological runtimes.
    """
    pts = [space.points[i] for i in point_indices]
    if len(pts) == 1:
        return 0
    if space.kind == "grid" and len(pts[0]) <= 8:
        # l1 diameter from the extremes of all signed coordinate sums
        k = len(pts[0])
        best = 0
        for mask in range(2 ** (k - 1)):
            signs = [1] + [1 if (mask >> b) & 1 else -1 for b in range(k - 1)]
            vals = [sum(s * c for s, c in zip(signs, p)) for p in pts]
            best = max(best, max(vals) - min(vals))
        return best
    base = pts[0]
    ranked = sorted(pts, key=lambda p: space.dist(base, p), reverse=True)
    radii = [space.dist(base, p) for p in ranked]
    best = 0
    ops = 0
    for i in range(len(ranked)):
        if radii[i] * 2 <= best:
            break
        for j in range(i + 1, len(ranked)):
            if radii[i] + radii[j] <= best:
                break
            ops += 1
            if ops > pair_budget:
                raise ContractViolation("set diameter scan exceeded pair budget")
            d = space.dist(ranked[i], ranked[j])
            if d > best:
                best = d
    return best


def set_diameter_bounds(space, point_indices, probes=6, probe_top=40):
    """Certified (lower, upper) bounds for a set too large for exact scan.

    For any base b the diameter is at most the sum of the two largest
    distances from b (triangle inequality); the upper bound minimizes this
    over several probe bases.  The lower bound is the best distance seen
    among the extremal elements of every probe.
    """
    pts = [space.points[i] for i in point_indices]
    stride = max(1, len(pts) // probes)
    upper = None
    extremal = []
    for b in pts[::stride][:probes]:
        dists = sorted((space.dist(b, p), p) for p in pts)
        top = dists[-probe_top:]
        cand = dists[-1][0] + (dists[-2][0] if len(dists) > 1 else 0)
        upper = cand if upper is None else min(upper, cand)
        extremal.extend(p for _, p in top)
    lower = 0
    for i in range(len(extremal)):
        for j in range(i + 1, len(extremal)):
            d = space.dist(extremal[i], extremal[j])
            if d > lower:
                lower = d
    return lower, upper


def mesh(cover, exact_pair_cap=4_000_000):
    """Largest set diameter.  Returns (value, exact, witnessed_lower):
    sets whose pairwise scan would exceed the cap contribute certified
    upper bounds instead of exact values."""
    value = 0
    exact = True
    lower = 0
    for s in cover.sets:
        n = len(s)
        if n * (n - 1) // 2 <= exact_pair_cap:
            d = set_diameter(cover.space, s)
            value = max(value, d)
            lower = max(lower, d)
        else:
            lo, up = set_diameter_bounds(cover.space, s)
            value = max(value, up)
            lower = max(lower, lo)
            exact = False
    return value, exact, lower


def lebesgue_condition(cover, r):
    """Witness point violating the level-r condition, or None.

    Condition: every point with interior radius >= r-1 has the closed
    (r-1)-ball around it inside some cover set.
    """
    if r <= 0:
        return None
    space = cover.space
    mem = cover.membership()
    for i, p in enumerate(space.points):
        if space.interior_radius[i] < r - 1:
            continue
        if r == 1:
            if mem[i]:
                continue
            return p
        ball = space.closed_ball(p, r - 1)
        ball_ids = [space.index[q] for q in ball]
        if not any(all(q in cover.frozen[sid] for q in ball_ids) for sid in mem[i]):
            return p
    return None


def certified_lebesgue(cover, scan_cap=None):
    """Largest certified level, with the window-truncation flag.

    Returns (value, truncated).  truncated means the scan hit the cap
    (either 1 + max interior radius, or the caller's scan_cap) without
    finding a violation, so the window cannot certify more.
    """
    space = cover.space
    cap = space.max_interior_radius() + 1
    if scan_cap is not None:
        cap = min(cap, scan_cap)
    level = 0
    r = 1
    while r <= cap:
        if lebesgue_condition(cover, r) is not None:
            return level, False
        level = r
        r += 1
    return level, True


def cover_stats(cover, p_list=(1, 2, 3), scan_cap=None, check=True):
    if check:
        cover.check_coverage()
    leb, truncated = certified_lebesgue(cover, scan_cap=scan_cap)
    mult, _ = multiplicity(cover)
    s, s_exact, s_lower = mesh(cover)
    stats = CoverStats(lebesgue=leb, lebesgue_truncated=truncated,
                       multiplicity=mult, mesh=s, n_sets=len(cover),
                       mesh_exact=s_exact, mesh_witnessed=s_lower)
    for p in p_list:
        stats.delta[p] = float(leb) / float(mult) ** (2.0 / p)
    return stats


def delta_consistency_report(stats, p_list=(1, 2, 3)):
    """Witnessed instances relating the cover's statistics: the cover
    shows that a multiplicity-m family can reach Lebesgue level L with
    this mesh, so it witnesses both an upper bound on the mesh-growth
    function at L and a lower bound on delta_p at its own mesh.  Recorded
    for comparison across constructions; nothing here is an assertion."""
    rows = []
    for p in p_list:
        witness = stats.delta.get(p, float(stats.lebesgue) / float(stats.multiplicity) ** (2.0 / p))
        rows.append({
            "p": p,
            "lebesgue": stats.lebesgue,
            "multiplicity": stats.multiplicity,
            "mesh": float(stats.mesh),
            "delta_witness_at_mesh": witness,
            "mesh_growth_upper_at_L": float(stats.mesh),
        })
    return rows


# ---------------------------------------------------------------------------
# Constructions


def balls_cover(space, r):
    """One set per point: all window points within distance r of it.

    On integer metrics the closed r-ball equals the closed floor(r)-ball.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    import math
    rad = math.floor(r)
    sets = []
    tags = []
    for p in space.points:
        ball = space.closed_ball(p, rad)
        sets.append([space.index[q] for q in ball])
        tags.append(p)
    return Cover(space, sets, tags=tags, name=f"balls r={r}")


def interval_cover(space, length=3, step=2, anchor=-1):
    """Cover of a 1-dimensional grid window by integer intervals starting
    at anchor + step * Z.

    Default (length 3, step 2, anchor -1) is the classic multiplicity-2
    cover of the line by the sets {2c-1, 2c, 2c+1}.
    """
    xs = sorted(p[0] for p in space.points)
    lo, hi = xs[0], xs[-1]
    sets = []
    tags = []
    start = lo - (length - 1)
    c = anchor + ((start - anchor) // step) * step
    while c <= hi:
        pts = [(x,) for x in range(c, c + length) if lo <= x <= hi]
        ids = [space.index[p] for p in pts if p in space.index]
        if ids:
            sets.append(ids)
            tags.append(c)
        c += step
    return Cover(space, sets, tags=tags, name=f"intervals len={length} step={step}")


def map_compression(pairs, dist_x, dist_y):
    """Greatest non-decreasing minorant and least non-decreasing majorant
    relating source and target distances over the given pairs.

    Returns two step functions as sorted (source_distance, value) lists:
    rho_minus(t) = min target distance over pairs at source distance >= t,
    rho_plus(t)  = max target distance over pairs at source distance <= t.
    """
    rows = sorted((dist_x(a, b), dist_y(a, b)) for a, b in pairs)
    rho_plus = []
    running = None
    for d, e in rows:
        running = e if running is None else max(running, e)
        rho_plus.append((d, running))
    rho_minus = [None] * len(rows)
    running = None
    for i in range(len(rows) - 1, -1, -1):
        running = rows[i][1] if running is None else min(running, rows[i][1])
        rho_minus[i] = (rows[i][0], running)
    dedup_plus = {}
    for d, e in rho_plus:
        dedup_plus[d] = e
    dedup_minus = {}
    for d, e in rho_minus:
        if d not in dedup_minus:
            dedup_minus[d] = e
    return sorted(dedup_minus.items()), sorted(dedup_plus.items())


def eval_step(steps, t, default=0):
    """Value of a sorted (x, v) step list at the largest x <= t."""
    val = default
    for x, v in steps:
        if x <= t:
            val = v
        else:
            break
    return val


def pullback_cover(f, domain, cover, name=""):
    """Preimage cover: one set f^{-1}(U) per cover set, empties dropped."""
    target_index = cover.space.index
    mem = cover.membership()
    sets = {}
    for i, p in enumerate(domain.points):
        q = f(p)
        j = target_index.get(q)
        if j is None:
            raise CoverageError(f"image point {q} not in target window", witness=p)
        for sid in mem[j]:
            sets.setdefault(sid, []).append(i)
    out_sets, out_family, out_tags = [], [], []
    for sid in sorted(sets):
        out_sets.append(sets[sid])
        out_family.append(cover.family[sid])
        out_tags.append(cover.tags[sid])
    return Cover(domain, out_sets, family=out_family, tags=out_tags,
                 name=name or f"pullback({cover.name})")


def check_pullback_inequalities(f, domain, cover, pulled, pairs):
    """Measured form of the dilation/compression relations of an induced
    cover: rho_plus(L(f*U)) >= L(U) and rho_minus(S(f*U)) <= S(U)."""
    rho_minus, rho_plus = map_compression(
        pairs, domain.dist, lambda a, b: cover.space.dist(f(a), f(b)))
    st_pull = cover_stats(pulled, p_list=())
    st_orig = cover_stats(cover, p_list=())
    lhs_plus = eval_step(rho_plus, st_pull.lebesgue, default=0)
    lhs_minus = eval_step(rho_minus, st_pull.mesh, default=0)
    return {
        "rho_plus_at_pulled_lebesgue": lhs_plus,
        "orig_lebesgue": st_orig.lebesgue,
        "plus_ok": lhs_plus >= st_orig.lebesgue or st_pull.lebesgue_truncated,
        "rho_minus_at_pulled_mesh": lhs_minus,
        "orig_mesh": st_orig.mesh,
        "minus_ok": lhs_minus <= st_orig.mesh,
    }


def extend_by_cosets(cover, m, window):
    """Spread a cover of the central lamp block along block cosets.

    The window is a cursor-0 portion of a word-metric ball.  Each window
    element splits into its outside-the-block lamp pattern (the coset key)
    and its block part; the extended cover translates every cover set by
    each coset representative present in the window.  Distinct cosets are
    at least 2m+1 apart, so mesh and multiplicity are unchanged and the
    certified Lebesgue level is min(L(cover), 2m+1) up to truncation.
    """
    from .lamplighter import coset_key, block_part

    by_coset = {}
    for i, label in enumerate(window.points):
        by_coset.setdefault(coset_key(label, m), []).append(i)
    block_index = {p: i for i, p in enumerate(cover.space.points)}
    sets, family, tags = [], [], []
    for key, members in sorted(by_coset.items()):
        for sid, s in enumerate(cover.sets):
            blocks = cover.frozen[sid]
            ids = []
            for i in members:
                part = block_part(window.points[i], m)
                j = block_index.get(part)
                if j is not None and j in blocks:
                    ids.append(i)
            if ids:
                sets.append(ids)
                family.append(cover.family[sid])
                tags.append((key, cover.tags[sid]))
    return Cover(window, sets, family=family, tags=tags,
                 name=f"{cover.name}|cosets m={m}")


def type_function_upper(builder, L_list):
    """Measured mesh of the construction at each Lebesgue target, made
    non-decreasing.  builder(L) -> (cover, stats) or None when no
    construction is available at that L."""
    rows = []
    for L in L_list:
        built = builder(L)
        if built is None:
            raise ContractViolation(f"no construction available at L={L}")
        _, stats = built
        rows.append((L, stats.mesh))
    out = []
    best = None
    for L, s in rows:
        best = s if best is None else max(best, s)
        out.append((L, best))
    return out
