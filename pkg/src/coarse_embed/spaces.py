"""Finite windows of metric spaces with exact integer or rational distances.

Every space built here is a finite sample of an ambient space (a box in Z^k,
a truncated regular tree with a marked direction to infinity, a word-metric
ball, a rational point set in a zero-sum hyperplane).  Each point carries an
``interior_radius``: the largest r such that the ambient ball of radius r
around the point lies entirely inside the window.  Downstream statistics
(Lebesgue numbers, kernel Lipschitz constants) restrict themselves to
sufficiently interior points so that window truncation never fakes a result.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from fractions import Fraction

from .errors import guard_cap

_GRID_SHELL_CACHE = {}


class FiniteMetricSpace:
    """A finite point set with an exact metric and per-point interior radii.

    points            ordered sequence of hashable labels
    dist              callable (label, label) -> int | Fraction, exact
    window_tag        human-readable description of the window
    interior_radius   list, aligned with points
    geodesic          True if any two window points are joined by a geodesic
                      running inside the window (grids, truncated trees)
    dist_tag          recomputable-metric tag for JSON round trips
    neighbors         optional callable label -> iterable of adjacent window
                      labels (distance-1 moves), used for shells and edges
    """

    def __init__(self, points, dist, window_tag, interior_radius,
                 geodesic=False, dist_tag=None, neighbors=None, kind=None):
        self.points = list(points)
        self.index = {p: i for i, p in enumerate(self.points)}
        if len(self.index) != len(self.points):
            raise ValueError("duplicate point labels")
        self.dist = dist
        self.window_tag = window_tag
        self.interior_radius = list(interior_radius)
        self.geodesic = geodesic
        self.dist_tag = dist_tag
        self.neighbors = neighbors
        self.kind = kind

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, label):
        return label in self.index

    def dist_i(self, i, j):
        return self.dist(self.points[i], self.points[j])

    def radius_of(self, label):
        return self.interior_radius[self.index[label]]

    def max_interior_radius(self):
        return max(self.interior_radius) if self.points else 0

    def edge_pairs(self):
        """Index pairs at distance exactly 1 (deduplicated)."""
        if self.neighbors is not None:
            for i, p in enumerate(self.points):
                for q in self.neighbors(p):
                    j = self.index.get(q)
                    if j is not None and j > i:
                        yield i, j
        else:
            for i in range(len(self.points)):
                for j in range(i + 1, len(self.points)):
                    if self.dist_i(i, j) == 1:
                        yield i, j

    def shell(self, label, r):
        """Window points at distance exactly r from label.

        Grid and lamplighter windows intersect the true ambient shell with
        the window (correct on any subset of points); tree windows walk
        their unit edges, valid because the stored tree is closed under
        geodesics; anything else scans the window.
        """
        if r == 0:
            return [label]
        if self.kind == "grid":
            k = len(label)
            offs = _grid_shell_offsets(k, r)
            out = []
            for off in offs:
                q = tuple(a + b for a, b in zip(label, off))
                if q in self.index:
                    out.append(q)
            return out
        if self.kind == "lamplighter":
            from .lamplighter import translated_shell
            return [q for q in translated_shell(label, r) if q in self.index]
        if self.neighbors is not None and self.kind == "tree":
            return self._bfs_shell(label, r)
        return [q for q in self.points if self.dist(label, q) == r]

    def _bfs_shell(self, label, r):
        seen = {label}
        frontier = [label]
        for _ in range(r):
            nxt = []
            for p in frontier:
                for q in self.neighbors(p):
                    if q in self.index and q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return frontier

    def closed_ball(self, label, r):
        out = []
        for s in range(r + 1):
            out.extend(self.shell(label, s))
        return out

    def subspace(self, labels, window_tag=None, interior_radius=None):
        """Restriction to a subset of points, with the induced metric."""
        labels = list(labels)
        if interior_radius is None:
            interior_radius = [self.radius_of(p) for p in labels]
        return FiniteMetricSpace(
            labels, self.dist,
            window_tag or f"{self.window_tag}|subspace",
            interior_radius,
            geodesic=False, dist_tag=self.dist_tag,
            neighbors=self.neighbors, kind=self.kind)

    def check_metric(self, rng=None, triple_budget=200_000):
        """Verify the metric axioms, exhaustively when affordable.

        Identity and symmetry are checked on all pairs up to a budget; the
        triangle inequality on all triples when n^3 fits the budget, else on
        a seeded random sample.  Raises AssertionError with a witness.
        """
        n = len(self.points)
        pair_budget = min(n * n, triple_budget)
        rng = rng or random.Random(7)
        if n * (n - 1) // 2 <= pair_budget:
            pairs = itertools.combinations(range(n), 2)
        else:
            pairs = ((rng.randrange(n), rng.randrange(n)) for _ in range(pair_budget))
        for i, j in pairs:
            if i == j:
                continue
            d = self.dist_i(i, j)
            assert d > 0, f"zero distance between distinct {self.points[i]} {self.points[j]}"
            assert d == self.dist_i(j, i), f"asymmetry at {self.points[i]} {self.points[j]}"
        for i in range(min(n, 1000)):
            assert self.dist_i(i, i) == 0
        if n ** 3 <= triple_budget:
            triples = itertools.product(range(n), repeat=3)
        else:
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n))
                       for _ in range(triple_budget))
        for i, j, k in triples:
            if self.dist_i(i, k) > self.dist_i(i, j) + self.dist_i(j, k):
                raise AssertionError(
                    f"triangle violation at {self.points[i]} {self.points[j]} {self.points[k]}")
        return True

    def to_json(self):
        return {
            "window_tag": self.window_tag,
            "points": [_label_to_json(p) for p in self.points],
            "dist": self.dist_tag if self.dist_tag else _explicit_matrix(self),
            "interior_radius": [int(r) for r in self.interior_radius],
        }


def _explicit_matrix(space):
    return [[int(space.dist_i(i, j)) for j in range(i)] for i in range(len(space))]


def _label_to_json(label):
    if isinstance(label, tuple):
        return [_label_to_json(x) for x in label]
    if isinstance(label, Fraction):
        return f"{label.numerator}/{label.denominator}"
    return label


def _label_from_json(obj):
    if isinstance(obj, list):
        return tuple(_label_from_json(x) for x in obj)
    if isinstance(obj, str) and "/" in obj:
        num, den = obj.split("/")
        return Fraction(int(num), int(den))
    return obj


def space_from_json(doc):
    """Rebuild a space serialized by ``to_json``.

    Tagged metrics are recomputed from the labels; untagged ones come back
    as an explicit lower-triangular matrix lookup.
    """
    points = [_label_from_json(p) for p in doc["points"]]
    tag = doc["dist"]
    if tag == "l1-grid":
        dist, neighbors, kind, geo = l1_dist, None, "grid", True
    elif tag == "l1-rational":
        dist, neighbors, kind, geo = l1_dist, None, "rational", False
    elif tag == "tree":
        dist, neighbors, kind, geo = tree_dist, None, "tree", True
    elif tag == "lamplighter":
        from .lamplighter import label_dist
        dist, neighbors, kind, geo = label_dist, None, "lamplighter", False
    else:
        matrix = tag
        index = {p: i for i, p in enumerate(points)}

        def dist(a, b, _m=matrix, _ix=index):
            i, j = _ix[a], _ix[b]
            if i == j:
                return 0
            if i < j:
                i, j = j, i
            return _m[i][j]

        neighbors, kind, geo, tag = None, None, False, None
    space = FiniteMetricSpace(points, dist, doc["window_tag"],
                              doc["interior_radius"], geodesic=geo,
                              dist_tag=tag if isinstance(tag, str) else None,
                              neighbors=neighbors, kind=kind)
    return space


# ---------------------------------------------------------------------------
# Z^k box windows


def l1_dist(a, b):
    return sum(abs(x - y) for x, y in zip(a, b))


def _grid_shell_offsets(k, r):
    """Integer vectors of l1 norm exactly r in k coordinates, enumerated
    sparsely (positions of nonzero entries, compositions, signs)."""
    key = (k, r)
    if key not in _GRID_SHELL_CACHE:
        offs = []

        def gen(remaining, current):
            if remaining == 0:
                offs.append(tuple(current) + (0,) * (k - len(current)))
                return
            if len(current) == k:
                return
            gen(remaining, current + [0])
            for mag in range(1, remaining + 1):
                for s in (mag, -mag):
                    gen(remaining - mag, current + [s])

        gen(r, [])
        _GRID_SHELL_CACHE[key] = offs
    return _GRID_SHELL_CACHE[key]


def grid_space(k, half_width, tag=None):
    """Box {-half_width..half_width}^k with the word (= l1) metric."""
    if k < 1 or half_width < 1:
        raise ValueError("need k >= 1 and half_width >= 1")
    side = 2 * half_width + 1
    guard_cap(side ** k, f"grid_space(k={k}, half_width={half_width})")
    points = [tuple(p) for p in itertools.product(range(-half_width, half_width + 1), repeat=k)]

    def neighbors(p, _w=half_width, _k=k):
        for i in range(_k):
            for s in (-1, 1):
                v = p[i] + s
                if -_w <= v <= _w:
                    yield p[:i] + (v,) + p[i + 1:]

    radii = [half_width - max(abs(c) for c in p) for p in points]
    return FiniteMetricSpace(
        points, l1_dist,
        tag or f"Z^{k} box, half_width={half_width}",
        radii, geodesic=True, dist_tag="l1-grid", neighbors=neighbors, kind="grid")


def lattice_window(points, k, tag):
    """Sparse set of Z^k points with the l1 metric.

    Interior radii are honest ambient radii: r such that the full ambient
    l1-ball of radius r around the point is present.  For generic sparse
    sets this is 0, which simply marks every point as boundary.
    """
    pts = [tuple(p) for p in points]
    present = set(pts)
    radii = []
    for p in pts:
        r = 0
        while True:
            shell = _grid_shell_offsets(k, r + 1)
            if all(tuple(a + b for a, b in zip(p, off)) in present for off in shell):
                r += 1
            else:
                break
        radii.append(r)
    return FiniteMetricSpace(pts, l1_dist, tag, radii, geodesic=False,
                             dist_tag="l1-grid", kind="grid")


# ---------------------------------------------------------------------------
# Truncated regular trees with a marked end
#
# Tree nodes are labeled by their path from the root: () is the root and
# (c0, c1, ...) descends child by child.  The marked direction to infinity
# runs up through the ancestors and then along a spine attached above the
# root; spine nodes are labeled by negative integers -1, -2, ...


def tree_dist(a, b):
    if isinstance(a, int):
        if isinstance(b, int):
            return abs(a - b)
        return -a + len(b)
    if isinstance(b, int):
        return len(a) + (-b)
    common = 0
    for x, y in zip(a, b):
        if x != y:
            break
        common += 1
    return len(a) + len(b) - 2 * common


def ray_point(label, t):
    """The point t steps from label along the direction to infinity."""
    if t == 0:
        return label
    if isinstance(label, int):
        return label - t
    if t <= len(label):
        return label[:len(label) - t]
    return -(t - len(label))


class TreeBall:
    """Truncated (valence)-regular tree plus a spine toward the marked end."""

    def __init__(self, valence, depth, spine_len, space):
        self.valence = valence
        self.depth = depth
        self.spine_len = spine_len
        self.space = space

    def ray_available(self, label):
        """How many steps toward infinity stay inside the window."""
        if isinstance(label, int):
            return self.spine_len + label
        return len(label) + self.spine_len

    def ray_domain(self, length):
        """Indices of nodes whose ray of the given length stays inside:
        all tree nodes plus a spine prefix."""
        return [i for i, p in enumerate(self.space.points)
                if self.ray_available(p) >= length]


def tree_ball(valence, depth, spine_len=None):
    """Rooted (valence)-regular tree truncated at depth, plus a spine.

    Every internal vertex has full valence in the ambient tree; the window
    keeps the root's subtree to the given depth and the spine path, so the
    only ambient neighbors missing are the deep descendants and the side
    subtrees hanging off the spine.
    """
    if valence < 3 or depth < 1:
        raise ValueError("need valence >= 3 and depth >= 1")
    if spine_len is None:
        spine_len = 2 * depth
    branching = valence - 1
    count = sum(branching ** d for d in range(depth + 1)) + spine_len
    guard_cap(count, f"tree_ball(valence={valence}, depth={depth})")

    points = [-j for j in range(spine_len, 0, -1)]
    level = [()]
    points.append(())
    for _ in range(depth):
        nxt = []
        for p in level:
            for c in range(branching):
                q = p + (c,)
                nxt.append(q)
        points.extend(nxt)
        level = nxt

    def neighbors(p, _b=branching, _d=depth, _s=spine_len):
        if isinstance(p, int):
            if p > -_s:
                yield p - 1
            yield p + 1 if p < -1 else ()
        else:
            if p == ():
                yield -1
            else:
                yield p[:-1]
            if len(p) < _d:
                for c in range(_b):
                    yield p + (c,)

    radii = []
    for p in points:
        if isinstance(p, int):
            radii.append(0)  # side subtrees of the spine are not in the window
        else:
            radii.append(min(depth - len(p), len(p) + 1))
    space = FiniteMetricSpace(
        points, tree_dist,
        f"{valence}-regular tree ball, depth={depth}, spine={spine_len}",
        radii, geodesic=True, dist_tag="tree", neighbors=neighbors, kind="tree")
    return TreeBall(valence, depth, spine_len, space)


def bfs_distances(space, source):
    """Graph-metric oracle: BFS over the window's unit edges."""
    if space.neighbors is None:
        raise ValueError("space exposes no adjacency")
    dist = {source: 0}
    queue = deque([source])
    while queue:
        p = queue.popleft()
        for q in space.neighbors(p):
            if q in space.index and q not in dist:
                dist[q] = dist[p] + 1
                queue.append(q)
    return dist
