"""Exact rational geometry of the zero-sum lattice cover.

Ambient space: the hyperplane of vectors in R^n with coordinate sum 0,
normed by the l1 norm.  The integer points of the hyperplane form a
lattice; adding the n glue shifts yields a finer lattice whose Voronoi
cell V is a permutohedron, cut out by the inequalities

    split_average_gap(x, I) <= 1/2     for every proper subset I,

where split_average_gap is the difference between the coordinate average
over I and over its complement.  Maximizing the gap over subsets of fixed
size is achieved by the largest coordinates, so membership reduces to n-1
sorted-prefix checks.

Thickening.  Covers need the cells enlarged by a small margin tau.  The
enlargement used here relaxes each defining inequality by tau times the
l1 operator norm of its functional ("functional thickening").  It contains
the open l1 tau-neighborhood of V and is contained in a slightly scaled
copy of V, so it inherits every property the cover needs: the translates
still cover (they contain the closed cells), translates within one shift
family stay disjoint, and any point of a closed cell keeps an l1 ball of
radius tau inside the enlarged cell.  Unlike the exact l1 neighborhood,
membership stays a finite list of rational comparisons.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import CoverageError

HALF = Fraction(1, 2)


def split_average_gap(x, subset):
    """Average over the subset minus average over the complement (exact)."""
    n = len(x)
    subset = set(subset)
    j = len(subset)
    if j == 0 or j == n:
        raise ValueError("subset must be proper and nonempty")
    total = sum(x)
    s = sum(x[i] for i in subset)
    return Fraction(s, 1) / j - (total - s) / (n - j)


def default_thickening(n):
    """Half the guaranteed in-family separation of the cell translates."""
    return Fraction(1, 2 * (n - 1))


def glue_shift(i, n):
    """The i-th shift vector: ((i-n)/n on the first i coords, i/n after)."""
    return tuple(Fraction(i - n, n) if j < i else Fraction(i, n) for j in range(n))


def vertex_profile(n):
    """A cell vertex: (1-n, 3-n, ..., n-1) / (2n)."""
    return tuple(Fraction(2 * j + 1 - n, 2 * n) for j in range(n))


@dataclass(frozen=True)
class LatticeCoverSpec:
    """Shape of a thickened lattice cover of the zero-sum hyperplane.

    n            even dimension-plus-one (the hyperplane has dimension n-1)
    scale        homothety factor applied to the whole configuration
    thickening   margin tau in unscaled units
    offset       zero-sum translation of the configuration, unscaled units
    """
    n: int
    scale: Fraction
    thickening: Fraction
    offset: tuple = None

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError("n must be even and >= 2")
        if self.scale <= 0 or self.thickening <= 0:
            raise ValueError("scale and thickening must be positive")
        if self.offset is None:
            object.__setattr__(self, "offset", (Fraction(0),) * self.n)
        else:
            off = tuple(Fraction(c) for c in self.offset)
            if len(off) != self.n or sum(off) != 0:
                raise ValueError("offset must be a zero-sum vector of length n")
            object.__setattr__(self, "offset", off)

    @staticmethod
    def standard(n, scale=1):
        return LatticeCoverSpec(n, Fraction(scale), default_thickening(n))


def _prefix_bounds(n, tau):
    """Per-cardinality right-hand sides for the sorted-prefix sums.

    The size-j inequality  gap <= 1/2 + tau * n / (2 j (n-j))  becomes, in
    terms of the sum of the j largest coordinates,  sum < j(n-j)/(2n) + tau/2.
    """
    return [Fraction(j * (n - j), 2 * n) + tau / 2 for j in range(1, n)]


def cell_contains(v, tau=0, closed=None):
    """Membership of a zero-sum vector in the (tau-enlarged) cell.

    closed defaults to True for tau == 0 (the closed cell) and False for
    tau > 0 (open enlargement, keeping in-family translates disjoint).
    """
    n = len(v)
    if closed is None:
        closed = (tau == 0)
    bounds = _prefix_bounds(n, Fraction(tau))
    ordered = sorted(v, reverse=True)
    run = Fraction(0)
    for j in range(1, n):
        run += ordered[j - 1]
        if closed:
            if run > bounds[j - 1]:
                return False
        else:
            if run >= bounds[j - 1]:
                return False
    return True


def cell_contains_bruteforce(v, tau=0, closed=None):
    """Oracle: test every one of the 2^n - 2 proper subsets directly.

    Exponential in n (capped at 12); denominators are cleared once so the
    subset scan runs on integers.  The subset-sum recurrence strips the
    lowest set bit, visiting all masks without the prefix reduction that
    the fast path relies on.
    """
    import math

    n = len(v)
    if n > 12:
        raise ValueError("brute force oracle limited to n <= 12")
    if closed is None:
        closed = (tau == 0)
    tau = Fraction(tau)
    D = 1
    for c in v:
        d = c.denominator if isinstance(c, Fraction) else 1
        D = D * d // math.gcd(D, d)
    X = [int(c * D) for c in v]
    sums = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + X[low.bit_length() - 1]
    # gap(I) <= 1/2 + tau * n / (2 j (n-j))  <=>
    # 2 n den(tau) sum_I <= (j (n-j) den(tau) + num(tau) n) D
    tn, td = tau.numerator, tau.denominator
    full = (1 << n) - 1
    for mask in range(1, full):
        j = mask.bit_count()
        lhs = 2 * n * td * sums[mask]
        rhs = (j * (n - j) * td + tn * n) * D
        if closed:
            if lhs > rhs:
                return False
        else:
            if lhs >= rhs:
                return False
    return True


def _decode_family(y, n, tau, closed):
    """Integer zero-sum lattice points whose (enlarged) cell can contain y.

    The singleton inequalities force |y_j - mu_j| < (n-1)/(2n) + tau/2
    coordinatewise, so mu_j is floor or ceiling of y_j.  For tau < 1/n the
    bound is below 1/2 and the choice per coordinate is forced, giving at
    most one candidate.  Larger tau leaves both choices open on coordinates
    whose fractional part falls in the ambiguity band; those are enumerated
    (the zero-sum constraint fixes how many take the ceiling).
    """
    b = Fraction(n - 1, 2 * n) + Fraction(tau) / 2
    base = []
    ambiguous = []
    for idx, yj in enumerate(y):
        fl = _floor_fraction(yj)
        frac = yj - fl
        if closed:
            lo_ok = frac <= b
            hi_ok = 1 - frac <= b
        else:
            lo_ok = frac < b
            hi_ok = 1 - frac < b
        if lo_ok and hi_ok:
            base.append(fl)
            ambiguous.append(idx)
        elif lo_ok:
            base.append(fl)
        elif hi_ok:
            base.append(fl + 1)
        else:
            return []
    need = -sum(base)
    if need < 0 or need > len(ambiguous):
        return []
    if need == 0 and not ambiguous:
        return [tuple(base)]
    out = []
    for chosen in itertools.combinations(ambiguous, need):
        mu = list(base)
        for idx in chosen:
            mu[idx] += 1
        out.append(tuple(mu))
    return out


def _floor_fraction(x):
    return x.numerator // x.denominator if isinstance(x, Fraction) else x // 1


def membership_reference(x, spec, closed=False):
    """Rational-arithmetic reference for the membership listing (slow)."""
    n = spec.n
    if len(x) != n:
        raise ValueError("dimension mismatch")
    if sum(x) != 0:
        raise ValueError("point is not in the zero-sum hyperplane")
    xs = tuple(Fraction(c) / spec.scale - o for c, o in zip(x, spec.offset))
    out = []
    for i in range(n):
        shift = glue_shift(i, n)
        y = tuple(a - b for a, b in zip(xs, shift))
        for mu in _decode_family(y, n, spec.thickening, closed):
            v = tuple(a - b for a, b in zip(y, mu))
            if cell_contains(v, spec.thickening, closed=closed):
                out.append((i, mu))
    return out


def membership(x, spec, closed=False):
    """All (family, lattice point) pairs whose enlarged scaled cell holds x.

    x is a zero-sum rational vector in ambient (scaled) coordinates.  The
    arithmetic is exact: the point is rescaled to a common integer
    denominator and every comparison is an integer comparison.  An empty
    result means the configuration failed to cover, a fatal geometry bug.
    """
    import math

    n = spec.n
    if len(x) != n:
        raise ValueError("dimension mismatch")
    if sum(x) != 0:
        raise ValueError("point is not in the zero-sum hyperplane")
    tau = spec.thickening
    xs = [Fraction(c) / spec.scale - o for c, o in zip(x, spec.offset)]
    D = n
    for c in xs:
        D = D * c.denominator // math.gcd(D, c.denominator)
    X = [int(c * D) for c in xs]
    step = D // n
    # per-coordinate admissibility band and per-cardinality prefix bounds
    b = Fraction(n - 1, 2 * n) + tau / 2
    b_num, b_den = b.numerator, b.denominator
    bounds = _prefix_bounds(n, tau)
    out = []
    for i in range(n):
        lo_shift = (i - n) * step
        hi_shift = i * step
        y = [X[j] - (lo_shift if j < i else hi_shift) for j in range(n)]
        candidates = _decode_int(y, D, n, b_num, b_den, closed)
        for mu in candidates:
            v = sorted((yj - D * mj for yj, mj in zip(y, mu)), reverse=True)
            run = 0
            ok = True
            for j in range(1, n):
                run += v[j - 1]
                lim = bounds[j - 1]
                if closed:
                    if run * lim.denominator > lim.numerator * D:
                        ok = False
                        break
                else:
                    if run * lim.denominator >= lim.numerator * D:
                        ok = False
                        break
            if ok:
                out.append((i, mu))
    return out


def _decode_int(y, D, n, b_num, b_den, closed):
    """Integer-arithmetic version of the floor/ceiling decoding."""
    base = []
    ambiguous = []
    for idx, yj in enumerate(y):
        fl = yj // D
        fr = yj - fl * D            # in [0, D)
        lo = fr * b_den
        hi = (D - fr) * b_den
        lim = b_num * D
        if closed:
            lo_ok = lo <= lim
            hi_ok = hi <= lim
        else:
            lo_ok = lo < lim
            hi_ok = hi < lim
        if lo_ok and hi_ok:
            base.append(fl)
            ambiguous.append(idx)
        elif lo_ok:
            base.append(fl)
        elif hi_ok:
            base.append(fl + 1)
        else:
            return []
    need = -sum(base)
    if need < 0 or need > len(ambiguous):
        return []
    if not ambiguous:
        return [tuple(base)] if need == 0 else []
    out = []
    for chosen in itertools.combinations(ambiguous, need):
        mu = list(base)
        for idx in chosen:
            mu[idx] += 1
        out.append(tuple(mu))
    return out


def membership_or_fail(x, spec):
    found = membership(x, spec, closed=False)
    if not found:
        raise CoverageError(f"lattice cover misses point {x}", witness=x)
    return found


def closed_cell_membership(x, spec):
    """Same listing for the closed unthickened cells (the exact tiling)."""
    return membership(x, spec, closed=True)


def in_family_separation_bound(delta, tau=0):
    """Certified lower bound for the l1 distance between cells at offset delta.

    For translates mu + C and mu' + C of a convex set C on which every
    split-average gap is at most g, any two points z, z' satisfy
    ||z - z'||_1 > gap(delta, I) - 2g for every subset I.  With the exact
    cell g = 1/2; with the functional tau-enlargement g depends on |I|.
    The returned value is the best such bound over singleton subsets, which
    is what the in-family disjointness argument uses.
    """
    n = len(delta)
    peak = max(abs(d) for d in delta)
    return Fraction(n, n - 1) * peak - 1 - Fraction(tau) * Fraction(n, n - 1)


def embed_grid_point(z):
    """Isometry of Z^k (l1) into the zero-sum hyperplane of R^{2k}:
    each coordinate z_m becomes the pair (z_m/2, -z_m/2)."""
    out = []
    for c in z:
        out.append(Fraction(c, 2))
        out.append(Fraction(-c, 2))
    return tuple(out)


def grid_membership(z, spec, closed=False):
    """Cover membership of a grid point through the hyperplane embedding."""
    return membership(embed_grid_point(z), spec, closed=closed)


# ---------------------------------------------------------------------------
# Pullback covers of Z^k windows


def _generic_offset(n):
    """Small generic translation: an eighth of a cell vertex.  Breaks the
    coincidences between the integer image points and cell walls."""
    return tuple(c / 8 for c in vertex_profile(n))


def candidate_specs(k, L):
    """Deterministic (scale, thickening, offset) candidates for a target
    Lebesgue level L on Z^k, cheapest mesh first.

    The canonical scale (last) makes the open thickening margin equal to L
    in window units, so the level-L condition is guaranteed; the earlier
    candidates only certify on lucky windows but give smaller mesh.  The
    near-maximal thickening keeps translates within a family disjoint
    (margin strictly below 1/n) while covering at depth L-1 from scale
    about (L-1) * n.
    """
    n = 2 * k
    tau0 = default_thickening(n)
    tau_big = Fraction(24, 25 * n)
    canonical = Fraction(2 * (2 * k - 1) * L)
    out = []
    for off in (None, _generic_offset(n)):
        out.append((Fraction(L), tau0, off))
        out.append((Fraction(2 * L), tau0, off))
    if L > 1:
        lam = Fraction(L - 1) / tau_big
        for bump in (Fraction(-1, 100), Fraction(1, 32), Fraction(1, 8)):
            out.append((lam * (1 + bump), tau_big, _generic_offset(n)))
    out.append((canonical, tau0, _generic_offset(n)))
    return out


def pullback_grid_cover(window, k, spec, name=""):
    """Cover of a Z^k window by preimages of the enlarged scaled cells."""
    from .covers import Cover

    sets = {}
    for idx, z in enumerate(window.points):
        found = membership_or_fail(embed_grid_point(z), spec)
        for key in found:
            sets.setdefault(key, []).append(idx)
    keys = sorted(sets)
    return Cover(window, [sets[key] for key in keys],
                 family=[key[0] for key in keys],
                 tags=[key for key in keys],
                 name=name or f"lattice cover scale={spec.scale}")


def canonical_spec(k, L):
    """The textbook choice: scale 2(2k-1)L with the default thickening,
    making the open margin around the closed cells exactly L."""
    n = 2 * k
    return LatticeCoverSpec(n, Fraction(2 * (2 * k - 1) * L),
                            default_thickening(n), _generic_offset(n))


def zk_cover(window, k, L, mesh_bound=None, strict=True, p_list=(1, 2, 3),
             spec=None):
    """Pullback cover of a Z^k window meeting a Lebesgue target.

    Tries the candidate parameter lists in order and returns the first
    cover certifying: level-L Lebesgue condition (or window truncation),
    multiplicity at most 2k, and mesh at most mesh_bound (default the
    advertised (2k^2-2k+1) L).  With strict=False, when no candidate meets
    the mesh bound, the best cover certifying the Lebesgue condition and
    the multiplicity bound is returned with its honest statistics.  An
    explicit spec bypasses the search.

    Returns (cover, stats, spec).
    """
    from .covers import cover_stats, lebesgue_condition, ContractViolation

    n = 2 * k
    if mesh_bound is None:
        mesh_bound = (2 * k * k - 2 * k + 1) * Fraction(L)
    candidates = ([(spec.scale, spec.thickening, spec.offset)] if spec is not None
                  else candidate_specs(k, L))
    best = None
    for scale, tau, off in candidates:
        spec = LatticeCoverSpec(n, scale, tau, off)
        cover = pullback_grid_cover(window, k, spec)
        stats = cover_stats(cover, p_list=p_list)
        leb_ok = (stats.lebesgue >= L) or stats.lebesgue_truncated
        if not leb_ok:
            leb_ok = lebesgue_condition(cover, L) is None
        mult_ok = stats.multiplicity <= n
        if leb_ok and mult_ok:
            if stats.mesh <= mesh_bound:
                return cover, stats, spec
            if best is None or stats.mesh < best[1].mesh:
                best = (cover, stats, spec)
    if best is not None and not strict:
        return best
    detail = "" if best is None else (
        f" (best certified candidate: mesh {best[1].mesh}, "
        f"multiplicity {best[1].multiplicity}, scale {best[2].scale})")
    raise ContractViolation(
        f"no lattice pullback cover of Z^{k} met Lebesgue {L}, "
        f"multiplicity {n}, mesh {mesh_bound}{detail}",
        witness=best[1] if best else None)
