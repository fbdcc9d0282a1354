"""Exact polyhedral set algebra in low dimension.

Everything here is exact: halfspaces are stored as primitive integer rows
``a·x >= b``, generators as primitive integer rays plus rational vertices,
and conversions between the two representations run the double description
method on the homogenisation cone.  Every ``ConvexPolyhedron`` carries both
a minimal H-representation and a minimal V-representation, which makes
intersections, cone sums, containment tests and pruning of unions cheap and
deterministic.

Sets that arise here are typically solvency cones, their translates, and the
non-convex unions built by the backward hedging recursions; dimensions of
two or three are the norm, but nothing below assumes a fixed dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from operator import mul as _mul

from .rational import ONE, ZERO, Rational, format_exact, qdot, qvec, rational

try:
    from gmpy2 import gcd as _gcd
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int
    _gcd = math.gcd

IntVec = tuple  # primitive integer tuple

# beyond this magnitude, GMP integers beat native ints clearly
_BIG = 1 << 192


class DimensionMismatch(ValueError):
    """Operands live in different ambient dimensions."""


# ---------------------------------------------------------------------------
# integer vector helpers


def _ivec_content(v) -> int:
    g = 0
    for x in v:
        if isinstance(x, int):
            g = math.gcd(g, x)
        else:
            g = _gcd(g, x)
        if g == 1:
            return 1
    return g


def _prim(v) -> IntVec:
    g = _ivec_content(v)
    if g > 1:
        return tuple(x // g for x in v)
    return tuple(v)


def _idot(a, b) -> int:
    return sum(map(_mul, a, b))


def _ineg(v) -> IntVec:
    return tuple(-x for x in v)


def _intify(values) -> IntVec:
    """Clear denominators of a rational vector and reduce to primitive form."""
    qs = [rational(v) for v in values]
    lcm = 1
    for q in qs:
        d = int(q.denominator)
        lcm = lcm * d // math.gcd(lcm, d)
    ints = [int(q.numerator) * (lcm // int(q.denominator)) for q in qs]
    return _prim(ints)


# ---------------------------------------------------------------------------
# double description core


def dd_cone(rows, dim, want_masks=False):
    """Extreme generators of the cone ``{v : r·v >= 0 for every r in rows}``.

    Returns ``(lines, rays)`` as primitive integer tuples; the cone is
    ``span(lines) + cone(rays)`` and the rays are extreme modulo the lineality
    space.  Incremental insertion with the combinatorial adjacency test;
    per-ray tight-row bitmasks (bit ``j`` marks row ``j`` tight) are carried
    along and returned as a third value when ``want_masks`` is set.  Rows
    with large entries are moved onto GMP integers.
    """
    if any(abs(x) > _BIG for row in rows for x in row):
        rows = [tuple(_mpz(x) for x in row) for row in rows]
    lines = [tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim)]
    rays: list[list] = []  # [vector, tight-row bitmask]
    nrows = 0  # processed so far

    # Masks are maintained incrementally: a pivoted line is tight at every
    # earlier row, pivoting preserves tightness patterns, and a combination
    # created from an adjacent pair is tight exactly where both parents were,
    # plus the current row.
    for row in rows:
        bit = 1 << nrows
        nrows += 1
        if not any(row):
            for ent in rays:
                ent[1] |= bit
            continue
        pivot = -1
        for k, ln in enumerate(lines):
            if _idot(row, ln):
                pivot = k
                break
        if pivot >= 0:
            l0 = lines.pop(pivot)
            p0 = _idot(row, l0)
            if p0 < 0:
                l0, p0 = _ineg(l0), -p0
            new_lines = []
            for ln in lines:
                p = _idot(row, ln)
                if p:
                    ln = _prim(tuple(p0 * a - p * b for a, b in zip(ln, l0)))
                new_lines.append(ln)
            lines = new_lines
            new_rays = []
            for vec, mask in rays:
                p = _idot(row, vec)
                if p:
                    vec = _prim(tuple(p0 * a - p * b for a, b in zip(vec, l0)))
                new_rays.append([vec, mask | bit])
            new_rays.append([l0, bit - 1])
            rays = _dedupe(new_rays)
            continue

        plus, zero, minus = [], [], []
        for ent in rays:
            p = _idot(row, ent[0])
            if p > 0:
                plus.append((ent, p))
            elif p < 0:
                minus.append((ent, p))
            else:
                ent[1] |= bit
                zero.append(ent)
        if not minus:
            rays = [e for e, _ in plus] + zero
            continue
        if not plus:
            rays = zero
            continue
        combos = {}
        current = rays
        for ep, pp in plus:
            for em, pm in minus:
                m = ep[1] & em[1]
                adjacent = True
                for other in current:
                    if other is ep or other is em:
                        continue
                    if (other[1] & m) == m:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vec = _prim(tuple(pp * a - pm * b for b, a in zip(ep[0], em[0])))
                if any(vec) and vec not in combos:
                    combos[vec] = [vec, m | bit]
        rays = [e for e, _ in plus] + zero + list(combos.values())
    if want_masks:
        return lines, [e[0] for e in rays], [e[1] for e in rays]
    return lines, [e[0] for e in rays]


def _dedupe(entries):
    seen = {}
    for ent in entries:
        if ent[0] not in seen:
            seen[ent[0]] = ent
    return list(seen.values())


def _int_rank(vectors) -> int:
    """Rank of a small integer matrix, fraction-free with content reduction."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pr = rows[r]
        a = pr[col]
        for i in range(r + 1, len(rows)):
            b = rows[i][col]
            if b != 0:
                rows[i] = list(_prim([a * x - b * y for x, y in zip(rows[i], pr)]))
        r += 1
        rank += 1
        if r == len(rows):
            break
    return rank


def _homog_hrep_to_vrep(dim, int_rows):
    """H-rep rows ``a·x >= b`` -> (hpoints, rays, lines, empty, minimal rows).

    ``hpoints`` are homogeneous primitive integer tuples ``(x·t ..., t)`` with
    ``t > 0``.  The returned rows are the subset of the input supporting
    facets or the affine hull, identified from the tight-generator masks of
    the double description run (rank of the tight face must reach the cone
    rank less one).
    """
    t_row = tuple([0] * dim + [1])
    rows = [t_row] + [tuple(r[:dim]) + (-r[dim],) for r in int_rows]
    lines, rays, masks = dd_cone(rows, dim + 1, want_masks=True)
    hpoints = []
    out_rays = []
    for r in rays:
        if r[dim] > 0:
            hpoints.append(r)
        elif any(r[:dim]):
            out_rays.append(_prim(r[:dim]))
    out_lines = [_prim(l[:dim]) for l in lines if any(l[:dim])]
    if not hpoints:
        return [], [], [], True, []
    rank_c = _int_rank(list(lines) + list(rays))
    nlines = len(lines)
    keep = []
    rank_cache = {}
    for j, row in enumerate(int_rows):
        bit = 1 << (j + 1)
        tight_key = 0
        for k, mk in enumerate(masks):
            if mk & bit:
                tight_key |= 1 << k
        count = nlines + bin(tight_key).count("1")
        if count == 0 or count < rank_c - 1:
            continue
        rank = rank_cache.get(tight_key)
        if rank is None:
            tight = [r for r, mk in zip(rays, masks) if mk & bit]
            rank = _int_rank(list(lines) + tight)
            rank_cache[tight_key] = rank
        if rank >= rank_c - 1:
            keep.append(row)
    return hpoints, out_rays, out_lines, False, keep


def _homog_vrep_to_hrep(dim, hpoints, int_rays, int_lines):
    """Homogeneous generators -> minimal H-rep rows (facets; affine hull as
    row pairs).  Points enter as integer tuples ``(x·t ..., t)``."""
    rows = [tuple(p) for p in hpoints]
    rows += [tuple(r) + (0,) for r in int_rays]
    for l in int_lines:
        rows.append(tuple(l) + (0,))
        rows.append(_ineg(l) + (0,))
    lines, rays = dd_cone(rows, dim + 1)
    out = []
    for a in rays:
        if any(a[:dim]):
            out.append(tuple(a[:dim]) + (-a[dim],))
    for a in lines:
        if any(a[:dim]):
            out.append(tuple(a[:dim]) + (-a[dim],))
            out.append(_ineg(a[:dim]) + (a[dim],))
    return out


# ---------------------------------------------------------------------------
# halfspaces and polyhedra


@dataclass(frozen=True)
class Halfspace:
    """Closed halfspace ``{x : normal·x >= offset}`` with rational data."""

    normal: tuple
    offset: Rational

    def __post_init__(self):
        if not any(n != 0 for n in self.normal):
            raise ValueError("halfspace normal must be nonzero")

    def holds(self, x) -> bool:
        return qdot(self.normal, x) >= self.offset

    def __str__(self) -> str:
        terms = " + ".join(
            f"{format_exact(c)} x{i + 1}" for i, c in enumerate(self.normal)
        )
        return f"{terms} >= {format_exact(self.offset)}"


def halfspace(normal, offset) -> Halfspace:
    """Canonical (primitive-integer) halfspace."""
    row = _intify(list(normal) + [rational(offset)])
    return Halfspace(qvec(row[:-1]), rational(row[-1]))


class ConvexPolyhedron:
    """Closed convex polyhedron carrying minimal H- and V-representations.

    Instances are immutable; all operations return new objects.  The empty
    set is representable and flagged.  ``rows`` are primitive integer tuples
    ``(a_1, ..., a_d, b)`` meaning ``a·x >= b``; ``rays``/``lines`` are
    primitive integer direction tuples; points are stored homogeneously as
    primitive integer tuples ``(x·t ..., t)`` with ``t > 0`` and surface as
    rational vertices through ``points``/``vertices``.
    """

    __slots__ = ("dim", "rows", "hpoints", "rays", "lines", "is_empty", "_key", "_points")

    def __init__(self, dim, rows, hpoints, rays, lines, is_empty):
        self.dim = dim
        self.rows = rows
        self.hpoints = hpoints
        self.rays = rays
        self.lines = lines
        self.is_empty = is_empty
        self._key = (dim, is_empty, rows)
        self._points = None

    # -- construction -------------------------------------------------------

    @staticmethod
    def empty(dim) -> "ConvexPolyhedron":
        row = tuple([0] * dim + [1])  # 0·x >= 1
        return ConvexPolyhedron(dim, (row,), (), (), (), True)

    @staticmethod
    def from_int_rows(dim, int_rows) -> "ConvexPolyhedron":
        rows = list(dict.fromkeys(tuple(r) for r in int_rows))
        hpoints, rays, lines, is_empty, minimal = _homog_hrep_to_vrep(dim, rows)
        if is_empty:
            return ConvexPolyhedron.empty(dim)
        return ConvexPolyhedron(
            dim,
            tuple(sorted(minimal)),
            tuple(sorted(hpoints)),
            tuple(sorted(rays)),
            tuple(sorted(lines)),
            False,
        )

    @staticmethod
    def from_halfspaces(dim, halfspaces) -> "ConvexPolyhedron":
        rows = []
        for h in halfspaces:
            if isinstance(h, Halfspace):
                normal, offset = h.normal, h.offset
            else:
                normal, offset = h
            if len(normal) != dim:
                raise DimensionMismatch(
                    f"halfspace in dimension {len(normal)}, expected {dim}"
                )
            rows.append(_intify(list(normal) + [offset]))
        return ConvexPolyhedron.from_int_rows(dim, rows)

    @staticmethod
    def from_generators(dim, points, rays=(), lines=()) -> "ConvexPolyhedron":
        """The H-representation comes from the dual conversion; the given
        generators are kept as the (possibly non-minimal) V-representation."""
        if not points:
            raise ValueError("a polyhedron needs at least one point; use PolyCone")
        hpoints = [_intify(tuple(p) + (ONE,)) for p in points]
        int_rays = [_intify(r) for r in rays]
        int_lines = [_intify(l) for l in lines]
        return ConvexPolyhedron._from_homog_generators(dim, hpoints, int_rays, int_lines)

    @staticmethod
    def _from_homog_generators(dim, hpoints, int_rays, int_lines) -> "ConvexPolyhedron":
        rows = _homog_vrep_to_hrep(dim, hpoints, int_rays, int_lines)
        return ConvexPolyhedron(
            dim,
            tuple(sorted(dict.fromkeys(tuple(r) for r in rows))),
            tuple(sorted(dict.fromkeys(tuple(p) for p in hpoints))),
            tuple(sorted(dict.fromkeys(tuple(r) for r in int_rays))),
            tuple(sorted(dict.fromkeys(tuple(l) for l in int_lines))),
            False,
        )

    @staticmethod
    def whole_space(dim) -> "ConvexPolyhedron":
        return ConvexPolyhedron.from_int_rows(dim, [])

    # -- views ---------------------------------------------------------------

    @property
    def halfspaces(self) -> tuple:
        return tuple(Halfspace(qvec(r[:-1]), rational(r[-1])) for r in self.rows)

    @property
    def points(self) -> tuple:
        if self._points is None:
            d = self.dim
            self._points = tuple(
                tuple(rational(x, p[d]) for x in p[:d]) for p in self.hpoints
            )
        return self._points

    @property
    def vertices(self) -> tuple:
        return self.points

    @property
    def ray_directions(self) -> tuple:
        """Recession directions as rational vectors; lines appear as ± pairs."""
        out = [qvec(r) for r in self.rays]
        for l in self.lines:
            out.append(qvec(l))
            out.append(qvec(_ineg(l)))
        return tuple(out)

    def key(self):
        return self._key

    # -- predicates ----------------------------------------------------------

    def contains_point(self, x) -> bool:
        if self.is_empty:
            return False
        xq = qvec(x)
        d = self.dim
        for r in self.rows:
            if _idot(r[:d], xq) < r[d]:
                return False
        return True

    def contains_homog_point(self, hp) -> bool:
        d = self.dim
        t = hp[d]
        for r in self.rows:
            if _idot(r[:d], hp[:d]) < r[d] * t:
                return False
        return True

    def contains_direction(self, r) -> bool:
        if self.is_empty:
            return False
        for row in self.rows:
            if _idot(row[: self.dim], r) < 0:
                return False
        return True

    def is_subset_of(self, other: "ConvexPolyhedron") -> bool:
        if self.is_empty:
            return True
        if other.is_empty:
            return False
        for p in self.hpoints:
            if not other.contains_homog_point(p):
                return False
        for r in self.rays:
            if not other.contains_direction(r):
                return False
        for l in self.lines:
            if not other.contains_direction(l):
                return False
            if not other.contains_direction(_ineg(l)):
                return False
        return True

    def set_equal(self, other: "ConvexPolyhedron") -> bool:
        return self.is_subset_of(other) and other.is_subset_of(self)

    # -- transforms ----------------------------------------------------------

    def translate(self, v) -> "ConvexPolyhedron":
        if self.is_empty:
            return self
        vq = qvec(v)
        rows = []
        for r in self.rows:
            shift = qdot(r[: self.dim], vq)
            rows.append(_intify(list(r[: self.dim]) + [rational(r[self.dim]) + shift]))
        hpoints = []
        for p in self.hpoints:
            t = p[self.dim]
            hpoints.append(
                _intify(tuple(rational(x, t) + w for x, w in zip(p[: self.dim], vq)) + (ONE,))
            )
        return ConvexPolyhedron(
            self.dim,
            tuple(sorted(rows)),
            tuple(sorted(hpoints)),
            self.rays,
            self.lines,
            False,
        )

    def __repr__(self):
        if self.is_empty:
            return f"ConvexPolyhedron(dim={self.dim}, empty)"
        return (
            f"ConvexPolyhedron(dim={self.dim}, "
            f"{' & '.join(str(h) for h in self.halfspaces) or 'whole space'})"
        )


# ---------------------------------------------------------------------------
# polyhedral cones


class PolyCone:
    """Polyhedral cone given by generators, with cached polar and H-rep."""

    __slots__ = ("dim", "generators", "_int_gens", "_polar", "_hrep_rows", "_poly")

    def __init__(self, dim, generators):
        gens = [qvec(g) for g in generators]
        for g in gens:
            if len(g) != dim:
                raise DimensionMismatch("cone generator of wrong dimension")
            if not any(x != 0 for x in g):
                raise ValueError("cone generators must be nonzero")
        self.dim = dim
        self.generators = tuple(gens)
        self._int_gens = tuple(_intify(g) for g in gens)
        self._polar = None
        self._hrep_rows = None
        self._poly = None

    def polar_data(self):
        """Extreme generators (lines, rays) of ``{w : g·w >= 0 for all g}``."""
        if self._polar is None:
            self._polar = dd_cone(list(self._int_gens), self.dim)
        return self._polar

    @property
    def hrep_rows(self) -> tuple:
        """Primitive integer normals n with the cone equal to ``{x : n·x >= 0}``."""
        if self._hrep_rows is None:
            lines, rays = self.polar_data()
            rows = list(rays)
            for l in lines:
                rows.append(l)
                rows.append(_ineg(l))
            self._hrep_rows = tuple(sorted(rows))
        return self._hrep_rows

    def contains(self, x) -> bool:
        xq = qvec(x)
        return all(qdot(row, xq) >= 0 for row in self.hrep_rows)

    def as_polyhedron(self) -> ConvexPolyhedron:
        if self._poly is None:
            self._poly = ConvexPolyhedron.from_int_rows(
                self.dim, [row + (0,) for row in self.hrep_rows]
            )
        return self._poly

    def __repr__(self):
        return f"PolyCone(dim={self.dim}, generators={len(self.generators)})"


def polar_cone(cone: PolyCone) -> PolyCone:
    """Positive polar ``{w : x·w >= 0 for all x in cone}``."""
    lines, rays = cone.polar_data()
    gens = list(rays)
    for l in lines:
        gens.append(l)
        gens.append(_ineg(l))
    return PolyCone(cone.dim, [qvec(g) for g in gens])


# ---------------------------------------------------------------------------
# operations on convex pieces

_INTERSECT_MEMO: dict = {}
_MEMO_LIMIT = 200_000


def clear_geometry_caches():
    _INTERSECT_MEMO.clear()


def intersect(p: ConvexPolyhedron, q: ConvexPolyhedron) -> ConvexPolyhedron:
    """Intersection of convex pieces; result carries a pruned minimal H-rep."""
    if p.dim != q.dim:
        raise DimensionMismatch("intersect: dimension mismatch")
    if p.is_empty:
        return p
    if q.is_empty:
        return q
    if p.is_subset_of(q):
        return p
    if q.is_subset_of(p):
        return q
    memo_key = (p.key(), q.key()) if p.key() <= q.key() else (q.key(), p.key())
    cached = _INTERSECT_MEMO.get(memo_key)
    if cached is not None:
        return cached
    result = ConvexPolyhedron.from_int_rows(p.dim, list(p.rows) + list(q.rows))
    if len(_INTERSECT_MEMO) < _MEMO_LIMIT:
        _INTERSECT_MEMO[memo_key] = result
    return result


def add_cone(p: ConvexPolyhedron, cone: PolyCone) -> ConvexPolyhedron:
    """Minkowski sum ``p + cone``."""
    if p.dim != cone.dim:
        raise DimensionMismatch("add_cone: dimension mismatch")
    if p.is_empty:
        return p
    rays = list(p.rays) + [tuple(g) for g in map(_intify, cone.generators)]
    return ConvexPolyhedron._from_homog_generators(p.dim, p.hpoints, rays, p.lines)


# ---------------------------------------------------------------------------
# finite unions of convex pieces


class PolyhedralUnion:
    """Finite union of convex polyhedra; an empty piece list is the empty set.

    Piece order is the construction order and is deliberately stable: the
    hedging constructions use "first nonempty piece" as a deterministic
    tie-break.
    """

    __slots__ = ("dim", "pieces")

    def __init__(self, dim, pieces):
        self.dim = dim
        self.pieces = tuple(pieces)

    @staticmethod
    def of(dim, pieces) -> "PolyhedralUnion":
        return prune(PolyhedralUnion(dim, pieces))

    @staticmethod
    def empty(dim) -> "PolyhedralUnion":
        return PolyhedralUnion(dim, ())

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def contains(self, x) -> bool:
        return any(piece.contains_point(x) for piece in self.pieces)

    def key(self):
        return (self.dim, tuple(p.key() for p in self.pieces))

    def __repr__(self):
        return f"PolyhedralUnion(dim={self.dim}, pieces={len(self.pieces)})"


def prune(u: PolyhedralUnion) -> PolyhedralUnion:
    """Drop empty pieces and pieces contained in a single other piece."""
    pieces = [p for p in u.pieces if not p.is_empty]
    keep = [True] * len(pieces)
    for i, pi in enumerate(pieces):
        if not keep[i]:
            continue
        for j, pj in enumerate(pieces):
            if i == j or not keep[j]:
                continue
            if pj.is_subset_of(pi) and (not pi.is_subset_of(pj) or j > i):
                keep[j] = False
    return PolyhedralUnion(u.dim, [p for k, p in zip(keep, pieces) if k])


def union_intersect(u: PolyhedralUnion, v: PolyhedralUnion) -> PolyhedralUnion:
    if u.dim != v.dim:
        raise DimensionMismatch("union_intersect: dimension mismatch")
    pieces = []
    for p in u.pieces:
        for q in v.pieces:
            r = intersect(p, q)
            if not r.is_empty:
                pieces.append(r)
    return PolyhedralUnion.of(u.dim, pieces)


def union_union(u: PolyhedralUnion, v: PolyhedralUnion) -> PolyhedralUnion:
    if u.dim != v.dim:
        raise DimensionMismatch("union_union: dimension mismatch")
    return PolyhedralUnion.of(u.dim, list(u.pieces) + list(v.pieces))


def union_add_cone(u: PolyhedralUnion, cone: PolyCone) -> PolyhedralUnion:
    return PolyhedralUnion.of(u.dim, [add_cone(p, cone) for p in u.pieces])


def union_set_equal(u: PolyhedralUnion, v: PolyhedralUnion) -> bool:
    return all(union_covers(v, p) for p in u.pieces) and all(
        union_covers(u, q) for q in v.pieces
    )


def union_covers(u: PolyhedralUnion, poly: ConvexPolyhedron) -> bool:
    """Exact test that a convex piece is covered by a union of pieces.

    Splits the uncovered region along facets of the pieces; cells are tracked
    with strict rows and discarded once provably empty.
    """
    if poly.is_empty:
        return True
    cells = [(list(poly.rows), [])]  # (non-strict rows, strict rows)
    for piece in u.pieces:
        if not cells:
            return True
        new_cells = []
        for loose, strict in cells:
            prefix = []
            for row in piece.rows:
                cell = (loose + prefix, strict + [_ineg_row(row)])
                if _strict_cell_nonempty(poly.dim, *cell):
                    new_cells.append(cell)
                prefix.append(row)
        cells = new_cells
    return not cells


def _ineg_row(row):
    # complement of a·x >= b is the strict a·x < b, i.e. strict -a·x > -b
    return _ineg(row)


def _strict_cell_nonempty(dim, loose, strict) -> bool:
    # Nonempty iff some x satisfies all loose rows and every strict row with
    # positive slack; decided exactly by maximising the common slack.
    from .linprog import LinearProgram, lp_solve

    n = dim + 1  # variables: x plus slack bound s
    rows = []
    for r in loose:
        rows.append((qvec(list(r[:dim]) + [0]), rational(r[dim]), False))
    for r in strict:
        # a·x - s >= b  (s below the strict margin)
        rows.append((qvec(list(r[:dim]) + [-1]), rational(r[dim]), False))
    rows.append((qvec([0] * dim + [1]), ZERO, False))  # s >= 0
    rows.append((qvec([0] * dim + [-1]), rational(-1), False))  # s <= 1 keeps bounded
    objective = qvec([0] * dim + [-1])  # maximise s
    result = lp_solve(LinearProgram(objective, tuple(rows)))
    if result.status == "infeasible":
        return False
    return result.value < 0  # max s > 0


def min_coordinate(u: PolyhedralUnion, axis: int):
    """Least ``t`` with ``t·e_axis`` in the union.

    Returns an exact rational when attained, ``float('inf')`` for the empty
    set and ``float('-inf')`` when unbounded below (a pathology upstream).
    """
    if not 0 <= axis < u.dim:
        raise IndexError("axis out of range")
    best = float("inf")
    for piece in u.pieces:
        value = _piece_axis_min(piece, axis)
        if value is None:
            continue
        if value == float("-inf"):
            return float("-inf")
        if best == float("inf") or value < best:
            best = value
    return best


def _piece_axis_min(piece: ConvexPolyhedron, axis: int):
    lo, hi = None, None
    for row in piece.rows:
        a = row[axis]
        b = rational(row[piece.dim])
        if a > 0:
            bound = b / a
            if lo is None or bound > lo:
                lo = bound
        elif a < 0:
            bound = b / a
            if hi is None or bound < hi:
                hi = bound
        elif b > 0:
            return None  # axis misses this piece
    if lo is not None and hi is not None and lo > hi:
        return None
    return float("-inf") if lo is None else lo
