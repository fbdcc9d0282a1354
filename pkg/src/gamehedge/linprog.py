"""Exact linear programming over the rationals.

A dense two-phase tableau simplex.  Free variables are handled natively (they
are pivoted into the basis up front and never leave), inequality rows get
slack columns, and artificial columns are added only where the initial basis
needs them.  The entering rule is Dantzig's, falling back to Bland's rule
after a run of degenerate pivots so termination is guaranteed in exact
arithmetic.  Infeasibility comes with Farkas multipliers and unboundedness
with an improving ray.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rational import ONE, ZERO, Rational, qdot, qvec, rational


@dataclass(frozen=True)
class LinearConstraint:
    normal: tuple
    offset: Rational
    equality: bool = False


@dataclass(frozen=True)
class LinearProgram:
    """Minimise ``objective·x`` subject to rows ``normal·x >= offset`` (or ``==``).

    ``nonneg`` optionally marks variables constrained to be nonnegative;
    variables are free by default.
    """

    objective: tuple
    rows: tuple
    nonneg: tuple | None = None

    def constraint(self, index: int) -> LinearConstraint:
        row = self.rows[index]
        if isinstance(row, LinearConstraint):
            return row
        normal, offset = row[0], row[1]
        equality = bool(row[2]) if len(row) > 2 else False
        return LinearConstraint(qvec(normal), rational(offset), equality)


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: tuple | None = None
    value: Rational | None = None
    ray: tuple | None = None  # improving direction when unbounded
    farkas: tuple | None = None  # row multipliers when infeasible


_STALL_LIMIT = 60


class _Tableau:
    __slots__ = ("tab", "basis", "col_free", "banned", "nrows")

    def __init__(self, tab, basis, col_free, banned):
        self.tab = tab
        self.basis = basis
        self.col_free = col_free
        self.banned = banned
        self.nrows = len(tab)

    def pivot(self, r, j):
        tab = self.tab
        row = tab[r]
        coef = row[j]
        if coef != 1:
            row = [v / coef for v in row]
            tab[r] = row
        for rr in range(self.nrows):
            if rr == r:
                continue
            factor = tab[rr][j]
            if factor != 0:
                tab[rr] = [a - factor * b for a, b in zip(tab[rr], row)]
        self.basis[r] = j

    def simplex(self, cost):
        """Optimise in place; returns ('optimal', None) or ('unbounded', col)."""
        tab, basis, col_free = self.tab, self.basis, self.col_free
        width = len(cost) - 1
        stall = 0
        bland = False
        last_value = cost[-1]
        while True:
            enter = -1
            if bland:
                for j in range(width):
                    if cost[j] < 0 and j not in self.banned:
                        enter = j
                        break
            else:
                best = ZERO
                for j in range(width):
                    if cost[j] < best and j not in self.banned:
                        best = cost[j]
                        enter = j
            if enter < 0:
                return "optimal", None
            leave = -1
            ratio = None
            for r in range(self.nrows):
                b = basis[r]
                if b < 0 or col_free[b]:
                    continue  # free basic variables never block
                coef = tab[r][enter]
                if coef > 0:
                    cand = tab[r][-1] / coef
                    if (
                        ratio is None
                        or cand < ratio
                        or (cand == ratio and b < basis[leave])
                    ):
                        ratio = cand
                        leave = r
            if leave < 0:
                return "unbounded", enter
            self.pivot(leave, enter)
            factor = cost[enter]
            if factor != 0:
                row = tab[leave]
                for j in range(width + 1):
                    if row[j] != 0:
                        cost[j] -= factor * row[j]
            if cost[-1] == last_value:
                stall += 1
                if stall > _STALL_LIMIT:
                    bland = True
            else:
                last_value = cost[-1]
                stall = 0
                bland = False


def lp_solve(lp: LinearProgram) -> LPResult:
    nvars = len(lp.objective)
    objective = qvec(lp.objective)
    constraints = [lp.constraint(i) for i in range(len(lp.rows))]
    for c in constraints:
        if len(c.normal) != nvars:
            raise ValueError("constraint arity does not match objective")
    nonneg = lp.nonneg if lp.nonneg is not None else (False,) * nvars

    nrows = len(constraints)
    nslack = sum(0 if c.equality else 1 for c in constraints)
    width = nvars + nslack
    tab = []
    slack_of_row = {}
    s = nvars
    for r, c in enumerate(constraints):
        row = [rational(v) for v in c.normal] + [ZERO] * nslack + [rational(c.offset)]
        if not c.equality:
            row[s] = -ONE  # normal·x - s = offset, s >= 0
            slack_of_row[r] = s
            s += 1
        tab.append(row)

    basis = [-1] * nrows
    col_free = [not nonneg[j] for j in range(nvars)] + [False] * nslack
    fixed_zero = set()

    T = _Tableau(tab, basis, col_free, fixed_zero)

    # pivot free variables into the basis once; they never leave
    for j in range(nvars):
        if not col_free[j]:
            continue
        pivot_row = -1
        for r in range(nrows):
            if basis[r] == -1 and tab[r][j] != 0:
                pivot_row = r
                break
        if pivot_row < 0:
            if objective[j] != 0:
                ray = [ZERO] * nvars
                ray[j] = -ONE if objective[j] > 0 else ONE
                return LPResult(status="unbounded", ray=tuple(ray))
            fixed_zero.add(j)
            continue
        T.pivot(pivot_row, j)

    # initial basis for the remaining rows: the row's slack if that is
    # feasible, otherwise a fresh artificial column matching the rhs sign
    artificials = []  # (column, row, gamma, is_artificial)
    init_basis = {}
    for r in range(nrows):
        if basis[r] != -1:
            continue
        sc = slack_of_row.get(r)
        if sc is not None and tab[r][sc] != 0 and tab[r][-1] / tab[r][sc] >= 0:
            T.pivot(r, sc)
            init_basis[r] = (sc, -ONE, False)
            continue
        gamma = ONE if tab[r][-1] >= 0 else -ONE
        col = width
        width += 1
        for rr in range(nrows):
            tab[rr].insert(-1, gamma if rr == r else ZERO)
        col_free.append(False)
        artificials.append(col)
        basis[r] = col
        init_basis[r] = (col, gamma, True)
        if gamma != 1:
            T.pivot(r, col)

    art_set = set(artificials)
    T.banned = fixed_zero | art_set  # artificial columns never (re-)enter

    if artificials:
        cost = [ZERO] * (width + 1)
        for col in artificials:
            cost[col] = ONE
        for r in range(nrows):
            if basis[r] in art_set:
                row = tab[r]
                cost = [a - b for a, b in zip(cost, row)]
        status, _ = T.simplex(cost)
        assert status == "optimal"  # bounded below by zero
        if -cost[-1] > 0:
            farkas = _farkas_certificate(constraints, nvars)
            return LPResult(status="infeasible", farkas=farkas)
        _purge_artificials(T, art_set, width)

    cost = [rational(v) for v in objective] + [ZERO] * (width - nvars) + [ZERO]
    for r in range(nrows):
        b = basis[r]
        if b >= 0 and cost[b] != 0:
            factor = cost[b]
            row = tab[r]
            cost = [a - factor * v for a, v in zip(cost, row)]
    status, enter = T.simplex(cost)
    if status == "unbounded":
        direction = [ZERO] * width
        direction[enter] = ONE
        for r in range(nrows):
            b = basis[r]
            if b >= 0 and tab[r][enter] != 0:
                direction[b] = -tab[r][enter]
        return LPResult(status="unbounded", ray=tuple(direction[:nvars]))

    point = [ZERO] * nvars
    for r in range(nrows):
        b = basis[r]
        if 0 <= b < nvars:
            point[b] = tab[r][-1]
    value = qdot(objective, point)
    return LPResult(status="optimal", point=tuple(point), value=value)


def _purge_artificials(T, art_set, width):
    for r in range(T.nrows):
        if T.basis[r] not in art_set:
            continue
        pivot_col = -1
        for j in range(width):
            if j not in art_set and T.tab[r][j] != 0:
                pivot_col = j
                break
        if pivot_col >= 0:
            T.pivot(r, pivot_col)
        else:
            T.tab[r] = [ZERO] * len(T.tab[r])  # redundant row
            T.basis[r] = -1


def _farkas_certificate(constraints, nvars):
    """Multipliers y: y >= 0 on inequalities, yᵀA vanishing on free variables,
    and yᵀb > 0, obtained from a fresh all-artificial phase-1 solve.

    Variables are split into nonnegative pairs here so every row keeps a unit
    artificial column; this path only runs on infeasible programs.
    """
    nrows = len(constraints)
    nslack = sum(0 if c.equality else 1 for c in constraints)
    width = 2 * nvars + nslack + nrows
    tab = []
    flip = []
    s = 2 * nvars
    for r, c in enumerate(constraints):
        row = [rational(v) for v in c.normal]
        row += [-v for v in row]
        row += [ZERO] * (nslack + nrows) + [rational(c.offset)]
        if not c.equality:
            row[s] = -ONE
            s += 1
        if row[-1] < 0:
            row = [-v for v in row]
            flip.append(True)
        else:
            flip.append(False)
        row[2 * nvars + nslack + r] = ONE
        tab.append(row)
    basis = list(range(2 * nvars + nslack, 2 * nvars + nslack + nrows))
    col_free = [False] * width
    T = _Tableau(tab, basis, col_free, set())
    cost = [ZERO] * (width + 1)
    for col in range(2 * nvars + nslack, width):
        cost[col] = ONE
    for r in range(nrows):
        cost = [a - b for a, b in zip(cost, tab[r])]
    status, _ = T.simplex(cost)
    assert status == "optimal" and -cost[-1] > 0
    y = []
    for r in range(nrows):
        col = 2 * nvars + nslack + r
        val = ONE - cost[col]
        y.append(-val if flip[r] else val)
    return tuple(y)
