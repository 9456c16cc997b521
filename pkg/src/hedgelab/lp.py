"""Exact rational linear programming.

Two-phase tableau simplex over ``Fraction`` with Bland's rule, so every run
terminates and is deterministic.  Each outcome carries a certificate that can
be checked by substitution alone (:func:`verify_outcome`):

* optimal    -- primal witness plus dual multipliers proving optimality;
* infeasible -- Farkas multipliers ``y`` with ``sum y_i a_i = 0`` and
  ``sum y_i b_i > 0``;
* unbounded  -- a feasible witness plus an improving recession ray.

Multipliers refer to the *normalized rows* of :meth:`LinearProgram.normalized_rows`:
every constraint rewritten as ``a.x >= b`` (``<=`` rows negated) or
``a.x = b``, followed by one row per finite lower bound (``x_j >= l``) and one
per finite upper bound (``-x_j >= -u``).  Inequality multipliers are
nonnegative; equality multipliers are free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .prob_space import ModelError, as_fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)

RELATIONS = ("<=", "=", ">=")


@dataclass
class LinearProgram:
    """``sense`` is ``"max"``, ``"min"`` or ``"feasibility"``."""

    variables: int
    objective: Sequence = ()
    sense: str = "feasibility"
    constraints: list = field(default_factory=list)
    bounds: list = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("max", "min", "feasibility"):
            raise ModelError(f"unknown sense {self.sense!r}")
        n = self.variables
        obj = list(self.objective) if self.objective else [0] * n
        if len(obj) != n:
            raise ModelError("objective length differs from variable count")
        self.objective = tuple(as_fraction(c) for c in obj)
        rows = []
        for row, rel, rhs in self.constraints:
            if rel not in RELATIONS:
                raise ModelError(f"unknown relation {rel!r}")
            if len(row) != n:
                raise ModelError("constraint row length differs from variable count")
            rows.append((tuple(as_fraction(a) for a in row), rel, as_fraction(rhs)))
        self.constraints = rows
        if not self.bounds:
            self.bounds = [(None, None)] * n
        if len(self.bounds) != n:
            raise ModelError("one bound pair per variable is required")
        self.bounds = [(None if lo is None else as_fraction(lo), None if hi is None else as_fraction(hi))
                       for lo, hi in self.bounds]

    def add(self, row, rel, rhs):
        if len(row) != self.variables:
            raise ModelError("constraint row length differs from variable count")
        if rel not in RELATIONS:
            raise ModelError(f"unknown relation {rel!r}")
        self.constraints.append((tuple(as_fraction(a) for a in row), rel, as_fraction(rhs)))

    def normalized_rows(self) -> list:
        """List of (coefficients, kind in {">=", "="}, rhs, origin)."""
        n = self.variables
        out = []
        for i, (row, rel, rhs) in enumerate(self.constraints):
            if rel == "<=":
                out.append((tuple(-a for a in row), ">=", -rhs, ("row", i)))
            else:
                out.append((row, rel, rhs, ("row", i)))
        for j, (lo, hi) in enumerate(self.bounds):
            if lo is not None:
                e = [_ZERO] * n
                e[j] = _ONE
                out.append((tuple(e), ">=", lo, ("lower", j)))
        for j, (lo, hi) in enumerate(self.bounds):
            if hi is not None:
                e = [_ZERO] * n
                e[j] = -_ONE
                out.append((tuple(e), ">=", -hi, ("upper", j)))
        return out

    def min_objective(self) -> tuple:
        if self.sense == "max":
            return tuple(-c for c in self.objective)
        if self.sense == "min":
            return self.objective
        return (_ZERO,) * self.variables


@dataclass
class LpOutcome:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    witness: Optional[tuple] = None  # primal point (optimal / unbounded)
    value: Optional[Fraction] = None  # objective value at the witness
    dual: Optional[tuple] = None     # optimal: multipliers on normalized rows
    certificate: Optional[tuple] = None  # infeasible: Farkas y; unbounded: ray
    pivots: int = 0


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r, c, objs):
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            row = [v * inv if v else v for v in row]
            self.rows[r] = row
            self.rhs[r] = self.rhs[r] * inv
        nz = [j for j, v in enumerate(row) if v]
        b = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[c]
            if f:
                for j in nz:
                    other[j] -= f * row[j]
                self.rhs[i] -= f * b
        for obj in objs:
            f = obj[0][c]
            if f:
                vec = obj[0]
                for j in nz:
                    vec[j] -= f * row[j]
                obj[1] -= f * b
        self.basis[r] = c
        self.pivots += 1


def _run(tab: _Tableau, obj, allowed):
    """Bland's rule on objective ``obj = [reduced costs, -value]``.

    Returns None on optimality or the entering column of an unbounded ray.
    """
    red = obj[0]
    while True:
        enter = None
        for j in allowed:
            if red[j] < 0:
                enter = j
                break
        if enter is None:
            return None
        best = None
        leave = None
        for i, row in enumerate(tab.rows):
            a = row[enter]
            if a > 0:
                ratio = tab.rhs[i] / a
                if best is None or ratio < best or (ratio == best and tab.basis[i] < tab.basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            return enter
        tab.pivot(leave, enter, [obj])


def solve_lp(lp: LinearProgram) -> LpOutcome:
    n = lp.variables
    # Column map: structural columns z >= 0, x = shift + sum(coef * z).
    cols = []          # (var j, coefficient)
    shift = [_ZERO] * n
    extra_upper = []   # vars with both bounds -> explicit ">=" row on z
    native_lower = {}  # var j -> column index carrying its lower-bound dual
    native_upper = {}
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            shift[j] = lo
            native_lower[j] = len(cols)
            cols.append((j, _ONE))
            if hi is not None:
                extra_upper.append(j)
        elif hi is not None:
            shift[j] = hi
            native_upper[j] = len(cols)
            cols.append((j, -_ONE))
        else:
            cols.append((j, _ONE))
            cols.append((j, -_ONE))
    var_cols = [[] for _ in range(n)]
    for c, (j, s) in enumerate(cols):
        var_cols[j].append((c, s))

    # Rows in normalized orientation, then in z-space.
    norm = []
    for i, (row, rel, rhs) in enumerate(lp.constraints):
        if rel == "<=":
            norm.append(([-a for a in row], ">=", -rhs, ("row", i)))
        else:
            norm.append((list(row), rel, rhs, ("row", i)))
    for j in extra_upper:
        e = [_ZERO] * n
        e[j] = -_ONE
        norm.append((e, ">=", -lp.bounds[j][1], ("upper", j)))

    m = len(norm)
    nz_cols = len(cols)
    slack_of = {}
    n_slack = 0
    for i, (_, kind, _, _) in enumerate(norm):
        if kind == ">=":
            slack_of[i] = nz_cols + n_slack
            n_slack += 1
    n_struct = nz_cols + n_slack
    width = n_struct + m  # artificials at the end
    rows = []
    rhs = []
    sigma = []
    for i, (a, kind, b, _) in enumerate(norm):
        zrow = [_ZERO] * width
        for j, aj in enumerate(a):
            if aj:
                for c, s in var_cols[j]:
                    zrow[c] += aj * s
        bb = b - sum((aj * shift[j] for j, aj in enumerate(a) if aj), _ZERO)
        if i in slack_of:
            zrow[slack_of[i]] = -_ONE
        sg = -1 if bb < 0 else 1
        if sg < 0:
            zrow = [-v for v in zrow]
            bb = -bb
        zrow[n_struct + i] = _ONE
        rows.append(zrow)
        rhs.append(bb)
        sigma.append(sg)
    tab = _Tableau(rows, rhs, [n_struct + i for i in range(m)])

    # Phase 1: minimize the sum of artificials.
    red1 = [_ZERO] * width
    val1 = _ZERO
    for i in range(m):
        for j in range(n_struct):
            v = rows[i][j]
            if v:
                red1[j] -= v
        val1 -= rhs[i]
    obj1 = [red1, val1]
    structural = list(range(n_struct))
    _run(tab, obj1, structural)
    if obj1[1] != 0:
        # -value = obj1[1] < 0  ->  phase-1 optimum positive: infeasible
        y_std = [_ONE - obj1[0][n_struct + i] for i in range(m)]
        return _farkas(lp, norm, sigma, y_std, obj1[0], cols, native_lower, native_upper, tab.pivots)

    # Drive zero-level artificials out of the basis where possible.
    for r in range(m):
        if tab.basis[r] >= n_struct:
            row = tab.rows[r]
            for j in range(n_struct):
                if row[j]:
                    tab.pivot(r, j, [obj1])
                    break

    cmin = lp.min_objective()
    cz = [_ZERO] * width
    for c, (j, s) in enumerate(cols):
        cz[c] = cmin[j] * s
    red2 = list(cz)
    val2 = -sum((cmin[j] * shift[j] for j in range(n)), _ZERO)
    for i, b in enumerate(tab.basis):
        cb = cz[b]
        if cb:
            row = tab.rows[i]
            for j in range(width):
                if row[j]:
                    red2[j] -= cb * row[j]
            val2 -= cb * tab.rhs[i]
    obj2 = [red2, val2]
    enter = _run(tab, obj2, structural)

    z = [_ZERO] * n_struct
    for i, b in enumerate(tab.basis):
        if b < n_struct:
            z[b] = tab.rhs[i]
    x = tuple(shift[j] + sum((s * z[c] for c, s in var_cols[j]), _ZERO) for j in range(n))
    value = sum((c * xi for c, xi in zip(lp.objective, x)), _ZERO)

    if enter is not None:
        dz = [_ZERO] * n_struct
        dz[enter] = _ONE
        for i, b in enumerate(tab.basis):
            if b < n_struct:
                dz[b] = -tab.rows[i][enter]
        ray = tuple(sum((s * dz[c] for c, s in var_cols[j]), _ZERO) for j in range(n))
        return LpOutcome("unbounded", witness=x, value=value, certificate=ray, pivots=tab.pivots)

    y_std = [-obj2[0][n_struct + i] for i in range(m)]
    dual = _map_multipliers(lp, norm, sigma, y_std, obj2[0], cols, native_lower, native_upper)
    return LpOutcome("optimal", witness=x, value=value, dual=dual, pivots=tab.pivots)


def _map_multipliers(lp, norm, sigma, y_std, red, cols, native_lower, native_upper):
    """Assemble multipliers in the layout of ``lp.normalized_rows()``."""
    y = {}
    for i, (_, _, _, origin) in enumerate(norm):
        y[origin] = sigma[i] * y_std[i]
    out = [y[("row", i)] for i in range(len(lp.constraints))]
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            out.append(red[native_lower[j]])
    for j, (lo, hi) in enumerate(lp.bounds):
        if hi is not None:
            if lo is not None:
                out.append(y[("upper", j)])
            else:
                out.append(red[native_upper[j]])
    return tuple(out)


def _farkas(lp, norm, sigma, y_std, red, cols, native_lower, native_upper, pivots):
    # Phase-1 reduced costs of structural columns are 0 - y.A_col; they give
    # the bound multipliers directly.
    cert = _map_multipliers(lp, norm, sigma, y_std, red, cols, native_lower, native_upper)
    return LpOutcome("infeasible", certificate=cert, pivots=pivots)


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), _ZERO)


def is_feasible_point(lp: LinearProgram, x) -> bool:
    for a, kind, b, _ in lp.normalized_rows():
        v = _dot(a, x)
        if kind == "=" and v != b:
            return False
        if kind == ">=" and v < b:
            return False
    return True


def verify_outcome(lp: LinearProgram, out: LpOutcome) -> bool:
    """Re-check a solver outcome by exact substitution only."""
    rows = lp.normalized_rows()
    n = lp.variables
    if out.status == "infeasible":
        y = out.certificate
        if y is None or len(y) != len(rows):
            return False
        comb = [_ZERO] * n
        total = _ZERO
        for yi, (a, kind, b, _) in zip(y, rows):
            if kind == ">=" and yi < 0:
                return False
            for j in range(n):
                comb[j] += yi * a[j]
            total += yi * b
        return all(c == 0 for c in comb) and total > 0
    if out.witness is None or not is_feasible_point(lp, out.witness):
        return False
    cmin = lp.min_objective()
    if out.status == "unbounded":
        r = out.certificate
        for a, kind, b, _ in rows:
            v = _dot(a, r)
            if kind == "=" and v != 0:
                return False
            if kind == ">=" and v < 0:
                return False
        return _dot(cmin, r) < 0
    if out.status == "optimal":
        y = out.dual
        if y is None or len(y) != len(rows):
            return False
        comb = [_ZERO] * n
        total = _ZERO
        for yi, (a, kind, b, _) in zip(y, rows):
            if kind == ">=" and yi < 0:
                return False
            for j in range(n):
                comb[j] += yi * a[j]
            total += yi * b
        return tuple(comb) == tuple(cmin) and total == _dot(cmin, out.witness)
    return False
