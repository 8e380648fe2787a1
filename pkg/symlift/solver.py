# symlift/solver.py
"""
厳密有理数 LP ソルバー

二段階単体法（Bland の最小添字規則）を疎なタブローで回す。
前処理で単一変数行を上下限に、固定変数を代入、強制行（活動量の上下限が右辺に一致）を固定する。
返す点はすべて元の制約に対して厳密に検算する（許容誤差は使わない）。
"""
import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from symlift import config
from symlift.errors import InfeasibleError, SolverError, UnboundedPolytopeError, UnknownVariableError
from symlift.lp_model import (
    LinearProgram,
    Rel,
    VarId,
    is_satisfied,
    substitute,
    var_key,
)
from symlift.utils import zero_one_points

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


# ====== 結果型（Start） ======
@dataclass(frozen=True)
class Infeasible:
    status = "infeasible"


@dataclass(frozen=True)
class Unbounded:
    ray: Mapping[VarId, Fraction] = field(default_factory=dict)
    status = "unbounded"


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    point: Mapping[VarId, Fraction] = field(default_factory=dict)
    status = "optimal"


SolveStatus = Union[Infeasible, Unbounded, Optimal]
# ====== 結果型（End） ======


# ====== 前処理（Start） ======
@dataclass
class _Presolved:
    rows: list  # (coeffs: dict, rel, rhs)
    lo: dict
    hi: dict
    fixed: dict


def _activity_bounds(coeffs: dict, lo: dict, hi: dict) -> tuple[Optional[Fraction], Optional[Fraction]]:
    mn: Optional[Fraction] = ZERO
    mx: Optional[Fraction] = ZERO
    for v, a in coeffs.items():
        low, high = (lo.get(v), hi.get(v)) if a > 0 else (hi.get(v), lo.get(v))
        mn = None if mn is None or low is None else mn + a * low
        mx = None if mx is None or high is None else mx + a * high
    return mn, mx


def _presolve(constraints) -> Optional[_Presolved]:
    """実行不能が確定したら None"""
    rows = [(dict(c.terms), c.rel, c.rhs) for c in constraints]
    lo: dict = {}
    hi: dict = {}
    fixed: dict = {}

    def tighten(v, lower=None, upper=None) -> bool:
        if lower is not None and (lo.get(v) is None or lower > lo[v]):
            lo[v] = lower
        if upper is not None and (hi.get(v) is None or upper < hi[v]):
            hi[v] = upper
        if lo.get(v) is not None and hi.get(v) is not None:
            if lo[v] > hi[v]:
                return False
            if lo[v] == hi[v]:
                fixed[v] = lo[v]
        return True

    def force(coeffs: dict, at_min: bool) -> None:
        for v, a in coeffs.items():
            fixed[v] = lo[v] if (a > 0) == at_min else hi[v]

    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        kept = []
        for coeffs, rel, rhs in rows:
            for v in [v for v in coeffs if v in fixed]:
                rhs -= coeffs.pop(v) * fixed[v]
            if not coeffs:
                if (rel is Rel.EQ and rhs != 0) or (rel is Rel.LE and rhs < 0):
                    return None
                changed = True
                continue
            if len(coeffs) == 1:
                ((v, a),) = coeffs.items()
                bound = rhs / a
                if rel is Rel.EQ:
                    ok = tighten(v, bound, bound)
                elif a > 0:
                    ok = tighten(v, upper=bound)
                else:
                    ok = tighten(v, lower=bound)
                if not ok:
                    return None
                changed = True
                continue
            mn, mx = _activity_bounds(coeffs, lo, hi)
            if mn is not None and mn > rhs:
                return None
            if rel is Rel.EQ and mx is not None and mx < rhs:
                return None
            if mn is not None and mn == rhs:
                force(coeffs, at_min=True)
                changed = True
                continue
            if rel is Rel.EQ and mx is not None and mx == rhs:
                force(coeffs, at_min=False)
                changed = True
                continue
            if rel is Rel.LE and mx is not None and mx <= rhs:
                changed = True
                continue
            kept.append((coeffs, rel, rhs))
        rows = kept
    logger.debug(f"presolve: {rounds} rounds, {len(rows)} rows left, {len(fixed)} variables fixed")
    return _Presolved(rows, lo, hi, fixed)
# ====== 前処理（End） ======


# ====== タブロー（Start） ======
class _Tableau:
    """各行 Σ_j rows[i][j]·x_j = rhs[i]（基底列を明示的に保持）、目的 z = obj_const + Σ obj[j]·x_j"""

    def __init__(self, rows: list[dict], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.obj: dict = {}
        self.obj_const = ZERO
        self.pivots = 0

    def set_objective(self, cost: Mapping[int, Fraction]) -> None:
        self.obj = {j: c for j, c in cost.items() if c}
        self.obj_const = ZERO
        for i, b in enumerate(self.basis):
            cb = cost.get(b, ZERO)
            if not cb:
                continue
            self.obj_const += cb * self.rhs[i]
            for j, a in self.rows[i].items():
                value = self.obj.get(j, ZERO) - cb * a
                if value:
                    self.obj[j] = value
                else:
                    self.obj.pop(j, None)

    def _entering(self) -> Optional[int]:
        candidates = [j for j, d in self.obj.items() if d < 0]
        return min(candidates) if candidates else None

    def _leaving(self, e: int) -> Optional[int]:
        best = None
        for i, row in enumerate(self.rows):
            a = row.get(e)
            if a is None or a <= 0:
                continue
            key = (self.rhs[i] / a, self.basis[i])
            if best is None or key < best[0]:
                best = (key, i)
        return None if best is None else best[1]

    def pivot(self, r: int, e: int) -> None:
        row = self.rows[r]
        p = row[e]
        if p != 1:
            row = {j: a / p for j, a in row.items()}
            self.rows[r] = row
            self.rhs[r] /= p
        rhs_r = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(e)
            if not f:
                continue
            for j, a in row.items():
                value = other.get(j, ZERO) - f * a
                if value:
                    other[j] = value
                else:
                    other.pop(j, None)
            self.rhs[i] -= f * rhs_r
        f = self.obj.get(e)
        if f:
            for j, a in row.items():
                value = self.obj.get(j, ZERO) - f * a
                if value:
                    self.obj[j] = value
                else:
                    self.obj.pop(j, None)
            self.obj_const += f * rhs_r
        self.basis[r] = e
        self.pivots += 1

    def run(self) -> tuple[str, Optional[int]]:
        """最小化。("optimal", None) か ("unbounded", 入る列)"""
        while True:
            e = self._entering()
            if e is None:
                return "optimal", None
            r = self._leaving(e)
            if r is None:
                return "unbounded", e
            self.pivot(r, e)

    def values(self) -> dict[int, Fraction]:
        return {b: self.rhs[i] for i, b in enumerate(self.basis)}

    def ray(self, e: int) -> dict[int, Fraction]:
        out = {e: Fraction(1)}
        for i, row in enumerate(self.rows):
            a = row.get(e)
            if a:
                out[self.basis[i]] = out.get(self.basis[i], ZERO) - a
        return out
# ====== タブロー（End） ======


# ====== 標準形への変換（Start） ======
@dataclass
class _Column:
    var: VarId
    mode: str  # "shift"：x = lo + x'、"flip"：x = hi - x'、"free"：x = x⁺ - x⁻
    offset: Fraction
    cols: tuple[int, ...]


def _standard_form(pre: _Presolved, objective_vars: Iterable[VarId]):
    """x' ≥ 0 の標準形を作る。戻り値：(列情報, 行, 右辺, 初期基底, 人工変数の開始列)"""
    occurring = {v for coeffs, _, _ in pre.rows for v in coeffs}
    occurring |= {v for v in objective_vars if v not in pre.fixed}
    columns: dict[VarId, _Column] = {}
    ncols = 0
    bound_rows = []
    for v in sorted(occurring, key=var_key):
        low, high = pre.lo.get(v), pre.hi.get(v)
        if low is not None:
            columns[v] = _Column(v, "shift", low, (ncols,))
            if high is not None:
                bound_rows.append(({ncols: Fraction(1)}, Rel.LE, high - low))
            ncols += 1
        elif high is not None:
            columns[v] = _Column(v, "flip", high, (ncols,))
            ncols += 1
        else:
            columns[v] = _Column(v, "free", ZERO, (ncols, ncols + 1))
            ncols += 2

    std_rows = []
    for coeffs, rel, rhs in pre.rows:
        row: dict = {}
        for v, a in coeffs.items():
            col = columns[v]
            if col.mode == "shift":
                rhs -= a * col.offset
                row[col.cols[0]] = a
            elif col.mode == "flip":
                rhs -= a * col.offset
                row[col.cols[0]] = -a
            else:
                row[col.cols[0]] = a
                row[col.cols[1]] = -a
        std_rows.append((row, rel, rhs))
    std_rows.extend(bound_rows)

    # スラック列
    rows, rhs_list, basis, needs_art = [], [], [], []
    for row, rel, rhs in std_rows:
        row = dict(row)
        slack = None
        if rel is Rel.LE:
            slack = ncols
            row[slack] = Fraction(1)
            ncols += 1
        if rhs < 0:
            row = {j: -a for j, a in row.items()}
            rhs = -rhs
        rows.append(row)
        rhs_list.append(rhs)
        if slack is not None and row[slack] == 1:
            basis.append(slack)
            needs_art.append(False)
        else:
            basis.append(-1)
            needs_art.append(True)
    first_art = ncols
    for i, need in enumerate(needs_art):
        if need:
            rows[i][ncols] = Fraction(1)
            basis[i] = ncols
            ncols += 1
    return columns, rows, rhs_list, basis, first_art


def _to_original(columns: dict, std: Mapping[int, Fraction], direction: bool = False) -> dict:
    out = {}
    for v, col in columns.items():
        if col.mode == "free":
            value = std.get(col.cols[0], ZERO) - std.get(col.cols[1], ZERO)
        elif col.mode == "shift":
            value = std.get(col.cols[0], ZERO) + (ZERO if direction else col.offset)
        else:
            value = (ZERO if direction else col.offset) - std.get(col.cols[0], ZERO)
        out[v] = value
    return out
# ====== 標準形への変換（End） ======


# ====== 公開 API（Start） ======
def _check_vars(lp: LinearProgram, variables: Iterable[VarId]) -> None:
    for v in variables:
        if not lp.has_variable(v):
            raise UnknownVariableError(f"{v} is not a variable of this LP")


def _solve(lp: LinearProgram, cost: Mapping[VarId, Fraction]) -> SolveStatus:
    """min Σ cost_v·v。cost が空なら実行可能性のみ（第一段階だけ）"""
    pre = _presolve(lp.constraints)
    if pre is None:
        return Infeasible()
    columns, rows, rhs, basis, first_art = _standard_form(pre, cost.keys())
    tab = _Tableau(rows, rhs, basis)

    if any(b >= first_art for b in basis):
        tab.set_objective({b: Fraction(1) for b in basis if b >= first_art})
        tab.run()
        if tab.obj_const > 0:
            logger.debug(f"phase 1 infeasible after {tab.pivots} pivots")
            return Infeasible()
        # 基底に残った人工変数（値 0）を追い出す。追い出せない行は冗長
        redundant = []
        for i, b in enumerate(tab.basis):
            if b < first_art:
                continue
            j = min((j for j in tab.rows[i] if j < first_art), default=None)
            if j is None:
                redundant.append(i)
            else:
                tab.pivot(i, j)
        for i in reversed(redundant):
            del tab.rows[i], tab.rhs[i], tab.basis[i]
        for row in tab.rows:
            for j in [j for j in row if j >= first_art]:
                del row[j]

    std_cost: dict[int, Fraction] = {}
    for v, c in cost.items():
        if not c or v in pre.fixed:
            continue
        col = columns[v]
        if col.mode == "shift":
            std_cost[col.cols[0]] = std_cost.get(col.cols[0], ZERO) + c
        elif col.mode == "flip":
            std_cost[col.cols[0]] = std_cost.get(col.cols[0], ZERO) - c
        else:
            std_cost[col.cols[0]] = std_cost.get(col.cols[0], ZERO) + c
            std_cost[col.cols[1]] = std_cost.get(col.cols[1], ZERO) - c
    tab.set_objective(std_cost)
    outcome, entering = tab.run()
    if outcome == "unbounded":
        ray = {v: d for v, d in _to_original(columns, tab.ray(entering), direction=True).items() if d}
        logger.debug(f"unbounded after {tab.pivots} pivots")
        return Unbounded(ray)

    point = {v: ZERO for v in lp.variables()}
    for v, low in pre.lo.items():
        point[v] = low
    for v, high in pre.hi.items():
        if pre.lo.get(v) is None:
            point[v] = high
    point.update(pre.fixed)
    point.update(_to_original(columns, tab.values()))
    if not is_satisfied(lp, point):
        raise SolverError("internal error: returned point violates a constraint")
    value = sum((c * point[v] for v, c in cost.items()), ZERO)
    logger.debug(f"solved: {len(tab.rows)} rows, {tab.pivots} pivots")
    return Optimal(value, point)


def feasible(lp: LinearProgram, fix: Optional[Mapping[VarId, Fraction]] = None) -> bool:
    """fix を代入したうえで実行可能か"""
    if fix:
        lp = substitute(lp, fix)
    return isinstance(_solve(lp, {}), Optimal)


def optimize(lp: LinearProgram, objective: Mapping[VarId, Fraction], sense: str = "min") -> SolveStatus:
    if sense not in ("min", "max"):
        raise SolverError(f"sense must be 'min' or 'max', got {sense!r}")
    objective = {v: Fraction(c) for v, c in objective.items()}
    _check_vars(lp, objective)
    if sense == "min":
        return _solve(lp, objective)
    result = _solve(lp, {v: -c for v, c in objective.items()})
    if isinstance(result, Optimal):
        return Optimal(-result.value, result.point)
    return result


def variable_range(lp: LinearProgram, v: VarId) -> tuple:
    """(最小値, 最大値)。非有界側は -math.inf / math.inf"""
    _check_vars(lp, [v])
    low = optimize(lp, {v: 1}, "min")
    if isinstance(low, Infeasible):
        raise InfeasibleError("variable_range on an infeasible LP")
    high = optimize(lp, {v: 1}, "max")
    return (
        low.value if isinstance(low, Optimal) else -math.inf,
        high.value if isinstance(high, Optimal) else math.inf,
    )


def recognized_set(lp: LinearProgram) -> frozenset:
    """{0,1}^inputs のうち代入後に実行可能な点（input_variables の順の 0/1 タプル）"""
    inputs = lp.input_variables()
    accepted = set()
    for bits in zero_one_points(len(inputs)):
        if feasible(lp, dict(zip(inputs, map(Fraction, bits)))):
            accepted.add(bits)
    return frozenset(accepted)
# ====== 公開 API（End） ======


# ====== 頂点列挙（Start） ======
def _add_row(echelon: list, row: list, rhs: Fraction) -> Optional[list]:
    """簡約行階段形に一行加える。従属なら None"""
    row = list(row)
    for pivot_col, prow, prhs in echelon:
        f = row[pivot_col]
        if f:
            row = [a - f * b for a, b in zip(row, prow)]
            rhs -= f * prhs
    pivot_col = next((j for j, a in enumerate(row) if a), None)
    if pivot_col is None:
        return None
    p = row[pivot_col]
    row = [a / p for a in row]
    rhs /= p
    out = []
    for pc, prow, prhs in echelon:
        f = prow[pivot_col]
        if f:
            prow = [a - f * b for a, b in zip(prow, row)]
            prhs -= f * rhs
        out.append((pc, prow, prhs))
    out.append((pivot_col, row, rhs))
    return out


def enumerate_vertices(lp: LinearProgram) -> list[dict]:
    """有界な多面体の頂点を、極大ランクの活性制約系を総当たりで解いて列挙する"""
    variables = lp.variables()
    d = len(variables)
    config.guard("vertex variables", d, config.VERTEX_MAX_VARS)
    config.guard("vertex constraints", len(lp.constraints), config.VERTEX_MAX_CONSTRAINTS)
    if d == 0:
        return [{}] if is_satisfied(lp, {}) else []
    if not feasible(lp):
        return []
    for v in variables:
        for sense in ("min", "max"):
            result = optimize(lp, {v: 1}, sense)
            if isinstance(result, Unbounded):
                raise UnboundedPolytopeError(f"polytope is unbounded along {v} ({sense}); ray {result.ray}")

    index = {v: j for j, v in enumerate(variables)}

    def dense(c) -> list:
        row = [ZERO] * d
        for v, a in c.terms:
            row[index[v]] = a
        return row

    echelon: list = []
    for c in lp.constraints:
        if c.rel is Rel.EQ:
            echelon = _add_row(echelon, dense(c), c.rhs) or echelon
    inequalities = [(dense(c), c.rhs) for c in lp.constraints if c.rel is Rel.LE]

    found: dict[tuple, dict] = {}

    def search(start: int, ech: list) -> None:
        if len(ech) == d:
            point = {variables[pc]: prhs for pc, _, prhs in ech}
            key = tuple(point[v] for v in variables)
            if key not in found and is_satisfied(lp, point):
                found[key] = point
            return
        if len(inequalities) - start < d - len(ech):
            return
        for i in range(start, len(inequalities)):
            nxt = _add_row(ech, *inequalities[i])
            if nxt is not None:
                search(i + 1, nxt)

    search(0, echelon)
    logger.info(f"enumerated {len(found)} vertices over {d} variables")
    return [found[key] for key in sorted(found)]
# ====== 頂点列挙（End） ======
