# symlift/corpus.py
"""
組み込みの回路・LP コーパス（テストと scripts/export_corpus.py で使う）

回路はすべて二項関係 E（有向グラフ、ループあり）上の認識器。
"""
import itertools
from fractions import Fraction
from typing import Callable

from symlift.circuit_ir import CircuitSpec, GateFamily, GateKind, WiringPattern, evaluate, materialize
from symlift.gadgets import hull_lift, pp_lift
from symlift.lp_model import AuxVar, InputVar, LinearProgram, Segment, aux, box, ge, le, make_lp, total

GRAPH_VOCABULARY = (("E", 2),)

_EDGE_FAMILY = GateFamily("E", 2, GateKind.input("E"))


def _all_edges() -> WiringPattern:
    return WiringPattern.parse("E", ["*1", "*2"])


def _spec(families, output: str) -> CircuitSpec:
    return CircuitSpec(GRAPH_VOCABULARY, (_EDGE_FAMILY, *families), output).validate()


# ====== 回路コーパス（Start） ======
def any_edge() -> CircuitSpec:
    """辺が一本でもあれば 1"""
    return _spec([GateFamily("any", 0, GateKind.or_(), (_all_edges(),))], "any")


def at_least_edges(k: int) -> CircuitSpec:
    return _spec([GateFamily("count", 0, GateKind.th(k), (_all_edges(),))], "count")


def _parity_families(prefix: str, arity: int, inputs: WiringPattern, m: int) -> list[GateFamily]:
    """fan-in m の入力の奇偶：OR_{t 奇数} (TH_t ∧ ¬TH_{t+1})。族 {prefix}parity が出力"""
    bound = [f"b{i}" for i in range(arity)]

    def here(name: str) -> WiringPattern:
        return WiringPattern.parse(f"{prefix}{name}", bound)

    families = [GateFamily(f"{prefix}th{t}", arity, GateKind.th(t), (inputs,)) for t in range(1, m + 1)]
    odd = []
    for t in range(1, m + 1, 2):
        if t == m:
            odd.append(here(f"th{t}"))
            continue
        families.append(GateFamily(f"{prefix}nth{t + 1}", arity, GateKind.not_(), (here(f"th{t + 1}"),)))
        families.append(GateFamily(f"{prefix}odd{t}", arity, GateKind.and_(), (here(f"th{t}"), here(f"nth{t + 1}"))))
        odd.append(here(f"odd{t}"))
    families.append(GateFamily(f"{prefix}parity", arity, GateKind.or_(), tuple(odd)))
    return families


def edge_parity(n: int) -> CircuitSpec:
    """
    辺数が奇数なら 1

    各頂点 i の出次数 |E(i,*)| の奇偶を fan-in n の閾値ゲートで求め、その n 個の奇偶をもう一段同じ形で束ねる。
    閾値ゲートの fan-in はどれも n。
    """
    rows = _parity_families("row_", 1, WiringPattern.parse("E", ["b0", "*1"]), n)
    top = _parity_families("", 0, WiringPattern.parse("row_parity", ["*1"]), n)
    return _spec(rows + top, "parity")


def closed_triangle() -> CircuitSpec:
    """長さ 3 の閉路 E(i,j) ∧ E(j,k) ∧ E(k,i) があれば 1（添字は重複も許す）"""
    walk = GateFamily(
        "walk",
        3,
        GateKind.and_(),
        (
            WiringPattern.parse("E", ["b0", "b1"]),
            WiringPattern.parse("E", ["b1", "b2"]),
            WiringPattern.parse("E", ["b2", "b0"]),
        ),
    )
    return _spec([walk, GateFamily("any", 0, GateKind.or_(), (WiringPattern.parse("walk", ["*1", "*2", "*3"]),))], "any")


def no_edges() -> CircuitSpec:
    """NOT(OR(E))：空グラフだけを受理"""
    return _spec(
        [
            GateFamily("any", 0, GateKind.or_(), (_all_edges(),)),
            GateFamily("none", 0, GateKind.not_(), (WiringPattern.parse("any", []),)),
        ],
        "none",
    )


def single_edge_input() -> CircuitSpec:
    """出力が入力ゲート E(1,2) そのもの（Sym_n 対称ではない）"""
    return CircuitSpec(GRAPH_VOCABULARY, (_EDGE_FAMILY,), "E", (1, 2)).validate()


# 対称な回路コーパス：名前 → n を受けて CircuitSpec を返す関数
SYMMETRIC_CIRCUITS: dict[str, Callable[[int], CircuitSpec]] = {
    "any_edge": lambda n: any_edge(),
    "at_least_2_edges": lambda n: at_least_edges(2),
    "edge_parity": edge_parity,
    "closed_triangle": lambda n: closed_triangle(),
    "no_edges": lambda n: no_edges(),
}
# ====== 回路コーパス（End） ======


# ====== 非剛 LP コーパス（Start） ======
def swap_lp() -> LinearProgram:
    """{x − y_1 − y_2 ≤ 0, y_1 ≤ 1/2, y_2 ≤ 1/2, 0 ≤ x ≤ 1}：ext(id) = {id, y_1 ↔ y_2}"""
    x = InputVar("x", (1,))
    y1, y2 = aux("y", par=(1,)), aux("y", par=(2,))
    half = Fraction(1, 2)
    return make_lp(1, [("x", 1)], [le(x, total([y1, y2])), le(y1, half), le(y2, half), *box(x)])


def twin_hull_lp() -> LinearProgram:
    """同じ点を二度含む凸包リフト：二つの λ が入れ替え可能"""
    xs = [InputVar("x", (1,)), InputVar("x", (2,))]
    return hull_lift([(1, 1), (1, 1), (0, 0)], xs).lp


def double_pp_lp(n: int = 3) -> LinearProgram:
    """同じ入力に二つの pp_lift を重ねたもの：二つのコピーの入れ替えが ext(id) に入る"""
    a = pp_lift(n, prefix="ppa").lp
    b = pp_lift(n, prefix="ppb").lp
    return make_lp(n, [("x", 1)], a.constraints + b.constraints)


NON_RIGID_LPS: dict[str, Callable[[], LinearProgram]] = {
    "swap": swap_lp,
    "twin_hull": twin_hull_lp,
    "double_pp": double_pp_lp,
}
# ====== 非剛 LP コーパス（End） ======


# ====== サポート・管理可能性用の LP（Start） ======
def pair_lp(n: int = 3) -> LinearProgram:
    """非順序対 {i,j} ごとの補助変数 p_{ij} ≤ E(i,j) + E(j,i)、Σ p ≥ 1（サポートは {i,j}）"""
    rows = []
    pairs = []
    for i, j in itertools.combinations(range(1, n + 1), 2):
        p = AuxVar((Segment("pair", dom=(i, j)),))
        pairs.append(p)
        rows.append(le(p, total([InputVar("E", (i, j)), InputVar("E", (j, i))])))
        rows.append(ge(p, 0))
    rows.append(ge(total(pairs), 1))
    return make_lp(n, GRAPH_VOCABULARY, rows)


def empty_supported_lp(n: int = 2) -> LinearProgram:
    """補助変数は y ひとつ（サポート ∅）：y ≤ ΣE, 1 ≤ y ≤ 1"""
    y = aux("y")
    edges = [InputVar("E", args) for args in itertools.product(range(1, n + 1), repeat=2)]
    return make_lp(n, GRAPH_VOCABULARY, [le(y, total(edges)), *box(y, 1, 1)])


def edge_budget_lp(n: int = 2, budget: int = 3) -> LinearProgram:
    """補助変数なしの一本の制約 ΣE ≤ budget"""
    edges = [InputVar("E", args) for args in itertools.product(range(1, n + 1), repeat=2)]
    return make_lp(n, GRAPH_VOCABULARY, [le(total(edges), budget)])
# ====== サポート・管理可能性用の LP（End） ======


# ====== 制限リフト用の LP（Start） ======
def _y_vars(n: int) -> list[InputVar]:
    return [InputVar("y", args) for args in itertools.product(range(1, n + 1), repeat=2)]


def complete_point_lift(n: int = 2) -> LinearProgram:
    """y = 1（全座標）の一点だけの凸包リフト"""
    ys = _y_vars(n)
    out = hull_lift([(1,) * len(ys)], ys).lp
    return make_lp(n, [("y", 2)], out.constraints)


def cube_lift(n: int = 2) -> LinearProgram:
    return make_lp(n, [("y", 2)], [row for y in _y_vars(n) for row in box(y)])


def empty_lift(n: int = 2) -> LinearProgram:
    """点のない凸包（0 = 1 を含むので実行不能）"""
    ys = _y_vars(n)
    out = hull_lift([], ys).lp
    return make_lp(n, [("y", 2)], out.constraints)


def loops_lift(n: int = 2) -> LinearProgram:
    """ループだけのグラフと空グラフの凸包"""
    ys = _y_vars(n)
    loops = tuple(1 if y.args[0] == y.args[1] else 0 for y in ys)
    out = hull_lift([loops, (0,) * len(ys)], ys).lp
    return make_lp(n, [("y", 2)], out.constraints)


RESTRICTION_LIFTS: dict[str, Callable[[], LinearProgram]] = {
    "complete_point": complete_point_lift,
    "cube": cube_lift,
    "empty": empty_lift,
    "loops": loops_lift,
}
# ====== 制限リフト用の LP（End） ======


def graph_inputs(n: int) -> list[InputVar]:
    return [InputVar("E", args) for args in itertools.product(range(1, n + 1), repeat=2)]


def accepted_graphs(spec: CircuitSpec, n: int) -> frozenset:
    """回路が受理する 0/1 ベクトル（graph_inputs の順）"""
    c = materialize(spec, n)
    inputs = graph_inputs(n)
    return frozenset(
        bits for bits in itertools.product((0, 1), repeat=len(inputs)) if evaluate(c, dict(zip(inputs, bits)))
    )
