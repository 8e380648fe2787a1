# symlift/gadgets.py
"""
ポリトープ・リフトの部品（ガジェット）

- ex_slice_lp：ハミング重み t のスライス
- pp_lift / truncated_pp_lift：（打ち切り）パリティポリトープのリフト
- bit_extraction_lp：Σx の二進各桁の反転 z_1..z_|n| を取り出す段々の LP
- ex_gate_lp / gate_lp：EX_{n,t} と AND/OR/NOT ゲートの LP

座標は VarId か Affine を受け付け、定数は右辺に畳み込む。
xs 省略時は入力変数 x(1..n)（語彙 [("x", 1)]）を使い、スロット添字を補助変数の dom に置く。
xs を渡したときはスロット添字を par に置く（群作用は呼び出し側が与える）。
"""
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from symlift.errors import GadgetError
from symlift.lp_model import (
    Affine,
    AuxVar,
    InputVar,
    LinearConstraint,
    LinearProgram,
    VarId,
    aux,
    box,
    eq,
    le,
    make_lp,
    total,
)
from symlift.utils import binary_digits, bit_length

logger = logging.getLogger(__name__)

Coord = Union[VarId, Affine, int]

GADGET_KINDS = ("ex-slice", "pp", "tpp", "bits", "ex-gate", "and", "or", "not")


@dataclass(frozen=True)
class GadgetOutput:
    kind: str
    lp: LinearProgram
    interface: Mapping[str, tuple] = field(default_factory=dict)
    prefix: Optional[AuxVar] = None
    slots: int = 0  # 置換の対象になる x スロットの数


def _as_prefix(prefix: Union[AuxVar, str, None], default: str) -> AuxVar:
    if prefix is None:
        return aux(default)
    if isinstance(prefix, str):
        return aux(prefix)
    return prefix


def _default_inputs(n: int) -> list[InputVar]:
    return [InputVar("x", (i,)) for i in range(1, n + 1)]


def _check_n(n: int) -> None:
    if n < 1:
        raise GadgetError(f"n must be positive, got {n}")


def _inputs(n: int, xs: Optional[Sequence[Coord]]) -> tuple[bool, list]:
    _check_n(n)
    if xs is None:
        return True, _default_inputs(n)
    xs = list(xs)
    if len(xs) != n:
        raise GadgetError(f"expected {n} input coordinates, got {len(xs)}")
    return False, xs


def _host_lp(constraints: list[LinearConstraint], standalone: bool, n: int) -> LinearProgram:
    """ガジェット単体の LP を作る。xs 指定時は制約中の入力変数から n と語彙を推定"""
    if standalone:
        return make_lp(n, [("x", 1)], constraints)
    arity: dict[str, int] = {}
    top = 1
    for c in constraints:
        for v, _ in c.terms:
            if isinstance(v, InputVar):
                if arity.setdefault(v.rel, len(v.args)) != len(v.args):
                    raise GadgetError(f"relation {v.rel} used with two arities")
                top = max([top, *v.args])
            else:
                for seg in v.path:
                    top = max([top, *seg.dom])
    return make_lp(top, sorted(arity.items()), constraints)


# ====== スライス混合（Start） ======
def _slot_labels(count: int, domain_slots: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    # 先頭 domain_slots 個は dom に、それ以外（パディング位置を含む）は par の末尾に置く
    return [((p,), ()) if p <= domain_slots else ((), (p,)) for p in range(1, count + 1)]


def _slice_mixture(
    prefix: AuxVar,
    coords: Sequence[Affine],
    slices: Sequence[tuple[tuple[int, ...], int]],
    domain_slots: int,
) -> list[LinearConstraint]:
    """x = Σ_key w_key·y_key（y_key はサイズ size のスライス）を表す LP"""
    labels = _slot_labels(len(coords), domain_slots)
    w = {key: prefix.child("w", par=key) for key, _ in slices}
    z = {
        (key, p): prefix.child("z", dom=dom, par=key + tail)
        for key, _ in slices
        for p, (dom, tail) in enumerate(labels, start=1)
    }
    rows = [eq(total(w.values()), 1)]
    for key, _ in slices:
        rows.extend(box(w[key]))
    for p, coord in enumerate(coords, start=1):
        rows.append(eq(total(z[key, p] for key, _ in slices), coord))
    for key, size in slices:
        rows.append(eq(total(z[key, p] for p in range(1, len(coords) + 1)), size * Affine.of(w[key])))
    for key, _ in slices:
        for p in range(1, len(coords) + 1):
            rows.append(le(0, z[key, p]))
            rows.append(le(z[key, p], w[key]))
    return rows


def pp_constraints(prefix: AuxVar, coords: Sequence[Coord], domain_slots: int = 0) -> list[LinearConstraint]:
    n = len(coords)
    slices = [((t,), 2 * t + 1) for t in range(n // 2 + 1)]
    return _slice_mixture(prefix, [Affine.of(c) for c in coords], slices, domain_slots)


def tpp_constraints(prefix: AuxVar, q: int, coords: Sequence[Coord], domain_slots: int = 0) -> list[LinearConstraint]:
    n = len(coords)
    if not 0 <= q <= bit_length(n) - 1:
        raise GadgetError(f"q must lie in 0..{bit_length(n) - 1} for n = {n}, got {q}")
    slices = [
        ((t, r), (1 << q) * (2 * t + 1) + r)
        for t in range(n // (1 << (q + 1)) + 1)
        for r in range(1 << q)
    ]
    return _slice_mixture(prefix, [Affine.of(c) for c in coords], slices, domain_slots)
# ====== スライス混合（End） ======


# ====== ビット抽出と EX ゲート（Start） ======
def bit_vars(prefix: AuxVar, n: int) -> list[AuxVar]:
    return [prefix.child("bit", par=(k,)) for k in range(1, bit_length(n) + 1)]


def bits_constraints(prefix: AuxVar, xs: Sequence[Coord], domain_slots: int = 0) -> list[LinearConstraint]:
    """行 q：(x, 1^(2^q), z_1^(1), …, z_q^(2^(q-1)), 1 - z_{q+1}) ∈ PP(n + 2^(q+1), q)"""
    n = len(xs)
    zs = bit_vars(prefix, n)
    rows = []
    for q in range(bit_length(n)):
        coords: list[Coord] = list(xs) + [1] * (1 << q)
        for j in range(1, q + 1):
            coords.extend([zs[j - 1]] * (1 << (j - 1)))
        coords.append(1 - Affine.of(zs[q]))
        rows.extend(tpp_constraints(prefix.child("row", par=(q,)), q, coords, domain_slots))
    return rows


def ex_gate_constraints(
    prefix: AuxVar, t: int, xs: Sequence[Coord], y: Coord, domain_slots: int = 0
) -> list[LinearConstraint]:
    n = len(xs)
    if not 0 <= t <= n:
        raise GadgetError(f"t must lie in 0..{n}, got {t}")
    width = bit_length(n)
    zs = bit_vars(prefix, n)
    digits = binary_digits(t, width)
    k0 = [zs[k] for k in range(width) if digits[k] == 0]
    k1 = [zs[k] for k in range(width) if digits[k] == 1]
    y = Affine.of(y)
    rows = bits_constraints(prefix, xs, domain_slots)
    rows.append(le(total(k0) + total(1 - Affine.of(z) for z in k1) - width + 1, y))
    rows.extend(le(y, z) for z in k0)
    rows.extend(le(y, 1 - Affine.of(z)) for z in k1)
    rows.extend([le(0, y), le(y, 1)])
    return rows
# ====== ビット抽出と EX ゲート（End） ======


# ====== AND/OR/NOT（Start） ======
def gate_constraints(kind: str, xs: Sequence[Coord], y: Coord) -> list[LinearConstraint]:
    kind = kind.lower()
    xs = [Affine.of(x) for x in xs]
    y = Affine.of(y)
    m = len(xs)
    if kind == "not":
        if m != 1:
            raise GadgetError(f"NOT takes exactly one input, got {m}")
        return [eq(y, 1 - xs[0]), *_boxes(xs[0]), *_boxes(y)]
    if m < 1:
        raise GadgetError(f"{kind.upper()} needs at least one input")
    if kind == "and":
        rows = [le(total(xs) - m + 1, y)]
        rows.extend(le(y, x) for x in xs)
    elif kind == "or":
        rows = [le(total(1 - x for x in xs) - m + 1, 1 - y)]
        rows.extend(le(1 - y, 1 - x) for x in xs)
    else:
        raise GadgetError(f"unknown gate kind {kind!r} (expected and, or, not)")
    for x in xs:
        rows.extend(_boxes(x))
    rows.extend(_boxes(y))
    return rows


def _boxes(a: Affine) -> list[LinearConstraint]:
    return [le(0, a), le(a, 1)]
# ====== AND/OR/NOT（End） ======


# ====== 公開コンストラクタ（Start） ======
def ex_slice_lp(n: int, t: int, xs: Optional[Sequence[Coord]] = None) -> GadgetOutput:
    """{Σ x_k = t} ∪ {0 ≤ x_k ≤ 1}。補助変数なし"""
    standalone, xs = _inputs(n, xs)
    if not 0 <= t <= n:
        raise GadgetError(f"t must lie in 0..{n}, got {t}")
    rows = [eq(total(xs), t)]
    for x in xs:
        rows.extend(_boxes(Affine.of(x)))
    return GadgetOutput("ex-slice", _host_lp(rows, standalone, n), {"x": tuple(xs)}, None, n)


def pp_lift(n: int, xs: Optional[Sequence[Coord]] = None, prefix: Union[AuxVar, str, None] = None) -> GadgetOutput:
    standalone, xs = _inputs(n, xs)
    root = _as_prefix(prefix, "pp")
    rows = pp_constraints(root, xs, n if standalone else 0)
    return GadgetOutput("pp", _host_lp(rows, standalone, n), {"x": tuple(xs)}, root, n)


def truncated_pp_lift(
    n: int, q: int, xs: Optional[Sequence[Coord]] = None, prefix: Union[AuxVar, str, None] = None
) -> GadgetOutput:
    standalone, xs = _inputs(n, xs)
    root = _as_prefix(prefix, "tpp")
    rows = tpp_constraints(root, q, xs, n if standalone else 0)
    return GadgetOutput("tpp", _host_lp(rows, standalone, n), {"x": tuple(xs)}, root, n)


def bit_extraction_lp(
    n: int, xs: Optional[Sequence[Coord]] = None, prefix: Union[AuxVar, str, None] = None
) -> GadgetOutput:
    standalone, xs = _inputs(n, xs)
    root = _as_prefix(prefix, "bits")
    rows = bits_constraints(root, xs, n if standalone else 0)
    out = GadgetOutput("bits", _host_lp(rows, standalone, n), {"x": tuple(xs), "z": tuple(bit_vars(root, n))}, root, n)
    logger.debug(f"bit extraction n={n}: {len(out.lp.aux_vars)} aux vars, {len(rows)} rows")
    return out


def ex_gate_lp(
    n: int,
    t: int,
    xs: Optional[Sequence[Coord]] = None,
    y: Optional[VarId] = None,
    prefix: Union[AuxVar, str, None] = None,
) -> GadgetOutput:
    standalone, xs = _inputs(n, xs)
    y = aux("y") if y is None else y
    root = _as_prefix(prefix, "ex")
    rows = ex_gate_constraints(root, t, xs, y, n if standalone else 0)
    interface = {"x": tuple(xs), "y": (y,), "z": tuple(bit_vars(root, n))}
    return GadgetOutput("ex-gate", _host_lp(rows, standalone, n), interface, root, n)


def gate_lp(kind: str, xs: Union[Sequence[Coord], int], y: Optional[VarId] = None) -> GadgetOutput:
    """xs に整数 m を渡すと x(1..m) を入力にする"""
    standalone = isinstance(xs, int)
    if standalone:
        _check_n(xs)
        xs = _default_inputs(xs)
    xs = list(xs)
    y = aux("y") if y is None else y
    rows = gate_constraints(kind, xs, y)
    return GadgetOutput(kind.lower(), _host_lp(rows, standalone, max(1, len(xs))), {"x": tuple(xs), "y": (y,)}, None, len(xs))


def hull_lift(
    points: Sequence[Sequence[int]],
    xs: Sequence[Coord],
    prefix: Union[AuxVar, str, None] = None,
) -> GadgetOutput:
    """conv(A)：x = Σ_a λ_a·a, Σ λ_a = 1, λ_a ≥ 0（A が空なら実行不能）"""
    xs = list(xs)
    root = _as_prefix(prefix, "hull")
    lam = [root.child("lam", par=(idx,)) for idx in range(len(points))]
    rows = [eq(total(lam), 1)]
    for idx, point in enumerate(points):
        if len(point) != len(xs):
            raise GadgetError(f"point {idx} has {len(point)} coordinates, expected {len(xs)}")
        rows.append(le(0, lam[idx]))
    for i, x in enumerate(xs):
        rows.append(eq(x, total(point[i] * Affine.of(lam[idx]) for idx, point in enumerate(points))))
    return GadgetOutput("hull", _host_lp(rows, False, len(xs)), {"x": tuple(xs)}, root, len(xs))


def build_gadget(
    kind: str, n: int, t: Optional[int] = None, q: Optional[int] = None, prefix: Optional[str] = None
) -> GadgetOutput:
    """CLI の --kind から各コンストラクタへ振り分ける"""
    if kind not in GADGET_KINDS:
        raise GadgetError(f"unknown gadget kind {kind!r}, expected one of {', '.join(GADGET_KINDS)}")
    _check_n(n)
    if kind in ("ex-slice", "ex-gate") and t is None:
        raise GadgetError(f"--t is required for {kind}")
    if kind == "tpp" and q is None:
        raise GadgetError("--q is required for tpp")
    if kind == "ex-slice":
        return ex_slice_lp(n, t)
    if kind == "pp":
        return pp_lift(n, prefix=prefix)
    if kind == "tpp":
        return truncated_pp_lift(n, q, prefix=prefix)
    if kind == "bits":
        return bit_extraction_lp(n, prefix=prefix)
    if kind == "ex-gate":
        return ex_gate_lp(n, t, prefix=prefix)
    return gate_lp(kind, n)
# ====== 公開コンストラクタ（End） ======


# ====== スロット置換（Start） ======
def permute_slot(v: AuxVar, tau: Mapping[int, int], slots: int) -> AuxVar:
    """葉が z のとき、スロット添字（dom があれば dom の末尾、なければ par の末尾）を τ で写す"""
    leaf = v.leaf
    if leaf.tag != "z":
        return v
    if leaf.dom:
        i = leaf.dom[-1]
        if i > slots:
            return v
        new_leaf = type(leaf)(leaf.tag, leaf.dom[:-1] + (tau.get(i, i),), leaf.par)
    else:
        i = leaf.par[-1]
        if i > slots:
            return v
        new_leaf = type(leaf)(leaf.tag, leaf.dom, leaf.par[:-1] + (tau.get(i, i),))
    return AuxVar(v.path[:-1] + (new_leaf,))


def slot_permutation_map(gadget: GadgetOutput, tau: Mapping[int, int]) -> dict[AuxVar, AuxVar]:
    """x スロットの置換 τ に対する σ：z_{·,i} ↦ z_{·,τ(i)}、w・bit・y などはそのまま"""
    if sorted(tau.keys()) != sorted(tau.values()) or any(not 1 <= i <= gadget.slots for i in tau):
        raise GadgetError(f"slot permutation {dict(tau)} is not a permutation of 1..{gadget.slots}")
    return {v: permute_slot(v, tau, gadget.slots) for v in gadget.lp.aux_vars}
# ====== スロット置換（End） ======
