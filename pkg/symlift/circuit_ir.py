# symlift/circuit_ir.py
"""
L-対称なブール閾値回路の表現・検証・評価

回路はゲート族（[n] 上のタプルで添字付けられたゲートの集まり）で記述し、
materialize で n ごとの DAG に展開する。π ∈ Sym_n はゲート (F, s) を (F, π·s) に写すので
族から作った回路は構成上対称になる。
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

import networkx as nx

from symlift.errors import CircuitError, NotSymmetricError
from symlift.lp_model import InputVar
from symlift.symmetry import Permutation, permute_tuple

logger = logging.getLogger(__name__)


# ====== ゲート種別（Start） ======
class Op(str, Enum):
    INPUT = "input"
    NOT = "not"
    AND = "and"
    OR = "or"
    TH = "th"
    EX = "ex"


@dataclass(frozen=True)
class GateKind:
    op: Op
    param: int = 0  # TH の k / EX の t
    rel: Optional[str] = None  # INPUT の関係記号

    def __post_init__(self):
        if self.param < 0:
            raise CircuitError(f"gate parameter must be a natural number, got {self.param}")
        if self.op is Op.INPUT and not self.rel:
            raise CircuitError("input gates need a relation symbol")

    @classmethod
    def input(cls, rel: str) -> "GateKind":
        return cls(Op.INPUT, rel=rel)

    @classmethod
    def not_(cls) -> "GateKind":
        return cls(Op.NOT)

    @classmethod
    def and_(cls) -> "GateKind":
        return cls(Op.AND)

    @classmethod
    def or_(cls) -> "GateKind":
        return cls(Op.OR)

    @classmethod
    def th(cls, k: int) -> "GateKind":
        return cls(Op.TH, param=k)

    @classmethod
    def ex(cls, t: int) -> "GateKind":
        return cls(Op.EX, param=t)

    def __str__(self) -> str:
        if self.op is Op.INPUT:
            return f"input[{self.rel}]"
        if self.op in (Op.TH, Op.EX):
            return f"{self.op.value}[{self.param}]"
        return self.op.value
# ====== ゲート種別（End） ======


# ====== 配線パターン（Start） ======
@dataclass(frozen=True)
class Bound:
    index: int  # 親ゲートの index 番目の添字


@dataclass(frozen=True)
class Star:
    label: int  # [n] 全体を動く新しい添字


PatternEntry = Union[Bound, Star]


def parse_pattern_token(token: str) -> PatternEntry:
    """"b0" → Bound(0), "*1" → Star(1)"""
    try:
        if token.startswith("b"):
            return Bound(int(token[1:]))
        if token.startswith("*"):
            return Star(int(token[1:]))
    except ValueError:
        pass
    raise CircuitError(f"malformed wiring token {token!r} (expected 'b<i>' or '*<j>')")


def pattern_token(entry: PatternEntry) -> str:
    return f"b{entry.index}" if isinstance(entry, Bound) else f"*{entry.label}"


@dataclass(frozen=True)
class WiringPattern:
    target: str
    pattern: tuple[PatternEntry, ...]
    all_tuples: bool = True

    @classmethod
    def parse(cls, target: str, tokens: Sequence[str], all_tuples: bool = True) -> "WiringPattern":
        return cls(target, tuple(parse_pattern_token(t) for t in tokens), all_tuples)

    def star_labels(self) -> list[int]:
        labels = []
        for e in self.pattern:
            if isinstance(e, Star) and e.label not in labels:
                labels.append(e.label)
        return labels

    def expand(self, source: tuple[int, ...], n: int) -> list[tuple[int, ...]]:
        """親タプル source に対する子ゲートのタプルを列挙"""
        labels = self.star_labels()
        if self.all_tuples:
            choices = itertools.product(range(1, n + 1), repeat=len(labels))
        else:
            # distinct モード：星は互いに相異なり、親の添字とも異なる
            free = [i for i in range(1, n + 1) if i not in source]
            choices = itertools.permutations(free, len(labels))
        out = []
        for values in choices:
            assign = dict(zip(labels, values))
            out.append(tuple(source[e.index] if isinstance(e, Bound) else assign[e.label] for e in self.pattern))
        return out
# ====== 配線パターン（End） ======


# ====== 回路仕様と回路（Start） ======
@dataclass(frozen=True)
class GateFamily:
    name: str
    index_arity: int
    kind: GateKind
    wiring: tuple[WiringPattern, ...] = ()


@dataclass(frozen=True)
class CircuitSpec:
    vocabulary: tuple[tuple[str, int], ...]
    families: tuple[GateFamily, ...]
    output_family: str
    output_tuple: tuple[int, ...] = ()

    def family(self, name: str) -> GateFamily:
        for fam in self.families:
            if fam.name == name:
                return fam
        raise CircuitError(f"unknown gate family {name!r}")

    def validate(self) -> "CircuitSpec":
        arity = dict(self.vocabulary)
        names = [f.name for f in self.families]
        if len(set(names)) != len(names):
            raise CircuitError(f"duplicate family names in {names}")
        graph = nx.DiGraph()
        graph.add_nodes_from(names)
        for fam in self.families:
            if fam.index_arity < 0:
                raise CircuitError(f"family {fam.name} has negative arity")
            if fam.kind.op is Op.INPUT:
                if fam.kind.rel not in arity:
                    raise CircuitError(f"family {fam.name} reads unknown relation {fam.kind.rel!r}")
                if arity[fam.kind.rel] != fam.index_arity:
                    raise CircuitError(
                        f"input family {fam.name} has arity {fam.index_arity}, relation {fam.kind.rel} has {arity[fam.kind.rel]}"
                    )
                if fam.wiring:
                    raise CircuitError(f"input family {fam.name} must not have wiring")
                continue
            if not fam.wiring:
                raise CircuitError(f"family {fam.name} has no wiring")
            for w in fam.wiring:
                if w.target not in names:
                    raise CircuitError(f"family {fam.name} wires to missing family {w.target!r}")
                target = self.family(w.target)
                if len(w.pattern) != target.index_arity:
                    raise CircuitError(
                        f"wiring {fam.name} -> {w.target} has length {len(w.pattern)}, target arity is {target.index_arity}"
                    )
                for e in w.pattern:
                    if isinstance(e, Bound) and not 0 <= e.index < fam.index_arity:
                        raise CircuitError(f"wiring {fam.name} -> {w.target} references slot b{e.index} of an arity-{fam.index_arity} family")
                graph.add_edge(fam.name, w.target)
        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            raise CircuitError(f"family graph is cyclic: {cycle}")
        out = self.family(self.output_family)
        if len(self.output_tuple) != out.index_arity:
            raise CircuitError(f"output family {out.name} has arity {out.index_arity}, got tuple {self.output_tuple}")
        return self


GateId = tuple[str, tuple[int, ...]]


def gate_key(g: GateId) -> tuple:
    return (g[0], g[1])


def gate_str(g: GateId) -> str:
    return f"{g[0]}({','.join(map(str, g[1]))})"


@dataclass(frozen=True)
class Circuit:
    n: int
    vocabulary: tuple[tuple[str, int], ...]
    kinds: Mapping[GateId, GateKind]
    children: Mapping[GateId, tuple[GateId, ...]]
    order: tuple[GateId, ...]  # 子が親より先に来るトポロジカル順
    output: GateId
    from_families: bool = field(default=False, compare=False)

    @property
    def gates(self) -> tuple[GateId, ...]:
        return self.order

    def input_var(self, g: GateId) -> InputVar:
        kind = self.kinds[g]
        if kind.op is not Op.INPUT:
            raise CircuitError(f"{gate_str(g)} is not an input gate")
        return InputVar(kind.rel, g[1])

    def input_variables(self) -> list[InputVar]:
        """L(n) 全体（辞書式順）"""
        out = []
        for rel, ar in self.vocabulary:
            for args in itertools.product(range(1, self.n + 1), repeat=ar):
                out.append(InputVar(rel, args))
        return out

    def gate_count(self) -> int:
        return len(self.order)

    def max_fan_in(self) -> int:
        return max((len(ch) for ch in self.children.values()), default=0)

    def has_thresholds(self) -> bool:
        return any(k.op is Op.TH for k in self.kinds.values())


def _dedupe(items: Iterable) -> tuple:
    # 同じ子への多重辺は一本にまとめる（DAG の辺集合）
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return tuple(out)


def _finish(n, vocabulary, kinds, children, output, from_families) -> Circuit:
    """DAG・ファンイン・出力を検証してトポロジカル順を付ける"""
    if output not in kinds:
        raise CircuitError(f"output gate {gate_str(output)} does not exist")
    graph = nx.DiGraph()
    graph.add_nodes_from(kinds)
    for g, kids in children.items():
        for ch in kids:
            if ch not in kinds:
                raise CircuitError(f"{gate_str(g)} has a dangling child {gate_str(ch)}")
            graph.add_edge(ch, g)
    if not nx.is_directed_acyclic_graph(graph):
        raise CircuitError(f"circuit is cyclic: {nx.find_cycle(graph)}")
    for g, kind in kinds.items():
        fan_in = len(children.get(g, ()))
        if kind.op is Op.INPUT:
            if fan_in:
                raise CircuitError(f"input gate {gate_str(g)} has children")
            continue
        if fan_in < 1:
            raise CircuitError(f"gate {gate_str(g)} ({kind}) has fan-in 0")
        if kind.op is Op.NOT and fan_in != 1:
            raise CircuitError(f"NOT gate {gate_str(g)} has fan-in {fan_in}")
        if kind.op is Op.TH and kind.param > fan_in:
            raise CircuitError(f"threshold gate {gate_str(g)} has k = {kind.param} > fan-in {fan_in}")
    order = tuple(nx.lexicographical_topological_sort(graph, key=gate_key))
    return Circuit(
        n=n,
        vocabulary=tuple(vocabulary),
        kinds=dict(kinds),
        children={g: tuple(children.get(g, ())) for g in kinds},
        order=order,
        output=output,
        from_families=from_families,
    )


def materialize(spec: CircuitSpec, n: int) -> Circuit:
    """ゲート族を n について展開：ゲートは (F, s ∈ [n]^arity) 全体"""
    if n < 1:
        raise CircuitError(f"n must be positive, got {n}")
    spec.validate()
    if any(not 1 <= i <= n for i in spec.output_tuple):
        raise CircuitError(f"output tuple {spec.output_tuple} is outside [{n}]")
    kinds = {}
    children = {}
    for fam in spec.families:
        for s in itertools.product(range(1, n + 1), repeat=fam.index_arity):
            g = (fam.name, s)
            kinds[g] = fam.kind
            kids = []
            for w in fam.wiring:
                kids.extend((w.target, t) for t in w.expand(s, n))
            children[g] = _dedupe(kids)
    circuit = _finish(n, spec.vocabulary, kinds, children, (spec.output_family, tuple(spec.output_tuple)), True)
    logger.info(f"materialized circuit at n={n}: {circuit.gate_count()} gates, max fan-in {circuit.max_fan_in()}")
    return circuit


def circuit_from_raw(
    n: int,
    vocabulary: Iterable[tuple[str, int]],
    gates: Iterable[tuple[GateId, GateKind, Sequence[GateId]]],
    output: GateId,
) -> Circuit:
    """生ゲート形式（対称性は仮定せず、後で検証する）"""
    if n < 1:
        raise CircuitError(f"n must be positive, got {n}")
    vocabulary = tuple(vocabulary)
    arity = dict(vocabulary)
    kinds = {}
    children = {}
    for gid, kind, kids in gates:
        gid = (gid[0], tuple(gid[1]))
        if gid in kinds:
            raise CircuitError(f"duplicate gate {gate_str(gid)}")
        if any(not 1 <= i <= n for i in gid[1]):
            raise CircuitError(f"gate {gate_str(gid)} has indices outside [{n}]")
        if kind.op is Op.INPUT:
            if kind.rel not in arity or arity[kind.rel] != len(gid[1]):
                raise CircuitError(f"input gate {gate_str(gid)} does not match relation {kind.rel!r}")
        kinds[gid] = kind
        children[gid] = _dedupe((k[0], tuple(k[1])) for k in kids)
    return _finish(n, vocabulary, kinds, children, (output[0], tuple(output[1])), False)
# ====== 回路仕様と回路（End） ======


# ====== 評価・書き換え（Start） ======
def evaluate(c: Circuit, x: Mapping[InputVar, int]) -> int:
    """トポロジカル順に評価（TH_k は 1 の個数 ≥ k、EX_t は ちょうど t）"""
    values: dict = {}
    for g in c.order:
        kind = c.kinds[g]
        if kind.op is Op.INPUT:
            var = InputVar(kind.rel, g[1])
            if var not in x:
                raise CircuitError(f"missing input value for {var}")
            values[g] = 1 if x[var] else 0
            continue
        bits = [values[ch] for ch in c.children[g]]
        if kind.op is Op.NOT:
            values[g] = 1 - bits[0]
        elif kind.op is Op.AND:
            values[g] = int(all(bits))
        elif kind.op is Op.OR:
            values[g] = int(any(bits))
        elif kind.op is Op.TH:
            values[g] = int(sum(bits) >= kind.param)
        else:
            values[g] = int(sum(bits) == kind.param)
    return values[c.output]


def ex_family_name(family: str, t: int) -> str:
    return f"{family}.ex{t}"


def eliminate_thresholds(c: Circuit) -> Circuit:
    """TH_k(y_1..y_m) を OR_{t=k..m} EX_{m,t}(y_1..y_m) に置き換えた回路 C' を作る"""
    if not c.has_thresholds():
        return c
    kinds = dict(c.kinds)
    children = dict(c.children)
    for g in c.order:
        kind = c.kinds[g]
        if kind.op is not Op.TH:
            continue
        kids = c.children[g]
        ex_gates = []
        for t in range(kind.param, len(kids) + 1):
            e = (ex_family_name(g[0], t), g[1])
            if e in kinds:
                raise CircuitError(f"cannot introduce {gate_str(e)}: name already used")
            kinds[e] = GateKind.ex(t)
            children[e] = kids
            ex_gates.append(e)
        kinds[g] = GateKind.or_()
        children[g] = tuple(ex_gates)
    out = _finish(c.n, c.vocabulary, kinds, children, c.output, c.from_families)
    logger.info(f"threshold elimination: {c.gate_count()} -> {out.gate_count()} gates")
    return out
# ====== 評価・書き換え（End） ======


# ====== 対称性（Start） ======
def symmetric_gate_map(c: Circuit, pi: Permutation) -> dict[GateId, GateId]:
    """(F, s) ↦ (F, π·s) が回路を保つならそのゲート写像を返す。保たなければ NotSymmetricError"""
    mapping = {g: (g[0], permute_tuple(pi, g[1])) for g in c.order}
    for g, p in mapping.items():
        if p not in c.kinds:
            raise NotSymmetricError(f"{gate_str(g)} maps to missing gate {gate_str(p)}")
        if c.kinds[p] != c.kinds[g]:
            raise NotSymmetricError(f"{gate_str(g)} and its image {gate_str(p)} have different kinds")
        image = {mapping[ch] for ch in c.children[g]}
        if len(c.children[p]) != len(c.children[g]) or image != set(c.children[p]):
            raise NotSymmetricError(f"children of {gate_str(g)} do not map onto children of {gate_str(p)}")
    if mapping[c.output] != c.output:
        raise NotSymmetricError(f"output gate {gate_str(c.output)} is moved by the permutation")
    return mapping


def is_symmetric_under(c: Circuit, pi: Permutation) -> bool:
    try:
        symmetric_gate_map(c, pi)
    except NotSymmetricError:
        return False
    return True
# ====== 対称性（End） ======
