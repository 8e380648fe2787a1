# symlift/compiler.py
"""
回路 → LP リフト

各ゲート o に変数 y_o（0 ≤ y_o ≤ 1）を置き、種類ごとのガジェットでその計算を表す。
y_o は Aux[(族名, dom = ゲートの添字)] なので、π の作用は (F, s) ↦ (F, π·s) とそのまま一致する。
"""
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional

from symlift.circuit_ir import Circuit, GateId, Op, gate_str, symmetric_gate_map
from symlift.errors import CompileError
from symlift.gadgets import ex_gate_constraints, gate_constraints, permute_slot
from symlift.lp_model import (
    AuxVar,
    InputVar,
    LinearProgram,
    Segment,
    box,
    eq,
    le,
    lp_size,
    make_lp,
)
from symlift.symmetry import AuxMap, Permutation
from symlift.utils import bit_length

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompiledLift:
    lp: LinearProgram
    gate_var: Mapping[GateId, AuxVar]
    witness_recipe: Mapping[GateId, Optional[AuxVar]]  # EX ゲートのガジェット接頭辞（なければ None）
    circuit: Circuit = field(compare=False, repr=False)


def gate_variable(g: GateId) -> AuxVar:
    return AuxVar((Segment(g[0], dom=tuple(g[1])),))


def lift_size_bound(c: Circuit) -> int:
    """
    lp_size(compile(c)) の上限

    G = ゲート数、D = max(1, 最大 fan-in)、W = |D| として (12·W·D²·G + 1)·(40·W·D²·G + 2)·|5D|。
    EX ゲート一個あたり補助変数は 12·W·D² 個以下、制約（EQ は二本）は 40·W·D² 本以下、係数はスライスの大きさ 5D 以下。
    """
    g = c.gate_count()
    d = max(1, c.max_fan_in())
    per_gate = bit_length(d) * d * d
    return (12 * per_gate * g + 1) * (40 * per_gate * g + 2) * bit_length(5 * d)


def compile(c: Circuit) -> CompiledLift:
    """LP(C)：閾値ゲートを含む回路は eliminate_thresholds を先に通すこと"""
    if c.has_thresholds():
        raise CompileError("circuit contains threshold gates; run eliminate_thresholds first")
    gate_var = {g: gate_variable(g) for g in c.order}
    recipe: dict = {}
    rows = []
    for g in c.order:
        y = gate_var[g]
        kind = c.kinds[g]
        rows.extend(box(y))
        try:
            kids = [gate_var[ch] for ch in c.children[g]]
        except KeyError as e:
            raise CompileError(f"{gate_str(g)} has a dangling child {e.args[0]}") from e
        recipe[g] = None
        if kind.op is Op.INPUT:
            rows.append(eq(y, c.input_var(g)))
        elif kind.op in (Op.NOT, Op.AND, Op.OR):
            rows.extend(gate_constraints(kind.op.value, kids, y))
        elif kind.op is Op.EX:
            if kind.param > len(kids):
                raise CompileError(f"EX gate {gate_str(g)} has t = {kind.param} > fan-in {len(kids)}")
            prefix = y.child("ex")
            rows.extend(ex_gate_constraints(prefix, kind.param, kids, y))
            recipe[g] = prefix
        else:
            raise CompileError(f"cannot compile gate kind {kind}")
    rows.append(eq(gate_var[c.output], 1))
    lp = make_lp(c.n, c.vocabulary, rows)
    logger.info(
        f"compiled {c.gate_count()} gates at n={c.n}: {len(lp.aux_vars)} aux vars, "
        f"{len(lp.constraints)} constraints, size {lp_size(lp)} (bound {lift_size_bound(c)})"
    )
    return CompiledLift(lp, gate_var, recipe, c)


def symmetry_witness(cl: CompiledLift, pi: Permutation) -> AuxMap:
    """ゲートごとに σ を組み立てる：y_o ↦ y_p（p = π·o）、EX ガジェットの内部は子の並びの置換 τ_o で写して p 側へ付け替える"""
    c = cl.circuit
    gate_map = symmetric_gate_map(c, pi)
    sigma: dict = {}
    slot_perm: dict = {}
    for o, p in gate_map.items():
        sigma[cl.gate_var[o]] = cl.gate_var[p]
        if cl.witness_recipe.get(o) is None:
            continue
        position = {ch: j for j, ch in enumerate(c.children[p], start=1)}
        slot_perm[o] = {i: position[gate_map[ch]] for i, ch in enumerate(c.children[o], start=1)}
    for v in cl.lp.aux_vars:
        if v in sigma:
            continue
        head = v.path[0]
        o = (head.tag, head.dom)
        p = gate_map[o]
        old_prefix = cl.witness_recipe[o]
        new_prefix = cl.witness_recipe[p]
        moved = permute_slot(v, slot_perm[o], len(c.children[o]))
        sigma[v] = moved.rebase(old_prefix, new_prefix)
    return sigma


def subgraph_restriction_lift(p: LinearProgram, out_rel: str = "x") -> LinearProgram:
    """Q：x_ij を入力に、p の入力 y_ij と補助変数をすべて補助変数に移し、0 ≤ y_ij ≤ x_ij を加える"""
    if len(p.vocabulary) != 1 or p.vocabulary[0][1] != 2:
        raise CompileError(f"restriction needs a single binary relation, got vocabulary {list(p.vocabulary)}")
    if p.fixed:
        raise CompileError("restriction needs an LP without substituted inputs")
    n = p.n

    def lift(v):
        if isinstance(v, InputVar):
            return AuxVar((Segment("y", dom=v.args),))
        return AuxVar((Segment("lifted"),) + v.path)

    rows = [c.rename(lift) for c in p.constraints]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            y = AuxVar((Segment("y", dom=(i, j)),))
            rows.append(le(0, y))
            rows.append(le(y, InputVar(out_rel, (i, j))))
    q = make_lp(n, [(out_rel, 2)], rows)
    logger.info(f"restriction lift: {len(p.constraints)} -> {len(q.constraints)} constraints")
    return q
