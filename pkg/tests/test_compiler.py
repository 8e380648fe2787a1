import itertools
import random

import pytest
from conftest import cube_points, fix_bits

from symlift.circuit_ir import GateKind, circuit_from_raw, eliminate_thresholds, evaluate, materialize
from symlift.compiler import (
    compile as compile_circuit,
    gate_variable,
    lift_size_bound,
    subgraph_restriction_lift,
    symmetry_witness,
)
from symlift.corpus import (
    RESTRICTION_LIFTS,
    SYMMETRIC_CIRCUITS,
    accepted_graphs,
    any_edge,
    at_least_edges,
    closed_triangle,
    edge_parity,
    graph_inputs,
    no_edges,
    single_edge_input,
)
from symlift.errors import CompileError, NotSymmetricError
from symlift.gadgets import pp_lift
from symlift.lp_model import Rel, lp_size
from symlift.solver import feasible, recognized_set
from symlift.symmetry import all_permutations, identity, identity_map, is_invariant, transposition


def _lift(spec, n):
    return compile_circuit(eliminate_thresholds(materialize(spec, n)))


# ====== LP(C) の構成（Start） ======
def test_single_input_gate():
    cl = _lift(single_edge_input(), 2)
    assert recognized_set(cl.lp) == accepted_graphs(single_edge_input(), 2)
    assert len(recognized_set(cl.lp)) == 8


def test_any_edge_recognizes_nonempty_graphs():
    cl = _lift(any_edge(), 2)
    assert recognized_set(cl.lp) == accepted_graphs(any_edge(), 2)
    assert (0, 0, 0, 0) not in recognized_set(cl.lp)
    assert len(recognized_set(cl.lp)) == 15


def test_not_gate():
    cl = _lift(no_edges(), 2)
    assert recognized_set(cl.lp) == {(0, 0, 0, 0)}


def test_and_or_circuits_need_no_gadget_variables():
    cl = _lift(any_edge(), 2)
    assert cl.lp.aux_vars == frozenset(cl.gate_var.values())
    assert all(prefix is None for prefix in cl.witness_recipe.values())
    assert cl.gate_var[("any", ())] == gate_variable(("any", ()))


def test_threshold_gate_on_one_point():
    cl = _lift(at_least_edges(1), 1)
    assert recognized_set(cl.lp) == {(1,)}
    assert cl.witness_recipe[("count.ex1", ())] == gate_variable(("count.ex1", ())).child("ex")


@pytest.fixture(scope="module")
def at_least_two():
    return _lift(at_least_edges(2), 2)


@pytest.mark.parametrize("bits", [(0, 0, 0, 0), (0, 1, 0, 0), (0, 1, 1, 0), (1, 1, 0, 1), (1, 1, 1, 1)])
def test_at_least_two_edges(at_least_two, bits):
    cl = at_least_two
    assert feasible(cl.lp, fix_bits(graph_inputs(2), bits)) == (sum(bits) >= 2)


def test_compile_rejects_bad_circuits():
    with pytest.raises(CompileError):
        compile_circuit(materialize(at_least_edges(2), 2))
    gates = [
        (("x", (1,)), GateKind.input("x"), []),
        (("x", (2,)), GateKind.input("x"), []),
        (("g", ()), GateKind.ex(3), [("x", (1,)), ("x", (2,))]),
    ]
    with pytest.raises(CompileError):
        compile_circuit(circuit_from_raw(2, [("x", 1)], gates, ("g", ())))


def _random_circuit(rng: random.Random, n: int = 3):
    """x_1..x_n の上のランダムな AND/OR/NOT/TH 回路（最後に作ったゲートが出力）"""
    gates = [(("x", (i,)), GateKind.input("x"), []) for i in range(1, n + 1)]
    ids = [g for g, _, _ in gates]
    for k in range(rng.randint(1, 5)):
        kids = rng.sample(ids, rng.randint(1, min(4, len(ids))))
        op = rng.choice(["and", "or", "not", "th"])
        if op == "not":
            kind, kids = GateKind.not_(), kids[:1]
        elif op == "th":
            kind = GateKind.th(rng.randint(1, len(kids)))
        else:
            kind = GateKind.and_() if op == "and" else GateKind.or_()
        gates.append(((f"g{k}", ()), kind, kids))
        ids.append((f"g{k}", ()))
    return circuit_from_raw(n, [("x", 1)], gates, ids[-1])


@pytest.mark.parametrize("seed", range(10))
def test_random_circuits_compile_exactly(seed):
    c = _random_circuit(random.Random(seed))
    flat = eliminate_thresholds(c)
    cl = compile_circuit(flat)
    inputs = c.input_variables()
    for bits in cube_points(len(inputs)):
        assert feasible(cl.lp, fix_bits(inputs, bits)) == bool(evaluate(c, dict(zip(inputs, bits))))
    assert lp_size(cl.lp) <= lift_size_bound(flat)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("name", sorted(SYMMETRIC_CIRCUITS))
def test_lift_size_stays_under_the_bound(name, n):
    c = eliminate_thresholds(materialize(SYMMETRIC_CIRCUITS[name](n), n))
    assert lp_size(compile_circuit(c).lp) <= lift_size_bound(c)


def test_gate_only_circuits_stay_linear():
    for spec in (any_edge(), no_edges(), closed_triangle()):
        cl = _lift(spec, 2)
        assert cl.lp.aux_vars == frozenset(cl.gate_var.values())
        # 変数はゲートごとに y_o と入力一つまで、行は fan-in に比例
        rows = sum(2 if c.rel is Rel.EQ else 1 for c in cl.lp.constraints)
        assert rows <= 8 * sum(max(1, len(ch)) for ch in cl.circuit.children.values()) + 2
# ====== LP(C) の構成（End） ======


# ====== 対称性の証拠（Start） ======
def test_identity_witness_is_identity():
    cl = _lift(at_least_edges(1), 2)
    assert symmetry_witness(cl, identity(2)) == identity_map(cl.lp)


def test_gate_wise_witness_preserves_the_lift(at_least_two):
    for cl in (_lift(any_edge(), 2), at_least_two):
        for pi in all_permutations(2):
            assert is_invariant(cl.lp, pi, symmetry_witness(cl, pi))


@pytest.mark.parametrize(
    "spec",
    [
        any_edge(),
        no_edges(),
        closed_triangle(),
        pytest.param(edge_parity(4), marks=pytest.mark.slow),
    ],
    ids=["any_edge", "no_edges", "closed_triangle", "edge_parity"],
)
def test_gate_wise_witness_at_four(spec):
    cl = _lift(spec, 4)
    for pi in all_permutations(4):
        assert is_invariant(cl.lp, pi, symmetry_witness(cl, pi))


def test_witness_moves_ex_gadget_slots():
    cl = _lift(at_least_edges(1), 2)
    sigma = symmetry_witness(cl, transposition(2, 1, 2))
    moved = [v for v in cl.lp.aux_vars if v.leaf.tag == "z" and sigma[v] != v]
    assert moved
    assert all(sigma[v].path[:2] == v.path[:2] for v in moved)


def test_asymmetric_circuit_has_no_witness():
    cl = _lift(single_edge_input(), 2)
    with pytest.raises(NotSymmetricError):
        symmetry_witness(cl, transposition(2, 1, 2))
# ====== 対称性の証拠（End） ======


# ====== 部分グラフ制限（Start） ======
def _monotone_closure(points, n):
    """A の点を部分グラフとして含む 0/1 ベクトル"""
    width = n * n
    return {
        x for x in itertools.product((0, 1), repeat=width) if any(all(a <= b for a, b in zip(p, x)) for p in points)
    }


@pytest.mark.parametrize("name", sorted(RESTRICTION_LIFTS))
def test_restriction_lift_is_monotone_closure(name):
    p = RESTRICTION_LIFTS[name]()
    q = subgraph_restriction_lift(p)
    assert [v.rel for v in q.input_variables()] == ["x"] * 4
    assert [v.args for v in q.input_variables()] == [v.args for v in p.input_variables()]
    assert recognized_set(q) == _monotone_closure(recognized_set(p), 2)


def test_restriction_shadows_of_known_lifts():
    assert recognized_set(RESTRICTION_LIFTS["complete_point"]()) == {(1, 1, 1, 1)}
    assert recognized_set(RESTRICTION_LIFTS["loops"]()) == {(1, 0, 0, 1), (0, 0, 0, 0)}
    assert recognized_set(RESTRICTION_LIFTS["empty"]()) == frozenset()
    assert len(recognized_set(RESTRICTION_LIFTS["cube"]())) == 16


def test_restriction_needs_one_binary_relation():
    with pytest.raises(CompileError):
        subgraph_restriction_lift(pp_lift(3).lp)
# ====== 部分グラフ制限（End） ======
