import itertools

import pytest

from symlift.circuit_ir import (
    Bound,
    CircuitSpec,
    GateFamily,
    GateKind,
    Op,
    Star,
    WiringPattern,
    circuit_from_raw,
    eliminate_thresholds,
    evaluate,
    is_symmetric_under,
    materialize,
    parse_pattern_token,
    symmetric_gate_map,
)
from symlift.corpus import (
    GRAPH_VOCABULARY,
    any_edge,
    at_least_edges,
    closed_triangle,
    edge_parity,
    graph_inputs,
    single_edge_input,
)
from symlift.errors import CircuitError, NotSymmetricError
from symlift.lp_model import InputVar
from symlift.symmetry import all_permutations, identity, transposition

X = [InputVar("x", (i,)) for i in (1, 2, 3)]


def _raw(kind: GateKind, bits):
    """入力ゲート x(1..m) と、それらを子に持つ一つのゲート g"""
    m = len(bits)
    gates = [(("x", (i,)), GateKind.input("x"), []) for i in range(1, m + 1)]
    gates.append((("g", ()), kind, [("x", (i,)) for i in range(1, m + 1)]))
    c = circuit_from_raw(m, [("x", 1)], gates, ("g", ()))
    return c, dict(zip(X, bits))


def _graph(n: int, bits):
    return dict(zip(graph_inputs(n), bits))


# ====== 配線と仕様の検証（Start） ======
def test_pattern_tokens():
    assert parse_pattern_token("b0") == Bound(0)
    assert parse_pattern_token("*2") == Star(2)
    for bad in ("x1", "b", "*"):
        with pytest.raises(CircuitError):
            parse_pattern_token(bad)


def test_wiring_expansion():
    w = WiringPattern.parse("E", ["b0", "*1"])
    assert w.expand((2,), 2) == [(2, 1), (2, 2)]
    distinct = WiringPattern.parse("E", ["b0", "*1"], all_tuples=False)
    assert distinct.expand((1,), 3) == [(1, 2), (1, 3)]


def test_materialize_counts():
    assert materialize(any_edge(), 2).gate_count() == 5
    assert materialize(single_edge_input(), 3).gate_count() == 9
    assert materialize(closed_triangle(), 2).gate_count() == 4 + 8 + 1


def test_missing_family():
    spec = CircuitSpec(
        GRAPH_VOCABULARY,
        (GateFamily("E", 2, GateKind.input("E")), GateFamily("any", 0, GateKind.or_(), (WiringPattern.parse("F", ["*1", "*2"]),))),
        "any",
    )
    with pytest.raises(CircuitError):
        materialize(spec, 2)


def test_spec_validation_errors():
    edge = GateFamily("E", 2, GateKind.input("E"))
    loop_a = GateFamily("a", 0, GateKind.or_(), (WiringPattern.parse("b", []),))
    loop_b = GateFamily("b", 0, GateKind.or_(), (WiringPattern.parse("a", []),))
    with pytest.raises(CircuitError):
        CircuitSpec(GRAPH_VOCABULARY, (edge, loop_a, loop_b), "a").validate()
    bad_arity = GateFamily("any", 0, GateKind.or_(), (WiringPattern.parse("E", ["*1"]),))
    with pytest.raises(CircuitError):
        CircuitSpec(GRAPH_VOCABULARY, (edge, bad_arity), "any").validate()
    bad_bound = GateFamily("row", 1, GateKind.or_(), (WiringPattern.parse("E", ["b1", "*1"]),))
    with pytest.raises(CircuitError):
        CircuitSpec(GRAPH_VOCABULARY, (edge, bad_bound), "row", (1,)).validate()
    with pytest.raises(CircuitError):
        CircuitSpec(GRAPH_VOCABULARY, (edge,), "E", (1,)).validate()
    with pytest.raises(CircuitError):
        materialize(single_edge_input(), 1)


def test_gate_kind_checks():
    with pytest.raises(CircuitError):
        GateKind.th(-1)
    with pytest.raises(CircuitError):
        GateKind(Op.INPUT)
    with pytest.raises(CircuitError):
        materialize(at_least_edges(5), 2)


def test_raw_circuit_errors():
    x1 = (("x", (1,)), GateKind.input("x"), [])
    with pytest.raises(CircuitError):
        circuit_from_raw(1, [("x", 1)], [x1, (("g", ()), GateKind.or_(), [("y", (1,))])], ("g", ()))
    with pytest.raises(CircuitError):
        circuit_from_raw(1, [("x", 1)], [x1, x1], ("x", (1,)))
    with pytest.raises(CircuitError):
        circuit_from_raw(1, [("x", 1)], [x1], ("g", ()))
    with pytest.raises(CircuitError):
        circuit_from_raw(1, [("x", 1)], [x1, (("g", ()), GateKind.and_(), [])], ("g", ()))
# ====== 配線と仕様の検証（End） ======


# ====== 評価（Start） ======
def test_evaluate_examples():
    c = materialize(any_edge(), 2)
    assert evaluate(c, _graph(2, (0, 0, 0, 0))) == 0
    assert evaluate(c, _graph(2, (0, 0, 1, 0))) == 1
    th, x = _raw(GateKind.th(2), (1, 0, 1))
    assert evaluate(th, x) == 1
    ex, x = _raw(GateKind.ex(2), (1, 1, 1))
    assert evaluate(ex, x) == 0
    neg, x = _raw(GateKind.not_(), (1,))
    assert evaluate(neg, x) == 0


def test_evaluate_missing_input():
    c = materialize(any_edge(), 2)
    with pytest.raises(CircuitError):
        evaluate(c, {InputVar("E", (1, 1)): 1})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_edge_parity_counts_edges_mod_two(n):
    c = materialize(edge_parity(n), n)
    for bits in itertools.product((0, 1), repeat=n * n):
        assert evaluate(c, _graph(n, bits)) == sum(bits) % 2
    # 閾値ゲートは行ごと・行の奇偶ごとに張るので fan-in は n
    assert c.max_fan_in() == n


def test_closed_triangle_at_two_needs_a_loop():
    c = materialize(closed_triangle(), 2)
    for bits in itertools.product((0, 1), repeat=4):
        # E(1,1), E(1,2), E(2,1), E(2,2) の順
        assert evaluate(c, _graph(2, bits)) == int(bits[0] or bits[3])
# ====== 評価（End） ======


# ====== 閾値の消去（Start） ======
def test_eliminate_threshold_k1():
    c, _ = _raw(GateKind.th(1), (0, 0))
    out = eliminate_thresholds(c)
    assert out.kinds[("g", ())] == GateKind.or_()
    assert out.children[("g", ())] == (("g.ex1", ()), ("g.ex2", ()))
    assert out.kinds[("g.ex1", ())] == GateKind.ex(1)
    assert out.children[("g.ex2", ())] == c.children[("g", ())]
    assert not out.has_thresholds()


def test_eliminate_threshold_k0_is_constant_true():
    c, _ = _raw(GateKind.th(0), (0, 0))
    out = eliminate_thresholds(c)
    assert [ch[0] for ch in out.children[("g", ())]] == ["g.ex0", "g.ex1", "g.ex2"]
    for bits in itertools.product((0, 1), repeat=2):
        assert evaluate(out, dict(zip(X, bits))) == 1


def test_eliminate_without_thresholds_is_identity():
    c = materialize(any_edge(), 2)
    assert eliminate_thresholds(c) is c


def test_eliminate_preserves_function():
    c = materialize(at_least_edges(2), 2)
    out = eliminate_thresholds(c)
    assert out.gate_count() == c.gate_count() + 3
    for bits in itertools.product((0, 1), repeat=4):
        x = _graph(2, bits)
        assert evaluate(out, x) == evaluate(c, x) == int(sum(bits) >= 2)
# ====== 閾値の消去（End） ======


# ====== 対称性（Start） ======
def test_family_circuits_are_symmetric():
    c = materialize(closed_triangle(), 3)
    assert all(is_symmetric_under(c, pi) for pi in all_permutations(3))
    gate_map = symmetric_gate_map(c, transposition(3, 1, 2))
    assert gate_map[("walk", (1, 2, 3))] == ("walk", (2, 1, 3))
    assert gate_map[("any", ())] == ("any", ())


def test_moved_output_is_not_symmetric():
    c = materialize(single_edge_input(), 3)
    assert is_symmetric_under(c, identity(3))
    assert not is_symmetric_under(c, transposition(3, 1, 3))
    with pytest.raises(NotSymmetricError):
        symmetric_gate_map(c, transposition(3, 2, 3))


def test_raw_asymmetric_children():
    gates = [
        (("x", (1,)), GateKind.input("x"), []),
        (("x", (2,)), GateKind.input("x"), []),
        (("g", ()), GateKind.or_(), [("x", (1,))]),
    ]
    c = circuit_from_raw(2, [("x", 1)], gates, ("g", ()))
    assert not is_symmetric_under(c, transposition(2, 1, 2))
# ====== 対称性（End） ======
