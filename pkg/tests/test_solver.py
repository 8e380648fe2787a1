import math
import random
from fractions import Fraction

import pytest
from conftest import cube_points, fix_bits, x_vars

from symlift import config
from symlift.errors import (
    GuardExceededError,
    InfeasibleError,
    SolverError,
    UnboundedPolytopeError,
    UnknownVariableError,
)
from symlift.gadgets import ex_gate_lp, ex_slice_lp, pp_lift
from symlift.lp_model import Affine, InputVar, aux, box, eq, ge, is_satisfied, le, make_lp, substitute, total
from symlift.solver import (
    Infeasible,
    Optimal,
    Unbounded,
    enumerate_vertices,
    feasible,
    optimize,
    recognized_set,
    variable_range,
)

X1, X2, X3 = x_vars(3)


def _lp(n, rows):
    return make_lp(n, [("x", 1)], rows)


# ====== 実行可能性（Start） ======
def test_feasible_examples():
    assert feasible(_lp(1, [le(X1, 1), le(-Affine.of(X1), 0)]))
    assert not feasible(_lp(1, [le(X1, 0), le(-Affine.of(X1), -1)]))
    assert not feasible(pp_lift(3).lp, fix_bits(x_vars(3), (1, 1, 0)))


def test_feasible_detects_contradicting_constant_row():
    lp = _lp(1, [le(X1, 1)])
    assert not feasible(lp, {X1: 2})
    assert feasible(lp, {X1: 1})


def test_feasible_without_constraints():
    assert feasible(_lp(2, []))
# ====== 実行可能性（End） ======


# ====== 最適化（Start） ======
def test_optimize_bounded():
    result = optimize(_lp(1, [le(X1, 1), ge(X1, 0)]), {X1: 1}, "max")
    assert isinstance(result, Optimal)
    assert result.value == 1
    assert result.point[X1] == 1


def test_optimize_unbounded_returns_ray():
    result = optimize(_lp(1, [ge(X1, 0)]), {X1: 1}, "max")
    assert isinstance(result, Unbounded)
    assert result.ray[X1] > 0


def test_optimize_infeasible():
    assert isinstance(optimize(_lp(1, [le(X1, -1), ge(X1, 0)]), {X1: 1}), Infeasible)


def test_optimize_free_variables():
    # x1 - x2 = 1/3, x1 + x2 ≤ 1（下限なし）
    lp = _lp(2, [eq(total([X1, -Affine.of(X2)]), Fraction(1, 3)), le(total([X1, X2]), 1)])
    result = optimize(lp, {X1: 1}, "max")
    assert result.value == Fraction(2, 3)
    assert result.point[X2] == Fraction(1, 3)


def test_optimize_pp_completion_bit():
    lp = substitute(pp_lift(3).lp, fix_bits(x_vars(2), (1, 0)))
    assert optimize(lp, {X3: 1}, "min").value == 0
    assert optimize(lp, {X3: 1}, "max").value == 0


def test_optimize_beale_cycling_example():
    # Bland の規則がないと巡回する古典的な例（最適値 -5/4）
    x4, x5, x6, x7 = (InputVar("x", (i,)) for i in (1, 2, 3, 4))
    rows = [
        le(Fraction(1, 4) * Affine.of(x4) - 8 * Affine.of(x5) - x6 + 9 * Affine.of(x7), 0),
        le(Fraction(1, 2) * Affine.of(x4) - 12 * Affine.of(x5) - Fraction(1, 2) * Affine.of(x6) + 3 * Affine.of(x7), 0),
        le(x6, 1),
        *(ge(v, 0) for v in (x4, x5, x6, x7)),
    ]
    objective = {x4: Fraction(-3, 4), x5: 20, x6: Fraction(-1, 2), x7: 6}
    result = optimize(make_lp(4, [("x", 1)], rows), objective, "min")
    assert isinstance(result, Optimal)
    assert result.value == Fraction(-5, 4)


def test_optimize_checks_arguments():
    lp = _lp(1, [le(X1, 1)])
    with pytest.raises(SolverError):
        optimize(lp, {X1: 1}, "maximize")
    with pytest.raises(UnknownVariableError):
        optimize(lp, {aux("ghost"): 1})


def test_empty_objective_is_feasibility():
    result = optimize(_lp(1, [le(X1, 1), ge(X1, 0)]), {})
    assert isinstance(result, Optimal)
    assert result.value == 0
    assert is_satisfied(_lp(1, [le(X1, 1), ge(X1, 0)]), result.point)


def test_redundant_equalities():
    y = aux("y")
    rows = [eq(total([X1, y]), 1), eq(total([X1, y]), 1), eq(2 * Affine.of(X1) + 2 * Affine.of(y), 2), *box(X1), *box(y)]
    result = optimize(_lp(1, rows), {y: 1}, "max")
    assert result.value == 1
    assert result.point[X1] == 0
# ====== 最適化（End） ======


# ====== 値域と認識集合（Start） ======
def test_variable_range():
    assert variable_range(_lp(1, box(X1)), X1) == (0, 1)
    assert variable_range(_lp(1, [ge(X1, 0)]), X1) == (0, math.inf)
    assert variable_range(_lp(1, [le(X1, 2)]), X1) == (-math.inf, 2)
    with pytest.raises(InfeasibleError):
        variable_range(_lp(1, [le(X1, -1), ge(X1, 0)]), X1)


def test_recognized_set_of_slice():
    assert recognized_set(ex_slice_lp(3, 1).lp) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}
# ====== 値域と認識集合（End） ======


# ====== 頂点列挙（Start） ======
def _vertex_set(lp):
    return {tuple(p[v] for v in lp.variables()) for p in enumerate_vertices(lp)}


def test_vertices_of_square():
    assert _vertex_set(_lp(2, [*box(X1), *box(X2)])) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_vertices_of_slices():
    assert _vertex_set(ex_slice_lp(3, 1).lp) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}
    assert _vertex_set(ex_slice_lp(2, 1).lp) == {(1, 0), (0, 1)}


def test_vertices_of_pp_lift_project_to_odd_points():
    # 補助変数込みの頂点は全部 0/1 で、x 成分は奇数重み
    lp = pp_lift(2).lp
    points = enumerate_vertices(lp)
    assert points
    for p in points:
        assert all(value in (0, 1) for value in p.values())
        assert (p[X1] + p[X2]) % 2 == 1


def test_vertices_unbounded_and_empty():
    with pytest.raises(UnboundedPolytopeError):
        enumerate_vertices(_lp(1, [ge(X1, 0)]))
    assert enumerate_vertices(_lp(1, [le(X1, -1), ge(X1, 0)])) == []


def test_vertex_guard(monkeypatch):
    monkeypatch.setattr(config, "VERTEX_MAX_VARS", 2)
    lp = _lp(3, [*box(X1), *box(X2), *box(X3)])
    with pytest.raises(GuardExceededError):
        enumerate_vertices(lp)
    monkeypatch.setenv("SYMLIFT_GUARD_OVERRIDE", "1")
    assert len(enumerate_vertices(lp)) == 8
# ====== 頂点列挙（End） ======


# ====== 双対性（Start） ======
def _primal_dual(a, b, c):
    """max c·p（A p ≤ b, p ≥ 0）と、その双対 min b·d（Aᵀd ≥ c, d ≥ 0）を解く"""
    ps = [aux("p", par=(j,)) for j in range(len(c))]
    ds = [aux("d", par=(i,)) for i in range(len(b))]
    primal_rows = [le(total(a[i][j] * Affine.of(ps[j]) for j in range(len(c))), b[i]) for i in range(len(b))]
    dual_rows = [ge(total(a[i][j] * Affine.of(ds[i]) for i in range(len(b))), c[j]) for j in range(len(c))]
    primal = optimize(make_lp(1, [], primal_rows + [ge(p, 0) for p in ps]), dict(zip(ps, c)), "max")
    dual = optimize(make_lp(1, [], dual_rows + [ge(d, 0) for d in ds]), dict(zip(ds, b)), "min")
    return primal, dual


def _dual_corpus():
    yield [[1, 0], [0, 2], [3, 2]], [4, 12, 18], [3, 5]
    rng = random.Random(7)
    for rows, cols in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        a = [[Fraction(rng.randint(1, 6), rng.randint(1, 3)) for _ in range(cols)] for _ in range(rows)]
        b = [Fraction(rng.randint(1, 8), rng.randint(1, 2)) for _ in range(rows)]
        c = [Fraction(rng.randint(-3, 5), rng.randint(1, 3)) for _ in range(cols)]
        yield a, b, c


def test_dual_equality_spot_checks():
    values = []
    for a, b, c in _dual_corpus():
        primal, dual = _primal_dual(a, b, c)
        assert isinstance(primal, Optimal)
        assert isinstance(dual, Optimal)
        assert primal.value == dual.value
        values.append(primal.value)
    assert len(values) == 5
    assert values[0] == 36
# ====== 双対性（End） ======


# ====== 代入と連言（Start） ======
def _conjunction(lp, assignment):
    rows = lp.constraints + tuple(eq(v, value) for v, value in assignment.items())
    return make_lp(lp.n, lp.vocabulary, rows, lp.aux_vars, lp.fixed)


@pytest.mark.parametrize(
    "make",
    [lambda: pp_lift(3).lp, lambda: ex_slice_lp(3, 2).lp, lambda: ex_gate_lp(3, 1).lp],
    ids=["pp", "ex_slice", "ex_gate"],
)
def test_substitute_matches_the_conjunction(make):
    lp = make()
    inputs = lp.input_variables()
    rng = random.Random(len(lp.constraints))
    for bits in cube_points(len(inputs)):
        fix = fix_bits(inputs, bits)
        assert feasible(substitute(lp, fix)) == feasible(_conjunction(lp, fix))
    for _ in range(8):
        chosen = rng.sample(inputs, rng.randint(1, len(inputs)))
        fix = {v: Fraction(rng.randint(0, 1)) for v in chosen}
        assert feasible(substitute(lp, fix)) == feasible(_conjunction(lp, fix))
# ====== 代入と連言（End） ======
