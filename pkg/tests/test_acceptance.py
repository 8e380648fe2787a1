"""
構成全体の性質テスト（小さな n での全数検査）

重いもの（n = 3 の回路コーパスや大きなガジェット）は slow。
"""
import itertools
from fractions import Fraction

import pytest
from conftest import cube_points, fix_bits, x_vars

from symlift import config
from symlift.circuit_ir import eliminate_thresholds, evaluate, materialize
from symlift.compiler import compile as compile_circuit, symmetry_witness
from symlift.corpus import (
    SYMMETRIC_CIRCUITS,
    any_edge,
    at_least_edges,
    empty_supported_lp,
    graph_inputs,
    no_edges,
    pair_lp,
    swap_lp,
    twin_hull_lp,
)
from symlift.gadgets import (
    bit_extraction_lp,
    ex_gate_lp,
    ex_slice_lp,
    gate_lp,
    pp_lift,
    slot_permutation_map,
    truncated_pp_lift,
)
from symlift.lp_model import ge, le, make_lp, substitute
from symlift.main import check_equivalence
from symlift.solver import Optimal, enumerate_vertices, feasible, optimize, recognized_set, variable_range
from symlift.symmetry import (
    SymmetryAction,
    all_permutations,
    check_manageable_properties,
    group_generators,
    is_invariant,
    make_manageable,
    perm_as_map,
    pointwise_stabilizer,
    rigidify,
)
from symlift.utils import binary_digits, bit_length


def _prefixes(n: int):
    return itertools.product((0, 1), repeat=n - 1)


# ====== ガジェット（Start） ======
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_slice_vertices_are_weight_t_points(n):
    for t in range(n + 1):
        lp = ex_slice_lp(n, t).lp
        got = {tuple(p[v] for v in lp.variables()) for p in enumerate_vertices(lp)}
        assert got == {p for p in cube_points(n) if sum(p) == t}


@pytest.mark.parametrize("n", [2, 3, 4, pytest.param(5, marks=pytest.mark.slow)])
def test_pp_lift_pins_the_completing_bit(n):
    lp = pp_lift(n).lp
    xs = x_vars(n)
    for prefix in _prefixes(n):
        b = (1 + sum(prefix)) % 2
        assert variable_range(substitute(lp, fix_bits(xs, prefix)), xs[-1]) == (b, b)


@pytest.mark.parametrize("n", [2, 3, 4, *(pytest.param(n, marks=pytest.mark.slow) for n in (5, 6))])
def test_truncated_pp_pins_the_carry_bit(n):
    xs = x_vars(n)
    for q in range(min(3, bit_length(n))):
        lp = truncated_pp_lift(n, q).lp
        for prefix in _prefixes(n):
            s = sum(prefix)
            if (s + 1) % (1 << q):
                continue
            # x_n = 1 で繰り上がるので、⌊Σx / 2^q⌋ が奇数になる側はちょうど一つ
            b = 1 if (s >> q) % 2 == 0 else 0
            assert variable_range(substitute(lp, fix_bits(xs, prefix)), xs[-1]) == (b, b)


@pytest.mark.parametrize("n", [1, 2, 3, *(pytest.param(n, marks=pytest.mark.slow) for n in (4, 5, 6))])
def test_bit_extraction_is_exact(n):
    g = bit_extraction_lp(n)
    xs = x_vars(n)
    width = bit_length(n)
    for bits in cube_points(n):
        fixed = substitute(g.lp, fix_bits(xs, bits))
        digits = binary_digits(sum(bits), width)
        for z, d in zip(g.interface["z"], digits):
            assert variable_range(fixed, z) == (1 - d, 1 - d)


@pytest.mark.parametrize("n", [1, 2, 3, *(pytest.param(n, marks=pytest.mark.slow) for n in (4, 5))])
def test_ex_gate_output_is_unique(n):
    xs = x_vars(n)
    for t in range(n + 1):
        g = ex_gate_lp(n, t)
        (y,) = g.interface["y"]
        for bits in cube_points(n):
            e = int(sum(bits) == t)
            assert variable_range(substitute(g.lp, fix_bits(xs, bits)), y) == (e, e)
        for pi in group_generators(n):
            assert is_invariant(g.lp, pi, slot_permutation_map(g, perm_as_map(pi)))


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_and_or_not_outputs_are_unique(m):
    semantics = {"and": lambda b: int(all(b)), "or": lambda b: int(any(b))}
    if m == 1:
        semantics["not"] = lambda b: 1 - b[0]
    for kind, fn in semantics.items():
        g = gate_lp(kind, m)
        (y,) = g.interface["y"]
        for bits in cube_points(m):
            e = fn(bits)
            assert variable_range(substitute(g.lp, fix_bits(x_vars(m), bits)), y) == (e, e)
# ====== ガジェット（End） ======


# ====== 回路コーパス（Start） ======
def _corpus_cases(n: int):
    for name in SYMMETRIC_CIRCUITS:
        marks = [pytest.mark.slow] if n == 3 else []
        yield pytest.param(name, n, marks=marks, id=f"{name}-n{n}")


CORPUS_CASES = [*_corpus_cases(2), *_corpus_cases(3)]


@pytest.mark.parametrize("name, n", CORPUS_CASES)
def test_corpus_lift_decides_the_circuit(name, n):
    c = materialize(SYMMETRIC_CIRCUITS[name](n), n)
    cl = compile_circuit(eliminate_thresholds(c))
    indices = list(range(1 << (n * n)))
    results = check_equivalence(cl.lp, c, indices, jobs=config.DEFAULT_JOBS if n == 3 else 1)
    assert len(results) == len(indices)
    assert all(expected == got for _, expected, got in results)
    for pi in all_permutations(n):
        assert is_invariant(cl.lp, pi, symmetry_witness(cl, pi))


def test_threshold_lift_matches_direct_evaluation():
    c = materialize(at_least_edges(3), 2)
    cl = compile_circuit(eliminate_thresholds(c))
    for bits in [(1, 1, 1, 0), (1, 0, 1, 0), (0, 1, 1, 1), (1, 1, 1, 1)]:
        x = dict(zip(graph_inputs(2), bits))
        assert feasible(cl.lp, fix_bits(graph_inputs(2), bits)) == bool(evaluate(c, x))
# ====== 回路コーパス（End） ======


# ====== サポートと管理可能性（Start） ======
def _brute_force_support(action: SymmetryAction, fixes) -> tuple[int, ...]:
    n = action.lp.n
    for size in range(n + 1):
        for subset in itertools.combinations(range(1, n + 1), size):
            if all(fixes(pi) for pi in pointwise_stabilizer(action.elements, subset)):
                return subset
    raise AssertionError("[n] is always a support")


@pytest.mark.parametrize(
    "make",
    [
        lambda: compile_circuit(materialize(any_edge(), 3)).lp,
        lambda: pair_lp(3),
        pytest.param(lambda: pair_lp(4), marks=pytest.mark.slow),
    ],
)
def test_min_supports_against_stabilizer_enumeration(make):
    action = SymmetryAction(make())
    for report in action.all_supports():
        if isinstance(report.element, int):
            c = action.lp.constraints[report.element]
            canonical = type(c).build(c.terms, c.rel, c.rhs)

            def fixes(pi, canonical=canonical):
                return action.image_constraint(pi, canonical) == canonical

        else:

            def fixes(pi, v=report.element):
                return action.image_var(pi, v) == v

        assert report.support == _brute_force_support(action, fixes)
        assert report.verified_against == len(pointwise_stabilizer(action.elements, report.support))


@pytest.mark.parametrize(
    "make, k",
    [
        (lambda: empty_supported_lp(2), 0),
        (lambda: rigidify(swap_lp()), 0),
        (lambda: rigidify(twin_hull_lp()), 1),
        (lambda: pair_lp(3), 2),
        (lambda: compile_circuit(materialize(no_edges(), 2)).lp, 2),
    ],
)
def test_manageable_preserves_recognized_sets(make, k):
    lp = make()
    ml = make_manageable(lp, k)
    assert check_manageable_properties(ml)
    assert recognized_set(ml.lp) == recognized_set(lp)
# ====== サポートと管理可能性（End） ======


# ====== ソルバーの健全性（Start） ======
def _guarded_corpus():
    (x1,) = x_vars(1)
    yield make_lp(1, [("x", 1)], [le(x1, -1), ge(x1, 0)])
    for t in range(4):
        yield ex_slice_lp(3, t).lp
    for kind in ("and", "or"):
        yield gate_lp(kind, 2).lp
    yield gate_lp("not", 1).lp
    yield substitute(gate_lp("and", 2).lp, fix_bits(x_vars(1), (1,)))


def test_feasible_iff_vertices_exist():
    for lp in _guarded_corpus():
        assert feasible(lp) == bool(enumerate_vertices(lp))


def test_optimum_is_attained_at_a_vertex():
    for lp in _guarded_corpus():
        points = enumerate_vertices(lp)
        if not points:
            continue
        variables = lp.variables()
        for weights in [(1,) * len(variables), tuple(range(1, len(variables) + 1))]:
            objective = dict(zip(variables, map(Fraction, weights)))
            result = optimize(lp, objective, "max")
            assert isinstance(result, Optimal)
            assert result.value == max(sum(objective[v] * p[v] for v in variables) for p in points)
# ====== ソルバーの健全性（End） ======
