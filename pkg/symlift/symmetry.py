# symlift/symmetry.py
"""
LP への Sym_n 作用と、それを使った解析

- apply / is_invariant：(π, σ) による LP の書き換えと不変性判定
- find_extension / ext_id：色の細分化 + 個別化による σ の探索
- rigidify：ext(id) の軌道ごとに補助変数をまとめる
- min_support / make_manageable / check_manageable_properties：サポートと管理可能な再添字付け

置換は sympy の Permutation（内部は 0 始まり）。API の境界では [n] = {1..n} の 1 始まりで扱う。
"""
import math
import logging
import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import networkx as nx
from sympy.combinatorics import Permutation, SymmetricGroup

from symlift import config
from symlift.errors import (
    AuxMapError,
    ManageableShapeError,
    NonRigidError,
    NotSymmetricError,
    SupportTooLargeError,
)
from symlift.lp_model import (
    AuxVar,
    InputVar,
    LinearConstraint,
    LinearProgram,
    Segment,
    VarId,
    canonicalize,
    lp_size,
    make_lp,
    var_key,
)
from symlift.utils import distinct_tuples, equality_type

logger = logging.getLogger(__name__)

AuxMap = dict  # AuxVar -> AuxVar


# ====== 置換ヘルパー（Start） ======
def perm_from_image(image: Sequence[int]) -> Permutation:
    """1 始まりの像リスト [π(1), …, π(n)] から"""
    n = len(image)
    if sorted(image) != list(range(1, n + 1)):
        raise AuxMapError(f"{list(image)} is not a permutation of 1..{n}")
    return Permutation([i - 1 for i in image])


def identity(n: int) -> Permutation:
    return Permutation(list(range(n)))


def transposition(n: int, i: int, j: int) -> Permutation:
    image = list(range(1, n + 1))
    image[i - 1], image[j - 1] = j, i
    return perm_from_image(image)


def perm_image(pi: Permutation) -> list[int]:
    return [a + 1 for a in pi.array_form]


def perm_as_map(pi: Permutation) -> dict[int, int]:
    return {i + 1: a + 1 for i, a in enumerate(pi.array_form)}


def point_image(pi: Permutation, i: int) -> int:
    return pi.array_form[i - 1] + 1


def permute_tuple(pi: Permutation, tup: Iterable[int]) -> tuple[int, ...]:
    form = pi.array_form
    return tuple(form[i - 1] + 1 for i in tup)


def compose(pi: Permutation, rho: Permutation) -> Permutation:
    """π∘ρ（ρ を先に作用させる）。sympy の積は左から順に作用する"""
    return rho * pi


def all_permutations(n: int, group: str = "sym") -> list[Permutation]:
    """Sym_n（group="alt" なら Alt_n）の全要素を像リストの辞書式順で"""
    if group not in ("sym", "alt"):
        raise AuxMapError(f"group must be 'sym' or 'alt', got {group!r}")
    out = [Permutation(list(img)) for img in itertools.permutations(range(n))]
    if group == "alt":
        out = [p for p in out if p.is_even]
    return out


def group_generators(n: int) -> list[Permutation]:
    """Sym_n の生成系（n サイクルと互換）"""
    return [Permutation(list(g.array_form) + list(range(g.size, n))) for g in SymmetricGroup(n).generators]


def pointwise_stabilizer(elements: Iterable[Permutation], support: Iterable[int]) -> list[Permutation]:
    support = list(support)
    return [p for p in elements if all(point_image(p, i) == i for i in support)]
# ====== 置換ヘルパー（End） ======


# ====== 作用（Start） ======
def act_on_var(pi: Permutation, v: VarId) -> VarId:
    """構文的な作用：入力変数の引数と、補助変数の各セグメントの dom を π で写す"""
    if isinstance(v, InputVar):
        return InputVar(v.rel, permute_tuple(pi, v.args))
    return AuxVar(tuple(Segment(s.tag, permute_tuple(pi, s.dom), s.par) for s in v.path))


def identity_map(lp: LinearProgram) -> AuxMap:
    return {v: v for v in lp.aux_vars}


def validate_aux_map(lp: LinearProgram, sigma: Mapping[AuxVar, AuxVar]) -> None:
    missing = [v for v in lp.aux_vars if v not in sigma]
    if missing:
        raise AuxMapError(f"aux map is not total: {len(missing)} variables unmapped, e.g. {missing[0]}")
    images = [sigma[v] for v in lp.aux_vars]
    if len(set(images)) != len(images):
        raise AuxMapError("aux map is not injective")
    outside = [w for w in images if w not in lp.aux_vars]
    if outside:
        raise AuxMapError(f"aux map leaves the variable set: {outside[0]}")


def _renamer(pi: Permutation, sigma: Mapping[AuxVar, AuxVar]) -> Callable[[VarId], VarId]:
    form = pi.array_form

    def rename(v: VarId) -> VarId:
        if isinstance(v, InputVar):
            return InputVar(v.rel, tuple(form[i - 1] + 1 for i in v.args))
        return sigma.get(v, v)

    return rename


def apply(lp: LinearProgram, pi: Permutation, sigma: Mapping[AuxVar, AuxVar]) -> LinearProgram:
    """γ ↦ γ^π：入力変数の添字を π で、補助変数を σ で写す（制約の並びはそのまま）"""
    if pi.size != lp.n:
        raise AuxMapError(f"permutation acts on {pi.size} points, LP has n = {lp.n}")
    validate_aux_map(lp, sigma)
    rename = _renamer(pi, sigma)
    return LinearProgram(
        n=lp.n,
        vocabulary=lp.vocabulary,
        aux_vars=lp.aux_vars,
        constraints=tuple(c.rename(rename) for c in lp.constraints),
        fixed=frozenset(rename(u) for u in lp.fixed),
    )


def is_invariant(lp: LinearProgram, pi: Permutation, sigma: Mapping[AuxVar, AuxVar]) -> bool:
    moved = apply(lp, pi, sigma)
    if moved.fixed != lp.fixed:
        return False
    return Counter(canonicalize(moved).constraints) == Counter(canonicalize(lp).constraints)


def induced_aux_map(lp: LinearProgram, pi: Permutation) -> AuxMap:
    """dom への構文的な作用で得られる σ。aux_vars の全単射にならなければ AuxMapError"""
    sigma = {v: act_on_var(pi, v) for v in lp.aux_vars}
    validate_aux_map(lp, sigma)
    return sigma
# ====== 作用（End） ======


# ====== 拡張の探索（Start） ======
class _Matcher:
    """rename(S, σ) = T（制約の多重集合として）となる補助変数の全単射 σ を探す"""

    def __init__(self, rows_s: Sequence[LinearConstraint], rows_t: Sequence[LinearConstraint], aux_vars: Iterable[AuxVar]):
        self.rows_s = list(rows_s)
        self.rows_t = list(rows_t)
        self.aux = sorted(aux_vars, key=var_key)
        self.target = Counter(self.rows_t)
        self.occ_s = self._occurrences(self.rows_s)
        self.occ_t = self._occurrences(self.rows_t)
        self.leaves = 0

    def _occurrences(self, rows) -> dict:
        occ = {v: [] for v in self.aux}
        for r, c in enumerate(rows):
            for v, a in c.terms:
                if isinstance(v, AuxVar):
                    occ[v].append((r, a))
        return occ

    @staticmethod
    def _row_colours(rows, colours, palette) -> list[int]:
        out = []
        for c in rows:
            fixed_part = tuple((var_key(v), a) for v, a in c.terms if not isinstance(v, AuxVar))
            aux_part = tuple(sorted((colours[v], a) for v, a in c.terms if isinstance(v, AuxVar)))
            out.append(palette.setdefault((c.rhs, fixed_part, aux_part), len(palette)))
        return out

    def _aux_colours(self, occ, colours, row_colours, palette) -> dict:
        return {
            v: palette.setdefault((colours[v], tuple(sorted((row_colours[r], a) for r, a in occ[v]))), len(palette))
            for v in self.aux
        }

    def refine(self, cs: dict, ct: dict) -> Optional[tuple[dict, dict]]:
        """安定するまで細分化。S と T のヒストグラムが食い違えば None"""
        while True:
            rows_palette: dict = {}
            rs = self._row_colours(self.rows_s, cs, rows_palette)
            rt = self._row_colours(self.rows_t, ct, rows_palette)
            if Counter(rs) != Counter(rt):
                return None
            aux_palette: dict = {}
            ns = self._aux_colours(self.occ_s, cs, rs, aux_palette)
            nt = self._aux_colours(self.occ_t, ct, rt, aux_palette)
            if Counter(ns.values()) != Counter(nt.values()):
                return None
            if len(set(ns.values())) == len(set(cs.values())):
                return ns, nt
            cs, ct = ns, nt

    def verify(self, sigma: Mapping[AuxVar, AuxVar]) -> bool:
        renamed = Counter(c.rename(lambda v: sigma.get(v, v)) for c in self.rows_s)
        return renamed == self.target

    def search(self, cs: dict, ct: dict, results: list, limit: Optional[int]) -> None:
        refined = self.refine(cs, ct)
        if refined is None:
            return
        cs, ct = refined
        classes_s: dict = defaultdict(list)
        classes_t: dict = defaultdict(list)
        for v in self.aux:
            classes_s[cs[v]].append(v)
            classes_t[ct[v]].append(v)
        open_classes = [col for col, members in classes_s.items() if len(members) > 1]
        if not open_classes:
            self.leaves += 1
            sigma = {v: classes_t[cs[v]][0] for v in self.aux}
            if self.verify(sigma):
                results.append(sigma)
            return
        colour = min(open_classes, key=lambda col: (len(classes_s[col]), col))
        v = classes_s[colour][0]
        fresh = max(max(cs.values()), max(ct.values())) + 1
        for w in sorted(classes_t[colour], key=lambda w: (w != v, var_key(w))):
            cs2 = dict(cs)
            ct2 = dict(ct)
            cs2[v] = fresh
            ct2[w] = fresh
            self.search(cs2, ct2, results, limit)
            if limit is not None and len(results) >= limit:
                return


def _matcher(lp: LinearProgram, pi: Permutation) -> Optional[_Matcher]:
    config.guard("aux variables", len(lp.aux_vars), config.EXTENSION_LIMIT)
    moved = apply(lp, pi, identity_map(lp))
    if moved.fixed != lp.fixed:
        return None
    return _Matcher(canonicalize(moved).constraints, canonicalize(lp).constraints, lp.aux_vars)


def _extensions(lp: LinearProgram, pi: Permutation, limit: Optional[int]) -> list[AuxMap]:
    matcher = _matcher(lp, pi)
    if matcher is None:
        return []
    if not matcher.aux:
        return [{}] if matcher.verify({}) else []
    results: list = []
    start = {v: 0 for v in matcher.aux}
    matcher.search(start, dict(start), results, limit)
    logger.debug(f"extension search: {matcher.leaves} leaves, {len(results)} extensions")
    return results


def find_extension(lp: LinearProgram, pi: Permutation) -> Optional[AuxMap]:
    """P^(π,σ) = P となる σ を一つ。存在しなければ None"""
    if pi == identity(lp.n):
        config.guard("aux variables", len(lp.aux_vars), config.EXTENSION_LIMIT)
        return identity_map(lp)
    found = _extensions(lp, pi, limit=1)
    return found[0] if found else None


def ext_id(lp: LinearProgram, limit: Optional[int] = None) -> list[AuxMap]:
    """ext(id)：π = id での拡張すべて（恒等写像が先頭）"""
    return _extensions(lp, identity(lp.n), limit)


def is_rigid(lp: LinearProgram) -> bool:
    return len(ext_id(lp, limit=2)) == 1
# ====== 拡張の探索（End） ======


# ====== 剛化（Start） ======
def _merge_orbits(lp: LinearProgram, group: list[AuxMap]) -> LinearProgram:
    graph = nx.Graph()
    graph.add_nodes_from(lp.aux_vars)
    for sigma in group:
        graph.add_edges_from((v, w) for v, w in sigma.items() if v != w)
    merged: dict = {}
    for orbit in nx.connected_components(graph):
        if len(orbit) == 1:
            (v,) = orbit
            merged[v] = v
            continue
        rep = min(orbit, key=var_key)
        target = AuxVar(rep.path + (Segment("orbit"),))
        for v in orbit:
            merged[v] = target
    constraints = [c.rename(lambda v: merged.get(v, v)) for c in lp.constraints]
    return make_lp(lp.n, lp.vocabulary, constraints, set(merged.values()), lp.fixed)


def rigidify(lp: LinearProgram) -> LinearProgram:
    """ext(id) が自明になるまで、軌道ごとに補助変数を一つにまとめる（係数は和になる）"""
    size_in = lp_size(lp)
    rounds = 0
    while True:
        group = ext_id(lp)
        if len(group) == 1:
            break
        rounds += 1
        before = len(lp.aux_vars)
        lp = _merge_orbits(lp, group)
        logger.info(f"rigidify round {rounds}: |ext(id)| = {len(group)}, aux {before} -> {len(lp.aux_vars)}")
    logger.info(f"rigidify done after {rounds} rounds, size {size_in} -> {lp_size(lp)}")
    return lp
# ====== 剛化（End） ======


# ====== サポート（Start） ======
Target = Union[AuxVar, int]


@dataclass(frozen=True)
class SupportReport:
    element: Target
    support: tuple[int, ...]
    verified_against: int  # 検証した点ごと固定部分群の位数
    group: str = "sym"


class SymmetryAction:
    """剛な LP への Sym_n（または Alt_n）の作用 π ↦ σ_π を全要素について保持する"""

    def __init__(self, lp: LinearProgram, group: str = "sym", max_n: Optional[int] = None):
        config.guard("n for support search", lp.n, config.SUPPORT_MAX_N if max_n is None else max_n)
        if not is_rigid(lp):
            raise NonRigidError("LP is not rigid (ext(id) is nontrivial); run rigidify first")
        self.lp = lp
        self.group = group
        self.elements = all_permutations(lp.n, group)
        self.sigma: dict = {}
        for pi in self.elements:
            s = find_extension(lp, pi)
            if s is None:
                raise NotSymmetricError(f"LP is not symmetric under {perm_image(pi)}")
            self.sigma[pi] = s
        self._canonical = [LinearConstraint.build(c.terms, c.rel, c.rhs) for c in lp.constraints]
        logger.info(f"symmetry action on {len(self.elements)} permutations ({group}) computed")

    def image_var(self, pi: Permutation, v: AuxVar) -> AuxVar:
        return self.sigma[pi][v]

    def image_constraint(self, pi: Permutation, c: LinearConstraint) -> LinearConstraint:
        return c.rename(_renamer(pi, self.sigma[pi]))

    def _fixes(self, pi: Permutation, target: Target) -> bool:
        if isinstance(target, AuxVar):
            return self.sigma[pi][target] == target
        c = self._canonical[target]
        return self.image_constraint(pi, c) == c

    def support_of(
        self, fixes: Callable[[Permutation], bool], sizes: Optional[Iterable[int]] = None
    ) -> tuple[tuple[int, ...], int]:
        """最小濃度・辞書式最小の S と、検証した固定部分群の位数（sizes で濃度を絞れる）"""
        moving = [pi for pi in self.elements if not fixes(pi)]
        for size in range(self.lp.n + 1) if sizes is None else sizes:
            for subset in itertools.combinations(range(1, self.lp.n + 1), size):
                if not pointwise_stabilizer(moving, subset):
                    return subset, len(pointwise_stabilizer(self.elements, subset))
        raise SupportTooLargeError("no support found")  # [n] 自身は常にサポート

    def support(self, target: Target) -> SupportReport:
        if isinstance(target, AuxVar):
            if target not in self.lp.aux_vars:
                raise AuxMapError(f"{target} is not an auxiliary variable of this LP")
        elif not 0 <= target < len(self.lp.constraints):
            raise AuxMapError(f"constraint index {target} out of range")
        s, checked = self.support_of(lambda pi: self._fixes(pi, target))
        return SupportReport(target, s, checked, self.group)

    def all_supports(self) -> list[SupportReport]:
        reports = [self.support(v) for v in self.lp.sorted_aux()]
        reports.extend(self.support(i) for i in range(len(self.lp.constraints)))
        return reports


def min_support(lp_rigid: LinearProgram, target: Target, group: str = "sym") -> SupportReport:
    return SymmetryAction(lp_rigid, group).support(target)


def is_k_supported(lp_rigid: LinearProgram, k: int, group: str = "sym") -> bool:
    return all(len(r.support) <= k for r in SymmetryAction(lp_rigid, group).all_supports())


def support_bound(s: int, n: int) -> int:
    """k = ⌈log s / (log n − log log s)⌉（s > 2^(n/3) なら n）。参考値として報告するだけ"""
    if s <= 2 or n <= 1 or s > 2 ** (n / 3):
        return n
    denom = math.log(n) - math.log(math.log(s))
    if denom <= 0:
        return n
    return min(n, math.ceil(math.log(s) / denom))
# ====== サポート（End） ======


# ====== 管理可能な再添字付け（Start） ======
@dataclass(frozen=True)
class ManageableLift:
    lp: LinearProgram
    constraint_ids: tuple  # lp.constraints と同じ並びの (q, i)
    aux_identifiers: Mapping[AuxVar, tuple] = field(default_factory=dict)  # y_(t,j) -> (t, j)
    k: int = 0
    origin: Mapping[tuple, AuxVar] = field(default_factory=dict, compare=False)  # (t, j) -> 元の補助変数


def manageable_var(t: int, j: tuple[int, ...]) -> AuxVar:
    return AuxVar((Segment("y", dom=j, par=(t,)),))


def _seed_tuple(action: SymmetryAction, fixes: Callable[[Permutation], bool], k: int, n: int) -> tuple[int, ...]:
    """濃度 min(k, n) の辞書式最小サポートを並べた s ∈ [n]^(k)（k > n なら末尾を繰り返す）"""
    s, _ = action.support_of(fixes, sizes=[min(k, n)])
    if k > n:
        s = s + (s[-1],) * (k - n)
    return s


def _orbits(items: Sequence, image: Callable) -> list[list]:
    """items を軌道に分ける（最初に現れた順）"""
    seen: dict = {}
    out: list[list] = []
    for item in items:
        if item in seen:
            continue
        orbit = image(item)
        members = [x for x in items if x in orbit]
        for x in members:
            seen[x] = len(out)
        out.append(members)
    return out


def make_manageable(lp_rigid: LinearProgram, k: int) -> ManageableLift:
    n = lp_rigid.n
    config.guard("n for manageable", n, config.MANAGEABLE_MAX_N)
    config.guard("k for manageable", k, config.MANAGEABLE_MAX_K)
    action = SymmetryAction(lp_rigid, "sym", max_n=config.MANAGEABLE_MAX_N)
    tuples = distinct_tuples(n, k)

    def too_large(what, support):
        raise SupportTooLargeError(f"{what} has support {list(support)} of size {len(support)} > k = {k}")

    # 補助変数：軌道 t ごとに f_t(π·s) = π·y
    aux_orbits = _orbits(lp_rigid.sorted_aux(), lambda v: {action.image_var(pi, v) for pi in action.elements})
    origin: dict = {}
    ids_of: dict = defaultdict(list)
    for t, orbit in enumerate(aux_orbits):
        y = orbit[0]
        rep = action.support(y)
        if len(rep.support) > k:
            too_large(y, rep.support)
        s = _seed_tuple(action, lambda pi: action.image_var(pi, y) == y, k, n)
        for pi in action.elements:
            j = permute_tuple(pi, s)
            w = action.image_var(pi, y)
            if origin.setdefault((t, j), w) != w:
                raise ManageableShapeError(f"identifier {(t, j)} is ambiguous")
        for j in tuples:
            ids_of[origin[(t, j)]].append(manageable_var(t, j))

    def expand(c: LinearConstraint) -> LinearConstraint:
        terms = []
        for v, a in c.terms:
            if isinstance(v, AuxVar):
                terms.extend((y, a) for y in ids_of[v])
            else:
                terms.append((v, a))
        return LinearConstraint.build(terms, c.rel, c.rhs)

    # 制約：相異なる値の軌道 × 重複度を q にまとめ、識別子 i ごとに一本ずつ
    values = [LinearConstraint.build(c.terms, c.rel, c.rhs) for c in lp_rigid.constraints]
    multiplicity = Counter(values)
    distinct = list(dict.fromkeys(values))
    con_orbits = _orbits(distinct, lambda c: {action.image_constraint(pi, c) for pi in action.elements})
    constraints = []
    constraint_ids = []
    q = 0
    for orbit in con_orbits:
        gamma = orbit[0]

        def fixes_gamma(pi: Permutation, gamma: LinearConstraint = gamma) -> bool:
            return action.image_constraint(pi, gamma) == gamma

        s_tuple, _ = action.support_of(fixes_gamma)
        if len(s_tuple) > k:
            too_large(f"constraint {gamma}", s_tuple)
        s = _seed_tuple(action, fixes_gamma, k, n)
        by_id: dict = {}
        for pi in action.elements:
            by_id.setdefault(permute_tuple(pi, s), action.image_constraint(pi, gamma))
        for _ in range(multiplicity[gamma]):
            for i in tuples:
                constraints.append(expand(by_id[i]))
                constraint_ids.append((q, i))
            q += 1

    aux_identifiers = {manageable_var(t, j): (t, j) for (t, j) in origin}
    lp = make_lp(n, lp_rigid.vocabulary, constraints, aux_identifiers.keys(), lp_rigid.fixed)
    logger.info(
        f"manageable (k={k}): {len(aux_orbits)} aux orbits, {q} constraint classes, "
        f"{len(lp.aux_vars)} aux vars, {len(lp.constraints)} constraints"
    )
    return ManageableLift(lp, tuple(constraint_ids), aux_identifiers, k, origin)


def check_manageable_properties(ml: ManageableLift, k: Optional[int] = None) -> bool:
    """定数項・補助変数係数・入力変数係数が等号型だけで決まるかを全組で確かめる"""
    k = ml.k if k is None else k
    lp = ml.lp
    if len(ml.constraint_ids) != len(lp.constraints):
        raise ManageableShapeError("constraint identifiers do not match the constraint list")
    if set(ml.aux_identifiers) != set(lp.aux_vars):
        raise ManageableShapeError("aux identifiers do not match the aux variables")
    for _, i in ml.constraint_ids:
        if len(i) != k:
            raise ManageableShapeError(f"constraint identifier {i} has length {len(i)}, expected {k}")
    for _, j in ml.aux_identifiers.values():
        if len(j) != k:
            raise ManageableShapeError(f"aux identifier {j} has length {len(j)}, expected {k}")

    by_q: dict = defaultdict(list)
    for (q, i), c in zip(ml.constraint_ids, lp.constraints):
        by_q[q].append((tuple(i), c))
    inputs = lp.input_variables()
    for q, items in by_q.items():
        if len({(c.rel, c.rhs) for _, c in items}) > 1:
            logger.info(f"constant terms differ within constraint class {q}")
            return False
        seen: dict = {}
        for i, c in items:
            coeffs = c.coeffs
            for var, (t, j) in ml.aux_identifiers.items():
                a = coeffs.get(var, 0)
                if seen.setdefault(("aux", t, equality_type(tuple(j) + i)), a) != a:
                    logger.info(f"aux coefficient pattern broken in class {q} at {var}")
                    return False
            for x in inputs:
                a = coeffs.get(x, 0)
                if seen.setdefault(("input", x.rel, equality_type(x.args + i)), a) != a:
                    logger.info(f"input coefficient pattern broken in class {q} at {x}")
                    return False
    return True
# ====== 管理可能な再添字付け（End） ======
