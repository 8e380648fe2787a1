# symlift/lp_model.py
"""
厳密有理数演算と LP（ポリトープ・リフト）のデータモデル

- Rational は fractions.Fraction（常に既約・分母正）
- VarId は入力変数（関係記号 + [n] 上のタプル）と補助変数（セグメントのパス）の二種類
- LinearProgram は不変オブジェクトで、制約は多重集合として扱う
"""
import re
import logging
import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

from symlift.errors import LPValidationError, RationalParseError, UnknownVariableError
from symlift.utils import magnitude_bits

logger = logging.getLogger(__name__)

Rational = Fraction

_RATIONAL_RE = re.compile(r"-?\d+(?:/\d+)?")


def rational_parse(s: Union[str, int, Fraction]) -> Fraction:
    """"p/q" / "p" 形式の文字列を既約な Fraction に変換"""
    if isinstance(s, bool):
        raise RationalParseError(f"not a rational literal: {s!r}")
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise RationalParseError(f"not a rational literal: {s!r}")
    text = s.strip()
    if not _RATIONAL_RE.fullmatch(text):
        raise RationalParseError(f"malformed rational literal: {s!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise RationalParseError(f"zero denominator in {s!r}")
    return Fraction(int(num), int(den) if den else 1)


# ====== 変数ID（Start） ======
@dataclass(frozen=True)
class Segment:
    tag: str
    dom: tuple[int, ...] = ()
    par: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.tag:
            raise LPValidationError("aux path segments need a nonempty tag")

    def __str__(self) -> str:
        inner = ",".join(map(str, self.dom))
        if self.par:
            inner += "|" + ",".join(map(str, self.par))
        return f"{self.tag}[{inner}]" if inner else self.tag


@dataclass(frozen=True)
class InputVar:
    rel: str
    args: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.rel}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class AuxVar:
    path: tuple[Segment, ...]

    def __post_init__(self):
        if not self.path:
            raise LPValidationError("aux variables need a nonempty path")

    def child(self, tag: str, dom: Iterable[int] = (), par: Iterable[int] = ()) -> "AuxVar":
        return AuxVar(self.path + (Segment(tag, tuple(dom), tuple(par)),))

    def has_prefix(self, prefix: "AuxVar") -> bool:
        return self.path[: len(prefix.path)] == prefix.path

    def rebase(self, old: "AuxVar", new: "AuxVar") -> "AuxVar":
        return AuxVar(new.path + self.path[len(old.path):])

    @property
    def leaf(self) -> Segment:
        return self.path[-1]

    def __str__(self) -> str:
        return "/".join(str(s) for s in self.path)


VarId = Union[InputVar, AuxVar]


def aux(tag: str, dom: Iterable[int] = (), par: Iterable[int] = ()) -> AuxVar:
    return AuxVar((Segment(tag, tuple(dom), tuple(par)),))


@lru_cache(maxsize=None)
def var_key(v: VarId) -> tuple:
    """VarId 上の全順序（入力変数が先、次に補助変数）"""
    if isinstance(v, InputVar):
        return (0, v.rel, v.args)
    return (1, tuple((s.tag, s.dom, s.par) for s in v.path))
# ====== 変数ID（End） ======


# ====== アフィン式と制約（Start） ======
class Affine:
    """疎な一次式 Σ a_v v + const（ガジェット構築用）"""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[VarId, Fraction] | None = None, const=0):
        self.terms: dict = dict(terms or {})
        self.const = Fraction(const)

    @classmethod
    def of(cls, value) -> "Affine":
        if isinstance(value, Affine):
            return value
        if isinstance(value, (InputVar, AuxVar)):
            return cls({value: Fraction(1)})
        if isinstance(value, (int, Fraction)):
            return cls(const=value)
        raise TypeError(f"cannot build an affine expression from {value!r}")

    def _combine(self, other, sign: int) -> "Affine":
        other = Affine.of(other)
        terms = dict(self.terms)
        for v, a in other.terms.items():
            terms[v] = terms.get(v, 0) + sign * a
        return Affine(terms, self.const + sign * other.const)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return Affine.of(other)._combine(self, -1)

    def __neg__(self):
        return Affine({v: -a for v, a in self.terms.items()}, -self.const)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        return Affine({v: a * scalar for v, a in self.terms.items()}, self.const * scalar)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Affine({self.terms!r}, {self.const})"


def total(items: Iterable) -> Affine:
    acc = Affine()
    for item in items:
        acc = acc + item
    return acc


class Rel(str, Enum):
    LE = "<="
    EQ = "="


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[VarId, Fraction], ...]
    rel: Rel
    rhs: Fraction

    @classmethod
    def build(cls, coeffs, rel: Rel, rhs) -> "LinearConstraint":
        """係数をまとめ、0 を落とし、var_key 順に並べて作る"""
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict = {}
        for v, a in items:
            merged[v] = merged.get(v, 0) + Fraction(a)
        terms = tuple(sorted(((v, a) for v, a in merged.items() if a != 0), key=lambda t: var_key(t[0])))
        return cls(terms, Rel(rel), Fraction(rhs))

    @property
    def coeffs(self) -> dict:
        return dict(self.terms)

    def variables(self) -> tuple:
        return tuple(v for v, _ in self.terms)

    def activity(self, point: Mapping) -> Fraction:
        return sum((a * point[v] for v, a in self.terms), Fraction(0))

    def holds(self, point: Mapping) -> bool:
        lhs = self.activity(point)
        return lhs == self.rhs if self.rel is Rel.EQ else lhs <= self.rhs

    def rename(self, mapping) -> "LinearConstraint":
        return LinearConstraint.build(((mapping(v), a) for v, a in self.terms), self.rel, self.rhs)

    def substitute(self, values: Mapping) -> "LinearConstraint":
        rhs = self.rhs
        kept = []
        for v, a in self.terms:
            if v in values:
                rhs -= a * values[v]
            else:
                kept.append((v, a))
        return LinearConstraint.build(kept, self.rel, rhs)

    def __str__(self) -> str:
        lhs = " + ".join(f"{a}*{v}" for v, a in self.terms) or "0"
        return f"{lhs} {self.rel.value} {self.rhs}"


def le(lhs, rhs) -> LinearConstraint:
    diff = Affine.of(lhs) - Affine.of(rhs)
    return LinearConstraint.build(diff.terms, Rel.LE, -diff.const)


def ge(lhs, rhs) -> LinearConstraint:
    return le(rhs, lhs)


def eq(lhs, rhs) -> LinearConstraint:
    diff = Affine.of(lhs) - Affine.of(rhs)
    return LinearConstraint.build(diff.terms, Rel.EQ, -diff.const)


def box(v: VarId, lo=0, hi=1) -> list[LinearConstraint]:
    # lo ≤ v ≤ hi
    return [le(lo, v), le(v, hi)]
# ====== アフィン式と制約（End） ======


# ====== LinearProgram（Start） ======
@dataclass(frozen=True)
class LinearProgram:
    n: int
    vocabulary: tuple[tuple[str, int], ...]
    aux_vars: frozenset
    constraints: tuple[LinearConstraint, ...]
    fixed: frozenset = field(default=frozenset())

    @property
    def arity(self) -> dict[str, int]:
        return dict(self.vocabulary)

    def input_variables(self) -> list[InputVar]:
        """L(n) から substitute 済みの変数を除いたもの"""
        out = []
        for rel, ar in self.vocabulary:
            for args in itertools.product(range(1, self.n + 1), repeat=ar):
                v = InputVar(rel, args)
                if v not in self.fixed:
                    out.append(v)
        return out

    def sorted_aux(self) -> list[AuxVar]:
        return sorted(self.aux_vars, key=var_key)

    def variables(self) -> list:
        return self.input_variables() + self.sorted_aux()

    def occurring_variables(self) -> list:
        seen = {v for c in self.constraints for v, _ in c.terms}
        return sorted(seen, key=var_key)

    def has_variable(self, v: VarId) -> bool:
        if isinstance(v, AuxVar):
            return v in self.aux_vars
        ar = self.arity.get(v.rel)
        return (
            ar is not None
            and len(v.args) == ar
            and all(1 <= i <= self.n for i in v.args)
            and v not in self.fixed
        )

    def validate(self) -> "LinearProgram":
        if self.n < 1:
            raise LPValidationError(f"n must be positive, got {self.n}")
        names = [r for r, _ in self.vocabulary]
        if len(set(names)) != len(names):
            raise LPValidationError(f"duplicate relation names in vocabulary {names}")
        for v in self.aux_vars:
            for seg in v.path:
                if any(not 1 <= i <= self.n for i in seg.dom):
                    raise LPValidationError(f"aux variable {v} has domain indices outside [{self.n}]")
        for c in self.constraints:
            for v, _ in c.terms:
                if not self.has_variable(v):
                    raise LPValidationError(f"constraint mentions unknown variable {v}")
        return self

    def replace_constraints(self, constraints: Iterable[LinearConstraint]) -> "LinearProgram":
        return replace(self, constraints=tuple(constraints))

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.constraints)


def make_lp(
    n: int,
    vocabulary: Iterable[tuple[str, int]],
    constraints: Iterable[LinearConstraint],
    aux_vars: Iterable[AuxVar] | None = None,
    fixed: Iterable[InputVar] = (),
) -> LinearProgram:
    """aux_vars 省略時は制約中に現れる補助変数を集める"""
    constraints = tuple(constraints)
    if aux_vars is None:
        aux_vars = {v for c in constraints for v, _ in c.terms if isinstance(v, AuxVar)}
    lp = LinearProgram(
        n=n,
        vocabulary=tuple((str(r), int(a)) for r, a in vocabulary),
        aux_vars=frozenset(aux_vars),
        constraints=constraints,
        fixed=frozenset(fixed),
    )
    return lp.validate()


def lp_size_parts(lp: LinearProgram) -> tuple[int, int, int]:
    """(u, v, b)：u は出現変数数、v は EQ を二本の LE に分けた後の制約数、b は最大ビット長"""
    u = len(lp.occurring_variables())
    v = sum(2 if c.rel is Rel.EQ else 1 for c in lp.constraints)
    b = max(
        (max([magnitude_bits(c.rhs)] + [magnitude_bits(a) for _, a in c.terms]) for c in lp.constraints),
        default=0,
    )
    return u, v, b


def lp_size(lp: LinearProgram) -> int:
    u, v, b = lp_size_parts(lp)
    return (u + 1) * v * b


def substitute(lp: LinearProgram, assignment: Mapping[VarId, Fraction]) -> LinearProgram:
    """割り当てた変数を定数として畳み込み、変数集合から取り除く"""
    values = {}
    for v, value in assignment.items():
        if not lp.has_variable(v):
            raise UnknownVariableError(f"cannot fix {v}: not a variable of this LP")
        values[v] = rational_parse(value) if isinstance(value, str) else Fraction(value)
    constraints = tuple(c.substitute(values) for c in lp.constraints)
    fixed_inputs = {v for v in values if isinstance(v, InputVar)}
    return LinearProgram(
        n=lp.n,
        vocabulary=lp.vocabulary,
        aux_vars=lp.aux_vars - set(values),
        constraints=constraints,
        fixed=lp.fixed | fixed_inputs,
    )


def canonicalize(lp: LinearProgram) -> LinearProgram:
    """EQ を二本の LE に分割し、係数を正規化（0 除去・var_key 順）"""
    out = []
    for c in lp.constraints:
        c = LinearConstraint.build(c.terms, c.rel, c.rhs)
        if c.rel is Rel.EQ:
            out.append(LinearConstraint(c.terms, Rel.LE, c.rhs))
            out.append(LinearConstraint.build(((v, -a) for v, a in c.terms), Rel.LE, -c.rhs))
        else:
            out.append(c)
    return lp.replace_constraints(out)


def is_satisfied(lp: LinearProgram, point: Mapping[VarId, Fraction]) -> bool:
    return all(c.holds(point) for c in lp.constraints)
# ====== LinearProgram（End） ======
