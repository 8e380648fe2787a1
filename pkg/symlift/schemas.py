# symlift/schemas.py
"""
入出力 JSON のスキーマ（pydantic v2）と、ドメインオブジェクトとの相互変換

有理数は "p/q" 形式の文字列（入力では整数も可）。出力は orjson でキー順ソート・2 スペースインデント。
"""
import logging
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Literal, Mapping, Optional, Union

import orjson
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, TypeAdapter, ValidationError

from symlift.circuit_ir import (
    Circuit,
    CircuitSpec,
    GateFamily,
    GateKind,
    Op,
    WiringPattern,
    circuit_from_raw,
    materialize,
    pattern_token,
)
from symlift.errors import RationalParseError, SchemaError
from symlift.lp_model import (
    AuxVar,
    InputVar,
    LinearConstraint,
    LinearProgram,
    Segment,
    VarId,
    make_lp,
    rational_parse,
    var_key,
)

logger = logging.getLogger(__name__)


def _to_rational(value: Any) -> Fraction:
    try:
        return rational_parse(value)
    except RationalParseError as e:
        raise ValueError(e.detail) from e


Rational = Annotated[Fraction, PlainValidator(_to_rational), PlainSerializer(str, return_type=str)]


# ====== VarId Schema（Start） ======
class SegmentSchema(BaseModel):
    tag: str = Field(min_length=1)
    dom: list[int] = []
    par: list[int] = []


class InputVarSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["input"] = "input"
    rel: str
    args: list[int] = Field(alias="tuple")


class AuxVarSchema(BaseModel):
    kind: Literal["aux"] = "aux"
    path: list[SegmentSchema] = Field(min_length=1)


VarIdSchema = Annotated[Union[InputVarSchema, AuxVarSchema], Field(discriminator="kind")]


def var_to_schema(v: VarId) -> Union[InputVarSchema, AuxVarSchema]:
    if isinstance(v, InputVar):
        return InputVarSchema(rel=v.rel, args=list(v.args))
    return AuxVarSchema(path=[SegmentSchema(tag=s.tag, dom=list(s.dom), par=list(s.par)) for s in v.path])


def var_from_schema(s: Union[InputVarSchema, AuxVarSchema]) -> VarId:
    if isinstance(s, InputVarSchema):
        return InputVar(s.rel, tuple(s.args))
    return AuxVar(tuple(Segment(p.tag, tuple(p.dom), tuple(p.par)) for p in s.path))
# ====== VarId Schema（End） ======


# ====== LP Schema（Start） ======
class VocabularyEntry(BaseModel):
    name: str
    arity: int = Field(ge=0)


class TermSchema(BaseModel):
    var: VarIdSchema
    coef: Rational


class ConstraintSchema(BaseModel):
    lhs: list[TermSchema]
    rel: Literal["<=", "="]
    rhs: Rational


class LPSchema(BaseModel):
    n: int
    vocabulary: list[VocabularyEntry]
    aux_vars: list[AuxVarSchema] = []
    constraints: list[ConstraintSchema]
    fixed: Optional[list[InputVarSchema]] = None


def lp_to_schema(lp: LinearProgram) -> LPSchema:
    return LPSchema(
        n=lp.n,
        vocabulary=[VocabularyEntry(name=r, arity=a) for r, a in lp.vocabulary],
        aux_vars=[var_to_schema(v) for v in lp.sorted_aux()],
        constraints=[
            ConstraintSchema(
                lhs=[TermSchema(var=var_to_schema(v), coef=a) for v, a in c.terms],
                rel=c.rel.value,
                rhs=c.rhs,
            )
            for c in lp.constraints
        ],
        fixed=[var_to_schema(v) for v in sorted(lp.fixed, key=var_key)] or None,
    )


def lp_from_schema(s: LPSchema) -> LinearProgram:
    constraints = [
        LinearConstraint.build([(var_from_schema(t.var), t.coef) for t in c.lhs], c.rel, c.rhs)
        for c in s.constraints
    ]
    return make_lp(
        s.n,
        [(e.name, e.arity) for e in s.vocabulary],
        constraints,
        aux_vars=[var_from_schema(v) for v in s.aux_vars],
        fixed=[var_from_schema(v) for v in s.fixed or []],
    )
# ====== LP Schema（End） ======


# ====== 回路 Schema（Start） ======
class WiringSchema(BaseModel):
    target: str
    pattern: list[str]
    all_tuples: bool = True


class FamilySchema(BaseModel):
    name: str
    arity: int = Field(ge=0)
    kind: dict[str, dict[str, Any]]
    wiring: list[WiringSchema] = []


class GateRefSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    family: str
    args: list[int] = Field(default=[], alias="tuple")


class RawGateSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    family: str
    args: list[int] = Field(default=[], alias="tuple")
    kind: dict[str, dict[str, Any]]
    children: list[GateRefSchema] = []


class CircuitSpecSchema(BaseModel):
    vocabulary: list[VocabularyEntry]
    families: list[FamilySchema]
    output: GateRefSchema


class RawCircuitSchema(BaseModel):
    n: int
    vocabulary: list[VocabularyEntry]
    gates: list[RawGateSchema]
    output: GateRefSchema


def kind_from_json(data: Mapping[str, Mapping[str, Any]]) -> GateKind:
    """{"or": {}} / {"th": {"k": 2}} / {"input": {"rel": "E"}} など"""
    if len(data) != 1:
        raise SchemaError(f"gate kind must have exactly one key, got {sorted(data)}")
    ((name, params),) = data.items()
    try:
        op = Op(name)
    except ValueError as e:
        raise SchemaError(f"unknown gate kind {name!r}") from e
    try:
        if op is Op.INPUT:
            return GateKind.input(str(params["rel"]))
        if op is Op.TH:
            return GateKind.th(int(params["k"]))
        if op is Op.EX:
            return GateKind.ex(int(params["t"]))
    except KeyError as e:
        raise SchemaError(f"gate kind {name!r} is missing parameter {e.args[0]!r}") from e
    return GateKind(op)


def kind_to_json(kind: GateKind) -> dict[str, dict[str, Any]]:
    if kind.op is Op.INPUT:
        return {"input": {"rel": kind.rel}}
    if kind.op is Op.TH:
        return {"th": {"k": kind.param}}
    if kind.op is Op.EX:
        return {"ex": {"t": kind.param}}
    return {kind.op.value: {}}


def spec_from_schema(s: CircuitSpecSchema) -> CircuitSpec:
    families = tuple(
        GateFamily(
            name=f.name,
            index_arity=f.arity,
            kind=kind_from_json(f.kind),
            wiring=tuple(WiringPattern.parse(w.target, w.pattern, w.all_tuples) for w in f.wiring),
        )
        for f in s.families
    )
    return CircuitSpec(
        vocabulary=tuple((e.name, e.arity) for e in s.vocabulary),
        families=families,
        output_family=s.output.family,
        output_tuple=tuple(s.output.args),
    ).validate()


def spec_to_schema(spec: CircuitSpec) -> CircuitSpecSchema:
    return CircuitSpecSchema(
        vocabulary=[VocabularyEntry(name=r, arity=a) for r, a in spec.vocabulary],
        families=[
            FamilySchema(
                name=f.name,
                arity=f.index_arity,
                kind=kind_to_json(f.kind),
                wiring=[
                    WiringSchema(target=w.target, pattern=[pattern_token(e) for e in w.pattern], all_tuples=w.all_tuples)
                    for w in f.wiring
                ],
            )
            for f in spec.families
        ],
        output=GateRefSchema(family=spec.output_family, args=list(spec.output_tuple)),
    )


def circuit_to_raw_schema(c: Circuit) -> RawCircuitSchema:
    return RawCircuitSchema(
        n=c.n,
        vocabulary=[VocabularyEntry(name=r, arity=a) for r, a in c.vocabulary],
        gates=[
            RawGateSchema(
                family=g[0],
                args=list(g[1]),
                kind=kind_to_json(c.kinds[g]),
                children=[GateRefSchema(family=ch[0], args=list(ch[1])) for ch in c.children[g]],
            )
            for g in c.order
        ],
        output=GateRefSchema(family=c.output[0], args=list(c.output[1])),
    )


def circuit_from_raw_schema(s: RawCircuitSchema) -> Circuit:
    gates = [
        ((g.family, tuple(g.args)), kind_from_json(g.kind), [(ch.family, tuple(ch.args)) for ch in g.children])
        for g in s.gates
    ]
    return circuit_from_raw(s.n, [(e.name, e.arity) for e in s.vocabulary], gates, (s.output.family, tuple(s.output.args)))
# ====== 回路 Schema（End） ======


# ====== 代入・目的関数 Schema（Start） ======
class AssignmentEntry(BaseModel):
    var: VarIdSchema
    value: Rational


class ObjectiveEntry(BaseModel):
    var: VarIdSchema
    coef: Rational


_assignment_adapter = TypeAdapter(list[AssignmentEntry])
_objective_adapter = TypeAdapter(list[ObjectiveEntry])


def assignment_to_json(point: Mapping[VarId, Fraction]) -> list[AssignmentEntry]:
    return [AssignmentEntry(var=var_to_schema(v), value=point[v]) for v in sorted(point, key=var_key)]
# ====== 代入・目的関数 Schema（End） ======


# ====== レポート Schema（Start） ======
class SolveResult(BaseModel):
    status: Literal["feasible", "infeasible", "unbounded", "optimal"]
    value: Optional[Rational] = None
    point: Optional[list[AssignmentEntry]] = None
    ray: Optional[list[AssignmentEntry]] = None


class ConstraintRef(BaseModel):
    kind: Literal["constraint"] = "constraint"
    index: int


class SupportReportSchema(BaseModel):
    element: Annotated[Union[AuxVarSchema, ConstraintRef], Field(discriminator="kind")]
    support: list[int]
    verified_against: int
    group: Literal["sym", "alt"] = "sym"


class Counterexample(BaseModel):
    input: list[AssignmentEntry]
    circuit: int
    lp: int


class RunReport(BaseModel):
    command: str
    n: int
    mode: str
    inputs_checked: int
    mismatches: int
    counterexample: Optional[Counterexample] = None
    timing: Optional[dict[str, float]] = None


class SymmetryCheck(BaseModel):
    permutation: list[int]
    invariant: bool
    witness: Literal["gate-wise", "search", "none"]


class SymmetryReport(BaseModel):
    command: str = "verify-symmetry"
    n: int
    group_size: int
    checked: list[SymmetryCheck]
    failures: int


class ConstraintIdSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    q: int
    args: list[int] = Field(alias="tuple")


class AuxIdentifierSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    var: AuxVarSchema
    t: int
    args: list[int] = Field(alias="tuple")


class ManageableOutput(BaseModel):
    k: int
    lp: LPSchema
    constraint_ids: list[ConstraintIdSchema]
    aux_identifiers: list[AuxIdentifierSchema]
    properties_hold: Optional[bool] = None


class SizeReport(BaseModel):
    u: int
    v: int
    b: int
    size: int


class WriteReport(BaseModel):
    written: str
    aux_vars: int
    constraints: int
    size: int


class ErrorReport(BaseModel):
    error: str
    detail: str
# ====== レポート Schema（End） ======


# ====== 読み書き（Start） ======
def dumps(model: Union[BaseModel, list, dict]) -> str:
    """キー順ソート・2 スペースインデント（同じ入力なら同じバイト列）"""
    if isinstance(model, BaseModel):
        data = model.model_dump(mode="json", by_alias=True, exclude_none=True)
    elif isinstance(model, list):
        data = [m.model_dump(mode="json", by_alias=True, exclude_none=True) if isinstance(m, BaseModel) else m for m in model]
    else:
        data = model
    return orjson.dumps(data, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2).decode()


def read_json(path: Union[str, Path]) -> Any:
    try:
        return orjson.loads(Path(path).read_bytes())
    except FileNotFoundError as e:
        raise SchemaError(f"file not found: {path}") from e
    except orjson.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON: {e}") from e


def write_json(path: Union[str, Path], model: Union[BaseModel, list, dict]) -> None:
    Path(path).write_text(dumps(model) + "\n", encoding="utf-8")


def _validate(schema, data: Any, what: str):
    try:
        if isinstance(schema, TypeAdapter):
            return schema.validate_python(data)
        return schema.model_validate(data)
    except ValidationError as e:
        raise SchemaError(f"malformed {what}: {e.errors(include_url=False)[0]['msg']} at {e.errors()[0]['loc']}") from e


def parse_lp(data: Any) -> LinearProgram:
    return lp_from_schema(_validate(LPSchema, data, "LP JSON"))


def load_lp(path: Union[str, Path]) -> LinearProgram:
    lp = parse_lp(read_json(path))
    logger.info(f"loaded LP from {path}: n={lp.n}, {len(lp.aux_vars)} aux vars, {len(lp.constraints)} constraints")
    return lp


def parse_circuit(data: Any, n: Optional[int] = None) -> Circuit:
    """生ゲート形式（"gates" キーあり）はそのまま、ゲート族形式は n で展開"""
    if isinstance(data, dict) and "gates" in data:
        c = circuit_from_raw_schema(_validate(RawCircuitSchema, data, "raw circuit JSON"))
        if n is not None and n != c.n:
            raise SchemaError(f"raw circuit is fixed at n={c.n}, got --n {n}")
        return c
    spec = spec_from_schema(_validate(CircuitSpecSchema, data, "circuit JSON"))
    if n is None:
        raise SchemaError("--n is required for gate-family circuits")
    return materialize(spec, n)


def load_circuit(path: Union[str, Path], n: Optional[int] = None) -> Circuit:
    return parse_circuit(read_json(path), n)


def parse_assignment(data: Any) -> dict[VarId, Fraction]:
    entries = _validate(_assignment_adapter, data, "assignment JSON")
    return {var_from_schema(e.var): e.value for e in entries}


def parse_objective(data: Any) -> dict[VarId, Fraction]:
    entries = _validate(_objective_adapter, data, "objective JSON")
    out: dict = {}
    for e in entries:
        v = var_from_schema(e.var)
        out[v] = out.get(v, 0) + e.coef
    return out


def parse_target(text: str) -> Union[AuxVar, int]:
    """--target：制約の添字（整数）か、補助変数の VarId JSON"""
    text = text.strip()
    if text.lstrip("-").isdigit():
        return int(text)
    try:
        data = orjson.loads(text)
    except orjson.JSONDecodeError as e:
        raise SchemaError(f"--target must be a constraint index or an aux VarId JSON, got {text!r}") from e
    return var_from_schema(_validate(AuxVarSchema, data, "target VarId"))


def support_to_schema(report) -> SupportReportSchema:
    element = (
        var_to_schema(report.element) if isinstance(report.element, AuxVar) else ConstraintRef(index=report.element)
    )
    return SupportReportSchema(
        element=element,
        support=list(report.support),
        verified_against=report.verified_against,
        group=report.group,
    )


def manageable_to_schema(ml, properties_hold: Optional[bool] = None) -> ManageableOutput:
    return ManageableOutput(
        k=ml.k,
        lp=lp_to_schema(ml.lp),
        constraint_ids=[ConstraintIdSchema(q=q, args=list(i)) for q, i in ml.constraint_ids],
        aux_identifiers=[
            AuxIdentifierSchema(var=var_to_schema(v), t=ml.aux_identifiers[v][0], args=list(ml.aux_identifiers[v][1]))
            for v in sorted(ml.aux_identifiers, key=var_key)
        ],
        properties_hold=properties_hold,
    )
# ====== 読み書き（End） ======
