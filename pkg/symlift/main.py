# symlift/main.py
"""
symlift コマンドライン

レポートはすべて JSON で標準出力へ、ログと進捗は標準エラーへ。
"""
import sys
import time
import random
import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Optional

import click
import typer
from tqdm import tqdm

from symlift import config
from symlift.circuit_ir import Circuit, eliminate_thresholds, evaluate
from symlift.compiler import CompiledLift, compile as compile_circuit, symmetry_witness
from symlift.errors import NotSymmetricError, SymliftError
from symlift.gadgets import GADGET_KINDS, build_gadget
from symlift.lp_model import LinearProgram, lp_size, lp_size_parts, substitute
from symlift.schemas import (
    Counterexample,
    ErrorReport,
    RunReport,
    SizeReport,
    SolveResult,
    SymmetryCheck,
    SymmetryReport,
    WriteReport,
    assignment_to_json,
    dumps,
    load_circuit,
    load_lp,
    lp_to_schema,
    manageable_to_schema,
    parse_assignment,
    parse_objective,
    parse_target,
    read_json,
    support_to_schema,
    write_json,
)
from symlift.solver import Infeasible, Unbounded, enumerate_vertices, feasible, optimize
from symlift.symmetry import (
    SymmetryAction,
    all_permutations,
    check_manageable_properties,
    find_extension,
    is_invariant,
    make_manageable,
    perm_from_image,
    perm_image,
    rigidify,
)

# ロギング設定（標準出力は JSON 専用）
logger = logging.getLogger("symlift")

app = typer.Typer(
    name="symlift",
    add_completion=False,
    no_args_is_help=True,
    help="Compile symmetric threshold circuits to symmetric LP lifts and check them with an exact solver.",
)


def _emit(model) -> None:
    typer.echo(dumps(model))


def _emit_lp(lp: LinearProgram, out: Optional[Path]) -> None:
    if out is None:
        _emit(lp_to_schema(lp))
        return
    write_json(out, lp_to_schema(lp))
    logger.info(f"wrote {out}")
    _emit(WriteReport(written=str(out), aux_vars=len(lp.aux_vars), constraints=len(lp.constraints), size=lp_size(lp)))


# ====== LP の生成（Start） ======
@app.command()
def gadget(
    kind: Annotated[str, typer.Option(help=f"one of {', '.join(GADGET_KINDS)}")],
    n: Annotated[int, typer.Option(help="number of input slots")],
    t: Annotated[Optional[int], typer.Option(help="weight for ex-slice / ex-gate")] = None,
    q: Annotated[Optional[int], typer.Option(help="truncation level for tpp")] = None,
    prefix: Annotated[Optional[str], typer.Option(help="aux path prefix")] = None,
    out: Annotated[Optional[Path], typer.Option(help="write the LP here instead of stdout")] = None,
):
    """ガジェット単体の LP を出力"""
    g = build_gadget(kind, n, t=t, q=q, prefix=prefix)
    logger.info(f"gadget {kind}: {len(g.lp.aux_vars)} aux vars, {len(g.lp.constraints)} constraints")
    _emit_lp(g.lp, out)


@app.command("compile")
def compile_command(
    circuit: Annotated[Path, typer.Option(help="circuit JSON (gate families or raw gates)")],
    n: Annotated[Optional[int], typer.Option(help="domain size for gate-family circuits")] = None,
    out: Annotated[Optional[Path], typer.Option()] = None,
):
    """閾値ゲートを消去してから LP(C) を作る"""
    c = eliminate_thresholds(load_circuit(circuit, n))
    _emit_lp(compile_circuit(c).lp, out)
# ====== LP の生成（End） ======


# ====== ソルバー（Start） ======
@app.command()
def solve(
    lp: Annotated[Path, typer.Option(help="LP JSON")],
    fix: Annotated[Optional[Path], typer.Option(help="assignment JSON substituted before solving")] = None,
    objective: Annotated[Optional[Path], typer.Option(help="objective JSON")] = None,
    sense: Annotated[str, typer.Option(help="min or max")] = "min",
):
    """実行可能性判定（--objective があれば最適化）"""
    program = load_lp(lp)
    if fix is not None:
        program = substitute(program, parse_assignment(read_json(fix)))
    target = parse_objective(read_json(objective)) if objective is not None else {}
    result = optimize(program, target, sense)
    if isinstance(result, Infeasible):
        _emit(SolveResult(status="infeasible"))
    elif isinstance(result, Unbounded):
        _emit(SolveResult(status="unbounded", ray=assignment_to_json(result.ray)))
    elif objective is None:
        _emit(SolveResult(status="feasible", point=assignment_to_json(result.point)))
    else:
        _emit(SolveResult(status="optimal", value=result.value, point=assignment_to_json(result.point)))


@app.command()
def vertices(lp: Annotated[Path, typer.Option(help="LP JSON")]):
    """有界な多面体の頂点を列挙（机上サイズのみ）"""
    points = enumerate_vertices(load_lp(lp))
    _emit([[e.model_dump(mode="json", by_alias=True) for e in assignment_to_json(p)] for p in points])


@app.command()
def size(lp: Annotated[Path, typer.Option(help="LP JSON")]):
    """(u+1)·v·b とその内訳"""
    u, v, b = lp_size_parts(load_lp(lp))
    _emit(SizeReport(u=u, v=v, b=b, size=(u + 1) * v * b))
# ====== ソルバー（End） ======


# ====== 等価性の検証（Start） ======
_WORKER: dict = {}


def _init_worker(lp: LinearProgram, circuit: Circuit) -> None:
    _WORKER["lp"] = lp
    _WORKER["circuit"] = circuit
    _WORKER["inputs"] = circuit.input_variables()


def _bits_of(index: int, width: int) -> tuple[int, ...]:
    # itertools.product((0, 1), repeat=width) の index 番目
    return tuple((index >> (width - 1 - k)) & 1 for k in range(width))


def _check_index(index: int) -> tuple[int, int, int]:
    lp, c, inputs = _WORKER["lp"], _WORKER["circuit"], _WORKER["inputs"]
    x = dict(zip(inputs, _bits_of(index, len(inputs))))
    expected = evaluate(c, x)
    got = int(feasible(lp, {v: Fraction(b) for v, b in x.items()}))
    return index, expected, got


def check_equivalence(lp: LinearProgram, c: Circuit, indices: list[int], jobs: int = 1) -> list[tuple[int, int, int]]:
    """各入力について (添字, 回路の値, LP の実行可能性) を添字順で返す"""
    progress = tqdm(total=len(indices), desc="inputs", file=sys.stderr, disable=len(indices) < 64)
    results = []
    if jobs <= 1:
        _init_worker(lp, c)
        for index in indices:
            results.append(_check_index(index))
            progress.update()
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(lp, c)) as executor:
            for item in executor.map(_check_index, indices, chunksize=max(1, len(indices) // (4 * jobs))):
                results.append(item)
                progress.update()
    progress.close()
    return sorted(results)


@app.command("verify-equivalence")
def verify_equivalence(
    circuit: Annotated[Path, typer.Option(help="circuit JSON")],
    n: Annotated[Optional[int], typer.Option()] = None,
    exhaustive: Annotated[bool, typer.Option(help="check all 0/1 inputs")] = False,
    samples: Annotated[int, typer.Option(help="random inputs to check without --exhaustive")] = 64,
    seed: Annotated[int, typer.Option()] = 0,
    jobs: Annotated[int, typer.Option(help="worker processes")] = config.DEFAULT_JOBS,
    timing: Annotated[bool, typer.Option(help="include timing in the JSON report")] = False,
):
    """コンパイルした LP の実行可能性が回路の出力と一致するかを 0/1 入力で確かめる"""
    started = time.perf_counter()
    c = load_circuit(circuit, n)
    lp = compile_circuit(eliminate_thresholds(c)).lp
    compiled = time.perf_counter()
    width = len(c.input_variables())
    total_inputs = 1 << width
    if exhaustive:
        mode = "exhaustive"
        indices = list(range(total_inputs))
    else:
        mode = f"samples(seed={seed})"
        indices = sorted(random.Random(seed).sample(range(total_inputs), min(samples, total_inputs)))
    results = check_equivalence(lp, c, indices, jobs)
    finished = time.perf_counter()

    mismatched = [(i, e, g) for i, e, g in results if e != g]
    counterexample = None
    if mismatched:
        index, expected, got = mismatched[0]
        point = dict(zip(c.input_variables(), map(Fraction, _bits_of(index, width))))
        counterexample = Counterexample(input=assignment_to_json(point), circuit=expected, lp=got)
    seconds = {"compile": round(compiled - started, 3), "verify": round(finished - compiled, 3)}
    logger.info(f"verify-equivalence: {len(results)} inputs, {len(mismatched)} mismatches, timing {seconds}")
    _emit(
        RunReport(
            command="verify-equivalence",
            n=c.n,
            mode=mode,
            inputs_checked=len(results),
            mismatches=len(mismatched),
            counterexample=counterexample,
            timing=seconds if timing else None,
        )
    )
    if mismatched:
        raise typer.Exit(code=1)


def _init_symmetry_worker(program: LinearProgram, compiled: Optional[CompiledLift]) -> None:
    _WORKER["program"] = program
    _WORKER["compiled"] = compiled


def _check_permutation(image: list[int]) -> tuple[list[int], bool, str]:
    program, compiled = _WORKER["program"], _WORKER["compiled"]
    pi = perm_from_image(image)
    sigma, how = None, "none"
    if compiled is not None:
        try:
            sigma, how = symmetry_witness(compiled, pi), "gate-wise"
        except NotSymmetricError as e:
            logger.warning(f"no gate-wise witness for {image}: {e.detail}")
    if sigma is None:
        sigma = find_extension(program, pi)
        how = "search" if sigma is not None else "none"
    return image, sigma is not None and is_invariant(program, pi, sigma), how


def check_symmetry(
    program: LinearProgram, compiled: Optional[CompiledLift], jobs: int = 1
) -> list[tuple[list[int], bool, str]]:
    """Sym_n の各 π について (像リスト, 不変か, 証拠の種類) を all_permutations の順で返す"""
    images = [perm_image(pi) for pi in all_permutations(program.n)]
    if jobs <= 1:
        _init_symmetry_worker(program, compiled)
        return [_check_permutation(image) for image in images]
    chunksize = max(1, len(images) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_symmetry_worker, initargs=(program, compiled)) as executor:
        return list(executor.map(_check_permutation, images, chunksize=chunksize))


@app.command("verify-symmetry")
def verify_symmetry(
    circuit: Annotated[Optional[Path], typer.Option(help="circuit JSON (compiled first)")] = None,
    lp: Annotated[Optional[Path], typer.Option(help="LP JSON (checked by extension search)")] = None,
    n: Annotated[Optional[int], typer.Option()] = None,
    jobs: Annotated[int, typer.Option(help="worker processes")] = config.DEFAULT_JOBS,
):
    """Sym_n の全要素について (π, σ) が LP を保つかを確かめる"""
    if (circuit is None) == (lp is None):
        raise click.UsageError("give exactly one of --circuit and --lp")
    compiled = None
    if circuit is not None:
        compiled = compile_circuit(eliminate_thresholds(load_circuit(circuit, n)))
        program = compiled.lp
    else:
        program = load_lp(lp)
    config.guard("n for symmetry verification", program.n, config.SUPPORT_MAX_N)

    checks = [
        SymmetryCheck(permutation=image, invariant=ok, witness=how)
        for image, ok, how in check_symmetry(program, compiled, jobs)
    ]
    failures = sum(not ch.invariant for ch in checks)
    logger.info(f"verify-symmetry: {len(checks)} permutations, {failures} failures")
    _emit(SymmetryReport(n=program.n, group_size=len(checks), checked=checks, failures=failures))
    if failures:
        raise typer.Exit(code=1)
# ====== 等価性の検証（End） ======


# ====== 対称性の解析（Start） ======
@app.command("rigidify")
def rigidify_command(
    lp: Annotated[Path, typer.Option(help="LP JSON")],
    out: Annotated[Optional[Path], typer.Option()] = None,
):
    """ext(id) の軌道をまとめて剛な LP にする"""
    _emit_lp(rigidify(load_lp(lp)), out)


@app.command()
def supports(
    lp: Annotated[Path, typer.Option(help="rigid LP JSON")],
    target: Annotated[Optional[str], typer.Option(help="constraint index or aux VarId JSON; all targets if omitted")] = None,
    group: Annotated[str, typer.Option(help="sym or alt")] = "sym",
):
    """最小サポート（濃度最小・辞書式最小）"""
    action = SymmetryAction(load_lp(lp), group)
    if target is None:
        reports = action.all_supports()
    else:
        reports = [action.support(parse_target(target))]
    _emit([support_to_schema(r) for r in reports])


@app.command()
def manageable(
    lp: Annotated[Path, typer.Option(help="rigid LP JSON")],
    k: Annotated[int, typer.Option(help="tuple length of the identifiers")],
    out: Annotated[Optional[Path], typer.Option()] = None,
    check: Annotated[bool, typer.Option(help="also check the coefficient properties")] = False,
):
    """(軌道, [n]^(k) の組) で再添字付けした LP"""
    ml = make_manageable(load_lp(lp), k)
    holds = check_manageable_properties(ml) if check else None
    report = manageable_to_schema(ml, holds)
    if out is not None:
        write_json(out, report)
        _emit(WriteReport(written=str(out), aux_vars=len(ml.lp.aux_vars), constraints=len(ml.lp.constraints), size=lp_size(ml.lp)))
    else:
        _emit(report)
    if holds is False:
        raise typer.Exit(code=1)
# ====== 対称性の解析（End） ======


def run(argv: Optional[list[str]] = None) -> int:
    """サブコマンドを実行して終了コードを返す（ドメインエラーは JSON にして 1）"""
    logging.basicConfig(
        level=config.LOG_LEVEL,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    command = typer.main.get_command(app)
    try:
        rv = command.main(args=argv, prog_name="symlift", standalone_mode=False)
    except SymliftError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        _emit(ErrorReport(error=type(e).__name__, detail=e.detail))
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return rv if isinstance(rv, int) else 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
