import logging
from pathlib import Path

from symlift.corpus import NON_RIGID_LPS, RESTRICTION_LIFTS, SYMMETRIC_CIRCUITS, single_edge_input
from symlift.schemas import lp_to_schema, spec_to_schema, write_json

logger = logging.getLogger(__name__)


def export_corpus(n: int = 2):
    # 出力先ディレクトリのパスを設定
    base_dir = Path(__file__).resolve().parent.parent
    corpus_dir = base_dir / 'corpus'

    # ディレクトリが存在しない場合は作成
    (corpus_dir / 'circuits').mkdir(parents=True, exist_ok=True)
    (corpus_dir / 'lps').mkdir(parents=True, exist_ok=True)

    # 回路（ゲート族形式。edge_parity は n に依存するので名前に n を付ける）
    for name, make in SYMMETRIC_CIRCUITS.items():
        filename = f"{name}_n{n}.json" if name == "edge_parity" else f"{name}.json"
        write_json(corpus_dir / 'circuits' / filename, spec_to_schema(make(n)))
    write_json(corpus_dir / 'circuits' / 'single_edge_input.json', spec_to_schema(single_edge_input()))

    # LP
    for name, make in {**NON_RIGID_LPS, **RESTRICTION_LIFTS}.items():
        write_json(corpus_dir / 'lps' / f"{name}.json", lp_to_schema(make()))
    print(f"Corpus written to {corpus_dir}")


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    export_corpus()
