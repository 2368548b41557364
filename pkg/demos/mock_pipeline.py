"""Run the whole pipeline offline with the mock LLM backend and print the report.

    python3 demos/mock_pipeline.py [output-dir]

The mock backend answers from a hash of the prompt, anchored on the
surrogate estimate or the nearest known neighbour it finds there, so the
run is deterministic and needs no model server. The numbers say nothing
about real LLM quality; they exercise every stage and file format.
"""

import sys
import tempfile
from pathlib import Path

from solcot.cli import main

DATASET = Path(__file__).resolve().parents[1] / "data" / "esol.csv"


def run(*argv) -> None:
    code = main([str(a) for a in argv])
    if code:
        sys.exit(code)


def pipeline(out: Path) -> None:
    split, model = out / "split.json", out / "gp-model.json"
    run("ingest", "--dataset", DATASET, "--out", out)
    run("train", "--split", split, "--out", out)
    for mode in ("llm-cot", "ml-llm-cot"):
        run("build", "--mode", mode, "--split", split, "--model", model, "--backend", "mock", "--out", out)
    for targets in ("similar", "dissimilar"):
        run("predict", "--mode", "gp", "--split", split, "--model", model, "--targets", targets, "--out", out)
        for mode in ("llm-cot", "ml-llm-cot"):
            run("predict", "--mode", mode, "--split", split, "--model", model, "--corpus",
                out / f"corpus_{mode}.jsonl", "--targets", targets, "--backend", "mock", "--out", out)
    run("evaluate", "--split", split, "--predictions", *sorted(out.glob("predictions_*.csv")),
        "--corpus", out / "corpus_llm-cot.jsonl", out / "corpus_ml-llm-cot.jsonl", "--out", out / "report")


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="solcot-"))
    out.mkdir(parents=True, exist_ok=True)
    pipeline(out)
    print((out / "report" / "report.md").read_text())
    print(f"artifacts in {out}")
