import warnings
from pathlib import Path

import numpy as np
import pytest

from solcot.cli import main
from solcot.cot import prepare
from solcot.dataset import load_esol, select_splits
from solcot.surrogate import train_gp

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data" / "esol.csv"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

# oracle generators import the reference toolkit and are run by hand
collect_ignore = ["oracles"]

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def esol_records():
    return load_esol(DATA)


@pytest.fixture(scope="session")
def esol_split(esol_records):
    return select_splits(esol_records)


@pytest.fixture(scope="session")
def seed_xy(esol_split):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mols = prepare(esol_split.seed)
    X = np.array([m.descriptors.as_array() for m in mols])
    y = np.array([r.log_s for r in esol_split.seed])
    return X, y


@pytest.fixture(scope="session")
def seed_gp(seed_xy):
    X, y = seed_xy
    return train_gp(X, y, restarts=8, seed=0)


def run(*argv) -> None:
    assert main([str(a) for a in argv]) == 0, argv


def full_mock_pipeline(out: Path) -> Path:
    """ingest, train, build, predict and evaluate with the mock backend, all under ``out``."""
    split, model = out / "split.json", out / "gp-model.json"
    run("ingest", "--dataset", DATA, "--out", out)
    run("train", "--split", split, "--out", out)
    for mode in ("llm-cot", "ml-llm-cot"):
        run("build", "--mode", mode, "--split", split, "--model", model, "--backend", "mock", "--out", out)
    for targets in ("similar", "dissimilar"):
        run("predict", "--mode", "gp", "--split", split, "--model", model, "--targets", targets, "--out", out)
        run("predict", "--mode", "llm-cot", "--split", split, "--corpus", out / "corpus_llm-cot.jsonl",
            "--targets", targets, "--backend", "mock", "--out", out)
        run("predict", "--mode", "ml-llm-cot", "--split", split, "--model", model,
            "--corpus", out / "corpus_ml-llm-cot.jsonl", "--targets", targets, "--backend", "mock", "--out", out)
    run("evaluate", "--split", split, "--predictions", *sorted(out.glob("predictions_*.csv")),
        "--corpus", out / "corpus_llm-cot.jsonl", out / "corpus_ml-llm-cot.jsonl", "--out", out / "report")
    return out


@pytest.fixture(scope="session")
def two_runs(tmp_path_factory):
    """Two independent full mock-backend pipeline runs."""
    return [full_mock_pipeline(tmp_path_factory.mktemp(f"run{k}")) for k in range(2)]


@pytest.fixture
def acceptance_line(request):
    """Record the one-line verdict for an acceptance criterion, shown in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, ok: bool, detail: str) -> None:
        lines[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(lines[number])

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
