"""Show how one molecule's corpus entries evolve under the ML-LLM-CoT loop.

    python3 demos/rethink_chain.py

A scripted predictor makes one bad guess before answering correctly, and
the GP is replaced by a deliberately biased stand-in on one molecule, so
the printout shows a GP attempt, its error analysis, a rejected
refinement and the accepted one.
"""

import re
import warnings
from pathlib import Path

import numpy as np

import solcot.cot.loops as loops
from solcot.cot import build_ml_llm_cot
from solcot.dataset import load_esol, select_splits
from solcot.llm import BackendConfig, LlmClient
from solcot.surrogate import Prediction, train_gp

DATASET = Path(__file__).resolve().parents[1] / "data" / "esol.csv"


def main() -> None:
    split = select_splits(load_esol(DATASET))
    seed = split.seed
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mols = loops.prepare(seed)
    model = train_gp(np.array([m.descriptors.as_array() for m in mols]), np.array([r.log_s for r in seed]))

    target = seed[12]
    truth = {r.id: r.log_s for r in seed}
    by_smiles = {r.smiles: r for r in seed}

    def biased_gp(mdl, x, molecule_id=None):
        y = truth[molecule_id]
        return Prediction(y - 2.0 if molecule_id == target.id else y, 0.6, "gp", molecule_id)

    def predictor(prompt: str) -> str:
        rec = by_smiles[re.search(r"^TARGET MOLECULE: .*\(SMILES (.*)\)$", prompt, re.M).group(1)]
        first_try = "- attempt 1:" not in prompt
        guess = rec.log_s - 1.5 if first_try else rec.log_s + 0.1
        return f"The GP looks too pessimistic for this ring system.\nPREDICTION: {guess:.2f}"

    def analyzer(prompt: str) -> str:
        return "The surrogate model underestimates solubility here; correct it upward by about one log unit."

    loops.gp_predict = biased_gp
    entries, stats = build_ml_llm_cot(
        model,
        seed,
        LlmClient(BackendConfig(kind="scripted"), script=predictor),
        LlmClient(BackendConfig(kind="scripted"), script=analyzer),
    )
    print(f"{target.name}: measured logS {target.log_s}")
    for e in entries:
        if e.molecule_id != target.id:
            continue
        print(f"  attempt {e.attempt_index} [{e.source}, {e.status}] value {e.parsed_value:.2f}, "
              f"deviation {e.deviation_pct:.1f}%")
        if e.error_analysis:
            print(f"    analysis ({e.annotation}): {e.error_analysis}")
    print(f"corpus stats: {stats}")


if __name__ == "__main__":
    main()
