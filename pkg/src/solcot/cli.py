"""Command-line entry point: one subcommand per pipeline stage, handing off through files.

::

    solcot ingest   --dataset data/esol.csv --out run/
    solcot train    --split run/split.json --out run/
    solcot build    --mode ml-llm-cot --split run/split.json --model run/gp-model.json --out run/
    solcot predict  --mode ml-llm-cot --split run/split.json --model run/gp-model.json \\
                    --corpus run/corpus_ml-llm-cot.jsonl --targets dissimilar --out run/
    solcot evaluate --split run/split.json --predictions run/predictions_*.csv \\
                    --corpus run/corpus_*.jsonl --out run/report/

Every stage records its resolved settings under its own key in
``<out>/run-config.json``. Failures print a single line of the form
``error: stage=<stage> type=<ExceptionClass> message=<text>`` and exit
with status 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .chem import DESCRIPTOR_NAMES
from .cot import (
    CorpusHeader,
    CotConfig,
    build_llm_cot,
    build_ml_llm_cot,
    compute_stats,
    predict_unknown,
    prepare,
    read_corpus,
    write_corpus,
)
from .dataset import DatasetSplit, load_esol, load_split, save_split, select_splits
from .llm import BackendConfig, ExchangeLog, LlmClient, resolve_base_url
from .report import IdMismatch, emit_report, evaluate, read_predictions, write_predictions
from .surrogate import GpModel, gp_predict, leave_one_out, train_gp

log = logging.getLogger("solcot")

MODES = ("llm-cot", "ml-llm-cot")
MODEL_LABELS = {"gp": "Gaussian", "llm-cot": "LLM-CoT", "ml-llm-cot": "ML-LLM-CoT"}
DEFAULT_PREDICTOR = "deepseek-r1:14b"
DEFAULT_ANALYZER = "qwen2:7b"


# ------------------------------------------------------------------ helpers


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _record_config(out: Path, stage: str, settings: dict) -> None:
    """Merge this stage's settings into ``run-config.json``."""
    path = out / "run-config.json"
    doc = json.loads(path.read_text(encoding="utf-8")) if path.is_file() else {}
    doc["solcot_version"] = __version__
    doc[stage] = settings
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _seed_selector(text: str):
    if text in ("first30", "first-30"):
        return "first-30"
    if text.startswith("@"):
        path = Path(text[1:])
        if not path.is_file():
            raise FileNotFoundError(f"seed id file not found: {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    raise ValueError(f"--seeds must be 'first30' or '@ids.txt', got {text!r}")


def _cot_config(args) -> CotConfig:
    return CotConfig(
        rethink_threshold_pct=args.rethink_threshold,
        refine_threshold_pct=args.refine_threshold,
        max_rethinks_per_molecule=args.max_rethinks,
        basis_size=args.basis_size,
        uncertainty_gate_std=args.uncertainty_gate,
    )


def _backend(args, model_name: str) -> BackendConfig:
    return BackendConfig(
        kind=args.backend,
        base_url=resolve_base_url(args.backend_url),
        model_name=model_name,
        temperature=args.temperature,
        seed=args.seed,
        timeout=args.timeout,
        max_retries=args.max_retries,
    )


def _descriptor_matrix(split: DatasetSplit) -> tuple[np.ndarray, np.ndarray]:
    mols = prepare(split.seed)
    X = np.array([m.descriptors.as_array() for m in mols])
    y = np.array([r.log_s for r in split.seed])
    return X, y


def _targets(split: DatasetSplit, which: str):
    if which in ("similar", "dissimilar", "seed"):
        return which, split.part(which)
    path = Path(which)
    return path.stem, load_esol(path)


# ------------------------------------------------------------------ stages


def cmd_ingest(args) -> None:
    out = _out_dir(args)
    records = load_esol(args.dataset)
    split = select_splits(records, seed_selector=_seed_selector(args.seeds), similarity=args.similarity)
    save_split(split, out / "split.json")
    _record_config(out, "ingest", {
        "dataset": str(args.dataset),
        "records": len(records),
        "seeds": args.seeds,
        "split": split.config,
        "split_checksum": split.checksum(),
    })
    print(out / "split.json")


def cmd_train(args) -> None:
    out = _out_dir(args)
    split = load_split(args.split)
    X, y = _descriptor_matrix(split)
    model = train_gp(X, y, restarts=args.restarts, seed=args.seed, feature_names=DESCRIPTOR_NAMES)
    model.check_invariants()
    means, _ = leave_one_out(X, y, model)
    rmse = float(np.sqrt(np.mean((means - y) ** 2)))
    log.info("leave-one-out RMSE on %d seeds: %.3f", len(y), rmse)
    model.save(out / "gp-model.json")
    _record_config(out, "train", {
        "split": str(args.split),
        "split_checksum": split.checksum(),
        "seed": args.seed,
        "restarts": args.restarts,
        "signal_variance": model.signal_variance,
        "lengthscale": model.lengthscale,
        "noise_variance": model.noise_variance,
        "final_lml": model.optimization["final_lml"],
        "loo_rmse": rmse,
    })
    print(out / "gp-model.json")


def cmd_build(args) -> None:
    out = _out_dir(args)
    split = load_split(args.split)
    cfg = _cot_config(args)
    exchanges = ExchangeLog(out / f"exchanges_{args.mode}.jsonl")
    if exchanges.path.exists():
        exchanges.path.unlink()  # a rebuild replaces the previous transcript
    pred_cfg = _backend(args, args.predictor_model)
    an_cfg = _backend(args, args.analyzer_model)
    predictor = LlmClient(pred_cfg, exchange_log=exchanges, role="predictor")
    analyzer = LlmClient(an_cfg, exchange_log=exchanges, role="analyzer")
    if args.mode == "llm-cot":
        entries, stats = build_llm_cot(split.seed, predictor, analyzer, cfg)
    else:
        if not args.model:
            raise ValueError("--model is required for --mode ml-llm-cot")
        entries, stats = build_ml_llm_cot(GpModel.load(args.model), split.seed, predictor, analyzer, cfg)
    header = CorpusHeader(
        mode=args.mode,
        config=cfg.to_dict(),
        split_checksum=split.checksum(),
        backends={"predictor": pred_cfg.snapshot(), "analyzer": an_cfg.snapshot()},
    )
    path = out / f"corpus_{args.mode}.jsonl"
    write_corpus(path, header, entries)
    _record_config(out, f"build_{args.mode}", {
        "split": str(args.split),
        "model": str(args.model) if args.model else None,
        "cot_config": cfg.to_dict(),
        "backends": header.backends,
        "stats": {"points_requiring_rethink": stats.points_requiring_rethink, "total_rethinks": stats.total_rethinks},
        "llm_calls": {"predictor": predictor.calls, "analyzer": analyzer.calls},
    })
    print(f"{path} points_requiring_rethink={stats.points_requiring_rethink} total_rethinks={stats.total_rethinks}")


def cmd_predict(args) -> None:
    out = _out_dir(args)
    split = load_split(args.split)
    target_name, targets = _targets(split, args.targets)
    cfg = _cot_config(args)
    model = GpModel.load(args.model) if args.model else None
    settings = {"split": str(args.split), "targets": args.targets, "cot_config": cfg.to_dict()}
    if args.mode == "gp":
        if model is None:
            raise ValueError("--model is required for --mode gp")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            preds = [gp_predict(model, m.descriptors, molecule_id=m.record.id) for m in prepare(targets)]
    else:
        if not args.corpus:
            raise ValueError(f"--corpus is required for --mode {args.mode}")
        header, entries = read_corpus(args.corpus)
        if header.mode != args.mode:
            raise ValueError(f"corpus {args.corpus} was built in mode {header.mode!r}, not {args.mode!r}")
        exchanges = ExchangeLog(out / f"exchanges_predict_{args.mode}_{target_name}.jsonl")
        if exchanges.path.exists():
            exchanges.path.unlink()
        pred_cfg = _backend(args, args.predictor_model)
        predictor = LlmClient(pred_cfg, exchange_log=exchanges, role="predictor")
        preds = predict_unknown(entries, split.seed, targets, predictor, cfg, model=model, mode=args.mode)
        settings.update(corpus=str(args.corpus), backend=pred_cfg.snapshot(), llm_calls=predictor.calls)
    path = out / f"predictions_{args.mode}_{target_name}.csv"
    write_predictions(preds, path)
    _record_config(out, f"predict_{args.mode}_{target_name}", settings)
    print(path)


_PRED_NAME = re.compile(r"predictions_(gp|llm-cot|ml-llm-cot)_(.+)\.csv$")


def cmd_evaluate(args) -> None:
    out = _out_dir(args)
    split = load_split(args.split)
    actual = {r.id: r for part in ("seed", "similar", "dissimilar") for r in split.part(part)}
    for extra in args.actuals or ():
        actual.update({r.id: r for r in load_esol(extra)})
    summaries = []
    for p in args.predictions:
        m = _PRED_NAME.search(Path(p).name)
        if not m:
            raise ValueError(f"cannot tell mode and split from file name {p!r} (expected predictions_<mode>_<split>.csv)")
        mode, split_name = m.groups()
        preds = read_predictions(p)
        missing = [q.molecule_id for q in preds if q.molecule_id not in actual]
        if missing:
            raise IdMismatch(f"{p}: no measured value for {missing}")
        summaries.append(evaluate(preds, [actual[q.molecule_id] for q in preds], MODEL_LABELS[mode], split_name))
    split_order = {"dissimilar": 0, "similar": 1}
    model_order = {label: k for k, label in enumerate(MODEL_LABELS.values())}
    summaries.sort(key=lambda s: (split_order.get(s.split, 2), s.split, model_order[s.label]))
    stats = []
    for c in args.corpus or ():
        header, entries = read_corpus(c)
        stats.append((MODEL_LABELS[header.mode], compute_stats(entries)))
    stats.sort(key=lambda t: model_order[t[0]])
    written = emit_report(summaries, stats, out)
    _record_config(out, "evaluate", {
        "split": str(args.split),
        "predictions": [str(p) for p in args.predictions],
        "corpus": [str(c) for c in args.corpus or ()],
    })
    for path in written:
        print(path)


# ------------------------------------------------------------------ parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory (created if missing)")
    p.add_argument("--seed", type=int, default=0, help="global seed for the GP optimizer and LLM sampling (default 0)")
    p.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))


def _add_backend(p: argparse.ArgumentParser, analyzer: bool) -> None:
    g = p.add_argument_group("LLM backend")
    g.add_argument("--backend", choices=("ollama", "mock"), default="ollama",
                   help="ollama: HTTP generate endpoint; mock: deterministic offline stand-in (default ollama)")
    g.add_argument("--backend-url", default=None,
                   help="base URL; defaults to $SOLCOT_BACKEND_URL, then $OLLAMA_HOST, then http://localhost:11434")
    g.add_argument("--predictor-model", default=DEFAULT_PREDICTOR, help=f"predictor model (default {DEFAULT_PREDICTOR})")
    if analyzer:
        g.add_argument("--analyzer-model", default=DEFAULT_ANALYZER, help=f"analyzer model (default {DEFAULT_ANALYZER})")
    g.add_argument("--temperature", type=float, default=0.0, help="sampling temperature (default 0)")
    g.add_argument("--timeout", type=float, default=300.0, help="seconds per request (default 300)")
    g.add_argument("--max-retries", type=int, default=3, help="retries on transport errors (default 3)")


def _add_cot(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("loop settings")
    g.add_argument("--rethink-threshold", type=float, default=100.0, help="LLM-CoT deviation gate in percent (default 100)")
    g.add_argument("--refine-threshold", type=float, default=30.0, help="ML-LLM-CoT deviation gate in percent (default 30)")
    g.add_argument("--max-rethinks", type=int, default=25, help="attempt cap per molecule (default 25)")
    g.add_argument("--basis-size", type=int, default=10, help="seed molecules used only as prompt examples (default 10)")
    g.add_argument("--uncertainty-gate", type=float, default=None,
                   help="GP std above which inference asks the LLM (default: half the GP signal std)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solcot", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"solcot {__version__}")
    sub = parser.add_subparsers(dest="stage", required=True, metavar="STAGE")

    p = sub.add_parser("ingest", help="load the dataset and select the seed/similar/dissimilar split")
    p.add_argument("--dataset", required=True, help="ESOL-style CSV file")
    p.add_argument("--seeds", default="first30", help="'first30' or '@ids.txt' with one compound id per line")
    p.add_argument("--similarity", choices=("max", "mean"), default="max", help="aggregation over seeds (default max)")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="fit the GP surrogate on the seed molecules")
    p.add_argument("--split", required=True, help="split manifest written by ingest")
    p.add_argument("--restarts", type=int, default=8, help="random optimizer restarts (default 8)")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("build", help="build a chain-of-thought corpus over the seed molecules")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--split", required=True, help="split manifest written by ingest")
    p.add_argument("--model", default=None, help="GP model written by train (ml-llm-cot only)")
    _add_backend(p, analyzer=True)
    _add_cot(p)
    _add_common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("predict", help="predict target molecules with a corpus and/or the GP")
    p.add_argument("--mode", required=True, choices=("gp", *MODES))
    p.add_argument("--split", required=True, help="split manifest written by ingest")
    p.add_argument("--targets", default="dissimilar", help="'similar', 'dissimilar' or an ESOL-style CSV path")
    p.add_argument("--corpus", default=None, help="corpus written by build (llm modes)")
    p.add_argument("--model", default=None, help="GP model written by train (gp and ml-llm-cot modes)")
    _add_backend(p, analyzer=False)
    _add_cot(p)
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions and write the report tables")
    p.add_argument("--split", required=True, help="split manifest written by ingest")
    p.add_argument("--predictions", required=True, nargs="+", help="predictions_<mode>_<split>.csv files")
    p.add_argument("--corpus", nargs="*", default=[], help="corpus files for the rethink table")
    p.add_argument("--actuals", nargs="*", default=[], help="extra ESOL-style CSVs with measured values")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - every failure becomes one parseable line
        message = " ".join(str(exc).split()) or repr(exc)
        print(f"error: stage={args.stage} type={type(exc).__name__} message={message}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
