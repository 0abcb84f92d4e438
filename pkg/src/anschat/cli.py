"""Command-line front end.

Exit codes: 0 success, 1 unreadable/malformed input or config, 2 the data
does not meet an algorithm's precondition (e.g. an empty seed cluster).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import clustering, evaluation, ingestion, plots, synthgen
from .config import RunConfig, load_config
from .errors import ConfigError, EmptySeedCluster, InputError, PreconditionError
from .features import FEATURE_SETS
from .jsonio import atomic_write_text, write_json, write_jsonl

log = logging.getLogger("anschat")


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", type=Path, help="YAML run configuration")
    g.add_argument("--seed", type=int, help="RNG seed for CV folds, k-means and the generator")
    g.add_argument("--window", type=int, help="candidate window size w")
    g.add_argument("--max-iters", type=int, help="iteration cap n")
    g.add_argument("--variant", choices=["anschat", "regular", "kmeans"], default=None)
    g.add_argument("--features", choices=sorted(FEATURE_SETS), default=None)
    g.add_argument("--fallback", choices=["regular"], default=None,
                   help="variant to use when a seed cluster is empty")
    g.add_argument("--output", "-o", type=Path, help="output file (directory for gen)")
    g.add_argument("--verbose", "-v", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="anschat", description="Answer identification in group-chat feeds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", parents=[common], help="flag question messages")
    p.add_argument("feed", type=Path, nargs="?")

    p = sub.add_parser("cluster", parents=[common], help="assign candidate pairs to answer / non-answer clusters")
    p.add_argument("feed", type=Path, nargs="?")
    p.add_argument("--questions", type=Path, help="question tag file (default: run the detector)")
    p.add_argument("--meta", type=Path, help="run metadata path (default: <output stem>.meta.json)")
    p.add_argument("--dump-features", type=Path, help="write per-pair raw features as JSONL")
    p.add_argument("--figures", type=Path, help="directory for report figures")

    p = sub.add_parser("eval", parents=[common], help="score an assignment file against gold annotations")
    p.add_argument("assignments", type=Path)
    p.add_argument("gold", type=Path, nargs="?")
    p.add_argument("--per-question", type=Path, help="write a per-question CSV breakdown")
    p.add_argument("--figures", type=Path, help="directory for report figures")

    p = sub.add_parser("gen", parents=[common], help="generate a synthetic corpus with gold links")

    p = sub.add_parser("kappa", parents=[common], help="Fleiss kappa between taggers of a gold file")
    p.add_argument("gold", type=Path, nargs="?")
    p.add_argument("feed", type=Path, nargs="?")

    p = sub.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("feed", type=Path, nargs="?")
    p.add_argument("--questions", type=Path)
    p.add_argument("--gold", type=Path)
    p.add_argument("--figures", type=Path, help="directory for report figures")
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(seed=args.seed, window=args.window, max_iters=args.max_iters, feature_set=args.features)
    # keep the clustering ack rule in step with the top-level ack section
    return replace(cfg, cluster=replace(cfg.cluster, ack=cfg.ack))


def _path(args, cfg: RunConfig, name: str, required=True):
    value = getattr(args, name, None) or cfg.paths.get(name)
    if value is None and required:
        raise ConfigError(f"missing {name} path (pass it on the command line or under 'paths' in the config)")
    return Path(value) if value is not None else None


def _emit(text: str, output: Path | None):
    if output is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(output, text)


def _questions(args, cfg, feed):
    qpath = _path(args, cfg, "questions", required=False)
    if qpath is not None:
        return ingestion.load_question_tags(qpath, feed)
    return ingestion.detect_questions(feed, cfg.detector)


def cmd_detect(args, cfg: RunConfig) -> int:
    feed = ingestion.parse_feed(_path(args, cfg, "feed"))
    questions = ingestion.detect_questions(feed, cfg.detector)
    rows = ingestion.question_tag_rows(questions)
    _emit("".join(json.dumps(r) + "\n" for r in rows), args.output)
    print(f"{len(questions)} questions in {len(feed)} messages", file=sys.stderr)
    return 0


def _meta_path(args, output: Path) -> Path:
    if args.meta is not None:
        return args.meta
    return output.with_name(output.stem + ".meta.json")


def cmd_cluster(args, cfg: RunConfig) -> int:
    feed = ingestion.parse_feed(_path(args, cfg, "feed"))
    questions = _questions(args, cfg, feed)
    output = _path(args, cfg, "output", required=False) or Path("assignments.jsonl")
    variant = args.variant or "anschat"
    pairs = clustering.prepare_pairs(feed, questions, cfg.cluster, cfg.features)
    if not pairs:
        raise PreconditionError("no candidate pairs: no question has a later message")
    fallback_used = False
    try:
        state = clustering.run_variant(variant, pairs, cfg.cluster, cfg.bandwidth)
    except EmptySeedCluster as exc:
        if args.fallback is None:
            raise
        log.warning("%s; falling back to %s", exc, args.fallback)
        state = clustering.run_variant(args.fallback, pairs, cfg.cluster, cfg.bandwidth)
        fallback_used = True

    meta = state.metadata()
    meta.update({
        "requested_variant": variant,
        "fallback_used": fallback_used,
        "n_questions": len(questions),
        "question_source": questions.source,
        "config": cfg.to_dict(),
    })
    meta["config"]["paths"] = {}
    write_jsonl(output, state.assignment_rows())
    write_json(_meta_path(args, output), meta)
    if args.dump_features:
        write_jsonl(args.dump_features, (
            {"q": p.question_id, "a": p.candidate_id, "features": p.features.as_dict(), "raw": p.raw}
            for p in state.pairs
        ))
    if args.figures:
        plots.switch_history(meta, args.figures / "switch_history.png")
        plots.feature_distributions(state.pairs, args.figures / "feature_distributions.png")
    print(f"{meta['n_answers']} of {meta['n_pairs']} pairs assigned to A after {state.iteration} iteration(s)",
          file=sys.stderr)
    return 0


def cmd_eval(args, cfg: RunConfig) -> int:
    predicted, _ = evaluation.load_assignments(args.assignments)
    gold_ann = evaluation.load_gold(_path(args, cfg, "gold"))
    gold = evaluation.majority_vote(gold_ann) if gold_ann.tagger_count else set()
    report = evaluation.score(predicted, gold)
    out = report.to_dict()
    out["taggers"] = gold_ann.tagger_count
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    if args.per_question:
        atomic_write_text(args.per_question, evaluation.per_question_csv(evaluation.per_question(predicted, gold)))
    if args.figures:
        plots.scores(out, args.figures / "scores.png")
    return 0


def cmd_gen(args, cfg: RunConfig) -> int:
    outdir = _path(args, cfg, "output", required=False) or Path("corpus")
    feed, questions, gold = synthgen.generate(cfg.gen)
    write_jsonl(outdir / "feed.jsonl", ingestion.feed_rows(feed))
    write_jsonl(outdir / "questions.jsonl", ingestion.question_tag_rows(questions))
    write_jsonl(outdir / "gold.jsonl", evaluation.gold_rows(evaluation.GoldAnnotations.single(gold, "synthetic")))
    write_json(outdir / "stats.json", synthgen.corpus_stats(feed, questions, gold))
    print(f"wrote {len(feed)} messages, {len(questions)} questions, {len(gold)} gold pairs to {outdir}",
          file=sys.stderr)
    return 0


def cmd_kappa(args, cfg: RunConfig) -> int:
    feed = ingestion.parse_feed(_path(args, cfg, "feed"))
    gold = evaluation.load_gold(_path(args, cfg, "gold"), feed, cfg.cluster.window_w)
    if gold.tagger_count < 2:
        raise PreconditionError(f"Fleiss kappa needs at least two taggers, found {gold.tagger_count}")
    tagged = ingestion.QuestionSet(tuple(m.id for m in feed if m.id in gold.questions), "external-tags")
    universe = [p.key for p in clustering.build_pairs(feed, tagged, cfg.cluster)]
    value = evaluation.fleiss_kappa(gold, universe)
    _emit(f"{value:.6f}\n", args.output)
    return 0


def cmd_stats(args, cfg: RunConfig) -> int:
    feed = ingestion.parse_feed(_path(args, cfg, "feed"))
    questions = _questions(args, cfg, feed)
    gpath = _path(args, cfg, "gold", required=False)
    gold = evaluation.majority_vote(evaluation.load_gold(gpath, feed)) if gpath else set()
    stats = synthgen.corpus_stats(feed, questions, gold)
    _emit(json.dumps(stats, indent=2) + "\n", args.output)
    if args.figures:
        plots.user_activity(feed, args.figures / "user_activity.png")
    return 0


COMMANDS = {
    "detect": cmd_detect,
    "cluster": cmd_cluster,
    "eval": cmd_eval,
    "gen": cmd_gen,
    "kappa": cmd_kappa,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except InputError as exc:
        print(f"anschat {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except PreconditionError as exc:
        print(f"anschat {args.command}: precondition failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
