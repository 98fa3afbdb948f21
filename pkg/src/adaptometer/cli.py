"""Command-line entry point: stats, analyze, jsd, generate, synth.

Every command reads an optional JSON config file; command-line flags win
over config values. One root seed drives all randomness and is recorded in
a provenance line/field of every output, so identical config plus seed
yields byte-identical artifacts. Exit codes: 0 success, 1 usage or config
error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import divergence, genconv, synth
from .glmm import backward_select, wald_report
from .glmm.logistic import PerfectSeparationError, SingularInformationError
from .output import write_csv, write_json
from .sampling import (
    SamplingConfig, SamplingError, build_frequency_table, center, filter_rules,
    build_samples,
)
from .treebank import TreeParseError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def setting(args, config: dict, key: str, default):
    """Flag wins, then config file, then the default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _load_corpus_arg(args, config) -> list[corpus_mod.Conversation]:
    path = setting(args, config, "corpus", None)
    if not path:
        raise ConfigError("no corpus path given (--corpus or config 'corpus')")
    if not os.path.exists(path):
        raise ConfigError(f"corpus path does not exist: {path}")
    fmt = setting(args, config, "format", "rules-jsonl")
    include_lexical = bool(setting(args, config, "include_lexical", False))
    return corpus_mod.load_corpus(path, format=fmt, include_lexical=include_lexical)


def _provenance(seed: int) -> str:
    return f"adaptometer seed={seed}"


def cmd_stats(args, config) -> int:
    conversations = _load_corpus_arg(args, config)
    seed = int(setting(args, config, "seed", 0))
    out_dir = Path(setting(args, config, "out_dir", "out"))
    stats = corpus_mod.corpus_stats(conversations)
    for name, (header, rows) in stats.tables().items():
        write_csv(out_dir / f"{name}.csv", header, rows, provenance=_provenance(seed))
    write_json(out_dir / "stats_summary.json", {
        "provenance": {"seed": seed},
        "n_conversations": stats.n_conversations,
        "n_rule_types": stats.n_rule_types,
        "n_rule_tokens": stats.n_rule_tokens,
    })
    print(f"stats: {stats.n_conversations} conversations -> {out_dir}")
    return EXIT_OK


def run_analysis(conversations, seed: int = 0, prime_frac: float = 0.49,
                 gap_frac: float = 0.02, all_rules: bool = False,
                 alpha: float = 0.05, exclude_same_persona_pairs: bool = True,
                 use_random_effects: bool = True, on_stage=None, **fit_params):
    """The full pipeline: split, count, filter, sample, center, select, fit.

    Returns (fit, centered_table, artifacts) where artifacts carries the
    intermediate reports keyed by name. ``on_stage`` is called with each
    stage name as it starts, so failures can be attributed.
    """
    stage = on_stage or (lambda name: None)
    stage("split")
    sections, split_report = corpus_mod.split_corpus(
        conversations, prime_frac=prime_frac, gap_frac=gap_frac)
    if not sections:
        raise SamplingError("no conversation survived the prime/target split")
    stage("frequency-table")
    freq = build_frequency_table(conversations)
    sampling_cfg = SamplingConfig(
        seed=seed,
        exclude_hapax=not all_rules,
        high_freq_exclusion_fraction=0.0 if all_rules else 0.003,
        exclude_same_persona_pairs=exclude_same_persona_pairs,
    )
    stage("filter-rules")
    eligible = filter_rules(freq, sampling_cfg)
    stage("sample")
    table, sample_report = build_samples(
        sections, conversations, freq, eligible, sampling_cfg)
    stage("center")
    centered, centering = center(table)
    stage("fit")
    fit = backward_select(centered, alpha=alpha,
                          use_random_effects=use_random_effects, **fit_params)
    artifacts = {
        "split_report": {
            "n_split": split_report.n_split,
            "excluded": [{"conv_id": c, "reason": r} for c, r in split_report.excluded],
        },
        "sample_report": {
            "n_units": sample_report.n_units,
            "n_rows": sample_report.n_rows,
            "skipped_empty_prime": [
                {"conv_id": c, "speaker": s}
                for c, s in sample_report.skipped_empty_prime
            ],
        },
        "centering": {
            "mean_ln_freq": centering.mean_ln_freq,
            "mean_ln_size": centering.mean_ln_size,
        },
        "frequency_table": freq,
        "eligible_rules": sorted(eligible),
    }
    return fit, centered, artifacts


def cmd_analyze(args, config) -> int:
    conversations = _load_corpus_arg(args, config)
    seed = int(setting(args, config, "seed", 0))
    out_dir = Path(setting(args, config, "out_dir", "out"))
    all_rules = bool(setting(args, config, "all_rules", False))
    alpha = float(setting(args, config, "alpha", 0.05))
    prime_frac = float(setting(args, config, "prime_frac", 0.49))
    gap_frac = float(setting(args, config, "gap_frac", 0.02))
    use_re = not bool(setting(args, config, "no_random_effects", False))

    stage_box = ["load"]
    try:
        fit, centered, artifacts = run_analysis(
            conversations, seed=seed, prime_frac=prime_frac, gap_frac=gap_frac,
            all_rules=all_rules, alpha=alpha, use_random_effects=use_re,
            on_stage=lambda name: stage_box.__setitem__(0, name),
        )
        stage_box[0] = "write"
        prov = _provenance(seed)
        centered.to_csv(out_dir / "samples.csv", provenance=prov)
        freq = artifacts.pop("frequency_table")
        write_csv(out_dir / "frequency_table.csv", ["rule", "count"],
                  sorted(freq.counts.items(), key=lambda kv: (-kv[1], kv[0])),
                  provenance=prov)
        eligible = artifacts.pop("eligible_rules")
        write_csv(out_dir / "eligible_rules.csv", ["rule"],
                  [(r,) for r in eligible], provenance=prov)
        artifacts["n_eligible_rules"] = len(eligible)
        payload, text = wald_report(fit)
        payload["provenance"] = {"seed": seed, "all_rules": all_rules, "alpha": alpha}
        write_json(out_dir / "fit_report.json", payload)
        from .output import atomic_write_text

        atomic_write_text(out_dir / "fit_report.txt", text + "\n")
        write_json(out_dir / "analysis_report.json",
                   {"provenance": {"seed": seed}, **artifacts})
    except Exception:
        print(f"analyze aborted at stage: {stage_box[0]}", file=sys.stderr)
        raise
    print(text)
    print(f"analyze: wrote samples.csv and fit_report.json to {out_dir}")
    return EXIT_OK


def cmd_jsd(args, config) -> int:
    conversations = _load_corpus_arg(args, config)
    seed = int(setting(args, config, "seed", 0))
    out_dir = Path(setting(args, config, "out_dir", "out"))
    mode = setting(args, config, "mode", "matrix")
    prov = _provenance(seed)
    if mode == "matrix":
        agents, matrix = divergence.pairwise_jsd_matrix(conversations)
        rows = [
            [agent] + [float(matrix[i, j]) for j in range(len(agents))]
            for i, agent in enumerate(agents)
        ]
        write_csv(out_dir / "jsd_matrix.csv", ["agent"] + agents, rows,
                  provenance=prov)
        print(f"jsd: {len(agents)}x{len(agents)} matrix -> {out_dir/'jsd_matrix.csv'}")
    elif mode == "trajectory":
        pair_setting = setting(args, config, "pair", None)
        if not pair_setting:
            raise ConfigError("trajectory mode needs --pair A,B")
        pair = tuple(str(pair_setting).split(","))
        if len(pair) != 2:
            raise ConfigError("--pair must name exactly two agents")
        split_words = int(setting(args, config, "split_words", 200))
        n_bootstrap = int(setting(args, config, "bootstrap", 100))
        report = divergence.bootstrap_trajectory(
            conversations, pair, n_bootstrap=n_bootstrap, seed=seed,
            split_words=split_words)
        write_csv(out_dir / "trajectory.csv", report.header(), report.rows,
                  provenance=prov)
        print(f"jsd: {len(report.rows)} splits -> {out_dir/'trajectory.csv'}")
    else:
        raise ConfigError(f"unknown jsd mode {mode!r}")
    return EXIT_OK


def cmd_generate(args, config) -> int:
    seed = int(setting(args, config, "seed", 0))
    out_dir = Path(setting(args, config, "out_dir", "out"))
    dry_run = bool(setting(args, config, "dry_run", False))
    gen_cfg = genconv.GenerationConfig(
        endpoint=setting(args, config, "endpoint",
                         genconv.GenerationConfig.endpoint),
        model=setting(args, config, "model", genconv.GenerationConfig.model),
        api_key_env=setting(args, config, "api_key_env",
                            genconv.GenerationConfig.api_key_env),
        topic=setting(args, config, "topic", genconv.DEFAULT_TOPIC),
        word_threshold=int(setting(args, config, "word_threshold", 800)),
        concurrency=int(setting(args, config, "threads", 1)),
    )
    if dry_run:
        rng = np.random.default_rng(seed)
        vocab = ["today", "sun", "walks", "coffee", "quiet", "morning", "rain",
                 "light", "plans", "rest", "music", "friends", "slow", "warm"]
        script = [
            " ".join(rng.choice(vocab, size=40).tolist()) for _ in range(64)
        ]
        transport = genconv.ScriptedTransport(script)
    else:
        api_key = os.environ.get(gen_cfg.api_key_env, "")
        if not api_key:
            raise ConfigError(
                f"environment variable {gen_cfg.api_key_env} is not set"
            )
        transport = genconv.HttpTransport(gen_cfg, api_key)

    persona_arg = setting(args, config, "personas", "all")
    if persona_arg == "all":
        persona_ids = sorted(genconv.PERSONAS)
    else:
        persona_ids = [int(x) for x in str(persona_arg).split(",")]
    personas = [genconv.PERSONAS[i] for i in persona_ids]

    pair_repeat = setting(args, config, "pair_repeat", None)
    if pair_repeat:
        a, b = (int(x) for x in str(pair_repeat).split(","))
        n_conv = int(setting(args, config, "n_conversations", 1))
        run = genconv.generate_repeated_pair(
            genconv.PERSONAS[a], genconv.PERSONAS[b], n_conv, gen_cfg, transport)
    else:
        run = genconv.generate_round_robin(personas, gen_cfg, transport)

    corpus_mod.write_corpus(run.conversations, out_dir / "transcripts_raw.jsonl")
    corpus_mod.write_corpus(run.analysis, out_dir / "transcripts_analysis.jsonl")
    report = run.exclusion_report()
    report["provenance"] = {"seed": seed, "dry_run": dry_run}
    write_json(out_dir / "exclusion_report.json", report)
    print(f"generate: {len(run.conversations)} conversations "
          f"({len(run.analysis)} for analysis) -> {out_dir}")
    return EXIT_OK


def cmd_synth(args, config) -> int:
    seed = int(setting(args, config, "seed", 0))
    out_dir = Path(setting(args, config, "out_dir", "out"))
    cfg = synth.SynthConfig(
        vocabulary_size=int(setting(args, config, "vocabulary_size", 50)),
        zipf_exponent=float(setting(args, config, "zipf_exponent", 1.1)),
        strength=float(setting(args, config, "strength", 0.0)),
        n_conversations=int(setting(args, config, "n_conversations", 100)),
        turns_per_conversation=int(setting(args, config, "turns", 10)),
        rules_per_turn=int(setting(args, config, "rules_per_turn", 8)),
        words_per_turn=int(setting(args, config, "words_per_turn", 20)),
        seed=seed,
    )
    corpus = synth.write_corpus_with_provenance(
        cfg, out_dir / "synth_corpus.jsonl", out_dir / "synth_config.json")
    print(f"synth: {len(corpus)} conversations -> {out_dir/'synth_corpus.jsonl'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptometer",
        description="Measure long-term syntactic adaptation in two-party dialogue",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="root seed for all randomness")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory")
    parser.add_argument("--threads", type=int, help="worker bound for generation")
    sub = parser.add_subparsers(dest="command", required=True)

    def corpus_flags(p):
        p.add_argument("--corpus", help="input corpus path (JSONL)")
        p.add_argument("--format", choices=corpus_mod.FORMATS, help="corpus format")
        p.add_argument("--include-lexical", dest="include_lexical",
                       action="store_const", const=True,
                       help="keep lexical (preterminal) rules when extracting")

    p_stats = sub.add_parser("stats", help="descriptive corpus tables")
    corpus_flags(p_stats)

    p_an = sub.add_parser("analyze", help="sampling plus mixed-model regression")
    corpus_flags(p_an)
    p_an.add_argument("--all-rules", dest="all_rules", action="store_const",
                      const=True, help="disable hapax/high-frequency filtering")
    p_an.add_argument("--alpha", type=float, help="backward selection threshold")
    p_an.add_argument("--prime-frac", dest="prime_frac", type=float)
    p_an.add_argument("--gap-frac", dest="gap_frac", type=float)
    p_an.add_argument("--no-random-effects", dest="no_random_effects",
                      action="store_const", const=True,
                      help="plain logistic fit instead of the mixed model")

    p_jsd = sub.add_parser("jsd", help="divergence matrix or trajectory")
    corpus_flags(p_jsd)
    p_jsd.add_argument("--mode", choices=["matrix", "trajectory"])
    p_jsd.add_argument("--pair", help="two agent ids, comma separated")
    p_jsd.add_argument("--split-words", dest="split_words", type=int)
    p_jsd.add_argument("--bootstrap", type=int, help="number of resamples")

    p_gen = sub.add_parser("generate", help="LLM-LLM conversation generation")
    p_gen.add_argument("--personas", help="'all' or comma-separated ids")
    p_gen.add_argument("--pair-repeat", dest="pair_repeat",
                       help="two persona ids; repeat this pair")
    p_gen.add_argument("--n-conversations", dest="n_conversations", type=int)
    p_gen.add_argument("--dry-run", dest="dry_run", action="store_const",
                       const=True, help="scripted transport, no network")
    p_gen.add_argument("--endpoint")
    p_gen.add_argument("--model")
    p_gen.add_argument("--topic")
    p_gen.add_argument("--word-threshold", dest="word_threshold", type=int)
    p_gen.add_argument("--api-key-env", dest="api_key_env")

    p_sy = sub.add_parser("synth", help="synthetic corpus with planted adaptation")
    p_sy.add_argument("--vocabulary-size", dest="vocabulary_size", type=int)
    p_sy.add_argument("--zipf-exponent", dest="zipf_exponent", type=float)
    p_sy.add_argument("--strength", type=float, help="adaptation strength (0 = null)")
    p_sy.add_argument("--n-conversations", dest="n_conversations", type=int)
    p_sy.add_argument("--turns", type=int)
    p_sy.add_argument("--rules-per-turn", dest="rules_per_turn", type=int)
    p_sy.add_argument("--words-per-turn", dest="words_per_turn", type=int)
    return parser


COMMANDS = {
    "stats": cmd_stats,
    "analyze": cmd_analyze,
    "jsd": cmd_jsd,
    "generate": cmd_generate,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except (ConfigError, genconv.TransportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (corpus_mod.SchemaError, corpus_mod.SplitTooShort, SamplingError,
            TreeParseError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (PerfectSeparationError, SingularInformationError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
