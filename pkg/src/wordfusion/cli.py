"""Command-line front end: build, eval, neighbors, export3d.

Exit codes: 0 success, 1 usage or config problems, 2 malformed data,
3 network or filesystem failures. Flag values override the environment
(WORDFUSION_CACHE_DIR) which overrides the config file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import string
import sys
from pathlib import Path

from . import __version__
from . import conceptnet, evaluation, pca
from .embedding_store import EmbeddingTable, format_float, load_text
from .errors import BuildStageError, ConfigError, FetchError, FormatError
from .pipeline import PipelineConfig, read_word_list, run_build

CACHE_DIR_ENV = "WORDFUSION_CACHE_DIR"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_table(path: str) -> EmbeddingTable:
    with open(path, encoding="utf-8") as handle:
        return load_text(handle)


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    """Config file first, then environment, then flags on top."""
    if args.config:
        cfg = PipelineConfig.from_file(args.config)
    else:
        cfg = PipelineConfig()
    env_cache = os.environ.get(CACHE_DIR_ENV)
    if env_cache:
        cfg.cache_dir = env_cache
    overrides = {
        "embeddings": args.embeddings,
        "output": args.out,
        "conceptnet_dump": args.conceptnet_dump,
        "conceptnet_api": args.conceptnet_api,
        "cache_dir": args.cache_dir,
        "neighbor_cap": args.neighbor_cap,
        "som_iterations": args.som_iterations,
        "som_learning_rate": args.som_lr,
        "som_k_neighbors": args.som_k,
        "grid_rows": args.grid_rows,
        "pca_dim": args.pca_dim,
        "workers": args.workers,
        "vocabulary": args.vocabulary,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    if cfg.conceptnet_dump and cfg.conceptnet_api and args.conceptnet_dump and not args.conceptnet_api:
        cfg.conceptnet_api = None  # a dump flag replaces the config's api source
    if cfg.conceptnet_dump and cfg.conceptnet_api and args.conceptnet_api and not args.conceptnet_dump:
        cfg.conceptnet_dump = None
    return cfg


def cmd_build(args: argparse.Namespace) -> int:
    manifest = run_build(_build_config(args))
    counts = manifest.counts
    print(f"built {counts['fused_words']} vectors ({counts['excluded_words']} excluded, "
          f"{counts['oov_words']} without pretrained vectors)")
    print(f"output digest {manifest.output_digest}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    table = _load_table(args.embeddings)
    with open(args.simlex, encoding="utf-8") as handle:
        pairs = evaluation.parse_simlex(handle)
    report = evaluation.evaluate({w: table.lookup(w) for w in table.words}, pairs)
    print(report.rho_text())
    if args.out:
        payload = dataclasses.asdict(report)
        payload["missing_words"] = list(payload["missing_words"])
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_neighbors(args: argparse.Namespace) -> int:
    cache_dir = args.cache_dir or os.environ.get(CACHE_DIR_ENV)
    dump = args.conceptnet_dump
    api = args.conceptnet_api
    cap = args.neighbor_cap if args.neighbor_cap is not None else conceptnet.DEFAULT_NEIGHBOR_CAP
    if args.config:
        cfg = PipelineConfig.from_file(args.config)
        dump = dump or cfg.conceptnet_dump
        api = api or cfg.conceptnet_api
        cache_dir = cache_dir or cfg.cache_dir
        if args.neighbor_cap is None:
            cap = cfg.neighbor_cap
    if bool(dump) == bool(api):
        raise ConfigError("exactly one of --conceptnet-dump / --conceptnet-api is required")
    if dump:
        term = conceptnet.normalize_term(args.word)
        with open(dump, encoding="utf-8") as handle:
            index = conceptnet.build_term_index(conceptnet.parse_dump(handle))
        ns = conceptnet.neighbors(term, index.get(term, ()), cap=cap)
    else:
        if not cache_dir:
            raise ConfigError("--cache-dir (or WORDFUSION_CACHE_DIR) is required with --conceptnet-api")
        ns = conceptnet.fetch_neighbors_http(args.word, cache_dir=cache_dir, endpoint=api, cap=cap)
    for nb in ns.neighbors:
        print(f"{nb.term}\t{nb.relation}\t{format_float(nb.weight)}")
    return 0


def _tokens_from_text(text: str) -> list[str]:
    """Split a comma- or whitespace-separated word list, shedding edge punctuation."""
    tokens = []
    for chunk in text.replace(",", " ").split():
        token = chunk.strip(string.punctuation)
        if token:
            tokens.append(token)
    return tokens


def _resolve_words(tokens: list[str], table: EmbeddingTable) -> tuple[list[str], list[str]]:
    """Map tokens to table words (exact, then lowercase), deduplicated in order."""
    resolved: list[str] = []
    missing: list[str] = []
    seen: set[str] = set()
    for token in tokens:
        word = token if token in table else token.lower()
        if word not in table:
            missing.append(token)
            continue
        if word not in seen:
            seen.add(word)
            resolved.append(word)
    return resolved, missing


def cmd_export3d(args: argparse.Namespace) -> int:
    table = _load_table(args.embeddings)
    if Path(args.words).is_file():
        tokens = read_word_list(args.words)
    else:
        tokens = _tokens_from_text(args.words)
    if not tokens:
        raise ConfigError("--words named no words")
    resolved, missing = _resolve_words(tokens, table)
    if missing:
        print(f"skipping {len(missing)} words with no vector: {', '.join(missing)}", file=sys.stderr)
    if len(resolved) < 2:
        raise ValueError(f"need at least 2 embeddable words to project, got {len(resolved)}")
    coords = pca.project_embeddings({w: table.lookup(w) for w in resolved}, 3)
    lines = ["word,x,y,z"]
    lines += [f"{w},{format_float(c[0])},{format_float(c[1])},{format_float(c[2])}" for w, c in coords.items()]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _add_source_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--conceptnet-dump", help="path to a ConceptNet assertions TSV dump")
    sub.add_argument("--conceptnet-api", help="ConceptNet API endpoint URL")
    sub.add_argument("--cache-dir", help="directory for cached API responses")
    sub.add_argument("--neighbor-cap", type=int, help="max related words per term")


def build_parser() -> _Parser:
    parser = _Parser(prog="wordfusion", description="Fuse word vectors with knowledge-graph neighbors.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_build = subs.add_parser("build", help="run the full pipeline and write fused vectors")
    _add_source_flags(p_build)
    p_build.add_argument("--embeddings", help="pretrained vectors in word2vec text format")
    p_build.add_argument("--out", help="output path for the fused vectors")
    p_build.add_argument("--vocabulary", help="word list path, or 'all-embeddable-conceptnet-terms'")
    p_build.add_argument("--som-iterations", type=int)
    p_build.add_argument("--som-lr", type=float)
    p_build.add_argument("--som-k", type=int)
    p_build.add_argument("--grid-rows", type=int)
    p_build.add_argument("--pca-dim", type=int)
    p_build.add_argument("--workers", type=int)
    p_build.set_defaults(func=cmd_build)

    p_eval = subs.add_parser("eval", help="score vectors against a similarity benchmark file")
    p_eval.add_argument("--embeddings", required=True)
    p_eval.add_argument("--out", help="also write the report as JSON here")
    p_eval.add_argument("simlex", help="benchmark TSV (word1, word2, POS, score)")
    p_eval.set_defaults(func=cmd_eval)

    p_nb = subs.add_parser("neighbors", help="list a word's related terms")
    _add_source_flags(p_nb)
    p_nb.add_argument("word")
    p_nb.set_defaults(func=cmd_neighbors)

    p_exp = subs.add_parser("export3d", help="project selected words to 3-D CSV")
    p_exp.add_argument("--embeddings", required=True)
    p_exp.add_argument("--words", required=True, help="word-list file, or comma/space separated words")
    p_exp.add_argument("--out", help="CSV output path (default: stdout)")
    p_exp.set_defaults(func=cmd_export3d)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except BuildStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc.cause)
    except (ConfigError, FormatError, FetchError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)


def _exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return 1
    if isinstance(exc, FetchError):
        return 3
    if isinstance(exc, (FormatError, ValueError)):
        return 2
    if isinstance(exc, OSError):
        return 3
    return 2


if __name__ == "__main__":
    sys.exit(main())
