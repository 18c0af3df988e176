"""Command-line interface: ingest, tokenizer-train, sbt, train, eval, index,
search, serve."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import checkpoint as ckpt_mod
from . import corpus as corpus_mod
from . import index as index_mod
from . import ranking, sbt, service, subword, training
from .models import MODEL_KINDS, ModelConfig

logger = logging.getLogger("codematch.cli")


def _add_ingest(sub):
    p = sub.add_parser("ingest", help="normalize JSON pair files into binary corpus files")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True, help="output directory")


def _add_tokenizer_train(sub):
    p = sub.add_parser("tokenizer-train", help="train a subword vocabulary")
    p.add_argument("--in", dest="corpus", required=True, help="binary corpus file")
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--channel", choices=("code", "text"), required=True,
                   help="code trains on snippets + their SBT strings; text on descriptions")
    p.add_argument("--seed", type=int, default=0)


def _add_sbt(sub):
    p = sub.add_parser("sbt", help="emit SBT strings for every snippet")
    p.add_argument("--in", dest="corpus", required=True)
    p.add_argument("--backend", choices=("embedded", "file"), default="embedded")
    p.add_argument("--trees", help="pre-parsed tree JSON (backend=file)")
    p.add_argument("--out", required=True)


def _add_train(sub):
    p = sub.add_parser("train", help="train a matching model")
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--config", required=True, help="TOML config file")
    p.add_argument("--out", required=True, help="checkpoint path")


def _add_eval(sub):
    p = sub.add_parser("eval", help="rank every test description against all snippets")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--test", required=True, help="binary corpus file")
    p.add_argument("--report", required=True, help="JSON report path")
    p.add_argument("--code-vocab", help="override the vocab path recorded at train time")
    p.add_argument("--text-vocab", help="override the vocab path recorded at train time")


def _add_index(sub):
    p = sub.add_parser("index", help="build a self-contained snippet index")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--code-vocab", help="override the vocab path recorded at train time")
    p.add_argument("--text-vocab", help="override the vocab path recorded at train time")


def _add_search(sub):
    p = sub.add_parser("search", help="query an index from the command line")
    p.add_argument("--index", required=True)
    p.add_argument("-q", "--query", required=True)
    p.add_argument("-k", type=int, default=10)


def _add_serve(sub):
    p = sub.add_parser("serve", help="serve an index over HTTP")
    p.add_argument("--index", required=True)
    p.add_argument("--bind", default="127.0.0.1:8080")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codematch",
                                     description="code–text matching models and search")
    sub = parser.add_subparsers(dest="command", required=True)
    for adder in (_add_ingest, _add_tokenizer_train, _add_sbt, _add_train,
                  _add_eval, _add_index, _add_search, _add_serve):
        adder(sub)
    return parser


def _corpus_texts(samples, channel: str) -> list[str]:
    if channel == "text":
        return [s.description for s in samples]
    texts = []
    for s in samples:
        texts.append(s.code)
        texts.append(sbt.sbt_string(s.code))
    return texts


def cmd_ingest(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for split, path in (("train", args.train), ("test", args.test)):
        samples = corpus_mod.load_corpus(path, split)
        out = out_dir / f"{split}.cmc1"
        corpus_mod.write_corpus(samples, out)
        print(f"{split}: {len(samples)} samples -> {out}")
    return 0


def cmd_tokenizer_train(args) -> int:
    samples = corpus_mod.read_corpus(args.corpus)
    texts = _corpus_texts(samples, args.channel)
    vocab = subword.train_unigram(texts, args.vocab_size, seed=args.seed)
    vocab.save(args.out)
    print(f"{args.channel} vocab: {vocab.size} pieces -> {args.out}")
    return 0


def cmd_sbt(args) -> int:
    samples = corpus_mod.read_corpus(args.corpus)
    if args.backend == "file":
        if not args.trees:
            raise ValueError("--backend file requires --trees")
        trees = sbt.load_tree_file(args.trees)
        records = [{"id": s.id,
                    "sbt": " ".join(sbt.sbt_serialize(sbt.tree_for_sample(trees, s.id)))}
                   for s in samples]
    else:
        records = [{"id": s.id, "sbt": sbt.sbt_string(s.code)} for s in samples]
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=1)
        fh.write("\n")
    print(f"{len(records)} SBT strings -> {args.out}")
    return 0


def _load_train_config(path, kind: str):
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    data = raw.get("data", {})
    for key in ("train", "code_vocab", "text_vocab"):
        if key not in data:
            raise ValueError(f"config [data] section must set '{key}'")
    code_vocab = subword.SubwordVocab.load(data["code_vocab"])
    text_vocab = subword.SubwordVocab.load(data["text_vocab"])
    dims = raw.get("dims", {})
    caps = raw.get("caps", {})
    model = ModelConfig(
        kind=kind,
        code_vocab_size=code_vocab.size,
        text_vocab_size=text_vocab.size,
        embed_dim=dims.get("embed", 128),
        hidden_dim=dims.get("hidden", 128),
        agg_hidden=dims.get("agg", 128),
        perspectives=dims.get("perspectives", 10),
        code_cap=caps.get("code", 200),
        ast_cap=caps.get("ast", 400),
        text_cap=caps.get("text", 60),
    )
    cfg = training.TrainConfig(model=model)
    section = raw.get("train", {})
    for key in ("epochs", "batch_size", "margin", "lr", "seed", "negatives",
                "resample_negatives", "pretrain_embeddings"):
        if key in section:
            setattr(cfg, key, section[key])
    if "alpha" in section:
        alpha = section["alpha"]
        cfg.alpha = None if alpha == 0 else alpha
    return cfg, data, code_vocab, text_vocab


def cmd_train(args) -> int:
    cfg, data, code_vocab, text_vocab = _load_train_config(args.config, args.model)
    samples = corpus_mod.read_corpus(data["train"])
    logger.info("training %s on %d samples for %d epochs", args.model, len(samples), cfg.epochs)
    store, _ = training.train(cfg, samples, code_vocab, text_vocab, log=logger.info)
    config_echo = cfg.to_dict()
    config_echo["paths"] = {"train": str(data["train"]),
                            "code_vocab": str(data["code_vocab"]),
                            "text_vocab": str(data["text_vocab"])}
    ckpt_mod.save_checkpoint(args.out, config_echo, store,
                             code_vocab.content_hash(), text_vocab.content_hash())
    print(f"checkpoint -> {args.out}")
    return 0


def _vocabs_for_checkpoint(ckpt, code_override, text_override):
    paths = ckpt.config.get("paths", {})
    code_path = code_override or paths.get("code_vocab")
    text_path = text_override or paths.get("text_vocab")
    if not code_path or not text_path:
        raise ValueError("vocab paths missing; pass --code-vocab/--text-vocab")
    code_vocab = subword.SubwordVocab.load(code_path)
    text_vocab = subword.SubwordVocab.load(text_path)
    ckpt_mod.verify_vocabs(ckpt, code_vocab, text_vocab)
    return code_vocab, text_vocab


def cmd_eval(args) -> int:
    ckpt = ckpt_mod.load_checkpoint(args.ckpt)
    code_vocab, text_vocab = _vocabs_for_checkpoint(ckpt, args.code_vocab, args.text_vocab)
    samples = corpus_mod.read_corpus(args.test)
    kind = ckpt.config["model"]
    cfg = training.TrainConfig.from_dict(ckpt.config).model
    start = time.monotonic()
    metrics = ranking.evaluate(kind, ckpt.params, cfg, samples,
                               code_vocab, text_vocab, log=logger.info)
    runtime = time.monotonic() - start
    report = ranking.make_report(kind, metrics, ckpt.config, runtime)
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    recalls = " ".join(f"R@{k}={v:.3f}" for k, v in sorted(metrics.recall_at.items()))
    print(f"{kind}: MRR={metrics.mrr:.4f} {recalls} ({len(samples)} queries)")
    return 0


def cmd_index(args) -> int:
    with open(args.ckpt, "rb") as fh:
        ckpt_blob = fh.read()
    ckpt = ckpt_mod.checkpoint_from_bytes(ckpt_blob, source=args.ckpt)
    code_vocab, text_vocab = _vocabs_for_checkpoint(ckpt, args.code_vocab, args.text_vocab)
    samples = corpus_mod.read_corpus(args.corpus)
    idx = index_mod.build_index(ckpt_blob, samples, code_vocab, text_vocab)
    index_mod.save_index(idx, args.out)
    print(f"index: {len(idx.entries)} snippets ({ckpt.config['model']}) -> {args.out}")
    return 0


def cmd_search(args) -> int:
    idx = index_mod.load_index(args.index)
    results = index_mod.search(idx, args.query, args.k)
    payload = {"v": 1, "query": args.query, "results": [
        {"id": r.snippet_id, "code": r.code, "score": r.score, "rank": r.rank}
        for r in results
    ]}
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_serve(args) -> int:
    idx = index_mod.load_index(args.index)
    service.serve(idx, args.bind)
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "tokenizer-train": cmd_tokenizer_train,
    "sbt": cmd_sbt,
    "train": cmd_train,
    "eval": cmd_eval,
    "index": cmd_index,
    "search": cmd_search,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    level = os.environ.get(service.LOG_ENV_VAR, "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, training.TrainingDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
