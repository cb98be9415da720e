"""Subword-vs-word NMT ablations for low-resource language pairs."""

from ._lrmt import (
    BleuScore,
    BpeModel,
    LrmtError,
    collect_results,
    config_fingerprint,
    copy_corpus,
    corpus_bleu,
    filter_corpus,
    load_model,
    normalize_text,
    prepare_splits,
    run_ablation,
    stratified_split,
    toy_corpus,
    train_bpe,
    train_word_model,
    translate,
)

__all__ = [
    "BleuScore",
    "BpeModel",
    "LrmtError",
    "collect_results",
    "config_fingerprint",
    "copy_corpus",
    "corpus_bleu",
    "filter_corpus",
    "load_model",
    "normalize_text",
    "prepare_splits",
    "run_ablation",
    "stratified_split",
    "toy_corpus",
    "train_bpe",
    "train_word_model",
    "translate",
]
