import pytest

import lrmt


def test_bleu_reference_values():
    refs = ["the cat sat on the mat", "a b c d"]
    assert lrmt.corpus_bleu(refs, refs).score == 100.0
    score = lrmt.corpus_bleu(["the cat sat on mat"], ["the cat sat on the mat"])
    assert score.score == pytest.approx(57.89, abs=0.01)
    assert score.sys_len == 5 and score.ref_len == 6
    assert lrmt.corpus_bleu([""], ["the cat"]).score == 0.0


def test_bpe_roundtrip_and_first_merge():
    model = lrmt.train_bpe(["ab ab ab abc"], 100)
    assert model.merges[0] == ("a", "b")
    assert not model.is_word_level
    for text in ["ab abc", "cab", "ba  c"]:
        assert model.decode(model.encode(text)) == " ".join(text.split())
    assert lrmt.train_bpe(["ab ab ab abc"], 100) == model


def test_bpe_vocab_too_small_raises():
    with pytest.raises(lrmt.LrmtError, match="VocabTooSmall"):
        lrmt.train_bpe(["abcdef"], 5)


def test_model_file_roundtrip(tmp_path):
    model = lrmt.train_word_model(["le chat", "le chien"])
    assert model.is_word_level
    path = tmp_path / "word.model"
    model.save(path)
    assert lrmt.load_model(path) == model


def test_filter_counts_duplicates_and_identical_sides():
    data = lrmt.toy_corpus(50, seed=3)
    sources = data["source"] + [data["source"][0], "12345 678"]
    targets = data["target"] + [data["target"][0], "12345 678"]
    kept, report = lrmt.filter_corpus(sources, targets, "fr", "wo")
    assert report["input_count"] == len(sources)
    assert report["identical_sides_removed"] == 1
    assert report["duplicate_removed"] >= 1
    assert report["retained"] == len(kept["ids"])


def test_stratified_split_sizes_and_disjointness():
    data = lrmt.toy_corpus(1000, seed=5)
    parts = lrmt.stratified_split(data["source"], data["target"], 100, 50, seed=1)
    sizes = {name: len(part["ids"]) for name, part in parts.items()}
    assert sizes == {"valid": 100, "test": 50, "train_pool": 850}
    all_ids = parts["valid"]["ids"] + parts["test"]["ids"] + parts["train_pool"]["ids"]
    assert sorted(all_ids) == list(range(1000))
    again = lrmt.stratified_split(data["source"], data["target"], 100, 50, seed=1)
    assert again == parts


def test_copy_corpus_sides_match():
    data = lrmt.copy_corpus(20, vocab=5, seed=2)
    assert data["source"] == data["target"]


def test_tiny_ablation_is_deterministic(tmp_path):
    data = lrmt.toy_corpus(300, seed=9)
    (tmp_path / "c.src").write_text("\n".join(data["source"]) + "\n", encoding="utf-8")
    (tmp_path / "c.tgt").write_text("\n".join(data["target"]) + "\n", encoding="utf-8")
    config = {
        "source": tmp_path / "c.src",
        "target": tmp_path / "c.tgt",
        "source_lang": "fr",
        "target_lang": "wo",
        "direction": "fr-wo",
        "splits_dir": tmp_path / "splits",
        "valid_size": 30,
        "test_size": 30,
        "sizes": "100,200",
        "bpe_vocab_size": 120,
        "embed_dim": 8,
        "hidden": 8,
        "max_steps": 10,
        "checkpoint_every": 5,
        "out_dir": tmp_path / "a",
    }
    with pytest.raises(lrmt.LrmtError, match="MissingSplits"):
        lrmt.run_ablation(config)
    lrmt.prepare_splits(config)
    tables, failed = lrmt.run_ablation(config)
    assert failed == 0
    assert [row[0] for row in tables[0]["rows"]] == [100, 200]
    assert "| Training size | No subword | With subword |" in tables[0]["markdown"]

    tables_again, _ = lrmt.run_ablation({**config, "out_dir": tmp_path / "b"})
    assert tables_again[0]["csv"] == tables[0]["csv"]
    assert lrmt.collect_results(config)[0]["csv"] == tables[0]["csv"]
    assert lrmt.config_fingerprint(config) == lrmt.config_fingerprint({**config, "out_dir": tmp_path / "b"})

    hyps = lrmt.translate(
        tmp_path / "a" / "seed_1" / "cells" / "200_subword" / "checkpoints" / "best.ckpt",
        lrmt.load_model(tmp_path / "a" / "seed_1" / "cells" / "200_subword" / "source.model"),
        lrmt.load_model(tmp_path / "a" / "seed_1" / "cells" / "200_subword" / "target.model"),
        ["je mange", ""],
        beam=2,
    )
    assert len(hyps) == 2 and hyps[1] == ""
