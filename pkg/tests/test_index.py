"""Snippet index: self-contained persistence, search ordering, rebuild purity."""

import numpy as np
import pytest

from codematch.checkpoint import CheckpointError, checkpoint_bytes
from codematch.index import (
    EmptyQueryError,
    IndexError_,
    SnippetIndex,
    build_index,
    index_bytes,
    load_index,
    save_index,
    search,
)
from codematch.models import init_params
from codematch.ranking import rank_from_scores
from codematch.training import TrainConfig
from conftest import tiny_config


@pytest.fixture(scope="module")
def mp_index(test_samples, code_vocab, text_vocab):
    """Matching-model index (untrained params; exercises the per-pair route)."""
    cfg = TrainConfig(model=tiny_config("mp", code_vocab.size, text_vocab.size))
    store = init_params(cfg.model, seed=0)
    blob = checkpoint_bytes(cfg.to_dict(), store, code_vocab.content_hash(),
                            text_vocab.content_hash())
    return build_index(blob, test_samples[:6], code_vocab, text_vocab)


# ---------------------------------------------------------------------------
# Building
# ---------------------------------------------------------------------------

def test_build_entries_and_vectors(ct_index, test_samples):
    assert [e.id for e in ct_index.entries] == [s.id for s in test_samples]
    assert [e.code for e in ct_index.entries] == [s.code for s in test_samples]
    assert ct_index.kind == "ct"
    assert ct_index.vectors.shape == (len(test_samples), 2 * 6)
    assert ct_index.vectors.dtype == np.float64


def test_rebuild_is_byte_identical(ct_ckpt_blob, test_samples, code_vocab, text_vocab):
    a = build_index(ct_ckpt_blob, test_samples, code_vocab, text_vocab)
    b = build_index(ct_ckpt_blob, test_samples, code_vocab, text_vocab)
    assert index_bytes(a) == index_bytes(b)


def test_build_rejects_wrong_vocab(ct_ckpt_blob, test_samples, code_vocab, text_vocab):
    with pytest.raises(CheckpointError, match="vocab"):
        build_index(ct_ckpt_blob, test_samples, text_vocab, code_vocab)


def test_vector_model_requires_vectors(ct_index):
    with pytest.raises(IndexError_, match="missing code vectors"):
        SnippetIndex(ct_index.ckpt_blob, ct_index.code_vocab, ct_index.text_vocab,
                     ct_index.entries, vectors=None)


def test_matching_model_has_no_vectors(mp_index):
    assert mp_index.vectors is None
    assert mp_index.kind == "mp"


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

def test_search_ordering_contract(ct_index):
    results = search(ct_index, "convert a list into a string", k=10)
    assert len(results) == 10
    assert [r.rank for r in results] == list(range(1, 11))
    for prev, cur in zip(results, results[1:]):
        assert prev.score > cur.score or (
            prev.score == cur.score and prev.snippet_id < cur.snippet_id)


def test_search_k_clamps_to_corpus(ct_index, test_samples):
    results = search(ct_index, "sort numbers", k=500)
    assert len(results) == len(test_samples)
    assert {r.snippet_id for r in results} == {s.id for s in test_samples}


def test_search_rejects_bad_k(ct_index):
    with pytest.raises(ValueError, match="k must be"):
        search(ct_index, "anything", k=0)


def test_search_empty_query(ct_index):
    for q in ("", "   ", "\t\n"):
        with pytest.raises(EmptyQueryError):
            search(ct_index, q, k=3)


def test_search_unknown_words_still_rank(ct_index, test_samples):
    # every character unknown -> unk tokens, but the query is non-empty
    results = search(ct_index, "Ωψ ξ", k=3)
    assert len(results) == 3


def test_search_deterministic(ct_index):
    a = search(ct_index, "read a file into a list", k=5)
    b = search(ct_index, "read a file into a list", k=5)
    assert a == b


def test_search_matches_rank_rule(ct_index, test_samples):
    """The k=n result order must embed the evaluator's rank for every gold id:
    both sides share one scoring path and one tie rule."""
    ids = [e.id for e in ct_index.entries]
    for s in test_samples[:5]:
        results = search(ct_index, s.description, k=len(ids))
        scores = {r.snippet_id: r.score for r in results}
        rank = rank_from_scores(ids, [scores[i] for i in ids], s.id)
        position = next(r.rank for r in results if r.snippet_id == s.id)
        assert position == rank


def test_search_mp_route(mp_index):
    results = search(mp_index, "flatten a nested list", k=4)
    assert len(results) == 4
    assert [r.rank for r in results] == [1, 2, 3, 4]
    assert search(mp_index, "flatten a nested list", k=4) == results


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def test_save_load_roundtrip(tmp_path, ct_index):
    path = tmp_path / "snippets.cmi1"
    save_index(ct_index, path)
    loaded = load_index(path)
    assert index_bytes(loaded) == index_bytes(ct_index)
    assert loaded.ckpt_hash == ct_index.ckpt_hash
    q = "get the keys of a dictionary"
    assert search(loaded, q, k=5) == search(ct_index, q, k=5)


def test_mp_index_roundtrip(tmp_path, mp_index):
    path = tmp_path / "mp.cmi1"
    save_index(mp_index, path)
    loaded = load_index(path)
    assert loaded.vectors is None
    q = "sum a list"
    assert search(loaded, q, k=3) == search(mp_index, q, k=3)


def test_load_errors(tmp_path, ct_index):
    path = tmp_path / "snippets.cmi1"
    save_index(ct_index, path)
    blob = path.read_bytes()
    bad = tmp_path / "bad.cmi1"

    bad.write_bytes(b"WXYZ" + blob[4:])
    with pytest.raises(IndexError_, match="magic.*bad.cmi1"):
        load_index(bad)

    bad.write_bytes(blob[:-40])
    with pytest.raises(IndexError_, match="truncated"):
        load_index(bad)

    bad.write_bytes(blob + b"\x00")
    with pytest.raises(IndexError_, match="trailing"):
        load_index(bad)

    # flip a byte inside the embedded checkpoint blob (starts at offset 12)
    corrupted = bytearray(blob)
    corrupted[13] ^= 0xFF
    bad.write_bytes(bytes(corrupted))
    with pytest.raises(IndexError_, match="bad embedded checkpoint"):
        load_index(bad)
