import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pjfit.domain import (
    CategoryVocab,
    Dataset,
    DatasetError,
    load_dataset,
    pad_sequence,
    sample_training_pairs,
    save_dataset,
    validate_records,
)
from pjfit.numerics import seeded_rng

from conftest import DatasetBuilder


def entity_doc(entity_id, kind, dim=4, **overrides):
    doc = {
        "id": entity_id,
        "kind": kind,
        "text": f"text of {entity_id}",
        "category": "Technology",
        "embedding": [0.1] * dim,
        "hist_eval": [],
        "hist_pass_eval": [],
        "hist_pass_interview": [],
    }
    doc.update(overrides)
    return doc


def write_jsonl(path, docs):
    path.write_text("".join(json.dumps(d) + "\n" for d in docs), encoding="utf-8")
    return path


@pytest.fixture
def paths(tmp_path):
    return tmp_path / "entities.jsonl", tmp_path / "pairs.jsonl"


def test_load_two_candidates_one_job(paths):
    entities, pairs = paths
    write_jsonl(entities, [
        entity_doc("c1", "candidate"),
        entity_doc("c2", "candidate"),
        entity_doc("j1", "job"),
    ])
    write_jsonl(pairs, [{"candidate_id": "c1", "job_id": "j1", "label": 1, "ts": 5}])
    ds = load_dataset(entities, pairs)
    assert len(ds.candidates) == 2
    assert len(ds.jobs) == 1
    assert ds.embedding_dim == 4
    assert ds.pairs[0].label == 1


def test_wrong_embedding_length_names_the_id(paths):
    entities, pairs = paths
    write_jsonl(entities, [
        entity_doc("c1", "candidate", dim=4),
        entity_doc("c2", "candidate", dim=3),
    ])
    write_jsonl(pairs, [])
    with pytest.raises(DatasetError, match="'c2'.*3 entries, expected 4"):
        load_dataset(entities, pairs)


def test_pinned_embedding_dim_rejects_first_record_too(paths):
    entities, pairs = paths
    write_jsonl(entities, [entity_doc("c1", "candidate", dim=1023)])
    write_jsonl(pairs, [])
    with pytest.raises(DatasetError, match="'c1'.*1023 entries, expected 1024"):
        load_dataset(entities, pairs, embedding_dim=1024)


def test_pair_referencing_missing_job(paths):
    entities, pairs = paths
    write_jsonl(entities, [entity_doc("c1", "candidate")])
    write_jsonl(pairs, [{"candidate_id": "c1", "job_id": "ghost", "label": 0, "ts": 1}])
    with pytest.raises(DatasetError, match="missing job 'ghost'"):
        load_dataset(entities, pairs)


def test_dangling_history_id(paths):
    entities, pairs = paths
    write_jsonl(entities, [entity_doc("c1", "candidate", hist_eval=["nosuchjob"])])
    write_jsonl(pairs, [])
    with pytest.raises(DatasetError, match="missing counterpart id 'nosuchjob'"):
        load_dataset(entities, pairs)


def test_unknown_category_reports_line_number(paths):
    entities, pairs = paths
    write_jsonl(entities, [
        entity_doc("c1", "candidate"),
        entity_doc("c2", "candidate", category="Wizardry"),
    ])
    write_jsonl(pairs, [])
    with pytest.raises(DatasetError, match=r":2: unknown category 'Wizardry'"):
        load_dataset(entities, pairs)


def test_malformed_line_reports_line_number(paths):
    entities, pairs = paths
    entities.write_text(json.dumps(entity_doc("c1", "candidate")) + "\n{broken\n", encoding="utf-8")
    write_jsonl(pairs, [])
    with pytest.raises(DatasetError, match=r":2: malformed JSON"):
        load_dataset(entities, pairs)


def test_duplicate_id_rejected(paths):
    entities, pairs = paths
    write_jsonl(entities, [entity_doc("c1", "candidate"), entity_doc("c1", "candidate")])
    write_jsonl(pairs, [])
    with pytest.raises(DatasetError, match="duplicate candidate id 'c1'"):
        load_dataset(entities, pairs)


def test_sensitive_fields_are_structurally_rejected(paths):
    entities, pairs = paths
    for bad_field in ("gender", "age", "school", "graduation_year", "location"):
        write_jsonl(entities, [entity_doc("c1", "candidate", **{bad_field: "x"})])
        write_jsonl(pairs, [])
        with pytest.raises(DatasetError, match=f"unknown fields.*{bad_field}"):
            load_dataset(entities, pairs)


def test_round_trip_is_identity(tmp_path, small_dataset):
    entities, pairs = tmp_path / "e.jsonl", tmp_path / "p.jsonl"
    save_dataset(small_dataset, entities, pairs)
    loaded = load_dataset(entities, pairs, vocab=small_dataset.vocab)
    assert set(loaded.candidates) == set(small_dataset.candidates)
    assert set(loaded.jobs) == set(small_dataset.jobs)
    assert loaded.pairs == small_dataset.pairs
    for cid, rec in small_dataset.candidates.items():
        got = loaded.candidates[cid]
        assert got.text == rec.text
        assert got.category_id == rec.category_id
        assert got.histories == rec.histories
        np.testing.assert_array_equal(got.embedding, rec.embedding)
    # a second save of the loaded dataset is byte-identical
    entities2, pairs2 = tmp_path / "e2.jsonl", tmp_path / "p2.jsonl"
    save_dataset(loaded, entities2, pairs2)
    assert entities2.read_bytes() == entities.read_bytes()
    assert pairs2.read_bytes() == pairs.read_bytes()


# ------------------------------------------------------------ pad_sequence


def test_pad_empty_history(small_dataset):
    matrix, valid = pad_sequence([], small_dataset, max_len=20)
    assert matrix.shape == (20, small_dataset.embedding_dim)
    assert not valid.any()
    assert not matrix.any()


def test_pad_three_ids_fills_three_rows_most_recent_first(small_dataset):
    ids = ["c0", "c1", "c2"]  # chronological: c2 most recent
    matrix, valid = pad_sequence(ids, small_dataset, max_len=20, kind="candidate")
    assert valid[:3].all() and not valid[3:].any()
    np.testing.assert_array_equal(matrix[0], small_dataset.candidates["c2"].embedding)
    np.testing.assert_array_equal(matrix[2], small_dataset.candidates["c0"].embedding)
    assert not matrix[3:].any()


def test_pad_truncates_to_most_recent_twenty(builder):
    for i in range(25):
        builder.entity(f"j{i:02d}", "job")
    ds = builder.build()
    ids = [f"j{i:02d}" for i in range(25)]
    matrix, valid = pad_sequence(ids, ds, max_len=20)
    assert valid.all()
    # index-slicing oracle: last 20 chronologically, reversed into the block
    expected_order = ids[-20:][::-1]
    for row, jid in enumerate(expected_order):
        np.testing.assert_array_equal(matrix[row], ds.jobs[jid].embedding)


def test_pad_unknown_id_is_dangling_reference(small_dataset):
    with pytest.raises(DatasetError, match="unknown job id 'ghost'"):
        pad_sequence(["ghost"], small_dataset, max_len=4)


@settings(max_examples=40, deadline=None)
@given(n_ids=st.integers(0, 30))
def test_pad_mask_has_exactly_min_len_positions(n_ids):
    b = DatasetBuilder()
    for i in range(30):
        b.entity(f"j{i}", "job")
    ds = b.build()
    _, valid = pad_sequence([f"j{i}" for i in range(n_ids)], ds, max_len=20)
    assert valid.sum() == min(n_ids, 20)


# ------------------------------------------------------------ sampling


def test_sampling_all_candidates_matched_skips_with_count(builder):
    builder.entity("c1", "candidate")
    builder.entity("c2", "candidate")
    builder.entity("j1", "job")
    builder.pair("c1", "j1", 1)
    builder.pair("c2", "j1", 1)
    epoch = sample_training_pairs(builder.build(), seeded_rng(0))
    assert epoch.batches == []
    assert epoch.skipped_positives == 2


def test_sampling_is_deterministic_under_seed(small_dataset):
    a = sample_training_pairs(small_dataset, seeded_rng(7))
    b = sample_training_pairs(small_dataset, seeded_rng(7))
    assert [batch.entries for batch in a.batches] == [batch.entries for batch in b.batches]


def test_sampling_negatives_verified_unmatched_by_exhaustive_check():
    b = DatasetBuilder()
    for i in range(100):
        b.entity(f"c{i:03d}", "candidate")
    b.entity("j1", "job")
    for i in range(10):
        b.pair(f"c{i:03d}", "j1", 1, ts=i)
    ds = b.build()
    epoch = sample_training_pairs(ds, seeded_rng(3), batch_size=4)
    entries = [e for batch in epoch.batches for e in batch.entries]
    assert len(entries) == 10
    positives = {(p.candidate_id, p.job_id) for p in ds.pairs if p.label == 1}
    for pos, neg in entries:
        assert pos.label == 1 and neg.label == 0
        assert neg.job_id == pos.job_id
        assert (neg.candidate_id, neg.job_id) not in positives  # brute-force membership
    assert epoch.skipped_positives == 0


def test_sampling_ratio_above_one(small_dataset):
    epoch = sample_training_pairs(small_dataset, seeded_rng(1), per_positive_negatives=3)
    entries = [e for batch in epoch.batches for e in batch.entries]
    assert len(entries) == 2 * 3


# ------------------------------------------------------------ reports


def test_validate_records_empty_dataset():
    ds = Dataset(CategoryVocab(), {}, {}, [], 0)
    report = validate_records(ds)
    assert report.n_candidates == report.n_jobs == report.n_pairs == 0
    assert report.short_jd_share == 0.0
    assert report.history_length_hist == {0: 0} or report.history_length_hist == {}


def test_validate_records_short_jd_share(builder):
    builder.entity("j1", "job", text="x" * 150)
    report = validate_records(builder.build(), short_jd_threshold=200)
    assert report.short_jd_share == 1.0


def test_validate_records_counts(small_dataset):
    report = validate_records(small_dataset)
    assert report.n_candidates == 4
    assert report.n_jobs == 2
    assert report.n_pairs == 4
    assert report.n_positive == 2
    assert report.n_negative == 2
    assert sum(report.history_length_hist.values()) == 6 * 2 + 6  # 6 lists per entity


def test_split_temporal_is_strict(small_dataset):
    train, test = small_dataset.split_temporal(split_ts=150)
    assert max(p.ts for p in train.pairs) < min(p.ts for p in test.pairs)
    assert len(train.pairs) + len(test.pairs) == len(small_dataset.pairs)
