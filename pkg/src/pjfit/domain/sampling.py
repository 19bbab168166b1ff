"""History padding and pairwise training-batch sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pjfit.domain.records import Dataset, DatasetError, Pair


def pad_sequence(ids, dataset: Dataset, max_len: int = 20,
                 kind: str = "job") -> tuple[np.ndarray, np.ndarray]:
    """Embed a history id list into a fixed (max_len, dim) block.

    Input ids are chronological (oldest first); only the most recent
    ``max_len`` survive and they fill the block most-recent-first. The
    boolean mask flags real rows; padded rows are zero.
    """
    matrix = np.zeros((max_len, dataset.embedding_dim))
    valid = np.zeros(max_len, dtype=bool)
    kept = list(ids)[-max_len:][::-1]
    for row, entity_id in enumerate(kept):
        matrix[row] = dataset.entity(kind, entity_id).embedding
        valid[row] = True
    return matrix, valid


@dataclass(frozen=True)
class PairBatch:
    """(positive, negative) pair entries; both sides of an entry share a job."""

    entries: tuple[tuple[Pair, Pair], ...]

    def __post_init__(self):
        for pos, neg in self.entries:
            if pos.label != 1 or neg.label != 0:
                raise DatasetError("batch entry must be (label-1, label-0)")
            if pos.job_id != neg.job_id:
                raise DatasetError("batch entry pairs must share a job id")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class SampledEpoch:
    batches: list[PairBatch]
    skipped_positives: int  # positives whose job had no unmatched candidate left


def sample_training_pairs(dataset: Dataset, rng: np.random.Generator,
                          per_positive_negatives: int = 1,
                          batch_size: int = 256) -> SampledEpoch:
    """One epoch of BPR batches.

    Positives are the label-1 pairs, visited in shuffled order. For each, a
    negative candidate is drawn uniformly from those with no positive pair
    with that job. Jobs every candidate matches are skipped and counted.
    Deterministic given the rng state.
    """
    positives = [p for p in dataset.pairs if p.label == 1]
    matched = dataset.positives_by_job()
    all_candidates = sorted(dataset.candidates)
    pools: dict[str, list[str]] = {}

    entries: list[tuple[Pair, Pair]] = []
    skipped = 0
    order = rng.permutation(len(positives))
    for idx in order:
        pos = positives[idx]
        pool = pools.get(pos.job_id)
        if pool is None:
            taken = matched[pos.job_id]
            pool = [c for c in all_candidates if c not in taken]
            pools[pos.job_id] = pool
        if not pool:
            skipped += 1
            continue
        for _ in range(per_positive_negatives):
            neg_id = pool[int(rng.integers(len(pool)))]
            entries.append((pos, Pair(neg_id, pos.job_id, 0, pos.ts)))

    batches = [PairBatch(tuple(entries[i:i + batch_size]))
               for i in range(0, len(entries), batch_size)]
    return SampledEpoch(batches=batches, skipped_positives=skipped)
