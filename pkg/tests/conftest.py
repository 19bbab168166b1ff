import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # local oracles module

from pjfit.config import ModelConfig
from pjfit.domain import CategoryVocab, Dataset, EntityRecord, Pair
from pjfit.numerics import seeded_rng

TOY_VOCAB_NAMES = ("Technology", "Data", "Sales", "Design")


def toy_model_config(**overrides) -> ModelConfig:
    """Tiny dims used by gradient checks: d_model=8, h=2, seq=4, 3 experts."""
    base = dict(
        d_model=8, heads=2, seq_len=4, fusion_hidden=16, fusion_out=8,
        n_categories=len(TOY_VOCAB_NAMES), category_dim=3, gate_hidden=6,
        n_experts=3, expert_hidden=(10, 6),
    )
    base.update(overrides)
    return ModelConfig(**base)


class DatasetBuilder:
    """Hand-build small datasets for tests."""

    def __init__(self, vocab_names=TOY_VOCAB_NAMES, dim=8, seed=0):
        self.vocab = CategoryVocab(vocab_names)
        self.dim = dim
        self.rng = seeded_rng(seed)
        self.candidates: dict[str, EntityRecord] = {}
        self.jobs: dict[str, EntityRecord] = {}
        self.pairs: list[Pair] = []

    def entity(self, entity_id, kind, category="Technology", text=None,
               hist_eval=(), hist_pass_eval=(), hist_pass_interview=(),
               embedding=None, **extra):
        record = EntityRecord(
            id=entity_id, kind=kind,
            text=text if text is not None else f"{category} {kind} {entity_id} profile text",
            category_id=self.vocab.id_of(category),
            embedding=np.asarray(embedding) if embedding is not None else self.rng.normal(size=self.dim),
            hist_eval=tuple(hist_eval),
            hist_pass_eval=tuple(hist_pass_eval),
            hist_pass_interview=tuple(hist_pass_interview),
            **extra,
        )
        (self.candidates if kind == "candidate" else self.jobs)[entity_id] = record
        return record

    def pair(self, candidate_id, job_id, label, ts=0):
        self.pairs.append(Pair(candidate_id, job_id, label, ts))

    def build(self) -> Dataset:
        return Dataset(self.vocab, dict(self.candidates), dict(self.jobs),
                       list(self.pairs), self.dim)


@pytest.fixture
def builder():
    return DatasetBuilder()


@pytest.fixture
def small_dataset():
    """4 candidates, 2 jobs, histories and a few labeled pairs."""
    b = DatasetBuilder()
    for i in range(1, 4):
        b.entity(f"c{i}", "candidate", category=("Technology", "Data")[i % 2])
    # c0 carries real job-side history
    b.entity("c0", "candidate", category="Technology",
             hist_eval=("j0", "j1"), hist_pass_eval=("j0",), hist_pass_interview=("j0",))
    for j in range(2):
        b.entity(f"j{j}", "job", category=("Technology", "Data")[j % 2],
                 hist_eval=("c0", "c1"), hist_pass_eval=("c0",),
                 hist_pass_interview=("c0",) if j == 0 else ())
    b.pair("c0", "j0", 1, ts=100)
    b.pair("c1", "j0", 0, ts=110)
    b.pair("c2", "j1", 1, ts=120)
    b.pair("c3", "j1", 0, ts=200)
    return b.build()
