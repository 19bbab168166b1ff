"""End-to-end scoring, pairwise loss, training loop, evaluation.

Scores are produced by encoding both sides over their padded histories,
concatenating [candidate fusion, job fusion, resume embedding, JD
embedding] into the joint representation, and applying the scoring head.
Training minimizes the pairwise loss

    L = -(1/|B|) sum log sigma(y+ - y-) + lambda (1/|B|) sum ((y+)^2 + (y-)^2)

with Adam. Text embeddings enter as constants and are never trained; the
category table and every network weight are.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pjfit.config import ModelConfig, TrainConfig
from pjfit.domain import Dataset, DatasetError, EntityRecord, pad_sequence, sample_training_pairs
from pjfit.encoder import encode_side, encoder_param_spec
from pjfit.metrics import RankedPrediction, ap, auc, gauc, ndcg
from pjfit.moe import head_param_spec, moe_predict
from pjfit.numerics import (
    BoundParams,
    Matrix,
    ParamStore,
    Tape,
    TrainingDivergedError,
    adam_step,
    glorot_uniform,
    ops,
    spawn_rngs,
)


def param_spec(cfg: ModelConfig) -> list[tuple[str, int, int]]:
    """Every trainable tensor's (name, rows, cols), in checkpoint order."""
    return encoder_param_spec(cfg) + head_param_spec(cfg)


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> ParamStore:
    """Glorot-uniform weights, zero biases, insertion order per param_spec."""
    store = ParamStore()
    for name, rows, cols in param_spec(cfg):
        if name.rsplit(".", 1)[-1].startswith("b"):
            store.add(name, np.zeros((rows, cols)))
        else:
            store.add(name, glorot_uniform(rng, rows, cols))
    return store


class SequenceCache:
    """Padded history blocks per entity, built once per dataset."""

    def __init__(self, dataset: Dataset, cfg: ModelConfig):
        self._dataset = dataset
        self._cfg = cfg
        self._cache: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {}

    def get(self, record: EntityRecord) -> list[tuple[np.ndarray, np.ndarray]]:
        key = f"{record.kind}:{record.id}"
        seqs = self._cache.get(key)
        if seqs is None:
            counterpart = "job" if record.kind == "candidate" else "candidate"
            seqs = [
                pad_sequence(record.history(stage), self._dataset,
                             max_len=self._cfg.seq_len, kind=counterpart)
                for stage in self._cfg.stages
            ]
            self._cache[key] = seqs
        return seqs


def score_pair(candidate: EntityRecord, job: EntityRecord, bound: BoundParams,
               cfg: ModelConfig, cache: SequenceCache) -> Matrix:
    """Match score for one candidate-job pair as a 1x1 node.

    Internal interactions attend each side's text over its own
    counterpart-kind history; external interactions attend it over the
    paired entity's same-kind history. Entities with empty histories are
    scorable: fully padded stages contribute zero vectors.
    """
    resume = bound.constant(candidate.embedding)
    jd = bound.constant(job.embedding)
    cand_hist = [(bound.constant(m), v) for m, v in cache.get(candidate)]
    job_hist = [(bound.constant(m), v) for m, v in cache.get(job)]

    cand_fused = encode_side(resume, cand_hist, job_hist, bound, "cand", cfg)
    job_fused = encode_side(jd, job_hist, cand_hist, bound, "job", cfg)

    parts = [cand_fused, job_fused, resume, jd]
    if cfg.ablation == "simple_match":
        same = 1.0 if candidate.category_id == job.category_id else 0.0
        parts.append(bound.constant([[same]]))
    x = ops.concat_cols(parts)
    return moe_predict(x, candidate.category_id, job.category_id, bound, cfg)


def bpr_loss_graph(pos: Matrix, neg: Matrix, lambda_reg: float) -> Matrix:
    """Loss over (B,1) score columns; log-sigmoid on the stable branch."""
    if pos.shape != neg.shape or pos.cols != 1:
        raise ValueError(f"expected matching (B,1) score columns, got {pos.shape} and {neg.shape}")
    if pos.rows < 1:
        raise ValueError("empty batch")
    loss = ops.scale(ops.mean_all(ops.logsigmoid(ops.sub(pos, neg))), -1.0)
    if lambda_reg != 0.0:
        reg = ops.add(ops.mean_all(ops.square(pos)), ops.mean_all(ops.square(neg)))
        loss = ops.add(loss, ops.scale(reg, lambda_reg))
    return loss


def bpr_loss(pos_scores, neg_scores, lambda_reg: float = 0.0) -> float:
    """Same formula over plain score lists."""
    if len(pos_scores) != len(neg_scores):
        raise ValueError("positive and negative score lists must have equal length")
    pos = Matrix(np.asarray(pos_scores, dtype=np.float64).reshape(-1, 1))
    neg = Matrix(np.asarray(neg_scores, dtype=np.float64).reshape(-1, 1))
    return bpr_loss_graph(pos, neg, lambda_reg).item()


@dataclass
class TrainResult:
    store: ParamStore
    losses: list[float] = field(default_factory=list)
    steps: int = 0
    skipped_positives: int = 0


def train(train_dataset: Dataset, config: TrainConfig) -> TrainResult:
    """Deterministic training run: sample pair batches, Adam-step per batch.

    Raises TrainingDivergedError naming the batch index if the loss goes
    non-finite.
    """
    if not any(p.label == 1 for p in train_dataset.pairs):
        raise DatasetError("training data contains no positive pairs")
    if train_dataset.embedding_dim != config.model.d_model:
        raise DatasetError(
            f"dataset embedding dim {train_dataset.embedding_dim} "
            f"!= model d_model {config.model.d_model}")

    rng_init, rng_sample = spawn_rngs(config.seed, 2)
    store = init_params(config.model, rng_init)
    cache = SequenceCache(train_dataset, config.model)
    result = TrainResult(store=store)

    for _ in range(config.epochs):
        epoch = sample_training_pairs(
            train_dataset, rng_sample,
            per_positive_negatives=config.negatives_per_positive,
            batch_size=config.batch_size)
        result.skipped_positives += epoch.skipped_positives
        for batch_index, batch in enumerate(epoch.batches):
            tape = Tape()
            bound = store.bind(tape)
            pos_scores, neg_scores = [], []
            for pos_pair, neg_pair in batch.entries:
                cand = train_dataset.candidates[pos_pair.candidate_id]
                neg_cand = train_dataset.candidates[neg_pair.candidate_id]
                job = train_dataset.jobs[pos_pair.job_id]
                pos_scores.append(score_pair(cand, job, bound, config.model, cache))
                neg_scores.append(score_pair(neg_cand, job, bound, config.model, cache))
            loss = bpr_loss_graph(ops.concat_rows(pos_scores),
                                  ops.concat_rows(neg_scores), config.lambda_reg)
            loss_value = loss.item()
            if not np.isfinite(loss_value):
                raise TrainingDivergedError(f"non-finite loss at batch {batch_index}")
            tape.backward(loss)
            result.steps += 1
            adam_step(store, config.learning_rate, result.steps)
            result.losses.append(loss_value)
    return result


def score_all(dataset: Dataset, store: ParamStore, cfg: ModelConfig) -> list[RankedPrediction]:
    """Score every pair in the dataset with frozen parameters."""
    bound = store.bind(tape=None)
    cache = SequenceCache(dataset, cfg)
    preds = []
    for p in dataset.pairs:
        score = score_pair(dataset.candidates[p.candidate_id], dataset.jobs[p.job_id],
                           bound, cfg, cache).item()
        preds.append(RankedPrediction(p.candidate_id, p.job_id, score, p.label))
    return preds


def evaluate(test_dataset: Dataset, store: ParamStore, cfg: ModelConfig) -> dict:
    """AUC, GAUC (grouped by job), NDCG and AP over the test pairs."""
    preds = score_all(test_dataset, store, cfg)
    return {
        "auc": auc(preds),
        "gauc": gauc(preds),
        "ndcg": ndcg(preds),
        "ap": ap(preds),
        "n_pairs": len(preds),
    }
