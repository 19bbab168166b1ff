"""Bilateral historical-interaction encoders.

Each side (candidate-to-job, job-to-candidate) attends its own text
embedding over six history sequences: per recruitment stage (evaluated,
passed resume evaluation, passed interviews) an internal interaction
against counterpart-kind history and an external interaction against
same-kind history. The six attention outputs are concatenated in fixed
order, stage-major with internal before external, and fused by a two-layer
DNN down to a compact side representation.

The two sides share architecture but never parameters: every
(side, stage, direction) triple owns an independent attention set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pjfit.config import ModelConfig
from pjfit.numerics import BoundParams, Matrix, ops

SIDES = ("cand", "job")
DIRECTIONS = ("internal", "external")


@dataclass(frozen=True)
class AttentionSet:
    """Per-head projection weights plus the shared output projection."""

    wq: tuple[Matrix, ...]
    wk: tuple[Matrix, ...]
    wv: tuple[Matrix, ...]
    wo: Matrix


def attention_param_names(prefix: str, heads: int):
    for i in range(heads):
        yield f"{prefix}.h{i}.wq"
        yield f"{prefix}.h{i}.wk"
        yield f"{prefix}.h{i}.wv"
    yield f"{prefix}.wo"


def encoder_param_spec(cfg: ModelConfig) -> list[tuple[str, int, int]]:
    """(name, rows, cols) for both sides, in checkpoint order."""
    spec: list[tuple[str, int, int]] = []
    dk = cfg.head_dim
    for side in SIDES:
        for stage in cfg.stages:
            for direction in DIRECTIONS:
                prefix = f"{side}.{stage}.{direction}"
                for i in range(cfg.heads):
                    spec.append((f"{prefix}.h{i}.wq", cfg.d_model, dk))
                    spec.append((f"{prefix}.h{i}.wk", cfg.d_model, dk))
                    spec.append((f"{prefix}.h{i}.wv", cfg.d_model, dk))
                spec.append((f"{prefix}.wo", cfg.heads * dk, cfg.d_model))
        spec.append((f"{side}.fusion.w1", cfg.fusion_in, cfg.fusion_hidden))
        spec.append((f"{side}.fusion.b1", 1, cfg.fusion_hidden))
        spec.append((f"{side}.fusion.w2", cfg.fusion_hidden, cfg.fusion_out))
        spec.append((f"{side}.fusion.b2", 1, cfg.fusion_out))
    return spec


def bound_attention_set(bound: BoundParams, prefix: str, heads: int) -> AttentionSet:
    return AttentionSet(
        wq=tuple(bound[f"{prefix}.h{i}.wq"] for i in range(heads)),
        wk=tuple(bound[f"{prefix}.h{i}.wk"] for i in range(heads)),
        wv=tuple(bound[f"{prefix}.h{i}.wv"] for i in range(heads)),
        wo=bound[f"{prefix}.wo"],
    )


def multi_head_interaction(query: Matrix, seq: Matrix, valid: np.ndarray,
                           params: AttentionSet) -> Matrix:
    """Concat over heads of attention(query Wq_i, seq Wk_i, seq Wv_i), times Wo.

    A fully padded sequence yields the zero vector: each head attends over
    nothing and contributes zeros, so the output projection sees zeros.
    """
    heads = [
        ops.scaled_dot_attention(
            ops.matmul(query, wq), ops.matmul(seq, wk), ops.matmul(seq, wv), valid)
        for wq, wk, wv in zip(params.wq, params.wk, params.wv)
    ]
    return ops.matmul(ops.concat_cols(heads), params.wo)


def encode_side(self_vec: Matrix, own_seqs, cross_seqs, bound: BoundParams,
                side: str, cfg: ModelConfig) -> Matrix:
    """Fuse the per-stage internal and external interactions of one side.

    ``own_seqs`` and ``cross_seqs`` are (matrix, valid) tuples per active
    stage: own history holds counterpart-kind embeddings (internal
    interaction), the paired entity's history holds same-kind embeddings
    (external interaction).
    """
    if len(own_seqs) != len(cfg.stages) or len(cross_seqs) != len(cfg.stages):
        raise ValueError(f"expected {len(cfg.stages)} sequences per direction")
    parts = []
    for stage, (own, own_valid), (cross, cross_valid) in zip(cfg.stages, own_seqs, cross_seqs):
        internal = bound_attention_set(bound, f"{side}.{stage}.internal", cfg.heads)
        external = bound_attention_set(bound, f"{side}.{stage}.external", cfg.heads)
        parts.append(multi_head_interaction(self_vec, own, own_valid, internal))
        parts.append(multi_head_interaction(self_vec, cross, cross_valid, external))
    hidden = ops.relu(ops.affine(ops.concat_cols(parts),
                                 bound[f"{side}.fusion.w1"], bound[f"{side}.fusion.b1"]))
    return ops.affine(hidden, bound[f"{side}.fusion.w2"], bound[f"{side}.fusion.b2"])
