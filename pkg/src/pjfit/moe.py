"""Category-aware mixture-of-experts scoring head.

A trainable category embedding table drives a two-layer gating net whose
softmax output weights the expert FFNs. Each expert is a three-affine
network with ReLU after the first two layers; the prediction is the
gate-weighted sum of expert outputs, an unbounded real (pairwise training
works on score differences).

Head ablations: ``no_moe`` and ``simple_match`` replace the whole head by
a single expert-shaped FFN (the latter sees an extra binary same-category
input feature appended to the joint vector by the caller); ``no_category``
keeps the gated head but feeds the gate an all-zero category vector.
"""

from __future__ import annotations

import numpy as np

from pjfit.config import ModelConfig
from pjfit.numerics import BoundParams, Matrix, ops


def head_param_spec(cfg: ModelConfig) -> list[tuple[str, int, int]]:
    h1, h2 = cfg.expert_hidden
    if not cfg.gated_head:
        # single FFN on the joint vector (joint_dim already includes the
        # simple-match feature when that ablation is active)
        return [
            ("head.w1", cfg.joint_dim, h1), ("head.b1", 1, h1),
            ("head.w2", h1, h2), ("head.b2", 1, h2),
            ("head.w3", h2, 1), ("head.b3", 1, 1),
        ]
    spec = [
        ("moe.categories", cfg.n_categories, cfg.category_dim),
        ("moe.gate.w1", cfg.gate_in, cfg.gate_hidden),
        ("moe.gate.b1", 1, cfg.gate_hidden),
        ("moe.gate.w2", cfg.gate_hidden, cfg.n_experts),
        ("moe.gate.b2", 1, cfg.n_experts),
    ]
    for i in range(cfg.n_experts):
        spec += [
            (f"moe.expert{i}.w1", cfg.joint_dim, h1), (f"moe.expert{i}.b1", 1, h1),
            (f"moe.expert{i}.w2", h1, h2), (f"moe.expert{i}.b2", 1, h2),
            (f"moe.expert{i}.w3", h2, 1), (f"moe.expert{i}.b3", 1, 1),
        ]
    return spec


def gate_weights(e_c: Matrix, bound: BoundParams) -> Matrix:
    """softmax(W2 relu(W1 e_c + b1) + b2): nonnegative, sums to 1."""
    hidden = ops.relu(ops.affine(e_c, bound["moe.gate.w1"], bound["moe.gate.b1"]))
    return ops.softmax_rows(ops.affine(hidden, bound["moe.gate.w2"], bound["moe.gate.b2"]))


def _ffn(x: Matrix, bound: BoundParams, prefix: str) -> Matrix:
    h = ops.relu(ops.affine(x, bound[f"{prefix}.w1"], bound[f"{prefix}.b1"]))
    h = ops.relu(ops.affine(h, bound[f"{prefix}.w2"], bound[f"{prefix}.b2"]))
    return ops.affine(h, bound[f"{prefix}.w3"], bound[f"{prefix}.b3"])


def expert_forward(x: Matrix, i: int, bound: BoundParams, cfg: ModelConfig) -> Matrix:
    if not 0 <= i < cfg.n_experts:
        raise IndexError(f"expert index {i} out of range [0, {cfg.n_experts})")
    return _ffn(x, bound, f"moe.expert{i}")


def moe_predict(x: Matrix, candidate_category: int, job_category: int,
                bound: BoundParams, cfg: ModelConfig) -> Matrix:
    """Gate-weighted sum of expert outputs for one joint representation.

    The gate input concatenates the candidate and job category embeddings;
    for confusable category pairs both sides matter.
    """
    if not cfg.gated_head:
        return _ffn(x, bound, "head")
    if not 0 <= candidate_category < cfg.n_categories:
        raise IndexError(f"candidate category id {candidate_category} out of range")
    if not 0 <= job_category < cfg.n_categories:
        raise IndexError(f"job category id {job_category} out of range")
    if cfg.ablation == "no_category":
        e_c = bound.constant(np.zeros((1, cfg.gate_in)))
    else:
        table = bound["moe.categories"]
        e_c = ops.concat_cols([
            ops.gather_rows(table, [candidate_category]),
            ops.gather_rows(table, [job_category]),
        ])
    gate = gate_weights(e_c, bound)
    outputs = ops.concat_cols([expert_forward(x, i, bound, cfg) for i in range(cfg.n_experts)])
    return ops.sum_all(ops.mul(gate, outputs))
