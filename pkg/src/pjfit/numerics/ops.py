"""Forward operations with hand-derived backward passes.

Every function returns a new Matrix and, when any input sits on a tape,
records one closure that accumulates exact gradients into the inputs.
"""

from __future__ import annotations

import math

import numpy as np

from pjfit.numerics.matrix import DimensionError, Matrix, tape_of


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise DimensionError(f"matmul: {a.shape} @ {b.shape}")
    tape = tape_of(a, b)
    out = Matrix(a.data @ b.data, tape)
    if tape is not None:
        def backward():
            a.grad += out.grad @ b.data.T
            b.grad += a.data.T @ out.grad
        tape.record(backward)
    return out


def affine(x: Matrix, w: Matrix, b: Matrix) -> Matrix:
    """x @ w + b with b broadcast over rows; b must be 1 x w.cols."""
    if x.cols != w.rows:
        raise DimensionError(f"affine: x {x.shape} incompatible with w {w.shape}")
    if b.shape != (1, w.cols):
        raise DimensionError(f"affine: bias {b.shape} must be (1, {w.cols})")
    tape = tape_of(x, w, b)
    out = Matrix(x.data @ w.data + b.data, tape)
    if tape is not None:
        def backward():
            x.grad += out.grad @ w.data.T
            w.grad += x.data.T @ out.grad
            b.grad += out.grad.sum(axis=0, keepdims=True)
        tape.record(backward)
    return out


def relu(x: Matrix) -> Matrix:
    """Elementwise max(0, x). Subgradient at exactly 0 is 0."""
    mask = x.data > 0.0
    out = Matrix(np.where(mask, x.data, 0.0), x.tape)
    if x.tape is not None:
        def backward():
            x.grad += out.grad * mask
        x.tape.record(backward)
    return out


def softmax_rows(x: Matrix) -> Matrix:
    """Row-wise softmax with max subtraction for stability."""
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)
    out = Matrix(s, x.tape)
    if x.tape is not None:
        def backward():
            g = out.grad
            # d softmax: s * (g - sum_j g_j s_j) per row
            x.grad += s * (g - (g * s).sum(axis=1, keepdims=True))
        x.tape.record(backward)
    return out


def scaled_dot_attention(q: Matrix, k: Matrix, v: Matrix, valid: np.ndarray) -> Matrix:
    """softmax(q k^T / sqrt(d_k)) v over the key rows flagged valid.

    ``valid`` is a boolean vector over key rows; padded rows get softmax
    weight exactly 0. When no row is valid the result is all zeros and no
    gradient flows to q, k or v.
    """
    valid = np.asarray(valid, dtype=bool).reshape(-1)
    if q.cols != k.cols:
        raise DimensionError(f"attention: q {q.shape} vs k {k.shape}")
    if k.rows != v.rows:
        raise DimensionError(f"attention: k {k.shape} vs v {v.shape}")
    if valid.shape[0] != k.rows:
        raise DimensionError(f"attention: mask length {valid.shape[0]} vs {k.rows} key rows")
    tape = tape_of(q, k, v)
    if not valid.any():
        return Matrix(np.zeros((q.rows, v.cols)), tape)

    scale = 1.0 / math.sqrt(q.cols)
    logits = (q.data @ k.data.T) * scale
    weights = np.zeros_like(logits)
    lv = logits[:, valid]
    lv = lv - lv.max(axis=1, keepdims=True)
    e = np.exp(lv)
    weights[:, valid] = e / e.sum(axis=1, keepdims=True)
    out = Matrix(weights @ v.data, tape)
    if tape is not None:
        def backward():
            g = out.grad
            v.grad += weights.T @ g
            dw = g @ v.data.T
            # softmax jacobian; padded columns stay zero because weights are zero there
            dlogits = weights * (dw - (dw * weights).sum(axis=1, keepdims=True))
            dlogits *= scale
            q.grad += dlogits @ k.data
            k.grad += dlogits.T @ q.data
        tape.record(backward)
    return out


def concat_cols(parts: list[Matrix]) -> Matrix:
    if not parts:
        raise DimensionError("concat_cols of nothing")
    rows = parts[0].rows
    if any(p.rows != rows for p in parts):
        raise DimensionError(f"concat_cols: row counts differ: {[p.shape for p in parts]}")
    tape = tape_of(*parts)
    out = Matrix(np.concatenate([p.data for p in parts], axis=1), tape)
    if tape is not None:
        offsets = np.cumsum([0] + [p.cols for p in parts])
        def backward():
            for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
                p.grad += out.grad[:, lo:hi]
        tape.record(backward)
    return out


def concat_rows(parts: list[Matrix]) -> Matrix:
    if not parts:
        raise DimensionError("concat_rows of nothing")
    cols = parts[0].cols
    if any(p.cols != cols for p in parts):
        raise DimensionError(f"concat_rows: col counts differ: {[p.shape for p in parts]}")
    tape = tape_of(*parts)
    out = Matrix(np.concatenate([p.data for p in parts], axis=0), tape)
    if tape is not None:
        offsets = np.cumsum([0] + [p.rows for p in parts])
        def backward():
            for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
                p.grad += out.grad[lo:hi, :]
        tape.record(backward)
    return out


def gather_rows(x: Matrix, indices) -> Matrix:
    """Select rows by index, e.g. embedding-table lookup."""
    idx = np.asarray(indices, dtype=np.intp).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= x.rows):
        raise IndexError(f"row index out of range for {x.rows} rows: {idx}")
    out = Matrix(x.data[idx], x.tape)
    if x.tape is not None:
        def backward():
            np.add.at(x.grad, idx, out.grad)
        x.tape.record(backward)
    return out


def add(a: Matrix, b: Matrix) -> Matrix:
    if a.shape != b.shape:
        raise DimensionError(f"add: {a.shape} vs {b.shape}")
    tape = tape_of(a, b)
    out = Matrix(a.data + b.data, tape)
    if tape is not None:
        def backward():
            a.grad += out.grad
            b.grad += out.grad
        tape.record(backward)
    return out


def sub(a: Matrix, b: Matrix) -> Matrix:
    if a.shape != b.shape:
        raise DimensionError(f"sub: {a.shape} vs {b.shape}")
    tape = tape_of(a, b)
    out = Matrix(a.data - b.data, tape)
    if tape is not None:
        def backward():
            a.grad += out.grad
            b.grad -= out.grad
        tape.record(backward)
    return out


def mul(a: Matrix, b: Matrix) -> Matrix:
    """Elementwise product."""
    if a.shape != b.shape:
        raise DimensionError(f"mul: {a.shape} vs {b.shape}")
    tape = tape_of(a, b)
    out = Matrix(a.data * b.data, tape)
    if tape is not None:
        def backward():
            a.grad += out.grad * b.data
            b.grad += out.grad * a.data
        tape.record(backward)
    return out


def scale(x: Matrix, c: float) -> Matrix:
    out = Matrix(x.data * c, x.tape)
    if x.tape is not None:
        def backward():
            x.grad += out.grad * c
        x.tape.record(backward)
    return out


def square(x: Matrix) -> Matrix:
    out = Matrix(x.data * x.data, x.tape)
    if x.tape is not None:
        def backward():
            x.grad += out.grad * 2.0 * x.data
        x.tape.record(backward)
    return out


def logsigmoid(x: Matrix) -> Matrix:
    """log(sigma(x)) computed as -softplus(-x); safe for |x| > 30."""
    out = Matrix(-np.logaddexp(0.0, -x.data), x.tape)
    if x.tape is not None:
        # d/dx log sigma(x) = sigma(-x), on the overflow-free branch
        t = np.exp(-np.abs(x.data))
        sig_neg = np.where(x.data >= 0, t / (1.0 + t), 1.0 / (1.0 + t))
        def backward():
            x.grad += out.grad * sig_neg
        x.tape.record(backward)
    return out


def sum_all(x: Matrix) -> Matrix:
    out = Matrix(np.array([[x.data.sum()]]), x.tape)
    if x.tape is not None:
        def backward():
            x.grad += out.grad[0, 0]
        x.tape.record(backward)
    return out


def mean_all(x: Matrix) -> Matrix:
    n = x.data.size
    out = Matrix(np.array([[x.data.sum() / n]]), x.tape)
    if x.tape is not None:
        def backward():
            x.grad += out.grad[0, 0] / n
        x.tape.record(backward)
    return out
