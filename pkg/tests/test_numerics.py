"""Primitive-level oracles, gradient checks, and optimizer behavior."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pjfit.numerics import (
    DimensionError,
    Matrix,
    ParamStore,
    Tape,
    TrainingDivergedError,
    adam_step,
    finite_diff_check,
    glorot_uniform,
    ops,
    seeded_rng,
)


def taped(*arrays):
    tape = Tape()
    return tape, [Matrix(a, tape) for a in arrays]


# ---------------------------------------------------------------- affine


def test_affine_identity_input_returns_weights():
    w = np.array([[1.5, -2.0], [0.25, 3.0]])
    _, (x, wm, b) = taped(np.eye(2), w, np.zeros((1, 2)))
    out = ops.affine(x, wm, b)
    np.testing.assert_array_equal(out.data, w)


def test_affine_sum_plus_bias():
    _, (x, w, b) = taped([[1.0, 2.0]], [[1.0], [1.0]], [[3.0]])
    assert ops.affine(x, w, b).item() == 6.0


def test_affine_matches_triple_loop_oracle():
    rng = seeded_rng(0)
    x = np.array([[0.3, -0.7]])
    w = rng.normal(size=(2, 3))
    b = np.zeros((1, 3))
    expected = np.zeros((1, 3))
    for i in range(1):
        for j in range(3):
            acc = 0.0
            for k in range(2):
                acc += x[i, k] * w[k, j]
            expected[i, j] = acc + b[0, j]
    _, (xm, wm, bm) = taped(x, w, b)
    np.testing.assert_allclose(ops.affine(xm, wm, bm).data, expected, rtol=0, atol=1e-15)


def test_affine_shape_mismatch_names_both_shapes():
    _, (x, w, b) = taped(np.zeros((1, 3)), np.zeros((2, 2)), np.zeros((1, 2)))
    with pytest.raises(DimensionError, match=r"\(1, 3\).*\(2, 2\)"):
        ops.affine(x, w, b)


# ---------------------------------------------------------------- relu


def test_relu_clamps_negatives():
    _, (x,) = taped([[-1.0, 0.0, 2.0]])
    np.testing.assert_array_equal(ops.relu(x).data, [[0.0, 0.0, 2.0]])


def test_relu_all_negative_blocks_gradient():
    tape, (x,) = taped([[-1.0, -5.0]])
    out = ops.sum_all(ops.relu(x))
    tape.backward(out)
    np.testing.assert_array_equal(x.grad, np.zeros((1, 2)))


def test_relu_matches_scalar_loop_oracle():
    rng = seeded_rng(3)
    a = rng.normal(size=(4, 5))
    _, (x,) = taped(a)
    got = ops.relu(x).data
    for i in range(4):
        for j in range(5):
            assert got[i, j] == max(0.0, a[i, j])


# ---------------------------------------------------------------- softmax


def test_softmax_symmetry():
    _, (x,) = taped([[0.0, 0.0]])
    np.testing.assert_allclose(ops.softmax_rows(x).data, [[0.5, 0.5]], atol=1e-15)


def test_softmax_large_values_no_overflow():
    _, (x,) = taped([[1000.0, 1000.0, 1000.0]])
    out = ops.softmax_rows(x).data
    assert np.isfinite(out).all()
    np.testing.assert_allclose(out, [[1 / 3] * 3], atol=1e-12)


def test_softmax_matches_extended_precision_oracle():
    # direct e^x_i / sum e^x_j at 50 decimal digits
    with mpmath.workdps(50):
        exps = [mpmath.exp(v) for v in (1, 2, 3)]
        total = sum(exps)
        expected = [float(e / total) for e in exps]
    _, (x,) = taped([[1.0, 2.0, 3.0]])
    np.testing.assert_allclose(ops.softmax_rows(x).data, [expected], rtol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-1000, max_value=1000), min_size=1, max_size=8))
def test_softmax_rows_sum_to_one(values):
    _, (x,) = taped([values])
    assert abs(ops.softmax_rows(x).data.sum() - 1.0) < 1e-9


# ---------------------------------------------------------------- attention


def test_attention_single_unmasked_row_returns_that_v_row():
    rng = seeded_rng(1)
    q = rng.normal(size=(1, 4))
    k = rng.normal(size=(3, 4))
    v = rng.normal(size=(3, 4))
    valid = np.array([False, True, False])
    _, (qm, km, vm) = taped(q, k, v)
    out = ops.scaled_dot_attention(qm, km, vm, valid)
    np.testing.assert_allclose(out.data, v[1:2], atol=1e-15)


def test_attention_fully_masked_returns_zeros_and_no_gradients():
    rng = seeded_rng(2)
    tape, (q, k, v) = taped(rng.normal(size=(1, 4)), rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
    out = ops.scaled_dot_attention(q, k, v, np.zeros(3, dtype=bool))
    np.testing.assert_array_equal(out.data, np.zeros((1, 4)))
    tape.backward(ops.sum_all(out))
    np.testing.assert_array_equal(k.grad, np.zeros((3, 4)))
    np.testing.assert_array_equal(v.grad, np.zeros((3, 4)))
    np.testing.assert_array_equal(q.grad, np.zeros((1, 4)))


def test_attention_matches_step_by_step_oracle():
    rng = seeded_rng(0)
    q = rng.normal(size=(1, 4))
    k = rng.normal(size=(3, 4))
    v = rng.normal(size=(3, 4))
    # explicit logits, explicit softmax, explicit weighted sum
    logits = np.array([[float(q[0] @ k[r]) / math.sqrt(4) for r in range(3)]])
    e = np.exp(logits - logits.max())
    w = e / e.sum()
    expected = sum(w[0, r] * v[r] for r in range(3))
    _, (qm, km, vm) = taped(q, k, v)
    out = ops.scaled_dot_attention(qm, km, vm, np.ones(3, dtype=bool))
    np.testing.assert_allclose(out.data[0], expected, rtol=1e-12)


def test_attention_uniform_logits_returns_mean_of_v_rows():
    rng = seeded_rng(5)
    v = rng.normal(size=(6, 3))
    _, (q, k, vm) = taped(np.zeros((1, 3)), rng.normal(size=(6, 3)), v)
    out = ops.scaled_dot_attention(q, k, vm, np.ones(6, dtype=bool))
    np.testing.assert_allclose(out.data[0], v.mean(axis=0), atol=1e-12)


def test_attention_mask_length_mismatch():
    _, (q, k, v) = taped(np.zeros((1, 4)), np.zeros((3, 4)), np.zeros((3, 4)))
    with pytest.raises(DimensionError):
        ops.scaled_dot_attention(q, k, v, np.ones(2, dtype=bool))


# ------------------------------------------------- per-primitive gradients


def _fd_case(name, builder, seeds=range(50)):
    worst = 0.0
    for seed in seeds:
        rng = seeded_rng(seed)
        store, f = builder(rng)
        worst = max(worst, finite_diff_check(f, store, h=1e-5))
    assert worst < 1e-4, f"{name}: max relative error {worst}"


def _store_with(rng, specs):
    store = ParamStore()
    for name, shape in specs:
        store.add(name, rng.normal(size=shape))
    return store


def test_gradients_affine_relu_chain():
    def builder(rng):
        store = _store_with(rng, [("x", (2, 3)), ("w", (3, 4)), ("b", (1, 4))])
        def f(s):
            bound = s.bind(Tape())
            return ops.mean_all(ops.relu(ops.affine(bound["x"], bound["w"], bound["b"])))
        return store, f
    _fd_case("affine+relu", builder)


def test_gradients_softmax():
    def builder(rng):
        store = _store_with(rng, [("x", (3, 5))])
        probe = rng.normal(size=(3, 5))
        def f(s):
            bound = s.bind(Tape())
            return ops.sum_all(ops.mul(ops.softmax_rows(bound["x"]), bound.constant(probe)))
        return store, f
    _fd_case("softmax", builder)


def test_gradients_attention_with_partial_mask():
    valid = np.array([True, True, False, True])
    def builder(rng):
        store = _store_with(rng, [("q", (1, 4)), ("k", (4, 4)), ("v", (4, 3))])
        probe = rng.normal(size=(1, 3))
        def f(s):
            bound = s.bind(Tape())
            att = ops.scaled_dot_attention(bound["q"], bound["k"], bound["v"], valid)
            return ops.sum_all(ops.mul(att, bound.constant(probe)))
        return store, f
    _fd_case("attention", builder)


def test_gradients_glue_ops():
    # concat, gather, logsigmoid, square, sub, scale in one composite
    def builder(rng):
        store = _store_with(rng, [("table", (5, 3)), ("a", (2, 3)), ("b", (2, 3))])
        def f(s):
            bound = s.bind(Tape())
            picked = ops.gather_rows(bound["table"], [4, 0])
            joined = ops.concat_cols([picked, ops.sub(bound["a"], bound["b"])])
            return ops.mean_all(ops.add(ops.logsigmoid(joined), ops.scale(ops.square(joined), 0.3)))
        return store, f
    _fd_case("glue", builder)


def test_gradients_concat_rows_matmul():
    def builder(rng):
        store = _store_with(rng, [("a", (1, 3)), ("b", (2, 3)), ("w", (3, 2))])
        def f(s):
            bound = s.bind(Tape())
            stacked = ops.concat_rows([bound["a"], bound["b"]])
            return ops.sum_all(ops.matmul(stacked, bound["w"]))
        return store, f
    _fd_case("concat_rows+matmul", builder)


# ---------------------------------------------------------------- adam


def test_adam_zero_gradient_leaves_parameter_and_moments_alone():
    store = ParamStore()
    p = store.add("w", [[1.0, 2.0]])
    adam_step(store, lr=0.1, step=1)
    np.testing.assert_array_equal(p.value, [[1.0, 2.0]])
    np.testing.assert_array_equal(p.m, np.zeros((1, 2)))
    np.testing.assert_array_equal(p.v, np.zeros((1, 2)))


def test_adam_first_step_matches_hand_evaluated_recurrence():
    # grad=1, step=1: m_hat=1, v_hat=1, update = -lr / (1 + eps)
    store = ParamStore()
    p = store.add("w", [[0.0]])
    p.grad[...] = 1.0
    adam_step(store, lr=1e-4, step=1)
    expected = -1e-4 * 1.0 / (1.0 + 1e-8)
    np.testing.assert_allclose(p.value, [[expected]], rtol=1e-12)
    assert abs(p.value[0, 0] + 1e-4) < 1e-10


def test_adam_frozen_entry_with_gradient_is_untouched():
    store = ParamStore()
    frozen = store.add("text_embedding", [[1.0, -1.0]], trainable=False)
    frozen.grad[...] = 5.0
    adam_step(store, lr=0.5, step=1)
    np.testing.assert_array_equal(frozen.value, [[1.0, -1.0]])
    np.testing.assert_array_equal(frozen.grad, np.zeros((1, 2)))  # still zeroed


def test_adam_nan_gradient_names_parameter():
    store = ParamStore()
    store.add("ok", [[1.0]])
    bad = store.add("gate.w1", [[1.0]])
    bad.grad[...] = np.nan
    with pytest.raises(TrainingDivergedError, match="gate.w1"):
        adam_step(store, lr=0.1, step=1)


def test_adam_run_is_bitwise_deterministic():
    def run():
        rng = seeded_rng(11)
        store = ParamStore()
        store.add("w", glorot_uniform(rng, 4, 4))
        for step in range(1, 6):
            tape = Tape()
            bound = store.bind(tape)
            out = ops.mean_all(ops.square(ops.relu(bound["w"])))
            tape.backward(out)
            adam_step(store, lr=1e-2, step=step)
        return store["w"].value.copy()

    a, b = run(), run()
    assert a.tobytes() == b.tobytes()


# ------------------------------------------------------- gradcheck harness


def test_finite_diff_quadratic_is_nearly_exact():
    store = ParamStore()
    store.add("theta", [[0.4, -1.2, 2.0]])
    def f(s):
        bound = s.bind(Tape())
        return ops.sum_all(ops.square(bound["theta"]))
    assert finite_diff_check(f, store) < 1e-9


def test_finite_diff_detects_corrupted_gradient():
    store = ParamStore()
    store.add("theta", [[0.4, -1.2]])

    def f(s):
        tape = Tape()
        bound = s.bind(tape)
        out = ops.sum_all(ops.square(bound["theta"]))
        # corrupt the analytic gradient by +0.1 on the side
        tape.record(lambda: s["theta"].grad.__iadd__(0.1))
        return out

    assert finite_diff_check(f, store) > 1e-2


# ------------------------------------------------------- store plumbing


def test_paramstore_rejects_duplicate_names():
    store = ParamStore()
    store.add("w", [[1.0]])
    with pytest.raises(ValueError, match="duplicate"):
        store.add("w", [[2.0]])


def test_paramstore_iteration_is_insertion_order():
    store = ParamStore()
    for name in ("z", "a", "m"):
        store.add(name, [[0.0]])
    assert store.names() == ["z", "a", "m"]


def test_bound_params_share_gradient_buffers():
    store = ParamStore()
    p = store.add("w", [[2.0]])
    tape = Tape()
    bound = store.bind(tape)
    out = ops.square(bound["w"])
    tape.backward(out)
    assert p.grad[0, 0] == 4.0  # d(w^2)/dw at w=2


def test_mixing_tapes_is_an_error():
    a = Matrix([[1.0]], Tape())
    b = Matrix([[1.0]], Tape())
    with pytest.raises(ValueError, match="different tapes"):
        ops.add(a, b)


def test_seeded_rng_reproduces_stream():
    a = seeded_rng(123).normal(size=8)
    b = seeded_rng(123).normal(size=8)
    np.testing.assert_array_equal(a, b)
