"""Tests for Phase 2: tape, primitives, backward and finite-difference checks."""

from __future__ import annotations

import numpy as np
import pytest

from raggednn import autodiff as ad
from raggednn.autodiff import Tape, Variable, away_from_kinks, backward, grad_check
from raggednn.exceptions import ContractError, DimensionError, NotRegisteredError, NumericError

TOLERANCE = 1e-5


def _weighted(out, seed: int = 1):
    weights = np.random.default_rng(seed).normal(size=out.shape)
    return ad.sum_all(out * out.tape.constant(weights))


def _grad_of(build, value) -> np.ndarray:
    x = Variable(np.asarray(value, dtype=np.float64), name="x")
    tape = Tape()
    backward(tape, build(tape.watch(x)))
    return x.grad


# --- Tape and backward ---


class TestTape:
    def test_watch_is_idempotent(self):
        x = Variable([[1.0]])
        tape = Tape()
        assert tape.watch(x).id == tape.watch(x).id
        assert len(tape) == 1

    def test_values_are_read_only(self):
        tape = Tape()
        node = tape.constant([[1.0, 2.0]])
        with pytest.raises(ValueError):
            node.value[0, 0] = 3.0

    def test_unknown_primitive(self):
        tape = Tape()
        with pytest.raises(NotRegisteredError, match="fft"):
            tape.apply("fft", [tape.constant([[1.0]])])

    def test_mixing_tapes_rejected(self):
        a = Tape().constant([[1.0]])
        b = Tape().constant([[2.0]])
        with pytest.raises(ContractError, match="another tape"):
            a + b

    def test_shape_mismatch(self):
        tape = Tape()
        with pytest.raises(DimensionError, match="add"):
            tape.constant([[1.0, 2.0]]) + tape.constant([[1.0]])

    def test_backward_needs_scalar(self):
        tape = Tape()
        x = tape.watch(Variable([[1.0, 2.0]]))
        with pytest.raises(ContractError, match="scalar"):
            backward(tape, ad.relu(x))

    def test_constants_get_no_gradient(self):
        tape = Tape()
        c = tape.constant([[2.0]])
        x = tape.watch(Variable([[3.0]]))
        grads = backward(tape, ad.sum_all(c * x))
        assert c.id not in grads
        np.testing.assert_allclose(grads[x.id], [[2.0]])

    def test_fan_out_accumulates(self):
        grad = _grad_of(lambda x: ad.sum_all(x + x), [[1.5]])
        np.testing.assert_allclose(grad, [[2.0]])

    def test_variable_grad_accumulates_until_zeroed(self):
        x = Variable([[3.0]])
        for _ in range(2):
            tape = Tape()
            backward(tape, ad.sum_all(ad.square(tape.watch(x))))
        np.testing.assert_allclose(x.grad, [[12.0]])
        x.zero_grad()
        np.testing.assert_array_equal(x.grad, [[0.0]])


# --- Primitive rules ---


class TestPrimitives:
    def test_relu_backward(self):
        grad = _grad_of(lambda x: ad.sum_all(ad.relu(x)), [[-1.0, 2.0]])
        np.testing.assert_array_equal(grad, [[0.0, 1.0]])

    def test_relu_at_zero(self):
        grad = _grad_of(lambda x: ad.sum_all(ad.relu(x)), [[0.0]])
        np.testing.assert_array_equal(grad, [[0.0]])

    def test_sigmoid_at_origin(self):
        grad = _grad_of(lambda x: ad.sum_all(ad.sigmoid(x)), [[0.0]])
        np.testing.assert_allclose(grad, [[0.25]])

    def test_shifted_softplus_is_zero_at_origin(self):
        tape = Tape()
        out = ad.shifted_softplus(tape.constant([[0.0]]))
        np.testing.assert_allclose(out.value, [[0.0]], atol=1e-15)

    def test_matmul_shapes(self):
        tape = Tape()
        with pytest.raises(DimensionError, match="matmul"):
            tape.constant(np.ones((2, 3))) @ tape.constant(np.ones((2, 3)))

    def test_bias_add_broadcasts_row(self):
        tape = Tape()
        out = ad.bias_add(tape.constant([[1.0, 1.0], [2.0, 2.0]]), np.array([1.0, -1.0]))
        np.testing.assert_array_equal(out.value, [[2.0, 0.0], [3.0, 1.0]])

    def test_concat_row_mismatch(self):
        tape = Tape()
        with pytest.raises(DimensionError, match="row counts"):
            ad.concat([tape.constant(np.ones((2, 1))), tape.constant(np.ones((3, 1)))])

    def test_slice_out_of_range(self):
        tape = Tape()
        with pytest.raises(DimensionError):
            ad.slice_columns(tape.constant(np.ones((1, 2))), 1, 4)

    def test_segment_max_gradient_goes_to_lowest_tied_row(self):
        grad = _grad_of(
            lambda x: ad.sum_all(ad.segment_max(x, [0, 0, 0], 1)), [[2.0], [2.0], [1.0]]
        )
        np.testing.assert_array_equal(grad, [[1.0], [0.0], [0.0]])

    def test_segment_mean_gradient(self):
        grad = _grad_of(lambda x: ad.sum_all(ad.segment_mean(x, [0, 0, 1], 3)), np.ones((3, 1)))
        np.testing.assert_allclose(grad, [[0.5], [0.5], [1.0]])

    def test_unknown_reducer(self):
        tape = Tape()
        with pytest.raises(NotRegisteredError, match="median"):
            ad.segment_reduce(tape.constant([[1.0]]), [0], 1, "median")

    def test_mean_all_of_empty_is_zero(self):
        tape = Tape()
        np.testing.assert_array_equal(ad.mean_all(tape.constant(np.zeros((0, 3)))).value, [[0.0]])

    def test_normalize_zero_vector(self):
        tape = Tape()
        with pytest.raises(ContractError, match="zero norm"):
            ad.normalize(tape.constant([[0.0], [0.0]]))

    def test_cross_entropy_uniform(self):
        tape = Tape()
        loss = ad.softmax_cross_entropy(tape.constant([[0.0, 0.0]]), [0])
        np.testing.assert_allclose(loss.value, [[np.log(2.0)]])

    def test_cross_entropy_label_range(self):
        tape = Tape()
        with pytest.raises(DimensionError, match="labels"):
            ad.softmax_cross_entropy(tape.constant([[0.0, 0.0]]), [2])


# --- Finite differences ---


UNARY_CASES = {
    "relu": ad.relu,
    "sigmoid": ad.sigmoid,
    "tanh": ad.tanh,
    "softplus": ad.softplus,
    "shifted_softplus": ad.shifted_softplus,
    "abs": ad.absolute,
    "square": ad.square,
    "row_sum": ad.row_sum,
    "mean_all": ad.mean_all,
    "normalize": ad.normalize,
    "scale": lambda x: ad.scale(x, -2.5),
    "slice_columns": lambda x: ad.slice_columns(x, 1, 3),
    "gather_rows": lambda x: ad.gather_rows(x, [4, 0, 0, 2]),
    "segment_sum": lambda x: ad.segment_sum(x, [1, 0, 1, 3, 1], 4),
    "segment_mean": lambda x: ad.segment_mean(x, [1, 0, 1, 3, 1], 4),
    "segment_max": lambda x: ad.segment_max(x, [1, 0, 1, 3, 1], 4),
    "segment_softmax": lambda x: ad.segment_softmax(x, [1, 0, 1, 3, 1], 4),
    "cross_entropy": lambda x: ad.softmax_cross_entropy(x, [0, 2, 1, 1, 0]),
}


class TestGradCheck:
    def test_square_at_three(self):
        x = Variable([[3.0]])
        err = grad_check(lambda tape: ad.sum_all(ad.square(tape.watch(x))), [x])
        assert err <= 1e-9

    def test_error_is_builtin_float(self):
        x = Variable([[-2.0, 0.5]])
        err = grad_check(lambda tape: ad.sum_all(ad.absolute(tape.watch(x))), [x])
        assert isinstance(err, float)
        assert err <= 1e-7

    def test_absolute_does_not_shadow_builtin(self):
        assert not hasattr(ad, "abs")
        assert abs(-1.5) == 1.5

    @pytest.mark.parametrize("name", sorted(UNARY_CASES))
    def test_unary_primitives(self, name):
        op = UNARY_CASES[name]
        x = Variable(away_from_kinks(np.random.default_rng(3).normal(size=(5, 3))), name=name)
        err = grad_check(lambda tape: _weighted(op(tape.watch(x))), [x])
        assert err <= TOLERANCE

    def test_binary_primitives(self):
        rng = np.random.default_rng(4)
        a = Variable(rng.normal(size=(4, 3)), name="a")
        b = Variable(rng.normal(size=(4, 3)), name="b")
        w = Variable(rng.normal(size=(3, 2)), name="w")
        bias = Variable(rng.normal(size=2), name="bias")
        r = Variable(rng.normal(size=(4, 1)), name="r")

        def f(tape):
            x, y = tape.watch(a), tape.watch(b)
            mixed = ad.concat([x * y - y, x + y])
            proj = ad.bias_add(ad.slice_columns(mixed, 0, 3) @ tape.watch(w), tape.watch(bias))
            return _weighted(ad.scale_rows(proj, tape.watch(r)))

        assert grad_check(f, [a, b, w, bias, r]) <= TOLERANCE

    def test_non_scalar_function_rejected(self):
        x = Variable([[1.0, 2.0]])
        with pytest.raises(ContractError):
            grad_check(lambda tape: ad.relu(tape.watch(x)), [x])

    def test_non_finite_function_rejected(self):
        x = Variable([[1.0]])
        with pytest.raises(NumericError):
            grad_check(lambda tape: ad.sum_all(tape.watch(x) * tape.constant([[np.inf]])), [x])

    def test_away_from_kinks(self):
        out = away_from_kinks([0.0, -0.001, 0.5], margin=0.01)
        np.testing.assert_array_equal(out, [0.01, -0.01, 0.5])
