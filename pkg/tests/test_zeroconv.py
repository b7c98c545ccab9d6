"""Control-branch tests: convolution against a naive loop oracle, the
zero-initialization identity, gradient order and correctness, locked
weight immutability, and the training loop's logged dynamics."""

from __future__ import annotations

import math

import numpy as np
import pytest

from triart.zeroconv import (
    ACTIVATIONS,
    ControlNetBlock,
    NetBlock,
    TrainConfig,
    TrainingDiverged,
    ZeroConv,
    _conv3x3,
    _conv3x3_backward,
    _pearson,
    _silu,
    _silu_grad,
    control_to_condition,
    finite_difference_check,
    infer,
    init_controlnet,
    load_checkpoint,
    make_toy_task,
    run_verification,
    save_checkpoint,
    train_toy,
)
from triart.raster import Raster


def naive_conv3x3(x, w, b):
    """Triple-loop cross-correlation with zero padding, the reference for
    the vectorized implementation."""
    in_ch, h, wid = x.shape
    out_ch = w.shape[0]
    out = np.zeros((out_ch, h, wid))
    for o in range(out_ch):
        for y in range(h):
            for xx in range(wid):
                acc = 0.0
                for i in range(in_ch):
                    for ky in range(3):
                        for kx in range(3):
                            sy, sx = y + ky - 1, xx + kx - 1
                            if 0 <= sy < h and 0 <= sx < wid:
                                acc += x[i, sy, sx] * w[o, i, ky, kx]
                out[o, y, xx] = acc + b[o]
    return out


def random_block(channels: int, rng, scale: float = 0.5) -> NetBlock:
    return NetBlock.random(channels, rng, scale=scale)


def randomized_controlnet(rng, channels=3, cond=2) -> ControlNetBlock:
    """Control branch with every weight randomized, including the zero
    convolutions, so gradient checks exercise all paths."""
    cb = init_controlnet(random_block(channels, rng), cond)
    cb.z1.weight.value[...] = rng.standard_normal(cb.z1.weight.value.shape) * 0.3
    cb.z1.bias.value[...] = rng.standard_normal(cb.z1.bias.value.shape) * 0.1
    cb.z2.weight.value[...] = rng.standard_normal(cb.z2.weight.value.shape) * 0.3
    cb.z2.bias.value[...] = rng.standard_normal(cb.z2.bias.value.shape) * 0.1
    return cb


# --------------------------------------------------------------------------
# primitives
# --------------------------------------------------------------------------

def test_silu_reference_points():
    assert _silu(np.array([0.0]))[0] == 0.0
    assert _silu(np.array([30.0]))[0] == pytest.approx(30.0, abs=1e-9)
    assert _silu(np.array([-30.0]))[0] == pytest.approx(0.0, abs=1e-9)
    x = np.array([1.7])
    assert _silu(x)[0] == pytest.approx(1.7 / (1 + math.exp(-1.7)), abs=1e-12)


def test_silu_grad_matches_numeric_derivative():
    xs = np.linspace(-6, 6, 41)
    eps = 1e-6
    numeric = (_silu(xs + eps) - _silu(xs - eps)) / (2 * eps)
    assert np.allclose(_silu_grad(xs), numeric, atol=1e-8)


def test_activation_registry_pairs_are_consistent():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(100)
    eps = 1e-6
    for name, (fn, grad) in ACTIVATIONS.items():
        numeric = (fn(x + eps) - fn(x - eps)) / (2 * eps)
        assert np.allclose(grad(x), numeric, atol=1e-7), name


def test_conv3x3_matches_naive_loop():
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.standard_normal((2, 5, 6))
        w = rng.standard_normal((3, 2, 3, 3))
        b = rng.standard_normal(3)
        assert np.allclose(_conv3x3(x, w, b), naive_conv3x3(x, w, b), atol=1e-12)


def test_conv3x3_center_tap_is_identity():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((1, 4, 4))
    w = np.zeros((1, 1, 3, 3))
    w[0, 0, 1, 1] = 1.0
    assert np.allclose(_conv3x3(x, w, np.zeros(1)), x)


def test_conv3x3_backward_is_adjoint():
    """<dy, conv(x)> == <x, backward(dy)> for bias-free convolution; this
    pins the transpose derivation (padding, kernel flip, crop) exactly."""
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.standard_normal((2, 6, 5))
        w = rng.standard_normal((4, 2, 3, 3))
        dy = rng.standard_normal((4, 6, 5))
        y = _conv3x3(x, w, np.zeros(4))
        dx, _, _ = _conv3x3_backward(x, w, dy)
        assert np.dot(dy.ravel(), y.ravel()) == pytest.approx(
            np.dot(x.ravel(), dx.ravel()), rel=1e-10
        )


def test_conv3x3_backward_weight_grad_matches_fd():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((2, 4, 4))
    w = rng.standard_normal((2, 2, 3, 3))
    b = rng.standard_normal(2)
    g = rng.standard_normal((2, 4, 4))
    _, dw, db = _conv3x3_backward(x, w, g)
    eps = 1e-6
    for idx in [(0, 0, 0, 0), (1, 0, 1, 1), (0, 1, 2, 2), (1, 1, 0, 2)]:
        wp, wm = w.copy(), w.copy()
        wp[idx] += eps
        wm[idx] -= eps
        numeric = (
            np.sum(g * _conv3x3(x, wp, b)) - np.sum(g * _conv3x3(x, wm, b))
        ) / (2 * eps)
        assert dw[idx] == pytest.approx(numeric, rel=1e-5, abs=1e-8)
    assert np.allclose(db, g.sum(axis=(1, 2)))


def test_netblock_forward_is_conv_act_conv():
    rng = np.random.default_rng(5)
    block = random_block(3, rng)
    x = rng.standard_normal((3, 5, 5))
    hidden = naive_conv3x3(x, block.w1.value, block.b1.value)
    expect = naive_conv3x3(_silu(hidden), block.w2.value, block.b2.value)
    assert np.allclose(block.forward(x), expect, atol=1e-10)


def test_netblock_identity_activation_is_linear():
    rng = np.random.default_rng(6)
    block = NetBlock.random(2, rng, scale=0.5, activation="identity")
    block.b1.value[...] = 0.0
    block.b2.value[...] = 0.0
    x1 = rng.standard_normal((2, 4, 4))
    x2 = rng.standard_normal((2, 4, 4))
    assert np.allclose(
        block.forward(x1 + x2), block.forward(x1) + block.forward(x2), atol=1e-10
    )


def test_zeroconv_initializes_to_exact_zero():
    z = ZeroConv(3, 5)
    assert not z.weight.value.any()
    assert not z.bias.value.any()
    x = np.random.default_rng(7).standard_normal((3, 6, 6))
    assert not z.forward(x).any()


def test_zeroconv_forward_is_per_pixel_linear_map():
    rng = np.random.default_rng(8)
    z = ZeroConv(2, 3)
    z.weight.value[...] = rng.standard_normal((3, 2, 1, 1))
    z.bias.value[...] = rng.standard_normal(3)
    x = rng.standard_normal((2, 4, 4))
    out = z.forward(x)
    for y in range(4):
        for xx in range(4):
            expect = z.weight.value[:, :, 0, 0] @ x[:, y, xx] + z.bias.value
            assert np.allclose(out[:, y, xx], expect, atol=1e-12)


# --------------------------------------------------------------------------
# the zero-initialization identity and gradient order
# --------------------------------------------------------------------------

def test_fresh_control_branch_is_exact_identity():
    rng = np.random.default_rng(9)
    for _ in range(20):
        cb = init_controlnet(random_block(4, rng, scale=1.0), 2)
        x = rng.standard_normal((4, 8, 8))
        c = rng.standard_normal((2, 8, 8))
        y, y_c, _ = cb.forward_parts(x, c)
        assert np.array_equal(y, y_c)
        assert np.allclose(y, cb.locked.forward(x), atol=0)


def test_gradients_unlock_outermost_first():
    """At zero init only the outer zero conv sees nonzero gradient; the
    inner one and the copy are blocked until the outer weights move."""
    rng = np.random.default_rng(10)
    task = make_toy_task(3)
    cb = init_controlnet(task.locked, task.cond_channels)
    x, c, y_star = task.sample(rng)
    _, y_c, cache = cb.forward_parts(x, c)
    cb.zero_grads()
    cb.backward_from_cache(cache, 2 * (y_c - y_star) / y_c.size)

    named = dict(cb.all_params())
    assert np.abs(named["z2.weight"].grad).max() > 0
    assert not named["z1.weight"].grad.any()
    assert not named["z1.bias"].grad.any()
    for name, p in cb.copy.params():
        assert not named[f"copy.{name}"].grad.any()

    # One SGD step on what has gradient, then the copy unblocks.
    for _, p in cb.trainable_params():
        p.value -= 0.05 * p.grad
    _, y_c, cache = cb.forward_parts(x, c)
    cb.zero_grads()
    cb.backward_from_cache(cache, 2 * (y_c - y_star) / y_c.size)
    assert max(np.abs(p.grad).max() for _, p in cb.copy.params()) > 0


def test_finite_difference_on_randomized_branch():
    rng = np.random.default_rng(11)
    cb = randomized_controlnet(rng)
    x = rng.standard_normal((3, 6, 6))
    c = rng.standard_normal((2, 6, 6))
    errors = finite_difference_check(cb, x, c, rng)
    worst = max(errors.values())
    assert worst < 1e-6, errors


def test_input_gradients_match_fd():
    rng = np.random.default_rng(12)
    cb = randomized_controlnet(rng)
    x = rng.standard_normal((3, 5, 5))
    c = rng.standard_normal((2, 5, 5))
    g = rng.standard_normal((3, 5, 5))
    _, y_c, cache = cb.forward_parts(x, c)
    cb.zero_grads()
    dx, dc = cb.backward_from_cache(cache, g)
    eps = 1e-6
    for arr, grad, tag in ((x, dx, "x"), (c, dc, "c")):
        flat = arr.reshape(-1)
        for idx in rng.choice(flat.size, size=6, replace=False):
            orig = flat[idx]
            flat[idx] = orig + eps
            up = float(np.sum(g * cb.forward(x, c)))
            flat[idx] = orig - eps
            down = float(np.sum(g * cb.forward(x, c)))
            flat[idx] = orig
            numeric = (up - down) / (2 * eps)
            assert grad.reshape(-1)[idx] == pytest.approx(
                numeric, rel=1e-4, abs=1e-8
            ), tag


def test_locked_weights_never_move():
    task = make_toy_task(1)
    cb = init_controlnet(task.locked, task.cond_channels)
    before = {name: p.value.tobytes() for name, p in cb.locked.params()}
    train_toy(cb, task, TrainConfig(steps=50, seed=0))
    for name, p in cb.locked.params():
        assert p.value.tobytes() == before[name], name


def test_locked_flag_excluded_from_trainables():
    cb = init_controlnet(random_block(2, np.random.default_rng(13)), 2)
    trainable = {name for name, _ in cb.trainable_params()}
    assert not any(name.startswith("locked.") for name in trainable)
    assert {"z1.weight", "z1.bias", "z2.weight", "z2.bias"} <= trainable
    assert any(name.startswith("copy.") for name in trainable)


# --------------------------------------------------------------------------
# training dynamics
# --------------------------------------------------------------------------

def test_zero_learning_rate_keeps_loss_constant():
    task = make_toy_task(2)
    cb = init_controlnet(task.locked, task.cond_channels)
    log = train_toy(cb, task, TrainConfig(steps=10, learning_rate=0.0, seed=4))
    losses = {row.loss for row in log.rows}
    assert len(losses) > 0
    first = log.rows[0].loss
    for row in log.rows:
        assert row.loss == pytest.approx(first, rel=1e-12)


def test_training_reduces_loss_short_horizon():
    task = make_toy_task(7)
    cb = init_controlnet(task.locked, task.cond_channels)
    log = train_toy(cb, task, TrainConfig(steps=120, seed=7))
    assert log.rows[-1].loss < 0.6 * log.rows[0].loss
    # Regression anchors for the pinned dynamics; training is fully
    # deterministic, so drift here means the task construction or the
    # update rule changed.
    assert log.rows[0].loss == pytest.approx(4.969290809032809, rel=1e-9)
    assert log.rows[-1].loss == pytest.approx(1.0684943346074465, rel=1e-9)


def test_step_zero_fidelity_is_zero_by_convention():
    task = make_toy_task(5)
    cb = init_controlnet(task.locked, task.cond_channels)
    log = train_toy(cb, task, TrainConfig(steps=1, seed=0))
    assert log.rows[0].condition_fidelity == 0.0


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_training_diverges_raises():
    task = make_toy_task(7)
    cb = init_controlnet(task.locked, task.cond_channels)
    with pytest.raises(TrainingDiverged):
        train_toy(cb, task, TrainConfig(steps=200, learning_rate=1e6, seed=0))


def test_log_every_thins_rows():
    task = make_toy_task(6)
    cb = init_controlnet(task.locked, task.cond_channels)
    log = train_toy(cb, task, TrainConfig(steps=30, seed=0, log_every=10))
    assert [row.step for row in log.rows] == [0, 10, 20]


def test_train_log_csv_round_trips(tmp_path):
    task = make_toy_task(6)
    cb = init_controlnet(task.locked, task.cond_channels)
    log = train_toy(cb, task, TrainConfig(steps=5, seed=0))
    path = tmp_path / "log.csv"
    log.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "step,loss,condition_fidelity"
    assert len(lines) == 1 + len(log.rows)
    for line, row in zip(lines[1:], log.rows):
        step, loss, fid = line.split(",")
        assert int(step) == row.step
        assert float(loss) == row.loss
        assert float(fid) == row.condition_fidelity


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(steps=0)
    with pytest.raises(ValueError):
        TrainConfig(steps=1, batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(steps=1, learning_rate=-0.1)
    TrainConfig(steps=1, learning_rate=0.0)  # explicitly allowed


def test_pearson_reference_points():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    assert _pearson(a, 2 * a + 5) == pytest.approx(1.0, abs=1e-12)
    assert _pearson(a, -a) == pytest.approx(-1.0, abs=1e-12)
    assert _pearson(a, np.zeros(4)) == 0.0


def test_toy_task_sample_shapes_and_composition():
    task = make_toy_task(9)
    rng = np.random.default_rng(0)
    x, c, y_star = task.sample(rng)
    assert x.shape == (4, 8, 8)
    assert c.shape == (2, 8, 8)
    assert y_star.shape == (4, 8, 8)
    assert np.allclose(
        y_star, task.locked.forward(x) + task.conditional_component(c), atol=1e-12
    )


def test_toy_task_zero_condition_reduces_to_locked_block():
    task = make_toy_task(9)
    assert not task.conditional_component(np.zeros((2, 8, 8))).any()
    x = np.random.default_rng(1).standard_normal((4, 8, 8))
    y_star = task.locked.forward(x) + task.conditional_component(np.zeros((2, 8, 8)))
    assert np.array_equal(y_star, task.locked.forward(x))


def test_toy_task_same_seed_is_identical():
    a, b = make_toy_task(42), make_toy_task(42)
    assert np.array_equal(a.hidden_map, b.hidden_map)
    for (name, pa), (_, pb) in zip(a.locked.params(), b.locked.params()):
        assert pa.value.tobytes() == pb.value.tobytes(), name


def test_expected_hidden_power_matches_monte_carlo():
    """The analytic per-element power of the conditional term agrees with
    a 10,000-sample estimate within 5%."""
    task = make_toy_task(4)
    rng = np.random.default_rng(99)
    total = 0.0
    for _ in range(10):
        c = rng.standard_normal((1000, task.cond_channels, 8, 8))
        out = np.einsum("oi,nihw->nohw", task.hidden_map, c)
        total += float((out * out).mean())
    assert total / 10 == pytest.approx(task.expected_hidden_power(), rel=0.05)


# --------------------------------------------------------------------------
# inference helpers and checkpoints
# --------------------------------------------------------------------------

def test_control_to_condition_shape_range_and_cycling():
    arr = np.random.default_rng(14).integers(0, 256, size=(16, 12, 3), dtype=np.uint8)
    cond = control_to_condition(Raster(arr), channels=4, height=8, width=8)
    assert cond.shape == (4, 8, 8)
    assert cond.min() >= 0.0 and cond.max() <= 1.0
    assert np.array_equal(cond[3], cond[0])  # channel index wraps mod 3


def test_control_to_condition_uniform_image():
    arr = np.full((10, 10, 3), 51, dtype=np.uint8)
    cond = control_to_condition(Raster(arr), channels=2, height=4, width=4)
    assert np.allclose(cond, 51 / 255.0)


def test_infer_runs_forward_on_condition(tmp_path):
    task = make_toy_task(7)
    cb = init_controlnet(task.locked, task.cond_channels)
    rng = np.random.default_rng(1)
    x = rng.standard_normal((task.channels, 8, 8))
    arr = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
    out = infer(cb, Raster(arr), x)
    assert out.shape == x.shape
    # Fresh branch: control has no effect yet.
    assert np.array_equal(out, cb.locked.forward(x))


def test_checkpoint_round_trip_bitwise(tmp_path):
    task = make_toy_task(7)
    cb = init_controlnet(task.locked, task.cond_channels)
    train_toy(cb, task, TrainConfig(steps=20, seed=3))
    path = tmp_path / "ckpt.npz"
    save_checkpoint(cb, path)
    loaded = load_checkpoint(path)
    orig = dict(cb.all_params())
    for name, p in loaded.all_params():
        assert p.value.tobytes() == orig[name].value.tobytes(), name
        assert p.locked == orig[name].locked, name
    x = np.random.default_rng(2).standard_normal((4, 8, 8))
    c = np.random.default_rng(3).standard_normal((2, 8, 8))
    assert np.array_equal(loaded.forward(x, c), cb.forward(x, c))


# --------------------------------------------------------------------------
# bundled verification
# --------------------------------------------------------------------------

def test_run_verification_all_pass():
    checks = run_verification(seed=0)
    names = [c.name for c in checks]
    assert names == [
        "init_identity",
        "gradient_unlocking_order",
        "finite_difference",
        "locked_immutability",
    ]
    for check in checks:
        assert check.passed, f"{check.name}: {check.detail}"
