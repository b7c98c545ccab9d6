"""Toy-scale conditioning block: locked network, trainable copy, zero convolutions.

A pre-trained block F(.; theta) stays frozen while a value-equal trainable
copy receives the block input plus a zero-initialized 1x1 projection of a
conditioning tensor; a second zero-initialized 1x1 convolution injects the
copy's output back into the locked output:

    y_c = F(x) + z2(F_copy(x + z1(c)))

Both 1x1 convolutions start with weight and bias exactly zero, so the
conditioned output equals the locked output at initialization, and the
conditioning pathway unlocks gradually: first z2's parameters receive
gradient, then (once z2 is nonzero) the copy and z1.

Everything runs in float64 with handwritten reverse-mode gradients so the
identities above and finite-difference agreement can be asserted at tight
tolerances.  Feature maps are rank-3 arrays (channels, height, width).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .raster import Raster


# --------------------------------------------------------------------------
# activations
# --------------------------------------------------------------------------

def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _silu(x: np.ndarray) -> np.ndarray:
    return x * _sigmoid(x)


def _silu_grad(x: np.ndarray) -> np.ndarray:
    s = _sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


#: name -> (f, df/dx); the nonlinearity is smooth so finite differences are clean.
ACTIVATIONS = {
    "silu": (_silu, _silu_grad),
    "identity": (lambda x: x, lambda x: np.ones_like(x)),
}


# --------------------------------------------------------------------------
# parameters and convolution primitives
# --------------------------------------------------------------------------

@dataclass
class Param:
    value: np.ndarray
    grad: np.ndarray
    locked: bool = False

    @classmethod
    def of(cls, value: np.ndarray, locked: bool = False) -> Param:
        value = np.asarray(value, dtype=np.float64)
        return cls(value=value, grad=np.zeros_like(value), locked=locked)

    def clone(self, locked: bool = False) -> Param:
        return Param(value=self.value.copy(), grad=np.zeros_like(self.value), locked=locked)


def _conv3x3(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (3, 3), axis=(1, 2))
    return np.einsum("ihwkl,oikl->ohw", win, w, optimize=True) + b[:, None, None]


def _conv3x3_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (3, 3), axis=(1, 2))
    dw = np.einsum("ihwkl,ohw->oikl", win, dy, optimize=True)
    db = dy.sum(axis=(1, 2))
    dyp = np.pad(dy, ((0, 0), (2, 2), (2, 2)))
    win_dy = sliding_window_view(dyp, (3, 3), axis=(1, 2))
    wf = w[:, :, ::-1, ::-1]
    dxp = np.einsum("ohwkl,oikl->ihw", win_dy, wf, optimize=True)
    h, w_ = x.shape[1], x.shape[2]
    return np.ascontiguousarray(dxp[:, 1 : h + 1, 1 : w_ + 1]), dw, db


def _check_input(x: np.ndarray, channels: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] != channels:
        raise ValueError(f"{what}: expected ({channels}, H, W) tensor, got {x.shape}")
    return x


class NetBlock:
    """conv3x3(pad 1) -> nonlinearity -> conv3x3(pad 1), equal channel counts.

    Equal input/output channels keep the block's output shape-compatible
    with its input, so a conditioned branch can be added to it.
    """

    def __init__(self, channels: int, activation: str = "silu"):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.channels = channels
        self.activation = activation
        self.w1 = Param.of(np.zeros((channels, channels, 3, 3)))
        self.b1 = Param.of(np.zeros(channels))
        self.w2 = Param.of(np.zeros((channels, channels, 3, 3)))
        self.b2 = Param.of(np.zeros(channels))

    @classmethod
    def random(
        cls,
        channels: int,
        rng: np.random.Generator,
        scale: float = 1.0,
        activation: str = "silu",
    ) -> NetBlock:
        """Gaussian init with He-style fan-in scaling, standing in for a
        pre-trained block."""
        block = cls(channels, activation)
        std = scale / math.sqrt(channels * 9)
        for w in (block.w1, block.w2):
            w.value[...] = rng.standard_normal(w.value.shape) * std
        for b in (block.b1, block.b2):
            b.value[...] = rng.standard_normal(b.value.shape) * (0.1 * scale)
        return block

    def params(self) -> list[tuple[str, Param]]:
        return [("w1", self.w1), ("b1", self.b1), ("w2", self.w2), ("b2", self.b2)]

    def clone(self) -> NetBlock:
        other = NetBlock(self.channels, self.activation)
        for (_, src), (_, dst) in zip(self.params(), other.params()):
            dst.value[...] = src.value
        return other

    def lock(self) -> None:
        for _, p in self.params():
            p.locked = True

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cache(x)
        return y

    def forward_cache(self, x: np.ndarray) -> tuple[np.ndarray, dict]:
        x = _check_input(x, self.channels, "block input")
        f, _ = ACTIVATIONS[self.activation]
        pre = _conv3x3(x, self.w1.value, self.b1.value)
        act = f(pre)
        y = _conv3x3(act, self.w2.value, self.b2.value)
        return y, {"x": x, "pre": pre, "act": act}

    def backward(self, cache: dict, dy: np.ndarray, accumulate: bool = True) -> np.ndarray:
        """Backprop dy through the block; returns d(input).

        With accumulate=False the parameter gradients are discarded, which
        is how the locked branch is handled.
        """
        _, df = ACTIVATIONS[self.activation]
        dact, dw2, db2 = _conv3x3_backward(cache["act"], self.w2.value, dy)
        dpre = dact * df(cache["pre"])
        dx, dw1, db1 = _conv3x3_backward(cache["x"], self.w1.value, dpre)
        if accumulate:
            self.w1.grad += dw1
            self.b1.grad += db1
            self.w2.grad += dw2
            self.b2.grad += db2
        return dx


class ZeroConv:
    """1x1 convolution whose weight and bias start exactly at zero."""

    def __init__(self, in_channels: int, out_channels: int):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.weight = Param.of(np.zeros((out_channels, in_channels, 1, 1)))
        self.bias = Param.of(np.zeros(out_channels))

    def params(self) -> list[tuple[str, Param]]:
        return [("weight", self.weight), ("bias", self.bias)]

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = _check_input(x, self.in_channels, "zero-conv input")
        w2d = self.weight.value[:, :, 0, 0]
        return np.einsum("oi,ihw->ohw", w2d, x) + self.bias.value[:, None, None]

    def backward(self, x: np.ndarray, dy: np.ndarray, accumulate: bool = True) -> np.ndarray:
        w2d = self.weight.value[:, :, 0, 0]
        if accumulate:
            self.weight.grad[:, :, 0, 0] += np.einsum("ohw,ihw->oi", dy, x)
            self.bias.grad += dy.sum(axis=(1, 2))
        return np.einsum("oi,ohw->ihw", w2d, dy)


# --------------------------------------------------------------------------
# the conditioned block
# --------------------------------------------------------------------------

class ControlNetBlock:
    """Locked block, trainable copy, and the two zero convolutions."""

    def __init__(self, locked: NetBlock, copy: NetBlock, z1: ZeroConv, z2: ZeroConv):
        self.locked = locked
        self.copy = copy
        self.z1 = z1
        self.z2 = z2

    @property
    def channels(self) -> int:
        return self.locked.channels

    @property
    def cond_channels(self) -> int:
        return self.z1.in_channels

    def all_params(self) -> list[tuple[str, Param]]:
        out = []
        for prefix, owner in (
            ("locked", self.locked),
            ("copy", self.copy),
            ("z1", self.z1),
            ("z2", self.z2),
        ):
            out += [(f"{prefix}.{name}", p) for name, p in owner.params()]
        return out

    def trainable_params(self) -> list[tuple[str, Param]]:
        return [(name, p) for name, p in self.all_params() if not p.locked]

    def zero_grads(self) -> None:
        for _, p in self.all_params():
            p.grad[...] = 0.0

    def forward(self, x: np.ndarray, c: np.ndarray) -> np.ndarray:
        _, y_c, _ = self.forward_parts(x, c)
        return y_c

    def forward_parts(
        self, x: np.ndarray, c: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, dict]:
        """Returns (locked output y, conditioned output y_c, backward cache)."""
        x = _check_input(x, self.channels, "input")
        c = _check_input(c, self.cond_channels, "condition")
        if c.shape[1:] != x.shape[1:]:
            raise ValueError(f"condition spatial dims {c.shape[1:]} != input {x.shape[1:]}")
        y, locked_cache = self.locked.forward_cache(x)
        z1_out = self.z1.forward(c)
        u1 = x + z1_out
        u2, copy_cache = self.copy.forward_cache(u1)
        y_c = y + self.z2.forward(u2)
        cache = {
            "c": c,
            "u1": u1,
            "u2": u2,
            "locked": locked_cache,
            "copy": copy_cache,
        }
        return y, y_c, cache

    def backward_from_cache(
        self, cache: dict, upstream: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Accumulate trainable-parameter gradients; return (dx, dc).

        The locked branch's parameter gradients are skipped (never stored,
        never applied); its input gradient still contributes to dx.
        """
        du2 = self.z2.backward(cache["u2"], upstream)
        du1 = self.copy.backward(cache["copy"], du2)
        dc = self.z1.backward(cache["c"], du1)
        dx_locked = self.locked.backward(cache["locked"], upstream, accumulate=False)
        return dx_locked + du1, dc

    def backward(
        self, x: np.ndarray, c: np.ndarray, upstream: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Forward + reverse pass in one call; see backward_from_cache."""
        _, y_c, cache = self.forward_parts(x, c)
        if np.shape(upstream) != y_c.shape:
            raise ValueError(f"upstream shape {np.shape(upstream)} != output {y_c.shape}")
        return self.backward_from_cache(cache, np.asarray(upstream, dtype=np.float64))


def init_controlnet(locked: NetBlock, cond_channels: int = 2) -> ControlNetBlock:
    """Lock the given block, clone it as the trainable copy, attach fresh
    zero convolutions.  The conditioned forward equals the locked forward
    exactly until z2 moves off zero."""
    locked.lock()
    copy = locked.clone()
    z1 = ZeroConv(cond_channels, locked.channels)
    z2 = ZeroConv(locked.channels, locked.channels)
    return ControlNetBlock(locked, copy, z1, z2)


# --------------------------------------------------------------------------
# toy task and training
# --------------------------------------------------------------------------

@dataclass
class ToyTask:
    """Synthetic conditioning task the locked block cannot solve alone.

    Targets are y* = F_locked(x) + M @ c with a fixed hidden channel-mixing
    map M (a 1x1 convolution).  With c present the locked block's best
    possible loss is the power of the hidden component; a branch that
    recovers M @ c can drive the loss toward zero.
    """

    locked: NetBlock
    hidden_map: np.ndarray  # (channels, cond_channels)
    channels: int
    cond_channels: int
    size: int
    seed: int

    def conditional_component(self, c: np.ndarray) -> np.ndarray:
        return np.einsum("oi,ihw->ohw", self.hidden_map, c)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = rng.standard_normal((self.channels, self.size, self.size))
        c = rng.standard_normal((self.cond_channels, self.size, self.size))
        y_star = self.locked.forward(x) + self.conditional_component(c)
        return x, c, y_star

    def expected_hidden_power(self) -> float:
        """E[mean((M @ c)^2)] over c ~ N(0, I): the step-0 loss in expectation."""
        return float((self.hidden_map**2).sum()) / self.channels


def make_toy_task(
    seed: int, channels: int = 4, cond_channels: int = 2, size: int = 8
) -> ToyTask:
    """Build the default synthetic control-learning task.

    The locked block is a perturbed identity: each 3x3 kernel is small
    noise plus a strong center tap on the matching channel.  This keeps
    the block well-conditioned, so its copy propagates condition
    information without amplifying it into the step-size stability limit
    of plain SGD at the default learning rate.  The hidden map is scaled
    a few times larger than the noise floor of small-batch gradients so
    the conditional term dominates the achievable loss.
    """
    rng = np.random.default_rng(seed)
    locked = NetBlock(channels, activation="silu")
    for w in (locked.w1, locked.w2):
        w.value[...] = rng.standard_normal(w.value.shape) * 0.05
        for i in range(channels):
            w.value[i, i, 1, 1] += 1.6
    locked.b1.value[...] = rng.standard_normal(channels) * 0.05
    locked.b2.value[...] = rng.standard_normal(channels) * 0.05
    hidden = rng.standard_normal((channels, cond_channels)) * 2.5
    return ToyTask(locked, hidden, channels, cond_channels, size, seed)


@dataclass
class TrainConfig:
    steps: int
    batch_size: int = 2
    learning_rate: float = 0.05
    seed: int = 0
    log_every: int = 1

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1 or self.log_every < 1:
            raise ValueError("steps, batch_size and log_every must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")


@dataclass
class LogRow:
    step: int
    loss: float
    condition_fidelity: float


@dataclass
class TrainLog:
    rows: list[LogRow] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        lines = ["step,loss,condition_fidelity"]
        lines += [f"{r.step},{r.loss!r},{r.condition_fidelity!r}" for r in self.rows]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class TrainingDiverged(RuntimeError):
    pass


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a.ravel() - a.mean()
    db = b.ravel() - b.mean()
    na = math.sqrt(float((da * da).sum()))
    nb = math.sqrt(float((db * db).sum()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float((da * db).sum()) / (na * nb)


EVAL_SAMPLES = 16


def evaluation_set(
    task: ToyTask, config: TrainConfig
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """The fixed probe set train_toy logs against, derived from config.seed.

    Exposed so external checks can recompute logged metrics, e.g. compare
    the step-0 loss against the locked block evaluated alone.
    """
    eval_rng, _ = np.random.default_rng(config.seed).spawn(2)
    return [task.sample(eval_rng) for _ in range(EVAL_SAMPLES)]


def _evaluate(
    cb: ControlNetBlock, task: ToyTask, eval_set: list[tuple[np.ndarray, ...]]
) -> tuple[float, float]:
    """Mean-squared error and condition fidelity on a fixed probe set.

    Fidelity is the correlation between the conditioned-minus-locked
    output delta and the task's true hidden component; it is 0 by
    convention while the control branch is still inert (zero variance).
    """
    loss = 0.0
    deltas = []
    hidden = []
    for x, c, y_star in eval_set:
        y, y_c, _ = cb.forward_parts(x, c)
        resid = y_c - y_star
        loss += float((resid * resid).mean())
        deltas.append(y_c - y)
        hidden.append(task.conditional_component(c))
    return loss / len(eval_set), _pearson(np.stack(deltas), np.stack(hidden))


def train_toy(cb: ControlNetBlock, task: ToyTask, config: TrainConfig) -> TrainLog:
    """Plain SGD against mean-squared error on batches drawn from the task.

    Logged metrics are computed on a fixed evaluation set drawn once up
    front, so the curve reflects the model, not batch noise: with a zero
    learning rate every row repeats the identity-initialization baseline
    loss exactly.  Each row is recorded before that step's update.
    Locked parameters are never updated.
    """
    _, batch_rng = np.random.default_rng(config.seed).spawn(2)
    eval_set = evaluation_set(task, config)
    log = TrainLog()
    for step in range(config.steps):
        if step % config.log_every == 0:
            loss, fidelity = _evaluate(cb, task, eval_set)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss {loss} at step {step}")
            log.rows.append(LogRow(step, loss, fidelity))
        batch = [task.sample(batch_rng) for _ in range(config.batch_size)]
        cb.zero_grads()
        for x, c, y_star in batch:
            _, y_c, cache = cb.forward_parts(x, c)
            resid = y_c - y_star
            if not np.isfinite(resid).all():
                raise TrainingDiverged(f"non-finite activations at step {step}")
            upstream = (2.0 / (resid.size * config.batch_size)) * resid
            cb.backward_from_cache(cache, upstream)
        for _, p in cb.trainable_params():
            p.value -= config.learning_rate * p.grad
    return log


# --------------------------------------------------------------------------
# inference, checkpointing, verification
# --------------------------------------------------------------------------

def control_to_condition(
    control: Raster, channels: int, height: int, width: int
) -> np.ndarray:
    """Raster -> conditioning tensor: channels to [0, 1], nearest-neighbor
    resize, RGB channels reused cyclically when more than 3 are needed."""
    arr = control.pixels.astype(np.float64) / 255.0
    rows = np.minimum(
        ((np.arange(height) + 0.5) * control.height / height).astype(np.intp),
        control.height - 1,
    )
    cols = np.minimum(
        ((np.arange(width) + 0.5) * control.width / width).astype(np.intp),
        control.width - 1,
    )
    resized = arr[rows][:, cols]
    return np.stack([resized[:, :, ch % 3] for ch in range(channels)], axis=0)


def infer(cb: ControlNetBlock, control: Raster, x: np.ndarray) -> np.ndarray:
    """Adapt a control raster into the conditioning tensor and run the block."""
    x = _check_input(x, cb.channels, "input")
    c = control_to_condition(control, cb.cond_channels, x.shape[1], x.shape[2])
    return cb.forward(x, c)


def save_checkpoint(cb: ControlNetBlock, path: str | Path) -> None:
    """Dump every parameter value with shape and locked flag; values round-trip
    bitwise through load_checkpoint."""
    arrays: dict[str, np.ndarray] = {
        "meta.channels": np.array(cb.channels),
        "meta.cond_channels": np.array(cb.cond_channels),
        "meta.activation": np.array(cb.locked.activation),
    }
    for name, p in cb.all_params():
        arrays[f"value.{name}"] = p.value
        arrays[f"locked.{name}"] = np.array(p.locked)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path: str | Path) -> ControlNetBlock:
    with np.load(path, allow_pickle=False) as data:
        channels = int(data["meta.channels"])
        cond_channels = int(data["meta.cond_channels"])
        activation = str(data["meta.activation"])
        locked = NetBlock(channels, activation)
        copy = NetBlock(channels, activation)
        cb = ControlNetBlock(
            locked, copy, ZeroConv(cond_channels, channels), ZeroConv(channels, channels)
        )
        for name, p in cb.all_params():
            p.value[...] = data[f"value.{name}"]
            p.locked = bool(data[f"locked.{name}"])
    return cb


def finite_difference_check(
    cb: ControlNetBlock,
    x: np.ndarray,
    c: np.ndarray,
    rng: np.random.Generator,
    eps: float = 1e-5,
) -> dict[str, float]:
    """Max relative error between reverse-mode and central-difference gradients,
    per trainable parameter, for the scalar loss sum(G * y_c) with random G."""
    y_c = cb.forward(x, c)
    g = rng.standard_normal(y_c.shape)

    def loss() -> float:
        return float((g * cb.forward(x, c)).sum())

    cb.zero_grads()
    cb.backward(x, c, g)
    report: dict[str, float] = {}
    for name, p in cb.trainable_params():
        worst = 0.0
        flat = p.value.reshape(-1)
        grad = p.grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = loss()
            flat[i] = orig - eps
            lo = loss()
            flat[i] = orig
            numeric = (hi - lo) / (2 * eps)
            denom = max(abs(grad[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(grad[i] - numeric) / denom)
        report[name] = worst
    return report


@dataclass
class VerifyCheck:
    name: str
    passed: bool
    detail: str


def run_verification(seed: int = 0) -> list[VerifyCheck]:
    """The identity/gradient/immutability suite behind `zeroconv verify`."""
    checks: list[VerifyCheck] = []
    rng = np.random.default_rng(seed)

    # Conditioned output == locked output at initialization.
    task = make_toy_task(seed)
    cb = init_controlnet(task.locked, task.cond_channels)
    worst = 0.0
    for _ in range(100):
        x = rng.standard_normal((cb.channels, task.size, task.size))
        c = rng.standard_normal((cb.cond_channels, task.size, task.size))
        y, y_c, _ = cb.forward_parts(x, c)
        worst = max(worst, float(np.abs(y_c - y).max()))
    checks.append(
        VerifyCheck("init_identity", worst < 1e-12, f"max |y_c - y| = {worst:.3e}")
    )

    # Gradient unlocking order: z2 first, copy/z1 strictly after.
    x, c, y_star = task.sample(rng)
    resid_grad = 2.0 * (cb.forward(x, c) - y_star) / y_star.size
    cb.zero_grads()
    cb.backward(x, c, resid_grad)
    z2_nonzero = float(np.abs(cb.z2.weight.grad).max()) > 0
    blocked = max(
        float(np.abs(cb.z1.weight.grad).max()),
        float(np.abs(cb.z1.bias.grad).max()),
        max(float(np.abs(p.grad).max()) for _, p in cb.copy.params()),
    )
    for _, p in cb.trainable_params():
        p.value -= 0.05 * p.grad
    cb.zero_grads()
    cb.backward(x, c, resid_grad)
    copy_nonzero = max(float(np.abs(p.grad).max()) for _, p in cb.copy.params()) > 0
    ok = z2_nonzero and blocked == 0.0 and copy_nonzero
    checks.append(
        VerifyCheck(
            "gradient_unlocking_order",
            ok,
            f"z2 grad nonzero={z2_nonzero}, blocked max={blocked:.1e}, "
            f"copy grad after step nonzero={copy_nonzero}",
        )
    )

    # Finite differences on a randomized block.
    fd_task = make_toy_task(seed + 1)
    fd_cb = init_controlnet(fd_task.locked, fd_task.cond_channels)
    fd_rng = np.random.default_rng(seed + 2)
    for _, p in fd_cb.trainable_params():
        p.value[...] = fd_rng.standard_normal(p.value.shape) * 0.5
    xs = fd_rng.standard_normal((fd_cb.channels, 8, 8))
    cs = fd_rng.standard_normal((fd_cb.cond_channels, 8, 8))
    report = finite_difference_check(fd_cb, xs, cs, fd_rng)
    worst_name = max(report, key=report.get)
    checks.append(
        VerifyCheck(
            "finite_difference",
            report[worst_name] < 1e-6,
            f"max rel err {report[worst_name]:.3e} ({worst_name})",
        )
    )

    # Locked parameters bitwise unchanged by training.
    im_task = make_toy_task(seed)
    im_cb = init_controlnet(im_task.locked, im_task.cond_channels)
    before = [p.value.copy() for _, p in im_cb.all_params() if p.locked]
    train_toy(im_cb, im_task, TrainConfig(steps=50, seed=seed, log_every=50))
    after = [p.value for _, p in im_cb.all_params() if p.locked]
    unchanged = all(
        a.tobytes() == b.tobytes() for a, b in zip(before, after)
    )
    checks.append(
        VerifyCheck(
            "locked_immutability",
            unchanged,
            "locked values bitwise unchanged after 50 steps"
            if unchanged
            else "locked values changed",
        )
    )
    return checks
