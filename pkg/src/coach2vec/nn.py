"""Dense autoencoder with hand-written backpropagation and the Adadelta optimizer.

Everything runs in float64 on full batches. Weight matrices are stored as
``(fan_in, fan_out)`` so a layer computes ``act(a @ W + b)``.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCorpus,
    FormatVersionError,
    InvalidConfig,
    NonFiniteLoss,
    ShapeMismatch,
    StaleCache,
)

log = logging.getLogger(__name__)

WEIGHTS_VERSION = 1
DEFAULT_DIMS = (70, 32, 5, 32, 70)
DEFAULT_ACTIVATIONS = ("tanh", "identity", "tanh", "sigmoid")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


_ACT = {
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "identity": (lambda z: z, lambda y: np.ones_like(y)),
    "sigmoid": (_sigmoid, lambda y: y * (1.0 - y)),
}


@dataclass
class AutoencoderModel:
    dims: tuple[int, ...]
    activations: tuple[str, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    seed: int = 0

    def __post_init__(self):
        self.dims = tuple(self.dims)
        self.activations = tuple(self.activations)
        if len(self.dims) < 3 or len(self.dims) % 2 == 0:
            raise InvalidConfig("autoencoder needs an odd number (>= 3) of layer widths")
        if self.dims[0] != self.dims[-1]:
            raise InvalidConfig("input and output widths must match")
        if len(self.activations) != len(self.dims) - 1:
            raise InvalidConfig("one activation per weight layer required")
        for a in self.activations:
            if a not in _ACT:
                raise InvalidConfig(f"unknown activation {a!r}")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (self.dims[i], self.dims[i + 1]) or b.shape != (self.dims[i + 1],):
                raise DimensionMismatch(f"layer {i} parameters do not match dims {self.dims}")

    @property
    def code_layer(self) -> int:
        """Index of the weight layer whose output is the encoding."""
        return len(self.dims) // 2 - 1

    @property
    def code_width(self) -> int:
        return self.dims[len(self.dims) // 2]

    def parameters(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def with_parameters(self, params: list[np.ndarray]) -> "AutoencoderModel":
        n = len(self.weights)
        return AutoencoderModel(self.dims, self.activations, list(params[:n]), list(params[n:]), self.seed)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.dims, self.activations)).encode())
        for p in self.parameters():
            h.update(np.ascontiguousarray(p, dtype="<f8").tobytes())
        return h.hexdigest()[:16]

    def to_json(self, config: "TrainConfig | None" = None) -> str:
        return json.dumps(
            {
                "version": WEIGHTS_VERSION,
                "dims": list(self.dims),
                "activations": list(self.activations),
                "seed": self.seed,
                "weights": [W.tolist() for W in self.weights],
                "biases": [b.tolist() for b in self.biases],
                "config": None if config is None else config.to_dict(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "AutoencoderModel":
        rec = json.loads(text)
        if rec.get("version") != WEIGHTS_VERSION:
            raise FormatVersionError(f"unsupported weights version {rec.get('version')!r}")
        return cls(
            tuple(rec["dims"]),
            tuple(rec["activations"]),
            [np.array(W, dtype=float).reshape(rec["dims"][i], rec["dims"][i + 1]) for i, W in enumerate(rec["weights"])],
            [np.array(b, dtype=float) for b in rec["biases"]],
            rec["seed"],
        )


def init_autoencoder(dims=DEFAULT_DIMS, activations=DEFAULT_ACTIVATIONS, seed: int = 0) -> AutoencoderModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return AutoencoderModel(tuple(dims), tuple(activations), weights, biases, seed)


def zero_autoencoder(dims=DEFAULT_DIMS, activations=DEFAULT_ACTIVATIONS) -> AutoencoderModel:
    return AutoencoderModel(
        tuple(dims), tuple(activations),
        [np.zeros((a, b)) for a, b in zip(dims[:-1], dims[1:])],
        [np.zeros(b) for b in dims[1:]],
    )


def forward(model: AutoencoderModel, x):
    """Run one vector ``(d,)`` or a batch ``(n, d)``.

    Returns ``(reconstruction, encoding, cache)``; the cache holds every layer's
    output, starting with the input itself.
    """
    a = np.asarray(x, dtype=float)
    if a.shape[-1] != model.dims[0] or a.ndim > 2:
        raise DimensionMismatch(f"expected width {model.dims[0]}, got shape {a.shape}")
    outs = [a]
    for W, b, name in zip(model.weights, model.biases, model.activations):
        a = _ACT[name][0](a @ W + b)
        outs.append(a)
    return a, outs[model.code_layer + 1], outs


def encode(model: AutoencoderModel, profile) -> np.ndarray:
    a = np.asarray(profile, dtype=float)
    if a.shape[-1] != model.dims[0] or a.ndim > 2:
        raise DimensionMismatch(f"expected width {model.dims[0]}, got shape {a.shape}")
    for i in range(model.code_layer + 1):
        a = _ACT[model.activations[i]][0](a @ model.weights[i] + model.biases[i])
    return a


def mse(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.mean((a - b) ** 2))


def backward(model: AutoencoderModel, x, cache) -> list[np.ndarray]:
    """Gradients of ``mse(x, reconstruction)`` in :meth:`AutoencoderModel.parameters` order.

    For a batch the loss is the mean over every entry, i.e. the mean of the
    per-profile losses.
    """
    if len(cache) != len(model.dims) or any(c.shape[-1] != d for c, d in zip(cache, model.dims)):
        raise StaleCache("activation cache does not match the model layout")
    x = np.asarray(x, dtype=float)
    if x.shape != cache[0].shape:
        raise StaleCache("activation cache was computed for a different input")
    y = cache[-1]
    delta = 2.0 * (y - x) / y.size
    gW: list[np.ndarray] = [None] * len(model.weights)
    gb: list[np.ndarray] = [None] * len(model.biases)
    for i in reversed(range(len(model.weights))):
        delta = delta * _ACT[model.activations[i]][1](cache[i + 1])
        a_in = cache[i]
        if a_in.ndim == 1:
            gW[i] = np.outer(a_in, delta)
            gb[i] = delta.copy()
        else:
            gW[i] = a_in.T @ delta
            gb[i] = delta.sum(axis=0)
        if i:
            delta = delta @ model.weights[i].T
    return [*gW, *gb]


@dataclass
class AdadeltaState:
    acc_grad: list[np.ndarray]
    acc_update: list[np.ndarray]
    rho: float = 0.95
    eps: float = 1e-6

    @classmethod
    def zeros_like(cls, params, rho: float = 0.95, eps: float = 1e-6) -> "AdadeltaState":
        if not 0.0 < rho < 1.0 or eps <= 0.0:
            raise InvalidConfig("Adadelta needs 0 < rho < 1 and eps > 0")
        return cls([np.zeros_like(p, dtype=float) for p in params],
                   [np.zeros_like(p, dtype=float) for p in params], rho, eps)


def adadelta_step(state: AdadeltaState, gradients, parameters):
    """One Adadelta update. Returns ``(new_parameters, new_state)``; inputs are left untouched."""
    if not (len(gradients) == len(parameters) == len(state.acc_grad)):
        raise ShapeMismatch("gradient, parameter and state lists differ in length")
    rho, eps = state.rho, state.eps
    new_params, new_g, new_dx = [], [], []
    for g, p, eg, edx in zip(gradients, parameters, state.acc_grad, state.acc_update):
        g = np.asarray(g, dtype=float)
        p = np.asarray(p, dtype=float)
        if not (g.shape == p.shape == eg.shape == edx.shape):
            raise ShapeMismatch(f"shapes {g.shape}, {p.shape}, {eg.shape} disagree")
        eg = rho * eg + (1.0 - rho) * g * g
        dx = -(np.sqrt(edx + eps) / np.sqrt(eg + eps)) * g
        edx = rho * edx + (1.0 - rho) * dx * dx
        new_params.append(p + dx)
        new_g.append(eg)
        new_dx.append(edx)
    return new_params, AdadeltaState(new_g, new_dx, rho, eps)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 3000
    rho: float = 0.95
    eps: float = 1e-6
    seed: int = 0
    loss: str = "mse"
    optimizer: str = "adadelta"
    learning_rate: float = 0.1  # only used by optimizer="sgd"
    dims: tuple[int, ...] = DEFAULT_DIMS
    activations: tuple[str, ...] = DEFAULT_ACTIVATIONS

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1")
        if self.loss != "mse":
            raise InvalidConfig(f"unsupported loss {self.loss!r}")
        if self.optimizer not in ("adadelta", "sgd"):
            raise InvalidConfig(f"unsupported optimizer {self.optimizer!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["activations"] = list(self.activations)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        d["dims"] = tuple(d.get("dims", DEFAULT_DIMS))
        d["activations"] = tuple(d.get("activations", DEFAULT_ACTIVATIONS))
        return cls(**d)


def train(profiles, config: TrainConfig = TrainConfig()) -> tuple[AutoencoderModel, list[float]]:
    """Full-batch training. ``history[e]`` is the loss at the start of epoch ``e + 1``."""
    X = np.asarray(profiles, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyCorpus("training needs at least one profile")
    if X.shape[1] != config.dims[0]:
        raise DimensionMismatch(f"profiles have width {X.shape[1]}, model expects {config.dims[0]}")
    model = init_autoencoder(config.dims, config.activations, config.seed)
    params = model.parameters()
    state = AdadeltaState.zeros_like(params, config.rho, config.eps)
    history: list[float] = []
    for epoch in range(1, config.epochs + 1):
        recon, _, cache = forward(model, X)
        loss = mse(recon, X)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"loss became {loss} at epoch {epoch} (previous {history[-1:]})")
        history.append(loss)
        grads = backward(model, X, cache)
        if config.optimizer == "adadelta":
            params, state = adadelta_step(state, grads, params)
        else:
            params = [p - config.learning_rate * g for p, g in zip(params, grads)]
        if not all(np.isfinite(p).all() for p in params):
            raise NonFiniteLoss(f"non-finite parameters after epoch {epoch}")
        model = model.with_parameters(params)
        if epoch % 500 == 0:
            log.debug("epoch %d loss %.6g", epoch, loss)
    return model, history
