"""Single-layer LSTM token model trained with plain SGD and BPTT.

Feature rows become token sequences through a per-column min-max binning
tokenizer (``vocab_size`` bins per column). Gradients are clamped elementwise
to ``[-clip_value, clip_value]`` before each update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

GATES = ("i", "f", "o", "g")
WEIGHT_NAMES = tuple(f"W{g}" for g in GATES) + ("Wy",)
PARAM_NAMES = WEIGHT_NAMES + tuple(f"b{g}" for g in GATES) + ("by",)


class TrainingDiverged(ArithmeticError):
    pass


@dataclass
class LstmParams:
    Wi: np.ndarray
    Wf: np.ndarray
    Wo: np.ndarray
    Wg: np.ndarray
    Wy: np.ndarray
    bi: np.ndarray
    bf: np.ndarray
    bo: np.ndarray
    bg: np.ndarray
    by: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.Wi.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.Wy.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "LstmParams":
        return LstmParams(**{k: v.copy() for k, v in self.tensors().items()})

    def save(self, path) -> None:
        """Write a text dump: a ``pdla-lstm 1`` line, then per tensor a
        ``name dim...`` header followed by one line of values per row."""
        lines = ["pdla-lstm 1"]
        for name, arr in self.tensors().items():
            lines.append(" ".join([name, *map(str, arr.shape)]))
            for row in np.atleast_2d(arr):
                lines.append(" ".join(repr(float(v)) for v in row))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "LstmParams":
        with open(path, encoding="utf-8") as fh:
            lines = [ln.split() for ln in fh if ln.strip()]
        if not lines or lines[0] != ["pdla-lstm", "1"]:
            raise ValueError(f"{path}: not an LSTM parameter dump")
        tensors, pos = {}, 1
        while pos < len(lines):
            name, *dims = lines[pos]
            shape = tuple(int(d) for d in dims)
            n_rows = shape[0] if len(shape) == 2 else 1
            rows = [[float(v) for v in ln] for ln in lines[pos + 1:pos + 1 + n_rows]]
            tensors[name] = np.array(rows, dtype=np.float64).reshape(shape)
            pos += 1 + n_rows
        missing = set(PARAM_NAMES) - set(tensors)
        if missing:
            raise ValueError(f"{path}: missing tensors {sorted(missing)}")
        return cls(**{name: tensors[name] for name in PARAM_NAMES})


@dataclass(frozen=True)
class LstmTrainConfig:
    learning_rate: float = 0.01
    l2_strength: float = 1e-6
    clip_value: float = 0.05
    softmax_temperature: float = 0.1
    epochs: int = 300
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.learning_rate <= 0.01:
            raise ValueError(f"learning_rate must be in [0, 0.01], got {self.learning_rate}")
        if self.l2_strength < 0:
            raise ValueError("l2_strength must be >= 0")
        if not 5e-6 <= self.clip_value <= 0.05:
            raise ValueError(f"clip_value must be in [5e-6, 0.05], got {self.clip_value}")
        if not 0.0 < self.softmax_temperature <= 0.1:
            raise ValueError(f"softmax_temperature must be in (0, 0.1], got {self.softmax_temperature}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def init_params(hidden_size: int = 20, vocab_size: int = 5, seed: int = 0,
                scale: float = 0.01) -> LstmParams:
    if hidden_size < 1 or vocab_size < 1:
        raise ValueError("hidden_size and vocab_size must be >= 1")
    rng = np.random.default_rng(seed)
    H, V = hidden_size, vocab_size
    p = {f"W{g}": rng.standard_normal((H, H + V)) * scale for g in GATES}
    p["Wy"] = rng.standard_normal((V, H)) * scale
    p.update({f"b{g}": np.zeros(H) for g in GATES})
    p["by"] = np.zeros(V)
    return LstmParams(**p)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _softmax(z):
    e = np.exp(z - z.max())
    return e / e.sum()


def _stacked(params: LstmParams):
    W = np.vstack([params.Wi, params.Wf, params.Wo, params.Wg])
    b = np.concatenate([params.bi, params.bf, params.bo, params.bg])
    return W, b


def forward(params: LstmParams, inputs: Sequence[int], h0=None, c0=None):
    """Run the recurrence over ``inputs``; returns (probs[T, V], cache)."""
    H, V = params.hidden_size, params.vocab_size
    for tok in inputs:
        if not 0 <= tok < V:
            raise ValueError(f"token {tok} outside vocabulary of size {V}")
    W, b = _stacked(params)
    h = np.zeros(H) if h0 is None else np.asarray(h0, dtype=np.float64)
    c = np.zeros(H) if c0 is None else np.asarray(c0, dtype=np.float64)
    cache = {"z": [], "gates": [], "c": [], "c_prev": [], "h": []}
    probs = []
    for tok in inputs:
        z = np.concatenate([h, np.zeros(V)])
        z[H + tok] = 1.0
        a = W @ z + b
        gates = np.empty(4 * H)
        gates[:3 * H] = _sigmoid(a[:3 * H])
        gates[3 * H:] = np.tanh(a[3 * H:])
        i, f, o, g = gates[:H], gates[H:2 * H], gates[2 * H:3 * H], gates[3 * H:]
        c_prev, c = c, f * c + i * g
        h = o * np.tanh(c)
        probs.append(_softmax(params.Wy @ h + params.by))
        cache["z"].append(z)
        cache["gates"].append(gates)
        cache["c"].append(c)
        cache["c_prev"].append(c_prev)
        cache["h"].append(h)
    return np.array(probs).reshape(len(inputs), V), cache


def loss_and_grads(params: LstmParams, inputs: Sequence[int], targets: Sequence[int],
                   l2_strength: float = 0.0):
    """Mean per-step cross-entropy plus ``l2/2 * sum(W**2)`` over weight matrices."""
    if len(inputs) != len(targets) or not inputs:
        raise ValueError("inputs and targets must be nonempty and equally long")
    probs, cache = forward(params, inputs)
    T, H = len(inputs), params.hidden_size
    loss = -sum(math.log(probs[t, targets[t]]) for t in range(T)) / T
    loss += 0.5 * l2_strength * sum(float(np.sum(getattr(params, w) ** 2)) for w in WEIGHT_NAMES)

    W, _ = _stacked(params)
    dW = np.zeros_like(W)
    db = np.zeros(4 * H)
    dWy = np.zeros_like(params.Wy)
    dby = np.zeros_like(params.by)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    for t in reversed(range(T)):
        dy = probs[t].copy()
        dy[targets[t]] -= 1.0
        dy /= T
        h, c, c_prev, z = cache["h"][t], cache["c"][t], cache["c_prev"][t], cache["z"][t]
        gates = cache["gates"][t]
        i, f, o, g = gates[:H], gates[H:2 * H], gates[2 * H:3 * H], gates[3 * H:]
        dWy += np.outer(dy, h)
        dby += dy
        dh = params.Wy.T @ dy + dh_next
        tc = np.tanh(c)
        dc = dh * o * (1.0 - tc ** 2) + dc_next
        # gradients w.r.t. gate pre-activations, in stacked i, f, o, g order
        da = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            dh * tc * o * (1.0 - o),
            dc * i * (1.0 - g ** 2),
        ])
        dW += np.outer(da, z)
        db += da
        dh_next = (W.T @ da)[:H]
        dc_next = dc * f
    grads = {"Wy": dWy, "by": dby}
    for k, gate in enumerate(GATES):
        grads[f"W{gate}"] = dW[k * H:(k + 1) * H]
        grads[f"b{gate}"] = db[k * H:(k + 1) * H]
    for w in WEIGHT_NAMES:
        grads[w] += l2_strength * getattr(params, w)
    return loss, grads


def clip_gradients(grads: dict[str, np.ndarray], clip_value: float) -> dict[str, np.ndarray]:
    return {k: np.clip(v, -clip_value, clip_value) for k, v in grads.items()}


def train(params: LstmParams, corpus: Sequence[Sequence[int]], cfg: LstmTrainConfig):
    """Next-token SGD over ``corpus``; returns (trained params, per-epoch mean loss).

    The hidden state is reset at the start of every sequence. Sequence order
    within an epoch is shuffled from ``cfg.seed``. The input params are not
    modified.
    """
    seqs = [list(s) for s in corpus if len(s) >= 2]
    if not seqs:
        raise ValueError("corpus needs at least one sequence of length >= 2")
    params = params.copy()
    rng = np.random.default_rng(cfg.seed)
    trace = []
    for epoch in range(cfg.epochs):
        losses = []
        for k in rng.permutation(len(seqs)):
            seq = seqs[k]
            loss, grads = loss_and_grads(params, seq[:-1], seq[1:], cfg.l2_strength)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            for name, grad in clip_gradients(grads, cfg.clip_value).items():
                getattr(params, name)[...] -= cfg.learning_rate * grad
            losses.append(loss)
        trace.append(float(np.mean(losses)))
    return params, trace


def sample(params: LstmParams, prime: Sequence[int], length: int, temperature: float = 0.1,
           seed: int = 0) -> list[int]:
    """Autoregressively draw ``length`` tokens after feeding ``prime``."""
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    if not prime:
        raise ValueError("sampling needs at least one prime token")
    rng = np.random.default_rng(seed)
    probs, cache = forward(params, prime)
    h, c = cache["h"][-1], cache["c"][-1]
    logits = np.log(probs[-1])
    out = []
    for _ in range(length):
        p = _softmax(logits / temperature)
        tok = int(np.searchsorted(np.cumsum(p), rng.random(), side="right"))
        tok = min(tok, params.vocab_size - 1)
        out.append(tok)
        probs, cache = forward(params, [tok], h, c)
        h, c = cache["h"][-1], cache["c"][-1]
        logits = np.log(probs[-1])
    return out


@dataclass(frozen=True)
class BinTokenizer:
    """Per-column min-max quantizer mapping feature values to ``n_bins`` token ids."""
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    n_bins: int = 5

    @classmethod
    def fit(cls, matrix, n_bins: int = 5) -> "BinTokenizer":
        m = np.asarray(matrix, dtype=np.float64)
        return cls(tuple(m.min(axis=0)), tuple(m.max(axis=0)), n_bins)

    def tokenize(self, row) -> list[int]:
        out = []
        for x, lo, hi in zip(row, self.mins, self.maxs):
            if hi <= lo:
                out.append(0)
                continue
            b = int((x - lo) / (hi - lo) * self.n_bins)
            out.append(min(max(b, 0), self.n_bins - 1))
        return out

    def detokenize(self, tokens) -> list[float]:
        """Bin centres for each position."""
        return [lo + (t + 0.5) * (hi - lo) / self.n_bins for t, lo, hi in zip(tokens, self.mins, self.maxs)]
