"""Two-layer graph convolutional network with explicit reverse-mode gradients.

forward:  H = relu(A_hat @ drop(X) @ W0);  probs = softmax(A_hat @ drop(H) @ W1)

Dropout follows the inverted-scaling convention (kept activations divided by
1 - p) and is applied to the inputs of both layers during training only.
Training is full-batch Adam; everything is plain float64 numpy so a fixed
seed reproduces a run bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Taxonomy
from .errors import ValidationError
from .graphs import ROLE_WORD, AttributedGraph, normalize
from .metrics import accuracy, weighted_f1
from .splits import SplitSpec, make_split

CHECKPOINT_MAGIC = b"STXGCN1\0"


@dataclass
class GcnModel:
    w0: np.ndarray  # d x h
    w1: np.ndarray  # h x K
    dropout_rate: float = 0.5

    def __post_init__(self):
        if self.w0.ndim != 2 or self.w1.ndim != 2 or self.w0.shape[1] != self.w1.shape[0]:
            raise ValidationError("weight shapes must chain d x h, h x K")
        if not (np.all(np.isfinite(self.w0)) and np.all(np.isfinite(self.w1))):
            raise ValidationError("weights must be finite")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValidationError("dropout_rate must be in [0, 1)")

    @property
    def hidden(self) -> int:
        return self.w0.shape[1]

    @property
    def classes(self) -> int:
        return self.w1.shape[1]

    @classmethod
    def init(
        cls, d: int, hidden: int, classes: int, rng: np.random.Generator, dropout_rate: float = 0.5
    ) -> "GcnModel":
        """Glorot-uniform initialization from the caller's generator."""
        if hidden < 1 or classes < 2:
            raise ValidationError("need hidden >= 1 and classes >= 2")

        def glorot(fan_in, fan_out):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-limit, limit, size=(fan_in, fan_out))

        return cls(w0=glorot(d, hidden), w1=glorot(hidden, classes), dropout_rate=dropout_rate)


@dataclass(frozen=True)
class DropoutMasks:
    """Keep-masks realized for one training step (None = no dropout)."""

    input: np.ndarray | None
    hidden: np.ndarray | None
    rate: float


def sample_dropout_masks(
    rng: np.random.Generator, n: int, d: int, hidden: int, rate: float
) -> DropoutMasks:
    if rate == 0.0:
        return DropoutMasks(input=None, hidden=None, rate=0.0)
    return DropoutMasks(
        input=rng.random((n, d)) >= rate,
        hidden=rng.random((n, hidden)) >= rate,
        rate=rate,
    )


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _drop(x: np.ndarray, mask: np.ndarray | None, rate: float) -> np.ndarray:
    if mask is None:
        return x
    return x * mask / (1.0 - rate)


class _ForwardCache:
    __slots__ = ("axd", "s", "hidden", "ahd", "probs")

    def __init__(self, axd, s, hidden, ahd, probs):
        self.axd = axd  # A_hat @ drop(X)
        self.s = s  # pre-activation of layer 1
        self.hidden = hidden  # relu(s), pre-dropout
        self.ahd = ahd  # A_hat @ drop(hidden)
        self.probs = probs


def _check_shapes(model: GcnModel, a_hat: sp.spmatrix, x: np.ndarray) -> None:
    n = a_hat.shape[0]
    if a_hat.shape != (n, n) or x.shape[0] != n or x.shape[1] != model.w0.shape[0]:
        raise ValidationError(
            f"shape mismatch: A_hat {a_hat.shape}, X {x.shape}, W0 {model.w0.shape}"
        )


def _forward_cached(
    model: GcnModel, a_hat: sp.spmatrix, x: np.ndarray, masks: DropoutMasks | None
) -> _ForwardCache:
    _check_shapes(model, a_hat, x)
    if masks is None:
        masks = DropoutMasks(input=None, hidden=None, rate=0.0)
    axd = a_hat @ _drop(x, masks.input, masks.rate)
    s = axd @ model.w0
    hidden = np.maximum(s, 0.0)
    ahd = a_hat @ _drop(hidden, masks.hidden, masks.rate)
    probs = _softmax_rows(ahd @ model.w1)
    return _ForwardCache(axd=axd, s=s, hidden=hidden, ahd=ahd, probs=probs)


def forward(
    model: GcnModel,
    a_hat: sp.spmatrix,
    x: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Return (hidden representation n x h, class probabilities n x K)."""
    masks = None
    if training and model.dropout_rate > 0.0:
        if rng is None:
            raise ValidationError("training forward with dropout needs an rng")
        masks = sample_dropout_masks(
            rng, x.shape[0], x.shape[1], model.hidden, model.dropout_rate
        )
    cache = _forward_cached(model, a_hat, x, masks)
    return cache.hidden, cache.probs


def loss(probs: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    """Mean cross-entropy over masked nodes, with probabilities floored at 1e-12."""
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise ValidationError("loss mask selects no nodes")
    picked = probs[idx, labels[idx]]
    return float(np.mean(-np.log(np.maximum(picked, 1e-12))))


def _grads_from_cache(
    model: GcnModel,
    a_hat: sp.spmatrix,
    cache: _ForwardCache,
    labels: np.ndarray,
    mask: np.ndarray,
    masks: DropoutMasks | None,
) -> tuple[np.ndarray, np.ndarray]:
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise ValidationError("gradient mask selects no nodes")
    g = np.zeros_like(cache.probs)
    g[idx] = cache.probs[idx]
    g[idx, labels[idx]] -= 1.0
    g /= len(idx)

    gw1 = cache.ahd.T @ g
    dhd = a_hat @ (g @ model.w1.T)  # A_hat is symmetric
    if masks is not None and masks.hidden is not None:
        dhd = dhd * masks.hidden / (1.0 - masks.rate)
    ds = dhd * (cache.s > 0.0)
    gw0 = cache.axd.T @ ds
    return gw0, gw1


def backward(
    model: GcnModel,
    a_hat: sp.spmatrix,
    x: np.ndarray,
    labels: np.ndarray,
    mask: np.ndarray,
    dropout_masks: DropoutMasks | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of the masked cross-entropy w.r.t. (W0, W1).

    dropout_masks must be the masks realized in the paired forward pass.
    """
    cache = _forward_cached(model, a_hat, x, dropout_masks)
    return _grads_from_cache(model, a_hat, cache, labels, mask, dropout_masks)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-2
    epochs: int = 500
    seed: int = 0
    hidden: int = 200
    dropout_rate: float = 0.5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    select: str = "best_val"  # or "final"
    split: SplitSpec | None = None  # defaults to SplitSpec(seed=self.seed)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValidationError("dropout_rate must be in [0, 1)")
        if self.select not in ("best_val", "final"):
            raise ValidationError("select must be 'best_val' or 'final'")

    def split_spec(self) -> SplitSpec:
        return self.split if self.split is not None else SplitSpec(seed=self.seed)


@dataclass
class TrainRun:
    """Everything a finished run produced: masks, traces, states, metrics."""

    config: TrainConfig
    n_classes: int
    masks: dict[str, np.ndarray]  # train / val / test / excluded, boolean over nodes
    loss_trace: list[float]
    val_accuracy_trace: list[float]
    best_epoch: int
    best_state: tuple[np.ndarray, np.ndarray]
    final_state: tuple[np.ndarray, np.ndarray]
    final_metrics: dict[str, dict[str, float]] = field(default_factory=dict)

    def selected_state(self) -> tuple[np.ndarray, np.ndarray]:
        return self.best_state if self.config.select == "best_val" else self.final_state

    def selected_model(self) -> GcnModel:
        w0, w1 = self.selected_state()
        return GcnModel(w0=w0.copy(), w1=w1.copy(), dropout_rate=self.config.dropout_rate)


class _Adam:
    """Standard Adam over a list of arrays."""

    def __init__(self, shapes, lr, beta1, beta2, eps):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            m_hat = self.m[i] / (1 - self.beta1**self.t)
            v_hat = self.v[i] / (1 - self.beta2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def build_masks(graph: AttributedGraph, spec: SplitSpec) -> dict[str, np.ndarray]:
    """Split paper nodes 60/20/20; word nodes land in the excluded mask."""
    paper_idx = graph.paper_index
    if len(paper_idx) == 0:
        raise ValidationError("graph has no labeled paper nodes")
    split = make_split(len(paper_idx), spec)
    masks = {
        name: np.zeros(graph.n, dtype=bool) for name in ("train", "val", "test", "excluded")
    }
    masks["train"][paper_idx[split.train]] = True
    masks["val"][paper_idx[split.val]] = True
    masks["test"][paper_idx[split.test]] = True
    masks["excluded"][graph.roles == ROLE_WORD] = True
    return masks


def train(graph: AttributedGraph, config: TrainConfig, taxonomy: Taxonomy) -> TrainRun:
    """Full-batch Adam training; keeps both the best-validation and final weights."""
    masks = build_masks(graph, config.split_spec())
    has_words = bool((graph.roles == ROLE_WORD).any())
    n_classes = taxonomy.num_classes + (1 if has_words else 0)
    if graph.labels[~masks["excluded"]].max(initial=0) >= n_classes:
        raise ValidationError("paper labels exceed taxonomy class count")

    a_hat = normalize(graph).matrix
    x = graph.features.values
    rng = np.random.default_rng(config.seed)
    model = GcnModel.init(x.shape[1], config.hidden, n_classes, rng, config.dropout_rate)
    adam = _Adam(
        [model.w0.shape, model.w1.shape],
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_eps,
    )

    labels = graph.labels
    loss_trace: list[float] = []
    val_trace: list[float] = []
    best_val = -1.0
    best_epoch = 0
    best_state = (model.w0.copy(), model.w1.copy())

    for epoch in range(1, config.epochs + 1):
        do_masks = sample_dropout_masks(
            rng, x.shape[0], x.shape[1], config.hidden, config.dropout_rate
        )
        cache = _forward_cached(model, a_hat, x, do_masks)
        loss_trace.append(loss(cache.probs, labels, masks["train"]))
        gw0, gw1 = _grads_from_cache(model, a_hat, cache, labels, masks["train"], do_masks)
        adam.step([model.w0, model.w1], [gw0, gw1])

        eval_probs = _forward_cached(model, a_hat, x, None).probs
        pred = eval_probs.argmax(axis=1)
        val_acc = accuracy(pred[masks["val"]], labels[masks["val"]])
        val_trace.append(val_acc)
        if val_acc > best_val:
            best_val = val_acc
            best_epoch = epoch
            best_state = (model.w0.copy(), model.w1.copy())

    run = TrainRun(
        config=config,
        n_classes=n_classes,
        masks=masks,
        loss_trace=loss_trace,
        val_accuracy_trace=val_trace,
        best_epoch=best_epoch,
        best_state=best_state,
        final_state=(model.w0.copy(), model.w1.copy()),
    )
    selected = run.selected_model()
    pred = predict(selected, a_hat, x)
    for split_name in ("train", "val", "test"):
        m = masks[split_name]
        run.final_metrics[split_name] = {
            "accuracy": accuracy(pred.classes[m], labels[m]),
            "weighted_f1": weighted_f1(pred.classes[m], labels[m]),
        }
    return run


@dataclass(frozen=True)
class Prediction:
    classes: np.ndarray  # argmax ids, ties broken toward the lowest id
    confidence: np.ndarray  # max probability per node
    hidden: np.ndarray  # n x h, for embedding export


def predict(model: GcnModel, a_hat: sp.spmatrix, x: np.ndarray) -> Prediction:
    hidden, probs = forward(model, a_hat, x, training=False)
    return Prediction(
        classes=probs.argmax(axis=1),
        confidence=probs.max(axis=1),
        hidden=hidden,
    )


def taxonomy_digest(taxonomy: Taxonomy) -> str:
    return hashlib.sha256("\n".join(taxonomy.classes).encode("utf-8")).hexdigest()


def save_checkpoint(
    model: GcnModel, prefix: str | Path, config: TrainConfig, taxonomy: Taxonomy
) -> None:
    """<prefix>.bin: magic, int64 (d, h, K), then W0 and W1 as row-major float64."""
    d, h = model.w0.shape
    k = model.w1.shape[1]
    payload = (
        CHECKPOINT_MAGIC
        + np.array([d, h, k], dtype="<i8").tobytes()
        + np.ascontiguousarray(model.w0, dtype="<f8").tobytes()
        + np.ascontiguousarray(model.w1, dtype="<f8").tobytes()
    )
    Path(f"{prefix}.bin").write_bytes(payload)
    cfg = asdict(config)
    cfg["split"] = asdict(config.split_spec())
    meta = {
        "schema_version": 1,
        "config": cfg,
        "seed": config.seed,
        "taxonomy_sha256": taxonomy_digest(taxonomy),
        "dropout_rate": model.dropout_rate,
    }
    Path(f"{prefix}.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_checkpoint(prefix: str | Path) -> tuple[GcnModel, dict]:
    blob = Path(f"{prefix}.bin").read_bytes()
    if blob[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise ValidationError(f"{prefix}.bin is not a GCN checkpoint")
    offset = len(CHECKPOINT_MAGIC)
    d, h, k = np.frombuffer(blob, dtype="<i8", count=3, offset=offset)
    offset += 3 * 8
    w0 = np.frombuffer(blob, dtype="<f8", count=d * h, offset=offset).reshape(d, h).copy()
    offset += d * h * 8
    w1 = np.frombuffer(blob, dtype="<f8", count=h * k, offset=offset).reshape(h, k).copy()
    meta = json.loads(Path(f"{prefix}.json").read_text("utf-8"))
    model = GcnModel(w0=w0, w1=w1, dropout_rate=meta.get("dropout_rate", 0.5))
    return model, meta


def pca2(matrix: np.ndarray) -> np.ndarray:
    """2-component PCA projection of row vectors (plot substitute for t-SNE)."""
    centered = matrix - matrix.mean(axis=0, keepdims=True)
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    k = min(2, u.shape[1])
    coords = np.zeros((matrix.shape[0], 2))
    coords[:, :k] = u[:, :k] * s[:k]
    return coords


def export_embeddings_csv(
    node_ids: Sequence[str], labels: np.ndarray, hidden: np.ndarray, path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,label," + ",".join(f"h{i}" for i in range(hidden.shape[1])) + "\n")
        for node_id, label, row in zip(node_ids, labels, hidden):
            fh.write(f"{node_id},{int(label)}," + ",".join(repr(v) for v in row) + "\n")


def export_pca_csv(
    node_ids: Sequence[str], labels: np.ndarray, hidden: np.ndarray, path: str | Path
) -> None:
    coords = pca2(hidden)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,label,x,y\n")
        for node_id, label, (px, py) in zip(node_ids, labels, coords):
            fh.write(f"{node_id},{int(label)},{px!r},{py!r}\n")
