"""Two-layer bidirectional recurrent review classifier and its file format.

Architecture: frozen embeddings -> BiRNN layer -> dropout -> BiRNN layer ->
pooled final states -> dropout -> dense softmax over (negative, positive).
The recurrent cells are GRU (default) or LSTM; padded steps never update
the hidden state.
"""

from __future__ import annotations

import enum
import json
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import numcore as nc
from .corpus import Label
from .embeddings import EmbeddingMatrix
from .numcore import Tensor
from .textproc import EncodedSequence, encode_batch

MAGIC = b"MLSA"
FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


class ModelFileError(ModelError):
    pass


class CellType(str, enum.Enum):
    GRU = "gru"
    LSTM = "lstm"


GATES = {CellType.GRU: ("z", "r", "h"), CellType.LSTM: ("i", "f", "o", "g")}


@dataclass(frozen=True)
class Hyperparams:
    emb_dim: int = 100
    layers: int = 2
    hidden: int = 40
    dropout_p: float = 0.2
    max_len: int = 200
    cell_type: CellType = CellType.GRU
    num_classes: int = 2

    def __post_init__(self):
        object.__setattr__(self, "cell_type", CellType(self.cell_type))
        for name in ("emb_dim", "layers", "hidden", "max_len", "num_classes"):
            if int(getattr(self, name)) < 1:
                raise ModelError(f"hyperparameter {name} must be positive")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ModelError("dropout_p must be in [0, 1)")
        if self.num_classes != 2:
            raise ModelError("only binary polarity (num_classes=2) is supported")

    def to_json(self) -> dict:
        d = asdict(self)
        d["cell_type"] = self.cell_type.value
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Hyperparams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ModelError(f"unknown hyperparameters: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ModelWeights:
    hp: Hyperparams
    params: dict[str, Tensor]
    embedding_hash: str
    vocab_hash: str | None = None

    def tensors(self) -> list[Tensor]:
        return list(self.params.values())

    def copy(self, dtype=None) -> "ModelWeights":
        params = {}
        for k, t in self.params.items():
            params[k] = Tensor(t.data.astype(dtype or t.dtype, copy=True), requires_grad=True, name=k)
        return ModelWeights(self.hp, params, self.embedding_hash, self.vocab_hash)

    def check_embedding(self, emb: EmbeddingMatrix) -> None:
        if emb.content_hash() != self.embedding_hash:
            raise ModelError("embedding matrix does not match the one the model was built with")

    def check_vocab(self, vocab) -> None:
        if self.vocab_hash is not None and vocab.content_hash() != self.vocab_hash:
            raise ModelError("vocabulary does not match the one the model was built with")


@dataclass(frozen=True)
class Prediction:
    probs: tuple[float, float]

    @property
    def p_pos(self) -> float:
        return self.probs[1]

    @property
    def label(self) -> Label:
        # exact tie goes to negative
        return Label.POSITIVE if self.probs[1] > self.probs[0] else Label.NEGATIVE


def parameter_shapes(hp: Hyperparams) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {}
    H = hp.hidden
    for layer in range(hp.layers):
        d_in = hp.emb_dim if layer == 0 else 2 * H
        for direction in ("fwd", "bwd"):
            for g in GATES[hp.cell_type]:
                pre = f"l{layer}.{direction}"
                shapes[f"{pre}.W_{g}"] = (H, d_in)
                shapes[f"{pre}.U_{g}"] = (H, H)
                shapes[f"{pre}.b_{g}"] = (H,)
    shapes["out.W"] = (hp.num_classes, 2 * H)
    shapes["out.b"] = (hp.num_classes,)
    return shapes


def init_model(hp: Hyperparams, emb: EmbeddingMatrix, seed: int = 0, dtype=np.float32,
               vocab_hash: str | None = None) -> ModelWeights:
    """Glorot-uniform matrices, zero biases; deterministic in ``seed``."""
    if emb.dim != hp.emb_dim:
        raise ModelError(f"embedding dim {emb.dim} does not match emb_dim={hp.emb_dim}")
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in parameter_shapes(hp).items():
        if len(shape) == 2:
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            data = rng.uniform(-limit, limit, size=shape)
        else:
            data = np.zeros(shape)
        params[name] = Tensor(data.astype(dtype), requires_grad=True, name=name)
    return ModelWeights(hp, params, emb.content_hash(), vocab_hash)


def _gru_step(x, h, UT, m):
    z = nc.sigmoid(x["z"] + h @ UT["z"])
    r = nc.sigmoid(x["r"] + h @ UT["r"])
    cand = nc.tanh(x["h"] + (r * h) @ UT["h"])
    new = (1.0 - z) * h + z * cand
    return nc.where(m, new, h), None


def _lstm_step(x, h, c, UT, m):
    i = nc.sigmoid(x["i"] + h @ UT["i"])
    f = nc.sigmoid(x["f"] + h @ UT["f"])
    o = nc.sigmoid(x["o"] + h @ UT["o"])
    g = nc.tanh(x["g"] + h @ UT["g"])
    c_new = f * c + i * g
    h_new = o * nc.tanh(c_new)
    return nc.where(m, h_new, h), nc.where(m, c_new, c)


def _run_direction(w: ModelWeights, prefix: str, flat_x: Tensor, T: int, B: int,
                   mask: np.ndarray, reverse: bool):
    hp = w.hp
    H = hp.hidden
    gates = GATES[hp.cell_type]
    p = w.params
    # input projections for every time step at once
    xs = {g: nc.unstack(nc.reshape(flat_x @ p[f"{prefix}.W_{g}"].T + p[f"{prefix}.b_{g}"], (T, B, H)))
          for g in gates}
    UT = {g: p[f"{prefix}.U_{g}"].T for g in gates}
    zeros = Tensor(np.zeros((B, H), dtype=flat_x.dtype))
    h, c = zeros, zeros
    outs: list = [None] * T
    for t in (range(T - 1, -1, -1) if reverse else range(T)):
        x_t = {g: xs[g][t] for g in gates}
        if hp.cell_type is CellType.GRU:
            h, _ = _gru_step(x_t, h, UT, mask[t])
        else:
            h, c = _lstm_step(x_t, h, c, UT, mask[t])
        outs[t] = h
    return outs, h


def forward(w: ModelWeights, emb: EmbeddingMatrix, indices: np.ndarray, mask: np.ndarray,
            train: bool = False, rng: np.random.Generator | None = None) -> Tensor:
    """Logits of shape ``(B, 2)`` for index/mask arrays of shape ``(B, T)``."""
    indices = np.asarray(indices)
    mask = np.asarray(mask, dtype=bool)
    if indices.ndim != 2 or indices.shape != mask.shape:
        raise ModelError(f"indices {indices.shape} and mask {mask.shape} must be matching (B, T) arrays")
    if indices.shape[0] == 0:
        raise ModelError("empty batch")
    if not mask[:, 0].all():
        raise ModelError("sequence with true_length 0")
    hp = w.hp
    dtype = next(iter(w.params.values())).dtype
    table = Tensor(np.asarray(emb.matrix, dtype=dtype))
    B, T = indices.shape
    x = nc.embedding_lookup(table, indices.T)  # (T, B, D)
    step_mask = mask.T[:, :, None]  # (T, B, 1)
    pooled = None
    for layer in range(hp.layers):
        d_in = x.shape[-1]
        flat = nc.reshape(x, (T * B, d_in))
        fwd_outs, fwd_last = _run_direction(w, f"l{layer}.fwd", flat, T, B, step_mask, reverse=False)
        bwd_outs, bwd_first = _run_direction(w, f"l{layer}.bwd", flat, T, B, step_mask, reverse=True)
        pooled = nc.concat([fwd_last, bwd_first], axis=-1)
        if layer + 1 < hp.layers:
            seq = nc.concat([nc.stack(fwd_outs), nc.stack(bwd_outs)], axis=-1)
            x = nc.dropout(seq, hp.dropout_p, train, rng)
    pooled = nc.dropout(pooled, hp.dropout_p, train, rng)
    return pooled @ w.params["out.W"].T + w.params["out.b"]


def predict(w: ModelWeights, emb: EmbeddingMatrix, seqs: Sequence[EncodedSequence],
            train: bool = False, rng: np.random.Generator | None = None,
            batch_size: int = 256) -> list[Prediction]:
    if not seqs:
        raise ModelError("empty batch")
    out: list[Prediction] = []
    for start in range(0, len(seqs), batch_size):
        chunk = seqs[start:start + batch_size]
        if any(s.true_length < 1 for s in chunk):
            raise ModelError("sequence with true_length 0")
        indices, mask = encode_batch(chunk)
        # trailing all-pad columns never change any state
        width = max(s.true_length for s in chunk)
        logits = forward(w, emb, indices[:, :width], mask[:, :width], train=train, rng=rng)
        probs = nc.softmax_np(logits.data.astype(np.float64))
        out.extend(Prediction((float(p[0]), float(p[1]))) for p in probs)
    return out


def save(w: ModelWeights, path, vocab_hash: str | None = None) -> None:
    """Write ``MLSA`` | version byte | u32 header length | JSON header | f32 payload."""
    directory = []
    chunks = []
    offset = 0
    for name, t in w.params.items():
        buf = np.ascontiguousarray(t.data, dtype="<f4").tobytes()
        directory.append({"name": name, "shape": list(t.shape), "offset": offset, "nbytes": len(buf)})
        chunks.append(buf)
        offset += len(buf)
    header = {
        "hyperparams": w.hp.to_json(),
        "tensors": directory,
        "payload_bytes": offset,
        "dtype": "float32-le",
        "vocab_hash": vocab_hash if vocab_hash is not None else w.vocab_hash,
        "embedding_hash": w.embedding_hash,
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([FORMAT_VERSION]))
        fh.write(struct.pack("<I", len(hbytes)))
        fh.write(hbytes)
        for c in chunks:
            fh.write(c)
    tmp.replace(path)


def load(path, expected: Hyperparams | None = None) -> tuple[ModelWeights, Hyperparams]:
    """Read a model file; ``expected`` pins the architecture the caller is configured for."""
    raw = Path(path).read_bytes()
    if len(raw) < 9 or raw[:4] != MAGIC:
        raise ModelFileError(f"{path}: not a model file (bad magic)")
    if raw[4] != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported format version {raw[4]}")
    (hlen,) = struct.unpack("<I", raw[5:9])
    if 9 + hlen > len(raw):
        raise ModelFileError(f"{path}: truncated header")
    try:
        header = json.loads(raw[9:9 + hlen].decode("utf-8"))
        hp = Hyperparams.from_json(header["hyperparams"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ModelFileError(f"{path}: corrupt header ({exc})") from None
    if expected is not None:
        for f in fields(Hyperparams):
            if getattr(hp, f.name) != getattr(expected, f.name):
                raise ModelFileError(
                    f"{path}: file has {f.name}={getattr(hp, f.name)!s} but run is configured "
                    f"with {f.name}={getattr(expected, f.name)!s}")
    payload = raw[9 + hlen:]
    if len(payload) != header.get("payload_bytes"):
        raise ModelFileError(f"{path}: payload is {len(payload)} bytes, header declares {header.get('payload_bytes')}")
    want = parameter_shapes(hp)
    params = {}
    end = 0
    for entry in header["tensors"]:
        name, shape, off, nbytes = entry["name"], tuple(entry["shape"]), entry["offset"], entry["nbytes"]
        if want.get(name) != shape:
            raise ModelFileError(f"{path}: tensor {name} has shape {shape}, architecture needs {want.get(name)}")
        if off != end or nbytes != 4 * int(np.prod(shape)) or off + nbytes > len(payload):
            raise ModelFileError(f"{path}: tensor directory inconsistent with payload at {name}")
        data = np.frombuffer(payload, dtype="<f4", count=nbytes // 4, offset=off).reshape(shape)
        params[name] = Tensor(data.astype(np.float32), requires_grad=True, name=name)
        end = off + nbytes
    if end != len(payload) or set(params) != set(want):
        raise ModelFileError(f"{path}: tensor directory inconsistent with payload")
    params = {k: params[k] for k in want}
    return ModelWeights(hp, params, header["embedding_hash"], header.get("vocab_hash")), hp
