"""Named parameter storage, initialization, and binary checkpoints."""

from __future__ import annotations

import json

import numpy as np

from .tensor import Tensor

CHECKPOINT_MAGIC = b"SIMREC-CKPT-1\n"
CHECKPOINT_FORMAT = "simrec-checkpoint-v1"

# Standard LSTM-era recipe: small uniform weights, zero biases.
INIT_RANGE = 0.08


class ParamStore:
    """Map from dotted parameter names to trainable tensors.

    Names are unique and iteration is always sorted by name, which makes
    optimizer sweeps and checkpoints deterministic.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._params: dict[str, Tensor] = {}

    def create(self, name: str, shape, kind: str = "weight") -> Tensor:
        """Allocate and register a parameter.

        ``kind`` "weight" draws uniform [-0.08, 0.08]; "bias" starts at zero.
        """
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        if kind == "weight":
            data = self._rng.uniform(-INIT_RANGE, INIT_RANGE, size=shape)
        elif kind == "bias":
            data = np.zeros(shape)
        else:
            raise ValueError(f"unknown init kind: {kind}")
        t = Tensor(data, requires_grad=True)
        self._params[name] = t
        return t

    def register(self, name: str, data: np.ndarray) -> Tensor:
        """Register a parameter with externally supplied values."""
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        t = Tensor(np.array(data, dtype=np.float64), requires_grad=True)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return sorted(self._params)

    def items(self):
        for name in self.names():
            yield name, self._params[name]

    def n_entries(self) -> int:
        return sum(t.size for t in self._params.values())

    def zero_grads(self):
        for t in self._params.values():
            t.grad = None

    def snapshot(self) -> dict[str, np.ndarray]:
        """Deep copy of all parameter values (read-only use)."""
        return {name: t.data.copy() for name, t in self.items()}

    def load_snapshot(self, values: dict[str, np.ndarray]):
        for name, arr in values.items():
            t = self._params[name]
            if t.data.shape != arr.shape:
                raise ValueError(
                    f"snapshot shape mismatch for {name}: {t.data.shape} vs {arr.shape}"
                )
            t.data = arr.copy()


def save_checkpoint(path, store: ParamStore, config: dict | None = None):
    """Write parameters to ``path``; float64 payloads round-trip bit-exactly."""
    entries = [{"name": name, "shape": list(t.shape)} for name, t in store.items()]
    header = {
        "format": CHECKPOINT_FORMAT,
        "config": config or {},
        "entries": entries,
    }
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for _, t in store.items():
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[ParamStore, dict]:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    with open(path, "rb") as fh:
        magic = fh.readline()
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a simrec checkpoint: bad magic {magic!r}")
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format: {header.get('format')}")
        store = ParamStore()
        for entry in header["entries"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError(f"checkpoint truncated at entry {entry['name']}")
            data = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
            store.register(entry["name"], data)
        trailing = fh.read(1)
        if trailing:
            raise ValueError("checkpoint has trailing bytes")
    return store, header["config"]
