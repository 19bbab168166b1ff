"""Named parameter storage with per-entry gradients and freeze flags."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pjfit.numerics.matrix import Matrix, Tape


@dataclass
class Param:
    value: np.ndarray
    grad: np.ndarray
    trainable: bool = True
    # Adam moments, allocated on first optimizer step
    m: np.ndarray | None = field(default=None, repr=False)
    v: np.ndarray | None = field(default=None, repr=False)


class ParamStore:
    """Ordered name -> Param map. Iteration order is insertion order,
    which fixes checkpoint layout and makes runs reproducible."""

    def __init__(self) -> None:
        self._params: dict[str, Param] = {}

    def add(self, name: str, value, trainable: bool = True) -> Param:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        arr = np.ascontiguousarray(value, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError(f"parameter {name!r} must be 2-D, got shape {arr.shape}")
        p = Param(value=arr, grad=np.zeros_like(arr), trainable=trainable)
        self._params[name] = p
        return p

    def __getitem__(self, name: str) -> Param:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.grad[...] = 0.0

    def n_values(self) -> int:
        return sum(p.value.size for p in self._params.values())

    def bind(self, tape: Tape | None = None) -> "BoundParams":
        return BoundParams(self, tape)

    def clone(self) -> "ParamStore":
        out = ParamStore()
        for name, p in self._params.items():
            out.add(name, p.value.copy(), trainable=p.trainable)
        return out


class BoundParams:
    """Parameters viewed as Matrix nodes on one tape.

    Each Matrix shares the Param's grad buffer, so a backward pass writes
    gradients directly into the store.
    """

    def __init__(self, store: ParamStore, tape: Tape | None):
        self._store = store
        self.tape = tape
        self._cache: dict[str, Matrix] = {}

    def __getitem__(self, name: str) -> Matrix:
        m = self._cache.get(name)
        if m is None:
            p = self._store[name]
            m = Matrix(p.value, tape=self.tape, grad=p.grad)
            self._cache[name] = m
        return m

    def constant(self, data) -> Matrix:
        """Wrap input data (embeddings, padded histories) for this tape.

        Constants take part in the graph but nothing reads their gradients.
        """
        return Matrix(data, tape=self.tape)


def glorot_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))
