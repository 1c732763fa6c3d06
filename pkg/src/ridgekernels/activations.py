"""Scalar activation functions used inside ridge-kernel feature maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Activation:
    """A named scalar function applied elementwise to feature arguments.

    The callable must accept an ndarray and return an ndarray of the same
    shape (plain ufunc-style broadcasting).  Evaluation is pure.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))


def _relu(t: np.ndarray) -> np.ndarray:
    return np.maximum(t, 0.0)


COSINE = Activation("cos", np.cos)
RELU = Activation("relu", _relu)

_REGISTRY: dict[str, Activation] = {"cos": COSINE, "relu": RELU}


def register_activation(name: str, fn: Callable[[np.ndarray], np.ndarray]) -> Activation:
    """Register a custom activation so serialized models can resolve it by name.

    The caller is responsible for the function being continuous and
    non-polynomial; neither property is checked here.
    """
    act = Activation(name, fn)
    _REGISTRY[name] = act
    return act


def get_activation(name: str) -> Activation:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}; registered: {sorted(_REGISTRY)}") from None
