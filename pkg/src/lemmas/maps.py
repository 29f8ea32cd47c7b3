"""
Holomorphic maps the lemma checks run on: a small suite of closed-form maps plus any function model.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from model.function_model import FunctionModel
from util.errors import InvalidParams
from util.log_complex import LogComplex

ArrayMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HolomorphicMap:
    name: str
    f: ArrayMap
    df: ArrayMap
    # True for conformal maps of the unit disk with f(0) = 0 and f'(0) = 1
    normalized: bool = False
    model: Optional[FunctionModel] = None

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.f(np.asarray(z, dtype=complex))

    def derivative(self, z: np.ndarray) -> np.ndarray:
        return self.df(np.asarray(z, dtype=complex))

    def log_abs_derivative(self, z: np.ndarray) -> np.ndarray:
        """
        log|f'| at each point. Model-backed maps go through log-polar arithmetic, so |f'| may lie far outside
        the double range.
        """
        z = np.asarray(z, dtype=complex)
        if self.model is None:
            with np.errstate(divide="ignore"):
                return np.log(np.abs(self.derivative(z)))
        out = np.empty(z.shape)
        for idx, w in np.ndenumerate(z):
            out[idx] = self.model.derivative(LogComplex.from_complex(complex(w))).log_mod
        return out

    @classmethod
    def from_model(cls, model: FunctionModel) -> HolomorphicMap:
        return cls(model.name, model.evaluate_array, model.derivative_array, False, model)


def _koebe(z: np.ndarray) -> np.ndarray:
    return z / (1.0 - z) ** 2


def _koebe_derivative(z: np.ndarray) -> np.ndarray:
    return (1.0 + z) / (1.0 - z) ** 3


def rotated(m: HolomorphicMap, alpha: float, label: str) -> HolomorphicMap:
    """e^{-i alpha} f(e^{i alpha} z), normalized again when f is."""
    u = cmath.exp(1j * alpha)
    return HolomorphicMap(
        f"{m.name}-{label}",
        lambda z: m.f(u * z) / u,
        lambda z: m.df(u * z),
        m.normalized,
    )


IDENTITY = HolomorphicMap("identity", lambda z: z, lambda z: np.ones_like(z), True)
KOEBE = HolomorphicMap("koebe", _koebe, _koebe_derivative, True)
# e^z - 1 is injective on the unit disk since the disk has height below 2 pi
EXP_NORMALIZED = HolomorphicMap("exp-normalized", lambda z: np.exp(z) - 1.0, np.exp, True)
EXP = HolomorphicMap("exp", np.exp, np.exp)
AFFINE = HolomorphicMap("affine", lambda z: 2.0 * z + 1.0, lambda z: np.full_like(z, 2.0))
SQUARE = HolomorphicMap("square", lambda z: z**2, lambda z: 2.0 * z)

MAPS: Dict[str, HolomorphicMap] = {
    m.name: m
    for m in (
        IDENTITY,
        KOEBE,
        rotated(KOEBE, 0.25 * math.pi, "rot45"),
        rotated(KOEBE, 2.0, "rot2"),
        EXP_NORMALIZED,
        rotated(EXP_NORMALIZED, 0.5 * math.pi, "rot90"),
        EXP,
        AFFINE,
        SQUARE,
    )
}


def get_map(map_id: str) -> HolomorphicMap:
    """
    :raises InvalidParams: for an unknown map id
    """
    try:
        return MAPS[map_id]
    except KeyError:
        raise InvalidParams(f"unknown map {map_id!r}, expected one of {sorted(MAPS)}")
