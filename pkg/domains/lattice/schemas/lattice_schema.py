from __future__ import annotations
import math
from typing import Sequence, Tuple

import numpy as np

from shared.infrastructure import BaseSchema


def index_norm_sq(index: Sequence[int], steps: Sequence[float]) -> float:
    """Σ (n_i·π/a_i)² с точным округлением суммы"""
    return math.fsum((n * s) ** 2 for n, s in zip(index, steps))


class BoxDomain(BaseSchema):
    """Прямоугольный бокс K = ∏[0, a_i]"""
    sides: Tuple[float, ...]
    volume: float

    @property
    def dimension(self) -> int:
        return len(self.sides)

    @property
    def steps(self) -> Tuple[float, ...]:
        """Шаги решётки π/a_i"""
        return tuple(math.pi / a for a in self.sides)

    def contains(self, x: Sequence[float], rel_tol: float = 1e-12) -> bool:
        if len(x) != self.dimension:
            return False
        return all(-rel_tol * a <= xi <= a * (1.0 + rel_tol) for xi, a in zip(x, self.sides))


class LatticeVector(BaseSchema):
    """Мода β косинусного базиса, хранится целочисленным мультииндексом"""
    index: Tuple[int, ...]
    box: BoxDomain

    @property
    def components(self) -> np.ndarray:
        return np.array([n * s for n, s in zip(self.index, self.box.steps)], dtype=float)

    @property
    def norm_sq(self) -> float:
        return index_norm_sq(self.index, self.box.steps)

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    @property
    def is_positive(self) -> bool:
        """Принадлежность B⁺"""
        return all(n >= 0 for n in self.index)

    @property
    def is_zero(self) -> bool:
        return all(n == 0 for n in self.index)

    def canonical(self) -> LatticeVector:
        return LatticeVector(index=tuple(abs(n) for n in self.index), box=self.box)

    def shifted(self, offset: Sequence[int]) -> LatticeVector:
        return LatticeVector(index=tuple(n + m for n, m in zip(self.index, offset)), box=self.box)

    def __str__(self) -> str:
        return f"β{self.index}"
