from __future__ import annotations
from typing import Dict, List, Tuple

from pydantic import Field

from domains.lattice import BoxDomain, LatticeVector
from shared.infrastructure import BaseSchema

Index = Tuple[int, ...]


class PotentialSpec(BaseSchema):
    """
    Потенциал q(x) как конечный набор коэффициентов Фурье q_β.

    Коэффициент хранится один раз на орбиту A_β при каноническом
    представителе (все n_i ≥ 0); коэффициент любого δ ∈ B равен
    коэффициенту его представителя. Синтез: q(x) = Σ_{β∈B} q_β v_β(x).
    """
    box: BoxDomain
    coeffs: Dict[Index, float] = Field(default_factory=dict)
    smoothness_order: int = 0
    support_radius: float = 0.0

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def representatives(self) -> List[Index]:
        """Представители в лексикографическом порядке"""
        return sorted(self.coeffs)

    @property
    def entries(self) -> List[Tuple[LatticeVector, float]]:
        return [(LatticeVector(index=n, box=self.box), self.coeffs[n]) for n in self.representatives]

    def __hash__(self) -> int:
        return hash((self.box, tuple(sorted(self.coeffs.items())), self.smoothness_order))
