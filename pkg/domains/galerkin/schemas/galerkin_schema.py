from __future__ import annotations
from typing import Dict, Optional, Tuple

import numpy as np

from domains.lattice import BoxDomain, LatticeVector
from shared.infrastructure import BaseSchema, ReportSchema

Index = Tuple[int, ...]

COEFFICIENT_CONVENTION = (
    "h(N, beta) is the inner product of the unit eigenvector with the orthonormalized v_beta; "
    "the unnormalized (chi_N, v_beta) equals h * ||v_beta||"
)


class SpectralBasis(BaseSchema):
    """Моды B⁺ с |β| ≤ cutoff в каноническом порядке и их нормировки"""
    box: BoxDomain
    cutoff: float
    modes: np.ndarray
    norms: np.ndarray
    positions: Dict[Index, int]

    @property
    def size(self) -> int:
        return int(self.modes.shape[0])

    @property
    def normalizers(self) -> np.ndarray:
        """1/‖v_β‖ по модам"""
        return 1.0 / self.norms

    def mode(self, position: int) -> LatticeVector:
        return LatticeVector(index=tuple(int(n) for n in self.modes[position]), box=self.box)

    def position(self, index: Index) -> Optional[int]:
        """Номер моды по индексу (знак компонент не важен)"""
        return self.positions.get(tuple(abs(int(n)) for n in index))

    def __hash__(self) -> int:
        return hash((self.box, self.cutoff, self.size))


class Match(ReportSchema):
    """Сопоставление моды β собственному значению ξ_N"""
    beta: Index
    N: int
    xi: float
    h: float
    h_unnormalized: float
    free_value: float
    window_half_width: float
    cluster: Tuple[int, ...]
    tail: bool = False

    @property
    def dominance(self) -> float:
        return self.h ** 2


class EigenSolution(BaseSchema):
    """
    Разложение усечённого оператора.

    Столбец vectors[:, N] это N-й собственный вектор в ортонормированном
    базисе, строка отвечает моде basis.modes[j].
    """
    eigenvalues: np.ndarray
    vectors: np.ndarray
    basis: Optional[SpectralBasis] = None
    ell: Optional[float] = None
    support_radius: float = 0.0
    max_residual: float = 0.0
    kato_gap: Optional[float] = None
    matches: Tuple[Match, ...] = ()

    @property
    def size(self) -> int:
        return int(self.eigenvalues.shape[0])

    def coefficient(self, N: int, index: Index) -> Optional[float]:
        """Ортонормированный коэффициент h(N, γ); None вне базиса"""
        j = self.basis.position(index)
        return None if j is None else float(self.vectors[j, N])

    def unnormalized(self, N: int, index: Index) -> Optional[float]:
        """(χ_N, v_γ) = h(N, γ)·‖v_γ‖"""
        j = self.basis.position(index)
        return None if j is None else float(self.vectors[j, N] * self.basis.norms[j])

    def coefficient_table(self, N: int) -> Dict[Index, float]:
        """Ненормированные коэффициенты N-й функции по всем модам базиса"""
        values = self.vectors[:, N] * self.basis.norms
        return {tuple(int(n) for n in row): float(v) for row, v in zip(self.basis.modes, values)}

    def match_for(self, index: Index) -> Optional[Match]:
        key = tuple(abs(int(n)) for n in index)
        return next((m for m in self.matches if m.beta == key), None)

    def with_match(self, match: Match) -> EigenSolution:
        others = tuple(m for m in self.matches if m.beta != match.beta)
        return self.model_copy(update={'matches': others + (match,)})

    def __hash__(self) -> int:
        return id(self)


class BindingReport(ReportSchema):
    """Невязка формулы связи для сопоставленной пары"""
    beta: Index
    N: int
    lhs: float
    rhs: float
    residual: float
    tail: bool
    missing_targets: int


class ParsevalReport(ReportSchema):
    beta: Index
    inside_mass: float
    outside_mass: float
    window_half_width: float
