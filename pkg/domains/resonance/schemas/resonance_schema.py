from __future__ import annotations
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import Field, model_validator

from domains.lattice import LatticeVector
from shared.infrastructure import BaseSchema, ReportSchema

# Константы слоя |x| ~ r
SHELL_INNER = 0.5
SHELL_OUTER = 2.0


class ResonanceParams(BaseSchema):
    """Параметры классификации: масштаб, глубина, порядок и производные показатели"""
    r: float
    p: int
    ell: float
    d: int
    alpha: float
    alpha_k: Tuple[float, ...]
    threshold: float
    perturbation_radius: float
    p1: int
    c: int
    exponent_override: Optional[float] = None
    threshold_override: Optional[float] = None
    classical: bool = False

    @property
    def override_active(self) -> bool:
        return self.exponent_override is not None or self.threshold_override is not None

    @property
    def test_radius(self) -> float:
        """Радиус тестового множества p·r^α"""
        return self.p * self.perturbation_radius

    @property
    def max_depth(self) -> int:
        """Наибольшее допустимое kmax"""
        if self.override_active:
            return self.p1
        return min(self.p1, self.p - self.c)


class DomainLabel(BaseSchema):
    kind: Literal['resonance', 'non_resonance']
    witnesses: Tuple[LatticeVector, ...] = ()

    @model_validator(mode='after')
    def _kind_matches_witnesses(self) -> 'DomainLabel':
        if (self.kind == 'resonance') != bool(self.witnesses):
            raise ValueError("resonance тогда и только тогда, когда есть свидетели")
        return self

    @property
    def is_resonance(self) -> bool:
        return self.kind == 'resonance'


class GridSpec(BaseSchema):
    """
    Двумерный срез: точка ячейки (i, j) равна
    anchor + (u0 + i·h1)·axis1 + (v0 + j·h2)·axis2.
    """
    origin: Tuple[float, float]
    spacing: Tuple[float, float]
    counts: Tuple[int, int]
    anchor: Optional[Tuple[float, ...]] = None
    axes: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    @property
    def cell_count(self) -> int:
        return self.counts[0] * self.counts[1]

    def plane_coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Координаты ячеек в плоскости среза; строка j пробегает i"""
        u = self.origin[0] + self.spacing[0] * np.arange(self.counts[0])
        v = self.origin[1] + self.spacing[1] * np.arange(self.counts[1])
        vv, uu = np.meshgrid(v, u, indexing='ij')
        return uu.ravel(), vv.ravel()

    def points(self, dimension: int) -> np.ndarray:
        u, v = self.plane_coordinates()
        anchor = np.zeros(dimension) if self.anchor is None else np.asarray(self.anchor, dtype=float)
        if self.axes is None:
            axis1 = np.eye(dimension)[0]
            axis2 = np.eye(dimension)[1]
        else:
            axis1, axis2 = (np.asarray(a, dtype=float) for a in self.axes)
        return anchor[None, :] + u[:, None] * axis1[None, :] + v[:, None] * axis2[None, :]


class ScanResult(BaseSchema):
    """Данные для рисунка: по ячейке зазоры по β и принадлежность объединению"""
    grid: GridSpec
    betas: Tuple[Tuple[int, ...], ...]
    ell: float
    r: float
    threshold: float
    override_active: bool
    u: np.ndarray
    v: np.ndarray
    gaps: np.ndarray
    gap_min: np.ndarray
    witness_count: np.ndarray
    in_resonance: np.ndarray

    @property
    def resonance_cells(self) -> int:
        return int(np.count_nonzero(self.in_resonance))


class MeasureResult(ReportSchema):
    """Оценка доли нерезонансных точек в слое ½r < |x| < 2r"""
    r: float
    ell: float
    fraction: float
    stderr: float
    n_samples: int
    seed: int
    nonresonant_count: int
    override_active: bool
    threshold: float


class InclusionReport(ReportSchema):
    """Счётчики нарушений включений теоремы о среднем"""
    ell: float
    samples: int
    kappa: float
    premise_count: int = Field(description="Точек, где выполнена посылка первого включения")
    first_violations: int
    second_checks: int
    second_violations: int

    @property
    def passed(self) -> bool:
        return self.first_violations == 0 and self.second_violations == 0
