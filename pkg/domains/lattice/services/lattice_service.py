import itertools
import logging
import math
from typing import List, Sequence, Union

import numpy as np

from domains.lattice.schemas import BoxDomain, LatticeVector, index_norm_sq
from shared.utils import fractional_power
from shared.utils.error_handlers import (
    DimensionTooSmall,
    IndexOutOfRange,
    NonPositiveSide,
    OrderOutOfRange,
)

logger = logging.getLogger(__name__)

# Относительный допуск на границе шара при сравнении квадратов норм
BOUNDARY_REL_TOL = 1e-12


def make_box(sides: Sequence[float]) -> BoxDomain:
    """Создание бокса K = ∏[0, a_i] с проверкой сторон"""
    sides = tuple(float(a) for a in sides)
    if len(sides) < 2:
        raise DimensionTooSmall(f"Размерность {len(sides)} < 2", {'sides': list(sides)})
    if any(not a > 0 for a in sides):
        raise NonPositiveSide("Все стороны бокса должны быть положительны", {'sides': list(sides)})
    return BoxDomain(sides=sides, volume=math.prod(sides))


def check_order(ell: float, allow_classical: bool = True) -> float:
    """Проверка порядка ℓ: ½ < ℓ < 1, значение ℓ = 1 только при allow_classical"""
    upper_ok = ell <= 1.0 if allow_classical else ell < 1.0
    if not (ell > 0.5 and upper_ok):
        raise OrderOutOfRange(f"Порядок ℓ={ell} вне допустимого интервала", {'ell': ell})
    return float(ell)


def within_radius(norm_sq, radius: float, inclusive: bool = True):
    """Сравнение квадрата нормы с радиусом с учётом допуска округления"""
    r2 = radius * radius
    if inclusive:
        return norm_sq <= r2 * (1.0 + BOUNDARY_REL_TOL)
    return norm_sq < r2 * (1.0 - BOUNDARY_REL_TOL)


def lattice_indices(box: BoxDomain, radius: float, positive_only: bool = False,
                    inclusive: bool = True) -> np.ndarray:
    """
    Мультииндексы решётки в шаре |β| ≤ radius (или < radius при inclusive=False).

    Возвращает массив (k, d) целых в лексикографическом порядке.
    """
    if radius <= 0:
        return np.zeros((0, box.dimension), dtype=np.int64)
    steps = np.asarray(box.steps)
    bounds = [int(math.floor(radius / s * (1.0 + BOUNDARY_REL_TOL))) for s in steps]
    axes = [
        np.arange(0 if positive_only else -b, b + 1, dtype=np.int64)
        for b in bounds
    ]
    mesh = np.meshgrid(*axes, indexing='ij')
    idx = np.stack([m.ravel() for m in mesh], axis=1)
    norm_sq = np.sum((idx * steps) ** 2, axis=1)
    return idx[within_radius(norm_sq, radius, inclusive)]


def enumerate_lattice(box: BoxDomain, radius: float, positive_only: bool = False) -> List[LatticeVector]:
    """Векторы B (или B⁺) с |β| ≤ radius в лексикографическом порядке индексов"""
    idx = lattice_indices(box, radius, positive_only)
    return [LatticeVector(index=tuple(int(n) for n in row), box=box) for row in idx]


def frac_norm(v: Union[LatticeVector, Sequence[int]], ell: float, box: BoxDomain = None) -> float:
    """Собственное значение свободного оператора |β|^{2ℓ}"""
    check_order(ell)
    if isinstance(v, LatticeVector):
        s = v.norm_sq
    else:
        s = index_norm_sq(v, box.steps)
    if ell == 1.0:
        return s
    return fractional_power(s, ell)


def orbit_size(v: Union[LatticeVector, Sequence[int]]) -> int:
    """|A_β| = 2^{число ненулевых компонент}"""
    index = v.index if isinstance(v, LatticeVector) else v
    return 2 ** sum(1 for n in index if n != 0)


def sign_orbit(v: LatticeVector) -> List[LatticeVector]:
    """Явное построение орбиты A_β перебором знаков"""
    choices = [(-n, n) if n != 0 else (0,) for n in v.index]
    members = sorted(set(itertools.product(*choices)))
    return [LatticeVector(index=m, box=v.box) for m in members]


def basis_norm_sq(v: Union[LatticeVector, Sequence[int]], box: BoxDomain) -> float:
    """‖v_β‖² = μ(K)·2^{−z(β)}"""
    return box.volume / orbit_size(v)


def unit_step(i: int, box: BoxDomain) -> LatticeVector:
    """Вектор e_i (нумерация координат с единицы)"""
    if not 1 <= i <= box.dimension:
        raise IndexOutOfRange(f"Координата {i} вне диапазона 1..{box.dimension}", {'i': i})
    return LatticeVector(index=tuple(1 if k == i - 1 else 0 for k in range(box.dimension)), box=box)


def canonical(v: LatticeVector) -> LatticeVector:
    return v.canonical()
