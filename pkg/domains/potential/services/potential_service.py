import itertools
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from domains.lattice import BoxDomain, LatticeVector, index_norm_sq, orbit_size, within_radius
from domains.potential.schemas import Index, PotentialSpec
from shared.utils import exact_sum
from shared.utils.error_handlers import (
    DomainMismatch,
    NonCanonicalRepresentative,
    NonFiniteCoefficient,
    PointOutsideBox,
    ZeroModeForbidden,
)

logger = logging.getLogger(__name__)

Entry = Tuple[Union[LatticeVector, Sequence[int]], float]


def make_potential(entries: Iterable[Entry], m: int, box: BoxDomain) -> PotentialSpec:
    """
    Построение потенциала по парам (представитель, коэффициент).

    Повторные представители суммируются, нулевые коэффициенты отбрасываются.
    """
    coeffs: Dict[Index, float] = {}
    for vector, value in entries:
        if isinstance(vector, LatticeVector):
            if vector.box != box:
                raise DomainMismatch("Мода потенциала задана на другом боксе", {'index': list(vector.index)})
            index = vector.index
        else:
            index = tuple(int(n) for n in vector)
        if len(index) != box.dimension:
            raise DomainMismatch(
                f"Индекс {index} не соответствует размерности {box.dimension}", {'index': list(index)}
            )
        if all(n == 0 for n in index):
            raise ZeroModeForbidden("Коэффициент при нулевой моде должен отсутствовать", {'value': value})
        if any(n < 0 for n in index):
            raise NonCanonicalRepresentative(
                f"Представитель {index} содержит отрицательные индексы", {'index': list(index)}
            )
        value = float(value)
        if not math.isfinite(value):
            raise NonFiniteCoefficient(
                f"Коэффициент при {index} не конечен: {value}", {'index': list(index)}
            )
        coeffs[index] = coeffs.get(index, 0.0) + value

    coeffs = {n: c for n, c in coeffs.items() if c != 0.0}
    radius = max((math.sqrt(index_norm_sq(n, box.steps)) for n in coeffs), default=0.0)
    return PotentialSpec(box=box, coeffs=coeffs, smoothness_order=int(m), support_radius=radius)


def full_coefficient(q: PotentialSpec, delta: Union[LatticeVector, Sequence[int]]) -> float:
    """Коэффициент q_δ для любого δ ∈ B: постоянен на орбитах"""
    index = delta.index if isinstance(delta, LatticeVector) else delta
    return q.coeffs.get(tuple(abs(int(n)) for n in index), 0.0)


def full_support(q: PotentialSpec, radius: Optional[float] = None) -> List[Tuple[Index, float]]:
    """
    Все δ ∈ B с q_δ ≠ 0 (по желанию только |δ| < radius) в лексикографическом порядке.
    """
    result = []
    for rep, value in q.coeffs.items():
        if radius is not None and not within_radius(index_norm_sq(rep, q.box.steps), radius, inclusive=False):
            continue
        choices = [(-n, n) if n != 0 else (0,) for n in rep]
        for member in itertools.product(*choices):
            result.append((member, value))
    result.sort(key=lambda item: item[0])
    return result


def cosine_amplitudes(q: PotentialSpec) -> Dict[Index, float]:
    """Амплитуды при v_β для β ∈ B⁺: |A_β|·q_β = (q, v_β)/‖v_β‖²"""
    return {n: orbit_size(n) * q.coeffs[n] for n in q.representatives}


def scale(q: PotentialSpec, factor: float) -> PotentialSpec:
    """Потенциал factor·q"""
    if factor == 0.0:
        return q.model_copy(update={'coeffs': {}, 'support_radius': 0.0})
    return q.model_copy(update={'coeffs': {n: factor * c for n, c in q.coeffs.items()}})


def _check_point(q: PotentialSpec, x: Sequence[float]) -> None:
    if not q.box.contains(x):
        raise PointOutsideBox(f"Точка {list(x)} вне бокса {list(q.box.sides)}", {'x': [float(t) for t in x]})


def evaluate(q: PotentialSpec, x: Sequence[float]) -> float:
    """Значение q(x) как конечная сумма косинусов"""
    _check_point(q, x)
    steps = q.box.steps
    terms = []
    for rep, amplitude in cosine_amplitudes(q).items():
        terms.append(amplitude * math.prod(math.cos(n * s * xi) for n, s, xi in zip(rep, steps, x)))
    return exact_sum(terms)


def evaluate_many(q: PotentialSpec, points: np.ndarray) -> np.ndarray:
    """Векторизованное вычисление q в массиве точек формы (k, d)"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    sides = np.asarray(q.box.sides)
    tol = 1e-12 * sides
    if np.any(points < -tol) or np.any(points > sides + tol):
        raise PointOutsideBox("Часть точек лежит вне бокса", {'count': int(points.shape[0])})
    steps = np.asarray(q.box.steps)
    values = np.zeros(points.shape[0])
    for rep, amplitude in cosine_amplitudes(q).items():
        values += amplitude * np.prod(np.cos(points * (np.asarray(rep) * steps)), axis=1)
    return values


def mass(q: PotentialSpec) -> float:
    """M = Σ_{β∈B} |q_β|"""
    return exact_sum(orbit_size(n) * abs(q.coeffs[n]) for n in q.representatives)


def _complement(part: float, total: float) -> float:
    """Неотрицательное t с part + t == total в арифметике float"""
    tail = max(total - part, 0.0)
    for _ in range(16):
        reached = part + tail
        if reached == total:
            break
        tail = math.nextafter(tail, math.inf if reached < total else 0.0)
    return tail


def truncate(q: PotentialSpec, radius: float) -> Tuple[PotentialSpec, float]:
    """
    Сужение q на шар |β| < radius.

    Возвращает усечённый потенциал и массу отброшенного хвоста,
    mass(усечённого) + хвост == mass(q) без ошибки округления.
    """
    kept: Dict[Index, float] = {}
    dropped = 0
    for n in q.representatives:
        if within_radius(index_norm_sq(n, q.box.steps), radius, inclusive=False):
            kept[n] = q.coeffs[n]
        else:
            dropped += 1
    radius_kept = max((math.sqrt(index_norm_sq(n, q.box.steps)) for n in kept), default=0.0)
    truncated = q.model_copy(update={'coeffs': kept, 'support_radius': radius_kept})
    tail_mass = _complement(mass(truncated), mass(q)) if dropped else 0.0
    if tail_mass > 0:
        logger.debug(f"Усечение потенциала по радиусу {radius}: отброшено {dropped} орбит, масса хвоста {tail_mass:.3e}")
    return truncated, tail_mass


def smoothness_sum(q: PotentialSpec, m: Optional[int] = None) -> float:
    """Σ_{β∈B} |q_β|²(1 + |β|^{2m})"""
    m = q.smoothness_order if m is None else m
    terms = []
    for n in q.representatives:
        s = index_norm_sq(n, q.box.steps)
        terms.append(orbit_size(n) * q.coeffs[n] ** 2 * (1.0 + s ** m))
    return exact_sum(terms)
