import math
from typing import Iterable, Sequence, Tuple

import numpy as np

TINY_NORM_SQ = 1e-300


def fractional_power(norm_sq, ell: float):
    """Возвращает (|x|²)^ℓ через exp/log; ниже 1e-300 результат равен точному нулю"""
    s = np.asarray(norm_sq, dtype=float)
    safe = np.where(s > TINY_NORM_SQ, s, 1.0)
    out = np.where(s > TINY_NORM_SQ, np.exp(ell * np.log(safe)), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def power_gap(norm_sq_a, norm_sq_b, ell: float):
    """Модуль разности |a|^{2ℓ} − |b|^{2ℓ} по квадратам норм"""
    return np.abs(fractional_power(norm_sq_a, ell) - fractional_power(norm_sq_b, ell))


def exact_sum(values: Iterable[float]) -> float:
    """Сумма с точным округлением, не зависящая от порядка разбиения"""
    return math.fsum(values)


def gauss_legendre_grid(sides: Sequence[float], points_per_axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """Узлы и веса тензорной квадратуры Гаусса–Лежандра на ∏[0, a_i]"""
    nodes, weights = np.polynomial.legendre.leggauss(points_per_axis)
    axes_x = []
    axes_w = []
    for a in sides:
        axes_x.append(0.5 * a * (nodes + 1.0))
        axes_w.append(0.5 * a * weights)
    mesh_x = np.meshgrid(*axes_x, indexing='ij')
    mesh_w = np.meshgrid(*axes_w, indexing='ij')
    points = np.stack([m.ravel() for m in mesh_x], axis=1)
    w = np.prod(np.stack([m.ravel() for m in mesh_w], axis=1), axis=1)
    return points, w


def shell_samples(rng: np.random.Generator, count: int, dim: int, inner: float, outer: float) -> np.ndarray:
    """Равномерные точки в сферическом слое inner < |x| < outer"""
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    u = rng.random(count)
    radii = (inner ** dim + u * (outer ** dim - inner ** dim)) ** (1.0 / dim)
    return directions * radii[:, None]


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Генератор блока выборок: зависит только от (seed, номер блока)"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))
