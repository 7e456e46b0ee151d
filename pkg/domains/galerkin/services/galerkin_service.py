import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from domains.galerkin.schemas import (
    BindingReport,
    EigenSolution,
    Index,
    Match,
    ParsevalReport,
    SpectralBasis,
)
from domains.lattice import (
    BoxDomain,
    LatticeVector,
    basis_norm_sq,
    check_order,
    frac_norm,
    index_norm_sq,
    lattice_indices,
)
from domains.potential import PotentialSpec, cosine_amplitudes, full_support, mass
from domains.resonance import ResonanceParams
from shared.concurrency import WorkerPool, WorkerPoolConfig
from shared.config import ApplicationConfig
from shared.infrastructure.services.base_service import BaseService
from shared.utils import exact_sum, fractional_power
from shared.utils.error_handlers import (
    BasisTooLarge,
    ConvergenceFailure,
    DomainMismatch,
    GalerkinError,
    NoEigenvalueInWindow,
    NoMatchedEigenpair,
    VanishingDenominator,
    log_execution_time,
    translate_linalg_errors,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-13
RESIDUAL_TOL = 1e-9
CLUSTER_TOL = 1e-9
# Предел размера ограничивающего параллелепипеда при переборе мод
ENUMERATION_GUARD = 50_000_000

IndexLike = Union[LatticeVector, Sequence[int]]


def _index(v: IndexLike) -> Index:
    return v.index if isinstance(v, LatticeVector) else tuple(int(n) for n in v)


def expand_index_product(n: Sequence[int], m: Sequence[int]) -> List[Tuple[Index, float]]:
    """
    Произведение косинусов в сумму: v_n·v_m = Σ w·v_γ.

    По каждой оси cos(a)cos(b) = ½cos(a+b) + ½cos(a−b), если обе частоты
    ненулевые, иначе один член с весом 1. Равные γ собираются.
    """
    per_axis = []
    for a, b in zip(n, m):
        a, b = abs(int(a)), abs(int(b))
        if a == 0 or b == 0:
            per_axis.append(((a + b, 1.0),))
        else:
            per_axis.append(((a + b, 0.5), (abs(a - b), 0.5)))
    collected: Dict[Index, float] = {}
    for combo in itertools.product(*per_axis):
        gamma = tuple(c[0] for c in combo)
        weight = math.prod(c[1] for c in combo)
        collected[gamma] = collected.get(gamma, 0.0) + weight
    return sorted(collected.items())


def product_expand(delta: LatticeVector, beta: LatticeVector) -> List[Tuple[LatticeVector, float]]:
    if delta.box != beta.box:
        raise DomainMismatch("Моды заданы на разных боксах")
    return [
        (LatticeVector(index=gamma, box=beta.box), weight)
        for gamma, weight in expand_index_product(delta.index, beta.index)
    ]


def kato_pairing(perturbed: np.ndarray, free: np.ndarray) -> float:
    """Наибольшее расхождение упорядоченных спектров"""
    perturbed = np.sort(np.asarray(perturbed, dtype=float))
    free = np.sort(np.asarray(free, dtype=float))
    if perturbed.shape != free.shape:
        raise GalerkinError("Спектры разной длины", {'sizes': [perturbed.size, free.size]})
    return float(np.max(np.abs(perturbed - free))) if perturbed.size else 0.0


def count_free_eigenvalues(box: BoxDomain, ell: float, a: float, half_width: float = 1.0) -> int:
    """Число β ∈ B⁺ с |β|^{2ℓ} в (a^{2ℓ} − w, a^{2ℓ} + w)"""
    check_order(ell)
    center = fractional_power(a * a, ell)
    radius = (center + half_width) ** (1.0 / (2.0 * ell))
    idx = lattice_indices(box, radius, positive_only=True)
    values = fractional_power(np.sum((idx * np.asarray(box.steps)) ** 2, axis=1), ell)
    return int(np.count_nonzero(np.abs(values - center) < half_width))


def second_order_coefficient(basis: SpectralBasis, matrix: np.ndarray, beta: IndexLike, ell: float) -> float:
    """Поправка второго порядка Σ_{γ≠β} H_{γβ}²/(E_β − E_γ) по матрице"""
    j = basis.position(_index(beta))
    if j is None:
        raise NoMatchedEigenpair(f"Мода {_index(beta)} вне базиса")
    energy = frac_norm(basis.mode(j), ell)
    terms = []
    for g in range(basis.size):
        entry = matrix[g, j]
        if g == j or entry == 0.0:
            continue
        den = energy - frac_norm(basis.mode(g), ell)
        if abs(den) <= 1e-12 * max(1.0, abs(energy)):
            raise VanishingDenominator(
                "Вырожденная пара мод во втором порядке", [basis.mode(g).index], {'beta': list(_index(beta))}
            )
        terms.append(entry * entry / den)
    return exact_sum(terms)


class GalerkinService(BaseService):
    """Сервис усечённой задачи Галёркина в косинусном базисе"""

    def __init__(self, settings: Optional[ApplicationConfig] = None):
        super().__init__(settings)
        self.pool = WorkerPool(WorkerPoolConfig(max_workers=self.max_workers))

    def build_basis(self, box: BoxDomain, cutoff: float) -> SpectralBasis:
        """Моды B⁺ с |β| ≤ cutoff"""
        cap = self.settings.max_modes
        bounding = math.prod(int(cutoff / s) + 1 for s in box.steps)
        if bounding > ENUMERATION_GUARD:
            raise BasisTooLarge(
                f"Перебор мод при cutoff={cutoff} слишком велик", {'cutoff': cutoff, 'max_modes': cap}
            )
        modes = lattice_indices(box, cutoff, positive_only=True)
        if modes.shape[0] > cap:
            raise BasisTooLarge(
                f"Базис из {modes.shape[0]} мод превышает лимит {cap}",
                {'modes': int(modes.shape[0]), 'max_modes': cap},
            )
        norms = np.sqrt(np.array([basis_norm_sq(tuple(row), box) for row in modes]))
        positions = {tuple(int(n) for n in row): i for i, row in enumerate(modes)}
        logger.info(f"Построен базис: {modes.shape[0]} мод, cutoff={cutoff}")
        return SpectralBasis(box=box, cutoff=float(cutoff), modes=modes, norms=norms, positions=positions)

    @log_execution_time
    def assemble(self, basis: SpectralBasis, q: PotentialSpec, ell: float) -> np.ndarray:
        """Матрица (−Δ)^ℓ + q в ортонормированном базисе"""
        if q.box != basis.box:
            raise DomainMismatch("Потенциал и базис заданы на разных боксах")
        check_order(ell)
        diagonal = np.array([frac_norm(tuple(row), ell, basis.box) for row in basis.modes])
        amplitudes = list(cosine_amplitudes(q).items())

        def column(b: int) -> np.ndarray:
            col = np.zeros(basis.size)
            beta = basis.modes[b]
            for delta, amplitude in amplitudes:
                for gamma, weight in expand_index_product(delta, beta):
                    j = basis.positions.get(gamma)
                    if j is not None:
                        col[j] += amplitude * weight * basis.norms[j] / basis.norms[b]
            return col

        if amplitudes:
            matrix = np.column_stack(self.pool.map(column, range(basis.size)))
        else:
            matrix = np.zeros((basis.size, basis.size))
        matrix[np.diag_indices(basis.size)] += diagonal

        asymmetry = float(np.max(np.abs(matrix - matrix.T))) if basis.size else 0.0
        scale = max(1.0, float(np.max(np.abs(matrix)))) if basis.size else 1.0
        if asymmetry > SYMMETRY_TOL * scale:
            raise GalerkinError(
                f"Матрица несимметрична: {asymmetry:.3e}", {'asymmetry': asymmetry}
            )
        return 0.5 * (matrix + matrix.T)

    @translate_linalg_errors
    def solve(self, matrix: np.ndarray, basis: Optional[SpectralBasis] = None,
              ell: Optional[float] = None, support_radius: float = 0.0) -> EigenSolution:
        """Полное симметричное разложение с проверкой невязки"""
        matrix = np.asarray(matrix, dtype=float)
        size = matrix.shape[0]
        diagonal = np.diag(matrix)
        if np.array_equal(matrix, np.diag(diagonal)):
            order = np.argsort(diagonal, kind='stable')
            eigenvalues = diagonal[order]
            vectors = np.eye(size)[:, order]
        else:
            eigenvalues, vectors = scipy.linalg.eigh(matrix)

        residuals = np.linalg.norm(matrix @ vectors - vectors * eigenvalues[None, :], axis=0) if size else np.zeros(0)
        limits = RESIDUAL_TOL * (1.0 + np.abs(eigenvalues))
        if np.any(residuals > limits):
            worst = int(np.argmax(residuals / limits))
            raise ConvergenceFailure(
                f"Невязка собственной пары {worst} равна {residuals[worst]:.3e}",
                {'N': worst, 'residual': float(residuals[worst])},
            )
        logger.debug(f"Решена задача размера {size}")
        return EigenSolution(
            eigenvalues=eigenvalues,
            vectors=vectors,
            basis=basis,
            ell=ell,
            support_radius=support_radius,
            max_residual=float(np.max(residuals)) if size else 0.0,
        )

    def spectrum(self, basis: SpectralBasis, q: PotentialSpec, ell: float) -> EigenSolution:
        """Сборка и решение с проверкой оценки Като относительно свободного спектра"""
        matrix = self.assemble(basis, q, ell)
        solution = self.solve(matrix, basis, ell, q.support_radius)
        free = np.sort(np.array([frac_norm(basis.mode(j), ell) for j in range(basis.size)]))
        gap = kato_pairing(solution.eigenvalues, free)
        bound = mass(q)
        if gap > bound * (1.0 + 1e-12) + 1e-12:
            logger.warning(f"Сдвиг спектра {gap:.3e} превышает массу потенциала {bound:.3e}")
        return solution.model_copy(update={"kato_gap": gap})

    def _tail(self, solution: EigenSolution, index: Index) -> bool:
        norm = math.sqrt(index_norm_sq(index, solution.basis.box.steps))
        return norm > solution.basis.cutoff - solution.support_radius + 1e-12

    def match_eigenvalue(self, beta: IndexLike, solution: EigenSolution, params: ResonanceParams,
                         half_width: Optional[float] = None) -> Match:
        """Собственное значение в окне |ξ − |β|^{2ℓ}| < w с наибольшим |h(N, β)|"""
        index = tuple(abs(n) for n in _index(beta))
        j = solution.basis.position(index)
        if j is None:
            raise NoMatchedEigenpair(f"Мода {index} вне базиса", {'beta': list(index)})
        width = 0.5 * params.threshold if half_width is None else half_width
        energy = frac_norm(solution.basis.mode(j), solution.ell)
        window = np.flatnonzero(np.abs(solution.eigenvalues - energy) < width)
        if window.size == 0:
            raise NoEigenvalueInWindow(
                f"Нет собственных значений в окне {energy:.6g} ± {width:.3g}",
                {'beta': list(index), 'center': energy, 'half_width': width},
            )
        magnitudes = np.abs(solution.vectors[j, window])
        N = int(window[int(np.argmax(magnitudes))])
        xi = float(solution.eigenvalues[N])
        cluster = np.flatnonzero(np.abs(solution.eigenvalues - xi) <= CLUSTER_TOL * (1.0 + abs(xi)))
        tail = self._tail(solution, index)
        if tail:
            logger.warning(f"Мода {index} ближе к границе базиса, чем носитель потенциала")
        h = float(solution.vectors[j, N])
        return Match(
            beta=index,
            N=N,
            xi=xi,
            h=h,
            h_unnormalized=h * float(solution.basis.norms[j]),
            free_value=energy,
            window_half_width=width,
            cluster=tuple(int(c) for c in cluster),
            tail=tail,
        )

    def match_all(self, solution: EigenSolution, betas: Sequence[IndexLike], params: ResonanceParams) -> EigenSolution:
        """Сопоставление списка мод; результат сохраняется в решении"""
        for beta in betas:
            solution = solution.with_match(self.match_eigenvalue(beta, solution, params))
        return solution

    def verify_binding(self, solution: EigenSolution, q: PotentialSpec, beta: IndexLike) -> BindingReport:
        """
        Невязка (ξ_N − |β|^{2ℓ})(χ_N, v_β) = Σ_δ q_δ (χ_N, v_{β+δ}),
        приведённая к ортонормированной нормировке.
        """
        index = tuple(abs(n) for n in _index(beta))
        match = solution.match_for(index)
        if match is None:
            raise NoMatchedEigenpair(f"Для моды {index} нет сопоставленной пары", {'beta': list(index)})
        norm_beta = math.sqrt(basis_norm_sq(index, solution.basis.box))
        lhs = (match.xi - match.free_value) * match.h_unnormalized
        terms = []
        missing = 0
        for delta, coefficient in full_support(q):
            target = tuple(n + m for n, m in zip(index, delta))
            value = solution.unnormalized(match.N, target)
            if value is None:
                missing += 1
                continue
            terms.append(coefficient * value)
        rhs = exact_sum(terms)
        tail = match.tail or missing > 0
        if missing:
            logger.warning(f"Формула связи для {index}: {missing} мод вне базиса учтены нулём")
        return BindingReport(
            beta=index,
            N=match.N,
            lhs=lhs / norm_beta,
            rhs=rhs / norm_beta,
            residual=abs(lhs - rhs) / norm_beta,
            tail=tail,
            missing_targets=missing,
        )

    def parseval_check(self, solution: EigenSolution, beta: IndexLike, params: ResonanceParams,
                       half_width: Optional[float] = None) -> ParsevalReport:
        """Доля |h(N, β)|² внутри и вне окна |ξ_N − |β|^{2ℓ}| ≤ w"""
        index = tuple(abs(n) for n in _index(beta))
        j = solution.basis.position(index)
        if j is None:
            raise NoMatchedEigenpair(f"Мода {index} вне базиса", {'beta': list(index)})
        width = 0.5 * params.threshold if half_width is None else half_width
        energy = frac_norm(solution.basis.mode(j), solution.ell)
        inside = np.abs(solution.eigenvalues - energy) <= width
        squares = solution.vectors[j, :] ** 2
        return ParsevalReport(
            beta=index,
            inside_mass=exact_sum(squares[inside]),
            outside_mass=exact_sum(squares[~inside]),
            window_half_width=width,
        )
