import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from domains.lattice import BoxDomain, LatticeVector, check_order, lattice_indices
from domains.resonance.schemas import (
    SHELL_INNER,
    SHELL_OUTER,
    DomainLabel,
    GridSpec,
    InclusionReport,
    MeasureResult,
    ResonanceParams,
    ScanResult,
)
from shared.concurrency import WorkerPool, WorkerPoolConfig
from shared.config import ApplicationConfig
from shared.infrastructure.services.base_service import BaseService
from shared.utils import block_rng, fractional_power, power_gap, shell_samples
from shared.utils.error_handlers import (
    ConfigError,
    DepthOutOfRange,
    DimensionTooSmall,
    EmptyTestSet,
    GridTooLarge,
    ScaleTooSmall,
    log_execution_time,
)

logger = logging.getLogger(__name__)

# Запас на округление при проверке включений
INCLUSION_REL_SLACK = 1e-12
MIN_SAMPLES = 1000

VectorLike = Union[LatticeVector, Sequence[float], np.ndarray]


def default_alpha(ell: float, d: int) -> float:
    """α(ℓ) = (2ℓ − 1) / (2(d + 20)·3^{d+1})"""
    return (2.0 * ell - 1.0) / (2.0 * (d + 20) * 3 ** (d + 1))


def derive_params(r: float, p: int, ell: float, d: int,
                  override: Optional[float] = None,
                  threshold_override: Optional[float] = None,
                  allow_classical: bool = False) -> ResonanceParams:
    """
    Производные параметры классификации.

    override заменяет α(ℓ), threshold_override заменяет порог r(ℓ);
    любой из них включает флаг визуализационного режима.
    """
    check_order(ell, allow_classical)
    if d < 2:
        raise DimensionTooSmall(f"Размерность {d} < 2", {'d': d})
    if not r > 1.0:
        raise ScaleTooSmall(f"Масштаб r={r} должен быть больше 1", {'r': r})
    if p < 1:
        raise DepthOutOfRange(f"Глубина p={p} должна быть не меньше 1", {'p': p})

    alpha = float(override) if override is not None else default_alpha(ell, d)
    alpha_k = tuple(3 ** k * alpha for k in range(1, p + 1))
    threshold = float(threshold_override) if threshold_override is not None else r ** alpha_k[0]
    return ResonanceParams(
        r=float(r),
        p=int(p),
        ell=float(ell),
        d=int(d),
        alpha=alpha,
        alpha_k=alpha_k,
        threshold=threshold,
        perturbation_radius=r ** alpha,
        p1=(p + 1) // 3,
        c=int(math.floor((d - 1) / (2.0 * alpha))) + 1,
        exponent_override=override,
        threshold_override=threshold_override,
        classical=ell == 1.0,
    )


def rescale(params: ResonanceParams, r: Optional[float] = None, ell: Optional[float] = None) -> ResonanceParams:
    """Те же параметры при другом масштабе или порядке"""
    return derive_params(
        params.r if r is None else r,
        params.p,
        params.ell if ell is None else ell,
        params.d,
        params.exponent_override,
        params.threshold_override,
        allow_classical=params.classical or ell == 1.0,
    )


def test_set(params: ResonanceParams, box: BoxDomain) -> List[LatticeVector]:
    """B(p·r^α) без нуля в каноническом порядке"""
    idx = lattice_indices(box, params.test_radius, positive_only=False, inclusive=False)
    idx = idx[np.any(idx != 0, axis=1)]
    if idx.shape[0] == 0:
        raise EmptyTestSet(
            f"Тестовое множество пусто: p·r^α = {params.test_radius:.6g} меньше минимальной ненулевой нормы",
            {'test_radius': params.test_radius},
        )
    return [LatticeVector(index=tuple(int(n) for n in row), box=box) for row in idx]


def _as_array(v: VectorLike) -> np.ndarray:
    if isinstance(v, LatticeVector):
        return v.components
    return np.asarray(v, dtype=float)


def _components(betas: Sequence[VectorLike]) -> np.ndarray:
    return np.stack([_as_array(b) for b in betas]) if betas else np.zeros((0, 0))


def resonance_gap(x: VectorLike, beta: VectorLike, ell: float) -> float:
    """||x|^{2ℓ} − |x+β|^{2ℓ}|"""
    x = _as_array(x)
    shifted = x + _as_array(beta)
    return float(power_gap(float(np.dot(x, x)), float(np.dot(shifted, shifted)), ell))


def gap_matrix(points: np.ndarray, components: np.ndarray, ell: float) -> np.ndarray:
    """Зазоры для всех пар (точка, β): массив (n, m)"""
    points = np.atleast_2d(points)
    norm_x = np.sum(points * points, axis=1)
    shifted = points[:, None, :] + components[None, :, :]
    norm_xb = np.sum(shifted * shifted, axis=2)
    return power_gap(norm_x[:, None], norm_xb, ell)


def classify_many(points: np.ndarray, params: ResonanceParams,
                  components: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Векторизованная классификация.

    Возвращает (gaps, gap_min, witness_count, in_resonance).
    """
    gaps = gap_matrix(points, components, params.ell)
    below = gaps < params.threshold
    witness_count = np.count_nonzero(below, axis=1)
    return gaps, np.min(gaps, axis=1), witness_count, witness_count > 0


def classify_point(x: VectorLike, params: ResonanceParams, box: BoxDomain,
                   betas: Optional[Sequence[LatticeVector]] = None) -> DomainLabel:
    """Принадлежность точки x объединению резонансных областей"""
    betas = test_set(params, box) if betas is None else list(betas)
    x = _as_array(x)
    witnesses = tuple(b for b in betas if resonance_gap(x, b, params.ell) < params.threshold)
    return DomainLabel(kind='resonance' if witnesses else 'non_resonance', witnesses=witnesses)


def coordinate_bound(params: ResonanceParams) -> float:
    """⅓·r^{α₁ − 2ℓ + 2}"""
    return params.r ** (params.alpha_k[0] - 2.0 * params.ell + 2.0) / 3.0


def coordinate_bound_check(beta: VectorLike, params: ResonanceParams) -> bool:
    bound = coordinate_bound(params)
    return bool(np.all(np.abs(_as_array(beta)) > bound))


def mean_value_eta(x: VectorLike, beta: VectorLike, ell: float) -> Optional[float]:
    """
    Точка η из |x|^{2ℓ} − |x+β|^{2ℓ} = ℓ·η^{2ℓ−2}(|x|² − |x+β|²).

    None в симметричном случае |x| = |x+β| и при ℓ = 1.
    """
    x = _as_array(x)
    shifted = x + _as_array(beta)
    a_sq = float(np.dot(x, x))
    b_sq = float(np.dot(shifted, shifted))
    if a_sq == b_sq or ell == 1.0:
        return None
    ratio = (fractional_power(a_sq, ell) - fractional_power(b_sq, ell)) / (a_sq - b_sq)
    return (ratio / ell) ** (1.0 / (2.0 * ell - 2.0))


def band_width(scan: ScanResult, row: int = 0) -> float:
    """Ширина резонансной полосы вдоль строки сетки"""
    n1 = scan.grid.counts[0]
    cells = scan.in_resonance[row * n1:(row + 1) * n1]
    return int(np.count_nonzero(cells)) * scan.grid.spacing[0]


class ResonanceService(BaseService):
    """Сервис для оценки меры и построения данных для рисунков"""

    def __init__(self, settings: Optional[ApplicationConfig] = None):
        super().__init__(settings)
        self.pool = WorkerPool(WorkerPoolConfig(max_workers=self.max_workers))

    def _blocks(self, total: int) -> List[Tuple[int, int]]:
        size = self.settings.sample_block_size
        return [(b, min(size, total - b * size)) for b in range((total + size - 1) // size)]

    @log_execution_time
    def nonresonance_fraction(self, params: ResonanceParams, box: BoxDomain,
                              n_samples: int, seed: int) -> MeasureResult:
        """Монте-Карло оценка доли U^ℓ в слое ½r < |x| < 2r"""
        if n_samples < MIN_SAMPLES:
            raise ConfigError(
                f"Нужно не меньше {MIN_SAMPLES} выборок, задано {n_samples}",
                {'n_samples': n_samples, 'min_samples': MIN_SAMPLES},
            )
        components = _components(test_set(params, box))
        d = box.dimension

        def count_block(block: Tuple[int, int]) -> int:
            number, count = block
            points = shell_samples(block_rng(seed, number), count, d, SHELL_INNER * params.r, SHELL_OUTER * params.r)
            _, _, _, in_resonance = classify_many(points, params, components)
            return int(count - np.count_nonzero(in_resonance))

        counts = self.pool.map(count_block, self._blocks(n_samples))
        nonresonant = sum(counts)
        fraction = nonresonant / n_samples
        stderr = math.sqrt(fraction * (1.0 - fraction) / n_samples)
        logger.info(
            f"Доля нерезонансных точек при r={params.r:g}: {fraction:.6f} ± {stderr:.6f} "
            f"({n_samples} выборок, {components.shape[0]} тестовых векторов)"
        )
        return MeasureResult(
            r=params.r,
            ell=params.ell,
            fraction=fraction,
            stderr=stderr,
            n_samples=n_samples,
            seed=seed,
            nonresonant_count=nonresonant,
            override_active=params.override_active,
            threshold=params.threshold,
        )

    def measure_sweep(self, params: ResonanceParams, box: BoxDomain, radii: Sequence[float],
                      n_samples: int, seed: int) -> List[MeasureResult]:
        """Доли для набора масштабов r"""
        results = []
        for i, r in enumerate(radii, start=1):
            logger.info(f"Масштаб {i}/{len(radii)}: r={r:g}")
            results.append(self.nonresonance_fraction(rescale(params, r=r), box, n_samples, seed))
        return results

    @log_execution_time
    def scan_slice(self, params: ResonanceParams, grid: GridSpec, box: BoxDomain,
                   betas: Optional[Sequence[LatticeVector]] = None) -> ScanResult:
        """Зазоры и принадлежность резонансным областям по ячейкам двумерного среза"""
        if grid.cell_count > self.settings.max_cells:
            raise GridTooLarge(
                f"Сетка из {grid.cell_count} ячеек превышает лимит {self.settings.max_cells}",
                {'cells': grid.cell_count, 'max_cells': self.settings.max_cells},
            )
        betas = test_set(params, box) if betas is None else list(betas)
        components = _components(betas)
        points = grid.points(box.dimension)
        u, v = grid.plane_coordinates()

        def scan_block(block: Tuple[int, int]):
            number, count = block
            start = number * self.settings.sample_block_size
            return classify_many(points[start:start + count], params, components)

        parts = self.pool.map(scan_block, self._blocks(points.shape[0]))
        gaps = np.concatenate([p[0] for p in parts])
        result = ScanResult(
            grid=grid,
            betas=tuple(b.index for b in betas),
            ell=params.ell,
            r=params.r,
            threshold=params.threshold,
            override_active=params.override_active,
            u=u,
            v=v,
            gaps=gaps,
            gap_min=np.concatenate([p[1] for p in parts]),
            witness_count=np.concatenate([p[2] for p in parts]),
            in_resonance=np.concatenate([p[3] for p in parts]),
        )
        logger.info(f"Срез ℓ={params.ell}, r={params.r:g}: {result.resonance_cells} из {grid.cell_count} ячеек резонансны")
        return result

    def scan_ell_sweep(self, params: ResonanceParams, grid: GridSpec, box: BoxDomain, ells: Sequence[float],
                       betas: Optional[Sequence[LatticeVector]] = None) -> List[ScanResult]:
        """Один срез на каждое значение ℓ при прочих равных"""
        return [self.scan_slice(rescale(params, ell=ell), grid, box, betas) for ell in ells]

    def scan_r_sweep(self, params: ResonanceParams, grid: GridSpec, box: BoxDomain, radii: Sequence[float],
                     betas: Optional[Sequence[LatticeVector]] = None) -> List[ScanResult]:
        """Один срез на каждый масштаб r при фиксированных α и ℓ"""
        return [self.scan_slice(rescale(params, r=r), grid, box, betas) for r in radii]

    @log_execution_time
    def inclusion_violations(self, params: ResonanceParams, box: BoxDomain,
                             n_samples: int, seed: int) -> InclusionReport:
        """
        Проверка двух включений теоремы о среднем на выборке из слоя.

        Константа κ = ρ₊^{2−2ℓ}/ℓ, где ρ₊ = 2r + p·r^α ограничивает η.
        """
        components = _components(test_set(params, box))
        ell = params.ell
        rho_plus = SHELL_OUTER * params.r + params.test_radius
        kappa = rho_plus ** (2.0 - 2.0 * ell) / ell
        thresholds = [params.r ** a for a in params.alpha_k]
        d = box.dimension

        def check_block(block: Tuple[int, int]) -> Tuple[int, int, int, int]:
            number, count = block
            points = shell_samples(block_rng(seed, number), count, d, SHELL_INNER * params.r, SHELL_OUTER * params.r)
            norm_x = np.sum(points * points, axis=1)
            shifted = points[:, None, :] + components[None, :, :]
            norm_xb = np.sum(shifted * shifted, axis=2)
            gap_classical = np.abs(norm_x[:, None] - norm_xb)
            gap_frac = power_gap(norm_x[:, None], norm_xb, ell)
            scale_classical = INCLUSION_REL_SLACK * np.maximum(norm_x, 1.0)[:, None]
            scale_frac = INCLUSION_REL_SLACK * np.maximum(fractional_power(norm_x, ell), 1.0)[:, None]

            premise = np.all(gap_classical >= kappa * params.threshold, axis=1)
            conclusion = np.all(gap_frac >= params.threshold - scale_frac, axis=1)
            first = int(np.count_nonzero(premise & ~conclusion))

            checks = 0
            second = 0
            for t in thresholds:
                inside = gap_frac < t
                checks += int(np.count_nonzero(inside))
                second += int(np.count_nonzero(inside & ~(gap_classical < kappa * t + scale_classical)))
            return int(np.count_nonzero(premise)), first, checks, second

        parts = self.pool.map(check_block, self._blocks(n_samples))
        report = InclusionReport(
            ell=ell,
            samples=n_samples,
            kappa=kappa,
            premise_count=sum(p[0] for p in parts),
            first_violations=sum(p[1] for p in parts),
            second_checks=sum(p[2] for p in parts),
            second_violations=sum(p[3] for p in parts),
        )
        if not report.passed:
            logger.warning(
                f"Нарушения включений при ℓ={ell}: {report.first_violations} и {report.second_violations}"
            )
        return report


# Имя начинается с test_, но это не тест
test_set.__test__ = False
