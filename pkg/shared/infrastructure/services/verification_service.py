import logging
import math
import time
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from domains.galerkin import GalerkinService, count_free_eigenvalues
from domains.lattice import BoxDomain, frac_norm, make_box, unit_step
from domains.perturbation import PerturbationService
from domains.potential import PotentialSpec, evaluate_many, make_potential, mass, scale
from domains.resonance import GridSpec, ResonanceService, band_width, derive_params
from shared.concurrency import SERIAL_POOL_CONFIG, WorkerPool
from shared.config import ApplicationConfig, RunConfig
from shared.infrastructure.schemas import CriterionResult, VerificationReport
from shared.infrastructure.services.base_service import BaseService
from shared.utils import gauss_legendre_grid
from shared.utils.error_handlers import SpectralError

logger = logging.getLogger(__name__)

GENERIC_SIDES = (math.pi, math.pi / math.sqrt(2.0))
SQUARE_SIDES = (math.pi, math.pi)
SERIES_BETA = (2, 1)
SERIES_ELL = 0.75
SERIES_CUTOFF = 15.0
SMALL_EPS = 0.05
LARGE_EPS = 0.1
SCALING_RATIO_MIN = 5.0
# чётный остаток O(ε⁴) даёт отношение около 16
SCALING_RATIO_MAX = 24.0
BINDING_TOL = 1e-8
IDENTITY_TOL = 1e-6
DOMINANCE_MIN = 0.5
PARSEVAL_MIN = 0.99
INCLUSION_ELLS = (0.6, 0.75, 0.9)
BAND_THRESHOLD = 0.5
MEASURE_RADII = (10.0, 100.0)
MEASURE_FLOOR = 0.8
SATURATION_ALPHA = 0.25
COUNT_RADII = (200.0, 400.0)
COUNT_HALF_WIDTH = 10.0
COUNT_SAMPLES = 16
COUNT_SPREAD = 0.25


class VerificationService(BaseService):
    """
    Набор критериев приёмки.

    Каждый критерий выполняется независимо: ошибка одного помечает его
    как проваленный и не останавливает остальные.
    """

    def __init__(self, config: RunConfig, unit_potential: Optional[PotentialSpec] = None,
                 settings: Optional[ApplicationConfig] = None):
        """Инициализация набора критериев"""
        super().__init__(settings)
        self.config = config
        self.galerkin = GalerkinService(self.settings)
        self.perturbation = PerturbationService(self.settings, closure=config.closure)
        self.resonance = ResonanceService(self.settings)
        self.generic_box = make_box(GENERIC_SIDES)
        self.square_box = make_box(SQUARE_SIDES)
        self.entries = self._unit_entries(unit_potential)
        self.series_params = derive_params(
            r=100.0, p=5, ell=SERIES_ELL, d=2, override=0.1, threshold_override=1.0
        )
        logger.info(f"VerificationService инициализирован (потенциал: {len(self.entries)} орбит)")

    def _unit_entries(self, unit_potential: Optional[PotentialSpec]) -> List[Tuple[Tuple[int, ...], float]]:
        if unit_potential is None or unit_potential.is_zero:
            return []
        if unit_potential.box.dimension != 2:
            logger.warning("Критерии приёмки двумерны: потенциал другой размерности заменён нулевым")
            return []
        return sorted(unit_potential.coeffs.items())

    def _potential(self, box: BoxDomain, eps: float = 1.0) -> PotentialSpec:
        return scale(make_potential(self.entries, 0, box), eps)

    def _series_solution(self, q: PotentialSpec):
        basis = self.galerkin.build_basis(self.generic_box, SERIES_CUTOFF)
        solution = self.galerkin.spectrum(basis, q, SERIES_ELL)
        return self.galerkin.match_all(solution, [SERIES_BETA], self.series_params)

    def free_operator_exactness(self) -> CriterionResult:
        """Свободный оператор: собственные значения совпадают с (n₁² + n₂²)^{3/4}"""
        basis = self.galerkin.build_basis(self.square_box, 20.0)
        solution = self.galerkin.spectrum(basis, self._potential(self.square_box, 0.0), SERIES_ELL)
        expected = np.sort(np.sum(basis.modes.astype(float) ** 2, axis=1) ** SERIES_ELL)
        error = float(np.max(np.abs(solution.eigenvalues - expected)))
        return self._result('free_operator_exactness', error < self.config.tolerance, error,
                            self.config.tolerance, {'modes': basis.size})

    def second_order_scaling(self) -> CriterionResult:
        """Остаток e(ε) = |ξ − |β|^{2ℓ} − F₁(ε)| убывает быстрее ε²"""
        if not self.entries:
            return self._skipped('second_order_scaling', "нужен ненулевой потенциал")
        unit = self._potential(self.generic_box)
        errors = {}
        first = {}
        for eps in (SMALL_EPS, LARGE_EPS):
            q = scale(unit, eps)
            first[eps] = self.perturbation.F_sequence(1, SERIES_BETA, q, self.series_params).F[1]
            match = self._series_solution(q).match_for(SERIES_BETA)
            errors[eps] = abs(match.xi - match.free_value - first[eps])
        ratio = errors[LARGE_EPS] / errors[SMALL_EPS] if errors[SMALL_EPS] > 0 else math.inf
        passed = errors[SMALL_EPS] > 0 and SCALING_RATIO_MIN <= ratio <= SCALING_RATIO_MAX
        return self._result('second_order_scaling', passed, ratio, SCALING_RATIO_MIN, {
            'ratio_max': SCALING_RATIO_MAX,
            'F1_small': first[SMALL_EPS],
            'F1_large': first[LARGE_EPS],
            'e_small': errors[SMALL_EPS],
            'e_large': errors[LARGE_EPS],
        })

    def binding_formula(self) -> CriterionResult:
        q = self._potential(self.generic_box, SMALL_EPS)
        report = self.galerkin.verify_binding(self._series_solution(q), q, SERIES_BETA)
        return self._result('binding_formula', report.residual <= BINDING_TOL and not report.tail,
                            report.residual, BINDING_TOL, {'tail': report.tail})

    def iteration_identity(self) -> CriterionResult:
        q = self._potential(self.generic_box, SMALL_EPS)
        solution = self._series_solution(q)
        residuals = {
            p1: self.perturbation.verify_iteration_identity(SERIES_BETA, q, self.series_params, solution, p1).residual
            for p1 in (1, 2)
        }
        worst = max(residuals.values())
        return self._result('iteration_identity', worst <= IDENTITY_TOL, worst, IDENTITY_TOL,
                            {'residual_p1_1': residuals[1], 'residual_p1_2': residuals[2]})

    def mean_value_inclusions(self) -> CriterionResult:
        violations = 0
        details = {}
        for ell in INCLUSION_ELLS:
            params = derive_params(100.0, 2, ell, 2)
            report = self.resonance.inclusion_violations(params, self.generic_box, self.config.n_samples, self.config.seed)
            violations += report.first_violations + report.second_violations
            details[f"ell_{ell}"] = report.model_dump()
        return self._result('mean_value_inclusions', violations == 0, float(violations), 0.0, details)

    def term_bounds(self) -> CriterionResult:
        """Оценка |S_j| ≤ 2^j r(ℓ)^{−j} M^{j+1} на матрице конфигураций"""
        if self.entries:
            configs = [(eps, beta) for eps in (0.02, SMALL_EPS, LARGE_EPS) for beta in ((2, 1), (3, 2), (5, 1))]
        else:
            configs = [(0.0, SERIES_BETA)]
        checked = 0
        unchecked = 0
        violations = 0
        for eps, beta in configs:
            q = self._potential(self.generic_box, eps)
            result = self.perturbation.F_sequence(2, beta, q, self.series_params)
            if not result.iteration_condition:
                unchecked += 1
                continue
            checked += len(result.S)
            violations += len(result.bound_violations)
        return self._result('term_bounds', violations == 0, float(violations), 0.0,
                            {'terms_checked': checked, 'configs_outside_condition': unchecked})

    def matching(self) -> CriterionResult:
        q = self._potential(self.generic_box, SMALL_EPS)
        solution = self._series_solution(q)
        match = solution.match_for(SERIES_BETA)
        parseval = self.galerkin.parseval_check(solution, SERIES_BETA, self.series_params)
        passed = match.dominance >= DOMINANCE_MIN and parseval.inside_mass >= PARSEVAL_MIN
        return self._result('matching', passed, match.dominance, DOMINANCE_MIN,
                            {'inside_mass': parseval.inside_mass, 'N': match.N, 'xi': match.xi})

    def measure_trend(self) -> CriterionResult:
        """Доля нерезонансных точек растёт с r; выборка детерминирована"""
        base = derive_params(MEASURE_RADII[0], 2, SERIES_ELL, 2)
        small, large = self.resonance.measure_sweep(
            base, self.generic_box, MEASURE_RADII, self.config.n_samples, self.config.seed
        )
        serial = ResonanceService(self.settings)
        serial.pool = WorkerPool(SERIAL_POOL_CONFIG)
        repeat = serial.nonresonance_fraction(
            derive_params(MEASURE_RADII[1], 2, SERIES_ELL, 2), self.generic_box, self.config.n_samples, self.config.seed
        )
        saturated = self.resonance.nonresonance_fraction(
            derive_params(MEASURE_RADII[1], 2, SERIES_ELL, 2, override=SATURATION_ALPHA),
            self.generic_box, self.config.n_samples, self.config.seed,
        )
        spread = 3.0 * math.hypot(small.stderr, large.stderr)
        trend = large.fraction >= small.fraction - spread
        deterministic = repeat.fraction == large.fraction
        passed = trend and large.fraction >= MEASURE_FLOOR and deterministic and saturated.fraction == 0.0
        return self._result('measure_trend', passed, large.fraction, MEASURE_FLOOR, {
            'fraction_small_r': small.fraction,
            'fraction_large_r': large.fraction,
            'stderr_small_r': small.stderr,
            'stderr_large_r': large.stderr,
            'deterministic': deterministic,
            'saturated_fraction': saturated.fraction,
        })

    def band_narrowing(self) -> CriterionResult:
        grid = GridSpec(origin=(-8.0, 20.0), spacing=(0.05, 0.05), counts=(300, 1))
        params = derive_params(1e6, 2, INCLUSION_ELLS[0], 2, threshold_override=BAND_THRESHOLD)
        beta = [unit_step(1, self.square_box)]
        scans = self.resonance.scan_ell_sweep(params, grid, self.square_box, INCLUSION_ELLS, beta)
        widths = [band_width(scan) for scan in scans]
        passed = all(a > b for a, b in zip(widths, widths[1:]))
        return self._result('band_narrowing', passed, widths[-1], None,
                            {f"width_ell_{ell}": w for ell, w in zip(INCLUSION_ELLS, widths)})

    def assembly_quadrature(self) -> CriterionResult:
        """Матрица через разложение произведений против квадратуры Гаусса"""
        q = self._potential(self.square_box)
        basis = self.galerkin.build_basis(self.square_box, 3.0)
        size = min(8, basis.size)
        matrix = self.galerkin.assemble(basis, q, SERIES_ELL)[:size, :size]
        points, weights = gauss_legendre_grid(self.square_box.sides, 64)
        qx = evaluate_many(q, points)
        steps = np.asarray(self.square_box.steps)
        cosines = np.stack([np.prod(np.cos(points * (basis.modes[j] * steps)), axis=1) for j in range(size)])
        weighted = cosines * (qx * weights)[None, :]
        oracle = (weighted @ cosines.T) / np.outer(basis.norms[:size], basis.norms[:size])
        oracle[np.diag_indices(size)] += [frac_norm(basis.mode(j), SERIES_ELL) for j in range(size)]
        error = float(np.max(np.abs(matrix - oracle)))
        return self._result('assembly_quadrature', error < self.config.tolerance, error, self.config.tolerance,
                            {'size': size})

    def eigenvalue_counting(self) -> CriterionResult:
        """Отношение средних чисел собственных значений в окнах около r и 2r"""
        means = []
        for r in COUNT_RADII:
            radii = [r * (1.0 + COUNT_SPREAD * j / COUNT_SAMPLES) for j in range(COUNT_SAMPLES)]
            counts = [count_free_eigenvalues(self.generic_box, SERIES_ELL, a, COUNT_HALF_WIDTH) for a in radii]
            means.append(float(np.mean(counts)))
        expected = 2.0 ** (2 - 2 * SERIES_ELL)
        ratio = means[1] / means[0] if means[0] else math.inf
        passed = 1.0 < ratio and expected / 2.0 <= ratio <= expected * 2.0
        return self._result('eigenvalue_counting', passed, ratio, expected, {
            'mean_count_r': means[0],
            'mean_count_2r': means[1],
            'half_width': COUNT_HALF_WIDTH,
            'samples': COUNT_SAMPLES,
        })

    def _result(self, name: str, passed: bool, value: Optional[float], limit: Optional[float],
                details: Dict) -> CriterionResult:
        return CriterionResult(name=name, status='passed' if passed else 'failed', value=value, limit=limit,
                               details=details)

    def _skipped(self, name: str, reason: str) -> CriterionResult:
        return CriterionResult(name=name, status='skipped', details={'reason': reason})

    def criteria(self) -> List[Callable[[], CriterionResult]]:
        return [
            self.free_operator_exactness,
            self.second_order_scaling,
            self.binding_formula,
            self.iteration_identity,
            self.mean_value_inclusions,
            self.term_bounds,
            self.matching,
            self.measure_trend,
            self.band_narrowing,
            self.assembly_quadrature,
            self.eigenvalue_counting,
        ]

    def run(self) -> VerificationReport:
        """Прогон всех критериев с подсчётом итогов"""
        logger.info("=== ЗАПУСК ПРОВЕРКИ КРИТЕРИЕВ ===")
        report = VerificationReport()
        checks = self.criteria()
        for i, check in enumerate(checks, start=1):
            name = check.__name__
            start_time = time.perf_counter()
            try:
                result = check()
            except SpectralError as e:
                logger.error(f"Критерий {name} завершился ошибкой: {e.message}")
                result = CriterionResult(name=name, status='failed', details=e.to_payload())
            except Exception as e:
                logger.error(f"Непредвиденная ошибка в критерии {name}: {e}", exc_info=True)
                result = CriterionResult(name=name, status='failed',
                                         details={'error': type(e).__name__, 'message': str(e)})
            result.duration = round(time.perf_counter() - start_time, 3)
            report.criteria.append(result)
            logger.info(f"[{i}/{len(checks)}] {name}: {result.status} ({result.duration:.2f}с)")

        summary = report.summary()
        logger.info("=== ИТОГ ПРОВЕРКИ ===")
        logger.info(f"Пройдено: {summary['passed']}, провалено: {summary['failed']}, пропущено: {summary['skipped']}")
        return report
