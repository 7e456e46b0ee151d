import logging
import time
from functools import wraps
from typing import Any, Callable, Dict, Optional

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_COMPUTATION_ERROR = 3
EXIT_RESONANT_BETA = 4


class SpectralError(Exception):
    """Базовое исключение для ошибок вычислений"""
    exit_code: int = EXIT_COMPUTATION_ERROR

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(message)

    def to_payload(self) -> Dict[str, Any]:
        """Машиночитаемое описание ошибки для stderr"""
        return {
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
            'details': self.details,
        }


class ConfigError(SpectralError):
    """Ошибка конфигурации запуска"""
    exit_code = EXIT_CONFIG_ERROR


class PotentialFileError(ConfigError):
    """Файл потенциала отсутствует или повреждён"""
    pass


class LatticeError(SpectralError):
    """Ошибка геометрии бокса или решётки"""
    pass


class NonPositiveSide(LatticeError):
    """Сторона бокса не положительна"""
    pass


class DimensionTooSmall(LatticeError):
    """Размерность меньше 2"""
    pass


class OrderOutOfRange(LatticeError):
    """Порядок ℓ вне допустимого интервала"""
    pass


class IndexOutOfRange(LatticeError):
    """Номер координаты вне диапазона 1..d"""
    pass


class PotentialError(SpectralError):
    """Ошибка задания потенциала"""
    pass


class ZeroModeForbidden(PotentialError):
    """Коэффициент при нулевой моде запрещён"""
    pass


class NonCanonicalRepresentative(PotentialError):
    """Представитель орбиты имеет отрицательные индексы"""
    pass


class PointOutsideBox(PotentialError):
    """Точка лежит вне бокса"""
    pass


class DomainMismatch(PotentialError):
    """Объекты относятся к разным боксам"""
    pass


class NonFiniteCoefficient(PotentialError):
    """Коэффициент потенциала не является конечным числом"""
    pass


class ResonanceError(SpectralError):
    """Ошибка классификации резонансов"""
    pass


class ScaleTooSmall(ResonanceError):
    """Масштаб r не больше 1"""
    pass


class EmptyTestSet(ResonanceError):
    """Тестовое множество векторов пусто"""
    pass


class GridTooLarge(ResonanceError):
    """Сетка превышает допустимое число ячеек"""
    pass


class ResonantMode(ResonanceError):
    """Мода лежит в резонансной области"""
    exit_code = EXIT_RESONANT_BETA


class PerturbationError(SpectralError):
    """Ошибка ряда теории возмущений"""
    pass


class VanishingDenominator(PerturbationError):
    """Знаменатель ряда обращается в ноль"""

    def __init__(self, message: str, tuple_indices: Optional[list] = None, details: Optional[Dict[str, Any]] = None):
        merged = dict(details or {})
        if tuple_indices is not None:
            merged['tuple'] = [list(t) for t in tuple_indices]
        super().__init__(message, merged)
        self.tuple_indices = tuple_indices


class DepthOutOfRange(PerturbationError):
    """Глубина ряда вне допустимого диапазона"""
    pass


class NoMatchedEigenpair(PerturbationError):
    """Нет сопоставленной собственной пары"""
    pass


class GalerkinError(SpectralError):
    """Ошибка метода Галёркина"""
    pass


class BasisTooLarge(GalerkinError):
    """Число мод превышает лимит"""
    pass


class ConvergenceFailure(GalerkinError):
    """Собственная задача не сошлась"""
    pass


class NoEigenvalueInWindow(GalerkinError):
    """В окне нет собственных значений"""
    pass


def translate_linalg_errors(func: Callable) -> Callable:
    """Декоратор: ошибки LAPACK превращаются в ConvergenceFailure"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
            logger.error(f"Ошибка линейной алгебры в {func.__name__}: {type(e).__name__}: {e}")
            raise ConvergenceFailure(f"Собственная задача не решена: {e}", {'function': func.__name__})
    return wrapper


def log_execution_time(func: Callable) -> Callable:
    """Декоратор для логирования времени выполнения функции"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        logger.debug(f"Начало выполнения {func.__name__}")

        try:
            result = func(*args, **kwargs)
            execution_time = time.perf_counter() - start_time
            logger.debug(f"Завершено {func.__name__} за {execution_time:.2f}с")
            return result
        except Exception as e:
            execution_time = time.perf_counter() - start_time
            logger.error(f"Ошибка в {func.__name__} после {execution_time:.2f}с: {type(e).__name__}: {e}")
            raise

    return wrapper


__all__ = [
    'EXIT_OK',
    'EXIT_VERIFY_FAILED',
    'EXIT_CONFIG_ERROR',
    'EXIT_COMPUTATION_ERROR',
    'EXIT_RESONANT_BETA',
    'SpectralError',
    'ConfigError',
    'PotentialFileError',
    'LatticeError',
    'NonPositiveSide',
    'DimensionTooSmall',
    'OrderOutOfRange',
    'IndexOutOfRange',
    'PotentialError',
    'ZeroModeForbidden',
    'NonCanonicalRepresentative',
    'PointOutsideBox',
    'DomainMismatch',
    'NonFiniteCoefficient',
    'ResonanceError',
    'ScaleTooSmall',
    'EmptyTestSet',
    'GridTooLarge',
    'ResonantMode',
    'PerturbationError',
    'VanishingDenominator',
    'DepthOutOfRange',
    'NoMatchedEigenpair',
    'GalerkinError',
    'BasisTooLarge',
    'ConvergenceFailure',
    'NoEigenvalueInWindow',
    'translate_linalg_errors',
    'log_execution_time',
]
