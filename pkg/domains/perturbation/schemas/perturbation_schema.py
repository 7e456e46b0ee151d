from typing import Literal, Optional, Tuple

from shared.infrastructure import ReportSchema

Index = Tuple[int, ...]
Closure = Literal['orbit', 'zero_sum']


class TermEvaluation(ReportSchema):
    """Значение одного члена ряда и диагностика знаменателей"""
    j: int
    xi: float
    value: float
    tuples: int
    min_denominator: Optional[float] = None


class SeriesResult(ReportSchema):
    """
    Итерационный ряд для моды β.

    S[i-1] = S_i(predicted) для i = 1..p₁, F[k] для k = 0..kmax,
    predicted = |β|^{2ℓ} + F[kmax-1].
    При kmax = 1 сдвиг первого порядка S₀ в predicted не входит (F₀ = 0),
    его учитывает predicted_with_first_order.
    """
    beta: Index
    ell: float
    r: float
    closure: Closure
    kmax: int
    free_value: float
    first_order: float
    S: Tuple[float, ...]
    F: Tuple[float, ...]
    predicted: float
    predicted_with_first_order: float
    predicted_by_k: Tuple[float, ...]
    closed_form_F1: float
    min_denominator: Optional[float] = None
    term_min_denominators: Tuple[Optional[float], ...] = ()
    term_bounds: Tuple[float, ...] = ()
    bound_violations: Tuple[int, ...] = ()
    f_bounds_hold: bool = True
    iteration_condition: bool = True
    third_bound: bool = True
    interval: Tuple[float, float]
    tail_mass: float = 0.0
    override_active: bool = False


class IterationIdentityReport(ReportSchema):
    """Невязка итерационного тождества для сопоставленной пары"""
    beta: Index
    N: int
    p1: int
    xi: float
    lhs: float
    series: float
    remainder: float
    residual: float
    missing_targets: int
    tail: bool
