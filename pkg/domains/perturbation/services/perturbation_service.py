import logging
import math
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from domains.galerkin import EigenSolution
from domains.lattice import LatticeVector, frac_norm
from domains.perturbation.schemas import Closure, IterationIdentityReport, SeriesResult, TermEvaluation
from domains.potential import PotentialSpec, full_support, mass, truncate
from domains.resonance import ResonanceParams
from shared.concurrency import WorkerPool, WorkerPoolConfig
from shared.config import ApplicationConfig
from shared.infrastructure.services.base_service import BaseService
from shared.utils import exact_sum
from shared.utils.error_handlers import (
    DepthOutOfRange,
    NoMatchedEigenpair,
    PerturbationError,
    VanishingDenominator,
    log_execution_time,
)

logger = logging.getLogger(__name__)

Index = Tuple[int, ...]
IndexLike = Union[LatticeVector, Sequence[int]]

DENOMINATOR_EPS = 1e-12
F1_AGREEMENT_TOL = 1e-12


def _index(v: IndexLike) -> Index:
    return v.index if isinstance(v, LatticeVector) else tuple(int(n) for n in v)


def _add(a: Index, b: Index) -> Index:
    return tuple(x + y for x, y in zip(a, b))


def iteration_condition(xi: float, beta: LatticeVector, params: ResonanceParams) -> bool:
    """|ξ − |β|^{2ℓ}| > ½·r(ℓ)"""
    return abs(xi - frac_norm(beta, params.ell)) > 0.5 * params.threshold


def term_bound(j: int, params: ResonanceParams, total_mass: float) -> float:
    """2^j·r(ℓ)^{−j}·M^{j+1}"""
    if params.threshold == 0.0:
        return math.inf
    return (2.0 / params.threshold) ** j * total_mass ** (j + 1)


def partial_sum_bound(p1: int, params: ResonanceParams, total_mass: float) -> float:
    return exact_sum(term_bound(i, params, total_mass) for i in range(1, p1 + 1))


class _TupleSum:
    """
    Обход кортежей (β₁, …, β_L) из алфавита в лексикографическом порядке.

    Частичная сумма P_i «замыкается», если β + P_i лежит в орбите A_β
    (closure='orbit') или P_i = 0 (closure='zero_sum'). Знаменатели
    ξ − |β + P_i|^{2ℓ} берутся для i = 1..L−1.
    """

    def __init__(self, beta: Index, xi: float, alphabet: List[Tuple[Index, float]],
                 params: ResonanceParams, box, closure: Closure):
        self.beta = beta
        self.xi = xi
        self.alphabet = alphabet
        self.ell = params.ell
        self.box = box
        if closure == 'orbit':
            self.allowed = [sorted({0, -2 * b}) for b in beta]
        else:
            self.allowed = [[0] for _ in beta]
        self.reach = [max((abs(idx[i]) for idx, _ in alphabet), default=0) for i in range(len(beta))]
        self.eps = DENOMINATOR_EPS * max(1.0, abs(xi))
        self._energies: Dict[Index, float] = {}

    def closes(self, partial: Index) -> bool:
        return all(p in allowed for p, allowed in zip(partial, self.allowed))

    def reachable(self, partial: Index, steps: int) -> bool:
        """Может ли сумма ещё замкнуться за steps шагов"""
        return all(
            min(abs(p - t) for t in allowed) <= steps * reach
            for p, allowed, reach in zip(partial, self.allowed, self.reach)
        )

    def energy(self, partial: Index) -> float:
        value = self._energies.get(partial)
        if value is None:
            value = frac_norm(_add(self.beta, partial), self.ell, self.box)
            self._energies[partial] = value
        return value

    def denominator(self, partial: Index, path: List[Index]) -> float:
        den = self.xi - self.energy(partial)
        if abs(den) <= self.eps:
            raise VanishingDenominator(
                f"Знаменатель обращается в ноль на кортеже {path}",
                path,
                {'beta': list(self.beta), 'xi': self.xi, 'denominator': den},
            )
        return den

    def walk(self, first: Tuple[Index, float], length: int,
             terminal: Callable[[Index, float], Optional[float]], prune: bool) -> Tuple[List[float], Optional[float], int]:
        """
        Члены с заданным первым элементом. terminal(P_L, numerator/denominator)
        возвращает вклад полного кортежа или None.
        """
        terms: List[float] = []
        state = {'min_den': None, 'count': 0}

        def visit(level: int, partial: Index, weight: float, path: List[Index]) -> None:
            if level == length:
                value = terminal(partial, weight)
                if value is not None:
                    terms.append(value)
                    state['count'] += 1
                return
            if self.closes(partial):
                return
            if prune and not self.reachable(partial, length - level):
                return
            den = self.denominator(partial, path)
            magnitude = abs(den)
            if state['min_den'] is None or magnitude < state['min_den']:
                state['min_den'] = magnitude
            for idx, coeff in self.alphabet:
                visit(level + 1, _add(partial, idx), weight * coeff / den, path + [idx])

        idx, coeff = first
        visit(1, idx, coeff, [idx])
        return terms, state['min_den'], state['count']


class PerturbationService(BaseService):
    """Сервис итерационного ряда теории возмущений"""

    def __init__(self, settings: Optional[ApplicationConfig] = None, closure: Closure = 'orbit'):
        super().__init__(settings)
        self.closure = closure
        self.pool = WorkerPool(WorkerPoolConfig(max_workers=self.max_workers))

    def alphabet(self, q: PotentialSpec, params: ResonanceParams) -> Tuple[List[Tuple[Index, float]], float]:
        """Векторы B(r^α) с q_δ ≠ 0 и масса отброшенного хвоста"""
        _, tail = truncate(q, params.perturbation_radius)
        if tail > 0:
            logger.debug(
                f"Потенциал усечён по радиусу r^α={params.perturbation_radius:.6g}: масса хвоста {tail:.3e}"
            )
        return full_support(q, radius=params.perturbation_radius), tail

    def _reduce(self, walker: _TupleSum, length: int, terminal, prune: bool) -> Tuple[float, Optional[float], int]:
        parts = self.pool.map(lambda first: walker.walk(first, length, terminal, prune), walker.alphabet)
        terms = [t for part in parts for t in part[0]]
        dens = [part[1] for part in parts if part[1] is not None]
        return exact_sum(terms), (min(dens) if dens else None), sum(part[2] for part in parts)

    def evaluate_term(self, j: int, xi: float, beta: IndexLike, q: PotentialSpec,
                      params: ResonanceParams, closure: Optional[Closure] = None) -> TermEvaluation:
        """S_j(ξ) вместе с минимальным модулем знаменателя"""
        if not 1 <= j <= params.p1:
            raise DepthOutOfRange(f"Номер члена j={j} вне диапазона 1..{params.p1}", {'j': j, 'p1': params.p1})
        index = _index(beta)
        alphabet, _ = self.alphabet(q, params)
        walker = _TupleSum(index, xi, alphabet, params, q.box, closure or self.closure)

        def terminal(partial: Index, weight: float) -> Optional[float]:
            return weight if walker.closes(partial) else None

        value, min_den, count = self._reduce(walker, j + 1, terminal, prune=True)
        logger.debug(f"S_{j}({xi:.6g}) для {index}: {value:.6e} ({count} кортежей)")
        return TermEvaluation(j=j, xi=xi, value=value, tuples=count, min_denominator=min_den)

    def series_term(self, j: int, xi: float, beta: IndexLike, q: PotentialSpec,
                    params: ResonanceParams, closure: Optional[Closure] = None) -> float:
        return self.evaluate_term(j, xi, beta, q, params, closure).value

    def first_order_term(self, beta: IndexLike, q: PotentialSpec, params: ResonanceParams,
                         closure: Optional[Closure] = None) -> float:
        """S₀ = Σ q_{β₁} по шагам, сразу возвращающим в орбиту β"""
        index = _index(beta)
        alphabet, _ = self.alphabet(q, params)
        walker = _TupleSum(index, 0.0, alphabet, params, q.box, closure or self.closure)
        return exact_sum(c for idx, c in alphabet if walker.closes(idx))

    def series_sum(self, xi: float, beta: IndexLike, q: PotentialSpec, params: ResonanceParams,
                   p1: Optional[int] = None, closure: Optional[Closure] = None) -> float:
        """Σ_{i=1}^{p₁} S_i(ξ)"""
        p1 = params.p1 if p1 is None else p1
        return exact_sum(self.series_term(i, xi, beta, q, params, closure) for i in range(1, p1 + 1))

    def closed_form_F1(self, beta: IndexLike, q: PotentialSpec, params: ResonanceParams,
                       closure: Optional[Closure] = None) -> float:
        """
        Σ_{β₁} q_{β₁}·w(β+β₁)/(|β|^{2ℓ} − |β+β₁|^{2ℓ}), где w есть сумма
        коэффициентов шагов, замыкающих β + β₁.
        """
        index = _index(beta)
        alphabet, _ = self.alphabet(q, params)
        lookup = dict(alphabet)
        energy = frac_norm(index, params.ell, q.box)
        walker = _TupleSum(index, energy, alphabet, params, q.box, closure or self.closure)
        targets = [()]
        for allowed in walker.allowed:
            targets = [t + (a,) for t in targets for a in allowed]
        terms = []
        for idx, coeff in alphabet:
            if walker.closes(idx):
                continue
            weight = exact_sum(lookup.get(tuple(t - i for t, i in zip(target, idx)), 0.0) for target in targets)
            if weight == 0.0:
                continue
            terms.append(coeff * weight / walker.denominator(idx, [idx]))
        return exact_sum(terms)

    @log_execution_time
    def F_sequence(self, kmax: int, beta: IndexLike, q: PotentialSpec, params: ResonanceParams,
                   closure: Optional[Closure] = None) -> SeriesResult:
        """Последовательность F_0..F_kmax и предсказание |β|^{2ℓ} + F_{kmax−1}"""
        closure = closure or self.closure
        if not 1 <= kmax <= params.max_depth:
            raise DepthOutOfRange(
                f"kmax={kmax} вне допустимого диапазона 1..{params.max_depth}",
                {'kmax': kmax, 'p1': params.p1, 'c': params.c, 'override_active': params.override_active},
            )
        index = _index(beta)
        _, tail = self.alphabet(q, params)
        if tail > 0:
            logger.warning(f"Ряд для {index}: потенциал вне B(r^α) отброшен, масса хвоста {tail:.3e}")
        energy = frac_norm(index, params.ell, q.box)
        first_order = self.first_order_term(index, q, params, closure)

        F = [0.0]
        for k in range(1, kmax + 1):
            xi = energy + F[k - 1]
            F.append(exact_sum([first_order] + [self.series_term(i, xi, index, q, params, closure)
                                                for i in range(1, k + 1)]))

        closed = exact_sum([first_order, self.closed_form_F1(index, q, params, closure)])
        if abs(closed - F[1]) > F1_AGREEMENT_TOL * max(1.0, abs(F[1])):
            raise PerturbationError(
                f"F₁ по явной формуле ({closed!r}) расходится с рядом ({F[1]!r})",
                {'beta': list(index), 'closed_form': closed, 'series': F[1]},
            )

        predicted = energy + F[kmax - 1]
        evaluations = [self.evaluate_term(i, predicted, index, q, params, closure) for i in range(1, params.p1 + 1)]
        total_mass = mass(q)
        bounds = tuple(term_bound(e.j, params, total_mass) for e in evaluations)
        dens = [e.min_denominator for e in evaluations if e.min_denominator is not None]
        min_den = min(dens) if dens else None
        half = 0.5 * params.threshold
        condition_holds = min_den is None or min_den > half
        violations = tuple(
            e.j for e, b in zip(evaluations, bounds)
            if condition_holds and abs(e.value) > b * (1.0 + 1e-12)
        )
        f_bounds_hold = all(
            abs(F[j]) <= exact_sum(bounds[:j]) * (1.0 + 1e-12) for j in range(1, kmax + 1)
        )
        if violations:
            logger.error(f"Нарушена оценка членов ряда для {index}: j = {list(violations)}")

        result = SeriesResult(
            beta=index,
            ell=params.ell,
            r=params.r,
            closure=closure,
            kmax=kmax,
            free_value=energy,
            first_order=first_order,
            S=tuple(e.value for e in evaluations),
            F=tuple(F),
            predicted=predicted,
            predicted_with_first_order=predicted + first_order if kmax == 1 else predicted,
            predicted_by_k=tuple(energy + f for f in F),
            closed_form_F1=closed,
            min_denominator=min_den,
            term_min_denominators=tuple(e.min_denominator for e in evaluations),
            term_bounds=bounds,
            bound_violations=violations,
            f_bounds_hold=f_bounds_hold,
            iteration_condition=condition_holds,
            third_bound=min_den is None or min_den > params.threshold / 3.0,
            interval=(energy - half, energy + half),
            tail_mass=tail,
            override_active=params.override_active,
        )
        logger.info(f"Ряд для {index}: F = {[f'{f:.6e}' for f in F]}, предсказание {predicted:.12g}")
        return result

    def _remainder(self, p1: int, xi: float, beta: IndexLike, q: PotentialSpec,
                   h: Mapping[Index, float], params: ResonanceParams,
                   closure: Optional[Closure]) -> Tuple[float, int]:
        index = _index(beta)
        alphabet, _ = self.alphabet(q, params)
        walker = _TupleSum(index, xi, alphabet, params, q.box, closure or self.closure)

        def run(first: Tuple[Index, float]) -> Tuple[List[float], int]:
            missing = [0]

            def terminal(partial: Index, weight: float) -> Optional[float]:
                if walker.closes(partial):
                    return None
                value = h.get(tuple(abs(n) for n in _add(index, partial)))
                if value is None:
                    missing[0] += 1
                    return None
                return weight * value

            terms, _, _ = walker.walk(first, p1 + 1, terminal, prune=False)
            return terms, missing[0]

        parts = self.pool.map(run, walker.alphabet)
        return exact_sum(t for part in parts for t in part[0]), sum(part[1] for part in parts)

    def remainder_C(self, p1: int, xi: float, beta: IndexLike, q: PotentialSpec,
                    h: Mapping[Index, float], params: ResonanceParams,
                    closure: Optional[Closure] = None) -> float:
        """C_{p₁}(ξ): кортежи длины p₁+1 без замыканий, умноженные на h(β + Σβ_i)"""
        if p1 < 1:
            raise DepthOutOfRange(f"p₁={p1} должно быть не меньше 1", {'p1': p1})
        value, missing = self._remainder(p1, xi, beta, q, h, params, closure)
        if missing:
            logger.warning(f"Остаток C_{p1}: {missing} мод вне таблицы коэффициентов учтены нулём")
        return value

    def verify_iteration_identity(self, beta: IndexLike, q: PotentialSpec, params: ResonanceParams,
                                  solution: EigenSolution, p1: int,
                                  closure: Optional[Closure] = None) -> IterationIdentityReport:
        """
        Невязка (ξ_N − |β|^{2ℓ})h = (S₀ + Σ_{i≤p₁} S_i(ξ_N))h + C_{p₁}
        для ненормированных коэффициентов h = (χ_N, v_γ).
        """
        if p1 < 1:
            raise DepthOutOfRange(f"p₁={p1} должно быть не меньше 1", {'p1': p1})
        index = tuple(abs(n) for n in _index(beta))
        match = solution.match_for(index)
        if match is None:
            raise NoMatchedEigenpair(f"Для моды {index} нет сопоставленной пары", {'beta': list(index)})
        xi = match.xi
        h = match.h_unnormalized
        lhs = (xi - match.free_value) * h
        terms = [self.first_order_term(index, q, params, closure)]
        terms += [self.series_term(i, xi, index, q, params, closure) for i in range(1, p1 + 1)]
        series = exact_sum(terms)
        remainder, missing = self._remainder(p1, xi, index, q, solution.coefficient_table(match.N), params, closure)
        residual = abs(lhs - series * h - remainder)
        tail = match.tail or missing > 0
        if tail:
            logger.warning(f"Итерационное тождество для {index}: граничный хвост ({missing} мод вне базиса)")
        return IterationIdentityReport(
            beta=index,
            N=match.N,
            p1=p1,
            xi=xi,
            lhs=lhs,
            series=series * h,
            remainder=remainder,
            residual=residual,
            missing_targets=missing,
            tail=tail,
        )
