import argparse
import json
import logging
import sys
import time
from typing import Callable, Dict, List, Optional

from cli.dependencies import (
    RunContext,
    build_context,
    get_galerkin_service,
    get_output_repository,
    get_perturbation_service,
    get_resonance_service,
    get_verification_service,
)
from cli.parser import parse_args
from domains.galerkin import SpectrumRepository
from domains.lattice import LatticeVector, frac_norm
from domains.resonance import FigureRepository, GridSpec, band_width, classify_point
from shared.config import ApplicationConfig, get_config
from shared.utils.error_handlers import (
    EXIT_COMPUTATION_ERROR,
    EXIT_OK,
    EXIT_VERIFY_FAILED,
    ConfigError,
    NoEigenvalueInWindow,
    ResonantMode,
    SpectralError,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
EXIT_INTERRUPTED = 130


def configure_logging(settings: ApplicationConfig, verbose: bool = False) -> None:
    """Логи идут в stdout (и в файл, если задан); stderr занят JSON ошибок"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, encoding='utf-8'))
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers)


def cmd_spectrum(context: RunContext, args: argparse.Namespace) -> int:
    """Собственные значения усечённой задачи; при заданной β также сопоставление и формула связи"""
    config = context.config
    galerkin = get_galerkin_service()
    basis = galerkin.build_basis(context.box, config.cutoff)
    solution = galerkin.spectrum(basis, context.potential, config.ell)

    payload = {
        'metadata': context.metadata,
        'box': list(context.box.sides),
        'ell': config.ell,
        'cutoff': config.cutoff,
        'basis_size': basis.size,
        'eigenvalues': [float(v) for v in solution.eigenvalues],
        'free_values': sorted(frac_norm(basis.mode(j), config.ell) for j in range(basis.size)),
        'kato_gap': solution.kato_gap,
        'max_residual': solution.max_residual,
        'matches': [],
    }
    code = EXIT_OK
    if config.beta is not None:
        beta = context.beta()
        try:
            solution = galerkin.match_all(solution, [beta], context.params)
        except NoEigenvalueInWindow as e:
            logger.warning(f"Мода {beta.index} не сопоставлена: {e.message}")
            payload['match_error'] = e.to_payload()
            _report_error(e.to_payload())
            code = e.exit_code
        else:
            match = solution.match_for(beta.index)
            payload['matches'].append({'beta': list(match.beta), 'N': match.N, 'xi': match.xi, 'h': match.h})
            payload['match'] = match.model_dump(mode='json')
            payload['binding'] = galerkin.verify_binding(solution, context.potential, beta).model_dump(mode='json')

    target = get_output_repository(context).write_json('spectrum.json', payload)
    logger.info(f"Спектр ({basis.size} значений) записан в {target}")
    if getattr(args, 'csv', False) or config.emit_csv:
        SpectrumRepository(root=context.out_dir).write_csv(solution, 'spectrum.csv', context.metadata)
    return code


def cmd_series(context: RunContext, args: argparse.Namespace) -> int:
    """Ряд F_0..F_kmax; резонансная β отклоняется с кодом 4"""
    config = context.config
    params = context.params
    beta = context.beta(getattr(args, 'beta', None))
    if not 1 <= config.kmax <= params.max_depth:
        raise ConfigError(
            f"kmax={config.kmax} вне допустимого диапазона 1..{params.max_depth}",
            {'kmax': config.kmax, 'p1': params.p1, 'c': params.c, 'override_active': params.override_active},
        )

    label = classify_point(beta, params, context.box)
    if label.is_resonance:
        raise ResonantMode(
            f"Мода {beta.index} лежит в резонансной области",
            {'beta': list(beta.index), 'witnesses': [list(w.index) for w in label.witnesses[:20]],
             'witness_count': len(label.witnesses)},
        )

    result = get_perturbation_service(context).F_sequence(config.kmax, beta, context.potential, params)
    payload = {'metadata': context.metadata, **result.model_dump(mode='json')}
    target = get_output_repository(context).write_json('series.json', payload)
    logger.info(f"Ряд для {beta.index} записан в {target}")
    return EXIT_OK


def cmd_classify(context: RunContext, args: argparse.Namespace) -> int:
    """CSV резонансных областей; по файлу на каждое ℓ из scan_ells и каждое r из scan_radii"""
    config = context.config
    if context.box.dimension != 2:
        raise ConfigError("Срез строится только для d = 2", {'d': context.box.dimension})
    grid = GridSpec(
        origin=tuple(config.grid_origin),
        spacing=tuple(config.grid_spacing),
        counts=tuple(config.grid_counts),
    )
    betas = None
    if config.scan_betas is not None:
        betas = [LatticeVector(index=tuple(b), box=context.box) for b in config.scan_betas]

    service = get_resonance_service()
    named = []
    if config.scan_ells:
        scans = service.scan_ell_sweep(context.params, grid, context.box, config.scan_ells, betas)
        named += [(f"classify_ell_{ell:g}.csv", scan) for ell, scan in zip(config.scan_ells, scans)]
    if config.scan_radii:
        scans = service.scan_r_sweep(context.params, grid, context.box, config.scan_radii, betas)
        named += [(f"classify_r_{r:g}.csv", scan) for r, scan in zip(config.scan_radii, scans)]
    if not named:
        named.append(("classify.csv", service.scan_slice(context.params, grid, context.box, betas)))

    figures = FigureRepository(root=context.out_dir)
    summary = []
    for name, scan in named:
        figures.write_scan(scan, name, context.metadata)
        summary.append({
            'ell': scan.ell,
            'r': scan.r,
            'file': name,
            'threshold': scan.threshold,
            'resonance_cells': scan.resonance_cells,
            'band_width': band_width(scan),
        })
    get_output_repository(context).write_json('classify.json', {'metadata': context.metadata, 'scans': summary})
    return EXIT_OK


def cmd_measure(context: RunContext, args: argparse.Namespace) -> int:
    """Доля нерезонансных точек для r или для списка measure_radii"""
    config = context.config
    radii = config.measure_radii or [config.r]
    results = get_resonance_service().measure_sweep(
        context.params, context.box, radii, config.n_samples, config.seed
    )
    payload = {
        'metadata': context.metadata,
        'results': [m.model_dump(mode='json') for m in results],
    }
    if len(results) == 1:
        payload.update({'fraction': results[0].fraction, 'stderr': results[0].stderr})
    get_output_repository(context).write_json('measure.json', payload)
    return EXIT_OK


def cmd_verify(context: RunContext, args: argparse.Namespace) -> int:
    """Критерии приёмки; код 1 при любом проваленном критерии"""
    report = get_verification_service(context).run()
    payload = {
        'metadata': context.metadata,
        'summary': report.summary(),
        # без длительностей: повторный запуск даёт те же байты
        'criteria': [c.model_dump(mode='json', exclude={'duration'}) for c in report.criteria],
    }
    get_output_repository(context).write_json('verify.json', payload)
    return EXIT_OK if report.ok else EXIT_VERIFY_FAILED


COMMAND_HANDLERS: Dict[str, Callable[[RunContext, argparse.Namespace], int]] = {
    'spectrum': cmd_spectrum,
    'series': cmd_series,
    'classify': cmd_classify,
    'measure': cmd_measure,
    'verify': cmd_verify,
}


def _report_error(payload: dict) -> None:
    sys.stderr.write(json.dumps(payload, ensure_ascii=False, sort_keys=True) + "\n")
    sys.stderr.flush()


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа CLI: возвращает код завершения"""
    args = parse_args(argv)
    configure_logging(get_config().application, args.verbose)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    start_time = time.perf_counter()
    logger.info(f"=== ЗАПУСК КОМАНДЫ {args.command} ===")
    try:
        context = build_context(args.config, out=args.out, seed=args.seed, override_alpha=args.override_alpha)
        code = COMMAND_HANDLERS[args.command](context, args)
    except SpectralError as e:
        logger.error(f"Команда {args.command} завершилась ошибкой {type(e).__name__}: {e.message}")
        _report_error(e.to_payload())
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("Выполнение прервано пользователем (Ctrl+C)")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.error(f"Критическая ошибка в команде {args.command}: {e}", exc_info=True)
        _report_error({
            'error': type(e).__name__,
            'message': str(e),
            'exit_code': EXIT_COMPUTATION_ERROR,
            'details': {},
        })
        return EXIT_COMPUTATION_ERROR

    duration = time.perf_counter() - start_time
    logger.info(f"=== КОМАНДА {args.command} ЗАВЕРШЕНА (код {code}, {duration:.2f}с) ===")
    return code
