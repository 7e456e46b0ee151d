import argparse
from typing import List, Optional

DEFAULT_RUN_CONFIG = "configs/default_run.json"

COMMANDS = ('spectrum', 'series', 'classify', 'measure', 'verify')


def parse_beta(text: str) -> List[int]:
    """'2,1' -> [2, 1]"""
    try:
        values = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидались целые через запятую: '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("пустой вектор β")
    return values


def parse_seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed должен быть целым: '{text}'")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed вне диапазона [0, 2^64)")
    return value


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=DEFAULT_RUN_CONFIG,
                        help=f"JSON с параметрами запуска (по умолчанию {DEFAULT_RUN_CONFIG})")
    common.add_argument('--out', default=None, help="Каталог для выходных файлов (заменяет output_dir)")
    common.add_argument('--seed', type=parse_seed, default=None, help="Зерно генератора выборок (u64)")
    common.add_argument('--override-alpha', type=float, default=None, dest='override_alpha',
                        help="Показатель α̃ вместо α(ℓ); включает визуализационный режим")
    common.add_argument('--verbose', action='store_true', help="Подробное логирование (DEBUG)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog='neumann-spectra',
        description="Спектр оператора (−Δ)^ℓ + q с условиями Неймана на прямоугольном боксе",
    )
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    spectrum = subparsers.add_parser('spectrum', parents=[common], help="Собственные значения усечённой задачи")
    spectrum.add_argument('--csv', action='store_true', help="Дополнительно записать CSV собственных значений")

    series = subparsers.add_parser('series', parents=[common], help="Ряд F_k и предсказание собственного значения")
    series.add_argument('--beta', type=parse_beta, default=None, help="Мода β в виде n1,...,nd")

    subparsers.add_parser('classify', parents=[common], help="Данные резонансных областей на двумерном срезе")
    subparsers.add_parser('measure', parents=[common], help="Доля нерезонансных точек методом Монте-Карло")
    subparsers.add_parser('verify', parents=[common], help="Прогон критериев приёмки")
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)
