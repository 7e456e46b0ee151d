"""
Command-line front end: spectrum, series, classify, measure, verify.
"""
from .commands import (
    COMMAND_HANDLERS,
    cmd_classify,
    cmd_measure,
    cmd_series,
    cmd_spectrum,
    cmd_verify,
    configure_logging,
    main,
)
from .dependencies import RunContext, build_context
from .parser import build_parser, parse_args

__all__ = [
    'COMMAND_HANDLERS',
    'cmd_classify',
    'cmd_measure',
    'cmd_series',
    'cmd_spectrum',
    'cmd_verify',
    'configure_logging',
    'main',
    'RunContext',
    'build_context',
    'build_parser',
    'parse_args',
]
