from .resonance_schema import (
    SHELL_INNER,
    SHELL_OUTER,
    DomainLabel,
    GridSpec,
    InclusionReport,
    MeasureResult,
    ResonanceParams,
    ScanResult,
)

__all__ = [
    'SHELL_INNER',
    'SHELL_OUTER',
    'DomainLabel',
    'GridSpec',
    'InclusionReport',
    'MeasureResult',
    'ResonanceParams',
    'ScanResult',
]
