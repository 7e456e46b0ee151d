from .spectrum_repository import CSV_HEADER, SpectrumRepository

__all__ = ['CSV_HEADER', 'SpectrumRepository']
