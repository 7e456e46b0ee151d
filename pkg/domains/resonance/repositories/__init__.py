from .figure_repository import CSV_HEADER, FigureRepository

__all__ = ['CSV_HEADER', 'FigureRepository']
