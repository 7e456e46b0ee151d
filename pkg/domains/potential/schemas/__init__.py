from .potential_schema import Index, PotentialSpec

__all__ = ['Index', 'PotentialSpec']
