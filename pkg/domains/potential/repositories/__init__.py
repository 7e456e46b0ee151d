from .potential_repository import PotentialRepository

__all__ = ['PotentialRepository']
