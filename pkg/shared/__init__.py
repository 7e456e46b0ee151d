"""
Shared infrastructure: configuration, errors, worker pool, base classes.
"""
