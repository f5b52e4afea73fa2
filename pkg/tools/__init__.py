"""
Stateless helpers for file output and report rendering.
"""

from .io_tools import IOTools

__all__ = [
    'IOTools'
]
