"""
Utility scripts for inspecting the table cache
"""

__all__ = []
