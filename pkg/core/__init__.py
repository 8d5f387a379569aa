"""
Core modules for resonance-lab
"""

from .arith import ArithTables, build_tables
from .series import ExpSumSpec
from .resonator import ResonatorConfig, ResonatorSupport
from .kernel import KernelParams
from .engine import EngineParams, ScanResult
from .growth import GrowthTarget
from .storage import TableStorage
from .write_queue import ResultWriter
from .logger import RunLogger

__all__ = [
    'ArithTables',
    'build_tables',
    'ExpSumSpec',
    'ResonatorConfig',
    'ResonatorSupport',
    'KernelParams',
    'EngineParams',
    'ScanResult',
    'GrowthTarget',
    'TableStorage',
    'ResultWriter',
    'RunLogger',
]
