"""
Mock implementations for numerical components

This module provides stand-ins for:
- The primal proximal kernel (corrupted output)
- The inner subproblem solver (failure on a chosen call)

These mocks let tests prove that the acceptance checks and the outer
driver detect and report a broken component.
"""

from .prox_mock import CorruptedProx, FailingSubproblemSolver

__all__ = ['CorruptedProx', 'FailingSubproblemSolver']
