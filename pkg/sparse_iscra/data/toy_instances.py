"""
Hard-coded toy instances

    exam31  4x5 matrix with a one-dimensional null space span{(2,1,1,1,1)},
            x_bar = (2, 10, 0, 0, 0), noiseless b = (1, 1, 1, 9)
    exam42  the same data, used for the driver trajectory with rho = 0.2
    exam41  3x4 matrix, x_bar = (0, 0, 2, 10), b = A x_bar + e*(1, 1, 1)
            with 0 < e <= 0.1

Usage:
    instance, truth = toy_instance("exam41", e=0.05)
"""

from typing import Tuple

import numpy as np

from ..models.problem import GroundTruth, ProblemInstance
from ..utils.errors import InvalidArgumentError

TOY_NAMES = ("exam31", "exam41", "exam42")

# largest admissible noise level of exam41
EXAM41_MAX_NOISE = 0.1

_EXAM31_A = 0.5 * np.array([
    [1.0, 0.0, -2.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, -2.0, 0.0],
    [1.0, 0.0, 0.0, 0.0, -2.0],
    [-1.0, 2.0, 0.0, 0.0, 0.0],
])
_EXAM31_X = np.array([2.0, 10.0, 0.0, 0.0, 0.0])
EXAM31_NULL_DIRECTION = np.array([2.0, 1.0, 1.0, 1.0, 1.0])

_EXAM41_A = np.array([
    [1.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 1.0, 0.0],
    [2.0, 0.0, 0.0, 1.0],
])
_EXAM41_X = np.array([0.0, 0.0, 2.0, 10.0])


def exam31() -> Tuple[ProblemInstance, GroundTruth]:
    b = _EXAM31_A @ _EXAM31_X
    return ProblemInstance(_EXAM31_A, b, name="exam31"), GroundTruth(_EXAM31_X, np.zeros(4))


def exam42() -> Tuple[ProblemInstance, GroundTruth]:
    instance, truth = exam31()
    return ProblemInstance(instance.A, instance.b, name="exam42"), truth


def exam41(e: float = 0.05) -> Tuple[ProblemInstance, GroundTruth]:
    """
    Raises:
        InvalidArgumentError: e outside (0, 0.1]
    """
    if not 0 < e <= EXAM41_MAX_NOISE:
        raise InvalidArgumentError(f"exam41 needs 0 < e <= {EXAM41_MAX_NOISE}, got {e}")
    noise = np.full(3, float(e))
    b = _EXAM41_A @ _EXAM41_X + noise
    return ProblemInstance(_EXAM41_A, b, name="exam41"), GroundTruth(_EXAM41_X, noise)


def toy_instance(name: str, e: float = 0.05) -> Tuple[ProblemInstance, GroundTruth]:
    """
    Look up a toy instance by name.

    Args:
        name: exam31, exam41 or exam42
        e: Noise level, used by exam41 only

    Returns:
        Tuple[ProblemInstance, GroundTruth]

    Raises:
        InvalidArgumentError: Unknown name or inadmissible e
    """
    if name == "exam31":
        return exam31()
    if name == "exam42":
        return exam42()
    if name == "exam41":
        return exam41(e)
    raise InvalidArgumentError(f"unknown toy instance {name!r}; expected one of {TOY_NAMES}")


def exam31_lasso_distance(x: np.ndarray, lam: float) -> float:
    """
    Distance from x to the exam31/exam42 Lasso solution set

        {(2 + 2t - 8 lam, 10 + t - 8 lam, t, t, t) : 4 lam - 1 <= t <= 0},

    valid for 0 < lam < 1/4.

    Raises:
        InvalidArgumentError: lam outside (0, 1/4)
    """
    if not 0 < lam < 0.25:
        raise InvalidArgumentError(f"the exam31 Lasso family needs 0 < lambda < 1/4, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    base = np.array([2 - 8 * lam, 10 - 8 * lam, 0.0, 0.0, 0.0])
    d = EXAM31_NULL_DIRECTION
    t = float(np.clip((x - base) @ d / (d @ d), 4 * lam - 1, 0.0))
    return float(np.linalg.norm(x - base - t * d))
