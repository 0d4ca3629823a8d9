"""
Synthetic regression generator

Rows of A are i.i.d. N(0, Sigma) with Sigma_ij = theta^|i-j|, produced by the
AR(1) recursion

    a_1 = xi_1,    a_j = theta * a_{j-1} + sqrt(1 - theta^2) * xi_j

run along each row (scipy.signal.lfilter). b = A x_bar + e with
e ~ N(0, noise_std^2 I) and x_bar = block repeated `repeats` times.

Randomness is counter based: the seed feeds a SeedSequence that spawns one
Philox stream per row plus one for the noise, so the result does not depend on
how rows are scheduled.

Presets:
    exam51  (3, 1.5, 0, 0, 2, 0 x 25) x 40,  theta = 0.6   (n = 1200)
    exam52  (0 x 7, 1) x 150,                theta = 0.6   (n = 1200)
    exam53  (3, 1.5, 0, 0, 2, 0 x 20) x 40,  theta = 0.75  (n = 1000)
    exam54  (3, 1.5, 0, 0, 2, 0 x 20) x 40,  theta = 0.8   (n = 1000)
    exam55  (0 x 18, 1.2, 1) x 50,           theta = 0.8   (n = 1000)

Example:
    spec = preset_spec("exam51", m=400, seed=7)
    instance, truth = gen_synthetic(spec)
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, Tuple

import numpy as np
from scipy.signal import lfilter

from ..models.problem import GroundTruth, ProblemInstance, _frozen_array
from ..utils.errors import InvalidArgumentError


@dataclass(frozen=True)
class SyntheticSpec:
    block: np.ndarray
    repeats: int
    m: int
    theta: float
    noise_std: float = 1.0
    seed: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "block", _frozen_array(self.block, "block", 1))
        if self.block.size == 0:
            raise InvalidArgumentError("block must not be empty")
        if self.repeats < 1 or self.m < 1:
            raise InvalidArgumentError("repeats and m must be positive")
        if not 0 <= self.theta < 1:
            raise InvalidArgumentError(f"theta must lie in [0, 1), got {self.theta}")
        if self.noise_std < 0:
            raise InvalidArgumentError("noise_std must be nonnegative")
        if self.seed < 0:
            raise InvalidArgumentError("seed must be nonnegative")

    @property
    def n(self) -> int:
        return self.repeats * self.block.size

    @property
    def x_bar(self) -> np.ndarray:
        return np.tile(self.block, self.repeats)

    def with_seed(self, seed: int) -> "SyntheticSpec":
        return replace(self, seed=seed)


_PATTERN_A = (3.0, 1.5, 0.0, 0.0, 2.0)

# name -> (block, repeats, theta)
PRESETS: Dict[str, Tuple[Tuple[float, ...], int, float]] = {
    "exam51": (_PATTERN_A + (0.0,) * 25, 40, 0.6),
    "exam52": ((0.0,) * 7 + (1.0,), 150, 0.6),
    "exam53": (_PATTERN_A + (0.0,) * 20, 40, 0.75),
    "exam54": (_PATTERN_A + (0.0,) * 20, 40, 0.8),
    "exam55": ((0.0,) * 18 + (1.2, 1.0), 50, 0.8),
}


def preset_spec(name: str, m: int, seed: int = 0, noise_std: float = 1.0) -> SyntheticSpec:
    """
    Raises:
        InvalidArgumentError: Unknown preset name
    """
    if name not in PRESETS:
        raise InvalidArgumentError(f"unknown synthetic preset {name!r}; expected one of {sorted(PRESETS)}")
    block, repeats, theta = PRESETS[name]
    return SyntheticSpec(np.array(block), repeats, m, theta, noise_std, seed, name)


def _streams(seed: int, count: int):
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def ar1_rows(innovations: np.ndarray, theta: float) -> np.ndarray:
    """Apply the AR(1) recursion along each row of a matrix of innovations."""
    scaled = np.array(innovations, dtype=np.float64)
    scaled[:, 1:] *= math.sqrt(1.0 - theta * theta)
    if theta == 0:
        return scaled
    return lfilter([1.0], [1.0, -theta], scaled, axis=1)


def gen_synthetic(spec: SyntheticSpec) -> Tuple[ProblemInstance, GroundTruth]:
    """
    Draw one instance.

    Args:
        spec: Block pattern, repeats, m, theta, noise level and seed

    Returns:
        Tuple[ProblemInstance, GroundTruth]: b is built as A x_bar + e exactly
    """
    streams = _streams(spec.seed, spec.m + 1)
    innovations = np.empty((spec.m, spec.n))
    for i in range(spec.m):
        innovations[i] = streams[i].standard_normal(spec.n)
    A = ar1_rows(innovations, spec.theta)
    noise = spec.noise_std * streams[spec.m].standard_normal(spec.m)
    x_bar = spec.x_bar
    b = A @ x_bar + noise
    name = spec.name or "synthetic"
    return ProblemInstance(A, b, name=f"{name}-m{spec.m}-s{spec.seed}"), GroundTruth(x_bar, noise)
