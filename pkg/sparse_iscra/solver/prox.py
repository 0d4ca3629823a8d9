"""
Proximal kernels for the separable penalty

    f(x) = sum_i alpha_i*|x_i| - <v, x> + indicator(|x_i| <= mu_i),  alpha = lam*w

and for its conjugate

    f*(z) = sum_i mu_i * (|z_i + v_i| - alpha_i)_+     (finite mu_i)
            0 if |z_i + v_i| <= alpha_i, else +inf      (mu_i = inf)

Everything here is closed form and vectorized over coordinates:

    - soft_threshold(z, a)             sign(z) * (|z| - a)_+
    - prox_primal(u, penalty, t)       prox of t*f
    - prox_conjugate(u, penalty, t)    prox of t*f*
    - conjugate_value(z, penalty)      f*(z)
    - moreau_envelope_conjugate        e_t f*(u) and its gradient (u - p)/t
    - prox_jacobian_diag               0/1 diagonal of the generalized Jacobian
                                       of prox_conjugate

Infinite box radii are never multiplied: every formula branches on
penalty.finite_box first.

Example:
    penalty = SeparablePenalty.lasso(n=3, lam=0.3)
    prox_primal(np.array([1.0, -0.2, 0.0]), penalty, 1.0)   # -> [0.7, 0, 0]
"""

from dataclasses import dataclass

import numpy as np

from ..models.problem import SeparablePenalty
from ..utils.errors import InvalidArgumentError, UnsupportedPenaltyError


def soft_threshold(z: np.ndarray, threshold) -> np.ndarray:
    return np.sign(z) * np.maximum(np.abs(z) - threshold, 0.0)


def _check_step(step: float) -> float:
    if not step > 0:
        raise InvalidArgumentError(f"prox step must be positive, got {step}")
    return float(step)


def prox_primal(u: np.ndarray, penalty: SeparablePenalty, step: float = 1.0) -> np.ndarray:
    """
    argmin_y t*f(y) + (1/2)||y - u||^2.

    Componentwise clip(soft(u + t*v, t*alpha), -mu, mu); np.clip leaves
    infinite radii untouched.
    """
    t = _check_step(step)
    u = np.asarray(u, dtype=np.float64)
    y = soft_threshold(u + t * penalty.tilt, t * penalty.alpha)
    return np.clip(y, -penalty.box_radius, penalty.box_radius)


def prox_conjugate(u: np.ndarray, penalty: SeparablePenalty, step: float = 1.0) -> np.ndarray:
    """
    argmin_y t*f*(y) + (1/2)||y - u||^2, via the Moreau decomposition.

    Componentwise u - clip(soft(u + v, alpha), -t*mu, t*mu). On unit-weight,
    untilted, unboxed coordinates this is the projection onto [-lam, lam];
    on zero-weight coordinates with box mu it is soft(u, t*mu).
    """
    t = _check_step(step)
    u = np.asarray(u, dtype=np.float64)
    inner = soft_threshold(u + penalty.tilt, penalty.alpha)
    radius = np.where(penalty.finite_box, t * np.where(penalty.finite_box, penalty.box_radius, 0.0), np.inf)
    return u - np.clip(inner, -radius, radius)


def conjugate_value(z: np.ndarray, penalty: SeparablePenalty, feasibility_tol: float = 1e-10) -> float:
    """
    f*(z). Unboxed coordinates contribute 0 when |z_i + v_i| <= alpha_i
    (up to feasibility_tol, relative) and make the value +inf otherwise.
    """
    shifted = np.abs(np.asarray(z, dtype=np.float64) + penalty.tilt)
    finite = penalty.finite_box
    excess = np.maximum(shifted - penalty.alpha, 0.0)
    boxed_part = float(penalty.box_radius[finite] @ excess[finite])
    slack = feasibility_tol * (1.0 + penalty.alpha[~finite])
    if np.any(excess[~finite] > slack):
        return float("inf")
    return boxed_part


def moreau_envelope_conjugate(u: np.ndarray, penalty: SeparablePenalty, step: float = 1.0) -> float:
    """
    e_t f*(u) = f*(p) + (1/(2t))||u - p||^2 with p = prox_conjugate(u; t).

    p is always feasible for f*, so the unboxed part of f*(p) is exactly 0
    and the value is finite.
    """
    t = _check_step(step)
    u = np.asarray(u, dtype=np.float64)
    p = prox_conjugate(u, penalty, t)
    finite = penalty.finite_box
    excess = np.maximum(np.abs(p[finite] + penalty.tilt[finite]) - penalty.alpha[finite], 0.0)
    diff = u - p
    return float(penalty.box_radius[finite] @ excess) + float(diff @ diff) / (2.0 * t)


def envelope_gradient(u: np.ndarray, penalty: SeparablePenalty, step: float = 1.0) -> np.ndarray:
    """Gradient of e_t f* at u: (u - prox_conjugate(u; t)) / t."""
    t = _check_step(step)
    u = np.asarray(u, dtype=np.float64)
    return (u - prox_conjugate(u, penalty, t)) / t


def jacobian_diag(u: np.ndarray, penalty: SeparablePenalty, step: float = 1.0) -> np.ndarray:
    """
    0/1 diagonal of an element of the generalized Jacobian of prox_conjugate.

    d_i = 1 when alpha_i > 0 and |u_i + v_i| <= alpha_i, or when
    |u_i + v_i| > alpha_i + t*mu_i; d_i = 0 otherwise. Works for any
    penalty; prox_jacobian_diag is the checked public form.
    """
    t = _check_step(step)
    shifted = np.abs(np.asarray(u, dtype=np.float64) + penalty.tilt)
    alpha = penalty.alpha
    inside = (alpha > 0) & (shifted <= alpha)
    beyond = np.zeros_like(inside)
    finite = penalty.finite_box
    beyond[finite] = shifted[finite] > alpha[finite] + t * penalty.box_radius[finite]
    return (inside | beyond).astype(np.float64)


def prox_jacobian_diag(u: np.ndarray, penalty: SeparablePenalty, step: float = 1.0) -> np.ndarray:
    """
    Jacobian diagonal for truncated-l1 penalties.

    Unit-weight coordinates: d_i = 1 iff |u_i| <= lam.
    Zero-weight coordinates: d_i = 1 iff |u_i| > t*mu_i.

    Raises:
        UnsupportedPenaltyError: weights outside {0, 1}
    """
    if not np.all((penalty.weights == 0) | (penalty.weights == 1)):
        raise UnsupportedPenaltyError("prox_jacobian_diag requires weights in {0, 1}")
    return jacobian_diag(u, penalty, step)


@dataclass(frozen=True)
class ProxQuery:
    """A point, a penalty and a step t > 0; bundles the four kernels."""
    point: np.ndarray
    penalty: SeparablePenalty
    step: float = 1.0

    def __post_init__(self) -> None:
        _check_step(self.step)
        object.__setattr__(self, "point", np.asarray(self.point, dtype=np.float64))

    def primal(self) -> np.ndarray:
        return prox_primal(self.point, self.penalty, self.step)

    def conjugate(self) -> np.ndarray:
        return prox_conjugate(self.point, self.penalty, self.step)

    def envelope(self) -> float:
        return moreau_envelope_conjugate(self.point, self.penalty, self.step)

    def jacobian_diag(self) -> np.ndarray:
        return prox_jacobian_diag(self.point, self.penalty, self.step)
