"""Special-relativity kinematics for point particles.

All velocities live in lab-frame coordinates with a finite speed of light
``c`` carried by :class:`PhysicsConfig`.  Crossing the speed limit is a hard
:class:`~form_lab.errors.SpeedLimitError`, never a clamp: a clamp would turn
an integration bug into a silently wrong dataset.

Every function accepts a single vector ``(d,)`` or a batch ``(..., d)`` and
broadcasts elementwise, so batched code paths produce bit-identical numbers
to the single-particle ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVelocityError, NonFiniteError, ShapeError, SpeedLimitError

# Below this speed a velocity direction is numerically meaningless and
# direction-dependent operations refuse to guess.
EPS_V = 1e-12


@dataclass(frozen=True)
class PhysicsConfig:
    """Speed of light and particle mass, in working units (du, s).

    The default ``c = 10`` corresponds to measuring distance in units of
    0.1 light-seconds: one du is 3e7 m, so light covers 10 du each second.
    """

    c: float = 10.0
    m: float = 1.0

    def __post_init__(self) -> None:
        if not (self.c > 0.0 and np.isfinite(self.c)):
            raise ValueError(f"speed of light must be positive and finite, got {self.c}")
        if not (self.m > 0.0 and np.isfinite(self.m)):
            raise ValueError(f"mass must be positive and finite, got {self.m}")


DEFAULT_PHYSICS = PhysicsConfig()


@dataclass(frozen=True)
class ParticleState:
    """Lab-frame snapshot of one particle: time, position, velocity."""

    t: float
    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class ForceComponents:
    """A force expressed in the co-moving frame of a particle.

    ``f_par`` points along the velocity, ``f_perp`` along the (handedness-
    dependent) 90-degree rotation of the velocity.  Fields may be scalars or
    broadcastable arrays.
    """

    f_par: float | np.ndarray
    f_perp: float | np.ndarray


def _as_float_array(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def _column(x) -> np.ndarray:
    """Append a trailing axis so scalars/batches broadcast against vectors."""
    return np.asarray(x, dtype=np.float64)[..., None]


def speed(v) -> float | np.ndarray:
    """Euclidean norm of the velocity, elementwise over a batch."""
    v = _as_float_array(v)
    return np.sqrt(_dot(v, v))


def lorentz_factor(v, physics: PhysicsConfig = DEFAULT_PHYSICS) -> float | np.ndarray:
    """gamma = 1 / sqrt(1 - |v|^2 / c^2); raises if any |v| >= c."""
    v = _as_float_array(v)
    s2 = _dot(v, v)
    c2 = physics.c**2
    if np.any(s2 >= c2) or not np.all(np.isfinite(s2)):
        worst = float(np.sqrt(np.max(s2)))
        raise SpeedLimitError(f"speed {worst!r} >= c = {physics.c!r}")
    return 1.0 / np.sqrt(1.0 - s2 / c2)


def proper_time_increment(dt, gamma) -> float | np.ndarray:
    """Proper-time step dtau = dt / gamma for a clock moving at factor gamma."""
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(gamma < 1.0) or not np.all(np.isfinite(gamma)):
        raise ValueError(f"Lorentz factor must be finite and >= 1, got {gamma!r}")
    return np.asarray(dt, dtype=np.float64) / gamma


def momentum(v, physics: PhysicsConfig = DEFAULT_PHYSICS) -> np.ndarray:
    """Relativistic momentum p = m * gamma * v."""
    v = _as_float_array(v)
    g = lorentz_factor(v, physics)
    return physics.m * _column(g) * v


def relativistic_force(v, a, physics: PhysicsConfig = DEFAULT_PHYSICS) -> np.ndarray:
    """Lab-frame force producing acceleration ``a`` at velocity ``v``.

    f = m * (gamma * a + gamma^3 * <v, a> / c^2 * v).  This is the time
    derivative of the momentum ``m * gamma * v`` along the trajectory.
    """
    v = _as_float_array(v)
    a = _as_float_array(a)
    g = lorentz_factor(v, physics)
    coef = (g**3) * _dot(v, a) / physics.c**2
    return physics.m * (_column(g) * a + _column(coef) * v)


def acceleration_from_force(v, f, physics: PhysicsConfig = DEFAULT_PHYSICS) -> np.ndarray:
    """Invert :func:`relativistic_force`: a = (f - <v, f> v / c^2) / (m gamma)."""
    v = _as_float_array(v)
    f = _as_float_array(f)
    g = lorentz_factor(v, physics)
    reduced = f - _column(_dot(v, f) / physics.c**2) * v
    return reduced / (physics.m * _column(g))


def speed_sq_derivative(v, f, physics: PhysicsConfig = DEFAULT_PHYSICS) -> float | np.ndarray:
    """d(|v|^2/2)/dt under force f: <f, v> (1 - |v|^2/c^2) / (m gamma).

    The factor ``1 - |v|^2/c^2`` encodes the speed limit: the push toward c
    vanishes as the speed approaches it, so a perpendicular force
    (<f, v> = 0) changes direction only, never speed.
    """
    v = _as_float_array(v)
    f = _as_float_array(f)
    g = lorentz_factor(v, physics)
    s2 = _dot(v, v)
    return _dot(f, v) * (1.0 - s2 / physics.c**2) / (physics.m * g)


def rotate90(u, handedness: int = 1) -> np.ndarray:
    """Rotate 2-D vectors by 90 degrees; +1 = counter-clockwise, -1 = clockwise."""
    u = _as_float_array(u)
    if u.shape[-1] != 2:
        raise ShapeError(f"rotate90 needs 2-D vectors, got trailing dim {u.shape[-1]}")
    if handedness not in (1, -1):
        raise ValueError(f"handedness must be +1 or -1, got {handedness!r}")
    return handedness * np.stack([-u[..., 1], u[..., 0]], axis=-1)


def comoving_frame(v, handedness: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors (parallel, perpendicular) of the frame riding along ``v``.

    Raises :class:`DegenerateVelocityError` when any speed is <= EPS_V,
    because the frame orientation is undefined at rest.
    """
    v = _as_float_array(v)
    s = speed(v)
    if np.any(s <= EPS_V):
        raise DegenerateVelocityError(
            f"velocity direction undefined at speed <= {EPS_V} (min speed {float(np.min(s))!r})"
        )
    vhat = v / _column(s)
    return vhat, rotate90(vhat, handedness)


def decompose_parallel_perp(f, v, handedness: int = 1) -> ForceComponents:
    """Project a lab-frame 2-D force onto the co-moving frame of ``v``."""
    f = _as_float_array(f)
    vhat, vperp = comoving_frame(v, handedness)
    return ForceComponents(f_par=_dot(f, vhat), f_perp=_dot(f, vperp))


def compose_from_components(components: ForceComponents, v, handedness: int = 1) -> np.ndarray:
    """Rebuild the lab-frame force from co-moving components along ``v``."""
    vhat, vperp = comoving_frame(v, handedness)
    return _column(components.f_par) * vhat + _column(components.f_perp) * vperp


def compose_lab_force(f_par, f_perp, v, handedness: int = 1) -> np.ndarray:
    """Like :func:`compose_from_components`, but tolerant of resting particles.

    Rows where the speed is <= EPS_V are only an error when their components
    are nonzero; a zero force needs no direction and composes to zero.  This
    is the composition used inside integrators, where a force schedule may
    legitimately pass through exact zero.
    """
    v = _as_float_array(v)
    f_par = np.broadcast_to(np.asarray(f_par, dtype=np.float64), v.shape[:-1])
    f_perp = np.broadcast_to(np.asarray(f_perp, dtype=np.float64), v.shape[:-1])
    s = speed(v)
    degenerate = s <= EPS_V
    if np.any(degenerate & ((f_par != 0.0) | (f_perp != 0.0))):
        raise DegenerateVelocityError(
            "nonzero co-moving force at (numerically) zero speed: direction undefined"
        )
    safe = np.where(degenerate, 1.0, s)
    vhat = v / _column(safe)
    vhat = np.where(_column(degenerate), 0.0, vhat)
    return _column(f_par) * vhat + _column(f_perp) * rotate90(vhat, handedness)


# --- celerity (proper velocity) coordinates -------------------------------
#
# w = gamma(v) * v is unbounded while |v| < c always; integrating dynamics in
# w makes the speed limit structural instead of something to monitor.


def celerity_from_velocity(v, physics: PhysicsConfig = DEFAULT_PHYSICS) -> np.ndarray:
    """w = gamma * v.  Raises if |v| >= c."""
    v = _as_float_array(v)
    return _column(lorentz_factor(v, physics)) * v


def velocity_from_celerity(w, physics: PhysicsConfig = DEFAULT_PHYSICS) -> np.ndarray:
    """v = w / sqrt(1 + |w|^2 / c^2).

    The exact map satisfies |v| < c for every finite w.  In float64 the
    strict inequality holds up to |w| ~ c / sqrt(eps) (gamma ~ 1e8); beyond
    that the nearest representable double is c itself and the result
    saturates at exactly c, never above it.
    """
    w = _as_float_array(w)
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("celerity must be finite")
    return w / _column(np.sqrt(1.0 + _dot(w, w) / physics.c**2))


def lorentz_factor_from_celerity(w, physics: PhysicsConfig = DEFAULT_PHYSICS) -> float | np.ndarray:
    """gamma expressed through w: sqrt(1 + |w|^2 / c^2)."""
    w = _as_float_array(w)
    return np.sqrt(1.0 + _dot(w, w) / physics.c**2)
