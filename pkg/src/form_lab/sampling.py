"""Samplers: turn trained heads (or plain callables) into trajectories.

Three engines, all on a uniform grid of ``n_steps`` steps of size
``d = duration / n_steps`` and all batched over leading axes of ``x0``:

* :func:`flow_path_o1` - forward Euler on a learned velocity field.
* :func:`flow_path_o1o2` - Euler plus the second-order ``d^2/2`` correction
  from a learned acceleration field.
* :func:`force_path` - the relativistic force sampler.  Per step it holds
  the predicted co-moving force fixed and applies that step *exactly* in
  momentum space: the celerity magnitude grows linearly under ``f_par`` and
  the heading integrates in closed form under ``f_perp``.  Because the state
  advances through celerity, every recorded speed is strictly below c for
  any step size and any force magnitude; the textbook per-step Euler
  velocity update is available as ``velocity_update="euler"`` but can
  overshoot c on coarse grids, which is then a hard error.

Model-facing wrappers (:func:`sample_o1`, :func:`sample_o1o2`,
:func:`sample_form`) feed networks normalized time ``t / duration``, exactly
as during training.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .datasets import DatasetSpec, initial_velocity
from .errors import DegenerateVelocityError, NonFiniteError, SpeedLimitError
from .ode import integrate_fixed_grid
from .relativity import (
    DEFAULT_PHYSICS,
    EPS_V,
    PhysicsConfig,
    acceleration_from_force,
    celerity_from_velocity,
    compose_lab_force,
    velocity_from_celerity,
)
from .neural import mlp_forward
from .training import TrainedModel

VELOCITY_UPDATES = ("momentum-exact", "euler")


@dataclass(frozen=True)
class SamplerConfig:
    """Grid and physics for sampling; ``None`` fields default to the model's."""

    n_steps: int = 100
    duration: float | None = None
    physics: PhysicsConfig | None = None
    handedness: int | None = None
    velocity_update: str = "momentum-exact"

    def __post_init__(self) -> None:
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.duration is not None and not self.duration > 0.0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.handedness not in (None, 1, -1):
            raise ValueError(f"handedness must be +1 or -1, got {self.handedness}")
        if self.velocity_update not in VELOCITY_UPDATES:
            raise ValueError(f"velocity_update must be one of {VELOCITY_UPDATES}")


@dataclass
class SamplePath:
    """States along one sampling run; ``x`` has shape (n_steps+1, ..., 2)."""

    times: np.ndarray
    x: np.ndarray
    v: np.ndarray | None = None  # force sampler only

    @property
    def endpoint(self) -> np.ndarray:
        return self.x[-1]

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


def _grid(duration: float, n_steps: int) -> tuple[np.ndarray, float]:
    d = duration / n_steps
    return d * np.arange(n_steps + 1), d


def flow_path_o1(velocity_fn: Callable, x0, duration: float, n_steps: int) -> SamplePath:
    """x <- x + d * u1(x, t), the first-order probability-flow sampler."""
    x = np.array(x0, dtype=np.float64, copy=True)
    times, d = _grid(duration, n_steps)
    xs = np.empty((n_steps + 1, *x.shape), dtype=np.float64)
    xs[0] = x
    for k in range(n_steps):
        x = x + d * velocity_fn(x, float(times[k]))
        xs[k + 1] = x
    _require_finite(xs)
    return SamplePath(times=times, x=xs)


def flow_path_o1o2(velocity_fn: Callable, accel_fn: Callable, x0, duration: float, n_steps: int) -> SamplePath:
    """x <- x + d u1 + (d^2/2) u2(u1, x, t), the second-order refinement."""
    x = np.array(x0, dtype=np.float64, copy=True)
    times, d = _grid(duration, n_steps)
    xs = np.empty((n_steps + 1, *x.shape), dtype=np.float64)
    xs[0] = x
    for k in range(n_steps):
        t = float(times[k])
        u1 = velocity_fn(x, t)
        x = x + d * u1 + (0.5 * d * d) * accel_fn(u1, x, t)
        xs[k + 1] = x
    _require_finite(xs)
    return SamplePath(times=times, x=xs)


def force_path(
    components_fn: Callable,
    x0,
    v0,
    duration: float,
    n_steps: int,
    physics: PhysicsConfig = DEFAULT_PHYSICS,
    handedness: int = 1,
    velocity_update: str = "momentum-exact",
) -> SamplePath:
    """Integrate a co-moving force field from (x0, v0).

    ``components_fn(x, t)`` returns the lab-measured co-moving force pair
    ``(f_par, f_perp)`` (true force, not per unit mass), each broadcastable
    to ``x[..., 0]``.  Positions advance with the trapezoid rule
    ``x <- x + d (v_new + v_old) / 2``.
    """
    if velocity_update not in VELOCITY_UPDATES:
        raise ValueError(f"velocity_update must be one of {VELOCITY_UPDATES}")
    x = np.array(x0, dtype=np.float64, copy=True)
    v = np.broadcast_to(np.asarray(v0, dtype=np.float64), x.shape).copy()
    times, d = _grid(duration, n_steps)
    xs = np.empty((n_steps + 1, *x.shape), dtype=np.float64)
    vs = np.empty_like(xs)
    xs[0], vs[0] = x, v
    w = celerity_from_velocity(v, physics)  # enforces |v0| < c

    for k in range(n_steps):
        t = float(times[k])
        f_par, f_perp = components_fn(x, t)
        if velocity_update == "momentum-exact":
            v_new, w = _momentum_exact_update(w, f_par, f_perp, d, physics, handedness)
        else:
            v_new = _euler_update(v, f_par, f_perp, d, physics, handedness)
            w = None  # not tracked in euler mode
        x = x + (0.5 * d) * (v_new + v)
        v = v_new
        xs[k + 1], vs[k + 1] = x, v
    _require_finite(xs)
    _require_finite(vs)
    return SamplePath(times=times, x=xs, v=vs)


def _momentum_exact_update(
    w: np.ndarray, f_par, f_perp, d: float, physics: PhysicsConfig, handedness: int
) -> tuple[np.ndarray, np.ndarray]:
    """Advance celerity one step under a frozen co-moving force, exactly.

    With (f_par, f_perp) constant over the step, |w| grows linearly,
    d|w|/dt = f_par / m, and the heading obeys dphi/dt = h f_perp / (m |w|),
    giving delta_phi = h (f_perp/f_par) ln(|w_1|/|w_0|) (limit: h f_perp d /
    (m |w_0|) for f_par = 0).  Both pieces are closed-form, so the only
    approximation in the sampler is freezing the components per step.
    """
    m = physics.m
    lead = w.shape[:-1]
    f_par = np.broadcast_to(np.asarray(f_par, dtype=np.float64), lead)
    f_perp = np.broadcast_to(np.asarray(f_perp, dtype=np.float64), lead)
    wmag = np.sqrt(np.sum(w * w, axis=-1))
    resting = wmag <= EPS_V
    if np.any(resting & ((f_par != 0.0) | (f_perp != 0.0))):
        raise DegenerateVelocityError(
            "force sampler reached (numerically) zero speed with a nonzero force"
        )
    safe_w = np.where(resting, 1.0, wmag)
    wmag_new = wmag + f_par * (d / m)
    if np.any(~resting & (wmag_new <= 0.0)):
        raise DegenerateVelocityError(
            "parallel impulse drives the celerity through zero within one step; increase n_steps"
        )
    par_zero = f_par == 0.0
    ratio = f_par * (d / m) / safe_w
    dphi = handedness * np.where(
        par_zero,
        f_perp * (d / m) / safe_w,
        (f_perp / np.where(par_zero, 1.0, f_par)) * np.log1p(np.where(par_zero, 0.0, ratio)),
    )
    cos_p, sin_p = np.cos(dphi), np.sin(dphi)
    u = w / safe_w[..., None]
    u_new = np.stack(
        [cos_p * u[..., 0] - sin_p * u[..., 1], sin_p * u[..., 0] + cos_p * u[..., 1]],
        axis=-1,
    )
    w_new = wmag_new[..., None] * u_new
    return velocity_from_celerity(w_new, physics), w_new


def _euler_update(
    v: np.ndarray, f_par, f_perp, d: float, physics: PhysicsConfig, handedness: int
) -> np.ndarray:
    """Textbook update v <- v + d * a; raises if the step crosses c."""
    f_lab = compose_lab_force(f_par, f_perp, v, handedness)
    v_new = v + d * acceleration_from_force(v, f_lab, physics)
    speeds = np.sqrt(np.sum(v_new * v_new, axis=-1))
    if np.any(speeds >= physics.c):
        raise SpeedLimitError(
            f"euler velocity update crossed the speed limit (max speed {float(np.max(speeds))!r}, "
            f"c = {physics.c!r}); use more steps or velocity_update='momentum-exact'"
        )
    return v_new


def ode_reference_path(
    components_fn: Callable,
    x0,
    v0,
    duration: float,
    n_steps: int,
    physics: PhysicsConfig = DEFAULT_PHYSICS,
    handedness: int = 1,
) -> SamplePath:
    """High-order RK4 reference for the same co-moving force field.

    Used to cross-check :func:`force_path` against an independent
    integrator; not a sampler in its own right.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    v0 = np.broadcast_to(np.asarray(v0, dtype=np.float64), x0.shape)
    w0 = celerity_from_velocity(v0, physics)
    y0 = np.concatenate([x0, w0], axis=-1)

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        x, w = y[..., :2], y[..., 2:]
        v = velocity_from_celerity(w, physics)
        f_par, f_perp = components_fn(x, t)
        f_lab = compose_lab_force(f_par, f_perp, v, handedness)
        return np.concatenate([v, f_lab / physics.m], axis=-1)

    times, states = integrate_fixed_grid(deriv, y0, 0.0, duration, n_steps, method="rk4")
    _require_finite(states)
    return SamplePath(
        times=times,
        x=states[..., :2],
        v=velocity_from_celerity(states[..., 2:], physics),
    )


def _require_finite(arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("sampler produced non-finite states")


# --- trained-model adapters ------------------------------------------------


def velocity_head_fn(model: TrainedModel) -> Callable:
    head = model.heads["u1"]
    duration = model.duration

    def fn(x: np.ndarray, t: float) -> np.ndarray:
        t_col = np.full((*x.shape[:-1], 1), t / duration)
        return mlp_forward(head, np.concatenate([x, t_col], axis=-1))

    return fn


def accel_head_fn(model: TrainedModel) -> Callable:
    head = model.heads["u2"]
    duration = model.duration

    def fn(u1: np.ndarray, x: np.ndarray, t: float) -> np.ndarray:
        t_col = np.full((*x.shape[:-1], 1), t / duration)
        return mlp_forward(head, np.concatenate([u1, x, t_col], axis=-1))

    return fn


def force_head_fn(model: TrainedModel) -> Callable:
    head = model.heads["F"]
    duration = model.duration
    time_only = model.train_config.form_input_mode == "time"

    def fn(x: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        if time_only:
            out = mlp_forward(head, np.array([t / duration]))
            return out[0], out[1]
        t_col = np.full((*x.shape[:-1], 1), t / duration)
        out = mlp_forward(head, np.concatenate([x, t_col], axis=-1))
        return out[..., 0], out[..., 1]

    return fn


def _resolve(model: TrainedModel, config: SamplerConfig | None) -> tuple[SamplerConfig, float, PhysicsConfig, int]:
    cfg = config if config is not None else SamplerConfig()
    duration = cfg.duration if cfg.duration is not None else model.duration
    physics = cfg.physics if cfg.physics is not None else model.physics
    if cfg.handedness is not None:
        handed = cfg.handedness
    elif model.dataset_info is not None:
        handed = int(model.dataset_info.get("handedness", 1))
    else:
        handed = 1
    return cfg, duration, physics, handed


def model_initial_velocity(model: TrainedModel, x0) -> np.ndarray:
    """The dataset-matched initial velocity rule attached to the model."""
    if model.dataset_info is None:
        raise ValueError("model carries no dataset info; pass v0 explicitly")
    return initial_velocity(DatasetSpec.from_dict(model.dataset_info), x0)


def sample_o1(model: TrainedModel, x0, config: SamplerConfig | None = None) -> SamplePath:
    if "u1" not in model.heads:
        raise ValueError(f"model method {model.method!r} has no velocity head")
    cfg, duration, _, _ = _resolve(model, config)
    return flow_path_o1(velocity_head_fn(model), x0, duration, cfg.n_steps)


def sample_o1o2(model: TrainedModel, x0, config: SamplerConfig | None = None) -> SamplePath:
    if "u1" not in model.heads or "u2" not in model.heads:
        raise ValueError(f"model method {model.method!r} lacks u1/u2 heads")
    cfg, duration, _, _ = _resolve(model, config)
    return flow_path_o1o2(velocity_head_fn(model), accel_head_fn(model), x0, duration, cfg.n_steps)


def sample_form(model: TrainedModel, x0, config: SamplerConfig | None = None, v0=None) -> SamplePath:
    """Force-sampler run; ``v0=None`` uses the dataset-matched rule, ``"zero"``
    starts at rest (only sensible if the learned force starts at zero)."""
    if "F" not in model.heads:
        raise ValueError(f"model method {model.method!r} has no force head")
    cfg, duration, physics, handed = _resolve(model, config)
    x0 = np.asarray(x0, dtype=np.float64)
    if v0 is None:
        v0_arr = model_initial_velocity(model, x0)
    elif isinstance(v0, str) and v0 == "zero":
        v0_arr = np.zeros_like(x0)
    else:
        v0_arr = np.asarray(v0, dtype=np.float64)
    return force_path(
        force_head_fn(model),
        x0,
        v0_arr,
        duration,
        cfg.n_steps,
        physics=physics,
        handedness=handed,
        velocity_update=cfg.velocity_update,
    )
