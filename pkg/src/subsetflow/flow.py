"""Gradient flow of the pairwise-distance energy and the retraction it induces.

Every point moves with velocity ``sum_j (u_j - u_i) / |u_j - u_i|``: the
steepest descent of ``Phi(u) = sum_{i<j} |u_i - u_j|``. The flow runs until
two points collide; the set of points at that moment has at most ``n - 1``
elements and is the image of the retraction.

The integrator is classical RK4 with step ``h = theta * delta(u) / (2(n-1))``.
No pair distance changes faster than ``2(n-1)``, so even the intermediate
stages stay off the diagonal. Integration stops once the separation has
shrunk to ``collision_tol`` times its starting value (or to a small multiple
of the coordinate resolution, whichever is larger); the exact flow needs
at most ``delta(u_stop) / 2`` more time, during which no point moves more
than ``(n - 1) * delta(u_stop) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .subset_space import FiniteSubset, as_config, canonicalize, hausdorff_distance, pairwise_distances


class SingularConfigError(ValueError):
    """The velocity field is undefined because two points coincide."""


class DivergenceError(RuntimeError):
    """The integrator exceeded its step budget without reaching a collision."""


@dataclass(frozen=True)
class FlowParams:
    """Discretization controls for :func:`integrate_to_collision`.

    Parameters
    ----------
    step_safety : float
        Fraction ``theta`` of the largest diagonal-safe step, in (0, 1).
    collision_tol : float
        Stop once ``delta(u) <= collision_tol * delta(x)``.
    max_steps : int
        Step budget; exceeding it raises :class:`DivergenceError`.
    """

    step_safety: float = 0.1
    collision_tol: float = 1e-9
    max_steps: int = 10**6

    def __post_init__(self):
        if not 0.0 < self.step_safety < 1.0:
            raise ValueError("step_safety must lie in (0, 1)")
        if not self.collision_tol > 0.0:
            raise ValueError("collision_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class FlowState:
    t: float
    u: np.ndarray
    sep: float


@dataclass(frozen=True)
class FlowTrace:
    """Recorded trajectory up to the stopping time.

    ``T_bracket`` encloses the true collision time: the flow is still alive
    at ``t_stop`` and, applied from the stopped state, the collision-time
    upper bound adds at most ``sep_stop / 2``. The upper end also carries
    the rounding accumulated over ``steps`` additions to the clock.
    """

    states: list[FlowState]
    steps: int

    @property
    def t_stop(self) -> float:
        return self.states[-1].t

    @property
    def sep_stop(self) -> float:
        return self.states[-1].sep

    @property
    def T_bracket(self) -> tuple[float, float]:
        return _bracket(self.t_stop, self.sep_stop, self.steps)

    @property
    def T_estimate(self) -> float:
        return self.t_stop + self.sep_stop / 2.0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def positions(self) -> np.ndarray:
        """``(steps + 1, n, d)`` array of recorded configurations."""
        return np.stack([s.u for s in self.states])


@dataclass(frozen=True)
class RetractionResult:
    output: FiniteSubset
    T_estimate: float = 0.0
    displacement_bound: float = 0.0
    steps: int = 0
    T_bracket: tuple[float, float] = field(default=(0.0, 0.0))


def _bracket(t_stop: float, sep_stop: float, steps: int) -> tuple[float, float]:
    hi = t_stop + sep_stop / 2.0
    return (float(t_stop), float(hi + (steps + 1) * np.finfo(float).eps * hi))


def phi(x) -> float:
    """Sum of all pairwise distances."""
    x = as_config(x)
    if x.shape[0] < 2:
        raise ValueError("phi needs at least two points")
    dist = pairwise_distances(x)
    return float(dist[np.triu_indices(x.shape[0], k=1)].sum())


def _velocity(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flow velocity and separation for a stack of configs ``(..., n, d)``."""
    n = u.shape[-2]
    diff = u[..., None, :, :] - u[..., :, None, :]  # [i, j] = u_j - u_i
    dist = np.sqrt(np.einsum("...k,...k->...", diff, diff))
    idx = np.arange(n)
    dist[..., idx, idx] = np.inf
    sep = dist.min(axis=(-2, -1))
    if np.any(sep == 0.0):
        raise SingularConfigError("two points coincide; the flow velocity is undefined")
    vel = np.einsum("...ijk,...ij->...ik", diff, 1.0 / dist)
    return vel, sep


def flow_velocity(u) -> np.ndarray:
    """Velocity ``sum_{j != i} (u_j - u_i) / |u_j - u_i|`` of every point."""
    u = as_config(u)
    if u.shape[0] < 2:
        raise ValueError("flow needs at least two points")
    return _velocity(u)[0]


def grad_phi(x) -> np.ndarray:
    """Gradient of :func:`phi`; the negated flow velocity."""
    return -flow_velocity(x)


def integrate_batch(x, params: FlowParams | None = None, t_max=None, observer=None):
    """Run the stopped flow on a stack of configurations at once.

    Parameters
    ----------
    x : array_like, shape (B, m, n, d)
        ``B`` independent groups of ``m`` configurations. Members of a group
        share every time step (the step is set by the smallest separation in
        the group) and the group stops as soon as any member reaches its
        collision threshold.
    params : FlowParams, optional
    t_max : array_like, shape (B,), optional
        Per-group time horizon; the final step is shortened to land on it.
    observer : callable, optional
        Called as ``observer(idx, t, u, sep)`` after every step with the
        indices of the groups that moved and their new state.

    Returns
    -------
    u, t, sep, steps
        Final configurations ``(B, m, n, d)``, stop times ``(B,)``, final
        separations ``(B, m)`` and step counts ``(B,)``.
    """
    params = params or FlowParams()
    u = np.array(x, dtype=float)
    if u.ndim != 4:
        raise ValueError("expected a (B, m, n, d) array")
    B, _, n, _ = u.shape
    if n < 2:
        raise ValueError("flow needs at least two points")
    vel, sep = _velocity(u)
    level = stop_level(u, params)
    t = np.zeros(B)
    steps = np.zeros(B, dtype=np.int64)
    horizon = None if t_max is None else np.broadcast_to(np.asarray(t_max, dtype=float), (B,))
    active = ~np.any(sep <= level, axis=1)
    if horizon is not None:
        active &= t < horizon
    scale = params.step_safety / (2.0 * (n - 1))
    while active.any():
        idx = np.flatnonzero(active)
        if steps[idx].max() >= params.max_steps:
            raise DivergenceError(f"no collision after {params.max_steps} steps")
        h = scale * sep[idx].min(axis=1)
        clipped = np.zeros(len(idx), dtype=bool)
        if horizon is not None:
            remaining = horizon[idx] - t[idx]
            clipped = remaining <= h
            h = np.where(clipped, remaining, h)
        hb = h[:, None, None, None]
        ua = u[idx]
        k1 = vel[idx]
        k2, _ = _velocity(ua + 0.5 * hb * k1)
        k3, _ = _velocity(ua + 0.5 * hb * k2)
        k4, _ = _velocity(ua + hb * k3)
        ua = ua + (hb / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        va, sa = _velocity(ua)
        u[idx] = ua
        vel[idx] = va
        sep[idx] = sa
        t[idx] = np.where(clipped, horizon[idx] if horizon is not None else 0.0, t[idx] + h)
        steps[idx] += 1
        if observer is not None:
            observer(idx, t[idx], ua, sa)
        done = np.any(sa <= level[idx], axis=1) | clipped
        active[idx[done]] = False
    return u, t, sep, steps


RESOLUTION_ULPS = 1024


def stop_level(x, params: FlowParams) -> np.ndarray:
    """Separation at which the flow from ``x`` (``(..., n, d)``) is stopped.

    Distances far below the spacing of floats near the coordinates cannot be
    resolved, so the relative threshold is floored at ``RESOLUTION_ULPS``
    ulps of the largest coordinate magnitude.
    """
    x = np.asarray(x, dtype=float)
    _, sep = _velocity(x)
    floor = RESOLUTION_ULPS * np.finfo(float).eps * np.abs(x).max(axis=(-2, -1))
    return np.maximum(params.collision_tol * sep, floor)


def _offdiagonal_config(x) -> np.ndarray:
    x = as_config(x)
    if x.shape[0] < 2:
        raise ValueError("flow needs at least two points")
    if np.any(pairwise_distances(x)[np.triu_indices(x.shape[0], k=1)] == 0.0):
        raise SingularConfigError("initial configuration lies on the diagonal")
    return x


def integrate_to_collision(x, params: FlowParams | None = None, t_max: float | None = None) -> FlowTrace:
    """Integrate the flow from ``x`` and record every step.

    With ``t_max`` the run also ends at that time if no collision occurs first.
    """
    x = _offdiagonal_config(x)
    sep0 = float(_velocity(x)[1])
    states = [FlowState(0.0, x.copy(), sep0)]

    def record(idx, t, u, sep):
        states.append(FlowState(float(t[0]), u[0, 0].copy(), float(sep[0, 0])))

    _, _, _, steps = integrate_batch(
        x[None, None], params, t_max=None if t_max is None else [t_max], observer=record
    )
    return FlowTrace(states=states, steps=int(steps[0]))


def _package(stopped: np.ndarray, t_stop: float, sep_stop: float, level: float,
             steps: int) -> RetractionResult:
    n = stopped.shape[0]
    out = canonicalize(stopped, 3.0 * level)
    bound = (n - 1) * sep_stop / 2.0 + hausdorff_distance(out, stopped)
    return RetractionResult(
        output=out,
        T_estimate=t_stop + sep_stop / 2.0,
        displacement_bound=bound,
        steps=steps,
        T_bracket=_bracket(t_stop, sep_stop, steps),
    )


def retract_once(A, params: FlowParams | None = None, n: int | None = None) -> RetractionResult:
    """Apply the retraction H(n) -> H(n-1) to the set ``A``.

    ``n`` defaults to ``len(A)``. Sets with fewer than ``n`` points are
    returned as the very same object; otherwise the flow is run from the
    points of ``A`` in stored order and the stopped configuration is merged
    at three times the stop level, ``3 * collision_tol * delta(A)`` unless
    that falls below the resolution floor of :func:`stop_level`.
    """
    params = params or FlowParams()
    if not isinstance(A, FiniteSubset):
        A = FiniteSubset(A)
    if n is None:
        n = len(A)
    if n < 2:
        raise ValueError("retraction needs n >= 2")
    if len(A) > n:
        raise ValueError(f"set has {len(A)} points, more than n = {n}")
    if len(A) <= n - 1:
        return RetractionResult(output=A)
    x = A.points
    u, t, sep, steps = integrate_batch(x[None, None], params)
    level = float(stop_level(x, params))
    return _package(u[0, 0], float(t[0]), float(sep[0, 0]), level, int(steps[0]))


def retract_configs(x, params: FlowParams | None = None) -> list[RetractionResult]:
    """Vectorized :func:`retract_once` for a stack ``(B, n, d)`` of off-diagonal configs."""
    params = params or FlowParams()
    x = np.asarray(x, dtype=float)
    level = stop_level(x, params)
    u, t, sep, steps = integrate_batch(x[:, None], params)
    return [
        _package(u[b, 0], float(t[b]), float(sep[b, 0]), float(level[b]), int(steps[b]))
        for b in range(len(x))
    ]


def retraction_stages(A, k: int, params: FlowParams | None = None) -> list[RetractionResult]:
    """Results of the successive retractions taking ``A`` down to at most ``k`` points."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not isinstance(A, FiniteSubset):
        A = FiniteSubset(A)
    stages = []
    while len(A) > k:
        res = retract_once(A, params, n=len(A))
        stages.append(res)
        A = res.output
    return stages


def retract_chain(A, k: int, params: FlowParams | None = None) -> FiniteSubset:
    """Compose retractions until at most ``k`` points remain."""
    if not isinstance(A, FiniteSubset):
        A = FiniteSubset(A)
    stages = retraction_stages(A, k, params)
    return stages[-1].output if stages else A
