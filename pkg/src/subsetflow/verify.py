"""Numerical certification of the retraction's estimates.

Each ``check_*`` function returns a :class:`CheckReport`. A report passes
exactly when ``observed <= bound * (1 + tolerance)``, so the flag can always
be recomputed from the numbers it carries. Randomness comes from one master
seed; trial ``k`` of check stream ``s`` draws from the substream
``SeedSequence(seed, spawn_key=(s, k))``, so any trial is reproducible on
its own.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .flow import (
    FlowParams,
    _package,
    _velocity,
    flow_velocity,
    grad_phi,
    integrate_batch,
    phi,
    retract_configs,
    retract_once,
    stop_level,
)
from .subset_space import (
    FiniteSubset,
    NoCertifiedMatching,
    as_config,
    canonicalize,
    hausdorff_distance,
    lipschitz_bound,
    match_labels,
    separation,
)

GRADIENT_TOL = 1e-6
MONOTONE_TOL = 1e-12
CONTRACTION_TOL = 1e-9
LIPSCHITZ_TOL = 1e-2
MIN_RHO = 1e-9

# substream ids, one per sampled check
_STREAMS = {
    "gradient": 1,
    "gradient_bound": 2,
    "speed_bound": 3,
    "monotone_map": 4,
    "convexity": 5,
    "contraction": 6,
    "lipschitz": 7,
    "case2": 8,
    "collision_bracket": 9,
    "displacement": 10,
    "closest_pair_slope": 11,
    "hausdorff_triangle": 12,
    "separation_lipschitz": 13,
    "identity_lower": 14,
    "canonicalize_idempotent": 15,
    "enumeration_invariance": 16,
}


@dataclass(frozen=True)
class SampleSpec:
    """Draws ``trials`` random configurations of ``n`` points in ``[-scale, scale]^d``."""

    n: int = 3
    d: int = 2
    trials: int = 1000
    seed: int = 42
    scale: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class CheckReport:
    name: str
    observed: float
    bound: float
    tolerance: float
    trials_run: int
    witness: dict = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = bool(self.observed <= self.bound * (1.0 + self.tolerance))
        object.__setattr__(self, "passed", ok)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["witness"] = _jsonable(self.witness)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------- sampling

def trial_rng(seed: int, stream: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial of one check."""
    ss = np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(stream, trial))
    return np.random.default_rng(ss)


def _rngs(spec: SampleSpec, stream: str):
    sid = _STREAMS[stream]
    return (trial_rng(spec.seed, sid, k) for k in range(spec.trials))


def draw_config(rng: np.random.Generator, n: int, d: int, scale: float = 1.0,
                min_sep: float = 0.0) -> np.ndarray:
    """Uniform points in ``[-scale, scale]^d``, redrawn until the separation exceeds ``min_sep``."""
    while True:
        x = rng.uniform(-scale, scale, size=(n, d))
        if n < 2 or separation(x) > min_sep:
            return x


def _perturb(rng, x, size):
    """Move every point of ``x`` by a random vector of norm at most ``size``."""
    n, d = x.shape
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return x + dirs * (size * rng.uniform(0.0, 1.0, size=(n, 1)))


def draw_pair(rng, n, d, scale, regime: int) -> tuple[np.ndarray, np.ndarray]:
    """Random pair of ``n``-point configurations.

    Regimes: 0 independent draws; 1 ``y`` a small perturbation of ``x``
    (mostly Case 2); 2 both sets nearly collapsed onto a near-common base,
    with separations far below their Hausdorff distance (Case 1).
    """
    if regime == 0:
        return draw_config(rng, n, d, scale), draw_config(rng, n, d, scale)
    if regime == 1:
        x = draw_config(rng, n, d, scale)
        eta = 10.0 ** rng.uniform(-3.0, math.log10(0.2))
        while True:
            y = _perturb(rng, x, eta * separation(x))
            if separation(y) > 0:
                return x, y
    base = draw_config(rng, n, d, scale)
    shifted = _perturb(rng, base, 10.0 ** rng.uniform(-2.0, -0.5) * scale)

    def collapse(p):
        p = p.copy()
        i, j = rng.choice(n, size=2, replace=False)
        tiny = 10.0 ** rng.uniform(-7.0, -3.0) * scale
        step = rng.standard_normal(d)
        p[j] = p[i] + tiny * step / np.linalg.norm(step)
        return p

    while True:
        x, y = collapse(base), collapse(shifted)
        if separation(x) > 0 and separation(y) > 0:
            return x, y


# ---------------------------------------------------------------- energy

def gradient_error(x, rel_step: float = 1e-6) -> float:
    """Relative error of :func:`grad_phi` against central differences of :func:`phi`."""
    x = as_config(x)
    h = rel_step * separation(x)
    g = grad_phi(x)
    fd = np.empty_like(x)
    for idx in np.ndindex(*x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        fd[idx] = (phi(xp) - phi(xm)) / (2 * h)
    return float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.finfo(float).tiny))


def check_gradient(spec: SampleSpec) -> CheckReport:
    worst, witness = 0.0, None
    for rng in _rngs(spec, "gradient"):
        x = draw_config(rng, spec.n, spec.d, spec.scale, min_sep=0.1 * spec.scale)
        err = gradient_error(x)
        if witness is None or err > worst:
            worst, witness = err, x
    return CheckReport("gradient", worst, GRADIENT_TOL, 0.0, spec.trials, {"x": witness})


def _sample_stack(spec: SampleSpec, stream: str) -> np.ndarray:
    return np.stack([draw_config(rng, spec.n, spec.d, spec.scale) for rng in _rngs(spec, stream)])


def check_gradient_bound(spec: SampleSpec) -> CheckReport:
    """Norm of the full gradient never exceeds ``(n-1) sqrt(n)``."""
    X = _sample_stack(spec, "gradient_bound")
    vel, _ = _velocity(X)
    norms = np.sqrt(np.einsum("bik,bik->b", vel, vel))
    k = int(norms.argmax())
    n = spec.n
    return CheckReport("gradient_bound", float(norms[k]), (n - 1) * math.sqrt(n), 1e-12,
                       spec.trials, {"x": X[k]})


def check_speed_bound(spec: SampleSpec) -> CheckReport:
    """Every point moves with speed at most ``n - 1``."""
    X = _sample_stack(spec, "speed_bound")
    vel, _ = _velocity(X)
    speeds = np.linalg.norm(vel, axis=-1).max(axis=1)
    k = int(speeds.argmax())
    return CheckReport("speed_bound", float(speeds[k]), spec.n - 1.0, 1e-12, spec.trials, {"x": X[k]})


def unit(a: np.ndarray) -> np.ndarray:
    """The monotone map ``a -> a / |a|``, gradient of the norm."""
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def check_monotone_map(spec: SampleSpec) -> CheckReport:
    """Monotonicity of ``a / |a|`` and the identity for the colliding pair's own term.

    ``observed`` is the larger of the worst negative part of
    ``<F(a) - F(b), a - b>`` and the worst relative defect of
    ``<F(u2 - u1) - F(u1 - u2), u1 - u2> = -2 |u1 - u2|``.
    """
    worst, witness = 0.0, {}
    for rng in _rngs(spec, "monotone_map"):
        a, b, u1, u2 = (rng.uniform(-spec.scale, spec.scale, spec.d) for _ in range(4))
        if not (np.any(a) and np.any(b) and np.any(u1 - u2)):
            continue
        mono = float(np.dot(unit(a) - unit(b), a - b))
        w = u1 - u2
        lhs = float(np.dot(unit(u2 - u1) - unit(u1 - u2), w))
        ident = abs(lhs + 2 * np.linalg.norm(w)) / (2 * np.linalg.norm(w))
        val = max(-mono, ident)
        if val > worst or not witness:
            worst, witness = val, {"a": a, "b": b, "u1": u1, "u2": u2}
    return CheckReport("monotone_map", max(worst, 0.0), MONOTONE_TOL, 0.0, spec.trials, witness)


def check_convexity(spec: SampleSpec) -> CheckReport:
    """Midpoint convexity of the energy, with 1e-12 absolute slack."""
    worst, witness = -math.inf, {}
    for rng in _rngs(spec, "convexity"):
        x = rng.uniform(-spec.scale, spec.scale, (spec.n, spec.d))
        y = rng.uniform(-spec.scale, spec.scale, (spec.n, spec.d))
        gap = phi((x + y) / 2) - (phi(x) + phi(y)) / 2
        if gap > worst:
            worst, witness = gap, {"x": x, "y": y}
    return CheckReport("convexity", max(worst, 0.0), 1e-12, 0.0, spec.trials, witness)


# ---------------------------------------------------------------- synchronized flows

def _as_stack(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError("expected a config (n, d) or a stack (B, n, d)")
    return arr


def synchronized_flow_stats(x, y, params: FlowParams | None = None):
    """Run paired flows on a common time grid.

    Returns per-pair maxima of (a) the relative one-step increase of
    ``sum_i |u_i - v_i|^2`` and (b) the ratio
    ``d_H({u_i}, {v_i}) / (sqrt(n) max_i |x_i - y_i|)`` over all recorded times.
    """
    X, Y = _as_stack(x), _as_stack(y)
    if X.shape != Y.shape:
        raise ValueError("paired configurations must have equal shapes")
    B, n, _ = X.shape
    S = np.einsum("bik,bik->b", X - Y, X - Y)
    m0 = np.linalg.norm(X - Y, axis=-1).max(axis=1)
    increase = np.zeros(B)
    stab = np.zeros(B)

    def ratio(num, den):
        out = np.zeros_like(num)
        pos = den > 0
        out[pos] = num[pos] / den[pos]
        out[~pos & (num > 0)] = np.inf
        return out

    def hausdorff_stack(U, V):
        diff = U[:, :, None, :] - V[:, None, :, :]
        dist = np.sqrt(np.einsum("bijk,bijk->bij", diff, diff))
        return np.maximum(dist.min(axis=2).max(axis=1), dist.min(axis=1).max(axis=1))

    def observe(idx, t, u, sep):
        U, V = u[:, 0], u[:, 1]
        s_new = np.einsum("bik,bik->b", U - V, U - V)
        inc = ratio(s_new - S[idx], S[idx])
        increase[idx] = np.maximum(increase[idx], inc)
        S[idx] = s_new
        stab[idx] = np.maximum(stab[idx], ratio(hausdorff_stack(U, V), math.sqrt(n) * m0[idx]))

    stab = np.maximum(stab, ratio(hausdorff_stack(X, Y), math.sqrt(n) * m0))
    integrate_batch(np.stack([X, Y], axis=1), params, observer=observe)
    return increase, stab


def check_contraction(x, y, params: FlowParams | None = None) -> CheckReport:
    """``sum_i |u_i(t) - v_i(t)|^2`` is nonincreasing along paired flows.

    ``x`` and ``y`` are matched configurations ``(n, d)`` or stacks ``(B, n, d)``.
    """
    X, Y = _as_stack(x), _as_stack(y)
    increase, _ = synchronized_flow_stats(X, Y, params)
    k = int(increase.argmax())
    return CheckReport("contraction", float(increase[k]), CONTRACTION_TOL, 0.0, len(X),
                       {"x": X[k], "y": Y[k]})


def check_stability_H(x, y, params: FlowParams | None = None) -> CheckReport:
    """``d_H({u_i}, {v_i}) <= sqrt(n) max_i |x_i - y_i|`` at every synchronized time."""
    X, Y = _as_stack(x), _as_stack(y)
    _, stab = synchronized_flow_stats(X, Y, params)
    k = int(stab.argmax())
    return CheckReport("stability_H", float(stab[k]), 1.0, CONTRACTION_TOL, len(X),
                       {"x": X[k], "y": Y[k]})


def sample_flow_pairs(spec: SampleSpec, stream: str = "contraction") -> tuple[np.ndarray, np.ndarray]:
    """Matched pairs for the synchronized checks: perturbations and independent draws."""
    xs, ys = [], []
    for k, rng in enumerate(_rngs(spec, stream)):
        x, y = draw_pair(rng, spec.n, spec.d, spec.scale, regime=1 if k % 2 == 0 else 0)
        xs.append(x)
        ys.append(y)
    return np.stack(xs), np.stack(ys)


# ---------------------------------------------------------------- Lipschitz bound

def check_lipschitz(spec: SampleSpec, params: FlowParams | None = None,
                    tolerance: float = LIPSCHITZ_TOL) -> CheckReport:
    """Worst observed ``d_H(r(x), r(y)) / d_H(x, y)`` against ``lipschitz_bound(n)``.

    Trials cycle through the three regimes of :func:`draw_pair`; pairs with
    ``d_H(x, y) <= 1e-9`` are skipped.
    """
    n = spec.n
    xs, ys = [], []
    for k, rng in enumerate(_rngs(spec, "lipschitz")):
        x, y = draw_pair(rng, n, spec.d, spec.scale, regime=k % 3)
        xs.append(x)
        ys.append(y)
    X, Y = np.stack(xs), np.stack(ys)
    results = retract_configs(np.concatenate([X, Y]), params)
    rx, ry = results[: len(X)], results[len(X):]
    worst, wk, used = 0.0, 0, 0
    case1 = case2 = 0
    for k in range(len(X)):
        rho = hausdorff_distance(X[k], Y[k])
        if rho <= MIN_RHO:
            continue
        used += 1
        if separation(X[k]) + separation(Y[k]) <= 4 * rho:
            case1 += 1
        else:
            case2 += 1
        val = hausdorff_distance(rx[k].output, ry[k].output) / rho
        if val > worst:
            worst, wk = val, k
    witness = {
        "x": X[wk], "y": Y[wk],
        "case1_trials": case1, "case2_trials": case2,
        "n": n, "d": spec.d,
    }
    return CheckReport("lipschitz", worst, lipschitz_bound(n), tolerance, used, witness)


# ---------------------------------------------------------------- Case 2 certificate

def _match_pair(x, y):
    """Orient and relabel ``(x, y)`` so that ``|x_i - y_i| <= rho``; ``None`` for Case 1."""
    for a, b in ((x, y), (y, x)):
        try:
            m = match_labels(a, b)
        except NoCertifiedMatching:
            continue
        return a, b[list(m.permutation)]
    return None


def case2_ratios(x, y, params: FlowParams | None = None) -> np.ndarray:
    """Normalized slack of the four inequalities in the Case 2 argument.

    For each pair, relabelled so that ``|x_i - y_i| <= rho`` and oriented so
    that ``T(x) <= T(y)``, with ``z = {v_i(T(x))}``:

    * ``d_H(r(x), z)      <= sqrt(n) rho``
    * ``delta(z)          <= 2 sqrt(n) rho``
    * ``d_H(r(z), z)      <= (n-1) sqrt(n) rho``
    * ``d_H(r(x), r(y))   <= n^(3/2) rho``

    Each entry is ``max(lhs - err, 0) / rhs`` where ``err`` bounds the
    truncation of the stopped flows. Returns a ``(B, 4)`` array whose rows
    are NaN for pairs without a certified matching (Case 1).
    """
    params = params or FlowParams()
    X, Y = _as_stack(x), _as_stack(y)
    out = np.full((len(X), 4), np.nan)
    keep, xs, ys = [], [], []
    for k in range(len(X)):
        matched = _match_pair(X[k], Y[k])
        if matched is not None:
            keep.append(k)
            xs.append(matched[0])
            ys.append(matched[1])
    if not keep:
        return out
    xs, ys = np.stack(xs), np.stack(ys)
    m, n, _ = xs.shape
    both = np.concatenate([xs, ys])
    levels = stop_level(both, params)
    u, t, sep, steps = integrate_batch(both[:, None], params)
    res = [_package(u[b, 0], t[b], sep[b, 0], levels[b], int(steps[b])) for b in range(2 * m)]
    rx, ry = res[:m], res[m:]
    tx, ty = t[:m].copy(), t[m:].copy()
    sx, sy = sep[:m, 0], sep[m:, 0]
    swap = np.array([a.T_estimate > b.T_estimate for a, b in zip(rx, ry)])
    for k in np.flatnonzero(swap):
        xs[k], ys[k] = ys[k].copy(), xs[k].copy()
        rx[k], ry[k] = ry[k], rx[k]
        tx[k], ty[k] = ty[k], tx[k]
    zu, _, _, _ = integrate_batch(ys[:, None], params, t_max=tx)
    Z = zu[:, 0]
    rz = retract_configs(Z, params)
    rn = math.sqrt(n)
    for k, row in enumerate(keep):
        rho = hausdorff_distance(xs[k], ys[k])
        err = ((n - 1) * (sx[k] + sy[k]) + rx[k].displacement_bound
               + ry[k].displacement_bound + rz[k].displacement_bound)
        pairs = [
            (hausdorff_distance(rx[k].output, Z[k]), rn * rho),
            (separation(Z[k]), 2 * rn * rho),
            (hausdorff_distance(rz[k].output, Z[k]), (n - 1) * rn * rho),
            (hausdorff_distance(rx[k].output, ry[k].output), n * rn * rho),
        ]
        for i, (lhs, rhs) in enumerate(pairs):
            excess = max(lhs - err, 0.0)
            out[row, i] = excess / rhs if rhs > 0 else (0.0 if excess == 0 else math.inf)
    return out


def check_case2_certificate(x, y, params: FlowParams | None = None,
                            tolerance: float = LIPSCHITZ_TOL) -> CheckReport:
    """Certify the chain of estimates behind the Lipschitz bound in Case 2.

    ``x``, ``y`` are single configurations or stacks. Pairs that admit no
    certified matching are Case 1 instances: counted, never failures.
    """
    X, Y = _as_stack(x), _as_stack(y)
    ratios = case2_ratios(X, Y, params)
    case1 = np.isnan(ratios[:, 0])
    worst_per_pair = np.where(case1, -np.inf, np.nan_to_num(ratios, nan=0.0).max(axis=1))
    wk = int(worst_per_pair.argmax())
    worst = 0.0 if case1.all() else float(worst_per_pair[wk])
    witness = {"x": X[wk], "y": Y[wk], "case1_instances": int(case1.sum()),
               "ratios": [] if case1.all() else ratios[wk]}
    return CheckReport("case2_certificate", worst, 1.0, tolerance, len(X), witness)


def sample_case2_pairs(spec: SampleSpec) -> tuple[np.ndarray, np.ndarray]:
    xs, ys = [], []
    for rng in _rngs(spec, "case2"):
        x, y = draw_pair(rng, spec.n, spec.d, spec.scale, regime=1)
        xs.append(x)
        ys.append(y)
    return np.stack(xs), np.stack(ys)


# ---------------------------------------------------------------- counterexample

TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])


def _forced_images(grid: np.ndarray, pa, pb, slack: float) -> list[FiniteSubset]:
    """All grid sets E, |E| <= 2, within ``1 + slack`` of both extension pairs of side ``pa pb``."""
    B = np.array([2 * pa - pb, pa])
    C = np.array([pb, 2 * pb - pa])
    reach = 1.0 + slack
    dB = np.linalg.norm(grid[:, None, :] - B[None], axis=-1)
    dC = np.linalg.norm(grid[:, None, :] - C[None], axis=-1)
    feasible = (dB.min(axis=1) <= reach) & (dC.min(axis=1) <= reach)
    P = grid[feasible]
    cover = np.concatenate([dB[feasible], dC[feasible]], axis=1) <= reach  # targets b_out, b_in, c_in, c_out
    found = [FiniteSubset(P[i:i + 1]) for i in np.flatnonzero(cover.all(axis=1))]
    outer_b = np.flatnonzero(cover[:, 0])
    outer_c = np.flatnonzero(cover[:, 3])
    for i in outer_b:
        partners = outer_c if not cover[i, 3] else np.arange(len(P))
        both = cover[i][None, :] | cover[partners]
        for j in partners[both.all(axis=1)]:
            if j != i:
                found.append(FiniteSubset(P[[i, j]]))
    return found


def check_counterexample(grid_step: float = 0.01, slack: float | None = None) -> CheckReport:
    """No 1-Lipschitz retraction from planar 3-point sets to 2-point sets.

    For the unit equilateral triangle ``A`` and each side, the two pairs on
    the line through that side (one shifted by a side length each way) are
    at Hausdorff distance 1 from ``A`` and 2 from each other, so a
    1-Lipschitz retraction would have to send ``A`` to a set within 1 of
    both. A grid search over ``[-2, 3]^2`` (carried to each side by the
    rotation of the triangle) finds every such grid set up to ``slack`` and
    confirms it lies near that side's endpoints. The three forced images
    are far apart, which is the contradiction.

    ``slack`` defaults to ``grid_step**2``; the grid contains the exact
    solutions and a relaxation ``s`` admits sets up to about ``sqrt(2 s)``
    from them.
    """
    if not 0 < grid_step <= 0.05:
        raise ValueError("grid_step must lie in (0, 0.05]")
    if slack is None:
        slack = grid_step ** 2
    A = TRIANGLE
    ticks = np.arange(-round(2.0 / grid_step), round(3.0 / grid_step) + 1) * grid_step
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    base_grid = np.column_stack([gx.ravel(), gy.ravel()])
    center = A.mean(axis=0)
    c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
    rot = np.array([[c, -s], [s, c]])

    dist_err = 0.0
    radius = 0.0
    images = []
    counts = []
    for side in range(3):
        pa, pb = A[side], A[(side + 1) % 3]
        B = np.array([2 * pa - pb, pa])
        C = np.array([pb, 2 * pb - pa])
        dist_err = max(dist_err,
                       abs(hausdorff_distance(A, B) - 1.0),
                       abs(hausdorff_distance(A, C) - 1.0),
                       abs(hausdorff_distance(B, C) - 2.0))
        grid = base_grid
        for _ in range(side):
            grid = (grid - center) @ rot.T + center
        target = FiniteSubset(np.array([pa, pb]))
        found = _forced_images(grid, pa, pb, slack)
        counts.append(len(found))
        images.append(target)
        for E in found:
            radius = max(radius, hausdorff_distance(E, target))
    bound = 5.0 * grid_step
    gaps = [hausdorff_distance(images[i], images[j]) for i in range(3) for j in range(i + 1, 3)]
    distinct = min(gaps) > 2 * max(radius, bound)
    observed = radius
    if dist_err > 1e-12 or not distinct or min(counts) == 0:
        observed = math.inf
    witness = {
        "distance_error": dist_err,
        "candidates_per_side": counts,
        "forced_images": [E.tolist() for E in images],
        "min_gap_between_images": min(gaps),
        "slack": slack,
        "grid_step": grid_step,
    }
    return CheckReport("counterexample", observed, bound, 0.0, sum(counts), witness)


# ---------------------------------------------------------------- flow invariants

def check_collision_bracket(spec: SampleSpec, params: FlowParams | None = None) -> CheckReport:
    """The recorded bracket meets ``[delta / (2(n-1)), delta / 2]`` in every trial.

    ``observed`` is the largest gap between the two intervals relative to
    ``delta``; zero or negative means they intersect.
    """
    n = spec.n
    X = _sample_stack(spec, "collision_bracket")
    res = retract_configs(X, params)
    worst, wk = -math.inf, 0
    for k, r in enumerate(res):
        delta = separation(X[k])
        lo, hi = r.T_bracket
        gap = max(lo - delta / 2, delta / (2 * (n - 1)) - hi) / delta
        if gap > worst:
            worst, wk = gap, k
    return CheckReport("collision_bracket", max(worst, 0.0), 0.0, 0.0, spec.trials,
                       {"x": X[wk], "T_bracket": res[wk].T_bracket})


def check_displacement(spec: SampleSpec, params: FlowParams | None = None) -> CheckReport:
    """``d_H(r(x), x) <= (n - 1) delta(x) / 2``, reported as the worst ratio."""
    n = spec.n
    X = _sample_stack(spec, "displacement")
    res = retract_configs(X, params)
    ratios = np.array([
        hausdorff_distance(r.output, X[k]) / ((n - 1) * separation(X[k]) / 2)
        for k, r in enumerate(res)
    ])
    k = int(ratios.argmax())
    return CheckReport("displacement", float(ratios[k]), 1.0, 1e-6, spec.trials, {"x": X[k]})


def closest_pair_slopes(x, params: FlowParams | None = None) -> np.ndarray:
    """Discrete slopes of the initially closest pair distance, minus the roundoff allowance.

    A slope difference between consecutive states carries floating-point
    error up to about ``8 eps max|u| / h``; that allowance is subtracted so
    the values can be compared against ``-2`` directly.
    """
    from .flow import integrate_to_collision

    trace = integrate_to_collision(x, params)
    P = trace.positions
    dist = np.linalg.norm(P[0][:, None] - P[0][None], axis=-1)
    dist[np.diag_indices(len(dist))] = np.inf
    i, j = np.unravel_index(dist.argmin(), dist.shape)
    phi_t = np.linalg.norm(P[:, i] - P[:, j], axis=-1)
    dt = np.diff(trace.times)
    allowance = 8 * np.finfo(float).eps * np.abs(P).max() / dt
    return np.diff(phi_t) / dt - allowance


def check_closest_pair_slope(spec: SampleSpec, params: FlowParams | None = None) -> CheckReport:
    """The initially closest pair approaches at rate at least 2."""
    worst, witness = -math.inf, None
    for rng in _rngs(spec, "closest_pair_slope"):
        x = draw_config(rng, spec.n, spec.d, spec.scale)
        val = float(closest_pair_slopes(x, params).max()) + 2.0
        if val > worst:
            worst, witness = val, x
    return CheckReport("closest_pair_slope", max(worst, 0.0), 1e-6, 0.0, spec.trials, {"x": witness})


def check_enumeration_invariance(spec: SampleSpec, params: FlowParams | None = None) -> CheckReport:
    """Relabelling the input points leaves the retracted set unchanged up to 1e-12."""
    Xs, Ps = [], []
    for rng in _rngs(spec, "enumeration_invariance"):
        x = draw_config(rng, spec.n, spec.d, spec.scale)
        Xs.append(x)
        Ps.append(x[rng.permutation(spec.n)])
    res = retract_configs(np.stack(Xs + Ps), params)
    m = len(Xs)
    worst, wk = 0.0, 0
    for k in range(m):
        a, b = res[k].output.points, res[m + k].output.points
        val = math.inf if a.shape != b.shape else float(np.abs(a - b).max())
        if val > worst:
            worst, wk = val, k
    return CheckReport("enumeration_invariance", worst, 1e-12, 0.0, m, {"x": Xs[wk], "permuted": Ps[wk]})


def check_identity_lower(spec: SampleSpec, params: FlowParams | None = None) -> CheckReport:
    """Sets with at most ``n - 1`` points come back bit-identical."""
    failures, witness = 0, {}
    for rng in _rngs(spec, "identity_lower"):
        m = int(rng.integers(1, spec.n))
        A = FiniteSubset(rng.uniform(-spec.scale, spec.scale, (m, spec.d)))
        out = retract_once(A, params, n=spec.n).output
        if not (out.points.shape == A.points.shape and out.points.tobytes() == A.points.tobytes()):
            failures += 1
            witness = {"A": A.points}
    return CheckReport("identity_lower", float(failures), 0.0, 0.0, spec.trials, witness)


def check_hausdorff_triangle(spec: SampleSpec) -> CheckReport:
    """Triangle inequality and symmetry of the Hausdorff distance on random sets."""
    worst, witness = -math.inf, {}
    for rng in _rngs(spec, "hausdorff_triangle"):
        A, B, C = (rng.uniform(-spec.scale, spec.scale, (int(rng.integers(1, spec.n + 1)), spec.d))
                   for _ in range(3))
        ab, bc, ac = hausdorff_distance(A, B), hausdorff_distance(B, C), hausdorff_distance(A, C)
        excess = (ac - (ab + bc)) / max(ab + bc, np.finfo(float).tiny)
        if ab != hausdorff_distance(B, A):
            excess = math.inf
        if excess > worst:
            worst, witness = excess, {"A": A, "B": B, "C": C}
    return CheckReport("hausdorff_triangle", max(worst, 0.0), 1e-12, 0.0, spec.trials, witness)


def check_separation_lipschitz(spec: SampleSpec) -> CheckReport:
    """``|delta(x) - delta(y)| <= 2 max_i |x_i - y_i|`` for matched random pairs."""
    worst, witness = 0.0, {}
    for k, rng in enumerate(_rngs(spec, "separation_lipschitz")):
        x, y = draw_pair(rng, spec.n, spec.d, spec.scale, regime=1 if k % 2 == 0 else 0)
        m = np.linalg.norm(x - y, axis=1).max()
        val = abs(separation(x) - separation(y)) / (2 * m)
        if val > worst:
            worst, witness = val, {"x": x, "y": y}
    return CheckReport("separation_lipschitz", worst, 1.0, 1e-12, spec.trials, witness)


def check_canonicalize_idempotent(spec: SampleSpec) -> CheckReport:
    failures, witness = 0, {}
    for rng in _rngs(spec, "canonicalize_idempotent"):
        P = rng.uniform(-spec.scale, spec.scale, (spec.n + 2, spec.d))
        tol = float(10.0 ** rng.uniform(-3, 0)) * spec.scale
        once = canonicalize(P, tol)
        if canonicalize(once.points, tol) != once:
            failures += 1
            witness = {"points": P, "tol": tol}
    return CheckReport("canonicalize_idempotent", float(failures), 0.0, 0.0, spec.trials, witness)


# ---------------------------------------------------------------- suite

def run_suite(spec: SampleSpec | None = None, params: FlowParams | None = None,
              tolerance: float = LIPSCHITZ_TOL) -> list[CheckReport]:
    """Run every check with trial counts derived from ``spec``; deterministic in ``spec.seed``.

    The flow-heavy checks use ``spec.trials`` pairs for the Lipschitz
    sampler and a tenth of that (at least ten) elsewhere.
    """
    spec = spec or SampleSpec()
    params = params or FlowParams()
    light = SampleSpec(spec.n, spec.d, max(10, spec.trials // 10), spec.seed, spec.scale)
    pairs = sample_flow_pairs(light)
    case2 = sample_case2_pairs(light)
    return [
        check_gradient(light),
        check_gradient_bound(spec),
        check_speed_bound(spec),
        check_monotone_map(spec),
        check_convexity(spec),
        check_hausdorff_triangle(spec),
        check_separation_lipschitz(spec),
        check_canonicalize_idempotent(spec),
        check_identity_lower(spec, params),
        check_collision_bracket(light, params),
        check_displacement(light, params),
        check_closest_pair_slope(SampleSpec(spec.n, spec.d, 10, spec.seed, spec.scale), params),
        check_enumeration_invariance(light, params),
        check_contraction(*pairs, params),
        check_stability_H(*pairs, params),
        check_lipschitz(spec, params, tolerance),
        check_case2_certificate(*case2, params, tolerance),
        check_counterexample(0.01),
    ]
