"""Monte Carlo engine for (Laplacian + Z)/2 diffusions on model manifolds.

Paths are generated by geodesic Euler steps exp_x(F dB + Z dt/2) with the
orthonormal frame F advanced by exact parallel transport.  Alongside each
path the engine integrates the damped-transport equation

    dQ/ds = -(1/2) Ric^Z_{frame} Q,      Q_0 = id,

by the explicit midpoint rule; on the catalogue Ric^Z acts as a scalar
along paths, so Q is carried as one number per path.  Probabilistic
gradient representations use the weight

    grad P_t u (x) = -E[ u(X_t) * int_0^t h'(s) Q_s^T dB_s ],
    h(s) = (e^{Kt} - e^{Ks}) / (e^{Kt} - 1)   (h = (t-s)/t when K = 0),

with K a lower bound on Ric^Z.  Reflected paths fold the normal coordinate
and accumulate boundary local time through the Tanaka-consistent increment
2 * overshoot; with this choice the expected local time on a flat
half-space is exact for any step size.  Killed paths absorb on crossing,
with an exact one-dimensional Brownian-bridge correction available for
half-space and interval boundaries.

Randomness is organized in counter-based (Philox) streams keyed by
(seed, block index) over fixed-size path blocks, so estimates are
bit-identical for a given (seed, config) regardless of worker count;
accumulation is in block order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import geometry as geo
from .geometry import (Ball, HalfSpace, Hyperbolic, Interval, Model,
                       PotentialDrift, Sphere, UnsupportedModelError,
                       ZeroDrift)

BLOCK = 16384   # paths per RNG block; fixed scheme constant

Payoff = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# configuration and result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    """Discretization and budget for one Monte Carlo run."""

    dt: float = 1e-3
    horizon: float = 1.0
    n_paths: int = 100_000
    seed: int = 0
    bridge_correction: bool = True
    substeps: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt > 0 required")
        if self.n_paths < 1:
            raise ValueError("n_paths >= 1 required")
        if self.substeps < 1:
            raise ValueError("substeps >= 1 required")
        n = round(self.horizon / self.dt)
        if n < 1 or abs(n * self.dt - self.horizon) > 1e-9 * max(1.0, self.horizon):
            raise ValueError("horizon must be a positive multiple of dt")

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)


@dataclass
class MCValue:
    value: float
    se: float


@dataclass
class FreeEstimate:
    times: List[float]
    u: List[MCValue]
    n_paths: int


@dataclass
class KilledEstimate:
    times: List[float]
    u: List[MCValue]            # E[u(X_t); t < exit]
    survival: List[MCValue]     # psi(t, x) = P(t < exit)
    n_paths: int


@dataclass
class ReflectedEstimate:
    times: List[float]
    u: List[MCValue]
    local_time: List[MCValue]
    n_paths: int


@dataclass
class GradientEstimate:
    mean: np.ndarray
    se: np.ndarray
    n_paths: int
    scheme: str
    frame: Optional[np.ndarray] = None    # initial orthonormal frame (rows)
    diagnostics: dict = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.mean))

    @property
    def norm_se(self) -> float:
        # conservative: combines componentwise errors
        return float(np.linalg.norm(self.se))


@dataclass
class PathState:
    """Single-path snapshot: position, frame, damped transport, accumulators."""

    position: np.ndarray
    frame: np.ndarray
    Q: np.ndarray
    ito_acc: np.ndarray
    local_time: float
    status: str                 # 'alive' | 'killed' | 'finished'
    exit_time: Optional[float] = None
    time: float = 0.0


# ---------------------------------------------------------------------------
# RNG streams and worker pool
# ---------------------------------------------------------------------------

def _block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based generator for one path block; independent of workers."""
    return np.random.Generator(
        np.random.Philox(key=np.random.SeedSequence(
            entropy=(0x68656174, seed, block)).generate_state(2, np.uint64)))


def _worker_count() -> int:
    env = os.environ.get("HEATBOUNDS_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _map_blocks(fn, n_paths: int):
    """Apply ``fn(block_index, count)`` over path blocks, combine in order."""
    blocks = []
    start = 0
    b = 0
    while start < n_paths:
        count = min(BLOCK, n_paths - start)
        blocks.append((b, count))
        start += count
        b += 1
    workers = _worker_count()
    if workers == 1 or len(blocks) == 1:
        return [fn(bi, cnt) for bi, cnt in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(fn, bi, cnt) for bi, cnt in blocks]
        return [f.result() for f in futs]    # block order preserved


class _Stats:
    """Streaming sum / sum-of-squares over blocks (fixed combine order)."""

    def __init__(self, shape=()):
        self.s = np.zeros(shape)
        self.s2 = np.zeros(shape)
        self.n = 0

    def add(self, samples: np.ndarray, axis=0):
        self.s = self.s + samples.sum(axis=axis)
        self.s2 = self.s2 + (samples * samples).sum(axis=axis)
        self.n += samples.shape[axis]

    def mean(self):
        return self.s / self.n

    def se(self):
        m = self.mean()
        var = np.maximum(self.s2 / self.n - m * m, 0.0) * self.n / max(self.n - 1, 1)
        return np.sqrt(var / self.n)

    def mc(self) -> MCValue:
        return MCValue(float(self.mean()), float(self.se()))


# ---------------------------------------------------------------------------
# model kinematics (vectorized, one block at a time)
# ---------------------------------------------------------------------------

def _k_z(model: Model) -> float:
    """Lower bound on Ric^Z used for the gradient weight h."""
    c = geo.ricci_scalar_factor(model)
    if isinstance(model.drift, PotentialDrift):
        return c - model.drift.hess_max
    return c


def _ric_kind(model: Model):
    """('zero',) | ('const', c) | ('pot', drift): scalar Ric^Z along paths."""
    c = geo.ricci_scalar_factor(model)
    if isinstance(model.drift, PotentialDrift):
        if geo.dim(model) != 1:
            raise UnsupportedModelError(
                "gradient drifts only on one-dimensional charts")
        return ("pot", model.drift)
    if c == 0.0:
        return ("zero",)
    return ("const", c)


class _Kinematics:
    """Block-level state advance for one model family."""

    def __init__(self, model: Model):
        self.model = model
        self.d = geo.dim(model)
        self.amb = geo.ambient_dim(model)
        self.curved = isinstance(model, (Sphere, Hyperbolic))

    def init_positions(self, x0: np.ndarray, n: int) -> np.ndarray:
        return np.tile(np.asarray(x0, dtype=float), (n, 1))

    def init_frames(self, x0: np.ndarray, n: int) -> Optional[np.ndarray]:
        if not self.curved:
            return None
        f0 = geo.orthonormal_frame(self.model, x0)
        return np.tile(f0, (n, 1, 1))

    def displacement(self, X, F, dW, dt_step):
        """Chart/embedding displacement F dB + Z dt/2."""
        if F is None:
            disp = dW
        else:
            disp = np.einsum("ni,nij->nj", dW, F)
        drift = self.model.drift
        if isinstance(drift, ZeroDrift):
            return disp
        return disp + 0.5 * dt_step * geo.drift_vector(self.model, X)

    def move(self, X, F, disp):
        """Exponential step plus frame transport; returns (X_new, F_new)."""
        model = self.model
        if not self.curved:
            return X + disp, None
        Y = geo.exp_map(model, X, disp)
        Fn = np.empty_like(F)
        for j in range(self.d):
            Fn[:, j, :] = geo.parallel_transport_step(model, X, Y, F[:, j, :])
        if isinstance(model, Sphere):
            r = model.radius
            yhat = Y / r
            for j in range(self.d):
                Fn[:, j, :] -= np.sum(Fn[:, j, :] * yhat, axis=-1,
                                      keepdims=True) * yhat
        return Y, Fn


def _q_factor(kind, X, dt_step):
    """Midpoint-rule multiplier for dq/ds = -(1/2) R q over one step."""
    if kind[0] == "zero":
        return None
    if kind[0] == "const":
        a = -0.5 * kind[1] * dt_step
        return 1.0 + a + 0.5 * a * a
    drift = kind[1]
    R = -drift.hess(X[:, 0])      # flat chart: Ric^Z = -V''
    a = -0.5 * R * dt_step
    return 1.0 + a + 0.5 * a * a


def _h_prime(s: float, t: float, K: float) -> float:
    """Derivative of h(s) = (e^{Kt} - e^{Ks})/(e^{Kt} - 1); -1/t at K = 0."""
    if K == 0.0 or abs(K * t) < 1e-12:
        return -1.0 / t
    return -K * math.exp(K * s) / math.expm1(K * t)


def _record_steps(config: SimConfig, record_times) -> List[int]:
    if record_times is None:
        record_times = [config.horizon]
    steps = []
    for t in record_times:
        k = round(t / config.dt)
        if k < 1 or abs(k * config.dt - t) > 1e-9 * max(1.0, t):
            raise ValueError(f"record time {t} is not a multiple of dt")
        if k > config.n_steps:
            raise ValueError(f"record time {t} exceeds the horizon")
        steps.append(k)
    if steps != sorted(steps):
        raise ValueError("record times must be increasing")
    return steps


# ---------------------------------------------------------------------------
# free / reflected driver (shared: both keep every path alive)
# ---------------------------------------------------------------------------

def _reflect(model: Model, X: np.ndarray):
    """Fold positions back into the domain.

    Returns (X_folded, overshoot, flip): the overshoot is the distance
    travelled outside (local time increment = 2 * overshoot), and flip is
    the sign of the fold's derivative on the normal coordinate.  The flip
    drives the mirror part of the reflected damped transport: the
    antidevelopment of the folded path has increments flip * dB on the
    normal component.
    """
    if isinstance(model, HalfSpace):
        x1 = X[:, 0]
        over = np.maximum(-x1, 0.0)
        flip = np.where(x1 < 0.0, -1.0, 1.0)
        X[:, 0] = np.abs(x1)
        return X, over, flip
    if isinstance(model, Interval):
        L = model.length
        x = X[:, 0]
        over = np.maximum(-x, 0.0) + np.maximum(x - L, 0.0)
        period = 2.0 * L
        z = np.mod(x, period)
        flip = np.where(z < L, 1.0, -1.0)
        y = np.abs(x - period * np.floor(x / period + 0.5))
        X[:, 0] = y
        return X, over, flip
    if isinstance(model, Ball):
        r = model.radius
        rho = np.linalg.norm(X, axis=-1)
        over = np.maximum(rho - r, 0.0)
        out = rho > r
        if np.any(out):
            X[out] *= ((2.0 * r - rho[out]) / rho[out])[:, None]
        flip = np.where(out, -1.0, 1.0)
        return X, over, flip
    raise UnsupportedModelError(f"reflection unsupported on {type(model).__name__}")


def _drive_unkilled(model: Model, config: SimConfig, payoff: Optional[Payoff],
                    x0, record_times, *, reflect: bool,
                    bismut_K: Optional[float] = None,
                    track_qmax: bool = False,
                    keep_values: bool = False):
    """Shared engine for free and reflected runs.

    Returns per-record-time statistics for the payoff, local time (if
    reflecting), gradient samples -u * ito (if ``bismut_K`` given), the raw
    ito accumulator, and the path-wise max of |q| e^{-K^- s/2} when asked.
    """
    kin = _Kinematics(model)
    if reflect and kin.curved:
        raise UnsupportedModelError("reflection needs a flat chart")
    kind = _ric_kind(model)
    steps = _record_steps(config, record_times)
    times = [k * config.dt for k in steps]
    n_rec = len(steps)
    dt_sub = config.dt / config.substeps
    sdt = math.sqrt(dt_sub)
    x0 = np.asarray(x0, dtype=float)
    geo.validate_point(model, x0)
    k_neg = max(0.0, -_k_z(model)) if bismut_K is None else max(0.0, -bismut_K)

    u_stats = [_Stats() for _ in range(n_rec)]
    l_stats = [_Stats() for _ in range(n_rec)] if reflect else None
    g_stats = [_Stats((kin.d,)) for _ in range(n_rec)] if bismut_K is not None else None
    ito_stats = [_Stats((kin.d,)) for _ in range(n_rec)] if bismut_K is not None else None
    sig_stats = [_Stats() for _ in range(n_rec)] if bismut_K is not None else None

    def block(bi: int, n: int):
        rng = _block_rng(config.seed, bi)
        X = kin.init_positions(x0, n)
        F = kin.init_frames(x0, n)
        q = np.ones(n)
        need_q = kind[0] != "zero" or track_qmax
        itos = [np.zeros((n, kin.d)) for _ in range(n_rec)] \
            if bismut_K is not None else None
        sig = [np.zeros(n) for _ in range(n_rec)] if bismut_K is not None else None
        ltime = np.zeros(n) if reflect else None
        parity = np.ones(n) if reflect else None
        blk_qmax = 0.0
        rec = {"u": [], "l": [], "g": [], "ito": [], "sig": []}
        s = 0.0
        for step_i in range(1, config.n_steps + 1):
            for _ in range(config.substeps):
                dW = sdt * rng.standard_normal((n, kin.d))
                if bismut_K is not None:
                    if reflect:
                        # antidevelopment of the folded path: the normal
                        # component of the increment carries the mirror sign
                        dW_eff = dW.copy()
                        dW_eff[:, 0] *= parity
                    else:
                        dW_eff = dW
                    for j, ks in enumerate(steps):
                        if step_i <= ks:
                            t_j = times[j]
                            hp = _h_prime(s, t_j, bismut_K)
                            itos[j] += (hp * q)[:, None] * dW_eff
                            sig[j] += (hp * q) ** 2 * dt_sub
                if need_q:
                    fac = _q_factor(kind, X, dt_sub)
                    if fac is not None:
                        q = q * fac
                disp = kin.displacement(X, F, dW, dt_sub)
                X, F = kin.move(X, F, disp)
                if reflect:
                    X, over, flip = _reflect(model, X)
                    ltime += 2.0 * over
                    parity *= flip
                s += dt_sub
                if track_qmax:
                    ratio = np.max(np.abs(q)) / math.exp(0.5 * k_neg * s)
                    blk_qmax = max(blk_qmax, ratio)
            if step_i in steps:
                j = steps.index(step_i)
                uvals = payoff(X) if payoff is not None else np.zeros(n)
                rec["u"].append((j, uvals))
                if reflect:
                    rec["l"].append((j, ltime.copy()))
                if bismut_K is not None:
                    rec["g"].append((j, -uvals[:, None] * itos[j]))
                    rec["ito"].append((j, itos[j].copy()))
                    rec["sig"].append((j, sig[j].copy()))
        rec["qmax"] = blk_qmax
        return rec

    qmax_val = 0.0
    u_values = [[] for _ in range(n_rec)] if keep_values else None
    for partial in _map_blocks(block, config.n_paths):
        qmax_val = max(qmax_val, partial["qmax"])
        for j, arr in partial["u"]:
            u_stats[j].add(arr)
            if keep_values:
                u_values[j].append(arr)
        for j, arr in partial["l"]:
            l_stats[j].add(arr)
        for j, arr in partial["g"]:
            g_stats[j].add(arr)
        for j, arr in partial["ito"]:
            ito_stats[j].add(arr)
        for j, arr in partial["sig"]:
            sig_stats[j].add(arr)

    out = {"times": times, "u": u_stats, "l": l_stats, "g": g_stats,
           "ito": ito_stats, "sig": sig_stats, "qmax": qmax_val,
           "frame0": geo.orthonormal_frame(model, x0) if kin.curved else None}
    if keep_values:
        out["u_values"] = [np.concatenate(v) for v in u_values]
    return out


def run_free(model: Model, config: SimConfig, payoff: Payoff, x0,
             record_times: Optional[Sequence[float]] = None) -> FreeEstimate:
    """Estimate P_t u(x) = E^x u(X_t) for the free diffusion."""
    if geo.has_boundary(model):
        raise UnsupportedModelError("free run on a model with boundary")
    res = _drive_unkilled(model, config, payoff, x0, record_times,
                          reflect=False)
    return FreeEstimate(times=res["times"], u=[s.mc() for s in res["u"]],
                        n_paths=config.n_paths)


def run_reflected(model: Model, config: SimConfig, payoff: Payoff, x0,
                  record_times: Optional[Sequence[float]] = None
                  ) -> ReflectedEstimate:
    """Estimate P^N_t u(x) for the reflected diffusion, with local time."""
    res = _drive_unkilled(model, config, payoff, x0, record_times,
                          reflect=True)
    return ReflectedEstimate(times=res["times"], u=[s.mc() for s in res["u"]],
                             local_time=[s.mc() for s in res["l"]],
                             n_paths=config.n_paths)


# ---------------------------------------------------------------------------
# killed driver (supports several coupled starting points for FD gradients)
# ---------------------------------------------------------------------------

def _bridge_prob(a: np.ndarray, b: np.ndarray, dt_step: float) -> np.ndarray:
    """Brownian-bridge crossing probability exp(-2 a b / dt) of level 0.

    Computed only where it is not numerically negligible (a b < 20 dt,
    i.e. p > e^-40); elsewhere zero.
    """
    p = np.zeros_like(a)
    near = (a * b) < 20.0 * dt_step
    if np.any(near):
        p[near] = np.exp(-2.0 * np.maximum(a[near], 0.0)
                         * np.maximum(b[near], 0.0) / dt_step)
    return p


def _crossing_kill(model: Model, X_old, X_new, alive, U, dt_step,
                   bridge: bool):
    """Mark paths killed during the step; returns updated alive mask."""
    if isinstance(model, HalfSpace):
        a, b = X_old[:, 0], X_new[:, 0]
        dead = b <= 0.0
        if bridge:
            dead = dead | (U < _bridge_prob(a, b, dt_step))
        return alive & ~dead
    if isinstance(model, Interval):
        L = model.length
        a, b = X_old[:, 0], X_new[:, 0]
        dead = (b <= 0.0) | (b >= L)
        if bridge:
            p0 = _bridge_prob(a, b, dt_step)
            pL = _bridge_prob(L - a, L - b, dt_step)
            dead = dead | (U < p0 + pL - p0 * pL)
        return alive & ~dead
    if isinstance(model, Ball):
        dead = np.linalg.norm(X_new, axis=-1) >= model.radius
        return alive & ~dead
    raise UnsupportedModelError(f"killing unsupported on {type(model).__name__}")


def run_killed_multi(model: Model, config: SimConfig, payoff: Payoff,
                     x0s: Sequence, record_times=None):
    """Killed runs from several starting points with shared noise (CRN).

    Returns (times, stats) where stats[e] holds per-time payoff and
    survival statistics for ensemble e, plus difference statistics between
    the first two ensembles when there are exactly two (for FD gradients).
    """
    if not geo.has_boundary(model):
        raise UnsupportedModelError("killed run needs a boundary")
    kin = _Kinematics(model)
    steps = _record_steps(config, record_times)
    times = [k * config.dt for k in steps]
    n_rec = len(steps)
    m = len(x0s)
    dt_sub = config.dt / config.substeps
    sdt = math.sqrt(dt_sub)
    bridge = config.bridge_correction and isinstance(model, (HalfSpace, Interval))
    starts = [np.asarray(x, dtype=float) for x in x0s]
    for x in starts:
        geo.validate_point(model, x)

    u_stats = [[_Stats() for _ in range(n_rec)] for _ in range(m)]
    a_stats = [[_Stats() for _ in range(n_rec)] for _ in range(m)]
    d_stats = [_Stats() for _ in range(n_rec)] if m == 2 else None

    def block(bi: int, n: int):
        rng = _block_rng(config.seed, bi)
        idx = np.arange(n)               # global rows still being worked on
        Xs = [kin.init_positions(x, n) for x in starts]
        alive = [np.ones(n, dtype=bool) for _ in range(m)]
        # paths on the boundary are killed at time zero
        for e in range(m):
            bd = geo.boundary_data(model, starts[e])
            if bd.distance <= 0.0:
                alive[e][:] = False
        rec = {"u": [], "a": [], "d": []}
        for step_i in range(1, config.n_steps + 1):
            for _ in range(config.substeps):
                nw = len(idx)
                if nw:
                    dW = sdt * rng.standard_normal((nw, kin.d))
                    U = rng.uniform(size=nw) if bridge else None
                    for e in range(m):
                        Xn = Xs[e] + dW
                        drift = model.drift
                        if not isinstance(drift, ZeroDrift):
                            Xn = Xn + 0.5 * dt_sub * geo.drift_vector(model, Xs[e])
                        alive[e] = _crossing_kill(model, Xs[e], Xn, alive[e],
                                                  U, dt_sub, bridge)
                        Xs[e] = Xn
            # shrink the working set to rows alive in some ensemble
            if step_i % 100 == 0 and len(idx):
                keep = alive[0]
                for e in range(1, m):
                    keep = keep | alive[e]
                if keep.sum() < 0.9 * len(idx):
                    idx = idx[keep]
                    Xs = [x[keep] for x in Xs]
                    alive = [a[keep] for a in alive]
            if step_i in steps:
                j = steps.index(step_i)
                uv = []
                for e in range(m):
                    vals = np.zeros(n)
                    if len(idx):
                        vals[idx[alive[e]]] = payoff(Xs[e][alive[e]])
                    uv.append(vals)
                    surv = np.zeros(n)
                    if len(idx):
                        surv[idx[alive[e]]] = 1.0
                    rec["u"].append((e, j, vals))
                    rec["a"].append((e, j, surv))
                if m == 2:
                    rec["d"].append((j, uv[0] - uv[1]))
        return rec

    for partial in _map_blocks(block, config.n_paths):
        for e, j, arr in partial["u"]:
            u_stats[e][j].add(arr)
        for e, j, arr in partial["a"]:
            a_stats[e][j].add(arr)
        if d_stats is not None:
            for j, arr in partial["d"]:
                d_stats[j].add(arr)

    return times, u_stats, a_stats, d_stats


def run_killed(model: Model, config: SimConfig, payoff: Payoff, x0,
               record_times: Optional[Sequence[float]] = None
               ) -> KilledEstimate:
    """Estimate the absorbed semigroup P^D_t u(x) and the survival
    probability psi(t, x)."""
    times, u_stats, a_stats, _ = run_killed_multi(
        model, config, payoff, [x0], record_times)
    return KilledEstimate(times=times,
                          u=[s.mc() for s in u_stats[0]],
                          survival=[s.mc() for s in a_stats[0]],
                          n_paths=config.n_paths)


# ---------------------------------------------------------------------------
# gradient estimators
# ---------------------------------------------------------------------------

def bismut_gradient(model: Model, payoff: Payoff, t: float, x,
                    config: Optional[SimConfig] = None,
                    mode: str = "auto",
                    K: Optional[float] = None) -> GradientEstimate:
    """Probabilistic gradient of the semigroup at (t, x).

    ``mode`` is 'free' for boundaryless models and 'reflected' for the
    flat-normal boundary models (interval, half-space) where the damped
    transport of the reflected diffusion coincides with the free one; other
    boundary models have no simulable weight here.
    """
    if t <= 0:
        raise ValueError("t > 0 required")
    if config is None:
        config = SimConfig(horizon=t)
    if abs(config.horizon - t) > 1e-12:
        config = SimConfig(dt=config.dt, horizon=t, n_paths=config.n_paths,
                           seed=config.seed,
                           bridge_correction=config.bridge_correction,
                           substeps=config.substeps)
    if mode == "auto":
        if not geo.has_boundary(model):
            mode = "free"
        elif isinstance(model, (Interval, HalfSpace)):
            mode = "reflected"
        else:
            raise UnsupportedModelError(
                f"no gradient weight for reflected {type(model).__name__}: "
                "the boundary is curved; use the semigroup estimate plus "
                "finite differences instead")
    if mode == "reflected" and not isinstance(model, (Interval, HalfSpace)):
        raise UnsupportedModelError(
            "reflected gradient weights need a flat boundary normal")
    if mode == "free" and geo.has_boundary(model):
        raise UnsupportedModelError("free mode on a model with boundary")
    K_h = _k_z(model) if K is None else K
    res = _drive_unkilled(model, config, payoff, x, [t],
                          reflect=(mode == "reflected"), bismut_K=K_h)
    g = res["g"][0]
    ito = res["ito"][0]
    sig = res["sig"][0]
    return GradientEstimate(
        mean=g.mean(), se=g.se(), n_paths=config.n_paths,
        scheme=f"bismut-{mode}(K={K_h:g})",
        frame=res["frame0"],
        diagnostics={
            "ito_mean": ito.mean(), "ito_se": ito.se(),
            "sigma_t": math.sqrt(max(float(sig.mean()), 0.0)),
        })


def fd_gradient(model: Model, payoff: Payoff, t: float, x,
                config: Optional[SimConfig] = None, eps: float = 0.02,
                mode: str = "killed",
                record_times: Optional[Sequence[float]] = None,
                direction: Optional[np.ndarray] = None
                ) -> List[GradientEstimate]:
    """Central-difference semigroup gradient with common random numbers.

    For each chart direction e_i the pair of runs from x +- eps e_i shares
    every random draw, so the difference estimator has far smaller variance
    than two independent runs.  Returns one estimate per record time.
    Guards against catastrophic cancellation: requires
    eps >= 10 * SE(semigroup estimate).
    """
    if eps <= 0:
        raise ValueError("eps > 0 required")
    if config is None:
        config = SimConfig(horizon=t)
    x = np.asarray(x, dtype=float)
    d = geo.dim(model)
    if mode not in ("killed", "reflected", "free"):
        raise ValueError(f"unknown mode {mode!r}")
    dirs = [direction / np.linalg.norm(direction)] if direction is not None \
        else [np.eye(d)[i] for i in range(d)]
    if record_times is None:
        record_times = [t]

    comp_means = [np.zeros(len(dirs)) for _ in record_times]
    comp_ses = [np.zeros(len(dirs)) for _ in record_times]
    guard_se = 0.0
    for i, e_i in enumerate(dirs):
        xp = x + eps * e_i
        xm = x - eps * e_i
        if mode == "killed":
            times, u_stats, _, d_stats = run_killed_multi(
                model, config, payoff, [xp, xm], record_times)
            for j in range(len(record_times)):
                comp_means[j][i] = float(d_stats[j].mean()) / (2.0 * eps)
                comp_ses[j][i] = float(d_stats[j].se()) / (2.0 * eps)
                guard_se = max(guard_se, float(u_stats[0][j].se()))
        else:
            reflect = mode == "reflected"
            # both passes replay the same draws (same seed and blocks), so
            # per-path differences carry the common-random-number variance
            rp = _drive_unkilled(model, config, payoff, xp, record_times,
                                 reflect=reflect, keep_values=True)
            rm = _drive_unkilled(model, config, payoff, xm, record_times,
                                 reflect=reflect, keep_values=True)
            for j in range(len(record_times)):
                diff = rp["u_values"][j] - rm["u_values"][j]
                n = len(diff)
                comp_means[j][i] = float(diff.mean()) / (2.0 * eps)
                comp_ses[j][i] = float(diff.std(ddof=1)) / math.sqrt(n) \
                    / (2.0 * eps)
                guard_se = max(guard_se, float(rp["u"][j].se()))
    if eps < 10.0 * guard_se:
        raise ValueError(
            f"eps={eps:g} too small against semigroup SE {guard_se:g}: "
            "the difference would be noise-dominated")
    return [GradientEstimate(mean=comp_means[j], se=comp_ses[j],
                             n_paths=config.n_paths,
                             scheme=f"fd-{mode}(eps={eps:g})")
            for j in range(len(record_times))]


# ---------------------------------------------------------------------------
# diagnostics used by the verification suite
# ---------------------------------------------------------------------------

def q_ratio_max(model: Model, config: SimConfig, x0,
                reflect: bool = False) -> float:
    """max over paths and steps of |q_s| / e^{K^- s / 2} (should be <= 1+O(dt))."""
    res = _drive_unkilled(model, config, None, x0, None, reflect=reflect,
                          track_qmax=True)
    return res["qmax"]


def weak_order_euclid_ou(x0: float, t: float, dt_list: Sequence[float],
                         n_paths: int, seed: int = 0):
    """Weak error of the Euler scheme against the exact transition (OU).

    The Ornstein-Uhlenbeck diffusion dX = -X/2 dt + dB admits exact
    one-step sampling; driving both schemes with the same normals isolates
    the discretization bias from Monte Carlo noise.  Returns (slope,
    errors) of |E u(X_t)| differences for u(x) = x.
    """
    errors = []
    for dt in dt_list:
        n_steps = round(t / dt)
        if abs(n_steps * dt - t) > 1e-9:
            raise ValueError(f"dt={dt} does not divide t={t}")
        diff_sum = 0.0
        n_done = 0
        b = 0
        while n_done < n_paths:
            n = min(BLOCK, n_paths - n_done)
            rng = _block_rng(seed + 7919, b)
            xe = np.full(n, float(x0))
            xt = np.full(n, float(x0))
            dec = math.exp(-0.5 * dt)
            sig = math.sqrt(-math.expm1(-dt))
            for _ in range(n_steps):
                z = rng.standard_normal(n)
                xe = xe * (1.0 - 0.5 * dt) + math.sqrt(dt) * z
                xt = xt * dec + sig * z
            diff_sum += float(np.sum(xe - xt))
            n_done += n
            b += 1
        errors.append(abs(diff_sum / n_paths))
    slope = float(np.polyfit(np.log(dt_list), np.log(errors), 1)[0])
    return slope, errors


# ---------------------------------------------------------------------------
# single-path API (spec-level PathState view)
# ---------------------------------------------------------------------------

def initial_state(model: Model, x0) -> PathState:
    x = np.asarray(x0, dtype=float).copy()
    geo.validate_point(model, x)
    d = geo.dim(model)
    return PathState(position=x, frame=geo.orthonormal_frame(model, x),
                     Q=np.eye(d), ito_acc=np.zeros(d), local_time=0.0,
                     status="alive", time=0.0)


def step_free(model: Model, state: PathState, dt: float, dw: np.ndarray,
              horizon: float, K: Optional[float] = None) -> PathState:
    """One geodesic Euler step of a single path state.

    Moves by exp_x(frame dB + Z dt/2), transports the frame, advances the
    damped transport Q by the midpoint rule, and accumulates the gradient
    weight h'(s) Q^T dB for the window [0, horizon] (h chosen for the
    curvature constant K, defaulting to the model's Ric^Z lower bound).
    """
    if state.status != "alive":
        raise ValueError(f"cannot step a path with status {state.status!r}")
    dw = np.asarray(dw, dtype=float)
    d = geo.dim(model)
    if dw.shape != (d,):
        raise ValueError(f"increment must have shape ({d},)")
    kin = _Kinematics(model)
    K_h = _k_z(model) if K is None else K
    ito = state.ito_acc + _h_prime(state.time, horizon, K_h) * (state.Q.T @ dw)
    fac = _q_factor(_ric_kind(model), state.position[None, :], dt)
    Q = state.Q if fac is None else float(np.atleast_1d(fac)[0]) * state.Q
    disp = dw @ state.frame if kin.curved else dw.copy()
    if not isinstance(model.drift, ZeroDrift):
        disp = disp + 0.5 * dt * geo.drift_vector(model, state.position)
    y = geo.exp_map(model, state.position, disp)
    if kin.curved:
        frame = np.array([geo.parallel_transport_step(model, state.position,
                                                      y, f) for f in state.frame])
    else:
        frame = state.frame
    return PathState(position=y, frame=frame, Q=Q, ito_acc=ito,
                     local_time=state.local_time, status="alive",
                     time=state.time + dt)


def simulate_single_path(model: Model, config: SimConfig, x0,
                         mode: str = "free") -> PathState:
    """Reference single-path integration built on the geometry primitives.

    Slower than the block engine but exposes the full per-path state; used
    for path-level invariants.  Reflected paths fold the state after each
    free step and sign the weight increments with the mirror parity.
    """
    rng = _block_rng(config.seed, 0)
    d = geo.dim(model)
    st = initial_state(model, x0)
    dt = config.dt
    sdt = math.sqrt(dt)
    for _ in range(config.n_steps):
        dw = sdt * rng.standard_normal(d)
        st = step_free(model, st, dt, dw, config.horizon)
        if mode == "killed" and geo.has_boundary(model):
            bd = geo.boundary_data(model, st.position)
            if not bd.inside:
                st.status = "killed"
                st.exit_time = st.time
                break
        if mode == "reflected":
            X2, over, flip = _reflect(model, st.position[None, :].copy())
            st.position = X2[0]
            st.local_time += 2.0 * float(over[0])
            # the reflected damped transport is the derivative of the
            # folded flow: each fold mirrors its normal row
            st.Q[0, :] *= float(flip[0])
    if st.status == "alive":
        st.status = "finished"
    return st
