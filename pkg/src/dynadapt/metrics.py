"""
Regret measures, regularity measures and theoretical bounds over a RunTrace.

Window optima ``min_w sum_{t in W} f_t(w)`` are exact for the shipped loss
families:

* 1-D absolute losses -- the optimum is a weighted median, i.e. one of the
  window's ``theta`` values, so minimising over all distinct ``theta`` values
  of the trace is exact;
* linear losses on a box or ball -- closed form from prefix sums;
* absolute losses in ``d > 1`` -- geometric median by Weiszfeld iterations.

Anything else falls back to a grid of ``resolution`` points refined by a
bounded scalar search (1-D) or SLSQP/L-BFGS-B (``d > 1``).
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .core import AbsoluteLoss, Ball, Box, Domain, LinearLoss, LossFunction, RunTrace, FEASIBILITY_TOL
from .errors import ArgumentError, UnsupportedMetricError
from .intervals import Interval

DEFAULT_RESOLUTION = 2001
_CHUNK = 1024


# ==============================================================
# Window optima
# ==============================================================

class WindowMinimizer:
    """``min_w sum_{t=r}^{s} f_t(w)`` for any window of a fixed loss sequence (rounds 1-indexed)."""

    def __init__(self, losses: Sequence[LossFunction], domain: Domain,
                 resolution: int = DEFAULT_RESOLUTION):
        self.losses = list(losses)
        self.domain = domain
        self.resolution = resolution
        self.T = len(self.losses)
        if self.T == 0:
            raise ArgumentError("empty loss sequence")
        kinds = {type(f) for f in self.losses}
        if kinds == {AbsoluteLoss} and domain.dimension == 1:
            self.strategy = "median"
            thetas = np.array([f.theta[0] for f in self.losses])
            self._cands = domain.project_many(np.unique(thetas)[:, None])
            vals = np.stack([f.values(self._cands) for f in self.losses])
            self._prefix = np.vstack([np.zeros(len(self._cands)), np.cumsum(vals, axis=0)])
        elif kinds == {LinearLoss} and isinstance(domain, (Box, Ball)):
            self.strategy = "linear"
            g = np.stack([f.g / f.scale for f in self.losses])
            c = np.array([f.offset / f.scale for f in self.losses])
            self._gsum = np.vstack([np.zeros(domain.dimension), np.cumsum(g, axis=0)])
            self._csum = np.concatenate([[0.0], np.cumsum(c)])
        elif kinds == {AbsoluteLoss}:
            self.strategy = "weiszfeld"
        else:
            self.strategy = "numeric"

    def _check(self, r: int, s: int) -> None:
        if not 1 <= r <= s <= self.T:
            raise ArgumentError(f"window [{r}, {s}] outside [1, {self.T}]")

    # -- linear closed form ------------------------------------------------

    def _linear_min(self, S: np.ndarray, c: np.ndarray) -> np.ndarray:
        if isinstance(self.domain, Ball):
            return c - self.domain.radius * np.linalg.norm(S, axis=-1)
        return c + np.minimum(S * self.domain.lo, S * self.domain.hi).sum(axis=-1)

    def _linear_argmin(self, S: np.ndarray) -> np.ndarray:
        if isinstance(self.domain, Ball):
            n = float(np.linalg.norm(S))
            return np.zeros_like(S) if n == 0.0 else -self.domain.radius * S / n
        return np.where(S > 0, self.domain.lo, self.domain.hi)

    # -- generic per-window solvers -----------------------------------------

    def _window_objective(self, r: int, s: int):
        fs = self.losses[r - 1:s]
        return lambda pts: np.sum([f.values(pts) for f in fs], axis=0)

    def _weiszfeld(self, r: int, s: int) -> tuple[float, np.ndarray]:
        fs = self.losses[r - 1:s]
        X = np.stack([f.theta for f in fs])
        wts = np.array([1.0 / f.scale for f in fs])
        objective = lambda y: float(np.sum(wts * np.linalg.norm(X - y, axis=1)))
        # the optimum is either a data point or the Weiszfeld fixed point
        best_val, best = min(((objective(x), x) for x in X), key=lambda p: p[0])
        y = np.average(X, axis=0, weights=wts)
        for _ in range(2000):
            dist = np.linalg.norm(X - y, axis=1)
            if np.any(dist < 1e-14):
                break
            coef = wts / dist
            y_new = coef @ X / coef.sum()
            if np.linalg.norm(y_new - y) < 1e-15:
                y = y_new
                break
            y = y_new
        y = self.domain.project(y)
        val = objective(y)
        if val < best_val:
            best_val, best = val, y
        return best_val, np.array(best)

    def _numeric(self, r: int, s: int) -> tuple[float, np.ndarray]:
        obj = self._window_objective(r, s)
        dom = self.domain
        if dom.dimension == 1:
            lo, hi = (float(dom.lo[0]), float(dom.hi[0])) if isinstance(dom, Box) else (-dom.radius, dom.radius)
            grid = np.linspace(lo, hi, self.resolution)
            vals = obj(grid[:, None])
            i = int(np.argmin(vals))
            a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
            res = optimize.minimize_scalar(lambda x: float(obj(np.array([[x]]))[0]),
                                           bounds=(a, b), method="bounded",
                                           options={"xatol": 1e-12})
            if res.fun < vals[i]:
                return float(res.fun), np.array([res.x])
            return float(vals[i]), np.array([grid[i]])
        starts = [dom.origin()] + [dom.project(f.params) for f in self.losses[r - 1:s]
                                   if f.params.shape[0] == dom.dimension]
        x0 = min(starts, key=lambda p: float(obj(p[None, :])[0]))
        fun = lambda x: float(obj(x[None, :])[0])
        if isinstance(dom, Box):
            res = optimize.minimize(fun, x0, method="L-BFGS-B", bounds=list(zip(dom.lo, dom.hi)))
        else:
            cons = {"type": "ineq", "fun": lambda x: dom.radius ** 2 - x @ x}
            res = optimize.minimize(fun, x0, method="SLSQP", constraints=[cons])
        x = dom.project(res.x)
        return min((fun(x), x), (fun(x0), x0), key=lambda p: p[0])

    # -- public API -------------------------------------------------------

    def minimum(self, r: int, s: int) -> float:
        return self.solve(r, s)[0]

    def argmin(self, r: int, s: int) -> np.ndarray:
        return self.solve(r, s)[1]

    def solve(self, r: int, s: int) -> tuple[float, np.ndarray]:
        self._check(r, s)
        if self.strategy == "median":
            row = self._prefix[s] - self._prefix[r - 1]
            i = int(np.argmin(row))
            return float(row[i]), self._cands[i].copy()
        if self.strategy == "linear":
            S = self._gsum[s] - self._gsum[r - 1]
            c = self._csum[s] - self._csum[r - 1]
            return float(self._linear_min(S, np.asarray(c))), self._linear_argmin(S)
        if self.strategy == "weiszfeld":
            return self._weiszfeld(r, s)
        return self._numeric(r, s)

    def minima_of_length(self, tau: int) -> np.ndarray:
        """Optimal values of every window of length ``tau``, by start round."""
        if not 1 <= tau <= self.T:
            raise ArgumentError(f"window length {tau} outside [1, {self.T}]")
        if self.strategy == "median":
            out = np.full(self.T - tau + 1, np.inf)
            for k in range(0, self._prefix.shape[1], _CHUNK):
                P = self._prefix[:, k:k + _CHUNK]
                out = np.minimum(out, (P[tau:] - P[:-tau]).min(axis=1))
            return out
        if self.strategy == "linear":
            S = self._gsum[tau:] - self._gsum[:-tau]
            c = self._csum[tau:] - self._csum[:-tau]
            return self._linear_min(S, c)
        return np.array([self.solve(r, r + tau - 1)[0] for r in range(1, self.T - tau + 2)])

    def row_minima(self, r: int) -> np.ndarray:
        """Optimal values of windows ``[r, s]`` for ``s = r..T``."""
        self._check(r, r)
        if self.strategy == "median":
            out = np.full(self.T - r + 1, np.inf)
            for k in range(0, self._prefix.shape[1], _CHUNK):
                P = self._prefix[:, k:k + _CHUNK]
                out = np.minimum(out, (P[r:] - P[r - 1]).min(axis=1))
            return out
        if self.strategy == "linear":
            return self._linear_min(self._gsum[r:] - self._gsum[r - 1], self._csum[r:] - self._csum[r - 1])
        return np.array([self.solve(r, s)[0] for s in range(r, self.T + 1)])


def window_minimizer(trace: RunTrace, resolution: int = DEFAULT_RESOLUTION) -> WindowMinimizer:
    cached = trace.meta.get("_window_minimizer")
    if cached is not None and cached.resolution == resolution:
        return cached
    wm = WindowMinimizer(trace.losses, trace.domain, resolution)
    trace.meta["_window_minimizer"] = wm
    return wm


def _prefix(x: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(x)])


# ==============================================================
# Regret notions
# ==============================================================

def static_regret(trace: RunTrace, candidate_grid_resolution: int = DEFAULT_RESOLUTION) -> float:
    """Cumulative loss minus the best fixed action in hindsight."""
    if trace.horizon == 0:
        raise ArgumentError("empty trace")
    wm = window_minimizer(trace, candidate_grid_resolution)
    return trace.cumulative_loss - wm.minimum(1, trace.horizon)


def _comparator_array(trace: RunTrace, comparators) -> np.ndarray:
    u = np.asarray(comparators, dtype=np.float64)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape != (trace.horizon, trace.dimension):
        raise ArgumentError(f"comparators shape {u.shape}, expected {(trace.horizon, trace.dimension)}")
    for t, p in enumerate(u, start=1):
        if trace.domain.distance(p) > FEASIBILITY_TOL:
            raise ArgumentError(f"comparator for round {t} lies outside the domain")
    return u


def comparator_losses(trace: RunTrace, comparators) -> np.ndarray:
    u = _comparator_array(trace, comparators)
    return np.array([f.value(p) for f, p in zip(trace.losses, u)])


def dynamic_regret(trace: RunTrace, comparators) -> float:
    return math.fsum(trace.learner_losses) - math.fsum(comparator_losses(trace, comparators))


def restricted_dynamic_regret(trace: RunTrace) -> float:
    if trace.minimizers is None:
        raise UnsupportedMetricError("trace carries no per-round minimizers")
    return dynamic_regret(trace, trace.minimizers)


def interval_dynamic_regret(trace: RunTrace, comparators, r: int, s: int) -> float:
    if not 1 <= r <= s <= trace.horizon:
        raise ArgumentError(f"interval [{r}, {s}] outside the trace")
    u = _comparator_array(trace, comparators)
    return math.fsum(trace.learner_losses[r - 1:s]) - math.fsum(
        f.value(p) for f, p in zip(trace.losses[r - 1:s], u[r - 1:s]))


def sa_regret(trace: RunTrace, tau: int, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Worst static regret over windows of length ``tau``."""
    T = trace.horizon
    if not 1 <= tau <= T:
        raise ArgumentError(f"tau={tau} outside [1, {T}]")
    L = _prefix(trace.learner_losses)
    mins = window_minimizer(trace, resolution).minima_of_length(tau)
    return float(np.max(L[tau:] - L[:-tau] - mins))


def sa_regret_profile(trace: RunTrace, resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """``SAReg(T, tau)`` for every ``tau = 1..T`` (entry ``tau - 1``) in one scan of all windows."""
    T = trace.horizon
    L = _prefix(trace.learner_losses)
    wm = window_minimizer(trace, resolution)
    prof = np.full(T, -np.inf)
    for r in range(1, T + 1):
        reg = L[r:] - L[r - 1] - wm.row_minima(r)
        n = len(reg)
        np.maximum(prof[:n], reg, out=prof[:n])
    return prof


def weak_adaptive_regret(trace: RunTrace, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Worst static regret over every contiguous window."""
    return float(np.max(sa_regret_profile(trace, resolution)))


# ==============================================================
# Regularity measures
# ==============================================================

def _as_rows(points) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    return p[:, None] if p.ndim == 1 else p


def path_length(points) -> float:
    p = _as_rows(points)
    if len(p) < 2:
        return 0.0
    return math.fsum(np.linalg.norm(np.diff(p, axis=0), axis=1))


def squared_path_length(points) -> float:
    p = _as_rows(points)
    if len(p) < 2:
        return 0.0
    return math.fsum(np.sum(np.diff(p, axis=0) ** 2, axis=1))


def _sup_gap(f: LossFunction, g: LossFunction, domain: Domain, resolution: int) -> float:
    """``sup_w |f(w) - g(w)|`` over the domain."""
    if isinstance(f, AbsoluteLoss) and isinstance(g, AbsoluteLoss) and f.scale == g.scale:
        # | |w-a| - |w-b| | <= |a-b|, with equality at w = a (a is feasible)
        return float(np.linalg.norm(f.theta - g.theta)) / f.scale
    if isinstance(f, LinearLoss) and isinstance(g, LinearLoss):
        dg = f.g / f.scale - g.g / g.scale
        dc = f.offset / f.scale - g.offset / g.scale
        if isinstance(domain, Ball):
            return domain.radius * float(np.linalg.norm(dg)) + abs(dc)
        if isinstance(domain, Box):
            hi = dc + np.maximum(dg * domain.lo, dg * domain.hi).sum()
            lo = dc + np.minimum(dg * domain.lo, dg * domain.hi).sum()
            return max(abs(hi), abs(lo))
    if domain.dimension != 1:
        raise UnsupportedMetricError("function variation for this loss family needs d = 1")
    lo, hi = (float(domain.lo[0]), float(domain.hi[0])) if isinstance(domain, Box) else (-domain.radius, domain.radius)
    pts = np.concatenate([np.linspace(lo, hi, resolution),
                          domain.project_many(np.vstack([f.params, g.params]).reshape(-1, 1))[:, 0]])
    return float(np.max(np.abs(f.values(pts[:, None]) - g.values(pts[:, None]))))


def function_variation(trace: RunTrace, resolution: int = DEFAULT_RESOLUTION) -> float:
    fs = trace.losses
    return math.fsum(_sup_gap(fs[t + 1], fs[t], trace.domain, resolution) for t in range(len(fs) - 1))


# ==============================================================
# Comparator policies
# ==============================================================

def minimizer_comparators(trace: RunTrace) -> np.ndarray:
    if trace.minimizers is None:
        raise UnsupportedMetricError("trace carries no per-round minimizers")
    return np.asarray(trace.minimizers, dtype=np.float64)


def loss_segments(trace: RunTrace) -> list[tuple[int, int]]:
    """Maximal runs ``(r, s)`` of rounds with identical loss functions."""
    def key(f: LossFunction):
        return (type(f).__name__, tuple(f.params.tolist()), getattr(f, "scale", None), getattr(f, "offset", None))

    segs, start = [], 1
    for t in range(2, trace.horizon + 1):
        if key(trace.losses[t - 1]) != key(trace.losses[t - 2]):
            segs.append((start, t - 1))
            start = t
    segs.append((start, trace.horizon))
    return segs


def piecewise_constant_comparators(trace: RunTrace, segments: Optional[Sequence[tuple[int, int]]] = None,
                                   resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """Best fixed point of each segment, repeated over the segment."""
    wm = window_minimizer(trace, resolution)
    u = np.empty((trace.horizon, trace.dimension))
    for r, s in segments or loss_segments(trace):
        u[r - 1:s] = wm.argmin(r, s)
    return u


# ==============================================================
# Bounds
# ==============================================================

def bound_c(t: float, horizon: float) -> float:
    """Upper bound on the AdaNormalHedge log term at round ``t`` of an AOD run with horizon ``horizon``."""
    if t < 1 or horizon < 1:
        raise ArgumentError("t and horizon must be >= 1")
    return 1.0 + math.log(t) + math.log(1.0 + math.log2(horizon)) + math.log((5.0 + 3.0 * math.log(1.0 + t)) / 2.0)


def bound_c_prime(s: float) -> float:
    return bound_c(s, s)


def bound_k(path: float, diameter: float) -> int:
    return math.floor(0.5 * math.log2(1.0 + 4.0 * path / (7.0 * diameter))) + 1


def bound_thm2(horizon: int, D: float, G: float) -> float:
    """Static regret of OGD with ``eta = D / (G sqrt(T))``."""
    return D * G * math.sqrt(horizon)


def bound_ogd_dynamic(eta: float, w_first, w_next, u_first, u_last, path: float,
                      horizon: int, D: float, G: float) -> float:
    """Dynamic regret of fixed-step OGD against one comparator sequence.

    ``w_next`` is the point OGD holds after the last round; the comparator is
    extended by ``u_{T+1} = u_T``.
    """
    a = float(np.sum((np.asarray(w_first) - u_first) ** 2))
    b = float(np.sum((np.asarray(w_next) - u_last) ** 2))
    return (a - b) / (2.0 * eta) + D / eta * path + eta * horizon * G * G / 2.0


def bound_thm3(tau: int, horizon: int, D: float, G: float) -> float:
    """Strongly adaptive regret of AOD."""
    return 8.0 * (math.sqrt(3.0 * bound_c(horizon, horizon)) + D * G) * math.sqrt(tau)


def bound_thm4(horizon: int, path: float, D: float, G: float) -> float:
    """Dynamic regret of AOD against any comparator sequence of path length ``path``."""
    c = bound_c(horizon, horizon)
    return (1.5 * D * G + 2.5 * G * math.sqrt(D * path)
            + math.sqrt(6.0 * c * (1.0 + 2.0 * path / D))) * math.sqrt(horizon)


def bound_thm5(length: int, s: int, path: float, D: float, G: float) -> float:
    """Dynamic regret of AOA over an interval of ``length`` rounds ending at ``s``."""
    k = bound_k(path, D)
    root = math.sqrt(length)
    return ((14.0 * math.sqrt(bound_c_prime(s)) + 3.0 * (1.0 + 2.0 * math.log(k + 1)) + 23.0 * D * G) * root
            + 5.0 * G * math.sqrt(D * path) * root)


def bound_thm5_array(length, s, path, D: float, G: float) -> np.ndarray:
    """Vectorised ``bound_thm5`` over arrays of interval lengths, end rounds and path lengths."""
    length = np.asarray(length, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    path = np.asarray(path, dtype=np.float64)
    c = 1.0 + np.log(s) + np.log(1.0 + np.log2(s)) + np.log((5.0 + 3.0 * np.log(1.0 + s)) / 2.0)
    k = np.floor(0.5 * np.log2(1.0 + 4.0 * path / (7.0 * D))) + 1.0
    root = np.sqrt(length)
    return ((14.0 * np.sqrt(c) + 3.0 * (1.0 + 2.0 * np.log(k + 1.0)) + 23.0 * D * G) * root
            + 5.0 * G * np.sqrt(D * path) * root)


def bound_thm7(horizon: int, path: float, D: float, G: float) -> float:
    """Dynamic regret of Ader."""
    k = bound_k(path, D)
    return (0.75 * G * math.sqrt(2.0 * horizon * (7.0 * D * D + 4.0 * D * path))
            + math.sqrt(2.0 * horizon) / 4.0 * (1.0 + 2.0 * math.log(k + 1)))


def bound_sleeping_cb(tau: int, horizon: int, D: float, G: float) -> float:
    """Strongly adaptive regret of the sleeping coin-betting meta-learner (cited result,
    not a bound on any learner in this package)."""
    return (4.0 * D * G / (math.sqrt(2.0) - 1.0) + 8.0 * math.sqrt(7.0 * math.log(horizon) + 5.0)) * math.sqrt(tau)


def bound_meta_regret(elapsed: int, t: int, horizon: int) -> float:
    """AdaNormalHedge regret of an AOD run to one DGC expert after ``elapsed`` rounds."""
    return math.sqrt(3.0 * elapsed * bound_c(t, horizon))


def bound_thm1_rhs(trace: RunTrace, comparators, G: float,
                   profile: Optional[np.ndarray] = None) -> float:
    """``min_tau SAReg(T, tau) T / tau + tau G P_T`` with measured ``SAReg``."""
    u = _comparator_array(trace, comparators)
    T = trace.horizon
    if profile is None:
        profile = sa_regret_profile(trace)
    P = path_length(u)
    tau = np.arange(1, T + 1, dtype=np.float64)
    return float(np.min(profile * T / tau + tau * G * P))


# ==============================================================
# Interval-wise checks
# ==============================================================

def interval_regret_table(trace: RunTrace, comparators) -> tuple[np.ndarray, np.ndarray]:
    """Regret and path length of every interval ``[r, s]``.

    Returns ``(regret, path)``, both ``(T, T)`` with entry ``[r-1, s-1]``
    valid for ``r <= s`` and NaN below the diagonal.
    """
    u = _comparator_array(trace, comparators)
    T = trace.horizon
    gap = _prefix(trace.learner_losses - comparator_losses(trace, u))
    steps = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(u, axis=0), axis=1))])
    r = np.arange(T)[:, None]
    s = np.arange(T)[None, :]
    regret = np.where(s >= r, gap[s + 1] - gap[r], np.nan)
    path = np.where(s >= r, steps[s] - steps[r], np.nan)
    return regret, path


def aod_meta_regret(trace: RunTrace, horizon: int) -> list[tuple[Interval, int, float, float]]:
    """Meta-regret of an AOD run to each DGC expert at each of its rounds.

    Needs the per-round diagnostics of a run with ``record=True``. Returns
    ``(interval, t, measured, bound)`` tuples.
    """
    if not trace.rounds:
        raise UnsupportedMetricError("trace has no per-expert diagnostics")
    running: dict[Interval, float] = {}
    out = []
    for info in trace.rounds:
        for iv, le in zip(info.intervals, info.expert_losses):
            running[iv] = running.get(iv, 0.0) + (info.learner_loss - le)
            elapsed = info.t - iv.start + 1
            out.append((iv, info.t, running[iv], bound_meta_regret(elapsed, info.t, horizon)))
    return out
