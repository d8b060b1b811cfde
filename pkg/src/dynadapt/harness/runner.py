"""
Experiment runner, trace files and reports.

Trace file::

    # oco-trace v1 D=<D> G=<G> T=<T>
    # loss=absolute scale=1.0 domain=box lo=0.0 hi=1.0 d=1 kind=abrupt seed=3 algorithm=aod
    t,action_0,loss,theta_0,minimizer_0,n_active_experts
    1,0.0,0.53,0.53,0.53,10
    ...

``theta`` holds the loss parameters (the target point for absolute losses,
the direction ``g`` for linear ones). Floats are written with ``repr`` so a
trace reloads bit-for-bit.

Report CSV columns: ``check, tau_or_interval, measured, bound, pass``.
Plain metric rows leave ``bound`` and ``pass`` empty.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .. import metrics as M
from ..ader import Ader
from ..combined import AOA, AOD
from ..core import AbsoluteLoss, Ball, Box, Environment, LinearLoss, RunTrace, run_game
from ..errors import ArgumentError, ConfigError
from ..ogd import OGD
from .config import ExperimentConfig
from .environments import build_environment

log = logging.getLogger(__name__)

TRACE_MAGIC = "# oco-trace v1"
REPORT_COLUMNS = ("check", "tau_or_interval", "measured", "bound", "pass")
# cells of the all-windows scan (windows x candidate points) we are willing to pay for
WINDOW_SCAN_BUDGET = 2_000_000_000
# largest horizon for the all-intervals dynamic regret table
MAX_INTERVAL_TABLE = 2048


def fmt(x: float) -> str:
    return f"{x:.12g}"


# ==============================================================
# Trace files
# ==============================================================

def _floats(a) -> list[str]:
    return [repr(float(v)) for v in np.ravel(a)]


def write_trace(trace: RunTrace, path: Union[str, Path, None] = None, **extra) -> str:
    """Serialise ``trace``; returns the text and writes it to ``path`` if given."""
    fs = trace.losses
    kinds = {type(f) for f in fs}
    if len(kinds) != 1:
        raise ArgumentError("trace files need a single loss family")
    f0 = fs[0]
    dom = trace.domain
    d = dom.dimension
    header = {"loss": f0.kind, "scale": repr(f0.scale)}
    if isinstance(f0, LinearLoss):
        header["offset"] = repr(f0.offset)
    if isinstance(dom, Box):
        header.update(domain="box", lo=";".join(_floats(dom.lo)), hi=";".join(_floats(dom.hi)))
    else:
        header.update(domain="ball", radius=repr(dom.radius))
    header["d"] = str(d)
    for key in ("kind", "seed"):
        if trace.meta.get(key) is not None:
            header[key] = str(trace.meta[key])
    header.update({k: str(v) for k, v in extra.items()})

    buf = io.StringIO()
    buf.write(f"{TRACE_MAGIC} D={dom.diameter!r} G={trace.lipschitz!r} T={trace.horizon}\n")
    buf.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
    p = len(f0.params)
    has_min = trace.minimizers is not None
    cols = (["t"] + [f"action_{j}" for j in range(d)] + ["loss"] + [f"theta_{j}" for j in range(p)]
            + ([f"minimizer_{j}" for j in range(d)] if has_min else []) + ["n_active_experts"])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    n_active = trace.n_active if trace.n_active is not None else np.ones(trace.horizon, dtype=int)
    for t in range(trace.horizon):
        row = [str(t + 1)] + _floats(trace.actions[t]) + [repr(float(trace.learner_losses[t]))]
        row += _floats(fs[t].params)
        if has_min:
            row += _floats(trace.minimizers[t])
        row.append(str(int(n_active[t])))
        w.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


def read_trace(path: Union[str, Path]) -> RunTrace:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ArgumentError(f"cannot read trace {path}: {exc}") from None
    return parse_trace(lines)


def parse_trace(lines: Sequence[str]) -> RunTrace:
    if len(lines) < 3 or not lines[0].startswith(TRACE_MAGIC):
        raise ArgumentError("not an oco-trace v1 file")
    top = dict(tok.split("=", 1) for tok in lines[0][len(TRACE_MAGIC):].split())
    info = dict(tok.split("=", 1) for tok in lines[1].lstrip("#").split())
    d = int(info["d"])
    if info["domain"] == "box":
        dom = Box([float(x) for x in info["lo"].split(";")], [float(x) for x in info["hi"].split(";")], d)
    elif info["domain"] == "ball":
        dom = Ball(float(info["radius"]), d)
    else:
        raise ArgumentError(f"unknown domain {info['domain']!r}")
    rows = list(csv.reader(lines[2:]))
    cols = rows[0]
    data = rows[1:]
    T = int(top["T"])
    if len(data) != T:
        raise ArgumentError(f"trace header says T={T} but has {len(data)} rows")
    idx = {c: i for i, c in enumerate(cols)}
    pick = lambda prefix: [idx[c] for c in cols if c.startswith(prefix)]
    a_cols, th_cols, m_cols = pick("action_"), pick("theta_"), pick("minimizer_")
    arr = np.array([[float(x) for x in r] for r in data])
    scale = float(info["scale"])
    if info["loss"] == "absolute":
        losses = [AbsoluteLoss(row[th_cols], scale) for row in arr]
    elif info["loss"] == "linear":
        losses = [LinearLoss(row[th_cols], float(info["offset"]), scale) for row in arr]
    else:
        raise ArgumentError(f"unknown loss family {info['loss']!r}")
    meta = {k: v for k, v in info.items() if k in ("kind", "seed", "algorithm")}
    return RunTrace(
        actions=arr[:, a_cols],
        learner_losses=arr[:, idx["loss"]],
        losses=losses,
        domain=dom,
        lipschitz=float(top["G"]),
        minimizers=arr[:, m_cols] if m_cols else None,
        n_active=arr[:, idx["n_active_experts"]].astype(np.int64),
        meta=meta,
    )


def read_comparators(path: Union[str, Path], dimension: int) -> np.ndarray:
    """One comparator per line, coordinates separated by commas or whitespace."""
    pts = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            pts.append([float(x) for x in line.replace(",", " ").split()])
    u = np.array(pts, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != dimension:
        raise ConfigError(f"comparator file {path} does not hold {dimension}-dimensional points")
    return u


# ==============================================================
# Reports
# ==============================================================

@dataclass
class ReportRow:
    check: str
    where: str
    measured: float
    bound: Optional[float] = None
    # relative slack, only for rows comparing two measured sums
    rel_tol: float = 0.0

    @property
    def passed(self) -> Optional[bool]:
        if self.bound is None:
            return None
        return bool(self.measured <= self.bound + self.rel_tol * max(1.0, abs(self.bound)))

    def cells(self) -> list[str]:
        return [self.check, self.where, fmt(self.measured),
                "" if self.bound is None else fmt(self.bound),
                "" if self.passed is None else str(self.passed).lower()]


def report_text(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def comparator_sets(trace: RunTrace, comparator_file: Optional[str] = None) -> dict[str, np.ndarray]:
    out = {}
    if trace.minimizers is not None:
        out["minimizers"] = M.minimizer_comparators(trace)
    out["piecewise-constant"] = M.piecewise_constant_comparators(trace)
    if comparator_file:
        out["file"] = read_comparators(comparator_file, trace.dimension)
    return out


def scan_affordable(trace: RunTrace) -> bool:
    wm = M.window_minimizer(trace)
    per = {"median": len(getattr(wm, "_cands", ())), "linear": trace.dimension}.get(wm.strategy, 10_000)
    return trace.horizon ** 2 // 2 * max(per, 1) <= WINDOW_SCAN_BUDGET


def metric_rows(trace: RunTrace, comparators: dict[str, np.ndarray],
                profile: Optional[np.ndarray] = None) -> list[ReportRow]:
    """Every regret and regularity measure computable from the trace alone."""
    rows = [ReportRow("cumulative_loss", "", trace.cumulative_loss),
            ReportRow("static_regret", "", M.static_regret(trace))]
    for name, u in comparators.items():
        rows.append(ReportRow("dynamic_regret", name, M.dynamic_regret(trace, u)))
    if trace.minimizers is not None:
        rows.append(ReportRow("restricted_dynamic_regret", "", M.restricted_dynamic_regret(trace)))
    if profile is not None:
        rows.append(ReportRow("weak_adaptive_regret", "", float(np.max(profile))))
    T = trace.horizon
    for k in range(T.bit_length()):
        tau = 1 << k
        val = profile[tau - 1] if profile is not None else M.sa_regret(trace, tau)
        rows.append(ReportRow("sa_regret", str(tau), float(val)))
    for name, u in comparators.items():
        rows.append(ReportRow("path_length", name, M.path_length(u)))
        rows.append(ReportRow("squared_path_length", name, M.squared_path_length(u)))
    rows.append(ReportRow("function_variation", "", M.function_variation(trace)))
    return rows


def bound_rows(algorithm: str, trace: RunTrace, comparators: dict[str, np.ndarray],
               profile: Optional[np.ndarray], eta: Optional[float] = None,
               first_point: Optional[np.ndarray] = None, static_eta: bool = False) -> list[ReportRow]:
    """Measured-vs-bound rows for the guarantees that apply to ``algorithm``."""
    T, D, G = trace.horizon, trace.diameter, trace.lipschitz
    rows: list[ReportRow] = []
    if algorithm == "ogd":
        if static_eta:
            rows.append(ReportRow("thm2_static", f"T={T}", M.static_regret(trace), M.bound_thm2(T, D, G)))
        if eta is not None and trace.final_point is not None:
            w1 = first_point if first_point is not None else trace.actions[0]
            for name, u in comparators.items():
                bound = M.bound_ogd_dynamic(eta, w1, trace.final_point, u[0], u[-1],
                                            M.path_length(u), T, D, G)
                rows.append(ReportRow("ogd_dynamic", name, M.dynamic_regret(trace, u), bound))
    elif algorithm == "ader":
        for name, u in comparators.items():
            rows.append(ReportRow("thm7_ader", name, M.dynamic_regret(trace, u),
                                  M.bound_thm7(T, M.path_length(u), D, G)))
    elif algorithm == "aod":
        if profile is not None:
            for tau in range(1, T + 1):
                rows.append(ReportRow("thm3_sareg", str(tau), float(profile[tau - 1]), M.bound_thm3(tau, T, D, G)))
        for name, u in comparators.items():
            rows.append(ReportRow("thm4_aod", name, M.dynamic_regret(trace, u),
                                  M.bound_thm4(T, M.path_length(u), D, G)))
        if trace.rounds:
            checks = M.aod_meta_regret(trace, T)
            iv, t, meas, bnd = min(checks, key=lambda c: c[3] - c[2])
            rows.append(ReportRow("meta_regret", f"{iv.start}-{iv.end}@{t}", meas, bnd))
    elif algorithm == "aoa" and T <= MAX_INTERVAL_TABLE:
        for name, u in comparators.items():
            reg, path = M.interval_regret_table(trace, u)
            r_idx, s_idx = np.triu_indices(T)
            bounds = M.bound_thm5_array(s_idx - r_idx + 1, s_idx + 1, path[r_idx, s_idx], D, G)
            slack = bounds - reg[r_idx, s_idx]
            i = int(np.argmin(slack))
            rows.append(ReportRow("thm5_aoa", f"{name}:{r_idx[i] + 1}-{s_idx[i] + 1}",
                                  float(reg[r_idx[i], s_idx[i]]), float(bounds[i])))
    if profile is not None:
        for name, u in comparators.items():
            rows.append(ReportRow("thm1_relation", name, M.dynamic_regret(trace, u),
                                  M.bound_thm1_rhs(trace, u, G, profile), rel_tol=1e-9))
    return rows


# ==============================================================
# Running
# ==============================================================

def make_learner(config: ExperimentConfig, env: Environment):
    dom, G, T = env.domain, env.lipschitz, env.horizon
    if config.algorithm == "ogd":
        return OGD(dom, G, T, None if config.eta == "auto" else float(config.eta))
    if config.algorithm == "ader":
        return Ader(dom, G, T)
    if config.algorithm == "aod":
        return AOD(dom, G, T, record=True)
    if config.algorithm == "aoa":
        return AOA(dom, G, record=True, horizon=T)
    raise ConfigError(f"unknown algorithm {config.algorithm!r}")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trace: RunTrace
    rows: list[ReportRow]
    trace_text: str
    report_text: str
    extras: dict = field(default_factory=dict)

    @property
    def violations(self) -> list[ReportRow]:
        return [r for r in self.rows if r.passed is False]

    @property
    def passed(self) -> bool:
        return not self.violations


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    env = build_environment(config.environment_spec())
    learner = make_learner(config, env)
    first = np.array(learner.act(), dtype=np.float64)
    trace = run_game(learner, env)
    trace.meta["algorithm"] = config.algorithm
    comps = comparator_sets(trace, config.comparator_file)
    if config.policy != "file":
        # headline policy first
        comps = {config.policy: comps[config.policy], **comps}
    profile = M.sa_regret_profile(trace) if scan_affordable(trace) else None
    if profile is None:
        log.warning("T=%d too large for the all-windows scan; skipping WAReg and per-tau rows", trace.horizon)
    eta = getattr(learner, "step_size", None)
    rows = metric_rows(trace, comps, profile) + bound_rows(
        config.algorithm, trace, comps, profile, eta, first, static_eta=config.eta == "auto")
    text = write_trace(trace, config.trace, algorithm=config.algorithm)
    rep = report_text(rows)
    if config.report:
        Path(config.report).parent.mkdir(parents=True, exist_ok=True)
        Path(config.report).write_text(rep)
    result = ExperimentResult(config, trace, rows, text, rep)
    for r in result.violations:
        log.error("bound violated: %s at %s (measured %s > bound %s)", r.check, r.where, fmt(r.measured), fmt(r.bound))
    return result
