"""Superlevel-set retraction by flowing configurations up ``tau``.

At every step the ascent LP is re-solved on a loose active band and an
explicit Euler step is taken along its direction, halving the step until
``tau`` has grown by at least half the certified rate. The pointwise LP
stands in for a global smooth field: what the retraction needs is that
``tau`` increases with a positive speed along every trajectory.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .exceptions import (AmbiguousClassificationError, IterationCapError, ParameterError,
                         PartialRetractionError)
from .geometry import BoxDomain, check_inside
from .stress import MARGIN_TOL, ascent_direction, classify
from .taut import EPS_FLOW_REL, signed_tau, tau


@dataclass(frozen=True)
class FlowOptions:
    step0_rel: float = 0.05
    speed_floor_rel: float = 1e-6
    max_iter: int = 10_000
    eps_act: Optional[float] = None  # absolute; default EPS_FLOW_REL * shortest side
    margin_tol: float = MARGIN_TOL
    min_step_rel: float = 1e-13
    strict: bool = False


@dataclass
class Trajectory:
    """Samples ``(t, x(t), tau(x(t)))`` of one flow line and how it ended."""

    times: list
    configs: list
    taus: list
    status: str  # "reached-target" | "stalled" | "hit-iteration-cap"
    margins: list = field(default_factory=list)
    stall_kind: Optional[str] = None

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.configs[-1]

    @property
    def final_tau(self) -> float:
        return self.taus[-1]

    def at(self, t: float) -> np.ndarray:
        """Configuration at time ``t`` by linear interpolation between samples."""
        times = self.times
        if t <= times[0]:
            return self.configs[0]
        if t >= times[-1]:
            return self.configs[-1]
        k = int(np.searchsorted(times, t, side="right"))
        t0, t1 = times[k - 1], times[k]
        s = (t - t0) / (t1 - t0)
        return (1.0 - s) * self.configs[k - 1] + s * self.configs[k]

    def to_jsonl(self) -> str:
        lines = [
            json.dumps({"t": t, "tau": tv, "points": x.reshape(-1).tolist()})
            for t, x, tv in zip(self.times, self.configs, self.taus)
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str, d: int, status: str = "reached-target") -> "Trajectory":
        times, configs, taus = [], [], []
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            times.append(rec["t"])
            taus.append(rec["tau"])
            configs.append(np.asarray(rec["points"], dtype=float).reshape(-1, d))
        return cls(times, configs, taus, status)


def _stall_kind(domain, x, eps):
    # classify in the band the flow used, since that band is what stalled it
    try:
        return classify(domain, x, eps_act=eps).kind
    except AmbiguousClassificationError:
        return "ambiguous"


def ascend(domain: BoxDomain, config, target_tau: float, options: Optional[FlowOptions] = None) -> Trajectory:
    """Flow ``config`` until ``tau >= target_tau``, a balanced configuration, or the iteration cap.

    Raises
    ------
    IterationCapError
        Only with ``options.strict`` and an exhausted iteration budget.
    """
    opts = options or FlowOptions()
    x = np.array(check_inside(domain, config), dtype=float)
    L = domain.shortest_side()
    eps = opts.eps_act if opts.eps_act is not None else EPS_FLOW_REL * L
    h0 = opts.step0_rel * L
    h_min = opts.min_step_rel * L
    speed_floor = opts.speed_floor_rel * L
    t, cur = 0.0, tau(domain, x)
    traj = Trajectory([t], [x.copy()], [cur], "reached-target")
    if cur >= target_tau:
        return traj

    for _ in range(opts.max_iter):
        cert = ascent_direction(domain, x, eps_act=eps, margin_tol=opts.margin_tol)
        if cert is None:
            traj.status, traj.stall_kind = "stalled", _stall_kind(domain, x, eps)
            return traj
        v = cert.direction.reshape(x.shape)
        rate = cert.margin
        h = min(h0, max((target_tau - cur) / rate, h_min))
        while h >= h_min:
            y = x + h * v
            new = signed_tau(domain, y)
            if new - cur >= max(0.5 * rate, speed_floor) * h:
                break
            h *= 0.5
        else:
            traj.status, traj.stall_kind = "stalled", _stall_kind(domain, x, eps)
            return traj
        x, cur, t = y, new, t + h
        traj.times.append(t)
        traj.configs.append(x.copy())
        traj.taus.append(cur)
        traj.margins.append(rate)
        if cur >= target_tau:
            return traj

    traj.status = "hit-iteration-cap"
    if opts.strict:
        raise IterationCapError(f"flow did not reach tau={target_tau} in {opts.max_iter} steps")
    return traj


@dataclass
class RetractionReport:
    a: float
    b: float
    trajectories: list
    stalled: list
    domain: Optional[BoxDomain] = None

    @property
    def complete(self) -> bool:
        return not self.stalled

    def homotopy(self, index: int, s: float) -> np.ndarray:
        return retraction_homotopy(self.trajectories[index], self.a, self.b, s, self.domain)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "complete": self.complete,
            "stalled": self.stalled,
            "final_taus": [tr.final_tau for tr in self.trajectories],
            "statuses": [tr.status for tr in self.trajectories],
        }


def retract_level(domain: BoxDomain, configs, a: float, b: float, options: Optional[FlowOptions] = None,
                  n_jobs: int = 1, strict: bool = False) -> RetractionReport:
    """Flow every configuration of ``M^a`` into ``M^b``; inputs already in ``M^b`` stay put.

    Returns a report whose ``stalled`` list names the inputs that stopped
    below ``b``; with ``strict`` a nonempty list raises instead.
    """
    if not b > a:
        raise ParameterError("retraction needs b > a")
    configs = [np.asarray(c, dtype=float) for c in configs]
    for k, c in enumerate(configs):
        if tau(domain, c) < a - domain.abs_tol:
            raise ParameterError(f"input {k} has tau below a={a}")
    run = lambda c: ascend(domain, c, b, options)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            trajectories = list(pool.map(run, configs))
    else:
        trajectories = [run(c) for c in configs]
    stalled = [k for k, tr in enumerate(trajectories) if tr.final_tau < b]
    report = RetractionReport(a, b, trajectories, stalled, domain)
    if strict and stalled:
        raise PartialRetractionError(stalled, report)
    return report


def crossing_time(traj: Trajectory, c: float, tol: float = 1e-15, domain: Optional[BoxDomain] = None) -> float:
    """First time ``tau`` reaches ``c`` along ``traj``, clamped at zero.

    The crossing is bracketed between samples and refined by bisection on
    the linearly interpolated path. Without ``domain`` the interpolation is
    done on the sampled ``tau`` values instead of recomputing ``tau``.
    """
    taus = traj.taus
    slack = 1e-12 * max(1.0, abs(taus[-1]))
    if c > taus[-1] + slack or c < taus[0] - slack:
        raise ParameterError(f"level {c} outside the trajectory's tau range [{taus[0]}, {taus[-1]}]")
    if c <= taus[0]:
        return 0.0
    k = next(k for k, tv in enumerate(taus) if tv >= c)
    lo, hi = traj.times[k - 1], traj.times[k]
    if domain is None:
        t0, t1 = taus[k - 1], taus[k]
        return lo + (hi - lo) * (c - t0) / (t1 - t0)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if signed_tau(domain, traj.at(mid)) >= c:
            hi = mid
        else:
            lo = mid
    return hi


def retraction_homotopy(traj: Trajectory, a: float, b: float, s: float, domain: Optional[BoxDomain] = None):
    """Point ``H(x, s)`` of the deformation retraction of ``M^a`` onto ``M^b``.

    Pass ``domain`` for an exact level crossing; without it the crossing is
    interpolated from the sampled ``tau`` values and may miss the level by
    the curvature of ``tau`` within one step.
    """
    level = (1.0 - s) * a + s * b
    level = min(max(level, traj.taus[0]), traj.final_tau)
    return traj.at(crossing_time(traj, level, domain=domain))


def with_options(options: Optional[FlowOptions], **changes) -> FlowOptions:
    return replace(options or FlowOptions(), **changes)
