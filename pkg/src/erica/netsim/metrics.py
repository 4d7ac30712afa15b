"""Sampled time series from a simulation run, CSV output and run reports."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..errors import UndefinedIndexError
from ..maxmin import fairness_index

ACR_CSV = "acr.csv"
QUEUE_CSV = "queue.csv"
UTIL_CSV = "utilization.csv"
REPORT_TXT = "report.txt"

ACR_HEADER = "time_s,vc_id,acr_cells_per_s"
QUEUE_HEADER = "time_s,port_id,queue_cells"
UTIL_HEADER = "time_s,port_id,utilization"

# fairness is taken over the mean ACR in this trailing fraction of the run
FINAL_WINDOW = 0.1


@dataclass
class MetricsLog:
    vc_ids: List[str]
    port_ids: List[str]
    oracle: Dict[str, float]  # max-min rate per VC, cells/s
    saturated_ports: List[str]
    sample_period: float
    acr_samples: List[Tuple[float, str, float]] = field(default_factory=list)
    queue_samples: List[Tuple[float, str, int]] = field(default_factory=list)
    util_samples: List[Tuple[float, str, float]] = field(default_factory=list)
    # (time, port, ABR cells sent, VBR cells sent, cell slots) per sample window
    port_counts: List[Tuple[float, str, int, int, float]] = field(default_factory=list)
    persistent_since: Dict[str, Optional[float]] = field(default_factory=dict)
    injected: Dict[str, int] = field(default_factory=dict)
    events: int = 0

    def acr_series(self, vc) -> Tuple[List[float], List[float]]:
        ts, xs = [], []
        for t, v, a in self.acr_samples:
            if v == vc:
                ts.append(t)
                xs.append(a)
        return ts, xs

    def queue_series(self, port) -> Tuple[List[float], List[int]]:
        ts, qs = [], []
        for t, p, q in self.queue_samples:
            if p == port:
                ts.append(t)
                qs.append(q)
        return ts, qs

    @property
    def end_time(self) -> float:
        return self.acr_samples[-1][0] if self.acr_samples else 0.0


def _g(x) -> str:
    return format(x, ".9g")


def write_csvs(log: MetricsLog, out_dir) -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    tables = (
        (ACR_CSV, ACR_HEADER, log.acr_samples),
        (QUEUE_CSV, QUEUE_HEADER, log.queue_samples),
        (UTIL_CSV, UTIL_HEADER, log.util_samples),
    )
    for name, header, rows in tables:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for t, ident, x in rows:
                fh.write(f"{_g(t)},{ident},{_g(x)}\n")
        paths.append(path)
    return paths


def convergence_time(ts, xs, target, tol=0.1) -> Optional[float]:
    """First sample time from which every later sample is within ``tol`` of ``target``."""
    band = tol * target
    t_conv = None
    for t, x in zip(ts, xs):
        if abs(x - target) <= band:
            if t_conv is None:
                t_conv = t
        else:
            t_conv = None
    return t_conv


def saturated_demand_start(log: MetricsLog) -> float:
    """Time from which every source is rate-limited rather than window-limited."""
    starts = list(log.persistent_since.values())
    if any(s is None for s in starts):
        return float("inf")
    return max(starts, default=0.0)


def leftover_utilization(log: MetricsLog, port, t_from: float, t_to: float = float("inf")) -> Optional[float]:
    """ABR cells sent over the capacity VBR left, in sample windows inside ``[t_from, t_to]``."""
    abr = 0
    room = 0.0
    period = log.sample_period
    for t, p, a, v, slots in log.port_counts:
        if p == port and t - period >= t_from - 1e-12 and t <= t_to + 1e-12:
            abr += a
            room += slots - v
    if room <= 0:
        return None
    return abr / room


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class RunReport:
    convergence_time_s: Dict[str, Optional[float]]
    max_queue_cells: Dict[str, int]
    mean_utilization: Dict[str, float]
    fairness_index: Optional[float]
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = ["[convergence_time_s]"]
        for vc, t in self.convergence_time_s.items():
            lines.append(f"{vc} = {'none' if t is None else _g(t)}")
        lines.append("")
        lines.append("[max_queue_cells]")
        for p, q in self.max_queue_cells.items():
            lines.append(f"{p} = {q}")
        lines.append("")
        lines.append("[mean_utilization]")
        for p, u in self.mean_utilization.items():
            lines.append(f"{p} = {_g(u)}")
        lines.append("")
        lines.append("[fairness]")
        fi = self.fairness_index
        lines.append(f"fairness_index = {'undefined' if fi is None else _g(fi)}")
        lines.append("")
        lines.append("[acceptance]")
        for c in self.checks:
            lines.append(f"{c.name} = {'pass' if c.passed else 'FAIL'}  # {c.detail}")
        lines.append(f"result = {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def final_fairness(log: MetricsLog) -> Optional[float]:
    end = log.end_time
    t_from = end * (1 - FINAL_WINDOW)
    ratios = []
    for vc in log.vc_ids:
        ts, xs = log.acr_series(vc)
        tail = [x for t, x in zip(ts, xs) if t >= t_from]
        ratios.append(sum(tail) / len(tail) / log.oracle[vc])
    try:
        return fairness_index(ratios)
    except UndefinedIndexError:
        return None


def summarize(log: MetricsLog, acceptance=None) -> RunReport:
    """Build the run report; ``acceptance`` is an :class:`AcceptanceSpec` or ``None``."""
    tol = acceptance.converge_tolerance if acceptance is not None else 0.1
    conv = {}
    for vc in log.vc_ids:
        ts, xs = log.acr_series(vc)
        conv[vc] = convergence_time(ts, xs, log.oracle[vc], tol)
    max_q = {p: 0 for p in log.port_ids}
    for _, p, q in log.queue_samples:
        if q > max_q[p]:
            max_q[p] = q
    sums = {p: [0.0, 0] for p in log.port_ids}
    for _, p, u in log.util_samples:
        sums[p][0] += u
        sums[p][1] += 1
    mean_u = {p: (s / n if n else 0.0) for p, (s, n) in sums.items()}
    report = RunReport(conv, max_q, mean_u, final_fairness(log))
    if acceptance is None:
        return report

    a = acceptance
    if a.converge_by is not None:
        late = [vc for vc, t in conv.items() if t is None or t > a.converge_by + 1e-12]
        worst = max((t for t in conv.values() if t is not None), default=None)
        detail = (f"all {len(conv)} VCs within {tol:g} of max-min rate by {a.converge_by:g} s"
                  if not late else f"{len(late)} late: {', '.join(late[:6])}{' ...' if len(late) > 6 else ''}")
        if worst is not None:
            detail += f"; latest sustained entry {worst:.4g} s"
        report.checks.append(Check("converge_by", not late, detail))
    if a.max_queue is not None:
        peak = max(max_q.values(), default=0)
        report.checks.append(Check("max_queue", peak < a.max_queue,
                                   f"peak ABR queue {peak} cells, bound {a.max_queue:g}"))
    if a.drain_by is not None:
        limit = a.drain_queue if a.drain_queue is not None else 0.0
        late_q = max((q for t, _, q in log.queue_samples if t >= a.drain_by), default=0)
        report.checks.append(Check("drain_by", late_q <= limit,
                                   f"largest ABR queue after {a.drain_by:g} s is {late_q} cells, limit {limit:g}"))
    if a.min_utilization is not None:
        t_from = a.utilization_from if a.utilization_from is not None else saturated_demand_start(log)
        worst_u, where = None, None
        for p in log.saturated_ports:
            u = leftover_utilization(log, p, t_from)
            if u is not None and (worst_u is None or u < worst_u):
                worst_u, where = u, p
        ok = worst_u is not None and worst_u >= a.min_utilization
        detail = ("no saturated-demand window" if worst_u is None else
                  f"lowest {worst_u:.4f} at {where} from {t_from:.3g} s, need {a.min_utilization:g}")
        report.checks.append(Check("min_utilization", ok, detail))
    if a.min_fairness is not None:
        fi = report.fairness_index
        ok = fi is not None and fi >= a.min_fairness
        report.checks.append(Check("min_fairness", ok,
                                   f"fairness index {'undefined' if fi is None else format(fi, '.5f')}, need {a.min_fairness:g}"))
    return report
