"""Synchronous fluid model of core ERICA at a single bottleneck.

One call to :func:`run_cycle` is one averaging interval long enough for
every source to see feedback: each source's next rate is the explicit rate
computed from the current rates.  Queue control and the moderation step are
left out, as in the convergence argument this model is used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import InvalidStateError
from .maxmin import MaxMinProblem, VcDemand, fairness_index, is_maxmin, solve

# slack on the lower edge of the target band, relative
Z_SLACK = 1e-9


@dataclass(frozen=True)
class FluidState:
    rates: np.ndarray
    caps: np.ndarray
    capacity: float
    z: float
    max_alloc_previous: float
    cycle: int = 0

    @classmethod
    def initial(cls, rates, capacity, caps=None, max_alloc_previous=None):
        rates = np.asarray(rates, dtype=float)
        if capacity <= 0:
            raise InvalidStateError(f"capacity must be > 0, got {capacity}")
        if rates.ndim != 1 or rates.size == 0:
            raise InvalidStateError("need a non-empty vector of rates")
        if np.any(rates < 0):
            raise InvalidStateError("rates must be >= 0")
        if caps is None:
            caps = np.full(rates.shape, np.inf)
        else:
            caps = np.array([np.inf if c is None else c for c in caps], dtype=float)
        if caps.shape != rates.shape:
            raise InvalidStateError("caps and rates differ in length")
        rates = np.minimum(rates, caps)
        if max_alloc_previous is None:
            max_alloc_previous = max(capacity / rates.size, float(rates.max()))
        return cls(rates, caps, float(capacity), float(rates.sum() / capacity),
                   float(max_alloc_previous), 0)

    @property
    def n(self) -> int:
        return self.rates.size


def run_cycle(s: FluidState, delta: float) -> FluidState:
    C = s.capacity
    if not C > 0:
        raise InvalidStateError(f"capacity must be > 0, got {C}")
    fair_share = C / s.n
    z = s.z
    if z <= 0:
        # no load measured: everyone is offered the fair share
        alloc = np.full(s.rates.shape, fair_share)
    else:
        share = s.rates / z
        if z > 1.0 + delta:
            alloc = np.maximum(fair_share, share)
        else:
            alloc = np.maximum(s.max_alloc_previous, share)
        alloc = np.maximum(alloc, fair_share)
    rates = np.minimum(alloc, s.caps)
    return FluidState(
        rates=rates,
        caps=s.caps,
        capacity=C,
        z=float(rates.sum() / C),
        max_alloc_previous=max(fair_share, float(alloc.max())),
        cycle=s.cycle + 1,
    )


def single_bottleneck_problem(s: FluidState, capacity: Optional[float] = None) -> MaxMinProblem:
    cap = s.capacity if capacity is None else capacity
    vcs = [VcDemand(i, ("bottleneck",), None if math.isinf(c) else float(c))
           for i, c in enumerate(s.caps)]
    return MaxMinProblem({"bottleneck": cap}, vcs)


def _in_band(z: float, delta: float) -> bool:
    return 1.0 - Z_SLACK <= z <= 1.0 + delta + Z_SLACK


def in_target_region(s: FluidState, delta: float, p: Optional[MaxMinProblem] = None,
                     tol: float = 1e-3) -> bool:
    """Load factor in ``[1, 1 + delta]`` and rates max-min fair at that load.

    Sources at their cap are satisfied; every other source must carry the
    same rate (within ``tol``, relative) and no satisfied source may exceed
    it.  When ``p`` is given the bottleneck characterization is also checked
    with :func:`is_maxmin`, on ``p`` with its capacity set to the carried load.
    """
    if not _in_band(s.z, delta):
        return False
    rates = s.rates
    satisfied = rates >= s.caps * (1 - tol)
    free = rates[~satisfied]
    if free.size:
        top = free.max()
        if top - free.min() > tol * top:
            return False
        if np.any(rates[satisfied] > top * (1 + tol)):
            return False
    if p is not None:
        load = float(rates.sum())
        at_load = MaxMinProblem({l: load for l in p.links}, p.vcs)
        if not is_maxmin(at_load, dict(enumerate(rates.tolist())), tol):
            return False
    return True


def oracle_rates(s: FluidState) -> np.ndarray:
    alloc = solve(single_bottleneck_problem(s))
    return np.array([alloc.rates[i] for i in range(s.n)])


def matches_oracle(s: FluidState, tol: float = 1e-6) -> bool:
    expected = oracle_rates(s)
    return bool(np.all(np.abs(s.rates - expected) <= tol * np.maximum(expected, 1e-300)))


@dataclass
class FluidRun:
    converged: bool
    cycles: Optional[int]
    trace: List[FluidState] = field(default_factory=list)

    @property
    def final(self) -> FluidState:
        return self.trace[-1]


def run_until_converged(initial: FluidState, delta: float, max_cycles: int,
                        tol: float = 1e-3) -> FluidRun:
    """Iterate until two consecutive states lie in the target region.

    ``cycles`` is the index of the first state of that pair, so a state
    already in the region that stays there converges in 0 cycles.  Runs
    that exhaust ``max_cycles`` come back with ``converged=False``.
    """
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    trace = [initial]
    inside = [in_target_region(initial, delta, tol=tol)]
    s = initial
    for _ in range(max_cycles):
        s = run_cycle(s, delta)
        trace.append(s)
        inside.append(in_target_region(s, delta, tol=tol))
        if inside[-1] and inside[-2]:
            return FluidRun(True, len(trace) - 2, trace)
    return FluidRun(False, None, trace)


def underload_escape_bound(s: FluidState) -> Optional[int]:
    """Cycle budget for leaving underload, from the initial load factor.

    With ``eps = 1/z0 - 1`` the greedy rates grow by at least ``1 + eps``
    per cycle while underloaded, so ``z >= 1`` needs no more than
    ``ceil(log_{1+eps}((C - B) / S0))`` cycles after the initialization
    cycle, where ``B`` is the load of sources capped below the fair share
    and ``S0`` the initial greedy load.  ``None`` if ``z0 >= 1``.
    """
    if s.z >= 1 or s.z <= 0:
        return None
    C = s.capacity
    fair_share = C / s.n
    capped = s.caps < fair_share
    B = float(np.minimum(s.caps[capped], fair_share).sum())
    S0 = float(s.rates[~capped].sum())
    eps = 1.0 / s.z - 1.0
    if S0 <= 0:
        return 1
    ratio = (C - B) / S0
    if ratio <= 1:
        return 1
    return 1 + math.ceil(math.log(ratio) / math.log1p(eps))


@dataclass(frozen=True)
class StudyRun:
    n: int
    seed: int
    converged: bool
    cycles: Optional[int]
    matches_oracle: bool


def random_initial_state(n: int, seed: int, capacity: float = 100.0, caps=None) -> FluidState:
    """Rates drawn uniformly from (0, C] with a generator keyed on ``(seed, n)``."""
    rng = np.random.default_rng([seed, n])
    rates = capacity * (1.0 - rng.random(n))
    if caps is not None:
        caps = list(caps)[:n] + [None] * max(0, n - len(caps))
    return FluidState.initial(rates, capacity, caps)


def convergence_study(ns, seeds, delta: float = 0.1, caps=None, max_cycles: int = 100,
                      capacity: float = 100.0, seed_base: int = 0, oracle_tol: float = 1e-6) -> List[StudyRun]:
    """Run every ``(n, seed)`` pair from a random start; results ordered by n then seed.

    ``caps`` lists per-source caps as fractions of the capacity (``None`` for
    uncapped); sources past the end of the list are uncapped.
    """
    scaled = None if caps is None else [None if c is None else c * capacity for c in caps]
    out = []
    for n in ns:
        for k in range(seeds):
            seed = seed_base + k
            s0 = random_initial_state(n, seed, capacity, scaled)
            run = run_until_converged(s0, delta, max_cycles)
            ok = run.converged and matches_oracle(run.final, oracle_tol)
            out.append(StudyRun(n, seed, run.converged, run.cycles, ok))
    return out


def fit_log_scaling(ns, medians):
    """Least-squares ``cycles = c1 * log2(n) + c2``; returns ``(c1, c2, residuals)``."""
    x = np.log2(np.asarray(ns, dtype=float))
    y = np.asarray(medians, dtype=float)
    c1, c2 = np.polyfit(x, y, 1)
    return float(c1), float(c2), y - (c1 * x + c2)


def cycle_rows(run: FluidRun, delta: float):
    """Per-cycle rows: cycle, z, min_rate, max_rate, fairness_index, in_region."""
    rows = []
    for s in run.trace:
        rows.append((s.cycle, s.z, float(s.rates.min()), float(s.rates.max()),
                     fairness_index(s.rates.tolist()), in_target_region(s, delta)))
    return rows
