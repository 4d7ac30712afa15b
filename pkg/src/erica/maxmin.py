"""Exact max-min fair allocation by progressive filling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence

from .errors import InvalidProblemError, UndefinedIndexError

SOURCE = "source"


@dataclass(frozen=True)
class VcDemand:
    id: Hashable
    route: tuple
    cap: Optional[float] = None


@dataclass
class MaxMinProblem:
    links: Dict[Hashable, float]
    vcs: List[VcDemand]

    def __init__(self, links, vcs: Iterable):
        if isinstance(links, Mapping):
            self.links = {k: float(v) for k, v in links.items()}
        else:
            self.links = {k: float(v) for k, v in links}
        self.vcs = []
        for vc in vcs:
            if not isinstance(vc, VcDemand):
                vc = VcDemand(*vc)
            self.vcs.append(VcDemand(vc.id, tuple(vc.route), None if vc.cap is None else float(vc.cap)))
        self.validate()

    def validate(self):
        problems = []
        for link, cap in self.links.items():
            if not cap > 0:
                problems.append(f"link {link!r} has non-positive capacity {cap}")
        seen = set()
        for vc in self.vcs:
            if vc.id in seen:
                problems.append(f"duplicate vc id {vc.id!r}")
            seen.add(vc.id)
            if not vc.route:
                problems.append(f"vc {vc.id!r} has an empty route")
            for link in vc.route:
                if link not in self.links:
                    problems.append(f"vc {vc.id!r} routed over undeclared link {link!r}")
            if vc.cap is not None and vc.cap < 0:
                problems.append(f"vc {vc.id!r} has negative cap")
        if problems:
            raise InvalidProblemError("; ".join(problems))

    def scaled(self, k: float) -> "MaxMinProblem":
        return MaxMinProblem(
            {l: c * k for l, c in self.links.items()},
            [VcDemand(v.id, v.route, None if v.cap is None else v.cap * k) for v in self.vcs],
        )


@dataclass
class Allocation:
    rates: Dict[Hashable, float] = field(default_factory=dict)
    bottleneck_link: Dict[Hashable, Hashable] = field(default_factory=dict)


def solve(p: MaxMinProblem, tol: float = 1e-9) -> Allocation:
    """Raise all unfrozen VCs together; freeze them as links fill or caps bind."""
    members = {link: [] for link in p.links}
    for vc in p.vcs:
        for link in set(vc.route):
            members[link].append(vc.id)
    caps = {vc.id: vc.cap for vc in p.vcs}
    frozen_load = {link: 0.0 for link in p.links}
    unfrozen_count = {link: len(m) for link, m in members.items()}
    unfrozen = {vc.id: vc for vc in p.vcs}
    alloc = Allocation()

    while unfrozen:
        shares = {
            link: (p.links[link] - frozen_load[link]) / unfrozen_count[link]
            for link in p.links
            if unfrozen_count[link] > 0
        }
        level = min(shares.values())
        capped = [c for vid in unfrozen if (c := caps[vid]) is not None]
        if capped:
            level = min(level, min(capped))
        level = max(level, 0.0)
        slack = tol * max(level, 1e-300)

        newly = {}
        for vid in unfrozen:
            c = caps[vid]
            if c is not None and c <= level + slack:
                newly[vid] = (c, SOURCE)
        for link in sorted(shares, key=lambda l: (shares[l], str(l))):
            if shares[link] <= level + slack:
                for vid in members[link]:
                    if vid in unfrozen and vid not in newly:
                        newly[vid] = (level, link)
        for vid, (rate, where) in newly.items():
            alloc.rates[vid] = rate
            alloc.bottleneck_link[vid] = where
            for link in set(unfrozen[vid].route):
                frozen_load[link] += rate
                unfrozen_count[link] -= 1
            del unfrozen[vid]

    alloc.rates = {vc.id: alloc.rates[vc.id] for vc in p.vcs}
    alloc.bottleneck_link = {vc.id: alloc.bottleneck_link[vc.id] for vc in p.vcs}
    return alloc


def link_loads(p: MaxMinProblem, rates: Mapping) -> Dict[Hashable, float]:
    loads = {link: 0.0 for link in p.links}
    for vc in p.vcs:
        for link in set(vc.route):
            loads[link] += rates[vc.id]
    return loads


def is_maxmin(p: MaxMinProblem, a, tol: float = 1e-9) -> bool:
    """Bottleneck check: every VC sits at its cap or is maximal on a full link.

    ``a`` may be an :class:`Allocation` or a plain mapping of rates.
    """
    rates = a.rates if isinstance(a, Allocation) else a
    if any(vc.id not in rates for vc in p.vcs):
        return False
    loads = link_loads(p, rates)
    for link, load in loads.items():
        if load > p.links[link] * (1 + tol):
            return False
    link_max = {link: 0.0 for link in p.links}
    for vc in p.vcs:
        r = rates[vc.id]
        if r < 0:
            return False
        if vc.cap is not None and r > vc.cap * (1 + tol):
            return False
        for link in vc.route:
            link_max[link] = max(link_max[link], r)
    for vc in p.vcs:
        r = rates[vc.id]
        if vc.cap is not None and r >= vc.cap * (1 - tol):
            continue
        ok = False
        for link in vc.route:
            cap = p.links[link]
            saturated = loads[link] >= cap * (1 - tol)
            if saturated and r >= link_max[link] - tol * cap:
                ok = True
                break
        if not ok:
            return False
    return True


def fairness_index(rates: Sequence[float]) -> float:
    """Jain's fairness index, (sum x)^2 / (n * sum x^2)."""
    xs = [float(x) for x in rates]
    if not xs:
        raise UndefinedIndexError("fairness index of an empty list")
    if any(x < 0 for x in xs):
        raise UndefinedIndexError("rates must be non-negative")
    sq = math.fsum(x * x for x in xs)
    if sq == 0:
        raise UndefinedIndexError("fairness index undefined when all rates are zero")
    return math.fsum(xs) ** 2 / (len(xs) * sq)
