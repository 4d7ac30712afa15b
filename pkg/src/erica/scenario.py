"""Scenario files: topology, sources, ERICA settings and run controls.

Grammar (one ``key = value`` per line, ``#`` starts a comment)::

    format_version = 1

    [link L1]              # unidirectional link, owned by node ``from``
    from = S1
    to = S2
    rate = 150             # Mbps
    delay = 5              # propagation, ms

    [switch S1]            # every link leaving S1 is an ERICA port
    delta = 0.1            # all keys optional, defaults shown in SWITCH_KEYS
    interval = 5           # ms
    queue_control = on     # off: fixed target_utilization instead of f(Q)

    [vc A1]
    route = A1.in L1 A1.out   # link ids, source host to destination host
    source = persistent       # or windowed
    pcr = 150                 # Mbps, defaults to the first link's rate

    [vbr V1]               # higher-priority background traffic
    route = L1
    trace = 0:0 50:93      # time_ms:rate_Mbps, piecewise constant
    period = 100           # ms, optional: repeat the trace

    [run]
    duration = 2.0         # s
    sample_period = 0.001  # s
    seed = 7

    [acceptance]           # optional pass/fail thresholds for a run
    converge_by = 0.4

Nodes named as a ``[switch]`` are switches; every other node is an end
system.  Routes must start and end at end systems and pass only through
switches.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .controller import EricaParams
from .errors import InvalidParameterError, ScenarioError
from .maxmin import MaxMinProblem, VcDemand
from .units import mbps_to_cells

FORMAT_VERSION = 1
SOURCE_MODELS = ("persistent", "windowed")


@dataclass(frozen=True)
class LinkSpec:
    id: str
    src: str
    dst: str
    rate: float  # Mbps
    delay: float  # ms


@dataclass(frozen=True)
class SwitchSpec:
    id: str
    delta: float = 0.1
    target_delay: float = 1.5  # ms
    hyper_a: float = 1.15
    hyper_b: float = 1.0
    qdlf: float = 0.5
    decay_factor: float = 0.9
    alpha: float = 0.8
    interval: float = 5.0  # ms
    queue_control: bool = True
    target_utilization: float = 1.0

    def params(self) -> EricaParams:
        return EricaParams(
            delta=self.delta,
            target_delay=self.target_delay / 1e3,
            hyper_a=self.hyper_a,
            hyper_b=self.hyper_b,
            qdlf=self.qdlf,
            decay_factor=self.decay_factor,
            alpha=self.alpha,
            averaging_interval=self.interval / 1e3,
            use_queue_control=self.queue_control,
            target_utilization=self.target_utilization,
        )


@dataclass(frozen=True)
class VcSpec:
    id: str
    route: Tuple[str, ...]
    source: str = "persistent"
    pcr: Optional[float] = None  # Mbps
    start: float = 0.0  # s
    nrm: int = 32
    window: int = 32  # cells, first burst of a windowed source
    rtt: Optional[float] = None  # ms, windowed idle period


@dataclass(frozen=True)
class VbrSpec:
    id: str
    route: Tuple[str, ...]
    trace: Tuple[Tuple[float, float], ...]  # (ms, Mbps)
    period: Optional[float] = None  # ms


@dataclass(frozen=True)
class RunSpec:
    duration: float  # s
    sample_period: float = 1e-3  # s
    seed: int = 0


@dataclass(frozen=True)
class AcceptanceSpec:
    converge_by: Optional[float] = None  # s
    converge_tolerance: float = 0.1
    max_queue: Optional[float] = None  # cells
    drain_by: Optional[float] = None  # s
    drain_queue: Optional[float] = None  # cells
    min_utilization: Optional[float] = None
    utilization_from: Optional[float] = None  # s
    min_fairness: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    links: Tuple[LinkSpec, ...]
    switches: Tuple[SwitchSpec, ...]
    vcs: Tuple[VcSpec, ...]
    run: RunSpec
    vbrs: Tuple[VbrSpec, ...] = ()
    acceptance: AcceptanceSpec = AcceptanceSpec()
    format_version: int = FORMAT_VERSION

    def link(self, link_id) -> LinkSpec:
        return self._links[link_id]

    @property
    def _links(self) -> Dict[str, LinkSpec]:
        return {l.id: l for l in self.links}

    @property
    def switch_ids(self):
        return {s.id for s in self.switches}

    def switch_for(self, link_id) -> Optional[SwitchSpec]:
        src = self._links[link_id].src
        for s in self.switches:
            if s.id == src:
                return s
        return None

    def pcr(self, vc: VcSpec) -> float:
        """Peak cell rate in Mbps, defaulting to the first link's rate."""
        return vc.pcr if vc.pcr is not None else self._links[vc.route[0]].rate

    def route_delay(self, vc: VcSpec) -> float:
        """One-way propagation delay in ms."""
        links = self._links
        return math.fsum(links[l].delay for l in vc.route)

    def to_maxmin_problem(self) -> MaxMinProblem:
        """Max-min problem in cells/s over the links the VCs use.

        A switch port run with a fixed target utilization contributes that
        fraction of its rate; queue-controlled ports settle at full rate.
        VBR traffic is not subtracted.
        """
        used = {l for vc in self.vcs for l in vc.route}
        links = {}
        for l in self.links:
            if l.id not in used:
                continue
            cap = mbps_to_cells(l.rate)
            sw = self.switch_for(l.id)
            if sw is not None and not sw.queue_control:
                cap *= sw.target_utilization
            links[l.id] = cap
        vcs = [VcDemand(vc.id, vc.route, mbps_to_cells(self.pcr(vc))) for vc in self.vcs]
        return MaxMinProblem(links, vcs)


# -- grammar tables ----------------------------------------------------------

_FLOAT = float


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text}")
    return int(value)


def _bool(text):
    t = text.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {text}")


def _route(text):
    parts = tuple(text.replace(",", " ").split())
    if not parts:
        raise ValueError("empty route")
    return parts


def _trace(text):
    points = []
    for item in text.replace(",", " ").split():
        if ":" not in item:
            raise ValueError(f"trace point {item!r} is not time_ms:rate_Mbps")
        t, r = item.split(":", 1)
        points.append((float(t), float(r)))
    if not points:
        raise ValueError("empty trace")
    return tuple(points)


def _fmt_float(x):
    return repr(float(x))


def _fmt_bool(x):
    return "on" if x else "off"


def _fmt_route(r):
    return " ".join(r)


def _fmt_trace(tr):
    return " ".join(f"{_fmt_float(t)}:{_fmt_float(r)}" for t, r in tr)


# key -> (field name, parser, formatter, required)
LINK_KEYS = {
    "from": ("src", str, str, True),
    "to": ("dst", str, str, True),
    "rate": ("rate", _FLOAT, _fmt_float, True),
    "delay": ("delay", _FLOAT, _fmt_float, True),
}
SWITCH_KEYS = {
    name: (name, _bool if name == "queue_control" else _FLOAT,
           _fmt_bool if name == "queue_control" else _fmt_float, False)
    for name in ("delta", "target_delay", "hyper_a", "hyper_b", "qdlf", "decay_factor",
                 "alpha", "interval", "queue_control", "target_utilization")
}
VC_KEYS = {
    "route": ("route", _route, _fmt_route, True),
    "source": ("source", str, str, False),
    "pcr": ("pcr", _FLOAT, _fmt_float, False),
    "start": ("start", _FLOAT, _fmt_float, False),
    "nrm": ("nrm", _int, str, False),
    "window": ("window", _int, str, False),
    "rtt": ("rtt", _FLOAT, _fmt_float, False),
}
VBR_KEYS = {
    "route": ("route", _route, _fmt_route, True),
    "trace": ("trace", _trace, _fmt_trace, True),
    "period": ("period", _FLOAT, _fmt_float, False),
}
RUN_KEYS = {
    "duration": ("duration", _FLOAT, _fmt_float, True),
    "sample_period": ("sample_period", _FLOAT, _fmt_float, False),
    "seed": ("seed", _int, str, False),
}
ACCEPTANCE_KEYS = {
    name: (name, _FLOAT, _fmt_float, False)
    for name in ("converge_by", "converge_tolerance", "max_queue", "drain_by", "drain_queue",
                 "min_utilization", "utilization_from", "min_fairness")
}

SECTIONS = {
    "link": (LINK_KEYS, True),
    "switch": (SWITCH_KEYS, True),
    "vc": (VC_KEYS, True),
    "vbr": (VBR_KEYS, True),
    "run": (RUN_KEYS, False),
    "acceptance": (ACCEPTANCE_KEYS, False),
}
_ORDER = ("link", "switch", "vc", "vbr", "run", "acceptance")

_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)(?:\s+([^\]\s]+))?\s*\]$")


@dataclass
class _Section:
    kind: str
    id: Optional[str]
    line: Optional[int]
    entries: Dict[str, Tuple[str, Optional[int]]] = field(default_factory=dict)


@dataclass
class _Raw:
    top: Dict[str, Tuple[str, Optional[int]]] = field(default_factory=dict)
    sections: List[_Section] = field(default_factory=list)


def _read_raw(text: str, issues) -> _Raw:
    raw = _Raw()
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            m = _HEADER.match(body)
            if not m:
                issues.append((lineno, f"malformed section header {body!r}"))
                current = _Section("?", None, lineno)
                continue
            kind, ident = m.group(1).lower(), m.group(2)
            if kind not in SECTIONS:
                issues.append((lineno, f"unknown section type {kind!r}; expected one of {', '.join(_ORDER)}"))
                current = _Section("?", None, lineno)
                continue
            needs_id = SECTIONS[kind][1]
            if needs_id and not ident:
                issues.append((lineno, f"[{kind}] section needs an id"))
            if not needs_id and ident:
                issues.append((lineno, f"[{kind}] section takes no id"))
            current = _Section(kind, ident, lineno)
            raw.sections.append(current)
            continue
        if "=" not in body:
            issues.append((lineno, f"expected 'key = value', got {body!r}"))
            continue
        key, value = (s.strip() for s in body.split("=", 1))
        target = raw.top if current is None else current.entries
        if key in target:
            issues.append((lineno, f"duplicate key {key!r}"))
        target[key] = (value, lineno)
    return raw


def _fill(section: _Section, keys, issues) -> Dict[str, object]:
    values = {}
    if section.kind == "?":
        return values
    label = f"[{section.kind}{' ' + section.id if section.id else ''}]"
    for key, (text, lineno) in section.entries.items():
        if key not in keys:
            issues.append((lineno, f"unknown key {key!r} in {label}; valid keys: {', '.join(keys)}"))
            continue
        fname, parse_fn, _, _ = keys[key]
        try:
            values[fname] = parse_fn(text)
        except ValueError as exc:
            issues.append((lineno, f"bad value for {key!r} in {label}: {exc}"))
    for key, (fname, _, _, required) in keys.items():
        if required and fname not in values and key not in section.entries:
            issues.append((section.line, f"{label} is missing required key {key!r}"))
    return values


def _build(raw: _Raw) -> Scenario:
    issues: List[Tuple[Optional[int], str]] = list(getattr(raw, "issues", []))
    version_text = raw.top.get("format_version")
    for key, (_, lineno) in raw.top.items():
        if key != "format_version":
            issues.append((lineno, f"unknown top-level key {key!r}; only format_version is allowed"))
    version = None
    if version_text is None:
        issues.append((None, "missing format_version"))
    else:
        try:
            version = _int(version_text[0])
        except ValueError:
            issues.append((version_text[1], f"bad format_version {version_text[0]!r}"))
        else:
            if version != FORMAT_VERSION:
                issues.append((version_text[1], f"unsupported format_version {version}"))

    links, switches, vcs, vbrs = [], [], [], []
    run = None
    acceptance = AcceptanceSpec()
    lines: Dict[Tuple[str, str], Optional[int]] = {}
    key_lines: Dict[Tuple[str, str, str], Optional[int]] = {}
    seen_ids: Dict[Tuple[str, str], int] = {}
    singletons = set()
    for sec in raw.sections:
        keys = SECTIONS[sec.kind][0]
        values = _fill(sec, keys, issues)
        if sec.id is not None:
            if (sec.kind, sec.id) in seen_ids:
                issues.append((sec.line, f"duplicate {sec.kind} id {sec.id!r}"))
                continue
            seen_ids[(sec.kind, sec.id)] = sec.line
            lines[(sec.kind, sec.id)] = sec.line
            for key, (_, ln) in sec.entries.items():
                key_lines[(sec.kind, sec.id, key)] = ln
        elif sec.kind in singletons:
            issues.append((sec.line, f"duplicate [{sec.kind}] section"))
            continue
        else:
            singletons.add(sec.kind)
        if any(r for r in keys.values() if r[3] and r[0] not in values):
            continue
        try:
            if sec.kind == "link":
                links.append(LinkSpec(sec.id, **values))
            elif sec.kind == "switch":
                switches.append(SwitchSpec(sec.id, **values))
            elif sec.kind == "vc":
                vcs.append(VcSpec(sec.id, **values))
            elif sec.kind == "vbr":
                vbrs.append(VbrSpec(sec.id, **values))
            elif sec.kind == "run":
                run = RunSpec(**values)
            elif sec.kind == "acceptance":
                acceptance = AcceptanceSpec(**values)
        except TypeError as exc:  # pragma: no cover - guarded by key tables
            issues.append((sec.line, str(exc)))
    if run is None and "run" not in singletons:
        issues.append((None, "missing [run] section"))
    if issues:
        raise ScenarioError(issues)
    scenario = Scenario(tuple(links), tuple(switches), tuple(vcs), run, tuple(vbrs), acceptance,
                        version)
    validate(scenario, lines, key_lines)
    return scenario


def validate(s: Scenario, lines=None, key_lines=None) -> None:
    """Check cross-references and ranges; raise :class:`ScenarioError`."""
    lines = lines or {}
    key_lines = key_lines or {}
    issues = []

    def at(kind, ident, key=None):
        if key is not None and (kind, ident, key) in key_lines:
            return key_lines[(kind, ident, key)]
        return lines.get((kind, ident))

    if not s.links:
        issues.append((None, "no links declared"))
    if not s.vcs:
        issues.append((None, "no vcs declared"))
    links = {}
    for l in s.links:
        if l.id in links:
            issues.append((at("link", l.id), f"duplicate link id {l.id!r}"))
        links[l.id] = l
        if not l.rate > 0:
            issues.append((at("link", l.id, "rate"), f"link {l.id!r}: rate must be > 0"))
        if not l.delay >= 0:
            issues.append((at("link", l.id, "delay"), f"link {l.id!r}: delay must be >= 0"))
        if l.src == l.dst:
            issues.append((at("link", l.id), f"link {l.id!r} starts and ends at {l.src!r}"))
    switch_ids = set()
    for sw in s.switches:
        if sw.id in switch_ids:
            issues.append((at("switch", sw.id), f"duplicate switch id {sw.id!r}"))
        switch_ids.add(sw.id)
        try:
            sw.params()
        except InvalidParameterError as exc:
            issues.append((at("switch", sw.id), f"switch {sw.id!r}: {exc}"))

    def check_route(kind, ident, route):
        ok = True
        for l in route:
            if l not in links:
                issues.append((at(kind, ident, "route"), f"{kind} {ident!r}: route names undeclared link {l!r}"))
                ok = False
        if not ok:
            return False
        for a, b in zip(route, route[1:]):
            if links[a].dst != links[b].src:
                issues.append((at(kind, ident, "route"),
                               f"{kind} {ident!r}: links {a!r} and {b!r} are not connected"))
                ok = False
        return ok

    vc_ids = set()
    for vc in s.vcs:
        if vc.id in vc_ids:
            issues.append((at("vc", vc.id), f"duplicate vc id {vc.id!r}"))
        vc_ids.add(vc.id)
        if check_route("vc", vc.id, vc.route):
            first, last = links[vc.route[0]], links[vc.route[-1]]
            if first.src in switch_ids or last.dst in switch_ids:
                issues.append((at("vc", vc.id, "route"),
                               f"vc {vc.id!r}: route must start and end at end systems"))
            for l in vc.route[1:]:
                if links[l].src not in switch_ids:
                    issues.append((at("vc", vc.id, "route"),
                                   f"vc {vc.id!r}: node {links[l].src!r} inside the route is not a switch"))
            pcr = s.pcr(vc)
            if not pcr > 0:
                issues.append((at("vc", vc.id, "pcr"), f"vc {vc.id!r}: pcr must be > 0"))
        if vc.source not in SOURCE_MODELS:
            issues.append((at("vc", vc.id, "source"),
                           f"vc {vc.id!r}: source must be one of {', '.join(SOURCE_MODELS)}"))
        if vc.nrm < 1:
            issues.append((at("vc", vc.id, "nrm"), f"vc {vc.id!r}: nrm must be >= 1"))
        if vc.window < 1:
            issues.append((at("vc", vc.id, "window"), f"vc {vc.id!r}: window must be >= 1"))
        if vc.start < 0:
            issues.append((at("vc", vc.id, "start"), f"vc {vc.id!r}: start must be >= 0"))
        if vc.rtt is not None and not vc.rtt > 0:
            issues.append((at("vc", vc.id, "rtt"), f"vc {vc.id!r}: rtt must be > 0"))

    for vbr in s.vbrs:
        if check_route("vbr", vbr.id, vbr.route):
            limit = min(links[l].rate for l in vbr.route)
            for t, r in vbr.trace:
                if not 0 <= r <= limit:
                    issues.append((at("vbr", vbr.id, "trace"),
                                   f"vbr {vbr.id!r}: rate {r} Mbps outside [0, {limit}] of its route"))
        times = [t for t, _ in vbr.trace]
        if any(t < 0 for t in times) or times != sorted(times) or len(set(times)) != len(times):
            issues.append((at("vbr", vbr.id, "trace"), f"vbr {vbr.id!r}: trace times must be distinct, ascending, >= 0"))
        if vbr.period is not None and not vbr.period > max(times):
            issues.append((at("vbr", vbr.id, "period"), f"vbr {vbr.id!r}: period must exceed the last trace time"))

    run = s.run
    if run is not None:
        if not run.sample_period > 0:
            issues.append((at("run", None, "sample_period"), "run: sample_period must be > 0"))
        if not run.duration > run.sample_period:
            issues.append((at("run", None, "duration"), "run: duration must exceed sample_period"))
    if issues:
        raise ScenarioError(issues)


def parse(text: str) -> Scenario:
    issues: List = []
    raw = _read_raw(text, issues)
    raw.issues = issues
    return _build(raw)


def load(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# -- serialization --------------------------------------------------------------

def _section_lines(kind, ident, obj, keys, skip_defaults=True):
    out = [f"[{kind}{' ' + ident if ident is not None else ''}]"]
    defaults = {}
    for f in dataclasses.fields(obj):
        if f.default is not dataclasses.MISSING:
            defaults[f.name] = f.default
    for key, (fname, _, fmt, required) in keys.items():
        value = getattr(obj, fname)
        if value is None:
            continue
        if skip_defaults and not required and fname in defaults and defaults[fname] == value:
            continue
        out.append(f"{key} = {fmt(value)}")
    return out


def serialize(s: Scenario) -> str:
    out = [f"format_version = {s.format_version}", ""]
    for l in s.links:
        out += _section_lines("link", l.id, l, LINK_KEYS) + [""]
    for sw in s.switches:
        out += _section_lines("switch", sw.id, sw, SWITCH_KEYS) + [""]
    for vc in s.vcs:
        out += _section_lines("vc", vc.id, vc, VC_KEYS) + [""]
    for vbr in s.vbrs:
        out += _section_lines("vbr", vbr.id, vbr, VBR_KEYS) + [""]
    out += _section_lines("run", None, s.run, RUN_KEYS) + [""]
    acc = _section_lines("acceptance", None, s.acceptance, ACCEPTANCE_KEYS)
    if len(acc) > 1:
        out += acc + [""]
    return "\n".join(out)


# -- overrides ---------------------------------------------------------------

def _valid_override_keys(raw: _Raw) -> List[str]:
    keys = [f"erica.{k}" for k in SWITCH_KEYS]
    keys += [f"run.{k}" for k in RUN_KEYS]
    keys += [f"acceptance.{k}" for k in ACCEPTANCE_KEYS]
    for kind in ("link", "switch", "vc", "vbr"):
        ids = [sec.id for sec in raw.sections if sec.kind == kind]
        if ids:
            keys.append(f"{kind}.<id>.{{{','.join(SECTIONS[kind][0])}}} with <id> in {{{','.join(ids)}}}")
    return keys


def apply_overrides(s: Scenario, overrides: Sequence[str]) -> Scenario:
    """Apply ``section.key=value`` settings.

    ``erica.<key>`` sets a switch parameter on every switch; ``run.<key>``
    and ``acceptance.<key>`` address those sections; ``<kind>.<id>.<key>``
    addresses one link, switch, vc or vbr.
    """
    if not overrides:
        return s
    issues: List = []
    raw = _read_raw(serialize(s), issues)
    for item in overrides:
        if "=" not in item:
            issues.append((None, f"override {item!r} is not section.key=value"))
            continue
        path, value = (x.strip() for x in item.split("=", 1))
        parts = path.split(".")
        targets = []
        if len(parts) == 2 and parts[0] == "erica" and parts[1] in SWITCH_KEYS:
            targets = [sec for sec in raw.sections if sec.kind == "switch"]
        elif len(parts) == 2 and parts[0] in ("run", "acceptance") and parts[1] in SECTIONS[parts[0]][0]:
            targets = [sec for sec in raw.sections if sec.kind == parts[0]]
            if not targets:
                sec = _Section(parts[0], None, None)
                raw.sections.append(sec)
                targets = [sec]
        elif len(parts) == 3 and parts[0] in ("link", "switch", "vc", "vbr") and parts[2] in SECTIONS[parts[0]][0]:
            targets = [sec for sec in raw.sections if sec.kind == parts[0] and sec.id == parts[1]]
        if not targets:
            valid = _valid_override_keys(raw)
            issues.append((None, f"unknown override key {path!r}; valid keys: {', '.join(valid)}"))
            continue
        key = parts[-1]
        for sec in targets:
            sec.entries[key] = (value, None)
    if issues:
        raise ScenarioError(issues)
    raw.issues = []
    return _build(raw)


# -- built-in scenarios ------------------------------------------------------------

ACCESS_RATE = 150.0  # Mbps
HOP_DELAY = 5.0  # ms: 1000 km of fibre

# inter-switch links of the GFC-2 chain S1..S12: capacity in Mbps
GFC2_TRUNKS = (50.0, 90.0, 150.0, 130.0, 150.0, 95.0, 150.0, 150.0, 60.0, 130.0, 150.0)
# group -> (number of VCs, first trunk, last trunk), trunks numbered from 1
GFC2_GROUPS = {
    "A": (3, 2, 2),
    "B": (5, 1, 11),
    "C": (3, 4, 4),
    "D": (1, 8, 9),
    "E": (2, 6, 6),
    "F": (1, 2, 2),
    "G": (5, 1, 2),
    "H": (2, 10, 10),
}
# expected max-min rates per VC, Mbps
GFC2_TARGETS = {"A": 10.0, "B": 5.0, "C": 35.0, "D": 35.0, "E": 35.0, "F": 10.0, "G": 5.0, "H": 52.5}


def gfc2_group(vc_id: str) -> str:
    return vc_id.rstrip("0123456789")


def build_gfc2(duration: float = 2.0, seed: int = 7) -> Scenario:
    """Generic Fairness Configuration 2.

    A chain of twelve switches with 1000 km trunks, eight VC groups A-H
    whose bottlenecks give the classic per-VC rates A=10, B=5, C=35, D=35,
    E=35, F=10, G=5, H=52.5 Mbps.  Every VC has its own 150 Mbps, 1000 km
    entry and exit links.  Group B crosses the whole chain, giving the
    maximum round trip of 130 ms.
    """
    links = []
    for i, rate in enumerate(GFC2_TRUNKS, start=1):
        links.append(LinkSpec(f"L{i}", f"S{i}", f"S{i + 1}", rate, HOP_DELAY))
    vcs = []
    for group, (count, first, last) in GFC2_GROUPS.items():
        for k in range(1, count + 1):
            vc_id = f"{group}{k}"
            entry, exit_ = f"{vc_id}.in", f"{vc_id}.out"
            links.append(LinkSpec(entry, f"src.{vc_id}", f"S{first}", ACCESS_RATE, HOP_DELAY))
            links.append(LinkSpec(exit_, f"S{last + 1}", f"dst.{vc_id}", ACCESS_RATE, HOP_DELAY))
            route = (entry,) + tuple(f"L{i}" for i in range(first, last + 1)) + (exit_,)
            vcs.append(VcSpec(vc_id, route, pcr=ACCESS_RATE))
    switches = tuple(SwitchSpec(f"S{i}") for i in range(1, len(GFC2_TRUNKS) + 2))
    acceptance = AcceptanceSpec(
        converge_by=0.4,
        converge_tolerance=0.1,
        max_queue=30000.0,
        drain_by=0.8,
        drain_queue=1000.0,
        min_utilization=0.95,
        utilization_from=1.0,
    )
    scenario = Scenario(tuple(links), switches, tuple(vcs),
                        RunSpec(duration=duration, sample_period=1e-3, seed=seed),
                        acceptance=acceptance)
    validate(scenario)
    return scenario


VARCAP_RATE = 155.0  # Mbps


def build_varcap(n_sources: int = 10, vbr_profile="square", duration: float = 5.0,
                 seed: int = 0) -> Scenario:
    """Windowed sources plus high-priority VBR on one 155 Mbps bottleneck.

    ``vbr_profile`` is ``"square"`` (0 and 60 % of the link, 50 ms each,
    starting off), ``None``/``"off"``, or a sequence of ``(ms, Mbps)``
    points, optionally wrapped as ``(points, period_ms)``.
    """
    if n_sources < 1:
        raise ScenarioError([(None, "n_sources must be >= 1")])
    links = [LinkSpec("bottleneck", "S1", "dst", VARCAP_RATE, HOP_DELAY)]
    vcs = []
    for k in range(1, n_sources + 1):
        vc_id = f"V{k}"
        links.append(LinkSpec(f"{vc_id}.in", f"src.{vc_id}", "S1", VARCAP_RATE, HOP_DELAY))
        vcs.append(VcSpec(vc_id, (f"{vc_id}.in", "bottleneck"), source="windowed", pcr=VARCAP_RATE))
    vbrs = ()
    if isinstance(vbr_profile, str) and vbr_profile == "square":
        vbrs = (VbrSpec("vbr", ("bottleneck",), ((0.0, 0.0), (50.0, 0.6 * VARCAP_RATE)), 100.0),)
    elif vbr_profile is None or vbr_profile == "off":
        vbrs = ()
    else:
        period = None
        points = vbr_profile
        if len(vbr_profile) == 2 and not isinstance(vbr_profile[1], (tuple, list)):
            points, period = vbr_profile
        vbrs = (VbrSpec("vbr", ("bottleneck",), tuple((float(t), float(r)) for t, r in points),
                        None if period is None else float(period)),)
    acceptance = AcceptanceSpec(max_queue=4 * 30000.0, min_utilization=0.9, min_fairness=0.95)
    scenario = Scenario(tuple(links), (SwitchSpec("S1"),), tuple(vcs),
                        RunSpec(duration=duration, sample_period=1e-3, seed=seed),
                        vbrs=vbrs, acceptance=acceptance)
    validate(scenario)
    return scenario


def build_single(n_sources: int = 1, rate: float = 100.0, duration: float = 1.0,
                 seed: int = 0, queue_control: bool = True,
                 target_utilization: float = 1.0) -> Scenario:
    """Persistent sources sharing one switch port of ``rate`` Mbps."""
    links = [LinkSpec("bottleneck", "S1", "dst", rate, 1.0)]
    vcs = []
    for k in range(1, n_sources + 1):
        vc_id = f"V{k}"
        links.append(LinkSpec(f"{vc_id}.in", f"src.{vc_id}", "S1", ACCESS_RATE, 1.0))
        vcs.append(VcSpec(vc_id, (f"{vc_id}.in", "bottleneck"), pcr=ACCESS_RATE))
    sw = SwitchSpec("S1", queue_control=queue_control, target_utilization=target_utilization)
    scenario = Scenario(tuple(links), (sw,), tuple(vcs),
                        RunSpec(duration=duration, sample_period=1e-3, seed=seed))
    validate(scenario)
    return scenario


BUILTINS = {
    "gfc2": build_gfc2,
    "varcap": build_varcap,
    "single": build_single,
}


def resolve(name_or_path: str) -> Scenario:
    """A built-in scenario by name, or a scenario file by path."""
    if name_or_path in BUILTINS:
        return BUILTINS[name_or_path]()
    return load(name_or_path)
