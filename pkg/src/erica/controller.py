"""Per-output-port ERICA rate controller.

The controller is a plain state machine.  The host (a switch model or a
test) feeds it cell observations as they happen, closes the averaging
interval on a timer, and asks it to stamp backward RM cells.  Rates are in
cells/s, queue lengths in cells, times in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Hashable, Optional, Set

from .errors import InvalidParameterError

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class EricaParams:
    """Tunables of one ERICA port.  Defaults are the WAN settings."""

    delta: float = 0.1
    target_delay: float = 1.5e-3
    hyper_a: float = 1.15
    hyper_b: float = 1.0
    qdlf: float = 0.5
    decay_factor: float = 0.9
    alpha: float = 0.8
    averaging_interval: float = 5e-3
    activity_floor: float = 1.0
    use_queue_control: bool = True
    # constant fraction of ABR capacity used when queue control is off
    target_utilization: float = 1.0

    def __post_init__(self):
        checks = [
            (0 < self.delta < 1, "delta must be in (0, 1)"),
            (self.target_delay > 0, "target_delay must be > 0"),
            (self.hyper_a > 1, "hyper_a must be > 1"),
            (self.hyper_b >= 1, "hyper_b must be >= 1"),
            (0 < self.qdlf <= 1, "qdlf must be in (0, 1]"),
            (0 < self.decay_factor < 1, "decay_factor must be in (0, 1)"),
            (0 < self.alpha <= 1, "alpha must be in (0, 1]"),
            (self.averaging_interval > 0, "averaging_interval must be > 0"),
            (self.activity_floor >= 1, "activity_floor must be >= 1"),
            (0 < self.target_utilization <= 1, "target_utilization must be in (0, 1]"),
        ]
        bad = [msg for ok, msg in checks if not ok]
        if bad:
            raise InvalidParameterError("; ".join(bad))


def queue_control_fraction(q: float, q0: float, params: EricaParams) -> float:
    """Fraction of the ABR capacity offered to sources at queue length ``q``.

    Two rectangular hyperbolas meeting at ``(q0, 1)``: the ``b`` branch
    below the target queue, the ``a`` branch above it, the latter floored
    at ``qdlf``.
    """
    if q0 <= 0:
        raise InvalidParameterError(f"target queue length must be > 0, got {q0}")
    if q < 0:
        raise InvalidParameterError(f"queue length must be >= 0, got {q}")
    if q <= q0:
        b = params.hyper_b
        return b * q0 / ((b - 1.0) * q + q0)
    a = params.hyper_a
    return max(params.qdlf, a * q0 / ((a - 1.0) * q + q0))


@dataclass(frozen=True)
class RmCellView:
    vc: Hashable
    direction: str
    ccr: float
    er: float


@dataclass
class VcRecord:
    ccr: float = 0.0
    activity_level: float = 1.0
    er_this_interval: Optional[float] = None


@dataclass
class IntervalAccumulators:
    interval_length: float
    abr_cells_in: int = 0
    vbr_cells_out: int = 0
    seen_forward: Set[Hashable] = field(default_factory=set)
    seen_backward: Set[Hashable] = field(default_factory=set)

    def reset(self):
        self.abr_cells_in = 0
        self.vbr_cells_out = 0
        self.seen_forward = set()
        self.seen_backward = set()


@dataclass(frozen=True)
class IntervalOutputs:
    target_abr_capacity: float
    load_factor_z: float
    fair_share: float
    max_alloc_previous: float
    effective_n: float
    # boundary cases: capacity measured as zero, or no input load
    zero_capacity: bool = False
    zero_load: bool = False


class PortController:
    """ERICA state for one output port.

    ``link_rate`` is the raw link rate in cells/s; the ABR capacity is what
    is left of it after VBR service.
    """

    def __init__(self, link_rate: float, params: Optional[EricaParams] = None):
        if link_rate <= 0:
            raise InvalidParameterError(f"link_rate must be > 0, got {link_rate}")
        self.params = params or EricaParams()
        self.link_rate = float(link_rate)
        self.vcs: Dict[Hashable, VcRecord] = {}
        self.acc = IntervalAccumulators(self.params.averaging_interval)
        # None until the first interval closes; the first measurement seeds them
        self.averaged_abr_capacity: Optional[float] = None
        self.averaged_input_rate: Optional[float] = None
        self.queue_length = 0.0
        self.intervals_closed = 0

        target = self._fraction(0.0, self.link_rate) * self.link_rate
        self.current = IntervalOutputs(
            target_abr_capacity=target,
            load_factor_z=1.0,
            fair_share=target,
            max_alloc_previous=target,
            effective_n=1.0,
        )
        self.max_alloc_current = target
        self.max_alloc_previous = target

    # -- observation -----------------------------------------------------

    def _record(self, vc) -> VcRecord:
        rec = self.vcs.get(vc)
        if rec is None:
            rec = self.vcs[vc] = VcRecord()
        return rec

    def observe_cell(self, vc, direction: str = FORWARD) -> None:
        rec = self._record(vc)
        rec.activity_level = 1.0
        if direction == FORWARD:
            self.acc.abr_cells_in += 1
            self.acc.seen_forward.add(vc)
        elif direction == BACKWARD:
            self.acc.seen_backward.add(vc)
        else:
            raise ValueError(f"unknown direction {direction!r}")

    def observe_vbr_service(self, cells: int) -> None:
        if cells < 0:
            raise ValueError("cell count must be >= 0")
        self.acc.vbr_cells_out += cells

    def on_forward_rm(self, cell: RmCellView) -> None:
        """Record the CCR carried by a forward RM cell.

        The RM cell is itself an ABR cell on the forward path, so it is
        counted in the input rate like any data cell.
        """
        if cell.direction != FORWARD:
            raise ValueError("on_forward_rm needs a forward RM cell")
        self.observe_cell(cell.vc, FORWARD)
        self.vcs[cell.vc].ccr = max(0.0, float(cell.ccr))

    # -- interval boundary -----------------------------------------------

    def _fraction(self, queue_length: float, abr_capacity: float) -> float:
        p = self.params
        if not p.use_queue_control:
            return p.target_utilization
        q0 = p.target_delay * abr_capacity
        if q0 <= 0:
            return p.qdlf
        return queue_control_fraction(queue_length, q0, p)

    def _average(self, old: Optional[float], measured: float) -> float:
        if old is None:
            return measured
        a = self.params.alpha
        return a * measured + (1.0 - a) * old

    def target_queue(self) -> float:
        """Target queue length q0 in cells for the current capacity estimate."""
        cap = self.averaged_abr_capacity
        if cap is None:
            cap = self.link_rate
        return self.params.target_delay * cap

    def close_interval(self, queue_length: float, interval_length: Optional[float] = None) -> IntervalOutputs:
        p = self.params
        acc = self.acc
        length = acc.interval_length if interval_length is None else interval_length
        if length <= 0:
            raise InvalidParameterError("interval length must be > 0")

        vbr_rate = acc.vbr_cells_out / length
        measured_capacity = max(0.0, self.link_rate - vbr_rate)
        measured_input = acc.abr_cells_in / length
        self.averaged_abr_capacity = self._average(self.averaged_abr_capacity, measured_capacity)
        self.averaged_input_rate = self._average(self.averaged_input_rate, measured_input)
        self.queue_length = float(queue_length)

        capacity = self.averaged_abr_capacity
        load = self.averaged_input_rate
        if capacity > 0:
            target = self._fraction(self.queue_length, capacity) * capacity
        else:
            target = 0.0
        zero_capacity = target <= 0.0
        zero_load = load <= 0.0
        z = load / target if not (zero_capacity or zero_load) else 1.0

        effective_n = max(p.activity_floor, math.fsum(r.activity_level for r in self.vcs.values()))
        fair_share = target / effective_n

        self.max_alloc_previous = self.max_alloc_current
        self.max_alloc_current = fair_share
        self.current = IntervalOutputs(
            target_abr_capacity=target,
            load_factor_z=z,
            fair_share=fair_share,
            max_alloc_previous=self.max_alloc_previous,
            effective_n=effective_n,
            zero_capacity=zero_capacity,
            zero_load=zero_load,
        )

        seen = acc.seen_forward | acc.seen_backward
        decay = p.decay_factor
        for vc, rec in self.vcs.items():
            if vc not in seen:
                rec.activity_level *= decay
            rec.er_this_interval = None
        acc.reset()
        self.intervals_closed += 1
        return self.current

    # -- feedback ----------------------------------------------------------

    def compute_er(self, vc) -> float:
        """Explicit rate for ``vc``; at most one distinct value per interval."""
        rec = self._record(vc)
        if rec.er_this_interval is not None:
            return rec.er_this_interval
        out = self.current
        if out.zero_capacity:
            er = 0.0
        elif out.zero_load:
            er = out.fair_share
        else:
            z = out.load_factor_z
            fair_share = out.fair_share
            vc_share = rec.ccr / z
            if z > 1.0 + self.params.delta:
                er = max(fair_share, vc_share)
            else:
                er = max(self.max_alloc_previous, vc_share)
            if er > self.max_alloc_current:
                self.max_alloc_current = er
            # moderation: a source below the fair share may only climb to it
            if er > fair_share and rec.ccr < fair_share:
                er = fair_share
        rec.er_this_interval = er
        return er

    def on_backward_rm(self, cell: RmCellView) -> RmCellView:
        if cell.direction != BACKWARD:
            raise ValueError("on_backward_rm needs a backward RM cell")
        self.observe_cell(cell.vc, BACKWARD)
        er = self.compute_er(cell.vc)
        stamped = min(cell.er, er, self.current.target_abr_capacity)
        return replace(cell, er=stamped)
