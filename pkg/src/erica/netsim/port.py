"""Switch output port: two-class strict-priority FIFO feeding one link.

The simulator drives a port through :meth:`OutputPort.abr_arrival`, which
fixes an ABR cell's departure time the moment the cell arrives.  That is
exact here because service is deterministic (one cell time), ABR is served
FIFO, and the only traffic that can overtake a waiting ABR cell is VBR,
whose arrival times are known ahead from its trace.

:func:`port_dequeue` with :meth:`OutputPort.enqueue` is the plain
transmit-one-cell-at-a-time model of the same port.  Tests drive both with
the same arrivals and expect the same departures.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterator, List, Optional

from ..controller import PortController

DATA = "data"
FRM = "forward-RM"
BRM = "backward-RM"
RM_KINDS = (FRM, BRM)
VBR = "vbr"


@dataclass(slots=True)
class Cell:
    vc: Hashable
    kind: str = DATA
    ccr: Optional[float] = None
    er: Optional[float] = None

    size = 53

    def __post_init__(self):
        has_rm = self.ccr is not None and self.er is not None
        if (self.kind in RM_KINDS) != has_rm:
            raise ValueError("RM fields are required on RM cells and only there")


def destination_turnaround(cell: Cell) -> Cell:
    """Turn a forward RM cell into the backward RM cell sent to the source."""
    if cell.kind != FRM:
        raise ValueError("only forward RM cells are turned around")
    return Cell(cell.vc, BRM, cell.ccr, cell.er)


class VbrStream:
    """Arrival times of a piecewise-constant-rate cell stream.

    ``pieces`` is a list of ``(start_time, rate)`` in seconds and cells/s;
    each rate holds until the next start.  Within a piece cells are evenly
    spaced, starting at the piece boundary.  ``period`` repeats the whole
    schedule with that period (used for square waves).
    """

    def __init__(self, pieces, offset: float = 0.0, period: Optional[float] = None,
                 until: float = math.inf):
        self.pieces = sorted((float(t), float(r)) for t, r in pieces)
        self.offset = offset
        self.period = period
        self.until = until
        self._it = self._times()

    def _schedule(self):
        k = 0
        while True:
            base = 0.0 if self.period is None else k * self.period
            for i, (t, r) in enumerate(self.pieces):
                if i + 1 < len(self.pieces):
                    end = self.pieces[i + 1][0]
                elif self.period is not None:
                    end = self.period
                else:
                    end = math.inf
                yield base + t, base + end, r
            if self.period is None:
                return
            k += 1

    def _times(self) -> Iterator[float]:
        for start, end, rate in self._schedule():
            if start + self.offset > self.until:
                return
            if rate <= 0:
                continue
            gap = 1.0 / rate
            n = 0
            while True:
                t = start + n * gap
                if t >= end:
                    break
                t += self.offset
                if t > self.until:
                    return
                yield t
                n += 1

    def next(self) -> float:
        return next(self._it, math.inf)


class OutputPort:
    def __init__(self, port_id, link_rate: float, prop_delay: float,
                 controller: Optional[PortController] = None):
        self.id = port_id
        self.link_rate = float(link_rate)
        self.svc = 1.0 / self.link_rate
        self.prop_delay = float(prop_delay)
        self.controller = controller
        self.free_at = 0.0
        self.abr_deps = deque()
        self.vbr_deps = deque()
        self.abr_arrived = 0
        self.abr_departed = 0
        self.vbr_departed = 0
        self._vbr: List[VbrStream] = []
        self._vbr_heads: List[float] = []
        self.next_vbr = math.inf
        # explicit FIFOs for the transmit-driven reference model
        self.abr_queue = deque()
        self.vbr_queue = deque()
        self.next_tx_time = 0.0
        self.busy_cells = 0

    # -- VBR arrivals ------------------------------------------------------

    def add_vbr(self, stream: VbrStream):
        self._vbr.append(stream)
        self._vbr_heads.append(stream.next())
        self.next_vbr = min(self._vbr_heads)

    def _pop_vbr(self) -> float:
        heads = self._vbr_heads
        if len(heads) == 1:
            heads[0] = self._vbr[0].next()
            return heads[0]
        i = heads.index(min(heads))
        heads[i] = self._vbr[i].next()
        return min(heads)

    # -- fast path -----------------------------------------------------------

    def abr_arrival(self, t: float) -> float:
        """Commit an ABR cell arriving at ``t``; return its departure time."""
        svc = self.svc
        free = self.free_at
        start = t if t > free else free
        nv = self.next_vbr
        while nv <= start:
            vs = nv if nv > free else free
            free = vs + svc
            self.vbr_deps.append(free)
            nv = self._pop_vbr()
            start = t if t > free else free
        self.next_vbr = nv
        dep = start + svc
        self.free_at = dep
        self.abr_deps.append(dep)
        self.abr_arrived += 1
        return dep

    def sync(self, t: float):
        """Serve VBR arrivals up to ``t`` and retire cells gone by ``t``."""
        svc = self.svc
        free = self.free_at
        nv = self.next_vbr
        while nv <= t:
            vs = nv if nv > free else free
            free = vs + svc
            self.vbr_deps.append(free)
            nv = self._pop_vbr()
        self.next_vbr = nv
        self.free_at = free
        deps = self.abr_deps
        while deps and deps[0] <= t:
            deps.popleft()
            self.abr_departed += 1
        deps = self.vbr_deps
        while deps and deps[0] <= t:
            deps.popleft()
            self.vbr_departed += 1

    def abr_queue_length(self) -> int:
        """ABR cells arrived and not yet fully sent, as of the last sync."""
        return len(self.abr_deps)

    # -- reference model -------------------------------------------------------

    def enqueue(self, cell: Cell, now: float):
        (self.vbr_queue if cell.kind == VBR else self.abr_queue).append((now, cell))


def port_dequeue(port: OutputPort, now: float) -> Optional[Cell]:
    """Start sending the next cell if the link is idle at ``now``.

    VBR goes first; ABR only gets the leftover.  Returns ``None`` when both
    queues are empty.  ``port.next_tx_time`` becomes the time the link is
    free again.
    """
    if now < port.next_tx_time:
        raise ValueError("link is still busy")
    if port.vbr_queue:
        _, cell = port.vbr_queue.popleft()
    elif port.abr_queue:
        _, cell = port.abr_queue.popleft()
    else:
        return None
    port.next_tx_time = now + port.svc
    port.busy_cells += 1
    return cell
