"""Cell-level discrete-event simulation of an ABR network.

Event mechanics, in short:

* A data or forward RM cell is one heap event per switch hop.  When it
  arrives at an output port its departure time is fixed right away (see
  :class:`~erica.netsim.port.OutputPort`), so the next event is simply its
  arrival downstream.
* Backward RM cells travel on an uncongested reverse path: pure
  propagation, with one event at each switch that stamps them.
* A source whose access link carries only its own traffic never queues
  there, so that hop is folded into the source: its pacer runs on a clock
  shifted by the access link's transmit plus propagation time and emits
  straight into the first switch.  A new ACR learnt at the source at time
  ``s`` reaches the pacer at ``s + offset``.
* Data cells are not objects; only RM cells are.  Cells leaving the last
  hop are kept in a per-VC list of delivery times and counted lazily.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from typing import Dict, List, Optional

import numpy as np

from ..controller import BACKWARD, FORWARD, PortController, RmCellView
from ..errors import InvalidParameterError
from ..maxmin import solve
from ..scenario import Scenario, validate
from ..units import mbps_to_cells
from .metrics import MetricsLog
from .port import FRM, Cell, OutputPort, VbrStream, destination_turnaround
from .sources import PERSISTENT, AbrSource, source_on_brm

EMIT, ARRIVE, BRM_STAMP, BRM_SOURCE, PACER_UPDATE, INTERVAL, SAMPLE = range(7)


class Simulator:
    def __init__(self, scenario: Scenario, seed: Optional[int] = None):
        validate(scenario)
        self.scenario = scenario
        self.seed = scenario.run.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        self.now = 0.0
        self._heap: List = []
        self._seq = itertools.count()
        self.events = 0

        switch_ids = scenario.switch_ids
        params = {sw.id: sw.params() for sw in scenario.switches}
        self.ports: Dict[str, OutputPort] = {}
        for link in scenario.links:
            rate = mbps_to_cells(link.rate)
            ctrl = PortController(rate, params[link.src]) if link.src in switch_ids else None
            self.ports[link.id] = OutputPort(link.id, rate, link.delay / 1e3, ctrl)
        self.switch_ports = [p for p in self.ports.values() if p.controller is not None]

        users: Dict[str, int] = {}
        for vc in scenario.vcs:
            for l in vc.route:
                users[l] = users.get(l, 0) + 1
        for vbr in scenario.vbrs:
            for l in vbr.route:
                users[l] = users.get(l, 0) + 1

        self.vc_ids = [vc.id for vc in scenario.vcs]
        self.hops: List[tuple] = []
        self.first_hop: List[int] = []
        self.sources: List[AbrSource] = []
        for vc in scenario.vcs:
            hops = tuple(self.ports[l] for l in vc.route)
            pcr = mbps_to_cells(scenario.pcr(vc))
            entry = hops[0]
            if users[vc.route[0]] == 1 and pcr <= entry.link_rate * (1 + 1e-12):
                first, offset = 1, entry.svc + entry.prop_delay
            else:
                first, offset = 0, 0.0
            if vc.rtt is not None:
                rtt = vc.rtt / 1e3
            else:
                rtt = 2.0 * scenario.route_delay(vc) / 1e3
            acr = pcr * (1.0 - self.rng.random())
            src = AbrSource(vc.id, pcr, acr, nrm=vc.nrm, model=vc.source, start=vc.start,
                            window=vc.window, max_window=pcr * rtt, rtt=rtt, offset=offset)
            src.resume_at = vc.start + offset
            self.hops.append(hops)
            self.first_hop.append(first)
            self.sources.append(src)

        for vbr in scenario.vbrs:
            pieces = [(t / 1e3, mbps_to_cells(r)) for t, r in vbr.trace]
            period = None if vbr.period is None else vbr.period / 1e3
            offset = 0.0
            for l in vbr.route:
                port = self.ports[l]
                port.add_vbr(VbrStream(pieces, offset=offset, period=period))
                offset += port.svc + port.prop_delay

        self.injected = [0] * len(self.sources)
        self.delivered = [0] * len(self.sources)
        self.exits = [deque() for _ in self.sources]
        self.brm_received = [0] * len(self.sources)

        problem = scenario.to_maxmin_problem()
        alloc = solve(problem)
        self.oracle = dict(alloc.rates)
        loads = {l: 0.0 for l in problem.links}
        for vc in problem.vcs:
            for l in vc.route:
                loads[l] += alloc.rates[vc.id]
        self.saturated = sorted(l for l, load in loads.items()
                                if l in self.ports and self.ports[l].controller is not None
                                and load >= problem.links[l] * (1 - 1e-9))
        self.log: Optional[MetricsLog] = None

    # -- scheduling --------------------------------------------------------

    def _push(self, t, code, *args):
        heapq.heappush(self._heap, (t, next(self._seq), code) + args)

    def _schedule_emit(self, i, t):
        src = self.sources[i]
        src.epoch += 1
        self._push(t, EMIT, i, src.epoch)

    # -- cell movement ---------------------------------------------------------

    def _arrive(self, i, hop, t, cell):
        hops = self.hops[i]
        port = hops[hop]
        ctrl = port.controller
        if ctrl is not None:
            if cell is None:
                ctrl.observe_cell(self.vc_ids[i], FORWARD)
            else:
                ctrl.on_forward_rm(RmCellView(cell.vc, FORWARD, cell.ccr, cell.er))
        at = port.abr_arrival(t) + port.prop_delay
        if hop + 1 < len(hops):
            self._push(at, ARRIVE, i, hop + 1, cell)
            return
        self.exits[i].append(at)
        if cell is not None:
            self._backward(i, len(hops) - 1, at, destination_turnaround(cell))

    def _backward(self, i, hop, t, cell):
        """Carry a backward RM cell from the far end of ``hop`` toward the source."""
        hops = self.hops[i]
        while True:
            t += hops[hop].prop_delay
            if hop == 0:
                self._push(t, BRM_SOURCE, i, cell)
                return
            if hops[hop].controller is not None:
                self._push(t, BRM_STAMP, i, hop, cell)
                return
            hop -= 1

    # -- main loop -----------------------------------------------------------

    def run(self, duration: Optional[float] = None) -> MetricsLog:
        run = self.scenario.run
        duration = run.duration if duration is None else float(duration)
        if not duration > 0:
            raise InvalidParameterError("duration must be > 0")
        period = run.sample_period
        log = self.log = MetricsLog(
            vc_ids=list(self.vc_ids),
            port_ids=[p.id for p in self.switch_ports],
            oracle=dict(self.oracle),
            saturated_ports=list(self.saturated),
            sample_period=period,
        )
        for i, src in enumerate(self.sources):
            self._schedule_emit(i, src.resume_at)
        for port in self.switch_ports:
            self._push(port.controller.params.averaging_interval, INTERVAL, port)
        self._sample(0.0, 0)
        n_samples = int(math.floor(duration / period + 1e-9))
        if n_samples >= 1:
            self._push(period, SAMPLE, 1)

        heap = self._heap
        pop = heapq.heappop
        sources = self.sources
        vc_ids = self.vc_ids
        while heap:
            ev = heap[0]
            t = ev[0]
            if t > duration:
                break
            pop(heap)
            self.now = t
            self.events += 1
            code = ev[2]
            if code == ARRIVE:
                self._arrive(ev[3], ev[4], t, ev[5])
            elif code == EMIT:
                i = ev[3]
                src = sources[i]
                if ev[4] != src.epoch:
                    continue
                cell = None
                if src.pacer_acr <= 0 or src.next_is_rm():
                    cell = Cell(vc_ids[i], FRM, src.pacer_acr, src.pcr)
                self.injected[i] += 1
                self._arrive(i, self.first_hop[i], t, cell)
                resume = src.on_emit(t)
                if resume is None:
                    self._push(t + src.gap(), EMIT, i, src.epoch)
                else:
                    src.resume_at = resume
                    self._push(resume, EMIT, i, src.epoch)
            elif code == BRM_STAMP:
                i, hop, cell = ev[3], ev[4], ev[5]
                ctrl = self.hops[i][hop].controller
                stamped = ctrl.on_backward_rm(RmCellView(cell.vc, BACKWARD, cell.ccr, cell.er))
                cell.er = stamped.er
                self._backward(i, hop - 1, t, cell)
            elif code == BRM_SOURCE:
                i, cell = ev[3], ev[4]
                src = sources[i]
                self.brm_received[i] += 1
                acr = source_on_brm(src, cell.er)
                self._push(t + src.offset, PACER_UPDATE, i, acr)
            elif code == PACER_UPDATE:
                i, acr = ev[3], ev[4]
                src = sources[i]
                if acr == src.pacer_acr:
                    continue
                src.pacer_acr = acr
                nxt = max(src.rescheduled(t), src.resume_at)
                self._schedule_emit(i, nxt)
            elif code == INTERVAL:
                port = ev[3]
                port.sync(t)
                ctrl = port.controller
                ctrl.observe_vbr_service(port.vbr_departed - getattr(port, "_vbr_at_close", 0))
                port._vbr_at_close = port.vbr_departed
                ctrl.close_interval(port.abr_queue_length())
                self._push(t + ctrl.params.averaging_interval, INTERVAL, port)
            elif code == SAMPLE:
                k = ev[3]
                self._sample(t, k)
                if k < n_samples:
                    self._push((k + 1) * period, SAMPLE, k + 1)
        self.now = duration
        for i, src in enumerate(sources):
            log.persistent_since[vc_ids[i]] = src.persistent_since
        log.injected = dict(zip(vc_ids, self.injected))
        log.events = self.events
        return log

    def _sample(self, t, k):
        log = self.log
        if k == 0:
            for port in self.switch_ports:
                port._sampled = (0, 0)
            return
        for i, src in enumerate(self.sources):
            log.acr_samples.append((t, self.vc_ids[i], src.acr))
            ex = self.exits[i]
            while ex and ex[0] <= t:
                ex.popleft()
                self.delivered[i] += 1
        period = self.scenario.run.sample_period
        for port in self.switch_ports:
            port.sync(t)
            abr0, vbr0 = port._sampled
            abr = port.abr_departed - abr0
            vbr = port.vbr_departed - vbr0
            port._sampled = (port.abr_departed, port.vbr_departed)
            slots = port.link_rate * period
            log.queue_samples.append((t, port.id, port.abr_queue_length()))
            log.util_samples.append((t, port.id, (abr + vbr) / slots))
            log.port_counts.append((t, port.id, abr, vbr, slots))

    def conservation(self):
        """Cell accounting at the current instant.

        Every injected cell is in exactly one place: delivered, on its way
        to its next hop (a pending arrival, whether still queued upstream
        or propagating), or committed to the last hop and not yet out.
        """
        t = self.now
        pending = sum(1 for ev in self._heap if ev[2] == ARRIVE)
        exiting = 0
        delivered = 0
        for i, ex in enumerate(self.exits):
            late = sum(1 for x in ex if x > t)
            exiting += late
            delivered += self.delivered[i] + len(ex) - late
        return {
            "injected": sum(self.injected),
            "delivered": delivered,
            "in_network": pending + exiting,
        }


def run(scenario: Scenario, duration: Optional[float] = None, seed: Optional[int] = None) -> MetricsLog:
    """Simulate ``scenario`` and return its metrics log."""
    return Simulator(scenario, seed).run(duration)
