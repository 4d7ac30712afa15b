import math

import pytest
from hypothesis import given, settings, strategies as st

from erica.netsim.port import (
    BRM,
    DATA,
    FRM,
    VBR,
    Cell,
    OutputPort,
    VbrStream,
    destination_turnaround,
    port_dequeue,
)
from erica.netsim.sources import KEEPALIVE_PERIOD, WINDOWED, AbrSource, source_on_brm


def test_cell_rm_fields_only_on_rm_cells():
    Cell("v", FRM, 1.0, 2.0)
    Cell("v")
    with pytest.raises(ValueError):
        Cell("v", FRM)
    with pytest.raises(ValueError):
        Cell("v", DATA, 1.0, 2.0)
    assert Cell("v").size == 53


def test_turnaround_copies_fields():
    b = destination_turnaround(Cell("v", FRM, 40.0, 150.0))
    assert (b.kind, b.ccr, b.er) == (BRM, 40.0, 150.0)
    reduced = destination_turnaround(Cell("v", FRM, 40.0, 12.5))
    assert reduced.er == 12.5
    with pytest.raises(ValueError):
        destination_turnaround(Cell("v", BRM, 1.0, 1.0))


def test_dequeue_priority_and_idle():
    port = OutputPort("p", 100.0, 0.0)
    assert port_dequeue(port, 0.0) is None
    port.enqueue(Cell("a"), 0.0)
    port.enqueue(Cell("bg", VBR), 0.0)
    assert port_dequeue(port, 0.0).kind == VBR
    with pytest.raises(ValueError):
        port_dequeue(port, 0.001)
    assert port_dequeue(port, 0.01).vc == "a"
    assert port.next_tx_time == pytest.approx(0.02)


def test_vbr_stream_square_wave_counts():
    # 1000 cells/s for 50 ms, off 50 ms, repeating
    s = VbrStream([(0.0, 1000.0), (0.05, 0.0)], period=0.1, until=0.3)
    times = []
    while (t := s.next()) != math.inf:
        times.append(t)
    assert len(times) == 150
    assert all((t % 0.1) < 0.05 + 1e-12 for t in times)


def test_vbr_stream_offset():
    s = VbrStream([(0.0, 10.0)], offset=1.0, until=1.25)
    assert [s.next() for _ in range(4)] == [1.0, 1.1, 1.2, math.inf]


def reference_departures(rate, abr_times, vbr_times):
    port = OutputPort("ref", rate, 0.0)
    arrivals = sorted([(t, 1, "abr") for t in abr_times] + [(t, 0, "vbr") for t in vbr_times])
    abr_out, vbr_out = [], []
    now, i = 0.0, 0
    while i < len(arrivals) or port.abr_queue or port.vbr_queue:
        while i < len(arrivals) and arrivals[i][0] <= now:
            kind = VBR if arrivals[i][2] == "vbr" else DATA
            port.enqueue(Cell("x", kind), arrivals[i][0])
            i += 1
        cell = port_dequeue(port, now)
        if cell is None:
            now = arrivals[i][0]
            continue
        (vbr_out if cell.kind == VBR else abr_out).append(port.next_tx_time)
        now = port.next_tx_time
    return abr_out, vbr_out


@settings(max_examples=200, deadline=None)
@given(
    gaps=st.lists(st.floats(0.0, 3.0), min_size=1, max_size=60),
    vbr_rate=st.sampled_from([0.0, 0.2, 0.5, 0.8]),
    vbr_start=st.floats(0.0, 20.0),
)
def test_fast_path_matches_reference(gaps, vbr_rate, vbr_start):
    rate = 1.0  # one cell per time unit
    abr_times = []
    t = 0.0
    for g in gaps:
        t += g
        abr_times.append(t)
    horizon = t + 200.0
    pieces = [(0.0, 0.0), (vbr_start, vbr_rate)] if vbr_start > 0 else [(0.0, vbr_rate)]
    port = OutputPort("fast", rate, 0.0)
    port.add_vbr(VbrStream(pieces, until=horizon))
    fast = [port.abr_arrival(a) for a in abr_times]
    port.sync(horizon * 2)
    vbr_stream = VbrStream(pieces, until=horizon)
    vbr_times = []
    while (v := vbr_stream.next()) != math.inf:
        vbr_times.append(v)
    ref_abr, ref_vbr = reference_departures(rate, abr_times, vbr_times)
    assert fast == pytest.approx(ref_abr, abs=1e-9)
    assert port.vbr_departed == len(ref_vbr)
    assert port.abr_departed == len(abr_times)
    assert port.abr_queue_length() == 0


def test_sync_tracks_queue_length():
    port = OutputPort("p", 10.0, 0.0)
    for _ in range(5):
        port.abr_arrival(0.0)
    port.sync(0.25)
    assert port.abr_departed == 2
    assert port.abr_queue_length() == 3


# -- sources ---------------------------------------------------------------


@pytest.mark.parametrize("er,expected", [(200.0, 150.0), (50.0, 50.0), (0.0, 0.0)])
def test_source_on_brm(er, expected):
    src = AbrSource("v", pcr=150.0, acr=10.0)
    assert source_on_brm(src, er) == expected
    assert src.acr == expected


def test_every_nrm_th_cell_is_rm():
    src = AbrSource("v", pcr=100.0, acr=100.0, nrm=4)
    pattern = []
    for k in range(12):
        pattern.append(src.next_is_rm())
        src.on_emit(k * 0.01)
    assert pattern == [True, False, False, False] * 3


def test_zero_rate_keeps_rm_schedule_alive():
    src = AbrSource("v", pcr=100.0, acr=0.0)
    assert src.gap() == KEEPALIVE_PERIOD


def test_reschedule_respects_pcr_spacing():
    src = AbrSource("v", pcr=100.0, acr=1.0)
    src.on_emit(1.0)
    src.pacer_acr = 100.0
    assert src.rescheduled(1.0) == pytest.approx(1.01)
    src.pacer_acr = 1.0
    assert src.rescheduled(1.5) == pytest.approx(2.0)


def test_windowed_source_doubles_then_turns_persistent():
    src = AbrSource("v", pcr=1000.0, acr=1000.0, model=WINDOWED, window=2, max_window=8, rtt=0.5)
    t = 0.0
    resumes = []
    for _ in range(2 + 4 + 8):
        r = src.on_emit(t)
        if r is not None:
            resumes.append(r)
            t = r
        else:
            t += 0.001
    assert len(resumes) == 2
    assert src.persistent_since is not None
    assert src.window == 8


def test_source_validation():
    with pytest.raises(ValueError):
        AbrSource("v", pcr=0.0, acr=0.0)
    with pytest.raises(ValueError):
        AbrSource("v", pcr=10.0, acr=11.0)
    with pytest.raises(ValueError):
        AbrSource("v", pcr=10.0, acr=1.0, model="bursty")
