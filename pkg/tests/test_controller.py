import math

import pytest
from hypothesis import given, strategies as st

from erica.controller import (
    BACKWARD,
    FORWARD,
    EricaParams,
    PortController,
    RmCellView,
    queue_control_fraction,
)
from erica.errors import InvalidParameterError

FIXED = EricaParams(use_queue_control=False)


def drive(ctrl, counts, length=0.01, queue=0.0, vbr=0):
    """Feed one interval's forward cells per VC and close it."""
    for vc, n in counts.items():
        for _ in range(n):
            ctrl.observe_cell(vc, FORWARD)
    if vbr:
        ctrl.observe_vbr_service(vbr)
    return ctrl.close_interval(queue, length)


def set_ccr(ctrl, vc, ccr):
    # bypass the input count so the interval measurement stays as driven
    ctrl._record(vc).ccr = ccr


def brm(ctrl, vc, er=1e12):
    return ctrl.on_backward_rm(RmCellView(vc, BACKWARD, 0.0, er)).er


# -- queue control ---------------------------------------------------------


def test_fraction_is_one_at_target_queue():
    p = EricaParams()
    assert queue_control_fraction(200.0, 200.0, p) == 1.0


def test_fraction_with_defaults_clamps_at_ten_times_q0():
    # 1.15 / (0.15 * 10 + 1) = 0.46 < qdlf
    assert queue_control_fraction(1000.0, 100.0, EricaParams()) == 0.5


def test_fraction_a_branch_value_by_hand():
    q0, q = 100.0, 200.0
    assert queue_control_fraction(q, q0, EricaParams()) == pytest.approx(1.15 * q0 / (0.15 * q + q0))


def test_fraction_b_branch_above_one_when_b_gt_one():
    p = EricaParams(hyper_b=1.05)
    assert queue_control_fraction(0.0, 100.0, p) == pytest.approx(1.05)
    assert queue_control_fraction(100.0, 100.0, p) == pytest.approx(1.0)


@pytest.mark.parametrize("q,q0", [(-1.0, 10.0), (1.0, 0.0), (1.0, -5.0)])
def test_fraction_rejects_bad_inputs(q, q0):
    with pytest.raises(InvalidParameterError):
        queue_control_fraction(q, q0, EricaParams())


@given(q0=st.floats(1e-3, 1e6), x=st.floats(0, 1e3), y=st.floats(0, 1e3))
def test_fraction_nonincreasing_and_floored(q0, x, y):
    p = EricaParams()
    lo, hi = sorted((x, y))
    f_lo = queue_control_fraction(lo * q0, q0, p)
    f_hi = queue_control_fraction(hi * q0, q0, p)
    assert f_hi <= f_lo + 1e-12
    assert f_hi >= p.qdlf


@pytest.mark.parametrize(
    "kwargs",
    [dict(delta=0), dict(delta=1.5), dict(hyper_a=1.0), dict(hyper_b=0.9), dict(qdlf=0),
     dict(decay_factor=1.0), dict(alpha=0), dict(averaging_interval=0), dict(target_delay=-1),
     dict(activity_floor=0.5), dict(target_utilization=1.2)],
)
def test_params_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        EricaParams(**kwargs)


# -- interval measurements -----------------------------------------------------


def test_interval_measures_rates_and_load_factor():
    c = PortController(10000.0, FIXED)
    out = drive(c, {"a": 30, "b": 20}, length=0.01)  # 5000 cells/s in
    assert c.averaged_abr_capacity == 10000.0
    assert c.averaged_input_rate == pytest.approx(5000.0)
    assert out.target_abr_capacity == 10000.0
    assert out.load_factor_z == pytest.approx(0.5)
    assert out.effective_n == 2.0
    assert out.fair_share == pytest.approx(5000.0)


def test_vbr_service_reduces_abr_capacity():
    c = PortController(10000.0, FIXED)
    out = drive(c, {"a": 10}, length=0.01, vbr=40)  # 4000 cells/s of VBR
    assert c.averaged_abr_capacity == pytest.approx(6000.0)
    assert out.target_abr_capacity == pytest.approx(6000.0)


def test_exponential_averaging_after_first_interval():
    c = PortController(10000.0, FIXED)
    drive(c, {"a": 100}, length=0.01)  # 10000
    drive(c, {"a": 50}, length=0.01)  # 5000
    assert c.averaged_input_rate == pytest.approx(0.8 * 5000 + 0.2 * 10000)


def test_target_uses_queue_control_with_current_queue():
    p = EricaParams()
    c = PortController(10000.0, p)
    q0 = p.target_delay * 10000.0
    out = drive(c, {"a": 10}, length=0.01, queue=4 * q0)
    f = 1.15 * q0 / (0.15 * 4 * q0 + q0)
    assert out.target_abr_capacity == pytest.approx(f * 10000.0)


def test_forward_rm_counts_as_input_and_sets_ccr():
    c = PortController(10000.0, FIXED)
    c.on_forward_rm(RmCellView("a", FORWARD, 1234.0, 9999.0))
    assert c.acc.abr_cells_in == 1
    assert c.vcs["a"].ccr == 1234.0


def test_backward_cells_mark_activity_without_counting_load():
    c = PortController(10000.0, FIXED)
    c.observe_cell("a", BACKWARD)
    assert c.acc.abr_cells_in == 0
    assert "a" in c.acc.seen_backward


def test_inactive_vc_activity_decays():
    c = PortController(10000.0, FIXED)
    drive(c, {"a": 10, "b": 10})
    out = drive(c, {"a": 10})
    # b still counted fully in this interval, then decayed
    assert out.effective_n == pytest.approx(2.0)
    out = drive(c, {"a": 10})
    assert out.effective_n == pytest.approx(1.0 + 0.9)
    out = drive(c, {"a": 10})
    assert out.effective_n == pytest.approx(1.0 + 0.81)


# -- explicit rate --------------------------------------------------------------


def overloaded_port():
    c = PortController(10000.0, FIXED)
    drive(c, {"a": 150, "b": 50}, length=0.01)  # 20000 in, z = 2
    set_ccr(c, "a", 15000.0)
    set_ccr(c, "b", 5000.0)
    return c


def test_overload_branch_uses_fair_share_or_vc_share():
    c = overloaded_port()
    assert c.current.load_factor_z == pytest.approx(2.0)
    assert brm(c, "a") == pytest.approx(7500.0)  # 15000 / 2
    assert brm(c, "b") == pytest.approx(5000.0)  # FairShare beats 2500


def test_band_branch_uses_max_alloc_previous():
    c = PortController(10000.0, FIXED)
    drive(c, {"a": 55, "b": 50}, length=0.01)  # z = 1.05
    set_ccr(c, "a", 5500.0)
    set_ccr(c, "b", 5000.0)
    # MaxAllocPrevious is still the initial fair share, the full target
    assert c.max_alloc_previous == 10000.0
    assert brm(c, "a") == pytest.approx(10000.0)
    assert c.max_alloc_current == pytest.approx(10000.0)


def test_underload_branch_scales_up_by_z():
    c = PortController(10000.0, FIXED)
    drive(c, {"a": 40}, length=0.01)  # z = 0.4
    drive(c, {"a": 40}, length=0.01)
    set_ccr(c, "a", 4000.0)
    c.max_alloc_previous = 0.0  # isolate VCShare
    assert brm(c, "a") == pytest.approx(10000.0)


def test_moderation_caps_slow_source_at_fair_share():
    c = PortController(10000.0, FIXED)
    drive(c, {"a": 30, "b": 30}, length=0.01)  # z = 0.6, FS = 5000
    set_ccr(c, "b", 1000.0)
    er = brm(c, "b")
    assert er == pytest.approx(5000.0)
    # MaxAllocCurrent saw the value before moderation
    assert c.max_alloc_current == pytest.approx(10000.0)


def test_er_computed_once_per_interval():
    c = overloaded_port()
    first = brm(c, "a")
    set_ccr(c, "a", 1.0)
    assert brm(c, "a") == first
    drive(c, {"a": 150, "b": 50}, length=0.01)
    assert brm(c, "a") != first


def test_stamp_never_raises_incoming_er():
    c = overloaded_port()
    assert brm(c, "a", er=100.0) == 100.0


def test_stamp_capped_by_target_capacity():
    c = PortController(10000.0, EricaParams(use_queue_control=False, target_utilization=0.9))
    drive(c, {"a": 10}, length=0.01)
    set_ccr(c, "a", 9000.0)
    assert brm(c, "a") <= 9000.0 + 1e-9


# -- boundary cases ---------------------------------------------------------------


def test_effective_n_floored_at_one():
    c = PortController(10000.0, FIXED)
    out = drive(c, {}, length=0.01)
    assert out.effective_n == 1.0
    assert out.fair_share == out.target_abr_capacity


def test_zero_capacity_gives_zero_er():
    c = PortController(10000.0, FIXED)
    out = drive(c, {"a": 10}, length=0.01, vbr=100)  # VBR took the whole link
    assert out.zero_capacity
    set_ccr(c, "a", 5000.0)
    assert brm(c, "a") == 0.0


def test_zero_load_gives_fair_share():
    c = PortController(10000.0, FIXED)
    c.observe_cell("a", BACKWARD)
    c.observe_cell("b", BACKWARD)
    out = drive(c, {}, length=0.01)
    assert out.zero_load
    assert brm(c, "a") == out.fair_share == 5000.0


def test_bad_link_rate_rejected():
    with pytest.raises(InvalidParameterError):
        PortController(0.0)


def test_direction_checks():
    c = PortController(100.0)
    with pytest.raises(ValueError):
        c.on_forward_rm(RmCellView("a", BACKWARD, 1.0, 1.0))
    with pytest.raises(ValueError):
        c.on_backward_rm(RmCellView("a", FORWARD, 1.0, 1.0))
    with pytest.raises(ValueError):
        c.observe_cell("a", "sideways")
