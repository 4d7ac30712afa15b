"""ABR end systems: rate pacer, RM cell insertion, windowed bursts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Optional

PERSISTENT = "persistent"
WINDOWED = "windowed"

# an ACR of zero still lets one forward RM cell out this often
KEEPALIVE_PERIOD = 0.1


@dataclass
class AbrSource:
    """One VC's source.

    ``acr`` is the allowed rate as seen at the source itself; the pacer
    works on ``pacer_acr``, which takes each new value ``offset`` seconds
    later (the pacer clock is shifted to the first switch, see the engine).
    """

    vc: Hashable
    pcr: float  # cells/s
    acr: float
    nrm: int = 32
    model: str = PERSISTENT
    start: float = 0.0
    window: int = 32  # cells in the next burst
    max_window: float = math.inf
    rtt: float = 0.0  # idle gap between bursts, s
    offset: float = 0.0

    def __post_init__(self):
        if self.pcr <= 0:
            raise ValueError("pcr must be > 0")
        if not 0 <= self.acr <= self.pcr:
            raise ValueError("acr must be in [0, pcr]")
        if self.nrm < 1:
            raise ValueError("nrm must be >= 1")
        if self.model not in (PERSISTENT, WINDOWED):
            raise ValueError(f"unknown source model {self.model!r}")
        self.pacer_acr = self.acr
        self.epoch = 0
        self.sent = 0
        self.last_emit = -math.inf
        self.burst_left = self.window if self.model == WINDOWED else 0
        self.burst_started = None
        self.persistent_since: Optional[float] = self.start if self.model == PERSISTENT else None

    def next_is_rm(self) -> bool:
        return self.sent % self.nrm == 0

    def gap(self) -> float:
        """Pacer spacing at the current ACR."""
        if self.pacer_acr <= 0:
            return KEEPALIVE_PERIOD
        return 1.0 / self.pacer_acr

    def rescheduled(self, now: float) -> float:
        """Next emission time after the pacer rate changed at ``now``."""
        t = self.last_emit + self.gap()
        floor = self.last_emit + 1.0 / self.pcr
        return max(t, floor, now)

    def on_emit(self, now: float) -> Optional[float]:
        """Account for one cell sent at ``now``.

        Returns the time a windowed source resumes after an idle gap, or
        ``None`` when the pacer simply continues.
        """
        self.sent += 1
        self.last_emit = now
        if self.model != WINDOWED or self.persistent_since is not None:
            return None
        if self.burst_started is None:
            self.burst_started = now
        self.burst_left -= 1
        if self.burst_left > 0:
            return None
        burst_length = now - self.burst_started
        if self.window >= self.max_window or burst_length >= self.rtt:
            # the window no longer limits the source
            self.persistent_since = now - self.offset
            return None
        self.window *= 2
        self.burst_left = self.window
        self.burst_started = None
        return now + self.rtt


def source_on_brm(src: AbrSource, er: float) -> float:
    """New ACR after a backward RM cell with explicit rate ``er`` arrives."""
    src.acr = min(max(er, 0.0), src.pcr)
    return src.acr
