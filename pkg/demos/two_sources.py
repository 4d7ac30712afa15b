"""Two persistent sources on a 100 Mbps link, with background traffic taking 60 Mbps from 0.3 s to 0.6 s.

Prints each source's rate and the switch queue every 50 ms.
"""

import dataclasses

from erica.netsim.engine import Simulator
from erica.scenario import VbrSpec, build_single
from erica.units import cells_to_mbps

base = build_single(2, rate=100.0, duration=0.9, seed=1)
bg = VbrSpec("bg", ("bottleneck",), ((0.0, 0.0), (300.0, 60.0), (600.0, 0.0)))
log = Simulator(dataclasses.replace(base, vbrs=(bg,))).run()

t1, v1 = log.acr_series("V1")
_, v2 = log.acr_series("V2")
_, q = log.queue_series("bottleneck")
print("time_s  V1_mbps  V2_mbps  queue_cells")
for k in range(49, len(t1), 50):
    print(f"{t1[k]:6.3f}  {cells_to_mbps(v1[k]):7.2f}  {cells_to_mbps(v2[k]):7.2f}  {q[k]:11d}")
