"""Max-min rates for the GFC-2 network, per VC group, with the link each group is held by."""

from erica.maxmin import solve
from erica.scenario import build_gfc2, gfc2_group
from erica.units import application_mbps, cells_to_mbps

scenario = build_gfc2()
alloc = solve(scenario.to_maxmin_problem())

seen = {}
for vc, rate in alloc.rates.items():
    g = gfc2_group(vc)
    seen.setdefault(g, (cells_to_mbps(rate), alloc.bottleneck_link[vc], 0))
    mbps, link, count = seen[g]
    seen[g] = (mbps, link, count + 1)

print("group  vcs  rate_mbps  application_mbps  bottleneck")
for g, (mbps, link, count) in sorted(seen.items()):
    print(f"{g:>5}  {count:>3}  {mbps:>9.2f}  {application_mbps(mbps):>16.2f}  {link}")
