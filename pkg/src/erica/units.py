"""Rate and size conversions between Mbps and ATM cells.

All rates inside the package are in cells per second.
"""

CELL_BYTES = 53
PAYLOAD_BYTES = 48
CELL_BITS = 8 * CELL_BYTES

# 1 Mbps = 10**6 / 424 cells/s
CELLS_PER_MBPS = 1e6 / CELL_BITS
APPLICATION_FACTOR = PAYLOAD_BYTES / CELL_BYTES

# propagation delay in fibre, seconds per km
SECONDS_PER_KM = 5e-6


def mbps_to_cells(mbps):
    return mbps * CELLS_PER_MBPS


def cells_to_mbps(cells_per_s):
    return cells_per_s / CELLS_PER_MBPS


def application_mbps(link_mbps):
    """Throughput seen above the ATM layer (48 of every 53 bytes)."""
    return link_mbps * APPLICATION_FACTOR


def km_to_seconds(km):
    return km * SECONDS_PER_KM
