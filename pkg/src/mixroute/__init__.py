"""mixroute: layered mixnet with jointly randomized, verifiable routing.

Protocol library plus a deterministic in-process simulator and an
analysis toolkit for anonymity and load-balancing measurements.
"""

__version__ = "0.1.0"
