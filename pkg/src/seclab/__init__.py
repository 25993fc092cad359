"""Single-threshold k-secretary selection: policies, bounds, oracles and a harness."""

__version__ = "0.1.0"
