"""Desk-scale mmWave ISAC sensing lab: synthetic beam sweeps, a from-scratch
CNN gesture classifier, and sensing-airtime subsampling analysis."""

__version__ = "0.1.0"
