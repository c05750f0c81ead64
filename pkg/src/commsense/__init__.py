"""CSI-based environment sensing over simulated 5G NR TDL/CDL channels."""
__version__ = "0.1.0"
