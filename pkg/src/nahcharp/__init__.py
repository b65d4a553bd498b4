"""Exact algebra for twisted pullbacks of nilpotent Higgs modules and the
local inverse Cartier transform in characteristic ``p``."""

__version__ = "0.1.0"
