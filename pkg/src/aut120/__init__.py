"""Exact linear-algebra and group-arithmetic checks on automorphisms of extremal self-dual codes of length 120."""

__version__ = "0.1.0"
