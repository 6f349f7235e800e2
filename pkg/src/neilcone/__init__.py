"""Test-function cones, dual certificates, and dilations for the constrained
disk algebra of functions with vanishing derivative at the origin."""

from neilcone import cone, dilation, gns, kernels, linalg

__all__ = ["linalg", "kernels", "cone", "gns", "dilation"]
__version__ = "0.1.0"
