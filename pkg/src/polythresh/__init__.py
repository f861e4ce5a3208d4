"""Threshold phenomena for the volume of random polytopes."""
__version__ = "0.1.0"
