"""Ziv-Merhav-type cross entropy estimation for hidden-Markov processes."""

__version__ = "0.1.0"
