"""Initialization file for library."""
# pylint: disable=C0114

__version__ = "0.3.0"
