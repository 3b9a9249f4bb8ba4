"""Holomorphic germ dynamics for suspension-type holonomy pairs."""

__version__ = "0.1.0"
