"""Hankel ranks, quantifier-rank types and Feferman-Vaught checks on finite structures."""

__version__ = "0.1.0"
