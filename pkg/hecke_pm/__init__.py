"""Exact computations with modular forms and Hecke algebras modulo prime powers."""

__version__ = "0.1.0"
