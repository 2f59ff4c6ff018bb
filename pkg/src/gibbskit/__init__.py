"""Gibbs measures on subshifts of finite type, checked on finite instances."""

__version__ = "0.1.0"
