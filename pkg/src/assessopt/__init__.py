"""Bibliometric scoring and provably optimal product selection for national
research assessment exercises."""

__version__ = "0.1.0"
