"""Toolkit for extracting and analyzing company-level risk factors in news."""

__version__ = "0.1.0"
