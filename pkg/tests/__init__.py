"""Unit tests of the toricond package."""
