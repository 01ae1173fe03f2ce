"""Regression metrics and parity bands."""
