"""Synthetic fatigue data generation."""
