"""Run directories and SVG figures."""
