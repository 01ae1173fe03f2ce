"""lib init."""
