"""The learner zoo: trees, forests, boosted trees, networks and linear models."""
