"""Hypotheses, cross-validation, hyperparameter search, ensembling and the run."""
