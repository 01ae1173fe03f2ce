"""Typed datasets, ingestion, EDA and the train/test split."""
