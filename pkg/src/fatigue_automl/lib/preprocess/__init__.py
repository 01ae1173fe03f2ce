"""Preprocessing: imputation, encoding, power transforms and scaling."""
