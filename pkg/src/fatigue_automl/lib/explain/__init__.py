"""SHAP attribution, permutation importance and explanation tables."""
