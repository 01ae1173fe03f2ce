"""Correlation, VIF screening, engineered features and golden features."""
