"""Finite-state and pushdown gamblers, s-gales, and Champernowne-style sequences."""
