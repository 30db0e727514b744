"""Validation and reporting."""
