"""Experiment drivers behind the CLI commands."""
