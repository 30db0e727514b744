"""Checkpoints, tables, images and plots."""
